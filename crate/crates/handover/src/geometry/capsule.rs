use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

/// Swept-sphere volume: segment `a`-`b` with radius `r`. `a == b` is a sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub r: f64,
}

impl Capsule {
    pub fn new(a: Point3<f64>, b: Point3<f64>, r: f64) -> Self {
        debug_assert!(r > 0.0);
        Self { a, b, r }
    }

    pub fn sphere(center: Point3<f64>, r: f64) -> Self {
        Self::new(center, center, r)
    }
}

/// A labeled collection of capsules (robot links or human body parts).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CapsuleSet {
    pub capsules: Vec<Capsule>,
    pub labels: Vec<String>,
}

impl CapsuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, capsule: Capsule, label: impl Into<String>) {
        self.capsules.push(capsule);
        self.labels.push(label.into());
    }

    pub fn len(&self) -> usize {
        self.capsules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capsules.is_empty()
    }

    /// Translate every capsule by `offset`.
    pub fn translated(&self, offset: &Vector3<f64>) -> Self {
        Self {
            capsules: self
                .capsules
                .iter()
                .map(|c| Capsule::new(c.a + offset, c.b + offset, c.r))
                .collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Closest points realizing a segment-segment distance.
#[derive(Debug, Clone, Copy)]
pub struct SegmentWitness {
    pub on_first: Point3<f64>,
    pub on_second: Point3<f64>,
}

/// Minimum distance between segments `p1`-`q1` and `p2`-`q2`.
///
/// Closest-point parameters are clamped to the segments; degenerate
/// (point) segments are handled.
pub fn segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> (f64, SegmentWitness) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);

    let (s, t);
    const EPS: f64 = 1e-300;
    if a <= EPS && e <= EPS {
        s = 0.0;
        t = 0.0;
    } else if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s_ = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t_num = b * s_ + f;
            let t_;
            if t_num < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_num > e {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t_ = t_num / e;
            }
            s = s_;
            t = t_;
        }
    }

    let w1 = p1 + d1 * s;
    let w2 = p2 + d2 * t;
    (
        (w1 - w2).norm(),
        SegmentWitness {
            on_first: w1,
            on_second: w2,
        },
    )
}

/// Signed clearance between two capsules; negative means penetration.
pub fn capsule_distance(c1: &Capsule, c2: &Capsule) -> f64 {
    let (d, _) = segment_distance(&c1.a, &c1.b, &c2.a, &c2.b);
    d - c1.r - c2.r
}
