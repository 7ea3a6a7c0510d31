use nalgebra::DVector;

use super::{position_jacobian, JointVector, RobotModel};
use crate::error::Result;

/// Relative singular-value cutoff for rank decisions.
const RANK_TOL: f64 = 1e-8;

/// Orthonormal basis of the null space of the 3 x dof position Jacobian.
///
/// Returns `dof - rank(J_p)` vectors; moving along any of them leaves the
/// end-effector position unchanged to first order.
pub fn position_null_space(model: &RobotModel, q: &JointVector) -> Result<Vec<DVector<f64>>> {
    let jp = position_jacobian(model, q)?;
    let dof = model.dof();
    let svd = jp.svd(true, true);
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let tol = RANK_TOL * sigma_max.max(1.0e-300);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol)
        .count();
    // v_t has min(3, dof) rows; right singular vectors beyond that row count
    // are not returned by the thin SVD, so complete the basis by projecting
    // out the row space of J_p from the identity when dof exceeds the rows.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for r in rank..v_t.nrows() {
        basis.push(v_t.row(r).transpose());
    }
    if v_t.nrows() < dof {
        // Gram-Schmidt the remaining directions against the row space of J_p
        // and the vectors collected so far.
        let mut span: Vec<DVector<f64>> = (0..v_t.nrows())
            .map(|r| v_t.row(r).transpose())
            .collect();
        span.extend(basis.iter().cloned());
        for k in 0..dof {
            if span.len() >= dof {
                break;
            }
            let mut v = DVector::zeros(dof);
            v[k] = 1.0;
            for s in &span {
                let proj = s.dot(&v);
                v -= s * proj;
            }
            let n = v.norm();
            if n > 1e-9 {
                v /= n;
                span.push(v.clone());
                basis.push(v);
            }
        }
    }
    Ok(basis)
}
