fn main() {
    std::process::exit(handover::cli::main_with_args(std::env::args()));
}
