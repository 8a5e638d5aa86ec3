fn main() {
    std::process::exit(barrier_mppi::cli::parse_and_run(std::env::args_os()));
}
