use std::process::ExitCode;

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("OVERPARAM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    ExitCode::from(overparam::harness::cli::run(std::env::args_os()))
}
