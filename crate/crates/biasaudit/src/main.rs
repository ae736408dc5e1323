fn main() -> std::process::ExitCode {
    biasaudit::cli::run_from(std::env::args_os())
}
