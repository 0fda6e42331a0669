fn main() -> std::process::ExitCode {
    photonloc::cli::run(std::env::args_os())
}
