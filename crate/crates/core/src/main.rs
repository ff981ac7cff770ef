fn main() -> std::process::ExitCode {
    sepdiag::cli::main()
}
