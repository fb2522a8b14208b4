fn main() -> std::process::ExitCode {
    effico::cli::main()
}
