fn main() -> std::process::ExitCode {
    dam::cli::main()
}
