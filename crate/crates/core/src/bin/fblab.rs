fn main() -> std::process::ExitCode {
    fblab::cli::main()
}
