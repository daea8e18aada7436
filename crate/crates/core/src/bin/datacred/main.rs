fn main() -> std::process::ExitCode {
    datacred::cli::main()
}
