fn main() -> std::process::ExitCode {
    credal_polytree::cli::main()
}
