fn main() -> std::process::ExitCode {
    npm_filter::cli::npm_main()
}
