fn main() -> std::process::ExitCode {
    npm_filter::cli::repo_main()
}
