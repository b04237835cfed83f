fn main() {
    dfs_certify_cli::init_threads();
    let code = dfs_certify_cli::run_cli(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
