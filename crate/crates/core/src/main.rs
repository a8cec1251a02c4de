fn main() {
    let code = altq::harness::run_cli(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
