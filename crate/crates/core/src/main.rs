fn main() {
    let args = std::env::args().collect();
    let code = jcr::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
