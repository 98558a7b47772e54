fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(capoint_cli::run(&argv));
}
