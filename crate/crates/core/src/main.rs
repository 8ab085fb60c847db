fn main() {
    let code = schurer_stancu::cli::run(
        std::env::args().collect(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
