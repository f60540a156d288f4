fn main() {
    let code = nabla_fdm::expcli::run(std::env::args_os(), &mut std::io::stderr());
    std::process::exit(code);
}
