fn main() {
    std::process::exit(hcx_cli::run(std::env::args_os()));
}
