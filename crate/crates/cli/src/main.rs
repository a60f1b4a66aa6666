fn main() {
    std::process::exit(nmqem_cli::execute(std::env::args_os()));
}
