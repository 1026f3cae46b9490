fn main() {
    std::process::exit(macrodim_cli::run(std::env::args_os()));
}
