fn main() {
    std::process::exit(itpsim::cli::main_with(std::env::args_os()));
}
