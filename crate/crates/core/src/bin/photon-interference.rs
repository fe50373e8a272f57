fn main() {
    std::process::exit(photon_interference::cli::main_with(std::env::args_os()));
}
