fn main() {
    std::process::exit(dlattice_cli::main_with(std::env::args_os()));
}
