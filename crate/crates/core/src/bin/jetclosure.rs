fn main() {
    std::process::exit(jet_closure::cli::main_with_args(std::env::args_os()));
}
