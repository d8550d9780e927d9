fn main() {
    std::process::exit(soliton_lab::cli::main_with_args(std::env::args_os()));
}
