fn main() {
    std::process::exit(qso_lab::cli::main_with_args(std::env::args_os()));
}
