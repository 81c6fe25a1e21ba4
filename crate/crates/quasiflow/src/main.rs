fn main() {
    std::process::exit(quasiflow::cli::run_command(std::env::args_os()));
}
