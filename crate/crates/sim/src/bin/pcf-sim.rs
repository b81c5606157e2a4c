fn main() {
    std::process::exit(pcf_sim::cli::main_with_args(std::env::args_os()));
}
