fn main() {
    std::process::exit(bco_harness::cli::main_with(std::env::args_os()));
}
