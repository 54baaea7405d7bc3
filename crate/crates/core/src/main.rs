fn main() {
    std::process::exit(threestage::cli::main_with_args(std::env::args_os()));
}
