fn main() {
    std::process::exit(gumbel_core::cli::run(std::env::args_os()));
}
