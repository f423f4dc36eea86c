fn main() {
    env_logger::init();
    std::process::exit(xfmap::cli::run(std::env::args_os()));
}
