fn main() {
    env_logger::init();
    std::process::exit(htaac_qsdp::cli::run(std::env::args_os()));
}
