fn main() {
    std::process::exit(artbh_core::cli::run(std::env::args_os()));
}
