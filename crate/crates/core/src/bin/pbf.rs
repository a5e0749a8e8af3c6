fn main() {
    std::process::exit(pbf::cli::run(std::env::args_os()));
}
