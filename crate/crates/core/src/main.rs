fn main() {
    std::process::exit(parcaus::cli::run(std::env::args_os()));
}
