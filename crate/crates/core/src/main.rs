fn main() {
    std::process::exit(bellseq::cli::run(std::env::args_os()));
}
