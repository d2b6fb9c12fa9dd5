fn main() {
    std::process::exit(tweetlens::cli::run_from(std::env::args_os()));
}
