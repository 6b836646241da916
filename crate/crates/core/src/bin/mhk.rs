fn main() {
    std::process::exit(markov_hoeffding::cli::run(std::env::args_os()));
}
