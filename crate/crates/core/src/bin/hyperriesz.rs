fn main() {
    std::process::exit(hyperriesz::cli::run(std::env::args_os()));
}
