fn main() {
    std::process::exit(bgpp::cli::run_from_env());
}
