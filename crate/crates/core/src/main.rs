fn main() {
    std::process::exit(rectifier::cli::main_with_env());
}
