fn main() {
    std::process::exit(indist_phase::cli::main_from_env());
}
