fn main() {
    std::process::exit(coarse_lab::cli::main_entry());
}
