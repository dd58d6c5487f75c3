fn main() {
    std::process::exit(qcat::cli::main_entry());
}
