fn main() {
    std::process::exit(cyclemeter::cli::main_entry());
}
