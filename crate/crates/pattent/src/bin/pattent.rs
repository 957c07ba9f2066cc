fn main() {
    std::process::exit(pattent::cli::main_entry());
}
