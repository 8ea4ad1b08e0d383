fn main() {
    std::process::exit(bernlab::cli::main());
}
