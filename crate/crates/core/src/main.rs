fn main() {
    std::process::exit(tempsec::cli::main());
}
