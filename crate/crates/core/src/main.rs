fn main() {
    std::process::exit(jmbound::cli::run());
}
