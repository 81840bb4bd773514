fn main() {
    std::process::exit(stablewalk::cli::run());
}
