fn main() {
    std::process::exit(speechcmd::cli::main());
}
