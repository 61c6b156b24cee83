fn main() {
    std::process::exit(pitchtrack::cli::run(std::env::args_os()));
}
