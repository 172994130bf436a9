fn main() {
    std::process::exit(pspectra::run(std::env::args_os()));
}
