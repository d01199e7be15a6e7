fn main() {
    std::process::exit(mirrorsweep::run(std::env::args_os()));
}
