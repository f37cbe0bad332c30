fn main() {
    std::process::exit(qescape::run(std::env::args_os()));
}
