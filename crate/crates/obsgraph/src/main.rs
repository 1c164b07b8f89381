fn main() {
    std::process::exit(obsgraph::run(std::env::args_os()));
}
