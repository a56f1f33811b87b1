fn main() {
    std::process::exit(coflow::main_with(std::env::args_os()));
}
