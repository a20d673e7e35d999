fn main() {
    std::process::exit(supershift_lab::main_with_args(std::env::args_os()));
}
