fn main() {
    std::process::exit(mopchr::cli::main_with(std::env::args_os()));
}
