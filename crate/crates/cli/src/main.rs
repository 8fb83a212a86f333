fn main() {
    std::process::exit(povm_forge_cli::run(std::env::args_os()));
}
