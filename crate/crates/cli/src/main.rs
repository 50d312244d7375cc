fn main() {
    std::process::exit(anchorlab_cli::exec(std::env::args_os()));
}
