fn main() {
    std::process::exit(dclus_cli::run(std::env::args_os()));
}
