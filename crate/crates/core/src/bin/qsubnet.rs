fn main() {
    std::process::exit(qsubnet::cli::run(std::env::args_os()));
}
