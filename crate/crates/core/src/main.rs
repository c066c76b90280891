fn main() {
    std::process::exit(spnc::cli::run(std::env::args_os()));
}
