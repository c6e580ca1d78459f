fn main() {
    std::process::exit(hdfe::cli::parse_and_dispatch(std::env::args_os()));
}
