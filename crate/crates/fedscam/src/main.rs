fn main() {
    std::process::exit(fedscam::cli::cli_main(std::env::args_os()));
}
