fn main() {
    std::process::exit(stereo_comfort::cli::run(std::env::args_os()));
}
