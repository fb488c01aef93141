fn main() {
    std::process::exit(tiling_frames::cli::run(std::env::args_os()));
}
