fn main() {
    std::process::exit(gslam::app::main_with_args(std::env::args_os()));
}
