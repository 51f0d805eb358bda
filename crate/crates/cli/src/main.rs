fn main() {
    std::process::exit(mhd25::run(std::env::args_os()));
}
