fn main() {
    std::process::exit(twocons_cli::dispatch(std::env::args_os()));
}
