fn main() {
    std::process::exit(gclab::lab::dispatch(std::env::args_os()));
}
