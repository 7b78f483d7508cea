fn main() {
    std::process::exit(ambiadapt::scenario::cli_main(std::env::args_os()));
}
