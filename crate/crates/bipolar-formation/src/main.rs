fn main() {
    std::process::exit(bipolar_formation::app::cli_main(std::env::args_os()));
}
