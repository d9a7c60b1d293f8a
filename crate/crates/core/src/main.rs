fn main() {
    std::process::exit(airlink::workbench::cli_main(std::env::args_os()));
}
