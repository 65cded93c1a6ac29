fn main() {
    std::process::exit(isoasym_cli::app::main_with(std::env::args_os()));
}
