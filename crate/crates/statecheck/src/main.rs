use std::process::exit;

fn main() {
    exit(statecheck::cli::run(std::env::args_os()));
}
