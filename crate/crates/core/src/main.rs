use std::collections::HashMap;

fn main() {
    let env: HashMap<String, String> = std::env::vars().collect();
    std::process::exit(micropass::cli::run_cli(std::env::args_os(), &env));
}
