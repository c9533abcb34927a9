use clap::Parser;
use qfi_compress::cli::{exit_code_for, run, RunConfig};

fn main() {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests exit 0; bad flags are config errors.
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(2);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(err) = run(&config) {
        eprintln!("error: {err}");
        std::process::exit(exit_code_for(&err));
    }
}
