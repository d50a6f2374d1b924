use clap::Parser;

use eds_wave::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.output);
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            std::process::exit(outcome.exit_code);
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(if err.is_config_error() { 1 } else { 2 });
        }
    }
}
