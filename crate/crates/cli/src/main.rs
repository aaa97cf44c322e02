use clap::Parser;
use csh_cli::args::Cli;

fn main() {
    // clap's own exit status for usage errors is 2, which is reserved here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                csh_cli::EXIT_INPUT
            } else {
                csh_cli::EXIT_OK
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match csh_cli::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            csh_cli::EXIT_INPUT
        }
    };
    std::process::exit(code);
}
