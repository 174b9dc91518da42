use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use facthist_cli::{limits_from_env, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = limits_from_env().and_then(|limits| run(&cli, &limits));
    match result {
        Ok(resp) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(resp.render(cli.pretty).as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(resp.code)
        }
        Err(e) => {
            eprintln!("facthist: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
