// `!(a < b)` checks double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod output;
mod run;
mod verify;

use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<theta_rough::Error>().is_some_and(|t| matches!(t, theta_rough::Error::InvalidArgument(_)))
                || e.downcast_ref::<run::Usage>().is_some();
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
