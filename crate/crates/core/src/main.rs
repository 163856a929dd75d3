use std::io;
use std::process::ExitCode;

use ipmagnus::cli::{run, OUT_DIR_ENV};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let env_out = std::env::var(OUT_DIR_ENV).ok();
    let code = run(&args, env_out.as_deref(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
