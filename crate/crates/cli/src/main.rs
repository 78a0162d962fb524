use std::io::{self, Write};
use std::process::ExitCode;

use mot_bounds_cli::{execute, parse_args};

fn main() -> ExitCode {
    let cmd = match parse_args(std::env::args_os()) {
        Ok(cmd) => cmd,
        Err(e) => {
            // help and version land here too, with exit code 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (stdout, stderr) = (io::stdout(), io::stderr());
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let code = execute(&cmd, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
