use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (out, err, code) = laxdyn::run_args(std::env::args_os());
    if !out.is_empty() {
        let _ = std::io::stdout().write_all(out.as_bytes());
    }
    if !err.is_empty() {
        let _ = std::io::stderr().write_all(err.as_bytes());
    }
    ExitCode::from(code as u8)
}
