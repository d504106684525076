use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = bellfowler::cli::main_with(argv, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
