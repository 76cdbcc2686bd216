use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = stderr.lock();
    if let Err(f) = etaq::configure_threads() {
        let _ = writeln!(err, "error: {}", f.message);
        return ExitCode::from(f.code as u8);
    }
    let code = etaq::run(std::env::args_os(), &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(code as u8)
}
