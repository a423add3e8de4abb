use std::io::{self, BufWriter};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = BufWriter::new(io::stdout().lock());
    let code = dimer::cli::run(std::env::args_os(), &mut input, &mut out, &mut io::stderr());
    ExitCode::from(code as u8)
}
