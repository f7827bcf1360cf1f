use std::process::ExitCode;

use sharptrans_cli::{dispatch, EXIT_USAGE};

fn main() -> ExitCode {
    let (code, text) = dispatch(std::env::args_os());
    if code == EXIT_USAGE {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    ExitCode::from(code as u8)
}
