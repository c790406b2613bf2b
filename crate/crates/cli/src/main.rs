use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, report) = welfarist_cli::run(std::env::args_os());
    if code == welfarist_cli::EXIT_USAGE {
        eprint!("{report}");
    } else {
        print!("{report}");
    }
    ExitCode::from(code as u8)
}
