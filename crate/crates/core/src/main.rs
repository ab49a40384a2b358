use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let status = stoprule::cli::run(
        std::env::args_os(),
        Box::new(io::BufWriter::new(io::stdout())),
        &mut io::stderr(),
    );
    ExitCode::from(status as u8)
}
