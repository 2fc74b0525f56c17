use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(htm_driver::run(std::env::args_os()))
}
