use std::io::Write;

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let outcome = bvbfv::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
