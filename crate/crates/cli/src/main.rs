fn main() {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = bigboard_cli::dispatch(std::env::args_os(), &mut out) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
