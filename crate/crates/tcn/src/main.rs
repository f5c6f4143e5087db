fn main() {
    if let Err(e) = tcn::cli::run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
