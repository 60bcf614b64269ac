fn main() {
    if let Err(err) = knngf::cli::run() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
