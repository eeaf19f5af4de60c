fn main() {
    std::process::exit(wa_distill::cli::run(std::env::args_os()));
}
