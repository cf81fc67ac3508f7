fn main() {
    std::process::exit(discrete_holonomy::cli::run(std::env::args_os()));
}
