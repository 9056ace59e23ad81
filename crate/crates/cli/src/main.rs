fn main() {
    std::process::exit(mc_elmap_cli::run(std::env::args_os()));
}
