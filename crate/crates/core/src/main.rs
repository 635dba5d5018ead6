fn main() {
    std::process::exit(spectral_zeta::cli::main_with(std::env::args_os()));
}
