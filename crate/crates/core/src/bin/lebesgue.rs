fn main() {
    std::process::exit(lebesgue_quadrature::cli::main_entry(std::env::args_os()));
}
