fn main() { std::process::exit(fermi_qfi::cli::run()); }
