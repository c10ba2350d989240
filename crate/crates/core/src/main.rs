fn main() -> std::process::ExitCode {
    knot_descent::cli::main_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
