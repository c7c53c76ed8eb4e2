fn main() -> std::process::ExitCode {
    let code = triperiod::commands::main_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::ExitCode::from(code)
}
