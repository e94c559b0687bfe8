fn main() -> std::process::ExitCode {
    spinsme::cli_runner::main_entry()
}
