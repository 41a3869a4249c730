use std::process::ExitCode;

fn main() -> ExitCode {
    let cwd = std::env::current_dir().expect("cannot determine working directory");
    let args: Vec<String> = std::env::args().collect();
    let mut stdout = std::io::stdout();
    ExitCode::from(vcs::cli::run(&cwd, args, &mut stdout) as u8)
}
