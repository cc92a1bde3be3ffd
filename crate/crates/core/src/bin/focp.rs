use std::io::Write;
use std::process::ExitCode;

use focp::cli::{execute, parse_args, RunConfig, OUTPUT_DIR_ENV};
use focp::FocpError;

fn run(config: &RunConfig) -> Result<(), FocpError> {
    let output = execute(config)?;
    let dir = std::env::var_os(OUTPUT_DIR_ENV);
    match config.output_path(dir.as_deref(), &output.problem_name) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, output.text)?;
        }
        None => std::io::stdout().lock().write_all(output.text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os().skip(1)).and_then(|config| run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(FocpError::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("focp: {} error: {e}", e.stage());
            ExitCode::FAILURE
        }
    }
}
