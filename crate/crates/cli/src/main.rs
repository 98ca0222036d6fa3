use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, report) = stokes_cli::run(std::env::args_os());
    let text = match report.get("usage").and_then(|u| u.as_str()) {
        Some(usage) => usage.to_string(),
        None => match serde_json::to_string_pretty(&report) {
            Ok(t) => t + "\n",
            Err(e) => {
                eprintln!("failed to render report: {e}");
                return ExitCode::from(2);
            }
        },
    };
    // a closed pipe is not an error worth reporting
    let _ = if code == 0 || report.get("usage").is_none() {
        std::io::stdout().write_all(text.as_bytes())
    } else {
        std::io::stderr().write_all(text.as_bytes())
    };
    ExitCode::from(code as u8)
}
