use std::process::ExitCode;

use anyhow::Context;
use roelab_cli::args::Format;
use roelab_cli::{parse_invocation, report_diff, run_config, Invocation, InvocationError, Report};

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ROELAB_THREADS") {
        let n: usize = v.parse().with_context(|| format!("ROELAB_THREADS={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn read_report(path: &std::path::Path) -> anyhow::Result<Report> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing report {}", path.display()))
}

fn run() -> anyhow::Result<u8> {
    configure_threads()?;
    let inv = match parse_invocation(std::env::args_os()) {
        Ok(inv) => inv,
        Err(InvocationError::Clap(e)) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { 1 } else { 0 });
        }
        Err(InvocationError::Usage(e)) => return Err(e),
    };
    match inv {
        Invocation::Diff(d) => {
            let diffs = report_diff(&read_report(&d.a)?, &read_report(&d.b)?, d.tol)?;
            println!("{}", serde_json::to_string_pretty(&diffs)?);
            Ok(if diffs.is_empty() { 0 } else { 3 })
        }
        Invocation::Run(cfg) => {
            let report = run_config(&cfg)?;
            let text = match cfg.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv()?,
            };
            match &cfg.out {
                Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            eprintln!("{} {:?} in {} ms", report.command, report.verdict, report.wall_time_ms);
            Ok(report.verdict.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
