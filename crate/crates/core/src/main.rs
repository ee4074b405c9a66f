use std::process::ExitCode;

use clap::error::ErrorKind;
use ris_squint::cli::{self, CliConfig, THREADS_ENV};
use ris_squint::experiments::{figure_preset, reproduce_figure, run_sweep};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV}: expected a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("{THREADS_ENV}: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let config = match cli::parse_args(std::env::args().skip(1)) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }

    let (result, output) = match config {
        CliConfig::Selftest => {
            return match cli::selftest() {
                Ok(report) => {
                    print!("{report}");
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        let names: Vec<_> = report.failures().iter().map(|c| c.name).collect();
                        eprintln!("selftest failed: {}", names.join(", "));
                        ExitCode::from(EXIT_RUNTIME)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            };
        }
        CliConfig::Figure {
            id,
            trials,
            seed,
            output,
        } => {
            if let Ok(p) = figure_preset(id) {
                eprintln!("figure {id}: {} ({trials} trials, seed {seed})", p.title);
            }
            (reproduce_figure(id, trials, seed), output)
        }
        CliConfig::Sweep {
            config,
            schemes,
            variable,
            values,
            output,
        } => (run_sweep(&config, &schemes, variable, &values), output),
    };

    let result = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    eprint!("{}", cli::summary(&result));
    if let Err(e) = cli::emit_csv(&result, output.as_deref()) {
        eprintln!("error: cannot write CSV: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    ExitCode::SUCCESS
}
