//! Batch entry point: configure a generator ensemble, run verification
//! suites, emit machine-readable reports and optional path dumps.
//!
//! Exit status: 0 when every suite passes, 1 on suite failure, 2 on
//! configuration or I/O problems.

use sigmag::config::SuiteConfig;
use sigmag::suite::{dump_paths, run_all};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
sigmag - verification suites for zero-set-carried semimartingales

USAGE:
  sigmag --config PATH [--seed N] [--threads N] [--dump K0[,K1,...]]

FLAGS:
  --config PATH   suite configuration file (key = value lines, JSON values)
  --seed N        override the seed from the config
  --threads N     worker threads (0 or absent: all cores); results do not
                  depend on the thread count
  --dump LIST     instead of running suites, dump the listed ensemble
                  members as CSV files under <output_dir>/paths/
  --help          show this help
";

struct Args {
    config: Option<PathBuf>,
    seed: Option<u64>,
    threads: usize,
    dump: Option<Vec<usize>>,
}

fn parse_args() -> Result<Args, String> {
    let mut out = Args {
        config: None,
        seed: None,
        threads: 0,
        dump: None,
    };
    let mut it = std::env::args().skip(1);
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--help" | "-h" => {
                print!("{USAGE}");
                std::process::exit(0);
            }
            "--config" => {
                let v = it.next().ok_or("missing value for --config")?;
                out.config = Some(PathBuf::from(v));
            }
            "--seed" => {
                let v = it.next().ok_or("missing value for --seed")?;
                out.seed = Some(v.parse().map_err(|e| format!("bad --seed: {e}"))?);
            }
            "--threads" => {
                let v = it.next().ok_or("missing value for --threads")?;
                out.threads = v.parse().map_err(|e| format!("bad --threads: {e}"))?;
            }
            "--dump" => {
                let v = it.next().ok_or("missing value for --dump")?;
                let idxs = v
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| format!("bad --dump: {e}"))?;
                out.dump = Some(idxs);
            }
            other => return Err(format!("unknown flag '{other}'")),
        }
    }
    Ok(out)
}

fn run() -> Result<u8, (u8, String)> {
    let args = parse_args().map_err(|e| (2, e))?;
    let config_path = args
        .config
        .ok_or((2, "missing --config (see --help)".to_string()))?;
    let mut cfg = SuiteConfig::parse_file(&config_path).map_err(|e| (2, e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| (2, format!("thread pool: {e}")))?;

    if let Some(indices) = args.dump {
        let files = pool
            .install(|| dump_paths(&cfg, &indices))
            .map_err(|e| (2, e.to_string()))?;
        for f in files {
            println!("wrote {}", f.display());
        }
        return Ok(0);
    }

    let outcome = pool
        .install(|| run_all(&cfg))
        .map_err(|e| (2, e.to_string()))?;
    for (suite, verdict) in &outcome.summary {
        println!("{suite}: {verdict}");
    }
    Ok(if outcome.all_pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
