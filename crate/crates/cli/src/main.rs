use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pdisp_core::bench::{
    export, format_verdict, render_table, run_benchmark, runtime_csv, verify, ExportFormat, ParamOverrides,
    SolutionFile, Suite,
};
use pdisp_core::Metric;

#[derive(Parser)]
#[command(name = "pdisp", version, about = "Continuous p-dispersion in polyhedral containers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance per p and write a solution file for each.
    Solve(SolveArgs),
    /// Re-check a solution file with the brute-force oracle.
    Verify { file: PathBuf },
    /// Convert a solution file.
    Export {
        file: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        /// Output path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in name (cube, tetrahedron, h_box, star) or container JSON file.
    #[arg(long)]
    container: String,
    /// A single p, an inclusive range `a..b` or `a-b`, or a comma list.
    #[arg(long)]
    p: String,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Restarts after the initial stage.
    #[arg(long)]
    iters: Option<usize>,
    /// Penalty continuation rounds.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d_init: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    rays: Option<usize>,
    #[arg(long, env = "PDISP_OUT_DIR", default_value = ".")]
    out: PathBuf,
    /// Append per-run wall-clock times to this CSV file.
    #[arg(long)]
    runtime_log: Option<PathBuf>,
}

fn parse_p_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let a: usize = a.trim().parse().with_context(|| format!("bad p range `{part}`"))?;
                let b: usize = b.trim_start_matches('=').trim().parse().with_context(|| format!("bad p range `{part}`"))?;
                if a > b {
                    bail!("empty p range `{part}`");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad p `{part}`"))?),
        }
    }
    if out.is_empty() || out.contains(&0) {
        bail!("p must list at least one value, each >= 1");
    }
    Ok(out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn solve(args: SolveArgs) -> Result<bool> {
    let suite = Suite::parse(&args.container)?;
    let ps = parse_p_list(&args.p)?;
    let overrides = ParamOverrides {
        beta: args.beta,
        q: args.q,
        iterations: args.iters,
        sumt_rounds: args.k,
        d_init: args.d_init,
        rho_init: args.rho,
        rays: args.rays,
    };
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let container = suite.load()?;
    let reports = run_benchmark(&suite, &ps, args.metric, &overrides, args.seed)?;

    for report in reports.iter().flatten() {
        let file = SolutionFile::new(&container, args.metric, &report.solution, &report.params);
        let path = args.out.join(format!("{}.json", file.stem()));
        file.write(&path).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", render_table(&reports));

    if let Some(log) = &args.runtime_log {
        let csv = runtime_csv(&reports);
        let body = if log.exists() {
            csv.split_once('\n').map_or("", |(_, rows)| rows).to_string()
        } else {
            csv
        };
        use std::io::Write;
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(log)
            .and_then(|mut f| f.write_all(body.as_bytes()))
            .with_context(|| format!("writing {}", log.display()))?;
    }
    Ok(reports.iter().all(Result::is_ok))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Verify { file } => {
            let sol = SolutionFile::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let report = verify(&sol)?;
            print!("{}", format_verdict(&report));
            Ok(report.feasible)
        }
        Command::Export { file, format, out } => {
            let format: ExportFormat = format.parse()?;
            let sol = SolutionFile::read(&file).with_context(|| format!("reading {}", file.display()))?;
            let text = export(&sol, format)?;
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
