//! Command line front end.
//!
//! Exit codes: 0 pass, 1 graded failure, 2 input or operational error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use trajsup::report::{parse_scores_csv, score_svg, scores_csv, summarize_scores, ScoreRow};
use trajsup::scenario_io::{load_scenario, parse_overrides, write_scenario};
use trajsup::{run_scenario, IoError, IoResult, RunReport};
use trajsup_core::scenario::{inject_fault, Fault};

const SCENARIO_PATH_ENV: &str = "SUPERVISOR_SCENARIO_PATH";

#[derive(Parser)]
#[command(
    name = "trajsup",
    version,
    about = "Replay and grade trajectory supervisor scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay one scenario and write its score CSV and report.
    Run {
        /// Scenario file; relative paths are also looked up under $SUPERVISOR_SCENARIO_PATH.
        scenario: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Also write an SVG score timeline.
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Replay every `*.scn` file of a directory.
    Batch {
        dir: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(short, long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write a copy of a scenario with a fault injected into every frame.
    Inject {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        fault: FaultKind,
        /// Velocity factor (friction-exceed).
        #[arg(long)]
        scale: Option<f64>,
        /// Lateral offset [m] (bound-collision, pose-mismatch).
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<f64>,
        /// Added velocity [m/s] (rule-violation).
        #[arg(long, allow_hyphen_values = true)]
        dv: Option<f64>,
        /// Added acceleration [m/s²] (engine-overdrive).
        #[arg(long, allow_hyphen_values = true)]
        dax: Option<f64>,
        /// Final emergency speed [m/s] (emergency-not-stopping).
        #[arg(long)]
        final_speed: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Summarize a score CSV.
    Report {
        scores: PathBuf,
        /// Write an SVG score timeline to this path.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    /// Override a scenario header value, e.g. `--set rss.rho=0.4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    items: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultKind {
    FrictionExceed,
    BoundCollision,
    RuleViolation,
    PoseMismatch,
    EngineOverdrive,
    EmergencyNotStopping,
}

fn resolve_scenario(path: &Path) -> IoResult<PathBuf> {
    if path.exists() {
        return Ok(path.to_path_buf());
    }
    if path.is_relative() {
        if let Some(root) = std::env::var_os(SCENARIO_PATH_ENV) {
            let candidate = Path::new(&root).join(path);
            if candidate.exists() {
                return Ok(candidate);
            }
        }
    }
    Err(IoError::Usage(format!(
        "scenario `{}` not found (also searched ${SCENARIO_PATH_ENV})",
        path.display()
    )))
}

fn write_file(path: &Path, text: &str) -> IoResult<()> {
    std::fs::write(path, text).map_err(|e| IoError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> IoResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run_one(
    path: &Path,
    out: &Path,
    overrides: &[(String, String)],
    svg: bool,
) -> IoResult<RunReport> {
    let file = load_scenario(path, overrides)?;
    let outcome = run_scenario(&file.scenario)?;
    let name = &file.scenario.name;
    write_file(
        &out.join(format!("{name}_scores.csv")),
        &scores_csv(&outcome.verdicts),
    )?;
    write_file(
        &out.join(format!("{name}_report.txt")),
        &outcome.report.to_string(),
    )?;
    if svg {
        let rows: Vec<ScoreRow> = outcome
            .verdicts
            .iter()
            .map(ScoreRow::from_verdict)
            .collect();
        let text = score_svg(&rows, outcome.report.envelope, name);
        write_file(&out.join(format!("{name}_scores.svg")), &text)?;
    }
    Ok(outcome.report)
}

fn cmd_run(scenario: &Path, out: &Path, overrides: &Overrides, svg: bool) -> IoResult<ExitCode> {
    let overrides = parse_overrides(&overrides.items)?;
    let path = resolve_scenario(scenario)?;
    create_dir(out)?;
    let report = run_one(&path, out, &overrides, svg)?;
    print!("{report}");
    Ok(ExitCode::from(if report.outcome.pass { 0 } else { 1 }))
}

fn cmd_batch(dir: &Path, out: &Path, jobs: usize, overrides: &Overrides) -> IoResult<ExitCode> {
    let overrides = parse_overrides(&overrides.items)?;
    let entries = std::fs::read_dir(dir).map_err(|e| IoError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(IoError::Usage(format!(
            "no *.scn files in `{}`",
            dir.display()
        )));
    }
    create_dir(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| IoError::Usage(format!("cannot start workers: {e}")))?;
    let results: Vec<(PathBuf, IoResult<RunReport>)> = pool.install(|| {
        files
            .par_iter()
            .map(|p| (p.clone(), run_one(p, out, &overrides, false)))
            .collect()
    });

    let mut summary = String::new();
    let (mut passed, mut failed, mut errors) = (0, Vec::new(), 0);
    for (path, result) in &results {
        let line = match result {
            Ok(r) if r.outcome.pass => {
                passed += 1;
                format!("PASS {} ({})", r.name, r.outcome.reason)
            }
            Ok(r) => {
                failed.push(r.name.clone());
                format!("FAIL {} ({})", r.name, r.outcome.reason)
            }
            Err(e) => {
                errors += 1;
                eprintln!("error: {e}");
                format!("ERROR {} ({e})", path.display())
            }
        };
        summary.push_str(&line);
        summary.push('\n');
    }
    summary.push_str(&format!("{passed}/{} passed\n", results.len()));
    if !failed.is_empty() {
        summary.push_str(&format!("failed: {}\n", failed.join(", ")));
    }
    write_file(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(ExitCode::from(if errors > 0 {
        2
    } else if failed.is_empty() {
        0
    } else {
        1
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_inject(
    scenario: &Path,
    kind: FaultKind,
    scale: Option<f64>,
    offset: Option<f64>,
    dv: Option<f64>,
    dax: Option<f64>,
    final_speed: Option<f64>,
    out: &Path,
) -> IoResult<ExitCode> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| IoError::Usage(format!("this fault needs --{flag}")))
    };
    let fault = match kind {
        FaultKind::FrictionExceed => Fault::FrictionExceed {
            scale: need(scale, "scale")?,
        },
        FaultKind::BoundCollision => Fault::BoundCollision {
            offset: need(offset, "offset")?,
        },
        FaultKind::RuleViolation => Fault::RuleViolation {
            dv: need(dv, "dv")?,
        },
        FaultKind::PoseMismatch => Fault::PoseMismatch {
            offset: need(offset, "offset")?,
        },
        FaultKind::EngineOverdrive => Fault::EngineOverdrive {
            dax: need(dax, "dax")?,
        },
        FaultKind::EmergencyNotStopping => Fault::EmergencyNotStopping {
            final_speed: need(final_speed, "final-speed")?,
        },
    };
    let path = resolve_scenario(scenario)?;
    let mut file = load_scenario(&path, &[])?;
    file.scenario = inject_fault(&file.scenario, fault);

    let src_dir = path.parent().unwrap_or(Path::new("."));
    let out_dir = match out.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    create_dir(&out_dir)?;
    let same_dir = match (src_dir.canonicalize(), out_dir.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if !same_dir {
        let track = src_dir.join(&file.track_path);
        let abs = track.canonicalize().map_err(|e| IoError::Io {
            path: track,
            source: e,
        })?;
        file.track_path = abs.display().to_string();
    }
    write_file(out, &write_scenario(&file))?;
    println!(
        "wrote {} (expected = {})",
        out.display(),
        file.scenario.expected
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(scores: &Path, svg: Option<&Path>) -> IoResult<ExitCode> {
    let text = std::fs::read_to_string(scores).map_err(|e| IoError::Io {
        path: scores.to_path_buf(),
        source: e,
    })?;
    let rows = parse_scores_csv(&text, &scores.display().to_string())?;
    print!("{}", summarize_scores(&rows));
    if let Some(svg) = svg {
        let title = scores
            .file_stem()
            .map_or(String::new(), |s| s.to_string_lossy().into_owned());
        write_file(svg, &score_svg(&rows, None, &title))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            out,
            svg,
            overrides,
        } => cmd_run(scenario, out, overrides, *svg),
        Command::Batch {
            dir,
            out,
            jobs,
            overrides,
        } => cmd_batch(dir, out, *jobs, overrides),
        Command::Inject {
            scenario,
            fault,
            scale,
            offset,
            dv,
            dax,
            final_speed,
            out,
        } => cmd_inject(
            scenario,
            *fault,
            *scale,
            *offset,
            *dv,
            *dax,
            *final_speed,
            out,
        ),
        Command::Report { scores, svg } => cmd_report(scores, svg.as_deref()),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
