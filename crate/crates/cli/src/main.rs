use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use knotspace::verification::{CheckReport, FittedRate, DEFAULT_N, DEFAULT_SEED};
use knotspace::knot::DEFAULT_STEP;
use knotspace::{run_experiment, verify_vcp_axioms, ExperimentSpec, LinearVcp, VcpKind, VerificationReport};

/// Tolerance on the axiom violation reported by `verify-vcp`.
const AXIOM_TOLERANCE: f64 = 1e-12;

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ABORTED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "knotspace", version, about = "Numerical checks of the L2 geometry of knot spaces")]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, env = "KNOTSPACE_THREADS")]
    threads: Option<usize>,

    /// Print per-cell defects as well as verdicts.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the VCP axioms of a linear cross product on random tuples.
    VerifyVcp {
        /// g2, spin7, kaehler<m> or volume<m>.
        #[arg(long, value_parser = parse_kind)]
        kind: VcpKind,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Flip one structure coefficient before checking.
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// Run an experiment config and write report.json and report.csv.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Like `run`, but print the convergence rate table first.
    Converge {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn parse_kind(s: &str) -> Result<VcpKind, String> {
    VcpKind::parse(s).map_err(|e| format!("{e}; expected g2, spin7, kaehler<m> or volume<m>"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let code = match cli.command {
        Command::VerifyVcp { kind, trials, seed, corrupt } => verify_vcp(kind, trials, seed, corrupt),
        Command::Run { config, out } => run(&config, &out, false, cli.verbose),
        Command::Converge { config, out } => run(&config, &out, true, cli.verbose),
    };
    ExitCode::from(code)
}

fn verify_vcp(kind: VcpKind, trials: usize, seed: u64, corrupt: bool) -> u8 {
    let vcp = match LinearVcp::new(kind) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let vcp = if corrupt { vcp.corrupted() } else { vcp };
    let report = verify_vcp_axioms(&vcp, trials, seed);
    println!("kind {}  m={} r={}  trials={trials} seed={seed}", kind.name(), kind.dim(), kind.fold());
    println!("basis tuples   {}", report.basis_tuples);
    println!("random tuples  {}", report.random_tuples);
    println!("orthogonality  {:.3e}", report.orthogonality);
    println!("norm           {:.3e}", report.norm);
    let ok = report.max_violation() <= AXIOM_TOLERANCE;
    println!("{} (tolerance {AXIOM_TOLERANCE:e})", if ok { "PASS" } else { "FAIL" });
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn run(config: &Path, out: &Path, rates_first: bool, verbose: u8) -> u8 {
    let spec = match load_spec(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = fs::create_dir_all(out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_USAGE;
    }
    print_header(&spec);
    let report = match run_experiment(&spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ABORTED;
        }
    };
    if rates_first {
        print_rates(&report);
        println!();
    }
    print_verdicts(&report, verbose);
    if !rates_first {
        println!();
        print_rates(&report);
    }
    if let Err(e) = write_reports(&report, out) {
        eprintln!("error: {e:#}");
        return EXIT_ABORTED;
    }
    if report.any_cell_aborted() {
        EXIT_ABORTED
    } else if report.all_successful() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn load_spec(path: &Path) -> anyhow::Result<ExperimentSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let spec = ExperimentSpec::from_json(&text).with_context(|| format!("config {}", path.display()))?;
    spec.ambient.build().with_context(|| format!("config {}: ambient", path.display()))?;
    Ok(spec)
}

fn print_header(spec: &ExperimentSpec) {
    println!("experiment {}", spec.name);
    println!("defaults   h={DEFAULT_STEP:e} N={DEFAULT_N} seed={DEFAULT_SEED}");
    let s = &spec.sweep;
    println!(
        "sweep      N={:?} h={:?} seed={} trials={} richardson={} stencil_order={}",
        s.n, s.h, s.seed, s.trials, s.richardson, spec.stencil_order
    );
    println!("threads    {}", rayon::current_num_threads());
    println!();
}

fn print_verdicts(report: &VerificationReport, verbose: u8) {
    println!("{:<14} {:>10} {:>12} {:>8}  verdict", "check", "tolerance", "finest", "monotone");
    for c in &report.checks {
        let finest = c.finest().and_then(|cell| cell.max_defect);
        let monotone = match c.monotone {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        println!(
            "{:<14} {:>10.0e} {:>12} {:>8}  {}{}",
            c.check.name(),
            c.tolerance,
            finest.map_or("-".to_string(), |d| format!("{d:.3e}")),
            monotone,
            c.verdict,
            if c.control { " (control)" } else { "" }
        );
        for note in &c.notes {
            println!("{:<14} note: {note}", "");
        }
        if verbose > 0 {
            print_cells(c);
        }
    }
}

fn print_cells(c: &CheckReport) {
    for cell in &c.cells {
        let value = match (&cell.error, cell.max_defect) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(d)) => format!("{d:.3e}{}", if cell.at_floor { " floor" } else { "" }),
            (None, None) => "-".into(),
        };
        println!("    N={:<5} h={:<8.1e} {value}", cell.n, cell.h);
    }
}

fn print_rates(report: &VerificationReport) {
    println!("{:<14} {:>10} {:>10}", "check", "rate N", "rate h");
    let show = |r: &FittedRate| match r {
        FittedRate::Slope { slope, .. } => format!("{slope:.2}"),
        FittedRate::Floor => "floor".into(),
        FittedRate::Insufficient => "-".into(),
    };
    for c in &report.checks {
        println!("{:<14} {:>10} {:>10}", c.check.name(), show(&c.rate_n), show(&c.rate_h));
    }
}

fn write_reports(report: &VerificationReport, out: &Path) -> anyhow::Result<()> {
    let json = out.join("report.json");
    let csv = out.join("report.csv");
    fs::write(&json, report.to_json()?).with_context(|| format!("writing {}", json.display()))?;
    fs::write(&csv, report.to_csv()?).with_context(|| format!("writing {}", csv.display()))?;
    println!();
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}
