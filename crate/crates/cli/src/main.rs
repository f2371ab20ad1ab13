use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mcoupler::annual::{solve_annual, write_annual_csv};
use mcoupler::coupling::{annual_inputs, read_final_state, run_coupled_to, AnnualToHourly, CouplingSignal};
use mcoupler::hourly::{solve_hourly, write_hourly_csv, write_summary_csv, YearInputs};
use mcoupler::reporting::write_report;
use mcoupler::scenario::{load_scenario, save_scenario, Scenario};
use mcoupler::synthetic;
use mcoupler::validation::{annual_zpr, convergence_metrics, hourly_zpr, ZprReport};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Couples a multi-year annual capacity-expansion LP with an hourly
/// dispatch-and-investment LP and validates the converged result.
#[derive(Parser)]
#[command(name = "mcoupler", version)]
struct Cli {
    /// Seed for synthetic data generation.
    #[arg(long, global = true, default_value_t = synthetic::DEFAULT_SEED)]
    seed: u64,
    /// Maximum number of hourly years solved in parallel [default: available parallelism].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled iteration and write all artifacts.
    Run(RunArgs),
    /// Solve the annual model alone, uncoupled or with inputs from a previous run.
    SolveAnnual(SolveAnnualArgs),
    /// Solve one hourly year from a coupling signal or uncoupled.
    SolveHourly(SolveHourlyArgs),
    /// Recompute ZPR and convergence reports for a run directory.
    Validate(RunDirArgs),
    /// Write RLDC, price-duration, mix and LCOE reports for a run directory.
    Report(ReportArgs),
    /// Write a synthetic scenario and its hourly profiles.
    GenSynthetic(GenArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = "MCOUPLER_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Override the number of represented hours per year.
    #[arg(long)]
    hours: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Convergence tolerance on generation shares.
    #[arg(long)]
    share_tol: Option<f64>,
    #[command(flatten)]
    out: OutArg,
    #[arg(long)]
    enable_storage: bool,
    #[arg(long)]
    enable_flex: bool,
    #[arg(long)]
    enable_adjustment_cost: bool,
}

#[derive(Args)]
struct SolveAnnualArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Run directory whose last iteration supplies the coupling inputs.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SolveHourlyArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    year: i32,
    /// `signal.json` from an iteration directory.
    #[arg(long, conflicts_with = "uncoupled")]
    signal: Option<PathBuf>,
    /// Take costs and demand straight from the scenario.
    #[arg(long)]
    uncoupled: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct RunDirArgs {
    #[arg(long, env = "MCOUPLER_OUT", default_value = "out")]
    run_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, env = "MCOUPLER_OUT", default_value = "out")]
    run_dir: PathBuf,
    /// Report directory [default: <run-dir>/report].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// One of toy, baseline, net_zero, solar_heavy, full_scale.
    #[arg(long, default_value = "baseline")]
    name: String,
    #[command(flatten)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Run(a) => run(a),
        Command::SolveAnnual(a) => cmd_solve_annual(a),
        Command::SolveHourly(a) => cmd_solve_hourly(a),
        Command::Validate(a) => validate(a),
        Command::Report(a) => report(a),
        Command::GenSynthetic(a) => gen_synthetic(a, cli.seed),
    }
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    load_scenario(path).with_context(|| format!("loading {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn run(a: &RunArgs) -> anyhow::Result<ExitCode> {
    let mut s = load(&a.scenario)?;
    if let Some(h) = a.hours {
        s.grid.hours = h;
    }
    if let Some(n) = a.max_iters {
        s.termination.max_iters = n;
    }
    if let Some(t) = a.share_tol {
        s.termination.share_tol = t;
    }
    s.features.storage_enabled |= a.enable_storage;
    s.features.flex_enabled |= a.enable_flex;
    s.features.adjustment_cost_enabled |= a.enable_adjustment_cost;
    let res = run_coupled_to(&s, &a.out.out)?;
    let last = res.last();
    println!(
        "{}: {} after {} iterations, max share gap {:.4}",
        res.scenario,
        if res.converged { "converged" } else { "not converged" },
        res.iterations,
        last.share_gap
    );
    Ok(if res.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    })
}

fn cmd_solve_annual(a: &SolveAnnualArgs) -> anyhow::Result<ExitCode> {
    let s = load(&a.scenario)?;
    let inputs = match &a.run_dir {
        None => None,
        Some(dir) => {
            let st = read_final_state(dir)?;
            let prev = &st.last;
            Some(annual_inputs(&s, &prev.annual, &prev.to_annual, prev.annual_inputs.as_ref())?.0)
        }
    };
    let sol = solve_annual(&s, inputs.as_ref())?;
    let out = &a.out.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_annual_csv(&sol, &out.join("annual.csv"))?;
    write_json(&out.join("annual.json"), &sol)?;
    let zpr = annual_zpr(&sol);
    write_json(&out.join("zpr_report.json"), &zpr)?;
    println!("annual objective {:.6e}, max ZPR residual {:.2e}", sol.objective, zpr.max_relative_residual());
    Ok(ExitCode::SUCCESS)
}

fn read_signal(path: &Path) -> anyhow::Result<AnnualToHourly> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(list) = serde_json::from_str::<Vec<CouplingSignal>>(&text) {
        return list
            .into_iter()
            .find_map(|s| match s {
                CouplingSignal::AnnualToHourly(a) => Some(a),
                _ => None,
            })
            .ok_or_else(|| anyhow!("{} has no annual-to-hourly signal", path.display()));
    }
    match serde_json::from_str::<CouplingSignal>(&text) {
        Ok(CouplingSignal::AnnualToHourly(a)) => Ok(a),
        Ok(_) => bail!("{} has no annual-to-hourly signal", path.display()),
        Err(_) => serde_json::from_str::<AnnualToHourly>(&text).with_context(|| format!("parsing {}", path.display())),
    }
}

fn cmd_solve_hourly(a: &SolveHourlyArgs) -> anyhow::Result<ExitCode> {
    let s = load(&a.scenario)?;
    let inputs = match (&a.signal, a.uncoupled) {
        (Some(p), _) => read_signal(p)?
            .year(a.year)
            .cloned()
            .ok_or_else(|| anyhow!("signal has no entry for {}", a.year))?,
        (None, true) => YearInputs::uncoupled(&s, a.year)?,
        (None, false) => bail!("solve-hourly requires signal or --uncoupled"),
    };
    let (hs, ms) = solve_hourly(&s, &inputs)?;
    let out = &a.out.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_hourly_csv(&hs, &out.join(format!("hourly_{}.csv", a.year)))?;
    write_summary_csv(&hs, &ms, &out.join(format!("hourly_summary_{}.csv", a.year)))?;
    let zpr = hourly_zpr(&hs);
    write_json(&out.join(format!("zpr_report_{}.json", a.year)), &zpr)?;
    println!(
        "{}: objective {:.6e}, mean price {:.3}, max ZPR residual {:.2e}",
        a.year,
        hs.objective,
        ms.mean_price,
        zpr.max_relative_residual()
    );
    Ok(ExitCode::SUCCESS)
}

fn validate(a: &RunDirArgs) -> anyhow::Result<ExitCode> {
    let st = read_final_state(&a.run_dir)?;
    let mut zpr = ZprReport::default();
    zpr.extend(annual_zpr(&st.last.annual));
    for hs in &st.last.hourly {
        zpr.extend(hourly_zpr(hs));
    }
    let conv = convergence_metrics(&st.history)?;
    write_json(&a.run_dir.join("zpr_report.json"), &zpr)?;
    write_json(&a.run_dir.join("convergence.json"), &conv)?;
    let failed: Vec<_> = zpr.entries.iter().filter(|e| !e.passes()).collect();
    println!(
        "max ZPR residual {:.2e}, final generation-share gap {:.4}",
        zpr.max_relative_residual(),
        conv.last().max_generation_gap
    );
    for e in &failed {
        eprintln!(
            "ZPR failed: {:?} {:?} {:?} residual {:.2e}",
            e.model, e.scope, e.year, e.relative_residual
        );
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn report(a: &ReportArgs) -> anyhow::Result<ExitCode> {
    let st = read_final_state(&a.run_dir)?;
    let dir = a.out.clone().unwrap_or_else(|| a.run_dir.join("report"));
    let files = write_report(&st, &dir)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(ExitCode::SUCCESS)
}

fn gen_synthetic(a: &GenArgs, seed: u64) -> anyhow::Result<ExitCode> {
    let (_, s) = match a.name.as_str() {
        "toy" => synthetic::toy(seed)?,
        "baseline" => synthetic::baseline(seed)?,
        "net_zero" => synthetic::net_zero(seed)?,
        "solar_heavy" => synthetic::solar_heavy(seed)?,
        "full_scale" => synthetic::full_scale(seed)?,
        other => bail!("unknown synthetic scenario `{other}`"),
    };
    let out = &a.out.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(format!("{}.json", a.name));
    save_scenario(&s, &path, synthetic::PROFILES_FILE)?;
    println!("wrote {} and {}", path.display(), out.join(synthetic::PROFILES_FILE).display());
    Ok(ExitCode::SUCCESS)
}
