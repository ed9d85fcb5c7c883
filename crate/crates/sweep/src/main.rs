use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use u2x_core::{Method, MetricEstimate, Scenario};
use u2x_sweep::{evaluate_point, execute, Config, ConfigError, Overrides, SweepMetric};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Outage, ergodic-rate and spectrum-efficiency sweeps for a UAV NOMA downlink.
#[derive(Debug, Parser)]
#[command(name = "u2x", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the configured grid and write CSV files plus summary.json.
    Sweep(SweepArgs),
    /// Evaluate a single (scenario, metric, method) triple and print JSON.
    Point(PointArgs),
    /// Check parameters and report NOMA feasibility.
    Validate(ConfigArg),
    /// Fit diversity orders and high-SNR slopes over a transmit-power grid.
    Table(TableArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Monte-Carlo trials, overriding the file.
    #[arg(long)]
    trials: Option<u64>,
    /// Monte-Carlo master seed, overriding the file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Output directory (default: `<name>-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mc: McArgs,
    /// Exit with status 2 if any row failed or did not converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    scenario: Scenario,
    #[arg(long, default_value = "outage")]
    metric: SweepMetric,
    #[arg(long, default_value = "exact")]
    method: Method,
    /// Run label whose parameters are used (default: the first run).
    #[arg(long)]
    run: Option<String>,
    /// Value of the sweep axis to evaluate at (default: the base parameters).
    #[arg(long)]
    at: Option<f64>,
    /// Evaluate both exact and monte_carlo and report the z-score of the difference.
    #[arg(long)]
    compare: bool,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Number of top grid points used by the slope fits.
    #[arg(long, default_value_t = u2x_core::metrics::DEFAULT_WINDOW)]
    window: usize,
    #[command(flatten)]
    mc: McArgs,
    /// Exit with status 2 if any fit falls outside its tolerance band.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Point(a) => point(a),
        Command::Validate(a) => validate(a),
        Command::Table(a) => table(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

fn jobs(n: Option<usize>) -> Result<usize, Failure> {
    match n {
        Some(0) => Err(Failure {
            code: EXIT_CONFIG,
            message: "--jobs must be at least 1".into(),
        }),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn sweep(a: SweepArgs) -> Result<ExitCode, Failure> {
    let (cfg, bytes) = Config::load(&a.config.config)?;
    let plan = cfg.plan(Overrides {
        trials: a.mc.trials,
        seed: a.mc.seed,
    })?;
    let jobs = jobs(a.mc.jobs)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from(format!("{}-out", plan.name)));
    let summary = execute(&plan, &out, &a.config.config.display().to_string(), &bytes, jobs).map_err(|e| Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    })?;
    for run in &summary.runs {
        eprintln!(
            "{}: {} rows, {} flagged, {} failed -> {}",
            run.label,
            run.totals.rows,
            run.flagged.len(),
            run.totals.failed_rows,
            out.join(&run.csv).display()
        );
        for f in run.flagged.iter().filter(|f| f.failure.is_some()) {
            eprintln!(
                "  {}={} {} {} {}: {}",
                plan.axis,
                f.axis_value,
                f.scenario,
                f.metric,
                f.method,
                f.failure.as_deref().unwrap_or_default()
            );
        }
    }
    eprintln!("summary -> {}", out.join("summary.json").display());
    if a.strict && summary.failed_rows > 0 {
        return Ok(ExitCode::from(EXIT_RUNTIME));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Comparison<'a> {
    scenario: &'a str,
    metric: SweepMetric,
    exact: &'a MetricEstimate,
    monte_carlo: &'a MetricEstimate,
    difference: f64,
    z: f64,
}

fn point(a: PointArgs) -> Result<ExitCode, Failure> {
    let (cfg, _) = Config::load(&a.config.config)?;
    let run = cfg.run(a.run.as_deref())?;
    let params = match (a.at, cfg.plan(Overrides::default()).ok()) {
        (Some(v), Some(plan)) => run.params.with(plan.axis, v),
        (Some(_), None) => {
            return Err(Failure {
                code: EXIT_CONFIG,
                message: "--at needs a valid `sweep` section naming the axis".into(),
            })
        }
        (None, _) => run.params,
    };
    let report = params.inputs()?.validate();
    if !report.passed() {
        return Err(ConfigError::Invalid {
            field: format!("runs[{}]", run.label),
            message: report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        }
        .into());
    }
    let trials = a.mc.trials.or(cfg.trials()).unwrap_or(1_000_000);
    let seed = a.mc.seed.or(cfg.master_seed()).unwrap_or(1);
    let methods = if a.compare {
        vec![Method::Exact, Method::MonteCarlo]
    } else {
        vec![a.method]
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs(a.mc.jobs)?)
        .build()
        .map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        })?;
    let cells = pool.install(|| {
        evaluate_point(
            &params,
            a.at.unwrap_or(f64::NAN),
            &[a.scenario],
            &[a.metric],
            &methods,
            &cfg.series,
            Some(trials),
            Some(seed),
        )
    });
    if cells.len() != methods.len() {
        return Err(Failure {
            code: EXIT_CONFIG,
            message: format!(
                "{} by {} is not defined for {}",
                a.metric,
                methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(" and "),
                a.scenario
            ),
        });
    }
    let mut status = ExitCode::SUCCESS;
    for c in &cells {
        if let Some(msg) = &c.failure {
            eprintln!("error: {} {}: {msg}", c.metric, c.method);
            status = ExitCode::from(EXIT_RUNTIME);
        }
    }
    let est: Vec<&MetricEstimate> = cells.iter().filter_map(|c| c.estimate.as_ref()).collect();
    if est.len() != cells.len() {
        return Ok(status);
    }
    let json = if a.compare {
        let (exact, mc) = (est[0], est[1]);
        let difference = exact.value - mc.value;
        let se = mc.ci_half_width.unwrap_or(0.0) / u2x_core::montecarlo::Z95;
        let z = if se > 0.0 {
            difference / se
        } else if difference == 0.0 {
            0.0
        } else {
            difference.signum() * f64::INFINITY
        };
        serde_json::to_string_pretty(&Comparison {
            scenario: cells[0].subject.name(),
            metric: a.metric,
            exact,
            monte_carlo: mc,
            difference,
            z,
        })
    } else {
        serde_json::to_string_pretty(est[0])
    };
    println!("{}", json.expect("estimates serialize"));
    Ok(status)
}

fn validate(a: ConfigArg) -> Result<ExitCode, Failure> {
    let (cfg, _) = Config::load(&a.config)?;
    let mut ok = true;
    for (label, rep) in cfg.reports()? {
        if rep.passed() {
            let feas = if rep.is_feasible() { "feasible" } else { "infeasible" };
            println!("{label}: pass, {feas} (alpha_v^2 - eps_v alpha_w^2 = {})", rep.feasibility_margin);
            if !rep.is_feasible() {
                eprintln!("warning: {label}: NOMA decoding condition fails, both NOMA outages are identically one");
            }
        } else {
            ok = false;
            println!("{label}: FAIL");
            for v in &rep.violations {
                println!("  {v}");
            }
        }
    }
    if !ok {
        return Ok(ExitCode::from(EXIT_CONFIG));
    }
    if let Err(e) = cfg.plan(Overrides::default()) {
        if !matches!(&e, ConfigError::Invalid { field, .. } if field == "sweep") {
            println!("sweep: FAIL");
            println!("  {e}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn table(a: TableArgs) -> Result<ExitCode, Failure> {
    use u2x_core::metrics::{table_one, TableOneOptions};
    let (cfg, _) = Config::load(&a.config.config)?;
    let plan = cfg.plan(Overrides {
        trials: a.mc.trials,
        seed: a.mc.seed,
    })?;
    if plan.axis != u2x_sweep::Axis::PuDbm {
        return Err(ConfigError::Invalid {
            field: "sweep.axis".into(),
            message: "the table needs a pu_dbm grid".into(),
        }
        .into());
    }
    let defaults = TableOneOptions::default();
    let opts = TableOneOptions {
        window: a.window,
        series: plan.series,
        far_trials: plan.trials.unwrap_or(defaults.far_trials),
        seed: plan.master_seed.unwrap_or(defaults.seed),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs(a.mc.jobs)?)
        .build()
        .map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        })?;
    let mut tables = Vec::with_capacity(plan.runs.len());
    for run in &plan.runs {
        let base = run.params.inputs()?;
        let t = pool
            .install(|| table_one(&base, &plan.values, &opts))
            .map_err(|e| Failure {
                code: EXIT_RUNTIME,
                message: format!("{}: {e}", run.label),
            })?;
        for r in &t.rows {
            eprintln!(
                "{} {:<14} D = {:.3} (expect {}) S = {:.3} (expect {}){}",
                run.label,
                r.scenario.name(),
                r.diversity,
                r.expected_diversity,
                r.slope,
                r.expected_slope,
                if r.diversity_ok && r.slope_ok { "" } else { "  OUT OF BAND" }
            );
        }
        tables.push(t);
    }
    println!("{}", serde_json::to_string_pretty(&tables).expect("tables serialize"));
    if a.strict && !tables.iter().all(|t| t.all_ok()) {
        return Ok(ExitCode::from(EXIT_RUNTIME));
    }
    Ok(ExitCode::SUCCESS)
}
