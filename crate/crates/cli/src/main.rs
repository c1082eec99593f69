use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edusim::experiments::{
    self, parse_values, Metric, MonteCarloResult, RunSummary, ScenarioSpec, SweepSpec,
};
use edusim::params::parse_override;
use edusim::{io, Error, SimulationParams};

#[derive(Debug, Parser)]
#[command(
    name = "edusim",
    version,
    about = "Agent-based simulator of tertiary-education enrollment"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Base random seed; replication i uses seed + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of ticks (years) per replication.
    #[arg(long, global = true)]
    ticks: Option<u32>,
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for CSV files and the resolved config.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Ticks excluded from aggregation.
    #[arg(long = "burn-in", global = true, value_name = "N")]
    burn_in: Option<u32>,
    /// Override a parameter, e.g. --set decision.kappa=2 (repeatable).
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single replication.
    Run,
    /// Monte Carlo experiment on the configured parameters.
    Mc {
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Run a policy scenario (baseline, 1, 2, 3) or `all` with Welch tests against the baseline.
    Scenario {
        name: String,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Sweep one parameter over a list of values.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long)]
        values: String,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// One-at-a-time sensitivity analysis over the default sweeps.
    Sensitivity {
        #[arg(long)]
        reps: Option<usize>,
    },
}

struct Context {
    params: SimulationParams,
    seed: u64,
    burn_in: u32,
    out: PathBuf,
}

fn resolve(global: &GlobalArgs) -> Result<Context, Error> {
    let mut params = match &global.config {
        Some(path) => io::load_params(path)?,
        None => SimulationParams::default(),
    };
    for item in &global.set {
        let (path, value) = parse_override(item)?;
        params.set_path(&path, &value)?;
    }
    if let Some(t) = global.ticks {
        params.engine.ticks = t;
    }
    if let Some(s) = global.seed {
        params.experiments.base_seed = s;
    }
    if let Some(b) = global.burn_in {
        params.experiments.burn_in = b;
    }
    params.validate()?;
    let out = io::ensure_out_dir(&global.out)?;
    Ok(Context {
        seed: params.experiments.base_seed,
        burn_in: params.experiments.burn_in,
        params,
        out,
    })
}

fn reps(ctx: &Context, flag: Option<usize>) -> usize {
    flag.unwrap_or(ctx.params.experiments.reps)
}

fn print_summary(s: &RunSummary) {
    println!(
        "{} ({} replications, burn-in {})",
        s.scenario, s.n_reps, s.burn_in
    );
    for m in &s.metrics {
        let (scale, unit) = match m.metric {
            Metric::LoanEdufam | Metric::LoanFirstgen => (1.0, " EUR/month"),
            _ => (100.0, " %"),
        };
        println!(
            "  {:<26} mean {:>9.2}  sd {:>8.2}{}",
            m.metric.name(),
            m.mean * scale,
            m.sd * scale,
            unit
        );
    }
}

fn write_mc_outputs(
    out: &Path,
    results: &[MonteCarloResult],
    welch: &[(String, Vec<edusim::experiments::WelchComparison>)],
) -> Result<(), Error> {
    io::write_file(out, "ticks.csv", |f| {
        let mut run_id = 0usize;
        let mut rows = Vec::new();
        for r in results {
            for run in &r.runs {
                rows.push((run_id, run.as_slice()));
                run_id += 1;
            }
        }
        io::write_ticks(std::io::BufWriter::new(f), rows)
    })?;
    io::write_file(out, "summary.csv", |f| {
        io::write_summary(
            std::io::BufWriter::new(f),
            results.iter().map(|r| &r.summary),
        )
    })?;
    io::write_file(out, "welch.csv", |f| {
        let rows = welch
            .iter()
            .flat_map(|(scenario, cs)| cs.iter().map(move |c| (scenario.as_str(), c)));
        io::write_welch(std::io::BufWriter::new(f), rows)
    })?;
    Ok(())
}

fn within_welch(
    results: &[MonteCarloResult],
) -> Vec<(String, Vec<edusim::experiments::WelchComparison>)> {
    results
        .iter()
        .map(|r| (r.summary.scenario.clone(), r.summary.comparisons.clone()))
        .collect()
}

fn execute(cli: Cli) -> Result<(), Error> {
    let ctx = resolve(&cli.global)?;
    io::write_resolved_config(&ctx.out, &ctx.params)?;
    match cli.command {
        Command::Run => {
            let result = experiments::monte_carlo(
                &ctx.params,
                &ScenarioSpec::baseline(),
                1,
                ctx.seed,
                ctx.burn_in,
            )?;
            print_summary(&result.summary);
            let results = [result];
            write_mc_outputs(&ctx.out, &results, &within_welch(&results))?;
        }
        Command::Mc { reps: r } => {
            let result = experiments::monte_carlo(
                &ctx.params,
                &ScenarioSpec::baseline(),
                reps(&ctx, r),
                ctx.seed,
                ctx.burn_in,
            )?;
            print_summary(&result.summary);
            let results = [result];
            write_mc_outputs(&ctx.out, &results, &within_welch(&results))?;
        }
        Command::Scenario { name, reps: r } => {
            let n = reps(&ctx, r);
            let specs = if name.eq_ignore_ascii_case("all") {
                ScenarioSpec::presets()
            } else {
                vec![ScenarioSpec::parse(&name)?]
            };
            let mut results = Vec::with_capacity(specs.len());
            for spec in &specs {
                let result = experiments::monte_carlo(&ctx.params, spec, n, ctx.seed, ctx.burn_in)?;
                print_summary(&result.summary);
                results.push(result);
            }
            let mut welch = within_welch(&results);
            if let Some(base) = results.iter().find(|r| r.summary.scenario == "baseline") {
                for other in results.iter().filter(|r| r.summary.scenario != "baseline") {
                    welch.push((
                        other.summary.scenario.clone(),
                        experiments::compare(&base.summary, &other.summary, Metric::CompletionRate),
                    ));
                }
            }
            write_mc_outputs(&ctx.out, &results, &welch)?;
        }
        Command::Sweep {
            param,
            values,
            reps: r,
        } => {
            let sweep = SweepSpec::new(&param, parse_values(&values)?);
            let cells = experiments::oat_sensitivity(
                &ctx.params,
                &[sweep],
                reps(&ctx, r),
                ctx.seed,
                ctx.burn_in,
            )?;
            for c in &cells {
                print_summary(&c.summary);
            }
            io::write_file(&ctx.out, "sensitivity.csv", |f| {
                io::write_sensitivity(std::io::BufWriter::new(f), &cells)
            })?;
        }
        Command::Sensitivity { reps: r } => {
            let cells = experiments::oat_sensitivity(
                &ctx.params,
                &SweepSpec::defaults(),
                reps(&ctx, r),
                ctx.seed,
                ctx.burn_in,
            )?;
            for c in &cells {
                print_summary(&c.summary);
            }
            io::write_file(&ctx.out, "sensitivity.csv", |f| {
                io::write_sensitivity(std::io::BufWriter::new(f), &cells)
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edusim: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
