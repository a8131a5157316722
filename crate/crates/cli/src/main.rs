//! `qarchsim` — analytic bounds and discrete-event simulation for modular
//! quantum computing architectures.
//!
//! Subcommands:
//! * `crossover` — homogeneous/modular cost curves and the crossover scale.
//! * `wall`      — sqrt(N) coordination-latency curve and the wall.
//! * `bound`     — causal locality bound on control distance.
//! * `nops`      — operations-per-coherence-window platform table.
//! * `simulate`  — run one scenario, writing record streams and a summary.
//! * `starve`    — abort-rate sweep over transduction efficiencies.
//!
//! Exit codes: 0 success, 2 configuration error, 3 internal invariant
//! violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qarchsim_core::metrics;
use qarchsim_core::report;
use qarchsim_core::scaling::{platform_catalog, ScalingParams};
use qarchsim_core::scenario::ScenarioFile;
use qarchsim_core::sim::{self, SimError};

mod records;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "qarchsim", version, about = "Modular quantum architecture scaling and protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Aligned text table.
    Table,
    /// Line-delimited JSON records.
    Records,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Cost curves over a log-spaced qubit grid, the crossover scale, and an
    /// optional transduction-efficiency sweep.
    Crossover {
        /// Scenario file providing a [scaling] section (defaults when omitted).
        config: Option<PathBuf>,
        /// Comma-separated eta values to sweep.
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coordination wall, tau_c(N) samples, and the tau_route sensitivity
    /// table.
    Wall {
        /// Scenario file providing a [timing] section (defaults when omitted).
        config: Option<PathBuf>,
        /// tau_route sweep range as min,max in ns.
        #[arg(long, value_delimiter = ',', value_names = ["MIN_NS,MAX_NS"])]
        route: Option<Vec<u64>>,
        /// Number of sweep points.
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Causal locality bound on the control radius.
    Bound {
        /// Scenario file providing a [timing] section (defaults when omitted).
        config: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Operations-per-coherence-window ranges for the built-in platform
    /// catalog.
    Nops {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run one scenario and write metrics, outcome and failure record
    /// streams, and a run manifest into the output directory.
    Simulate {
        /// Scenario file.
        config: PathBuf,
        /// Output directory for run artifacts.
        #[arg(long, default_value = "runout")]
        out: PathBuf,
        /// Seed override (otherwise sim.seed from the scenario).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Starvation sweep: rerun the scenario once per eta value.
    Starve {
        /// Scenario file.
        config: PathBuf,
        /// Comma-separated eta values.
        #[arg(long, value_delimiter = ',', required = true)]
        eta: Vec<f64>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<SimError>().is_some_and(|e| matches!(e, SimError::Invariant(_))) {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Crossover { config, eta, output } => cmd_crossover(config.as_deref(), &eta, &output),
        Command::Wall { config, route, steps, output } => {
            cmd_wall(config.as_deref(), route.as_deref(), steps, &output)
        }
        Command::Bound { config, output } => cmd_bound(config.as_deref(), &output),
        Command::Nops { output } => cmd_nops(&output),
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed),
        Command::Starve { config, eta, seed, output } => cmd_starve(&config, &eta, seed, &output),
    }
}

fn load_scenario(path: Option<&Path>) -> Result<ScenarioFile> {
    match path {
        None => Ok(ScenarioFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading scenario {}", p.display()))?;
            Ok(ScenarioFile::parse(&text)?)
        }
    }
}

fn emit(output: &OutputArgs, text: String) -> Result<()> {
    match &output.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
    }
}

/// Log-spaced grid over `decades` decades of N starting at 1.
fn log_grid(decades: u32, points_per_decade: u32) -> Vec<f64> {
    let mut grid = Vec::new();
    for d in 0..decades {
        for p in 0..points_per_decade {
            let exponent = d as f64 + p as f64 / points_per_decade as f64;
            grid.push(10f64.powf(exponent));
        }
    }
    grid.push(10f64.powi(decades as i32));
    grid
}

fn cmd_crossover(config: Option<&Path>, eta: &[f64], output: &OutputArgs) -> Result<()> {
    let scenario = load_scenario(config)?;
    let params = scenario.scaling_params()?;
    let crossover = params.crossover_scale();

    // Cover the crossover location when it exists, otherwise a fixed window.
    let decades = crossover
        .map(|nc| (nc.log10().ceil() as u32 + 2).clamp(6, 14))
        .unwrap_or(8);
    let mut samples = Vec::new();
    for n in log_grid(decades, 2) {
        let c_hom = params.cost_homogeneous(n).map_err(|e| anyhow!(e))?;
        let c_mod = params.cost_modular(n).map_err(|e| anyhow!(e))?;
        samples.push((n, c_hom, c_mod));
    }
    let sweep = if eta.is_empty() {
        Vec::new()
    } else {
        params.sweep_crossover(eta).map_err(|e| anyhow!(e))?
    };

    let text = match output.format {
        Format::Records => records::crossover_records(&params, crossover, &samples, &sweep),
        Format::Table => {
            let mut rows = vec![vec![
                "n_qubits".to_string(),
                "c_homogeneous".to_string(),
                "c_modular".to_string(),
                "favored".to_string(),
            ]];
            for &(n, c_hom, c_mod) in &samples {
                rows.push(vec![
                    format!("{n:.4e}"),
                    format!("{c_hom:.4e}"),
                    format!("{c_mod:.4e}"),
                    if c_mod < c_hom { "modular" } else { "homogeneous" }.to_string(),
                ]);
            }
            let mut text = render_params_header(&params);
            text.push_str(&report::render_table(&rows));
            match crossover {
                Some(nc) => text.push_str(&format!(
                    "\ncrossover n_c = {nc:.6e} physical qubits (rounded {}, ~{:.3e} logical at kappa = {})\n",
                    nc.round() as u128,
                    params.logical_equivalent(nc),
                    params.kappa
                )),
                None => text.push_str("\ncrossover n_c = none (1 + epsilon <= gamma)\n"),
            }
            if !sweep.is_empty() {
                let mut rows = vec![vec!["eta_trans".to_string(), "n_c".to_string()]];
                for &(e, nc) in &sweep {
                    rows.push(vec![
                        format!("{e}"),
                        nc.map_or_else(|| "none".to_string(), |v| format!("{v:.6e}")),
                    ]);
                }
                text.push('\n');
                text.push_str(&report::render_table(&rows));
            }
            text
        }
    };
    emit(output, text)
}

fn render_params_header(p: &ScalingParams) -> String {
    format!(
        "# A = {}, B = {}, epsilon = {}, gamma = {}, eta_trans = {}, D = {}, kappa = {}\n",
        p.a, p.b, p.epsilon, p.gamma, p.eta_trans, p.dimension, p.kappa
    )
}

fn cmd_wall(
    config: Option<&Path>,
    route: Option<&[u64]>,
    steps: usize,
    output: &OutputArgs,
) -> Result<()> {
    let scenario = load_scenario(config)?;
    let timing = scenario.timing_params()?;
    let wall = timing.coordination_wall().map_err(|e| anyhow!(e))?;

    // tau_c(N) samples up to one decade past the wall.
    let decades = (wall.log10().ceil() as u32 + 1).max(3);
    let mut curve = Vec::new();
    for n in log_grid(decades, 2) {
        curve.push((n, timing.coordination_latency_ns(n).map_err(|e| anyhow!(e))?));
    }
    let (route_min, route_max) = match route {
        Some([lo, hi]) => (*lo, *hi),
        Some(_) => return Err(anyhow!("--route takes exactly two values")),
        None => (80, 150),
    };
    let sensitivity = timing
        .wall_sensitivity(route_min, route_max, steps.max(2))
        .map_err(|e| anyhow!(e))?;

    let text = match output.format {
        Format::Records => records::wall_records(&timing, wall, &curve, &sensitivity),
        Format::Table => {
            let budget = timing.safety_margin * timing.tau_q_ns as f64;
            let mut text = format!(
                "# tau_q = {} ns, margin = {}, tau_decode = {} ns, tau_ff = {} ns, alpha = {:.6}, tau_route = {} ns\n",
                timing.tau_q_ns,
                timing.safety_margin,
                timing.tau_decode_ns,
                timing.tau_ff_ns,
                timing.alpha,
                timing.tau_route_ns
            );
            text.push_str(&format!(
                "coordination wall n* = {wall:.6e} physical qubits (tau_c budget {budget:.0} ns)\n\n"
            ));
            let mut rows = vec![vec!["n_qubits".to_string(), "tau_c_ns".to_string()]];
            for &(n, tau_c) in &curve {
                rows.push(vec![format!("{n:.4e}"), format!("{tau_c:.1}")]);
            }
            text.push_str(&report::render_table(&rows));
            text.push('\n');
            let mut rows = vec![vec!["tau_route_ns".to_string(), "wall_n".to_string()]];
            for &(r, w) in &sensitivity {
                rows.push(vec![format!("{r:.1}"), format!("{w:.6e}")]);
            }
            text.push_str(&report::render_table(&rows));
            text
        }
    };
    emit(output, text)
}

fn cmd_bound(config: Option<&Path>, output: &OutputArgs) -> Result<()> {
    let scenario = load_scenario(config)?;
    let timing = scenario.timing_params()?;
    let bound_m = timing.locality_bound_m().map_err(|e| anyhow!(e))?;
    let text = match output.format {
        Format::Records => records::bound_record(&timing, bound_m),
        Format::Table => format!(
            "# tau_q_p = {} ns, tau_decode = {} ns, tau_ff = {} ns, n = {}, c = {:.4e} m/s\n\
             max control radius = {bound_m:.6} m\n",
            timing.tau_q_p_ns,
            timing.tau_decode_ns,
            timing.tau_ff_ns,
            timing.refractive_index,
            timing.light_speed_m_per_s
        ),
    };
    emit(output, text)
}

fn cmd_nops(output: &OutputArgs) -> Result<()> {
    let catalog = platform_catalog();
    let text = match output.format {
        Format::Records => records::nops_records(&catalog),
        Format::Table => {
            let mut rows = vec![vec![
                "platform".to_string(),
                "tau_q_s".to_string(),
                "tau_gate_s".to_string(),
                "n_ops_computed".to_string(),
                "n_ops_published".to_string(),
            ]];
            for entry in &catalog {
                let p = &entry.profile;
                let (gate, computed) = match p.ops_per_coherence() {
                    Ok((lo, hi)) => {
                        let (gmin, gmax) = p.tau_gate_s.expect("gate range exists");
                        (format!("{gmin:.1e}-{gmax:.1e}"), format!("{lo:.1e}-{hi:.1e}"))
                    }
                    Err(_) => ("-".to_string(), "memory-only".to_string()),
                };
                rows.push(vec![
                    p.name.clone(),
                    format!("{:.1e}-{:.1e}", p.tau_q_min_s, p.tau_q_max_s),
                    gate,
                    computed,
                    entry.published_n_ops.to_string(),
                ]);
            }
            report::render_table(&rows)
        }
    };
    emit(output, text)
}

fn cmd_simulate(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("reading scenario {}", config.display()))?;
    let mut scenario = ScenarioFile::parse(&text)?;
    if let Some(seed) = seed {
        scenario.sim.get_or_insert_with(Default::default).seed = Some(seed);
    }
    let cfg = scenario.sim_config()?;
    let result = sim::run_scenario(&cfg)?;
    let report_data = metrics::aggregate(&result);

    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let write = |name: &str, contents: String| -> Result<()> {
        std::fs::write(out_dir.join(name), contents)
            .with_context(|| format!("writing {}", out_dir.join(name).display()))
    };
    write("metrics.json", report::render_metrics(&report_data))?;
    write("outcomes.jsonl", report::render_outcomes(&result))?;
    write("failures.jsonl", report::render_failures(&result))?;
    write(
        "manifest.json",
        report::render_manifest(VERSION, &scenario.config_sha256(), cfg.seed),
    )?;
    let summary = report::render_summary(&result, &report_data);
    write("summary.txt", summary.clone())?;
    print!("{summary}");

    let violations = sim::assert_timing_contract(&result, &cfg.timing);
    if !violations.is_empty() {
        println!(
            "warning: {} committed transactions breached tau_q_p during coordination",
            violations.len()
        );
    }
    Ok(())
}

fn cmd_starve(config: &Path, eta: &[f64], seed: Option<u64>, output: &OutputArgs) -> Result<()> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("reading scenario {}", config.display()))?;
    let mut scenario = ScenarioFile::parse(&text)?;
    if let Some(seed) = seed {
        scenario.sim.get_or_insert_with(Default::default).seed = Some(seed);
    }
    let cfg = scenario.sim_config()?;
    let rows = metrics::starvation_curve(&cfg, eta).map_err(|e| match e {
        metrics::MetricsError::Sim(s) => anyhow!(s),
        other => anyhow!(other),
    })?;

    let text = match output.format {
        Format::Records => records::starvation_records(&rows),
        Format::Table => {
            let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
            let mut table = vec![vec![
                "eta_trans".to_string(),
                "transactions".to_string(),
                "committed".to_string(),
                "generated".to_string(),
                "abort_rate".to_string(),
                "commit_rate".to_string(),
                "mean_window_ns".to_string(),
            ]];
            for r in &rows {
                table.push(vec![
                    format!("{}", r.eta_trans),
                    r.n_transactions.to_string(),
                    r.n_committed.to_string(),
                    r.n_generated.to_string(),
                    fmt(r.abort_rate),
                    fmt(r.commit_rate),
                    r.mean_compute_window_ns
                        .map_or_else(|| "-".to_string(), |x| format!("{x:.1}")),
                ]);
            }
            report::render_table(&table)
        }
    };
    emit(output, text)
}
