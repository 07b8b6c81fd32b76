//! `kdsim`: derive coupling parameters, run the verification oracles, and
//! sweep the interferometer signal.
//!
//! Exit codes: 0 = success, 2 = configuration error, 3 = tolerance failure.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use kdsim_core::gaussian;
use kdsim_core::grid::GridState;
use kdsim_core::interferometer::{general_signal, grid_signal, NpState, PathSpec};
use kdsim_core::params::{
    derive_params, raman_nath_check, validity_report, DerivedParams, PhysicalConfig,
};
use kdsim_core::report::{all_pass, summary_lines, CheckReport};
use kdsim_core::tolerances::Tolerances;
use kdsim_core::validate::{self, CavityOracleOptions};
use kdsim_core::Complex64;
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kdsim",
    about = "Nanoparticle-driven atom interferometer: parameters, oracles, sweeps",
    long_about = "All frequencies are angular (rad/s); quoted MHz/kHz figures mean 1e6/1e3 rad/s."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run configuration (JSON: physical inputs plus optional
    /// oracle/sweep/tolerances blocks).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized property sweeps.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads for sweeps (0 = library default).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Derive every coupling parameter and emit the annotated report.
    Params(CommonArgs),
    /// Run every verification suite; exit 3 if any identity fails.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Reduced ladder and position scan; the convergence gate is
        /// relaxed to the coarsest rung actually run.
        #[arg(long)]
        quick: bool,
    },
    /// Sweep the interferometer signal over pulse separations.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Add grid-oracle columns next to the closed forms.
        #[arg(long)]
        with_oracle: bool,
    },
    /// Individual oracle suites.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Cavity propagation experiments and operator identities.
    Cavity(CommonArgs),
    /// Wavepacket-grid equivalence suite.
    Wavepacket(CommonArgs),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct OracleBlock {
    n_fock: Option<usize>,
    dt_max: Option<f64>,
    positions: Option<usize>,
    eta: Option<f64>,
    ratios: Option<Vec<f64>>,
    phi_target: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepBlock {
    dt_list: Vec<f64>,
    #[serde(default)]
    delta_p_list: Vec<f64>,
    xi1: f64,
    xi2: f64,
    alpha_l: [f64; 2],
    beta_l: [f64; 2],
    #[serde(default)]
    t_free: f64,
}

struct RunConfig {
    physical: PhysicalConfig,
    oracle: OracleBlock,
    sweep: Option<SweepBlock>,
    tolerances: Tolerances,
}

#[derive(Debug)]
enum CliError {
    Config(anyhow::Error),
    Tolerance(String),
}

impl RunConfig {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(CliError::Config)?;
        let mut doc: serde_json::Value = serde_json::from_str(&text)
            .context("config is not valid JSON")
            .map_err(CliError::Config)?;
        let obj = doc
            .as_object_mut()
            .ok_or_else(|| CliError::Config(anyhow!("config root must be a JSON object")))?;

        let oracle: OracleBlock = match obj.remove("oracle") {
            Some(v) => serde_json::from_value(v)
                .context("invalid `oracle` block")
                .map_err(CliError::Config)?,
            None => OracleBlock::default(),
        };
        let sweep: Option<SweepBlock> = match obj.remove("sweep") {
            Some(v) => Some(
                serde_json::from_value(v)
                    .context("invalid `sweep` block")
                    .map_err(CliError::Config)?,
            ),
            None => None,
        };
        let tolerances: Tolerances = match obj.remove("tolerances") {
            Some(v) => serde_json::from_value(v)
                .context("invalid `tolerances` block")
                .map_err(CliError::Config)?,
            None => Tolerances::default(),
        };
        // the remaining top-level keys must be exactly the physical inputs;
        // unknown keys are rejected by name
        let physical: PhysicalConfig = serde_json::from_value(doc)
            .context("invalid physical configuration")
            .map_err(CliError::Config)?;
        physical
            .validate()
            .context("physical configuration rejected")
            .map_err(CliError::Config)?;
        let tolerances = tolerances.scaled(Tolerances::env_scale());
        Ok(Self {
            physical,
            oracle,
            sweep,
            tolerances,
        })
    }

    fn cavity_options(&self, quick: bool) -> CavityOracleOptions {
        let mut opts = CavityOracleOptions::default();
        if let Some(eta) = self.oracle.eta {
            opts.eta = eta;
        }
        if let Some(ratios) = &self.oracle.ratios {
            opts.ratios = ratios.clone();
        }
        if let Some(phi) = self.oracle.phi_target {
            opts.phi_target = phi;
        }
        if let Some(p) = self.oracle.positions {
            opts.scan_positions = p;
        }
        opts.n_fock_override = self.oracle.n_fock;
        opts.dt_max_override = self.oracle.dt_max;
        if quick {
            opts.ratios.truncate(2);
            opts.scan_positions = opts.scan_positions.min(4);
        }
        opts
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output dir {}", dir.display()))
        .map_err(CliError::Config)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(CliError::Config)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

// ---------------------------------------------------------------------------
// params
// ---------------------------------------------------------------------------

fn params_table(cfg: &PhysicalConfig, p: &DerivedParams) -> String {
    let mut out = String::new();
    out.push_str("derived coupling parameters\n");
    out.push_str("convention: all frequencies are angular (rad/s); quoted MHz/kHz mean 1e6/1e3 rad/s\n\n");
    for ((field, value), (_, provenance)) in p
        .fields()
        .iter()
        .zip(kdsim_core::params::PROVENANCE.iter())
    {
        out.push_str(&format!("{field:>16}  {value:>20.12e}  {provenance}\n"));
    }
    out.push('\n');
    out.push_str(&format!(
        "{:>16}  {:>20.12e}  dimensionless pulse area\n",
        "tau*omega_effm",
        p.omega_effm * cfg.tau_pulse
    ));
    let np_check = raman_nath_check(cfg, 13e-6);
    let atom_check = raman_nath_check(cfg, 2e-3);
    out.push_str(&format!(
        "{:>16}  {:>20.12e}  k*v*tau at v = 13 um/s{}\n",
        "frozen-motion/np",
        np_check.product,
        if np_check.regime_violation { "  (!)" } else { "" }
    ));
    out.push_str(&format!(
        "{:>16}  {:>20.12e}  k*v*tau at v = 2 mm/s{}\n",
        "frozen-motion/a",
        atom_check.product,
        if atom_check.regime_violation { "  (!)" } else { "" }
    ));
    let validity = validity_report(p, cfg.eta0, None);
    out.push('\n');
    out.push_str("perturbative hierarchy (pass < 0.15, warn < 0.5):\n");
    for ratio in &validity.ratios {
        out.push_str(&format!(
            "{:>18}  {:>12.6}  {:?}\n",
            ratio.name, ratio.value, ratio.grade
        ));
    }
    out
}

fn cmd_params(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    ensure_dir(&args.out)?;
    let p = derive_params(&cfg.physical)
        .context("parameter derivation failed")
        .map_err(CliError::Config)?;
    write_json(&args.out.join("derived_params.json"), &p.to_annotated_json())?;
    let validity = validity_report(&p, cfg.physical.eta0, None);
    write_json(
        &args.out.join("validity.json"),
        &serde_json::to_value(&validity).expect("serializable"),
    )?;
    let table = params_table(&cfg.physical, &p);
    write_text(&args.out.join("params_table.txt"), &table)?;
    print!("{table}");
    Ok(())
}

// ---------------------------------------------------------------------------
// validate / oracle
// ---------------------------------------------------------------------------

fn finish_reports(
    out: &Path,
    file: &str,
    reports: Vec<CheckReport>,
) -> Result<(), CliError> {
    ensure_dir(out)?;
    write_json(
        &out.join(file),
        &serde_json::to_value(&reports).expect("serializable"),
    )?;
    let summary = summary_lines(&reports);
    write_text(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    if all_pass(&reports) {
        Ok(())
    } else {
        let failing: Vec<&str> = reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect();
        Err(CliError::Tolerance(format!(
            "failing identities: {}",
            failing.join(", ")
        )))
    }
}

fn cmd_validate(common: &CommonArgs, quick: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let mut tol = cfg.tolerances.clone();
    let opts = cfg.cavity_options(quick);
    if quick {
        // the convergence gate moves to the coarsest rung actually run
        tol.effective_phase_final_rel = tol.effective_phase_final_rel.max(0.10);
    }
    let reports = validate::full_suite(common.seed, &opts, &tol);
    finish_reports(&common.out, "validation_report.json", reports)
}

fn cmd_oracle_cavity(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let opts = cfg.cavity_options(false);
    let reports = validate::cavity_suite(&opts, &cfg.tolerances);
    finish_reports(&common.out, "cavity_report.json", reports)
}

fn cmd_oracle_wavepacket(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let mut reports = validate::wavepacket_suite(common.seed, &cfg.tolerances);
    reports.extend(validate::analytics_suite(common.seed, &cfg.tolerances));
    finish_reports(&common.out, "wavepacket_report.json", reports)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
    dt: f64,
    theta_q: f64,
    visibility: f64,
    p_closed: f64,
    p_full: f64,
    p_background: f64,
    abs_err: f64,
    p_grid: Option<f64>,
    abs_err_grid: Option<f64>,
}

fn sweep_header(with_oracle: bool) -> String {
    let mut h = String::from("dt_s,theta_q_rad,G,P_closed,P_full,P_background,abs_err");
    if with_oracle {
        h.push_str(",P_grid,abs_err_grid");
    }
    h.push('\n');
    h
}

fn sweep_row_csv(row: &SweepRow) -> String {
    let mut line = format!(
        "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
        row.dt, row.theta_q, row.visibility, row.p_closed, row.p_full, row.p_background,
        row.abs_err
    );
    if let (Some(pg), Some(eg)) = (row.p_grid, row.abs_err_grid) {
        line.push_str(&format!(",{pg:.15e},{eg:.15e}"));
    }
    line.push('\n');
    line
}

fn sweep_spec(sweep: &SweepBlock, dt: f64) -> PathSpec {
    // the recombination stage drops out of the signal; give it a fixed slot
    // after the splitters so every dt in the sweep yields a valid sequence
    let t3 = dt + 1.0;
    PathSpec {
        t1: 0.0,
        t2: dt,
        t3,
        t4: t3 + dt,
        xi1: sweep.xi1,
        xi2: sweep.xi2,
        alpha_l: Complex64::new(sweep.alpha_l[0], sweep.alpha_l[1]),
        beta_l: Complex64::new(sweep.beta_l[0], sweep.beta_l[1]),
        direction: 1,
    }
}

fn sweep_point(
    sweep: &SweepBlock,
    mass: f64,
    delta_p: f64,
    k: f64,
    dt: f64,
    oracle_grid: Option<&GridState>,
) -> Result<SweepRow, CliError> {
    let spec = sweep_spec(sweep, dt);
    let state = gaussian::GaussianState::new(mass, delta_p, sweep.t_free)
        .map_err(|e| CliError::Config(anyhow!(e)))?;
    let b = general_signal(&spec, &NpState::Gaussian(state), k)
        .map_err(|e| CliError::Config(anyhow!(e)))?;
    let (p_grid, abs_err_grid) = match oracle_grid {
        Some(grid) => {
            let detail = grid_signal(&spec, grid, k).map_err(|e| CliError::Config(anyhow!(e)))?;
            (Some(detail.p_direct), Some((detail.p_direct - b.p_closed).abs()))
        }
        None => (None, None),
    };
    Ok(SweepRow {
        dt,
        theta_q: b.theta_q,
        visibility: b.visibility_g,
        p_closed: b.p_closed,
        p_full: b.p_total,
        p_background: b.p_background,
        abs_err: b.abs_err,
        p_grid,
        abs_err_grid,
    })
}

fn cmd_sweep(common: &CommonArgs, with_oracle: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config(anyhow!("config has no `sweep` block")))?;
    if sweep.dt_list.is_empty() {
        return Err(CliError::Config(anyhow!("sweep.dt_list must be non-empty")));
    }
    ensure_dir(&common.out)?;

    let mass = cfg.physical.np_mass;
    let k = 2.0 * PI / cfg.physical.lambda_laser;
    let delta_p0 = *sweep.delta_p_list.first().unwrap_or(&cfg.physical.delta_p);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| CliError::Config(anyhow!(e)))?;

    let oracle_grid = if with_oracle {
        Some(
            GridState::init_gaussian_kick_aligned(delta_p0, mass, k, 64, 10.0, 8.0)
                .map_err(|e| CliError::Config(anyhow!(e)))?
                .free_evolve(sweep.t_free),
        )
    } else {
        None
    };

    // dt axis at the first momentum spread
    let rows: Result<Vec<SweepRow>, CliError> = pool.install(|| {
        use rayon::prelude::*;
        sweep
            .dt_list
            .par_iter()
            .map(|&dt| sweep_point(sweep, mass, delta_p0, k, dt, oracle_grid.as_ref()))
            .collect()
    });
    let mut csv = sweep_header(with_oracle);
    for row in rows? {
        csv.push_str(&sweep_row_csv(&row));
    }
    write_text(&common.out.join("sweep_dt.csv"), &csv)?;

    // momentum-spread axis at the first separation, when requested
    if sweep.delta_p_list.len() > 1 {
        let dt = sweep.dt_list[0];
        let rows: Result<Vec<SweepRow>, CliError> = pool.install(|| {
            use rayon::prelude::*;
            sweep
                .delta_p_list
                .par_iter()
                .map(|&dp| sweep_point(sweep, mass, dp, k, dt, None))
                .collect()
        });
        let mut csv = String::from(
            "delta_p_kg_m_per_s,theta_q_rad,G,P_closed,P_full,P_background,abs_err\n",
        );
        for (dp, row) in sweep.delta_p_list.iter().zip(rows?) {
            csv.push_str(&format!(
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                dp, row.theta_q, row.visibility, row.p_closed, row.p_full, row.p_background,
                row.abs_err
            ));
        }
        write_text(&common.out.join("sweep_delta_p.csv"), &csv)?;
    }
    println!(
        "sweep complete: {} separations at delta_p = {delta_p0:.6e}",
        sweep.dt_list.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Params(common) => cmd_params(common),
        Command::Validate { common, quick } => cmd_validate(common, *quick),
        Command::Sweep {
            common,
            with_oracle,
        } => cmd_sweep(common, *with_oracle),
        Command::Oracle { which } => match which {
            OracleCommand::Cavity(common) => cmd_oracle_cavity(common),
            OracleCommand::Wavepacket(common) => cmd_oracle_wavepacket(common),
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Tolerance(msg)) => {
            eprintln!("tolerance failure: {msg}");
            ExitCode::from(3)
        }
    }
}
