use std::f64::consts::TAU;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasered::experiment::{
    configure_threads, detect_neimark_sacker, floquet_splay_point, floquet_sync_point, run_convergence,
    run_simulation, run_sweep_splay, run_sweep_sync, write_convergence_csv, write_simulation_csv,
    write_sweep_csv, ExperimentConfig, SweepRow,
};
use phasered::hypergraph::decompose;
use phasered::model::{AdjacencySpec, Params};
use phasered::reduction::{assemble, compute_p};
use phasered::stability::IntegratorOptions;
use phasered::Error;

const CHECK_SAMPLES: usize = 500;
const CHECK_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "phasered", version, about = "Phase reductions of coupled oscillators with phase-dependent amplitude")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration (JSON). Figure parameters with N = 3 when absent.
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Integrator tolerance, overriding the configuration.
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Worker threads for grid sweeps.
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
    /// Seed for randomly drawn phases.
    #[arg(long, value_name = "INT", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the full system or a reduction from given or random phases.
    Simulate(Common),
    /// Emit the phase-reduction terms of the configured order as canonical JSON.
    Reduce(Common),
    /// Critical multiplier of the synchronized orbit at the configured (delta, K).
    FloquetSync(Common),
    /// Critical multiplier of the orbit near the splay state at the configured (delta, K).
    FloquetSplay(Common),
    /// Synchronized-orbit multipliers over the (delta, K) grid.
    SweepSync(Common),
    /// Periods and multipliers near the splay state over the (delta, K) grid.
    SweepSplay(Common),
    /// Reduction and torus errors against K with fitted slopes.
    Convergence(Common),
    /// Hypergraph decomposition of the second-order interactions of a network.
    Hypergraph {
        #[command(flatten)]
        common: Common,
        /// Compare the decomposition with the second-order reduction at random phases.
        #[arg(long)]
        check: bool,
    },
}

enum Failure {
    /// The reader of standard output went away; nothing left to report.
    ClosedPipe,
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Config(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_config(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::figure(3),
    };
    if let Some(tol) = common.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A bare adjacency matrix is accepted too, paired with the figure parameters.
fn load_network_config(common: &Common) -> CliResult<ExperimentConfig> {
    let Some(path) = &common.config else {
        return load_config(common);
    };
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Config(e.to_string()))?;
    if value.is_array() {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value).map_err(|e| Failure::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig::figure(rows.len());
        cfg.adjacency = AdjacencySpec::Rows(rows);
        cfg.validate()?;
        Ok(cfg)
    } else {
        load_config(common)
    }
}

fn output(common: &Common, cfg: &ExperimentConfig) -> CliResult<Box<dyn Write>> {
    let path = common.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from));
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(&p).map_err(|e| {
            Failure::Config(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Renders into memory first so a failed write to the destination keeps its io error kind.
fn emit(common: &Common, cfg: &ExperimentConfig, render: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>) -> CliResult<()> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    let mut out = output(common, cfg)?;
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn random_phases(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..TAU)).collect()
}

fn point_row(cfg: &ExperimentConfig, system: phasered::stability::SystemLabel, r: Result<(f64, Complex64), Error>) -> SweepRow {
    let (period, prmm, converged, reason) = match r {
        Ok((t, l)) => (t, l, true, None),
        Err(e) => (f64::NAN, Complex64::new(f64::NAN, f64::NAN), false, Some(e.to_string())),
    };
    SweepRow {
        i_delta: 0,
        i_k: 0,
        delta: cfg.params.delta,
        k: cfg.params.k,
        system,
        period,
        prmm,
        converged,
        reason,
    }
}

fn report_failures(rows: &[SweepRow]) {
    for r in rows.iter().filter(|r| !r.converged) {
        eprintln!(
            "not converged: delta={} K={} system={}: {}",
            r.delta,
            r.k,
            r.system,
            r.reason.as_deref().unwrap_or("unknown")
        );
    }
}

fn single_point(cfg: &ExperimentConfig, common: &Common, splay: bool) -> CliResult<()> {
    let net = cfg.network()?;
    let opts = IntegratorOptions::with_tol(cfg.tol);
    let mut rows = Vec::new();
    for &system in &cfg.systems {
        let r = if splay {
            match floquet_splay_point(cfg, system) {
                Err(e) if e.is_config_error() => return Err(e.into()),
                r => r,
            }
        } else {
            floquet_sync_point(system, &net, &cfg.params, &cfg.g, &opts)
        };
        rows.push(point_row(cfg, system, r));
    }
    emit(common, cfg, |w| write_sweep_csv(&rows, w))?;
    report_failures(&rows);
    if rows.iter().any(|r| !r.converged) {
        return Err(Failure::Numerical("at least one orbit did not converge".into()));
    }
    Ok(())
}

fn hypergraph(cfg: &ExperimentConfig, common: &Common, check: bool) -> CliResult<()> {
    let net = cfg.network()?;
    let decomposition = decompose(&net).with_params(cfg.params);
    let mut out = output(common, cfg)?;
    writeln!(out, "{}", decomposition.to_json()?)?;
    out.flush()?;
    if check {
        let p: Params = cfg.params;
        let reference = compute_p(&net, &p, &cfg.g, 2, 0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
        let mut deviation: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for _ in 0..CHECK_SAMPLES {
            let phi = random_phases(&mut rng, net.len());
            let via = decomposition.eval(&phi, &p)?;
            for (v, r) in via.iter().zip(&reference) {
                let exact = r.eval(&phi);
                deviation = deviation.max((v - exact).abs());
                scale = scale.max(exact.abs());
            }
        }
        eprintln!("max deviation {deviation:.3e} over {CHECK_SAMPLES} phase vectors");
        if deviation > CHECK_TOL * scale {
            return Err(Failure::Numerical(format!(
                "decomposition deviates from the second-order reduction by {deviation:.3e}"
            )));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let common = match &cli.command {
        Command::Simulate(c)
        | Command::Reduce(c)
        | Command::FloquetSync(c)
        | Command::FloquetSplay(c)
        | Command::SweepSync(c)
        | Command::SweepSplay(c)
        | Command::Convergence(c)
        | Command::Hypergraph { common: c, .. } => c.clone(),
    };
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        configure_threads(threads)?;
    }
    match cli.command {
        Command::Hypergraph { check, .. } => {
            let cfg = load_network_config(&common)?;
            hypergraph(&cfg, &common, check)
        }
        Command::Simulate(_) => {
            let cfg = load_config(&common)?;
            let phi0 = match &cfg.simulate.phi0 {
                Some(p) => p.clone(),
                None => random_phases(&mut ChaCha8Rng::seed_from_u64(common.seed), cfg.n),
            };
            let (system, traj) = run_simulation(&cfg, &phi0)?;
            emit(&common, &cfg, |w| write_simulation_csv(system, &traj, cfg.n, cfg.simulate.samples, w))
        }
        Command::Reduce(_) => {
            let cfg = load_config(&common)?;
            let reduced = assemble(&cfg.network()?, &cfg.params, &cfg.g, cfg.order)?;
            let mut out = output(&common, &cfg)?;
            writeln!(out, "{}", reduced.to_canonical_json()?)?;
            out.flush()?;
            Ok(())
        }
        Command::FloquetSync(_) => single_point(&load_config(&common)?, &common, false),
        Command::FloquetSplay(_) => single_point(&load_config(&common)?, &common, true),
        Command::SweepSync(_) => {
            let cfg = load_config(&common)?;
            let rows = run_sweep_sync(&cfg)?;
            emit(&common, &cfg, |w| write_sweep_csv(&rows, w))?;
            report_failures(&rows);
            Ok(())
        }
        Command::SweepSplay(_) => {
            let cfg = load_config(&common)?;
            let rows = run_sweep_splay(&cfg)?;
            emit(&common, &cfg, |w| write_sweep_csv(&rows, w))?;
            report_failures(&rows);
            for &system in &cfg.systems {
                for delta in cfg.grid.delta.values() {
                    for c in detect_neimark_sacker(&rows, system, delta, 1e-3) {
                        eprintln!(
                            "crossing: system={} delta={} K in [{}, {}], |lambda| {:.6} -> {:.6}",
                            c.system, c.delta, c.k_lo, c.k_hi, c.modulus_lo, c.modulus_hi
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Convergence(_) => {
            let cfg = load_config(&common)?;
            let report = run_convergence(&cfg)?;
            emit(&common, &cfg, |w| write_convergence_csv(&report, w))?;
            for f in &report.fits {
                eprintln!("slope: delta={} {} order {} -> {:.3}", f.delta, f.quantity, f.order, f.slope);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
