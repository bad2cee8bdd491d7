use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::{map_points, AnySystem, Execution, ExperimentConfig};
use crate::error::{Error, Result};
use crate::model::{Network, Params, ShapeFn};
use crate::stability::{
    continue_orbit, integrate, monodromy, prmm_sync_closed, splay_orbit_delta0, splay_orbit_reduced,
    sync_orbit_full, sync_orbit_reduced, IntegratorOptions, PeriodicOrbit, SystemLabel, Trajectory,
};

/// One `(δ, K, system)` result. Failed points carry `NaN` values and a reason.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub i_delta: usize,
    pub i_k: usize,
    pub delta: f64,
    pub k: f64,
    pub system: SystemLabel,
    pub period: f64,
    pub prmm: Complex64,
    pub converged: bool,
    pub reason: Option<String>,
}

impl SweepRow {
    fn failed(i_delta: usize, i_k: usize, delta: f64, k: f64, system: SystemLabel, reason: String) -> Self {
        Self {
            i_delta,
            i_k,
            delta,
            k,
            system,
            period: f64::NAN,
            prmm: Complex64::new(f64::NAN, f64::NAN),
            converged: false,
            reason: Some(reason),
        }
    }
}

fn sort_rows(rows: &mut [SweepRow], systems: &[SystemLabel]) {
    let pos = |s: &SystemLabel| systems.iter().position(|x| x == s).unwrap_or(usize::MAX);
    rows.sort_by(|a, b| {
        (a.i_delta, a.i_k, pos(&a.system)).cmp(&(b.i_delta, b.i_k, pos(&b.system)))
    });
}

/// Critical multiplier of the synchronized orbit of one system at one parameter point.
///
/// Reduced systems use the closed form when one exists.
pub fn floquet_sync_point(
    system: SystemLabel,
    net: &Network,
    p: &Params,
    g: &ShapeFn,
    opts: &IntegratorOptions,
) -> Result<(f64, Complex64)> {
    let n = net.len();
    let period = TAU / p.omega;
    if let SystemLabel::Reduced(order) = system {
        if net.is_all_to_all() {
            if let Ok(lam) = prmm_sync_closed(order, p, g) {
                return Ok((period, Complex64::new(lam, 0.0)));
            }
        }
    }
    let sys = AnySystem::build(system, net, p, g)?;
    let orbit = match system {
        SystemLabel::Full => sync_orbit_full(p, n),
        SystemLabel::Reduced(order) => sync_orbit_reduced(p, n, order),
    };
    let res = monodromy(&sys, &orbit.initial_state, orbit.period, opts, 1e-6)?;
    Ok((period, res.critical()))
}

pub fn run_sweep_sync(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_sync_with(cfg, Execution::Parallel)
}

/// Critical multipliers of the synchronized orbit over the `(δ, K)` grid.
pub fn run_sweep_sync_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let net = cfg.network()?;
    let opts = IntegratorOptions::with_tol(cfg.tol);
    let deltas = cfg.grid.delta.values();
    let ks = cfg.grid.k.values();
    let mut jobs = Vec::new();
    for (i_delta, &delta) in deltas.iter().enumerate() {
        for (i_k, &k) in ks.iter().enumerate() {
            for &system in &cfg.systems {
                jobs.push((i_delta, i_k, delta, k, system));
            }
        }
    }
    let mut rows = map_points(&jobs, exec, |&(i_delta, i_k, delta, k, system)| {
        let p = cfg.params.with_coupling(k).with_delta(delta);
        match floquet_sync_point(system, &net, &p, &cfg.g, &opts) {
            Ok((period, prmm)) => SweepRow {
                i_delta,
                i_k,
                delta,
                k,
                system,
                period,
                prmm,
                converged: true,
                reason: None,
            },
            Err(e) => SweepRow::failed(i_delta, i_k, delta, k, system, e.to_string()),
        }
    });
    sort_rows(&mut rows, &cfg.systems);
    Ok(rows)
}

fn splay_seed(system: SystemLabel, p: &Params, n: usize) -> Result<PeriodicOrbit> {
    let p0 = p.with_delta(0.0);
    match system {
        SystemLabel::Full => splay_orbit_delta0(&p0, n),
        SystemLabel::Reduced(order) => splay_orbit_reduced(&p0, n, order),
    }
}

/// `δ` values visited from `0` towards every target of one sign, at most `step` apart.
fn continuation_path(targets: &[f64], step: f64) -> Vec<f64> {
    let far = targets.iter().fold(0.0f64, |a, &t| if t.abs() > a.abs() { t } else { a });
    let sign = if far < 0.0 { -1.0 } else { 1.0 };
    let mut path: Vec<f64> = Vec::new();
    let mut i = 1usize;
    while (i as f64) * step < far.abs() - 1e-12 {
        path.push(sign * i as f64 * step);
        i += 1;
    }
    path.extend(targets.iter().copied().filter(|t| *t != 0.0));
    path.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    path.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    path
}

/// Orbit near the splay state followed in `δ` for one `(K, system)`; one entry per requested `δ`.
fn splay_chain(
    cfg: &ExperimentConfig,
    net: &Network,
    system: SystemLabel,
    k: f64,
    targets: &[f64],
    opts: &IntegratorOptions,
) -> Vec<Result<(f64, Complex64)>> {
    let p = cfg.params.with_coupling(k);
    let mut out: Vec<Option<Result<(f64, Complex64)>>> = vec![None; targets.len()];
    let mut record = |delta: f64, value: Result<(f64, Complex64)>| {
        for (slot, t) in out.iter_mut().zip(targets) {
            if (t - delta).abs() < 1e-12 && slot.is_none() {
                *slot = Some(value.clone());
            }
        }
    };
    let seed = match splay_seed(system, &p, cfg.n) {
        Ok(s) => s,
        Err(e) => {
            return targets.iter().map(|_| Err(e.clone())).collect();
        }
    };
    let step_at = |orbit: &PeriodicOrbit, delta: f64| -> Result<(PeriodicOrbit, (f64, Complex64))> {
        let sys = AnySystem::build(system, net, &p.with_delta(delta), &cfg.g)?;
        let c = continue_orbit(&sys, orbit, opts)?;
        let m = c.monodromy()?;
        let period = c.orbit.period;
        Ok((c.orbit, (period, m.critical())))
    };
    let at_zero = step_at(&seed, 0.0);
    record(0.0, at_zero.as_ref().map(|r| r.1).map_err(Clone::clone));
    for sign_targets in [
        targets.iter().copied().filter(|t| *t > 0.0).collect::<Vec<_>>(),
        targets.iter().copied().filter(|t| *t < 0.0).collect::<Vec<_>>(),
    ] {
        if sign_targets.is_empty() {
            continue;
        }
        let mut current = at_zero.as_ref().map(|r| r.0.clone()).map_err(Clone::clone);
        for delta in continuation_path(&sign_targets, cfg.delta_step) {
            let next = match &current {
                Ok(orbit) => step_at(orbit, delta),
                Err(e) => Err(Error::ContinuationFailed {
                    iterations: 0,
                    residual: match e {
                        Error::ContinuationFailed { residual, .. } => *residual,
                        _ => f64::NAN,
                    },
                }),
            };
            record(delta, next.as_ref().map(|r| r.1).map_err(Clone::clone));
            current = next.map(|r| r.0);
        }
    }
    out.into_iter()
        .map(|v| v.unwrap_or_else(|| Err(Error::Unsupported("delta not on the continuation path".into()))))
        .collect()
}

fn require_three(n: usize) -> Result<()> {
    if n != 3 {
        return Err(Error::InvalidParams(format!(
            "splay stability is classified for N = 3 only, got N = {n}"
        )));
    }
    Ok(())
}

pub fn run_sweep_splay(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_splay_with(cfg, Execution::Parallel)
}

/// Periods and critical multipliers of orbits continued from the `δ = 0` splay state, `N = 3`.
pub fn run_sweep_splay_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    require_three(cfg.n)?;
    let net = cfg.network()?;
    let opts = IntegratorOptions::with_tol(cfg.tol);
    let deltas = cfg.grid.delta.values();
    let ks = cfg.grid.k.values();
    let jobs: Vec<(usize, f64, SystemLabel)> = ks
        .iter()
        .enumerate()
        .flat_map(|(i_k, &k)| cfg.systems.iter().map(move |&s| (i_k, k, s)))
        .collect();
    let chains = map_points(&jobs, exec, |&(i_k, k, system)| {
        let results = splay_chain(cfg, &net, system, k, &deltas, &opts);
        results
            .into_iter()
            .enumerate()
            .map(|(i_delta, r)| match r {
                Ok((period, prmm)) => SweepRow {
                    i_delta,
                    i_k,
                    delta: deltas[i_delta],
                    k,
                    system,
                    period,
                    prmm,
                    converged: true,
                    reason: None,
                },
                Err(e) => SweepRow::failed(i_delta, i_k, deltas[i_delta], k, system, e.to_string()),
            })
            .collect::<Vec<_>>()
    });
    let mut rows: Vec<SweepRow> = chains.into_iter().flatten().collect();
    sort_rows(&mut rows, &cfg.systems);
    Ok(rows)
}

/// Period and critical multiplier of the orbit near the splay state at the configured `(δ, K)`.
pub fn floquet_splay_point(cfg: &ExperimentConfig, system: SystemLabel) -> Result<(f64, Complex64)> {
    cfg.validate()?;
    require_three(cfg.n)?;
    let net = cfg.network()?;
    let opts = IntegratorOptions::with_tol(cfg.tol);
    let target = [cfg.params.delta];
    splay_chain(cfg, &net, system, cfg.params.k, &target, &opts)
        .pop()
        .expect("one target")
}

/// A sign change of `|λ_crit| − 1` between neighbouring `K` values on a complex pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub system: SystemLabel,
    pub delta: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    pub modulus_lo: f64,
    pub modulus_hi: f64,
}

/// Unit-circle crossings of a complex critical multiplier pair along `K` at fixed `δ`.
///
/// Points with `|K| < k_mask` are skipped, which removes the degenerate uncoupled point.
pub fn detect_neimark_sacker(rows: &[SweepRow], system: SystemLabel, delta: f64, k_mask: f64) -> Vec<Crossing> {
    let mut pts: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.system == system && (r.delta - delta).abs() < 1e-12)
        .filter(|r| r.converged && r.k.abs() >= k_mask)
        .collect();
    pts.sort_by(|a, b| a.k.total_cmp(&b.k));
    pts.windows(2)
        .filter(|w| w[0].k.signum() == w[1].k.signum())
        .filter(|w| w.iter().all(|r| r.prmm.im.abs() > 1e-9))
        .filter(|w| (w[0].prmm.norm() - 1.0).signum() != (w[1].prmm.norm() - 1.0).signum())
        .map(|w| Crossing {
            system,
            delta,
            k_lo: w[0].k,
            k_hi: w[1].k,
            modulus_lo: w[0].prmm.norm(),
            modulus_hi: w[1].prmm.norm(),
        })
        .collect()
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `delta,K,system,period,prmm_re,prmm_im,prmm_abs,converged`, one row per entry.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["delta", "K", "system", "period", "prmm_re", "prmm_im", "prmm_abs", "converged"])
        .map_err(io)?;
    for r in rows {
        wr.write_record([
            fmt_f(r.delta),
            fmt_f(r.k),
            r.system.to_string(),
            fmt_f(r.period),
            fmt_f(r.prmm.re),
            fmt_f(r.prmm.im),
            fmt_f(r.prmm.norm()),
            r.converged.to_string(),
        ])
        .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

/// Trajectory of the configured system from `phi0` (and `R ≡ 1` or the configured `r0`).
pub fn run_simulation(cfg: &ExperimentConfig, phi0: &[f64]) -> Result<(SystemLabel, Trajectory)> {
    let net = cfg.network()?;
    let spec = &cfg.simulate;
    if phi0.len() != cfg.n {
        return Err(Error::DimensionMismatch { expected: cfg.n, got: phi0.len() });
    }
    if !(spec.t_end > 0.0 && spec.t_end.is_finite()) || spec.samples < 2 {
        return Err(Error::InvalidParams("simulate needs t_end > 0 and at least two samples".into()));
    }
    let sys = AnySystem::build(spec.system, &net, &cfg.params, &cfg.g)?;
    let x0 = match spec.system {
        SystemLabel::Full => {
            let r0 = spec.r0.clone().unwrap_or_else(|| vec![1.0; cfg.n]);
            crate::model::FullState::new(r0, phi0.to_vec())?.to_vec()
        }
        SystemLabel::Reduced(_) => phi0.to_vec(),
    };
    let traj = integrate(&sys, &x0, (0.0, spec.t_end), &IntegratorOptions::with_tol(cfg.tol).dense())?;
    Ok((spec.system, traj))
}

/// Samples `traj` at `samples` evenly spaced times; columns `t`, then `R_k` (full system only), then `phi_k`.
pub fn write_simulation_csv<W: Write>(
    system: SystemLabel,
    traj: &Trajectory,
    n: usize,
    samples: usize,
    w: W,
) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec!["t".to_string()];
    if system == SystemLabel::Full {
        header.extend((0..n).map(|k| format!("R{k}")));
    }
    header.extend((0..n).map(|k| format!("phi{k}")));
    wr.write_record(&header).map_err(io)?;
    let t_end = traj.final_time();
    for i in 0..samples {
        let t = if i + 1 == samples { t_end } else { t_end * i as f64 / (samples - 1) as f64 };
        let y = traj.sample(t)?;
        let mut rec = vec![fmt_f(t)];
        rec.extend(y.iter().map(|v| fmt_f(*v)));
        wr.write_record(&rec).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}
