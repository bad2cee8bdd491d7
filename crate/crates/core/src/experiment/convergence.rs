use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{map_points, Execution, ExperimentConfig};
use crate::error::{Error, Result};
use crate::model::{FullSystem, Network, Params, ShapeFn};
use crate::reduction::{assemble, ReducedSystem, ReductionOrder, TorusExpansion, MAX_DELTA_ORDER};
use crate::stability::{flow, fundamental_matrix, wrap_angle, IntegratorOptions, VectorField};

const TORUS_NEWTON_TOL: f64 = 1e-12;
const TORUS_NEWTON_ITERATIONS: usize = 30;

/// Error of one approximation at one `(δ, K)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    /// `phase_velocity` for the reduced dynamics, `torus_radius` for the first-order torus.
    pub quantity: String,
    /// Order in `K` of the approximation.
    pub order: u8,
    pub k: f64,
    pub error: f64,
    /// Local slope `log(e_i / e_{i-1}) / log(K_i / K_{i-1})`; `NaN` on the first `K`.
    pub slope: f64,
}

/// Least-squares slope of `log error` against `log K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub delta: f64,
    pub quantity: String,
    pub order: u8,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<SlopeFit>,
}

impl ConvergenceReport {
    pub fn fit(&self, delta: f64, quantity: &str, order: u8) -> Option<f64> {
        self.fits
            .iter()
            .find(|f| (f.delta - delta).abs() < 1e-12 && f.quantity == quantity && f.order == order)
            .map(|f| f.slope)
    }
}

/// Time-reversed phase dynamics, used to place a first guess.
struct Reversed<'a>(&'a ReducedSystem);

impl VectorField for Reversed<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        self.0.rhs(x, dx);
        dx.iter_mut().for_each(|v| *v = -*v);
    }
}

/// A point `(R, φ*)` on the attracting invariant torus of the full system.
///
/// Starts from `R ≡ 1` at `t = 0`, relaxes for `settle_time` and solves for the initial
/// phases whose image lands on `target` exactly.
pub fn on_torus_state(
    sys: &FullSystem,
    target: &[f64],
    settle_time: f64,
    opts: &IntegratorOptions,
) -> Result<Vec<f64>> {
    let n = sys.n();
    if target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target.len() });
    }
    let first = assemble(sys.network(), sys.params(), sys.shape(), ReductionOrder::first_exact())?;
    let mut phi0 = flow(&Reversed(&first), target, (0.0, settle_time), opts)?;
    let mut last = f64::INFINITY;
    for _ in 0..TORUS_NEWTON_ITERATIONS {
        let mut x0 = vec![1.0; n];
        x0.extend_from_slice(&phi0);
        let (xt, fund) = fundamental_matrix(sys, &x0, settle_time, opts)?;
        let res: Vec<f64> = (0..n).map(|k| wrap_angle(xt[n + k] - target[k])).collect();
        last = res.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        if last < TORUS_NEWTON_TOL {
            let mut state = xt[..n].to_vec();
            state.extend_from_slice(target);
            return Ok(state);
        }
        let jac = DMatrix::from_fn(n, n, |i, j| fund[(n + i, n + j)]);
        let step = jac
            .lu()
            .solve(&DVector::from_iterator(n, res.iter().map(|v| -v)))
            .ok_or_else(|| Error::Singular("phase map Jacobian is singular".into()))?;
        phi0.iter_mut().zip(step.iter()).for_each(|(p, d)| *p += d);
    }
    Err(Error::ContinuationFailed { iterations: TORUS_NEWTON_ITERATIONS, residual: last })
}

fn default_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| wrap_angle(2.1 * k as f64 + 0.4 * (k * k) as f64)).collect()
}

/// The reductions compared at order `a` in `K`: `(0,0)`, `(1,∞)` and `(1,∞)` plus `K² P^(2,≤2)`.
fn reduction_of_order(a: u8, net: &Network, p: &Params, g: &ShapeFn) -> Result<ReducedSystem> {
    match a {
        0 => assemble(net, p, g, ReductionOrder::finite(0, 0)?),
        1 => assemble(net, p, g, ReductionOrder::first_exact()),
        _ => ReducedSystem::with_exact_first_order(net, p, g, 2),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
}

/// Errors at one `(δ, K)`: phase velocity for orders 0, 1, 2 then the torus radius.
fn point_errors(cfg: &ExperimentConfig, net: &Network, phases: &[f64], delta: f64, k: f64) -> Result<[f64; 4]> {
    let p = cfg.params.with_coupling(k).with_delta(delta);
    let opts = IntegratorOptions::with_tol(cfg.tol.min(1e-12));
    let full = FullSystem::new(p, cfg.g.clone(), net.clone())?;
    let n = net.len();
    let state = on_torus_state(&full, phases, cfg.convergence.settle_time, &opts)?;
    let mut dx = vec![0.0; 2 * n];
    full.rhs(&state, &mut dx);
    let mut out = [0.0; 4];
    for a in 0..3u8 {
        let red = reduction_of_order(a, net, &p, &cfg.g)?;
        out[a as usize] = max_abs_diff(&dx[n..], &red.velocity(phases)?);
    }
    let torus = TorusExpansion::new(net, &p, &cfg.g, MAX_DELTA_ORDER)?;
    out[3] = (0..n).fold(0.0, |m: f64, i| m.max((state[i] - torus.radius(i, phases, k, delta)).abs()));
    Ok(out)
}

fn least_squares_slope(ks: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(k, e)| (k.abs().ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - mx) * (y - my), d + (x - mx) * (x - mx)));
    num / den
}

/// Reduction and torus errors against `K` for each configured `δ`.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let spec = &cfg.convergence;
    let net = cfg.network()?;
    let phases = match &spec.phases {
        Some(p) if p.len() != cfg.n => return Err(Error::DimensionMismatch { expected: cfg.n, got: p.len() }),
        Some(p) => p.clone(),
        None => default_phases(cfg.n),
    };
    let mut ks = spec.k_values.clone();
    if ks.len() < 2 || ks.iter().any(|k| !(k.is_finite() && *k != 0.0)) {
        return Err(Error::InvalidParams("convergence needs at least two non-zero K values".into()));
    }
    ks.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if !(spec.settle_time > 0.0 && spec.settle_time.is_finite()) {
        return Err(Error::InvalidParams("settle_time must be positive".into()));
    }
    let jobs: Vec<(f64, f64)> = spec
        .deltas
        .iter()
        .flat_map(|&d| ks.iter().map(move |&k| (d, k)))
        .collect();
    let errors = map_points(&jobs, Execution::Parallel, |&(d, k)| point_errors(cfg, &net, &phases, d, k));
    let errors: Vec<[f64; 4]> = errors.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (i_delta, &delta) in spec.deltas.iter().enumerate() {
        let block = &errors[i_delta * ks.len()..(i_delta + 1) * ks.len()];
        for (col, quantity, order) in [
            (0, "phase_velocity", 0u8),
            (1, "phase_velocity", 1),
            (2, "phase_velocity", 2),
            (3, "torus_radius", 1),
        ] {
            let errs: Vec<f64> = block.iter().map(|e| e[col]).collect();
            for (i, (&k, &error)) in ks.iter().zip(&errs).enumerate() {
                let slope = if i == 0 {
                    f64::NAN
                } else {
                    (error / errs[i - 1]).ln() / (k / ks[i - 1]).abs().ln()
                };
                rows.push(ConvergenceRow { delta, quantity: quantity.into(), order, k, error, slope });
            }
            fits.push(SlopeFit {
                delta,
                quantity: quantity.into(),
                order,
                slope: least_squares_slope(&ks, &errs),
            });
        }
    }
    Ok(ConvergenceReport { rows, fits })
}

/// Writes `delta,quantity,order,K,error,slope`.
pub fn write_convergence_csv<W: Write>(report: &ConvergenceReport, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["delta", "quantity", "order", "K", "error", "slope"]).map_err(io)?;
    for r in &report.rows {
        wr.write_record([
            format!("{:.16e}", r.delta),
            r.quantity.clone(),
            r.order.to_string(),
            format!("{:.16e}", r.k),
            format!("{:.16e}", r.error),
            format!("{:.16e}", r.slope),
        ])
        .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let ks = [0.01, 0.02, 0.04];
        let e: Vec<f64> = ks.iter().map(|k: &f64| 3.0 * k.powi(3)).collect();
        assert!((least_squares_slope(&ks, &e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn torus_point_lands_on_target() {
        let cfg = ExperimentConfig::figure(3);
        let net = cfg.network().unwrap();
        let p = cfg.params.with_coupling(0.05).with_delta(0.1);
        let sys = FullSystem::new(p, cfg.g.clone(), net).unwrap();
        let target = default_phases(3);
        let opts = IntegratorOptions::with_tol(1e-12);
        let x = on_torus_state(&sys, &target, 30.0, &opts).unwrap();
        assert_eq!(&x[3..], &target[..]);
        assert!(x[..3].iter().all(|r| (r - 1.0).abs() < 0.2));
    }
}
