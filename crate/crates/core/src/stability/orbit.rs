use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::closed::splay_amplitude;
use super::integrate::{IntegratorOptions, JacobianField};
use super::monodromy::{fundamental_matrix, wrap_angle, MonodromyResult};
use crate::error::{Error, Result};
use crate::model::{FullState, Params};
use crate::reduction::ReductionOrder;

/// Newton–Poincaré convergence threshold on the return residual.
pub const SHOOTING_TOL: f64 = 1e-9;
pub const MAX_NEWTON_ITERATIONS: usize = 25;

/// Which dynamical system an orbit or CSV row belongs to; serialized as `full` or `(a,b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SystemLabel {
    Full,
    Reduced(ReductionOrder),
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemLabel::Full => f.write_str("full"),
            SystemLabel::Reduced(o) => write!(f, "{o}"),
        }
    }
}

impl std::str::FromStr for SystemLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "full" {
            Ok(SystemLabel::Full)
        } else {
            Ok(SystemLabel::Reduced(s.parse()?))
        }
    }
}

impl From<SystemLabel> for String {
    fn from(l: SystemLabel) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for SystemLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Sync,
    Splay,
    Continued,
}

/// A closed orbit of a flat-state system: `(R, φ)` for the full system, `φ` for reductions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub system: SystemLabel,
    pub initial_state: Vec<f64>,
    pub period: f64,
    pub kind: OrbitKind,
    /// Max-norm return residual (phases mod `2π`) at the last check; `0` for analytic orbits.
    pub residual: f64,
}

impl PeriodicOrbit {
    /// The initial state as `(R, φ)`; only meaningful for the full system.
    pub fn full_state(&self) -> Option<FullState> {
        match self.system {
            SystemLabel::Full => Some(FullState::from_slice(&self.initial_state)),
            SystemLabel::Reduced(_) => None,
        }
    }

    /// Floquet data from `Φ(T)` along this orbit.
    pub fn monodromy<F: JacobianField + ?Sized>(&self, f: &F, opts: &IntegratorOptions) -> Result<MonodromyResult> {
        super::monodromy::monodromy(f, &self.initial_state, self.period, opts, 1e3 * SHOOTING_TOL.max(opts.rtol))
    }
}

fn splay_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Synchronized orbit `R ≡ 1`, `φ_k = ωt` of the full system; it exists for every `δ`.
pub fn sync_orbit_full(p: &Params, n: usize) -> PeriodicOrbit {
    PeriodicOrbit {
        system: SystemLabel::Full,
        initial_state: FullState::on_torus(vec![0.0; n]).to_vec(),
        period: TAU / p.omega,
        kind: OrbitKind::Sync,
        residual: 0.0,
    }
}

/// Synchronized orbit `φ_k = ωt` of a reduced system.
pub fn sync_orbit_reduced(p: &Params, n: usize, order: ReductionOrder) -> PeriodicOrbit {
    PeriodicOrbit {
        system: SystemLabel::Reduced(order),
        initial_state: vec![0.0; n],
        period: TAU / p.omega,
        kind: OrbitKind::Sync,
        residual: 0.0,
    }
}

/// Splay orbit `R_k ≡ R*`, `φ_k = ω̂t + 2πk/N` of the full system at `δ = 0`.
pub fn splay_orbit_delta0(p: &Params, n: usize) -> Result<PeriodicOrbit> {
    if p.delta != 0.0 {
        return Err(Error::Unsupported("analytic splay orbit requires delta = 0".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParams("need at least one oscillator".into()));
    }
    let (r_star, omega_hat) = splay_amplitude(p)?;
    let state = FullState::new(vec![r_star; n], splay_phases(n))?;
    Ok(PeriodicOrbit {
        system: SystemLabel::Full,
        initial_state: state.to_vec(),
        period: TAU / omega_hat.abs(),
        kind: OrbitKind::Splay,
        residual: 0.0,
    })
}

/// Splay orbit of a reduced system at `δ = 0`, rotating with `ω̂ = ω − K sin α`.
pub fn splay_orbit_reduced(p: &Params, n: usize, order: ReductionOrder) -> Result<PeriodicOrbit> {
    if p.delta != 0.0 {
        return Err(Error::Unsupported("analytic splay orbit requires delta = 0".into()));
    }
    let omega_hat = p.omega - p.k * p.alpha.sin();
    if omega_hat == 0.0 {
        return Err(Error::DegeneratePeriod(omega_hat));
    }
    Ok(PeriodicOrbit {
        system: SystemLabel::Reduced(order),
        initial_state: splay_phases(n),
        period: TAU / omega_hat.abs(),
        kind: OrbitKind::Splay,
        residual: 0.0,
    })
}

/// Result of a Newton–Poincaré correction.
#[derive(Clone, Debug)]
pub struct Continued {
    pub orbit: PeriodicOrbit,
    pub iterations: usize,
    /// Fundamental matrix `Φ(T)` at the accepted iterate.
    pub fundamental: DMatrix<f64>,
    /// Vector field at the initial state, the flow direction of the orbit.
    pub flow_dir: Vec<f64>,
}

impl Continued {
    pub fn monodromy(&self) -> Result<MonodromyResult> {
        MonodromyResult::from_matrix(&self.fundamental, &self.flow_dir, self.orbit.period)
    }
}

/// Newton–Poincaré shooting on the section `{x_s = x_s(0)}`, where `s` is the first phase coordinate.
///
/// The unknowns are every other coordinate of the initial state plus the return time.
pub fn continue_orbit<F: JacobianField + ?Sized>(
    f: &F,
    guess: &PeriodicOrbit,
    opts: &IntegratorOptions,
) -> Result<Continued> {
    let n = f.dim();
    if guess.initial_state.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: guess.initial_state.len() });
    }
    let s = f.phase_offset();
    if s >= n {
        return Err(Error::Unsupported("system has no phase coordinate for the section".into()));
    }
    let mut x0 = guess.initial_state.clone();
    let mut period = guess.period;
    let mut fx0 = vec![0.0; n];
    let mut fxt = vec![0.0; n];
    let mut last = f64::INFINITY;
    for iter in 0..=MAX_NEWTON_ITERATIONS {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::ContinuationFailed { iterations: iter, residual: last });
        }
        f.rhs(&x0, &mut fx0);
        if !(fx0[s] > 0.0) {
            return Err(Error::SectionTangency { velocity: fx0[s] });
        }
        let (xt, phi) = fundamental_matrix(f, &x0, period, opts)?;
        let r: Vec<f64> = (0..n)
            .map(|i| if i >= s { wrap_angle(xt[i] - x0[i]) } else { xt[i] - x0[i] })
            .collect();
        last = r.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        if !last.is_finite() {
            return Err(Error::ContinuationFailed { iterations: iter, residual: last });
        }
        if last < SHOOTING_TOL {
            return Ok(Continued {
                orbit: PeriodicOrbit {
                    system: guess.system,
                    initial_state: x0,
                    period,
                    kind: if iter == 0 { guess.kind } else { OrbitKind::Continued },
                    residual: last,
                },
                iterations: iter,
                fundamental: phi,
                flow_dir: fx0,
            });
        }
        if iter == MAX_NEWTON_ITERATIONS {
            break;
        }
        f.rhs(&xt, &mut fxt);
        let mut jac = DMatrix::zeros(n, n);
        let mut col = 0;
        for j in 0..n {
            if j == s {
                continue;
            }
            for i in 0..n {
                jac[(i, col)] = phi[(i, j)] - if i == j { 1.0 } else { 0.0 };
            }
            col += 1;
        }
        for i in 0..n {
            jac[(i, n - 1)] = fxt[i];
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let dz = jac
            .lu()
            .solve(&rhs)
            .filter(|d| d.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Singular("Newton–Poincaré matrix is singular".into()))?;
        let mut col = 0;
        for (j, xj) in x0.iter_mut().enumerate() {
            if j == s {
                continue;
            }
            *xj += dz[col];
            col += 1;
        }
        period += dz[n - 1];
    }
    Err(Error::ContinuationFailed { iterations: MAX_NEWTON_ITERATIONS, residual: last })
}

/// Kuramoto order parameters of the first and second harmonic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParams {
    pub z: Complex64,
    pub r: f64,
    pub psi: f64,
    pub q: f64,
    pub theta: f64,
}

pub fn order_parameter(phi: &[f64]) -> OrderParams {
    let n = phi.len().max(1) as f64;
    let z: Complex64 = phi.iter().map(|&x| Complex64::from_polar(1.0, x)).sum::<Complex64>() / n;
    let z2: Complex64 = phi.iter().map(|&x| Complex64::from_polar(1.0, 2.0 * x)).sum::<Complex64>() / n;
    let (r, psi) = z.to_polar();
    let (q, theta) = z2.to_polar();
    OrderParams { z, r, psi, q, theta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{full_rhs, FullSystem, Network, ShapeFn};
    use crate::reduction::assemble;

    fn fig(k: f64) -> Params {
        Params::figure_defaults().with_coupling(k)
    }

    #[test]
    fn order_parameter_examples() {
        assert!((order_parameter(&[0.3; 4]).r - 1.0).abs() < 1e-15);
        assert!(order_parameter(&splay_phases(3)).r < 1e-15);
        let o = order_parameter(&[0.0, std::f64::consts::PI]);
        assert!(o.r < 1e-15 && (o.q - 1.0).abs() < 1e-15);
    }

    #[test]
    fn splay_is_invariant_for_full_rhs() {
        let p = fig(0.1);
        let orbit = splay_orbit_delta0(&p, 3).unwrap();
        let state = orbit.full_state().unwrap();
        let (dr, dphi) = full_rhs(&state, &p, &ShapeFn::sine(), &Network::all_to_all(3)).unwrap();
        let w_hat = 1.0 - 0.1 * p.alpha.sin();
        assert!(dr.iter().all(|v| v.abs() < 1e-12));
        assert!(dphi.iter().all(|v| (v - w_hat).abs() < 1e-12));
        assert!(splay_orbit_delta0(&p.with_delta(0.1), 3).is_err());
    }

    #[test]
    fn newton_keeps_exact_splay() {
        let p = fig(0.1);
        let sys = FullSystem::new(p, ShapeFn::sine(), Network::all_to_all(3)).unwrap();
        let seed = splay_orbit_delta0(&p, 3).unwrap();
        let out = continue_orbit(&sys, &seed, &IntegratorOptions::with_tol(1e-12)).unwrap();
        assert_eq!(out.iterations, 0);
        assert!((out.orbit.period - seed.period).abs() < 1e-9);
    }

    #[test]
    fn newton_corrects_perturbed_seed() {
        let p = fig(0.1);
        let order = ReductionOrder::finite(2, 0).unwrap();
        let sys = assemble(&Network::all_to_all(3), &p, &ShapeFn::sine(), order).unwrap();
        let mut seed = splay_orbit_reduced(&p, 3, order).unwrap();
        seed.initial_state[1] += 1e-3;
        seed.period *= 1.001;
        let out = continue_orbit(&sys, &seed, &IntegratorOptions::with_tol(1e-12)).unwrap();
        assert!(out.iterations > 0);
        assert!((out.orbit.period - TAU / (1.0 - 0.1 * p.alpha.sin())).abs() < 1e-8);
        let d = wrap_angle(out.orbit.initial_state[2] - out.orbit.initial_state[1]);
        assert!((d - TAU / 3.0).abs() < 1e-8);
    }

    #[test]
    fn tangent_section_rejected() {
        let p = Params::new(1.0, -1.0, std::f64::consts::FRAC_PI_2, 2.0, 0.0).unwrap();
        let order = ReductionOrder::finite(1, 0).unwrap();
        let sys = assemble(&Network::all_to_all(3), &p, &ShapeFn::sine(), order).unwrap();
        let seed = PeriodicOrbit {
            system: SystemLabel::Reduced(order),
            initial_state: splay_phases(3),
            period: 1.0,
            kind: OrbitKind::Splay,
            residual: 0.0,
        };
        let err = continue_orbit(&sys, &seed, &IntegratorOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SectionTangency { .. }));
    }

    #[test]
    fn system_labels_round_trip() {
        for s in ["full", "(2,2)", "(1,inf)"] {
            let l: SystemLabel = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
    }
}
