use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Network, Params, ShapeFn};
use crate::error::{Error, Result};
use crate::stability::{JacobianField, VectorField};

/// State of the transformed system: radii `R` and phases `φ`.
///
/// Flattened vectors use the ordering `(R_1..R_N, φ_1..φ_N)` everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FullState {
    pub fn new(r: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if r.len() != phi.len() {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                got: phi.len(),
            });
        }
        if let Some(bad) = r.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::Domain(format!("radius {bad} must be positive")));
        }
        Ok(Self { r, phi })
    }

    /// `R ≡ 1` with the given phases.
    pub fn on_torus(phi: Vec<f64>) -> Self {
        Self {
            r: vec![1.0; phi.len()],
            phi,
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.r.clone();
        v.extend_from_slice(&self.phi);
        v
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            r: x[..n].to_vec(),
            phi: x[n..].to_vec(),
        }
    }
}

fn deformation(delta: f64, g: &ShapeFn, phi: f64) -> Result<f64> {
    let u = 1.0 + delta * g.eval(phi);
    if u <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + δ g(φ) = {u} is not positive at φ = {phi}"
        )));
    }
    Ok(u)
}

/// Single deformed oscillator in polar coordinates.
///
/// `ṙ = δ g′(φ) ω r / (1 + δ g(φ)) + m r² (r − 1 − δ g(φ))`, `φ̇ = ω`.
pub fn single_rhs(r: f64, phi: f64, p: &Params, g: &ShapeFn) -> Result<(f64, f64)> {
    let u = deformation(p.delta, g, phi)?;
    let dr = p.delta * g.deriv(phi) * p.omega * r / u + p.m * r * r * (r - u);
    Ok((dr, p.omega))
}

/// `R = r / (1 + δ g(φ))`.
pub fn to_transformed(r: f64, phi: f64, delta: f64, g: &ShapeFn) -> Result<f64> {
    Ok(r / deformation(delta, g, phi)?)
}

/// `r = R (1 + δ g(φ))`.
pub fn from_transformed(big_r: f64, phi: f64, delta: f64, g: &ShapeFn) -> Result<f64> {
    Ok(big_r * deformation(delta, g, phi)?)
}

/// Graph-coupled network in transformed coordinates,
/// `Ṙ_k = F(R_k, φ_k) + K G_k(R, φ)`, `φ̇_k = ω + K H_k(R, φ)`.
#[derive(Clone, Debug)]
pub struct FullSystem {
    params: Params,
    g: ShapeFn,
    net: Network,
}

/// Per-oscillator `u = 1 + δg`, `u′ = δg′`, `u″ = δg″`.
struct Deform {
    u: Vec<f64>,
    up: Vec<f64>,
    upp: Vec<f64>,
}

impl FullSystem {
    pub fn new(params: Params, g: ShapeFn, net: Network) -> Result<Self> {
        params.validate()?;
        let min_u = g.min_deformation(params.delta);
        if min_u <= 0.0 {
            return Err(Error::Domain(format!(
                "1 + δ g(φ) reaches {min_u}; the deformed limit cycle is not star-shaped"
            )));
        }
        Ok(Self { params, g, net })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn shape(&self) -> &ShapeFn {
        &self.g
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn n(&self) -> usize {
        self.net.len()
    }

    fn deform(&self, phi: &[f64]) -> Deform {
        let d = self.params.delta;
        Deform {
            u: phi.iter().map(|&x| 1.0 + d * self.g.eval(x)).collect(),
            up: phi.iter().map(|&x| d * self.g.deriv(x)).collect(),
            upp: phi.iter().map(|&x| d * self.g.second_deriv(x)).collect(),
        }
    }

    fn check(&self, state: &FullState) -> Result<()> {
        if state.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: state.len(),
            });
        }
        for &phi in &state.phi {
            deformation(self.params.delta, &self.g, phi)?;
        }
        Ok(())
    }

    /// Returns `(dR, dφ)`.
    pub fn rhs_state(&self, state: &FullState) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(state)?;
        let mut dx = vec![0.0; 2 * self.n()];
        self.rhs(&state.to_vec(), &mut dx);
        let dphi = dx.split_off(self.n());
        Ok((dx, dphi))
    }

    pub fn jacobian_state(&self, state: &FullState) -> Result<DMatrix<f64>> {
        self.check(state)?;
        let n = self.n();
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        self.jacobian(&state.to_vec(), &mut jac);
        Ok(jac)
    }

    /// Phase coupling `H_k(R, φ)`.
    pub fn coupling_h(&self, r: &[f64], phi: &[f64], k: usize) -> f64 {
        let p = &self.params;
        let n = self.n();
        let uk = 1.0 + p.delta * self.g.eval(phi[k]);
        let (sa, _) = p.alpha.sin_cos();
        let mut acc = 0.0;
        for l in 0..n {
            let a = self.net.weight(k, l);
            if a == 0.0 {
                continue;
            }
            let ul = 1.0 + p.delta * self.g.eval(phi[l]);
            let s = (phi[l] - phi[k] + p.alpha).sin();
            acc += a * (r[l] * ul * s / (r[k] * uk) - sa);
        }
        acc / n as f64
    }
}

impl VectorField for FullSystem {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn phase_offset(&self) -> usize {
        self.n()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let n = self.n();
        let p = &self.params;
        let (r, phi) = x.split_at(n);
        let Deform { u, up, .. } = self.deform(phi);
        let (sa, ca) = p.alpha.sin_cos();
        let inv_n = 1.0 / n as f64;
        for k in 0..n {
            let f = p.m * r[k] * r[k] * (r[k] - 1.0) * u[k] * u[k];
            let mut gk = 0.0;
            let mut hk = 0.0;
            for l in 0..n {
                let a = self.net.weight(k, l);
                if a == 0.0 {
                    continue;
                }
                let (s, c) = (phi[l] - phi[k] + p.alpha).sin_cos();
                let rl = r[l] * u[l];
                gk += a
                    * (rl * c / u[k] - r[k] * ca - up[k] * (rl * s / (u[k] * u[k]) - r[k] * sa / u[k]));
                hk += a * (rl * s / (r[k] * u[k]) - sa);
            }
            dx[k] = f + p.k * gk * inv_n;
            dx[n + k] = p.omega + p.k * hk * inv_n;
        }
    }
}

impl JacobianField for FullSystem {
    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        let n = self.n();
        let p = &self.params;
        let (r, phi) = x.split_at(n);
        let Deform { u, up, upp } = self.deform(phi);
        let (sa, ca) = p.alpha.sin_cos();
        let kn = p.k / n as f64;
        jac.fill(0.0);
        for k in 0..n {
            let (rk, uk, upk, uppk) = (r[k], u[k], up[k], upp[k]);
            let uk2 = uk * uk;
            jac[(k, k)] += p.m * (3.0 * rk * rk - 2.0 * rk) * uk2;
            jac[(k, n + k)] += 2.0 * p.m * rk * rk * (rk - 1.0) * uk * upk;
            for l in 0..n {
                let a = self.net.weight(k, l);
                if a == 0.0 {
                    continue;
                }
                let w = kn * a;
                let (s, c) = (phi[l] - phi[k] + p.alpha).sin_cos();
                let (rl, ul, upl) = (r[l], u[l], up[l]);

                // dR_k row
                jac[(k, l)] += w * (ul * c / uk - upk * ul * s / uk2);
                jac[(k, k)] += w * (-ca + upk * sa / uk);
                jac[(k, n + l)] +=
                    w * (rl * (upl * c - ul * s) / uk - upk * rl * (upl * s + ul * c) / uk2);
                jac[(k, n + k)] += w
                    * (rl * ul * (s / uk - c * upk / uk2)
                        - rl * ul * (uppk * s / uk2 - upk * c / uk2 - 2.0 * upk * upk * s / (uk2 * uk))
                        + rk * sa * (uppk / uk - upk * upk / uk2));

                // dφ_k row
                jac[(n + k, l)] += w * ul * s / (rk * uk);
                jac[(n + k, k)] -= w * rl * ul * s / (rk * rk * uk);
                jac[(n + k, n + l)] += w * rl * (upl * s + ul * c) / (rk * uk);
                jac[(n + k, n + k)] += w * rl * ul / rk * (-c / uk - s * upk / uk2);
            }
        }
    }
}

/// `full_rhs` as a free function over explicit model pieces.
pub fn full_rhs(
    state: &FullState,
    p: &Params,
    g: &ShapeFn,
    net: &Network,
) -> Result<(Vec<f64>, Vec<f64>)> {
    FullSystem::new(*p, g.clone(), net.clone())?.rhs_state(state)
}

/// Analytic Jacobian in `(R, φ)` ordering.
pub fn full_jacobian(state: &FullState, p: &Params, g: &ShapeFn, net: &Network) -> Result<DMatrix<f64>> {
    FullSystem::new(*p, g.clone(), net.clone())?.jacobian_state(state)
}

/// Cartesian network `Ȧ_k = 𝓕(A_k) + K e^{iα} (1/N) Σ_l a_kl (A_l − A_k)`.
pub fn cartesian_rhs(
    states: &[Complex64],
    p: &Params,
    g: &ShapeFn,
    net: &Network,
) -> Result<Vec<Complex64>> {
    let n = states.len();
    if net.len() != n {
        return Err(Error::DimensionMismatch {
            expected: net.len(),
            got: n,
        });
    }
    let rot = Complex64::from_polar(p.k, p.alpha) / n as f64;
    let mut out = Vec::with_capacity(n);
    for (k, &a_k) in states.iter().enumerate() {
        let (r, phi) = a_k.to_polar();
        if r == 0.0 {
            return Err(Error::Domain(format!("oscillator {k} at the origin has no phase")));
        }
        let (dr, dphi) = single_rhs(r, phi, p, g)?;
        let intrinsic = Complex64::new(dr, r * dphi) * Complex64::from_polar(1.0, phi);
        let coupling: Complex64 = (0..n)
            .map(|l| net.weight(k, l) * (states[l] - a_k))
            .sum();
        out.push(intrinsic + rot * coupling);
    }
    Ok(out)
}

/// Pushes a transformed-coordinate velocity `(Ṙ, φ̇)` at `(R, φ)` forward to `Ȧ`.
pub fn transformed_velocity_to_cartesian(
    state: &FullState,
    dr: &[f64],
    dphi: &[f64],
    delta: f64,
    g: &ShapeFn,
) -> Result<Vec<Complex64>> {
    (0..state.len())
        .map(|k| {
            let phi = state.phi[k];
            let u = deformation(delta, g, phi)?;
            let r = state.r[k] * u;
            let rdot = dr[k] * u + state.r[k] * delta * g.deriv(phi) * dphi[k];
            Ok(Complex64::new(rdot, r * dphi[k]) * Complex64::from_polar(1.0, phi))
        })
        .collect()
}
