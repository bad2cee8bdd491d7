use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Network, Params};
use crate::trigpoly::TrigPoly;

/// Kind of a single shape harmonic, `sin(nφ)` or `cos(nφ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonicKind {
    Sin,
    Cos,
}

impl fmt::Display for HarmonicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HarmonicKind::Sin => "sin",
            HarmonicKind::Cos => "cos",
        })
    }
}

impl FromStr for HarmonicKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(HarmonicKind::Sin),
            "cos" => Ok(HarmonicKind::Cos),
            _ => Err(Error::InvalidParams(format!("unknown harmonic kind '{s}'"))),
        }
    }
}

/// Parameters of the globally coupled complex Ginzburg–Landau comparison model with `c₂ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeonPazoParams {
    pub eps: f64,
    pub c1: f64,
}

impl LeonPazoParams {
    /// `K = ε|1 + i c₁|`, `α = arg(1 + i c₁)`, `m = −2`, `δ = 0`.
    pub fn to_params(&self, omega: f64) -> Result<Params> {
        let z = Complex64::new(1.0, self.c1);
        Params::new(omega, -2.0, z.arg(), self.eps * z.norm(), 0.0)
    }
}

/// Kuramoto order parameter `(1/N) Σ e^{i h φ_j}` of harmonic `h`.
fn order_harmonic(phi: &[f64], h: f64) -> Complex64 {
    phi.iter().map(|&x| Complex64::from_polar(1.0, h * x)).sum::<Complex64>() / phi.len() as f64
}

/// Mean-field form of the all-to-all `(2,0)` reduction in terms of `R e^{iΨ}` and `Q e^{iΘ}`.
pub fn meanfield_20_rhs(phi: &[f64], p: &Params) -> Vec<f64> {
    let (r, psi) = order_harmonic(phi, 1.0).to_polar();
    let (q, theta) = order_harmonic(phi, 2.0).to_polar();
    let (k, a) = (p.k, p.alpha);
    phi.iter()
        .map(|&x| {
            p.omega + k * r * (psi - x + a).sin() - k * a.sin()
                + k * k / (2.0 * p.m)
                    * (r * q * (psi + x - theta).sin() - r * (psi - x + 2.0 * a).sin()
                        + r * r * (2.0 * psi - 2.0 * x + 2.0 * a).sin())
        })
        .collect()
}

/// `s₀(φ_k, φ_l) = −cos(φ_l − φ_k + α) + cos α`.
pub fn s0(n: usize, k: usize, l: usize, alpha: f64) -> TrigPoly {
    &TrigPoly::constant(n, alpha.cos()) - &TrigPoly::cos(n, &[(l, 1), (k, -1)], alpha, 1.0)
}

/// Closed-form `R^(1,0)_k = (1/(Nm)) Σ_l a_kl s₀(φ_k, φ_l)`.
pub fn closed_form_r10(net: &Network, p: &Params) -> Vec<TrigPoly> {
    let n = net.len();
    (0..n)
        .map(|k| {
            let mut acc = TrigPoly::zero(n);
            for (_, l, a) in net.edges().filter(|e| e.0 == k) {
                acc += &s0(n, k, l, p.alpha).scale(a);
            }
            acc.scale(1.0 / (n as f64 * p.m))
        })
        .collect()
}

/// `s₁(φ_k, φ_l)` for the shape harmonic `sin(hφ)` or `cos(hφ)`.
pub fn s1(n: usize, k: usize, l: usize, harmonic: u32, kind: HarmonicKind, p: &Params) -> TrigPoly {
    let h = harmonic as i32;
    let hf = harmonic as f64;
    let (a, w, m) = (p.alpha, p.omega, p.m);
    // (coefficient, φ_k frequency, φ_l frequency, phase shift)
    let base: [(f64, i32, i32, f64); 6] = [
        (hf - 2.0, h, 0, -a),
        (-1.0, 1, -(h + 1), -a),
        (-(hf - 3.0), h + 1, -1, -a),
        (-1.0, 1, h - 1, -a),
        (-(hf + 2.0), h, 0, a),
        (hf + 3.0, h - 1, 1, a),
    ];
    let mut out = TrigPoly::zero(n);
    for (pos, &(c, fk, fl, shift)) in base.iter().enumerate() {
        let modes = [(k, fk), (l, fl)];
        // The second summand breaks the sign pattern: in the m bracket for sin, in the ω bracket for cos.
        let flip = if pos == 1 { -1.0 } else { 1.0 };
        match kind {
            HarmonicKind::Sin => {
                out += &TrigPoly::cos(n, &modes, shift, hf * w * c);
                out += &TrigPoly::sin(n, &modes, shift, m * c * flip);
            }
            HarmonicKind::Cos => {
                out += &TrigPoly::sin(n, &modes, shift, -hf * w * c * flip);
                out += &TrigPoly::cos(n, &modes, shift, m * c);
            }
        }
    }
    out
}

/// `R^(1,1)` for `g = sin(hφ)` or `g = cos(hφ)`:
/// `(1/(2N(m² + (hω)²))) Σ_l a_kl s₁(φ_k, φ_l)`.
pub fn appendix_r11_harmonic(
    harmonic: u32,
    kind: HarmonicKind,
    net: &Network,
    p: &Params,
) -> Result<Vec<TrigPoly>> {
    if harmonic == 0 {
        return Err(Error::InvalidParams("harmonic index must be at least 1".into()));
    }
    let n = net.len();
    let hw = harmonic as f64 * p.omega;
    let pref = 1.0 / (2.0 * n as f64 * (p.m * p.m + hw * hw));
    Ok((0..n)
        .map(|k| {
            let mut acc = TrigPoly::zero(n);
            for (_, l, a) in net.edges().filter(|e| e.0 == k) {
                acc += &s1(n, k, l, harmonic, kind, p).scale(a);
            }
            acc.scale(pref)
        })
        .collect())
}

/// Factored `α = 0` form of `s₁` for `g = sin`:
/// `−2(1 − cos(φ_k − φ_l))(2ω cos φ_k − ω cos φ_l + 2m sin φ_k − m sin φ_l)`.
pub fn s1_sine_alpha0(phi_k: f64, phi_l: f64, p: &Params) -> f64 {
    let (w, m) = (p.omega, p.m);
    -2.0 * (1.0 - (phi_k - phi_l).cos())
        * (2.0 * w * phi_k.cos() - w * phi_l.cos() + 2.0 * m * phi_k.sin() - m * phi_l.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ShapeFn;
    use crate::reduction::compute_r1;

    #[test]
    fn s0_vanishes_on_diagonal() {
        let p = s0(2, 0, 1, 0.7);
        assert!(p.eval(&[1.3, 1.3]).abs() < 1e-15);
    }

    #[test]
    fn sine_s1_matches_solver() {
        let p = Params::figure_defaults();
        let net = Network::all_to_all(3);
        let closed = appendix_r11_harmonic(1, HarmonicKind::Sin, &net, &p).unwrap();
        let solved = compute_r1(&net, &p, &ShapeFn::sine(), 1).unwrap();
        for k in 0..3 {
            assert!((&closed[k] - &solved[k]).l1_norm() < 1e-12, "{:?}", &closed[k] - &solved[k]);
        }
    }

    #[test]
    fn leon_pazo_mapping() {
        let lp = LeonPazoParams { eps: 0.1, c1: 1.0 };
        let p = lp.to_params(1.0).unwrap();
        assert!((p.k - 0.1 * 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.m, -2.0);
        assert!((p.alpha - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn meanfield_examples() {
        let p = Params::new(1.0, -1.0, 0.3, 0.15, 0.0).unwrap();
        for v in meanfield_20_rhs(&[0.4; 5], &p) {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let tau = std::f64::consts::TAU;
        let splay = [0.2, 0.2 + tau / 3.0, 0.2 + 2.0 * tau / 3.0];
        for v in meanfield_20_rhs(&splay, &p) {
            assert!((v - (1.0 - 0.15 * 0.3f64.sin())).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_harmonic_rejected() {
        let p = Params::figure_defaults();
        assert!(appendix_r11_harmonic(0, HarmonicKind::Cos, &Network::all_to_all(2), &p).is_err());
    }
}
