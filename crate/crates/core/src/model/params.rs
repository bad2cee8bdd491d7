use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

/// Physical parameters of the oscillator network.
///
/// `k` is the coupling strength and may take either sign; every formula in
/// the crate is used verbatim for `K < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub omega: f64,
    pub m: f64,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub delta: f64,
}

impl Params {
    pub fn new(omega: f64, m: f64, alpha: f64, k: f64, delta: f64) -> Result<Self> {
        let p = Self {
            omega,
            m,
            alpha,
            k,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `ω = 1, m = −1, α = π/2 + 1/20`, uncoupled and undeformed.
    pub fn figure_defaults() -> Self {
        Self {
            omega: 1.0,
            m: -1.0,
            alpha: PI / 2.0 + 0.05,
            k: 0.0,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.omega, self.m, self.alpha, self.k, self.delta]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!("omega = {} must be > 0", self.omega)));
        }
        if self.m >= 0.0 {
            return Err(Error::InvalidParams(format!("m = {} must be < 0", self.m)));
        }
        if self.delta.abs() >= 1.0 {
            return Err(Error::InvalidParams(format!("|delta| = {} must be < 1", self.delta.abs())));
        }
        Ok(())
    }

    pub fn with_coupling(self, k: f64) -> Self {
        Self { k, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }
}

/// One Fourier harmonic `a cos(nφ) + b sin(nφ)` of the shape function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

/// Zero-mean limit-cycle shape `g(φ) = Σ a_n cos(nφ) + b_n sin(nφ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "Vec<Harmonic>", into = "Vec<Harmonic>")]
pub struct ShapeFn {
    harmonics: Vec<Harmonic>,
}

impl ShapeFn {
    pub fn new(harmonics: Vec<Harmonic>) -> Result<Self> {
        if let Some(h) = harmonics.iter().find(|h| h.n == 0) {
            return Err(Error::InvalidParams(format!(
                "shape function must have zero mean; got n = 0 harmonic ({}, {})",
                h.a, h.b
            )));
        }
        if harmonics.iter().any(|h| !h.a.is_finite() || !h.b.is_finite()) {
            return Err(Error::InvalidParams("non-finite harmonic coefficient".into()));
        }
        Ok(Self { harmonics })
    }

    /// `g ≡ 0`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// `g(φ) = sin φ`.
    pub fn sine() -> Self {
        Self::sin_n(1)
    }

    pub fn sin_n(n: u32) -> Self {
        Self {
            harmonics: vec![Harmonic { n, a: 0.0, b: 1.0 }],
        }
    }

    pub fn cos_n(n: u32) -> Self {
        Self {
            harmonics: vec![Harmonic { n, a: 1.0, b: 0.0 }],
        }
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn is_zero(&self) -> bool {
        self.harmonics.iter().all(|h| h.a == 0.0 && h.b == 0.0)
    }

    /// `γ g`.
    pub fn scaled(&self, gamma: f64) -> Self {
        Self {
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    n: h.n,
                    a: gamma * h.a,
                    b: gamma * h.b,
                })
                .collect(),
        }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let (s, c) = (h.n as f64 * phi).sin_cos();
                h.a * c + h.b * s
            })
            .sum()
    }

    /// `g′(φ)`, from the Fourier coefficients.
    pub fn deriv(&self, phi: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let n = h.n as f64;
                let (s, c) = (n * phi).sin_cos();
                n * (h.b * c - h.a * s)
            })
            .sum()
    }

    pub fn second_deriv(&self, phi: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let n = h.n as f64;
                let (s, c) = (n * phi).sin_cos();
                -n * n * (h.a * c + h.b * s)
            })
            .sum()
    }

    /// Upper bound on `|g|`.
    pub fn sup_bound(&self) -> f64 {
        self.harmonics.iter().map(|h| h.a.hypot(h.b)).sum()
    }

    /// Smallest value of `1 + δ g(φ)` on a fine grid.
    pub fn min_deformation(&self, delta: f64) -> f64 {
        if delta * self.sup_bound() < 0.99 {
            return 1.0 - delta.abs() * self.sup_bound();
        }
        let max_n = self.harmonics.iter().map(|h| h.n).max().unwrap_or(1) as usize;
        let samples = 512 * max_n;
        (0..samples)
            .map(|i| 1.0 + delta * self.eval(2.0 * PI * i as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// `g(φ_idx)` as a polynomial on the `n`-torus.
    pub fn to_trigpoly(&self, n: usize, idx: usize) -> TrigPoly {
        let mut p = TrigPoly::zero(n);
        for h in &self.harmonics {
            let f = h.n as i32;
            p += &TrigPoly::cos(n, &[(idx, f)], 0.0, h.a);
            p += &TrigPoly::sin(n, &[(idx, f)], 0.0, h.b);
        }
        p
    }

    /// `g′(φ_idx)` as a polynomial on the `n`-torus.
    pub fn deriv_trigpoly(&self, n: usize, idx: usize) -> TrigPoly {
        self.to_trigpoly(n, idx).partial(idx)
    }
}

impl TryFrom<Vec<Harmonic>> for ShapeFn {
    type Error = Error;
    fn try_from(h: Vec<Harmonic>) -> Result<Self> {
        Self::new(h)
    }
}

impl From<ShapeFn> for Vec<Harmonic> {
    fn from(g: ShapeFn) -> Self {
        g.harmonics
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        assert!(Params::new(1.0, 1.0, 0.0, 0.1, 0.0).is_err());
        assert!(Params::new(0.0, -1.0, 0.0, 0.1, 0.0).is_err());
        assert!(Params::new(1.0, -1.0, 0.0, 0.1, 1.0).is_err());
        assert!(Params::new(1.0, -1.0, 0.0, -0.3, 0.5).is_ok());
    }

    #[test]
    fn shape_rejects_mean() {
        assert!(ShapeFn::new(vec![Harmonic { n: 0, a: 1.0, b: 0.0 }]).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g = ShapeFn::new(vec![
            Harmonic { n: 1, a: 0.3, b: -0.7 },
            Harmonic { n: 3, a: -0.2, b: 0.4 },
        ])
        .unwrap();
        let h = 1e-6;
        for i in 0..50 {
            let phi = 0.13 * i as f64;
            let fd = (g.eval(phi + h) - g.eval(phi - h)) / (2.0 * h);
            assert!((fd - g.deriv(phi)).abs() < 1e-8);
            let fd2 = (g.deriv(phi + h) - g.deriv(phi - h)) / (2.0 * h);
            assert!((fd2 - g.second_deriv(phi)).abs() < 1e-7);
        }
    }

    #[test]
    fn trigpoly_form_agrees() {
        let g = ShapeFn::new(vec![
            Harmonic { n: 2, a: 0.5, b: 0.25 },
            Harmonic { n: 1, a: 0.0, b: 1.0 },
        ])
        .unwrap();
        let p = g.to_trigpoly(3, 1);
        let dp = g.deriv_trigpoly(3, 1);
        for i in 0..20 {
            let phases = [0.3 * i as f64, 0.7 * i as f64 - 1.0, 2.0];
            assert!((p.eval(&phases) - g.eval(phases[1])).abs() < 1e-14);
            assert!((dp.eval(&phases) - g.deriv(phases[1])).abs() < 1e-14);
        }
    }

    #[test]
    fn json_uses_capital_k() {
        let s = serde_json::to_string(&Params::figure_defaults().with_coupling(0.1)).unwrap();
        assert!(s.contains("\"K\":0.1"), "{s}");
    }
}
