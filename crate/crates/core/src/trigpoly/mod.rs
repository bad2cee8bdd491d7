//! Sparse multivariate trigonometric polynomials on the N-torus.
//!
//! A [`TrigPoly`] is stored in the complex exponential basis,
//! `p(φ) = Σ c_n exp(i n·φ)`, with Hermitian pairing `c_{-n} = conj(c_n)` so
//! that every polynomial is real valued. In this basis the operator
//! `R ↦ m R − ω ∇R·𝟙` is diagonal, which turns the torus-expansion PDEs into
//! one complex division per mode (see [`TrigPoly::resolvent_solve`]).

mod freq;
mod repr;
mod series;

pub use freq::FreqVector;
pub use series::DeltaSeries;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with modulus below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Real trigonometric polynomial in `N` phases.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "repr::TrigPolyRepr", try_from = "repr::TrigPolyRepr")]
pub struct TrigPoly {
    n: usize,
    terms: BTreeMap<FreqVector, Complex64>,
}

impl TrigPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        if c.abs() >= PRUNE_THRESHOLD {
            p.terms.insert(FreqVector::zero(), Complex64::new(c, 0.0));
        }
        p
    }

    /// `2 Re(c · exp(i n·φ))`, i.e. the Hermitian pair `c e^{inφ} + c̄ e^{-inφ}`.
    ///
    /// For the zero vector this is the constant `2 Re c`.
    pub fn mode(n: usize, freq: FreqVector, c: Complex64) -> Self {
        let mut p = Self::zero(n);
        if freq.is_zero() {
            p.accumulate(freq, Complex64::new(2.0 * c.re, 0.0));
        } else {
            p.accumulate(freq.negated(), c.conj());
            p.accumulate(freq, c);
        }
        p.prune();
        p
    }

    /// `amp · cos(Σ f_j φ_j + shift)`.
    pub fn cos(n: usize, modes: &[(usize, i32)], shift: f64, amp: f64) -> Self {
        let freq = FreqVector::new(modes.iter().copied());
        Self::mode(n, freq, Complex64::from_polar(0.5 * amp, shift))
    }

    /// `amp · sin(Σ f_j φ_j + shift)`.
    pub fn sin(n: usize, modes: &[(usize, i32)], shift: f64, amp: f64) -> Self {
        let freq = FreqVector::new(modes.iter().copied());
        // sin x = (e^{ix} - e^{-ix}) / 2i, so the e^{ix} coefficient is -i/2.
        let c = Complex64::from_polar(0.5 * amp, shift) * Complex64::new(0.0, -1.0);
        Self::mode(n, freq, c)
    }

    /// Builds a polynomial from raw exponential-basis coefficients.
    ///
    /// Fails if an index is out of range or the coefficients are not Hermitian
    /// to within `1e-12`.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FreqVector, Complex64)>,
    {
        let mut p = Self::zero(n);
        for (freq, c) in terms {
            if let Some(max) = freq.max_index() {
                if max >= n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: max + 1,
                    });
                }
            }
            p.accumulate(freq, c);
        }
        if !p.is_hermitian(1e-12) {
            return Err(Error::Domain(
                "coefficients are not Hermitian; polynomial would be complex valued".into(),
            ));
        }
        p.hermitize();
        p.prune();
        Ok(p)
    }

    pub fn num_oscillators(&self) -> usize {
        self.n
    }

    /// Number of stored exponential modes (each real harmonic counts twice).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FreqVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, freq: &FreqVector) -> Complex64 {
        self.terms.get(freq).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&FreqVector::zero()).re
    }

    /// Sum of coefficient moduli; bounds `|p(φ)|` for every φ.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest `|n_j|` over all modes.
    pub fn max_abs_freq(&self) -> i32 {
        self.terms
            .keys()
            .flat_map(|f| f.entries().iter().map(|e| e.1.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|(freq, c)| {
            if freq.is_zero() {
                return c.im.abs() <= tol;
            }
            let partner = self.coeff(&freq.negated());
            (partner - c.conj()).norm() <= tol
        })
    }

    /// Evaluates `Σ c_n exp(i n·φ)` and returns its real part.
    pub fn eval(&self, phases: &[f64]) -> f64 {
        let z = self.eval_complex(phases);
        debug_assert!(
            z.im.abs() <= 1e-12 * self.l1_norm().max(1.0),
            "imaginary residue {} in real trigonometric polynomial",
            z.im
        );
        z.re
    }

    /// Full complex sum; the imaginary part is round-off only.
    pub fn eval_complex(&self, phases: &[f64]) -> Complex64 {
        assert_eq!(phases.len(), self.n, "phase vector length");
        let mut acc = Complex64::default();
        for (freq, c) in &self.terms {
            let (s, co) = freq.dot(phases).sin_cos();
            acc.re += c.re * co - c.im * s;
            acc.im += c.re * s + c.im * co;
        }
        acc
    }

    /// `∇p·𝟙 = Σ_l ∂p/∂φ_l`: mode `n` is multiplied by `i Σ n_j`.
    pub fn directional_derivative(&self) -> Self {
        self.map_coeffs(|freq, c| c * Complex64::new(0.0, freq.total() as f64))
    }

    /// `∂p/∂φ_j`.
    pub fn partial(&self, j: usize) -> Self {
        self.map_coeffs(|freq, c| c * Complex64::new(0.0, freq.freq(j) as f64))
    }

    /// Solves `m R + rhs = ω ∇R·𝟙` for `R`.
    ///
    /// Mode by mode, `r_n = s_n / (i ω Σn_j − m)`. Since `|iωΣn − m| ≥ |m|`,
    /// every denominator is nonzero whenever `m ≠ 0`.
    pub fn resolvent_solve(rhs: &Self, m: f64, omega: f64) -> Result<Self> {
        if m == 0.0 || !m.is_finite() {
            return Err(Error::SingularOperator { m });
        }
        let mut out = rhs.map_coeffs(|freq, c| c / Complex64::new(-m, omega * freq.total() as f64));
        out.hermitize();
        Ok(out)
    }

    /// Residual `m R + rhs − ω ∇R·𝟙` at `phases`.
    pub fn resolvent_residual(r: &Self, rhs: &Self, m: f64, omega: f64, phases: &[f64]) -> f64 {
        m * r.eval(phases) + rhs.eval(phases) - omega * r.directional_derivative().eval(phases)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_coeffs(|_, c| c * s)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (freq, c) in &other.terms {
            out.accumulate(freq.clone(), *c);
        }
        out.prune();
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (fa, ca) in &self.terms {
            for (fb, cb) in &other.terms {
                out.accumulate(fa.plus(fb), ca * cb);
            }
        }
        out.hermitize();
        out.prune();
        Ok(out)
    }

    /// Relabels oscillators so that index `j` becomes `perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.n);
        for (freq, c) in &self.terms {
            out.accumulate(freq.relabel(perm), *c);
        }
        out
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    fn map_coeffs<F>(&self, f: F) -> Self
    where
        F: Fn(&FreqVector, Complex64) -> Complex64,
    {
        let mut out = Self::zero(self.n);
        for (freq, c) in &self.terms {
            let v = f(freq, *c);
            if v.norm() >= PRUNE_THRESHOLD {
                out.terms.insert(freq.clone(), v);
            }
        }
        out
    }

    fn accumulate(&mut self, freq: FreqVector, c: Complex64) {
        *self.terms.entry(freq).or_default() += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
    }

    /// Forces exact Hermitian pairing by averaging each pair.
    ///
    /// Products accumulate the `n` and `−n` coefficients in different orders,
    /// so they can disagree in the last bits.
    fn hermitize(&mut self) {
        let positive: Vec<FreqVector> = self
            .terms
            .keys()
            .filter(|f| f.is_positive())
            .cloned()
            .collect();
        for freq in positive {
            let neg = freq.negated();
            let a = self.coeff(&freq);
            let b = self.coeff(&neg);
            let avg = 0.5 * (a + b.conj());
            self.terms.insert(freq, avg);
            self.terms.insert(neg, avg.conj());
        }
        // Negative modes without a positive partner.
        let orphans: Vec<(FreqVector, Complex64)> = self
            .terms
            .iter()
            .filter(|(f, _)| !f.is_zero() && !f.is_positive())
            .filter(|(f, _)| !self.terms.contains_key(&f.negated()))
            .map(|(f, c)| (f.clone(), *c))
            .collect();
        for (freq, c) in orphans {
            let avg = 0.5 * c;
            self.terms.insert(freq.negated(), avg.conj());
            self.terms.insert(freq, avg);
        }
        if let Some(c) = self.terms.get_mut(&FreqVector::zero()) {
            c.im = 0.0;
        }
    }
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrigPoly[N={}] {self}", self.n)
    }
}

/// Human-readable form in canonical mode order, one real harmonic per term:
/// `c0 + 2|c|cos(n·φ + arg c) + …`.
impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (freq, c) in &self.terms {
            if freq.is_zero() {
                write!(f, "{:.6e}", c.re)?;
            } else if freq.is_positive() {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "{:.6e}·cos({freq} {:+.6})", 2.0 * c.norm(), c.arg())?;
            } else {
                continue;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        self.checked_add(rhs).expect("TrigPoly dimension mismatch")
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        &self + &rhs
    }
}

impl AddAssign<&TrigPoly> for TrigPoly {
    fn add_assign(&mut self, rhs: &TrigPoly) {
        assert_eq!(self.n, rhs.n, "TrigPoly dimension mismatch");
        for (freq, c) in &rhs.terms {
            self.accumulate(freq.clone(), *c);
        }
        self.prune();
    }
}

impl SubAssign<&TrigPoly> for TrigPoly {
    fn sub_assign(&mut self, rhs: &TrigPoly) {
        assert_eq!(self.n, rhs.n, "TrigPoly dimension mismatch");
        for (freq, c) in &rhs.terms {
            self.accumulate(freq.clone(), -*c);
        }
        self.prune();
    }
}

impl Sub<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(mut self, rhs: TrigPoly) -> TrigPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.checked_mul(rhs).expect("TrigPoly dimension mismatch")
    }
}

impl Mul for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: TrigPoly) -> TrigPoly {
        &self * &rhs
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}

impl Mul<f64> for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}
