use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Params, ShapeFn};
use crate::reduction::{DeltaOrder, HarmonicKind, ReductionOrder};

/// Closed-form critical multiplier of the synchronized orbit in a reduced system.
///
/// The `(2,2)` value is only known for `g = sin φ`; other shapes are accepted when `δ = 0`.
pub fn prmm_sync_closed(order: ReductionOrder, p: &Params, g: &ShapeFn) -> Result<f64> {
    let (k, m, w) = (p.k, p.m, p.omega);
    let (sa, ca) = p.alpha.sin_cos();
    let s2 = sa * sa;
    let exponent = match (order.k_order(), order.delta_order()) {
        (1, DeltaOrder::Exact) => -TAU * k * ca / w,
        (2, DeltaOrder::Finite(0 | 1)) => -TAU * k * (m * ca - k * s2) / (m * w),
        (2, DeltaOrder::Finite(2)) => {
            if *g != ShapeFn::sine() && p.delta != 0.0 {
                return Err(Error::Unsupported(
                    "closed-form (2,2) sync multiplier requires g = sin".into(),
                ));
            }
            let d2 = p.delta * p.delta;
            let inner = m.powi(3) * ca + m * w * w * ca
                - k * m * m * s2
                - 2.0 * k * m * m * d2 * s2
                - k * w * w * s2;
            -TAU * k / (m * w * (m * m + w * w)) * inner
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no closed-form sync multiplier for order {order}"
            )))
        }
    };
    Ok(exponent.exp())
}

/// The two non-trivial branches `½(m − 2K cos α ± √(m² − 4K² sin² α))`.
fn sync_branches(p: &Params) -> (Complex64, Complex64) {
    let (sa, ca) = p.alpha.sin_cos();
    let disc = Complex64::new(p.m * p.m - 4.0 * p.k * p.k * sa * sa, 0.0).sqrt();
    let base = Complex64::new(p.m - 2.0 * p.k * ca, 0.0);
    (0.5 * (base + disc), 0.5 * (base - disc))
}

/// Eigenvalues of the full-system linearization at the synchronized state for `δ = 0`,
/// ordered `q₁ = 0`, `q_{2..N}`, `q_{N+1} = m`, `q_{N+2..2N}`.
pub fn full_sync_spectrum_delta0(p: &Params, n: usize) -> Result<Vec<Complex64>> {
    if p.delta != 0.0 {
        return Err(Error::Unsupported(
            "closed-form sync spectrum needs delta = 0; use the monodromy instead".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParams("need at least one oscillator".into()));
    }
    let (plus, minus) = sync_branches(p);
    let mut q = Vec::with_capacity(2 * n);
    q.push(Complex64::new(0.0, 0.0));
    q.extend(std::iter::repeat_n(plus, n - 1));
    q.push(Complex64::new(p.m, 0.0));
    q.extend(std::iter::repeat_n(minus, n - 1));
    Ok(q)
}

/// Critical exponent `q_{2..N}` of the full synchronized state at `δ = 0`.
pub fn full_sync_critical_exponent(p: &Params) -> Complex64 {
    sync_branches(p).0
}

/// Amplitude `R*` and rotation frequency `ω̂` of the splay orbit at `δ = 0`.
pub fn splay_amplitude(p: &Params) -> Result<(f64, f64)> {
    let disc = 1.0 + 4.0 * p.k * p.alpha.cos() / p.m;
    if disc < 0.0 {
        return Err(Error::NoRealAmplitude(disc));
    }
    let omega_hat = p.omega - p.k * p.alpha.sin();
    if omega_hat == 0.0 {
        return Err(Error::DegeneratePeriod(omega_hat));
    }
    Ok((0.5 * (1.0 + disc.sqrt()), omega_hat))
}

/// Non-trivial splay eigenvalues `q_{2,3}` of the `(1,0)` or `(2,0)` reduction, upper one first.
pub fn splay_eigs_reduced(order: ReductionOrder, p: &Params) -> Result<[Complex64; 2]> {
    let half_k = 0.5 * p.k;
    let q = |sign: f64| {
        let e = Complex64::from_polar(1.0, sign * p.alpha);
        match order.k_order() {
            1 => half_k * e,
            _ => half_k * e * (1.0 - p.k * e / (2.0 * p.m)),
        }
    };
    match (order.k_order(), order.delta_order()) {
        (1 | 2, DeltaOrder::Finite(0)) => Ok([q(1.0), q(-1.0)]),
        _ => Err(Error::Unsupported(format!(
            "no closed-form splay eigenvalues for order {order}"
        ))),
    }
}

/// One harmonic's contribution to `h(γ)` in the synchronized linearization
/// `h(γ)(1/N)(𝟙 − N·I)` of the `(2,1)` reduction.
pub fn appendix_sync_floquet_correction(harmonic: u32, kind: HarmonicKind, p: &Params, gamma: f64) -> Result<f64> {
    if harmonic == 0 {
        return Err(Error::InvalidParams("harmonic index must be at least 1".into()));
    }
    let nw = harmonic as f64 * p.omega;
    let sa = p.alpha.sin();
    let pref = 2.0 * p.k * p.k * p.delta * sa * sa / (p.m * p.m + nw * nw);
    let (s, c) = (harmonic as f64 * gamma).sin_cos();
    Ok(pref
        * match kind {
            HarmonicKind::Sin => nw * c + p.m * s,
            HarmonicKind::Cos => p.m * c - nw * s,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn fig(k: f64) -> Params {
        Params::figure_defaults().with_coupling(k)
    }

    #[test]
    fn sync_closed_values() {
        let g = ShapeFn::sine();
        let a = prmm_sync_closed(ReductionOrder::first_exact(), &fig(0.1), &g).unwrap();
        // exp(2π · 0.1 · sin(0.05))
        assert!((a - 1.0319011).abs() < 1e-7, "{a}");
        let b = prmm_sync_closed(ReductionOrder::finite(2, 0).unwrap(), &fig(0.1), &g).unwrap();
        assert!((b - 0.969212).abs() < 1e-6, "{b}");
        for order in ["1,inf", "2,0", "2,1", "2,2"] {
            let o: ReductionOrder = order.parse().unwrap();
            assert_eq!(prmm_sync_closed(o, &fig(0.0).with_delta(0.2), &g).unwrap(), 1.0);
        }
        assert!(prmm_sync_closed(ReductionOrder::finite(1, 0).unwrap(), &fig(0.1), &g).is_err());
    }

    #[test]
    fn two_two_reduces_to_two_zero_at_delta0() {
        let g = ShapeFn::sine();
        let p = fig(-0.17);
        let a = prmm_sync_closed(ReductionOrder::finite(2, 2).unwrap(), &p, &g).unwrap();
        let b = prmm_sync_closed(ReductionOrder::finite(2, 0).unwrap(), &p, &g).unwrap();
        assert!((a - b).abs() < 1e-15);
        let bad = ShapeFn::cos_n(2);
        assert!(prmm_sync_closed(ReductionOrder::finite(2, 2).unwrap(), &p.with_delta(0.1), &bad).is_err());
    }

    #[test]
    fn sync_spectrum_example() {
        let q = full_sync_spectrum_delta0(&fig(0.1), 3).unwrap();
        assert!((q[1].re + 0.0050786).abs() < 1e-7, "{}", q[1]);
        assert!((q[4].re + 0.9849256).abs() < 1e-7, "{}", q[4]);
        let lam = (TAU * q[1].re).exp();
        assert!((lam - 0.96859).abs() < 1e-5);
        let zero = full_sync_spectrum_delta0(&fig(0.0), 4).unwrap();
        assert_eq!(zero.iter().filter(|z| z.norm() == 0.0).count(), 4);
        assert!(full_sync_spectrum_delta0(&fig(0.1).with_delta(0.1), 3).is_err());
    }

    #[test]
    fn sync_spectrum_small_k_at_alpha0() {
        let p = Params::new(1.0, -1.0, 0.0, 1e-4, 0.0).unwrap();
        let q = full_sync_critical_exponent(&p);
        assert!((q.re + 1e-4).abs() < 1e-10);
    }

    #[test]
    fn splay_values() {
        let (r, w) = splay_amplitude(&fig(0.1)).unwrap();
        assert!((r - 1.0049732).abs() < 1e-7, "{r}");
        assert!((w - 0.900125).abs() < 1e-6);
        assert_eq!(splay_amplitude(&fig(0.0)).unwrap(), (1.0, 1.0));
        let q = splay_eigs_reduced(ReductionOrder::finite(1, 0).unwrap(), &fig(0.1)).unwrap();
        assert!((q[0].re + 0.0024990).abs() < 1e-7 && (q[0].im - 0.0499375).abs() < 1e-7);
        assert!((q[1] - q[0].conj()).norm() < 1e-15);
        let big = Params::new(1.0, -1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(splay_amplitude(&big), Err(Error::NoRealAmplitude(_))));
        let stall = Params::new(1.0, -1.0, FRAC_PI_2, 1.0, 0.0).unwrap();
        assert!(matches!(splay_amplitude(&stall), Err(Error::DegeneratePeriod(_))));
    }

    #[test]
    fn appendix_summand_example() {
        let p = Params::new(1.0, -1.0, FRAC_PI_2, 0.1, 0.1).unwrap();
        let v = appendix_sync_floquet_correction(1, HarmonicKind::Sin, &p, 0.0).unwrap();
        assert!((v - 0.001).abs() < 1e-15);
        let p0 = p.with_coupling(0.1);
        let p0 = Params { alpha: 0.0, ..p0 };
        assert_eq!(appendix_sync_floquet_correction(2, HarmonicKind::Cos, &p0, 0.4).unwrap(), 0.0);
    }
}
