use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrate::{flow, IntegratorOptions, JacobianField, VectorField};
use crate::error::{Error, Result};

/// State plus the row-major fundamental matrix, `Ẏ = Df(x) Y`.
struct Variational<'a, F: ?Sized> {
    f: &'a F,
    n: usize,
}

impl<F: JacobianField + ?Sized> VectorField for Variational<'_, F> {
    fn dim(&self) -> usize {
        self.n + self.n * self.n
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        let n = self.n;
        let (state, y) = x.split_at(n);
        let (dstate, dy) = dx.split_at_mut(n);
        self.f.rhs(state, dstate);
        let mut jac = DMatrix::zeros(n, n);
        self.f.jacobian(state, &mut jac);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += jac[(i, l)] * y[l * n + j];
                }
                dy[i * n + j] = acc;
            }
        }
    }
}

/// Integrates `f` and its variational equation over `[0, t]` from `x0`.
///
/// Returns the final state and the fundamental matrix `Φ(t)`.
pub fn fundamental_matrix<F: JacobianField + ?Sized>(
    f: &F,
    x0: &[f64],
    t: f64,
    opts: &IntegratorOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = f.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let mut aug = vec![0.0; n + n * n];
    aug[..n].copy_from_slice(x0);
    for i in 0..n {
        aug[n + i * n + i] = 1.0;
    }
    let out = flow(&Variational { f, n }, &aug, (0.0, t), opts)?;
    let phi = DMatrix::from_row_slice(n, n, &out[n..]);
    Ok((out[..n].to_vec(), phi))
}

/// Floquet data of a periodic orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub period: f64,
    pub multipliers: Vec<Complex64>,
    pub trivial_index: usize,
    /// Index of the non-trivial multiplier with the largest modulus.
    pub critical_index: Option<usize>,
    pub exponents: Vec<Complex64>,
    /// `|v·f| / (|v||f|)` of the eigenvector chosen as trivial.
    pub alignment: f64,
}

impl MonodromyResult {
    /// Eigen-decomposes `Φ(T)` and picks the trivial multiplier by alignment with `flow_dir`.
    pub fn from_matrix(phi: &DMatrix<f64>, flow_dir: &[f64], period: f64) -> Result<Self> {
        let n = phi.nrows();
        if flow_dir.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: flow_dir.len() });
        }
        if !phi.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("monodromy matrix has non-finite entries".into()));
        }
        let mut multipliers = eigenvalues(phi)?;
        // Descending modulus, ties broken by the imaginary part, so output order is stable.
        multipliers.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));

        let fnorm = flow_dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (trivial_index, alignment) = if fnorm == 0.0 {
            let idx = closest_to_one(&multipliers);
            (idx, 0.0)
        } else {
            let f: Vec<Complex64> = flow_dir.iter().map(|&v| Complex64::new(v / fnorm, 0.0)).collect();
            // A fixed generic start vector, so no eigenvector is missed by construction.
            let start: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(1.0 + 0.37 * ((i + 1) as f64).sin(), 0.0))
                .collect();
            let mut best = (0, -1.0);
            for (idx, &lam) in multipliers.iter().enumerate() {
                let v = eigenvector(phi, lam, &start);
                let align = v
                    .as_ref()
                    .map(|v| v.iter().zip(&f).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm())
                    .unwrap_or(0.0);
                // Prefer the multiplier nearer 1 when alignments tie within round-off.
                let better = align > best.1 + 1e-9
                    || ((align - best.1).abs() <= 1e-9
                        && (lam - 1.0).norm() < (multipliers[best.0] - 1.0).norm());
                if better {
                    best = (idx, align);
                }
            }
            best
        };

        let critical_index = (0..n).filter(|&i| i != trivial_index).max_by(|&a, &b| {
            multipliers[a]
                .norm()
                .total_cmp(&multipliers[b].norm())
                .then(multipliers[b].im.total_cmp(&multipliers[a].im).reverse())
                .then(b.cmp(&a))
        });
        let exponents = multipliers.iter().map(|l| l.ln() / period).collect();
        Ok(Self {
            period,
            multipliers,
            trivial_index,
            critical_index,
            exponents,
            alignment,
        })
    }

    pub fn trivial(&self) -> Complex64 {
        self.multipliers[self.trivial_index]
    }

    /// Critical multiplier; `1` when the system has no non-trivial direction.
    pub fn critical(&self) -> Complex64 {
        self.critical_index
            .map(|i| self.multipliers[i])
            .unwrap_or(Complex64::new(1.0, 0.0))
    }

    pub fn critical_exponent(&self) -> Complex64 {
        self.critical_index
            .map(|i| self.exponents[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// The non-trivial multipliers, in the stored order.
    pub fn nontrivial(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.multipliers
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != self.trivial_index)
            .map(|(_, &l)| l)
    }

    /// Whether the critical multiplier is one of a complex-conjugate pair.
    pub fn critical_is_complex_pair(&self, tol: f64) -> bool {
        let c = self.critical();
        c.im.abs() > tol && self.nontrivial().any(|l| (l - c.conj()).norm() <= tol.max(1e-9 * c.norm()))
    }
}

/// Eigenvalues of a real square matrix.
///
/// Monodromy matrices of symmetric networks carry eigenvalues of high multiplicity, on which
/// a plain Francis iteration can stall; faer's solver deflates them reliably.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let a = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    a.eigenvalues()
        .map_err(|e| Error::Singular(format!("eigenvalue iteration did not converge: {e:?}")))
}

fn closest_to_one(multipliers: &[Complex64]) -> usize {
    (0..multipliers.len())
        .min_by(|&a, &b| (multipliers[a] - 1.0).norm().total_cmp(&(multipliers[b] - 1.0).norm()))
        .unwrap_or(0)
}

/// Normalized eigenvector of `phi` for the eigenvalue `lam`, by shifted inverse iteration from `start`.
fn eigenvector(phi: &DMatrix<f64>, lam: Complex64, start: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = phi.nrows();
    let scale = 1.0 + lam.norm();
    let shift = lam + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let a = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { shift } else { Complex64::new(0.0, 0.0) };
        Complex64::new(phi[(i, j)], 0.0) - d
    });
    let lu = a.lu();
    let mut v = nalgebra::DVector::from_column_slice(start);
    for _ in 0..3 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = w / Complex64::new(norm, 0.0);
    }
    Some(v.iter().copied().collect())
}

/// Monodromy of the closed orbit through `x0` with period `period`.
///
/// Fails with [`Error::OrbitNotClosed`] when the return residual (phases mod `2π`) exceeds `closure_tol`.
pub fn monodromy<F: JacobianField + ?Sized>(
    f: &F,
    x0: &[f64],
    period: f64,
    opts: &IntegratorOptions,
    closure_tol: f64,
) -> Result<MonodromyResult> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParams(format!("period {period} must be positive")));
    }
    let (xt, phi) = fundamental_matrix(f, x0, period, opts)?;
    let residual = return_residual(x0, &xt, f.phase_offset());
    if residual > closure_tol {
        return Err(Error::OrbitNotClosed { residual });
    }
    let mut dir = vec![0.0; f.dim()];
    f.rhs(x0, &mut dir);
    MonodromyResult::from_matrix(&phi, &dir, period)
}

/// Max-norm distance between `x0` and `xt`, with coordinates from `phase_offset` on taken mod `2π`.
pub fn return_residual(x0: &[f64], xt: &[f64], phase_offset: usize) -> f64 {
    x0.iter()
        .zip(xt)
        .enumerate()
        .map(|(i, (a, b))| {
            if i >= phase_offset {
                wrap_angle(b - a).abs()
            } else {
                (b - a).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Representative of `x` in `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = x.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r - tau
    } else {
        r
    }
}
