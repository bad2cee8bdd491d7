use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Autonomous vector field `ẋ = f(x)` on a flat state vector.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, x: &[f64], dx: &mut [f64]);

    /// Index of the first phase coordinate; entries from here on wind by `2π` per period.
    fn phase_offset(&self) -> usize {
        0
    }
}

/// A vector field with an analytic Jacobian `Df(x)`.
pub trait JacobianField: VectorField {
    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>);
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        (**self).rhs(x, dx)
    }
    fn phase_offset(&self) -> usize {
        (**self).phase_offset()
    }
}

impl<T: JacobianField + ?Sized> JacobianField for &T {
    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        (**self).jacobian(x, jac)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
    /// Keep the continuous extension of every accepted step.
    pub dense: bool,
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }

    pub fn dense(self) -> Self {
        Self { dense: true, ..self }
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 2_000_000,
            h_max: f64::INFINITY,
            dense: false,
        }
    }
}

/// Continuous extension of one accepted step on `[t0, t0 + h]`.
#[derive(Clone, Debug)]
struct Segment {
    t0: f64,
    h: f64,
    cont: [Vec<f64>; 5],
}

impl Segment {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [c0, c1, c2, c3, c4] = &self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + th * (c1[i] + th1 * (c2[i] + th * (c3[i] + th1 * c4[i])));
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub rejected: usize,
    pub rhs_evals: usize,
    segments: Vec<Segment>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.y.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.t.last().expect("trajectory holds the initial time")
    }

    pub fn steps(&self) -> usize {
        self.t.len() - 1
    }

    pub fn has_dense_output(&self) -> bool {
        !self.segments.is_empty() || self.t.len() == 1
    }

    /// Dense-output state at time `t` inside the integrated span.
    pub fn sample(&self, t: f64) -> Result<Vec<f64>> {
        if self.segments.is_empty() {
            if self.t.len() == 1 && t == self.t[0] {
                return Ok(self.y[0].clone());
            }
            return Err(Error::Unsupported(
                "trajectory was integrated without dense output".into(),
            ));
        }
        let (t0, t1) = (self.t[0], self.final_time());
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        if t < lo - 1e-12 * (1.0 + lo.abs()) || t > hi + 1e-12 * (1.0 + hi.abs()) {
            return Err(Error::Domain(format!("t = {t} outside [{lo}, {hi}]")));
        }
        let forward = t1 >= t0;
        let idx = self
            .segments
            .partition_point(|s| if forward { s.t0 + s.h < t } else { s.t0 + s.h > t })
            .min(self.segments.len() - 1);
        let mut out = vec![0.0; self.y[0].len()];
        self.segments[idx].eval(t, &mut out);
        Ok(out)
    }
}

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn err_norm(y0: &[f64], y1: &[f64], err: &[f64], opts: &IntegratorOptions) -> f64 {
    let n = y0.len().max(1) as f64;
    let s: f64 = (0..y0.len())
        .map(|i| {
            let sk = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn initial_step<F: VectorField + ?Sized>(
    f: &F,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    span: f64,
    opts: &IntegratorOptions,
) -> f64 {
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|y| opts.atol + opts.rtol * y.abs()).collect();
    let rms = |v: &[f64]| -> f64 {
        (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt()
    };
    let (d0, d1) = (rms(y0), rms(f0));
    let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(opts.h_max).min(span);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + dir * h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f.rhs(&y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h;
    let der = d1.max(d2);
    let h1 = if der <= 1e-15 {
        (1e-6f64).max(h * 1e-3)
    } else {
        (0.01 / der).powf(0.2)
    };
    (100.0 * h).min(h1).min(opts.h_max).min(span)
}

/// Dormand–Prince 5(4) integration of `f` from `y0` over `t_span = (t0, t1)`.
///
/// `t1 < t0` integrates backwards in time. The endpoint is always hit exactly.
pub fn integrate<F: VectorField + ?Sized>(
    f: &F,
    y0: &[f64],
    t_span: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = f.dim();
    if y0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y0.len() });
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerances must be positive, got rtol = {}, atol = {}",
            opts.rtol, opts.atol
        )));
    }
    let (t0, t1) = t_span;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParams("non-finite time span".into()));
    }
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
        rejected: 0,
        rhs_evals: 0,
        segments: Vec::new(),
    };
    if t0 == t1 {
        return Ok(traj);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut y = y0.to_vec();
    let mut ystage = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    f.rhs(&y, &mut k[0]);
    traj.rhs_evals += 1;

    let mut h = initial_step(f, &y, &k[0], dir, span, opts);
    traj.rhs_evals += 1;
    let mut t = t0;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        let hs = dir * h;

        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ystage[i] = y[i] + hs * acc;
            }
            f.rhs(&ystage, &mut k[s]);
            if s == 6 {
                ynew.copy_from_slice(&ystage);
            }
        }
        traj.rhs_evals += 6;
        steps += 1;

        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += E[j] * kj[i];
            }
            err[i] = hs * acc;
        }
        let e = err_norm(&y, &ynew, &err, opts);
        if !e.is_finite() {
            traj.rejected += 1;
            last_rejected = true;
            h *= FAC_MIN;
            continue;
        }

        let fac11 = e.powf(EXPO1);
        if e <= 1.0 {
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = e.max(1e-4);
            let t_new = if last { t1 } else { t + hs };
            if opts.dense {
                let mut cont: [Vec<f64>; 5] = Default::default();
                cont[0] = y.clone();
                cont[1] = (0..n).map(|i| ynew[i] - y[i]).collect();
                cont[2] = (0..n).map(|i| hs * k[0][i] - cont[1][i]).collect();
                cont[3] = (0..n).map(|i| cont[1][i] - hs * k[6][i] - cont[2][i]).collect();
                cont[4] = (0..n)
                    .map(|i| hs * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>())
                    .collect();
                traj.segments.push(Segment { t0: t, h: t_new - t, cont });
            }
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            t = t_new;
            traj.t.push(t);
            traj.y.push(y.clone());
            if last {
                return Ok(traj);
            }
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(opts.h_max);
        } else {
            traj.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
        }
    }
}

/// Final state of the flow `x(t1)` without storing intermediate steps.
pub fn flow<F: VectorField + ?Sized>(
    f: &F,
    y0: &[f64],
    t_span: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Vec<f64>> {
    let traj = integrate(f, y0, t_span, &IntegratorOptions { dense: false, ..*opts })?;
    Ok(traj.final_state().to_vec())
}
