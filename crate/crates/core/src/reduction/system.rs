use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::order::ReductionOrder;
use super::torus::{cached_p_terms, PTerms};
use crate::error::{Error, Result};
use crate::model::{Network, Params, ShapeFn};
use crate::stability::{JacobianField, VectorField};
use crate::trigpoly::TrigPoly;

/// Real cosine form `c₀ + Σ A cos(n·φ + θ)` of a [`TrigPoly`], for fast repeated evaluation.
#[derive(Clone, Debug, Default)]
pub(crate) struct CompiledPoly {
    constant: f64,
    terms: Vec<(Vec<(usize, f64)>, f64, f64)>,
}

impl CompiledPoly {
    pub(crate) fn new(p: &TrigPoly) -> Self {
        let mut out = Self::default();
        for (freq, c) in p.terms() {
            if freq.is_zero() {
                out.constant += c.re;
            } else if freq.is_positive() {
                let modes = freq.entries().iter().map(|&(i, f)| (i as usize, f as f64)).collect();
                out.terms.push((modes, 2.0 * c.norm(), c.arg()));
            }
        }
        out
    }

    #[inline]
    pub(crate) fn eval(&self, phases: &[f64]) -> f64 {
        let mut acc = self.constant;
        for (modes, amp, shift) in &self.terms {
            let arg: f64 = modes.iter().map(|&(i, f)| f * phases[i]).sum();
            acc += amp * (arg + shift).cos();
        }
        acc
    }
}

/// An assembled phase reduction `φ̇_k = ω + Σ_{n≤a, j≤b} Kⁿ δʲ P^(n,j)_k(φ)`.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    order: ReductionOrder,
    params: Params,
    shape: ShapeFn,
    network: Network,
    terms: Option<Arc<PTerms>>,
    /// `(n, j)` pairs included in the polynomial part.
    included: Vec<(usize, usize)>,
    /// Whether `K H_k(1, φ)` is evaluated in closed form.
    exact_first: bool,
    rhs: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

/// Builds the reduced system of the given order.
pub fn assemble(net: &Network, p: &Params, g: &ShapeFn, order: ReductionOrder) -> Result<ReducedSystem> {
    let a = order.k_order() as usize;
    let included: Vec<(usize, usize)> = if order.is_exact_in_delta() {
        Vec::new()
    } else {
        let b = order.max_finite_delta();
        (1..=a).flat_map(|n| (0..=b).map(move |j| (n, j))).collect()
    };
    ReducedSystem::build(net, p, g, order, included, order.is_exact_in_delta())
}

impl ReducedSystem {
    fn build(
        net: &Network,
        p: &Params,
        g: &ShapeFn,
        order: ReductionOrder,
        included: Vec<(usize, usize)>,
        exact_first: bool,
    ) -> Result<Self> {
        p.validate()?;
        if exact_first && g.min_deformation(p.delta) <= 0.0 {
            return Err(Error::Domain("1 + δ g(φ) must stay positive".into()));
        }
        let max_delta = included.iter().map(|&(_, j)| j).max();
        let terms = match max_delta {
            Some(j) => Some(cached_p_terms(net, p, g, j)?),
            None => None,
        };
        let mut sys = Self {
            order,
            params: *p,
            shape: g.clone(),
            network: net.clone(),
            terms,
            included,
            exact_first,
            rhs: Vec::new(),
            jac: Vec::new(),
        };
        sys.compile();
        Ok(sys)
    }

    /// `ω + K H_k(1, φ) + K² Σ_{j≤b2} δʲ P^(2,j)_k`: exact first order with a truncated second order.
    pub fn with_exact_first_order(net: &Network, p: &Params, g: &ShapeFn, b2: u8) -> Result<Self> {
        let order = ReductionOrder::finite(2, b2)?;
        let included = (0..=b2 as usize).map(|j| (2, j)).collect();
        Self::build(net, p, g, order, included, true)
    }

    fn compile(&mut self) {
        let n = self.network.len();
        let mut total: Vec<TrigPoly> = vec![TrigPoly::zero(n); n];
        if let Some(terms) = &self.terms {
            for &(order_k, j) in &self.included {
                let w = self.params.k.powi(order_k as i32) * self.params.delta.powi(j as i32);
                if w == 0.0 {
                    continue;
                }
                for (acc, p) in total.iter_mut().zip(terms.get(order_k, j).expect("term computed")) {
                    *acc += &p.scale(w);
                }
            }
        }
        self.rhs = total.iter().map(CompiledPoly::new).collect();
        self.jac = total
            .iter()
            .map(|p| (0..n).map(|j| CompiledPoly::new(&p.partial(j))).collect())
            .collect();
    }

    pub fn order(&self) -> ReductionOrder {
        self.order
    }

    pub fn omega(&self) -> f64 {
        self.params.omega
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn shape(&self) -> &ShapeFn {
        &self.shape
    }

    pub fn is_exact_first_order(&self) -> bool {
        self.exact_first
    }

    pub fn n(&self) -> usize {
        self.network.len()
    }

    /// `P^(n,j)`, if it is part of this reduction.
    pub fn p_term(&self, n: usize, j: usize) -> Option<&[TrigPoly]> {
        if !self.included.contains(&(n, j)) {
            return None;
        }
        self.terms.as_ref().and_then(|t| t.get(n, j))
    }

    /// All polynomial terms keyed by `(n, j)`.
    pub fn p_terms(&self) -> BTreeMap<(usize, usize), &[TrigPoly]> {
        self.included
            .iter()
            .filter_map(|&(n, j)| self.p_term(n, j).map(|t| ((n, j), t)))
            .collect()
    }

    /// Phase velocities at `phi`.
    pub fn velocity(&self, phi: &[f64]) -> Result<Vec<f64>> {
        if phi.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: phi.len(),
            });
        }
        let mut out = vec![0.0; self.n()];
        self.rhs(phi, &mut out);
        Ok(out)
    }

    fn exact_h(&self, phi: &[f64], out: &mut [f64]) {
        let p = &self.params;
        let n = self.n();
        let u: Vec<f64> = phi.iter().map(|&x| 1.0 + p.delta * self.shape.eval(x)).collect();
        let sa = p.alpha.sin();
        let kn = p.k / n as f64;
        for k in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                let a = self.network.weight(k, l);
                if a != 0.0 {
                    acc += a * (u[l] / u[k] * (phi[l] - phi[k] + p.alpha).sin() - sa);
                }
            }
            out[k] += kn * acc;
        }
    }

    fn exact_h_jacobian(&self, phi: &[f64], jac: &mut DMatrix<f64>) {
        let p = &self.params;
        let n = self.n();
        let u: Vec<f64> = phi.iter().map(|&x| 1.0 + p.delta * self.shape.eval(x)).collect();
        let up: Vec<f64> = phi.iter().map(|&x| p.delta * self.shape.deriv(x)).collect();
        let kn = p.k / n as f64;
        for k in 0..n {
            for l in 0..n {
                let a = self.network.weight(k, l);
                if a == 0.0 {
                    continue;
                }
                let (s, c) = (phi[l] - phi[k] + p.alpha).sin_cos();
                let w = kn * a;
                jac[(k, l)] += w * (up[l] * s + u[l] * c) / u[k];
                jac[(k, k)] += w * u[l] * (-c / u[k] - s * up[k] / (u[k] * u[k]));
            }
        }
    }

    /// Canonical JSON of the P terms (modes sorted by total degree, then indices).
    pub fn to_canonical_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Entry<'a> {
            n: usize,
            j: usize,
            oscillator: usize,
            poly: &'a TrigPoly,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            order: String,
            omega: f64,
            params: &'a Params,
            g: &'a ShapeFn,
            exact_first_order: bool,
            terms: Vec<Entry<'a>>,
        }
        let mut terms = Vec::new();
        for ((n, j), polys) in self.p_terms() {
            for (k, poly) in polys.iter().enumerate() {
                terms.push(Entry { n, j, oscillator: k, poly });
            }
        }
        let doc = Doc {
            order: self.order.to_string(),
            omega: self.params.omega,
            params: &self.params,
            g: &self.shape,
            exact_first_order: self.exact_first,
            terms,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

impl VectorField for ReducedSystem {
    fn dim(&self) -> usize {
        self.n()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        for (k, poly) in self.rhs.iter().enumerate() {
            dx[k] = self.params.omega + poly.eval(x);
        }
        if self.exact_first {
            self.exact_h(x, dx);
        }
    }
}

impl JacobianField for ReducedSystem {
    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        for (k, row) in self.jac.iter().enumerate() {
            for (j, poly) in row.iter().enumerate() {
                jac[(k, j)] = poly.eval(x);
            }
        }
        if self.exact_first {
            self.exact_h_jacobian(x, jac);
        }
    }
}
