use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::model::{Network, Params, ShapeFn};
use crate::trigpoly::{DeltaSeries, TrigPoly};

/// Highest δ order the expansion machinery supports.
pub const MAX_DELTA_ORDER: usize = 2;

/// `sin(φ_l − φ_k + α)` on the `n`-torus.
pub(crate) fn sin_diff(n: usize, k: usize, l: usize, alpha: f64) -> TrigPoly {
    TrigPoly::sin(n, &[(l, 1), (k, -1)], alpha, 1.0)
}

/// `cos(φ_l − φ_k + α)` on the `n`-torus.
pub(crate) fn cos_diff(n: usize, k: usize, l: usize, alpha: f64) -> TrigPoly {
    TrigPoly::cos(n, &[(l, 1), (k, -1)], alpha, 1.0)
}

/// δ-expansions of `H_k(1, φ)`, `G_k(1, φ)` and `∇_R H_k(1, φ)` on a graph.
struct Couplings {
    h: Vec<DeltaSeries>,
    g: Vec<DeltaSeries>,
    grad_h: Vec<Vec<DeltaSeries>>,
}

fn couplings(net: &Network, alpha: f64, g: &ShapeFn, trunc: usize) -> Couplings {
    let n = net.len();
    let (sa, ca) = alpha.sin_cos();
    let one = TrigPoly::constant(n, 1.0);
    let gk: Vec<TrigPoly> = (0..n).map(|k| g.to_trigpoly(n, k)).collect();
    let one_plus: Vec<DeltaSeries> = gk
        .iter()
        .map(|p| DeltaSeries::from_orders(n, trunc, vec![one.clone(), p.clone()]))
        .collect();
    let inv_n = 1.0 / n as f64;

    let mut h = Vec::with_capacity(n);
    let mut gs = Vec::with_capacity(n);
    let mut grad_h = Vec::with_capacity(n);
    for k in 0..n {
        let inv_u = DeltaSeries::geometric_inverse(&gk[k], trunc);
        let mut ratio_s = DeltaSeries::zero(n, trunc);
        let mut ratio_c = DeltaSeries::zero(n, trunc);
        let mut row = vec![DeltaSeries::zero(n, trunc); n];
        let deg = net.degree(k);
        for l in 0..n {
            let a = net.weight(k, l);
            if a == 0.0 {
                continue;
            }
            let ratio = &one_plus[l] * &inv_u;
            let rs = ratio.mul_poly(&sin_diff(n, k, l, alpha)).scale(a);
            let rc = ratio.mul_poly(&cos_diff(n, k, l, alpha)).scale(a);
            row[l] = &row[l] + &rs.scale(inv_n);
            row[k] = &row[k] - &rs.scale(inv_n);
            ratio_s = &ratio_s + &rs;
            ratio_c = &ratio_c + &rc;
        }
        let h_sum = &ratio_s - &DeltaSeries::constant(TrigPoly::constant(n, deg * sa), trunc);
        let c_sum = &ratio_c - &DeltaSeries::constant(TrigPoly::constant(n, deg * ca), trunc);
        // −δ g′_k / u_k · (Σ a (ratio s − sin α))
        let dg = g.deriv_trigpoly(n, k);
        let tangential = (&inv_u * &h_sum).mul_poly(&dg).shifted();
        gs.push((&c_sum - &tangential).scale(inv_n));
        h.push(h_sum.scale(inv_n));
        grad_h.push(row);
    }
    Couplings { h, g: gs, grad_h }
}

/// First-order torus radii `R^(1,j)_k`, `j = 0..=max_delta`, on the graph.
///
/// Order `j` solves `m R^(1,j) + G^(j) + m Σ_{i<j} [(1+δg_k)²]^(j−i) R^(1,i) = ω ∇R^(1,j)·𝟙`.
fn solve_r1(
    net: &Network,
    p: &Params,
    g: &ShapeFn,
    cpl: &Couplings,
    max_delta: usize,
) -> Result<Vec<Vec<TrigPoly>>> {
    let n = net.len();
    let mut out: Vec<Vec<TrigPoly>> = Vec::with_capacity(max_delta + 1);
    for j in 0..=max_delta {
        let mut level = Vec::with_capacity(n);
        for k in 0..n {
            let gk = g.to_trigpoly(n, k);
            let mut rhs = cpl.g[k].order(j).clone();
            if j >= 1 {
                rhs += &(&gk * &out[j - 1][k]).scale(2.0 * p.m);
            }
            if j >= 2 {
                rhs += &(&(&gk * &gk) * &out[j - 2][k]).scale(p.m);
            }
            level.push(TrigPoly::resolvent_solve(&rhs, p.m, p.omega)?);
        }
        out.push(level);
    }
    Ok(out)
}

/// Radii of the invariant torus at first order in `K`, `R^(1,j)_k` for `j ≤ 2`.
#[derive(Clone, Debug)]
pub struct TorusExpansion {
    params: Params,
    shape: ShapeFn,
    r1: Vec<Vec<TrigPoly>>,
    /// `G^(j)_k(1, φ)`, indexed `[j][k]`.
    forcing: Vec<Vec<TrigPoly>>,
}

fn forcing(cpl: &Couplings, max_delta: usize) -> Vec<Vec<TrigPoly>> {
    (0..=max_delta)
        .map(|j| cpl.g.iter().map(|s| s.order(j).clone()).collect())
        .collect()
}

impl TorusExpansion {
    pub fn new(net: &Network, p: &Params, g: &ShapeFn, max_delta: usize) -> Result<Self> {
        check_delta_order(max_delta)?;
        let cpl = couplings(net, p.alpha, g, max_delta);
        let r1 = solve_r1(net, p, g, &cpl, max_delta)?;
        Ok(Self {
            params: *p,
            shape: g.clone(),
            r1,
            forcing: forcing(&cpl, max_delta),
        })
    }

    pub fn max_delta(&self) -> usize {
        self.r1.len() - 1
    }

    /// `R^(n,j)`; only `n = 1` is stored, `R^(0,*) ≡ 1` is implicit.
    pub fn term(&self, n: usize, j: usize) -> Option<&[TrigPoly]> {
        (n == 1).then(|| self.r1.get(j).map(Vec::as_slice)).flatten()
    }

    /// Truncated first-order radius `1 + K Σ_j δ^j R^(1,j)_k(φ)`.
    pub fn radius(&self, k: usize, phases: &[f64], coupling: f64, delta: f64) -> f64 {
        let first: f64 = self
            .r1
            .iter()
            .rev()
            .fold(0.0, |acc, level| acc * delta + level[k].eval(phases));
        1.0 + coupling * first
    }

    /// Residual of the order-`j` PDE for oscillator `k` at `phases`.
    pub fn pde_residual(&self, k: usize, j: usize, phases: &[f64]) -> f64 {
        let p = &self.params;
        let gval = self.shape.eval(phases[k]);
        let r = &self.r1[j][k];
        let mut res = p.m * r.eval(phases) + self.forcing[j][k].eval(phases)
            - p.omega * r.directional_derivative().eval(phases);
        if j >= 1 {
            res += 2.0 * p.m * gval * self.r1[j - 1][k].eval(phases);
        }
        if j >= 2 {
            res += p.m * gval * gval * self.r1[j - 2][k].eval(phases);
        }
        res
    }
}

fn check_delta_order(j: usize) -> Result<()> {
    if j > MAX_DELTA_ORDER {
        return Err(Error::Unsupported(format!(
            "δ order {j} exceeds the supported maximum {MAX_DELTA_ORDER}"
        )));
    }
    Ok(())
}

/// `R^(1,j)_k` for every oscillator.
pub fn compute_r1(net: &Network, p: &Params, g: &ShapeFn, j: usize) -> Result<Vec<TrigPoly>> {
    let torus = TorusExpansion::new(net, p, g, j)?;
    Ok(torus.r1[j].clone())
}

/// `∇_R H_k^(−,j)(1, φ)`: row `k`, column `l`.
pub fn compute_grad_h(net: &Network, p: &Params, g: &ShapeFn, j: usize) -> Result<Vec<Vec<TrigPoly>>> {
    check_delta_order(j)?;
    let cpl = couplings(net, p.alpha, g, j);
    Ok(cpl
        .grad_h
        .iter()
        .map(|row| row.iter().map(|s| s.order(j).clone()).collect())
        .collect())
}

/// Every `P^(n,j)_k` for `n ∈ {1, 2}`, `j ≤ max_delta`, plus the torus.
#[derive(Clone, Debug)]
pub struct PTerms {
    pub(crate) p1: Vec<Vec<TrigPoly>>,
    pub(crate) p2: Vec<Vec<TrigPoly>>,
    pub(crate) torus: TorusExpansion,
}

impl PTerms {
    pub fn build(net: &Network, p: &Params, g: &ShapeFn, max_delta: usize) -> Result<Self> {
        check_delta_order(max_delta)?;
        let n = net.len();
        let cpl = couplings(net, p.alpha, g, max_delta);
        let r1 = solve_r1(net, p, g, &cpl, max_delta)?;
        let p1 = (0..=max_delta)
            .map(|j| cpl.h.iter().map(|h| h.order(j).clone()).collect())
            .collect();
        let mut p2 = Vec::with_capacity(max_delta + 1);
        for j in 0..=max_delta {
            let mut level = Vec::with_capacity(n);
            for k in 0..n {
                let mut acc = TrigPoly::zero(n);
                for i in 0..=j {
                    for l in 0..n {
                        let grad = cpl.grad_h[k][l].order(i);
                        if grad.is_empty() {
                            continue;
                        }
                        acc += &(grad * &r1[j - i][l]);
                    }
                }
                level.push(acc);
            }
            p2.push(level);
        }
        Ok(Self {
            p1,
            p2,
            torus: TorusExpansion {
                params: *p,
                shape: g.clone(),
                r1,
                forcing: forcing(&cpl, max_delta),
            },
        })
    }

    pub fn get(&self, n: usize, j: usize) -> Option<&[TrigPoly]> {
        match n {
            1 => self.p1.get(j).map(Vec::as_slice),
            2 => self.p2.get(j).map(Vec::as_slice),
            _ => None,
        }
    }

    pub fn max_delta(&self) -> usize {
        self.p1.len() - 1
    }

    pub fn torus(&self) -> &TorusExpansion {
        &self.torus
    }
}

/// `P^(n,j)_k` for every oscillator.
pub fn compute_p(net: &Network, p: &Params, g: &ShapeFn, n: usize, j: usize) -> Result<Vec<TrigPoly>> {
    if !(1..=2).contains(&n) {
        return Err(Error::Unsupported(format!("P terms of order {n} in K")));
    }
    let terms = cached_p_terms(net, p, g, j)?;
    Ok(terms.get(n, j).expect("order within cached range").to_vec())
}

/// The P terms depend on `(network, ω, m, α, g)` only, not on `K` or `δ`.
fn cache_key(net: &Network, p: &Params, g: &ShapeFn, max_delta: usize) -> u64 {
    let mut h = DefaultHasher::new();
    net.content_hash().hash(&mut h);
    for v in [p.omega, p.m, p.alpha] {
        v.to_bits().hash(&mut h);
    }
    for hm in g.harmonics() {
        hm.n.hash(&mut h);
        hm.a.to_bits().hash(&mut h);
        hm.b.to_bits().hash(&mut h);
    }
    max_delta.hash(&mut h);
    h.finish()
}

type Cache = Mutex<HashMap<u64, Arc<PTerms>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized [`PTerms::build`].
pub fn cached_p_terms(net: &Network, p: &Params, g: &ShapeFn, max_delta: usize) -> Result<Arc<PTerms>> {
    let key = cache_key(net, p, g, max_delta);
    if let Some(hit) = cache().lock().expect("cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let built = Arc::new(PTerms::build(net, p, g, max_delta)?);
    cache()
        .lock()
        .expect("cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&built));
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig() -> Params {
        Params::figure_defaults()
    }

    #[test]
    fn r10_is_s0_over_nm() {
        let net = Network::all_to_all(3);
        let p = fig();
        let r = compute_r1(&net, &p, &ShapeFn::sine(), 0).unwrap();
        let phases = [0.3, -1.2, 2.5];
        for k in 0..3 {
            let expect: f64 = (0..3)
                .map(|l| -(phases[l] - phases[k] + p.alpha).cos() + p.alpha.cos())
                .sum::<f64>()
                / (3.0 * p.m);
            assert!((r[k].eval(&phases) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn no_deformation_no_correction() {
        let net = Network::all_to_all(3);
        for j in 1..=2 {
            assert!(compute_r1(&net, &fig(), &ShapeFn::zero(), j).unwrap().iter().all(TrigPoly::is_empty));
            let grad = compute_grad_h(&net, &fig(), &ShapeFn::zero(), j).unwrap();
            assert!(grad.iter().flatten().all(TrigPoly::is_empty));
        }
    }

    #[test]
    fn p1_examples() {
        let net = Network::all_to_all(4);
        let p = fig();
        let p10 = compute_p(&net, &p, &ShapeFn::sine(), 1, 0).unwrap();
        let phases = [0.1, 0.7, -2.0, 1.4];
        let expect: f64 = (0..4)
            .map(|l| (phases[l] - phases[1] + p.alpha).sin() - p.alpha.sin())
            .sum::<f64>()
            / 4.0;
        assert!((p10[1].eval(&phases) - expect).abs() < 1e-14);

        let p11 = compute_p(&net, &p, &ShapeFn::sine(), 1, 1).unwrap();
        assert!(p11.iter().all(|q| q.eval(&[0.9; 4]).abs() < 1e-14));
    }

    #[test]
    fn singular_m_rejected() {
        let p = Params { m: 0.0, ..fig() };
        assert!(matches!(
            compute_r1(&Network::all_to_all(2), &p, &ShapeFn::sine(), 0),
            Err(Error::SingularOperator { .. })
        ));
    }

    #[test]
    fn cache_returns_same_terms() {
        let net = Network::undirected(3, &[(0, 1), (1, 2)]);
        let a = cached_p_terms(&net, &fig(), &ShapeFn::sine(), 1).unwrap();
        let b = cached_p_terms(&net, &fig().with_coupling(0.3).with_delta(0.1), &ShapeFn::sine(), 1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
