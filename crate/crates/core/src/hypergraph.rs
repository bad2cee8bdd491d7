//! Higher-order interaction structure of the `(2,0)` reduction on a graph.
//!
//! The second-order term splits into six classes: pairwise degree corrections
//! along the edges of the graph (`a1`, `a2`), pairwise terms along length-two
//! paths (`b2`), and triplet terms on the directed hypergraphs with 3-tensors
//! `ĥ_kli = a_kl a_ki` (`b1`, `c1`) and `h̄_kli = a_kl a_li` (`c2`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Network, Params};

/// Sparse 3-tensor indexed `(k, l, i)`, with `k` the tail of the hyperedge.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Hyper3Tensor {
    n: usize,
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl Hyper3Tensor {
    pub fn new(n: usize) -> Self {
        Self { n, entries: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, l: usize, i: usize) -> f64 {
        self.entries.get(&(k, l, i)).copied().unwrap_or(0.0)
    }

    fn insert(&mut self, k: usize, l: usize, i: usize, w: f64) {
        if w != 0.0 {
            self.entries.insert((k, l, i), w);
        }
    }

    /// Number of nonzero entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&idx, &w)| (idx, w))
    }

    /// `t_kli = t_kil` for all triples.
    pub fn is_head_symmetric(&self) -> bool {
        self.iter().all(|((k, l, i), w)| self.get(k, i, l) == w)
    }

    /// A triple of distinct nodes whose weight changes when the tail is swapped with the first head.
    ///
    /// Triples with a repeated node are skipped: without self-loops they break the exchange symmetry
    /// on every graph, the complete graph included.
    pub fn directedness_witness(&self) -> Option<(usize, usize, usize)> {
        for k in 0..self.n {
            for l in 0..self.n {
                for i in 0..self.n {
                    if k == l || l == i || k == i {
                        continue;
                    }
                    if self.get(k, l, i) != self.get(l, k, i) {
                        return Some((k, l, i));
                    }
                }
            }
        }
        None
    }
}

/// `(ĥ, h̄)` with `ĥ_kli = a_kl a_ki` and `h̄_kli = a_kl a_li`.
pub fn build_tensors(net: &Network) -> (Hyper3Tensor, Hyper3Tensor) {
    let n = net.len();
    let mut hhat = Hyper3Tensor::new(n);
    let mut hbar = Hyper3Tensor::new(n);
    for (k, l, a_kl) in net.edges() {
        for i in 0..n {
            hhat.insert(k, l, i, a_kl * net.weight(k, i));
            hbar.insert(k, l, i, a_kl * net.weight(l, i));
        }
    }
    (hhat, hbar)
}

/// Weighted count of length-two paths, `c_ki = Σ_l a_kl a_li`.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualEdgeGraph {
    pub c: DMatrix<f64>,
}

impl VirtualEdgeGraph {
    pub fn new(net: &Network) -> Self {
        let a = net.adjacency();
        Self { c: a * a }
    }

    /// Nonzero entries `(k, i, c_ki)` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.c.nrows();
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                let w = self.c[(k, i)];
                if w != 0.0 {
                    out.push((k, i, w));
                }
            }
        }
        out
    }
}

/// Trigonometric template of a coupling function, parameterized by `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CouplingTerm {
    /// `sin(φ_l − φ_k + α)`
    LMinusKPlusAlpha,
    /// `sin(φ_i − φ_l)`
    IMinusL,
    /// `sin(φ_i − 2φ_k + φ_l + 2α)`
    IMinus2KPlusLPlus2Alpha,
    /// `sin(φ_i − φ_k + 2α)`
    IMinusKPlus2Alpha,
    /// `sin(φ_i + φ_k − 2φ_l)`
    IPlusKMinus2L,
}

impl CouplingTerm {
    const ALL: [CouplingTerm; 5] = [
        CouplingTerm::LMinusKPlusAlpha,
        CouplingTerm::IMinusL,
        CouplingTerm::IMinus2KPlusLPlus2Alpha,
        CouplingTerm::IMinusKPlus2Alpha,
        CouplingTerm::IPlusKMinus2L,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CouplingTerm::LMinusKPlusAlpha => "sin(phi_l-phi_k+alpha)",
            CouplingTerm::IMinusL => "sin(phi_i-phi_l)",
            CouplingTerm::IMinus2KPlusLPlus2Alpha => "sin(phi_i-2phi_k+phi_l+2alpha)",
            CouplingTerm::IMinusKPlus2Alpha => "sin(phi_i-phi_k+2alpha)",
            CouplingTerm::IPlusKMinus2L => "sin(phi_i+phi_k-2phi_l)",
        }
    }

    /// Value at `(φ_k, φ_l, φ_i)`; pairwise terms ignore the unused slot.
    pub fn eval(self, pk: f64, pl: f64, pi: f64, alpha: f64) -> f64 {
        match self {
            CouplingTerm::LMinusKPlusAlpha => (pl - pk + alpha).sin(),
            CouplingTerm::IMinusL => (pi - pl).sin(),
            CouplingTerm::IMinus2KPlusLPlus2Alpha => (pi - 2.0 * pk + pl + 2.0 * alpha).sin(),
            CouplingTerm::IMinusKPlus2Alpha => (pi - pk + 2.0 * alpha).sin(),
            CouplingTerm::IPlusKMinus2L => (pi + pk - 2.0 * pl).sin(),
        }
    }
}

impl fmt::Display for CouplingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CouplingTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| Error::Serde(format!("unknown coupling term '{s}'")))
    }
}

impl Serialize for CouplingTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for CouplingTerm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Class prefactor `coeff · (cos α if cos_alpha) / (N² m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prefactor {
    pub coeff: f64,
    pub cos_alpha: bool,
}

impl Prefactor {
    pub fn value(&self, n: usize, p: &Params) -> f64 {
        let c = if self.cos_alpha { p.alpha.cos() } else { 1.0 };
        self.coeff * c / ((n * n) as f64 * p.m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub k: usize,
    pub l: usize,
    pub w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub k: usize,
    pub l: usize,
    pub i: usize,
    pub w: f64,
}

/// Where a class lives. Pairwise entries act as `w · term(φ_k, φ_l)` on oscillator `k`;
/// for the virtual graph the second index plays the role of `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum Structure {
    Graph { edges: Vec<Edge> },
    VirtualGraph { edges: Vec<Edge> },
    Hypertensor { tensor: TensorName, triples: Vec<Triple> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorName {
    Hhat,
    Hbar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionClass {
    #[serde(flatten)]
    pub structure: Structure,
    pub term: CouplingTerm,
    pub prefactor: Prefactor,
}

impl InteractionClass {
    /// Contribution of this class to `P^(2,0)_k` for every `k`, added into `out`.
    fn accumulate(&self, phi: &[f64], p: &Params, out: &mut [f64]) {
        let n = phi.len();
        let pref = self.prefactor.value(n, p);
        match &self.structure {
            Structure::Graph { edges } => {
                for e in edges {
                    out[e.k] += pref * e.w * self.term.eval(phi[e.k], phi[e.l], 0.0, p.alpha);
                }
            }
            Structure::VirtualGraph { edges } => {
                for e in edges {
                    out[e.k] += pref * e.w * self.term.eval(phi[e.k], 0.0, phi[e.l], p.alpha);
                }
            }
            Structure::Hypertensor { triples, .. } => {
                for t in triples {
                    out[t.k] += pref * t.w * self.term.eval(phi[t.k], phi[t.l], phi[t.i], p.alpha);
                }
            }
        }
    }

    /// Number of stored edges or triples.
    pub fn len(&self) -> usize {
        match &self.structure {
            Structure::Graph { edges } | Structure::VirtualGraph { edges } => edges.len(),
            Structure::Hypertensor { triples, .. } => triples.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The six interaction classes plus the merged pairwise correction `a = a1 + a2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionDecomposition {
    pub n: usize,
    pub classes: BTreeMap<String, InteractionClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
}

pub const CLASS_LABELS: [&str; 6] = ["a1", "a2", "b1", "b2", "c1", "c2"];

fn graph_class(edges: Vec<Edge>) -> InteractionClass {
    InteractionClass {
        structure: Structure::Graph { edges },
        term: CouplingTerm::LMinusKPlusAlpha,
        prefactor: Prefactor { coeff: -1.0, cos_alpha: true },
    }
}

fn tensor_class(name: TensorName, t: &Hyper3Tensor, term: CouplingTerm, coeff: f64) -> InteractionClass {
    InteractionClass {
        structure: Structure::Hypertensor {
            tensor: name,
            triples: t.iter().map(|((k, l, i), w)| Triple { k, l, i, w }).collect(),
        },
        term,
        prefactor: Prefactor { coeff, cos_alpha: false },
    }
}

/// Splits the second-order interactions of `net` into their six classes.
pub fn decompose(net: &Network) -> InteractionDecomposition {
    let n = net.len();
    let deg: Vec<f64> = (0..n).map(|k| net.degree(k)).collect();
    let (hhat, hbar) = build_tensors(net);
    let virt = VirtualEdgeGraph::new(net);

    let pairwise = |w: &dyn Fn(usize, usize, f64) -> f64| -> Vec<Edge> {
        net.edges()
            .map(|(k, l, a)| Edge { k, l, w: w(k, l, a) })
            .filter(|e| e.w != 0.0)
            .collect()
    };
    let mut classes = BTreeMap::new();
    classes.insert("a1".into(), graph_class(pairwise(&|k, _, a| a * deg[k])));
    classes.insert("a2".into(), graph_class(pairwise(&|_, l, a| -a * deg[l])));
    classes.insert("a".into(), graph_class(pairwise(&|k, l, a| a * (deg[k] - deg[l]))));
    classes.insert(
        "b1".into(),
        tensor_class(TensorName::Hhat, &hhat, CouplingTerm::IMinusL, -0.5),
    );
    classes.insert(
        "c1".into(),
        tensor_class(TensorName::Hhat, &hhat, CouplingTerm::IMinus2KPlusLPlus2Alpha, 0.5),
    );
    classes.insert(
        "b2".into(),
        InteractionClass {
            structure: Structure::VirtualGraph {
                edges: virt.edges().into_iter().map(|(k, l, w)| Edge { k, l, w }).collect(),
            },
            term: CouplingTerm::IMinusKPlus2Alpha,
            prefactor: Prefactor { coeff: -0.5, cos_alpha: false },
        },
    );
    classes.insert(
        "c2".into(),
        tensor_class(TensorName::Hbar, &hbar, CouplingTerm::IPlusKMinus2L, 0.5),
    );
    InteractionDecomposition { n, classes, params: None }
}

impl InteractionDecomposition {
    pub fn with_params(mut self, p: Params) -> Self {
        self.params = Some(p);
        self
    }

    pub fn class(&self, label: &str) -> Option<&InteractionClass> {
        self.classes.get(label)
    }

    /// Value of one class at `phi`, per oscillator.
    pub fn eval_class(&self, label: &str, phi: &[f64], p: &Params) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        let class = self
            .class(label)
            .ok_or_else(|| Error::InvalidParams(format!("no interaction class '{label}'")))?;
        let mut out = vec![0.0; self.n];
        class.accumulate(phi, p, &mut out);
        Ok(out)
    }

    /// Sum of the six classes `a1, a2, b1, b2, c1, c2` at `phi`.
    pub fn eval(&self, phi: &[f64], p: &Params) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        let mut out = vec![0.0; self.n];
        for label in CLASS_LABELS {
            if let Some(c) = self.class(label) {
                c.accumulate(phi, p, &mut out);
            }
        }
        Ok(out)
    }

    fn check_len(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: phi.len() });
        }
        Ok(())
    }

    /// Virtual edges `(k, i)` of class `b2` that are not edges of `net`.
    pub fn virtual_edges_outside(&self, net: &Network) -> Vec<(usize, usize)> {
        match self.class("b2").map(|c| &c.structure) {
            Some(Structure::VirtualGraph { edges }) => edges
                .iter()
                .filter(|e| net.weight(e.k, e.l) == 0.0)
                .map(|e| (e.k, e.l))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        for label in CLASS_LABELS {
            if !d.classes.contains_key(label) {
                return Err(Error::Serde(format!("missing interaction class '{label}'")));
            }
        }
        Ok(d)
    }

    pub fn export_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn import_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `ĝ(φ_k, φ_l, φ_i) = 2 cos α sin(φ_l − φ_k + α) + sin(φ_i − φ_l) − sin(φ_i − 2φ_k + φ_l + 2α)`.
pub fn g_hat(pk: f64, pl: f64, pi: f64, alpha: f64) -> f64 {
    2.0 * alpha.cos() * (pl - pk + alpha).sin() + (pi - pl).sin() - (pi - 2.0 * pk + pl + 2.0 * alpha).sin()
}

/// `ḡ(φ_k, φ_l, φ_i) = 2 cos α sin(φ_l − φ_k + α) − sin(φ_i − φ_k + 2α) + sin(φ_i + φ_k − 2φ_l)`.
pub fn g_bar(pk: f64, pl: f64, pi: f64, alpha: f64) -> f64 {
    2.0 * alpha.cos() * (pl - pk + alpha).sin() - (pi - pk + 2.0 * alpha).sin() + (pi + pk - 2.0 * pl).sin()
}

/// `P^(2,0)_k = (1/(2N²m)) Σ_{l,i} (h̄_kli ḡ − ĥ_kli ĝ)`.
pub fn eval_second_order_via_hypergraph(phi: &[f64], net: &Network, p: &Params) -> Result<Vec<f64>> {
    let n = net.len();
    if phi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: phi.len() });
    }
    let (hhat, hbar) = build_tensors(net);
    let pref = 1.0 / (2.0 * (n * n) as f64 * p.m);
    let mut out = vec![0.0; n];
    for ((k, l, i), w) in hhat.iter() {
        out[k] -= pref * w * g_hat(phi[k], phi[l], phi[i], p.alpha);
    }
    for ((k, l, i), w) in hbar.iter() {
        out[k] += pref * w * g_bar(phi[k], phi[l], phi[i], p.alpha);
    }
    Ok(out)
}
