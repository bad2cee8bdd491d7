use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AdjacencySpec, Network, Params, ShapeFn};
use crate::reduction::ReductionOrder;
use crate::stability::SystemLabel;

/// `[min, max, steps]`, expanded to `steps` evenly spaced values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidParams("grid bounds must be finite".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidParams("grid needs at least one step".into()));
        }
        if max < min {
            return Err(Error::InvalidParams(format!("grid max {max} is below min {min}")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn single(v: f64) -> Self {
        Self { min: v, max: v, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 })
            .collect()
    }
}

impl TryFrom<[f64; 3]> for Axis {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        if v[2].fract() != 0.0 || v[2] < 1.0 {
            return Err(Error::InvalidParams(format!("grid steps {} must be a positive integer", v[2])));
        }
        Axis::new(v[0], v[1], v[2] as usize)
    }
}

impl From<Axis> for [f64; 3] {
    fn from(a: Axis) -> Self {
        [a.min, a.max, a.steps as f64]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub delta: Axis,
    #[serde(rename = "K")]
    pub k: Axis,
}

impl Default for Grid {
    /// The figure axes, `δ ∈ [0, 0.3]` and `K ∈ [−0.3, 0.3]` on 61 × 61 points.
    fn default() -> Self {
        Self {
            delta: Axis { min: 0.0, max: 0.3, steps: 61 },
            k: Axis { min: -0.3, max: 0.3, steps: 61 },
        }
    }
}

/// Settings of the reduction-error study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceSpec {
    #[serde(rename = "K")]
    pub k_values: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Phases at which the full torus dynamics and the reductions are compared.
    pub phases: Option<Vec<f64>>,
    /// Time spent relaxing onto the torus before the comparison.
    pub settle_time: f64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            k_values: vec![0.02, 0.04, 0.08],
            deltas: vec![0.0, 0.1],
            phases: None,
            settle_time: 40.0,
        }
    }
}

/// Settings of a single trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateSpec {
    pub system: SystemLabel,
    pub t_end: f64,
    pub samples: usize,
    pub phi0: Option<Vec<f64>>,
    /// Initial transformed radii; `R ≡ 1` when absent.
    pub r0: Option<Vec<f64>>,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        Self {
            system: SystemLabel::Full,
            t_end: 50.0,
            samples: 501,
            phi0: None,
            r0: None,
        }
    }
}

fn default_n() -> usize {
    3
}

fn default_adjacency() -> AdjacencySpec {
    AdjacencySpec::Named("all_to_all".into())
}

fn default_systems() -> Vec<SystemLabel> {
    vec![
        SystemLabel::Full,
        SystemLabel::Reduced(ReductionOrder::first_exact()),
        SystemLabel::Reduced(ReductionOrder::finite(2, 2).expect("valid order")),
    ]
}

fn default_order() -> ReductionOrder {
    ReductionOrder::finite(2, 2).expect("valid order")
}

fn default_tol() -> f64 {
    1e-10
}

fn default_delta_step() -> f64 {
    0.02
}

/// Everything one run needs; the JSON keys of the physical parameters sit at top level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub params: Params,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "ShapeFn::sine")]
    pub g: ShapeFn,
    #[serde(default = "default_adjacency")]
    pub adjacency: AdjacencySpec,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "default_systems")]
    pub systems: Vec<SystemLabel>,
    /// Reduction order used by `reduce` and single-point runs.
    #[serde(default = "default_order")]
    pub order: ReductionOrder,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Continuation step in `δ` for orbits near the splay state.
    #[serde(default = "default_delta_step")]
    pub delta_step: f64,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    /// Figure parameters with the default grid and systems for `n` oscillators.
    pub fn figure(n: usize) -> Self {
        Self {
            params: Params::figure_defaults(),
            n,
            g: ShapeFn::sine(),
            adjacency: default_adjacency(),
            grid: Grid::default(),
            systems: default_systems(),
            order: default_order(),
            tol: default_tol(),
            delta_step: default_delta_step(),
            convergence: ConvergenceSpec::default(),
            simulate: SimulateSpec::default(),
            out: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tol = {} must be positive", self.tol)));
        }
        if !(self.delta_step > 0.0 && self.delta_step.is_finite()) {
            return Err(Error::InvalidParams("delta_step must be positive".into()));
        }
        for axis in [self.grid.delta, self.grid.k] {
            Axis::new(axis.min, axis.max, axis.steps)?;
        }
        if self.grid.delta.min <= -1.0 || self.grid.delta.max >= 1.0 {
            return Err(Error::InvalidParams("grid delta must stay inside (-1, 1)".into()));
        }
        if self.systems.is_empty() {
            return Err(Error::InvalidParams("no systems selected".into()));
        }
        self.network()?;
        Ok(())
    }

    pub fn network(&self) -> Result<Network> {
        self.adjacency.build(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values() {
        assert_eq!(Axis::single(0.2).values(), vec![0.2]);
        let v = Axis::new(-0.3, 0.3, 61).unwrap().values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[60], 0.3);
        assert!((v[30]).abs() < 1e-15);
        assert!(Axis::new(0.0, 1.0, 0).is_err());
        assert!(Axis::try_from([0.0, 1.0, 2.5]).is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"omega": 1, "m": -1, "alpha": 1.6207963267948966, "K": 0.1, "delta": 0}"#)
            .unwrap();
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.g, ShapeFn::sine());
        assert!(cfg.network().unwrap().is_all_to_all());
        assert_eq!(cfg.grid, Grid::default());
        assert_eq!(cfg.systems.len(), 3);
    }

    #[test]
    fn full_config_parses() {
        let s = r#"{
            "omega": 1, "m": -1, "alpha": 0.3, "K": 0.1, "delta": 0.1, "N": 2,
            "g": [{"n": 1, "a": 0, "b": 1}, {"n": 3, "a": 0.2, "b": 0}],
            "adjacency": [[0, 1], [0.5, 0]],
            "grid": {"delta": [0, 0.2, 3], "K": [-0.1, 0.1, 5]},
            "systems": ["full", "(1,inf)", "(2,1)"],
            "tol": 1e-9
        }"#;
        let cfg = ExperimentConfig::from_json(s).unwrap();
        assert_eq!(cfg.g.harmonics().len(), 2);
        assert_eq!(cfg.network().unwrap().weight(1, 0), 0.5);
        assert_eq!(cfg.grid.k.values().len(), 5);
        assert_eq!(cfg.systems[2].to_string(), "(2,1)");
    }

    #[test]
    fn invalid_configs_rejected() {
        for s in [
            r#"{"omega": 1, "m": 1, "alpha": 0, "K": 0, "delta": 0}"#,
            r#"{"omega": 1, "m": -1, "alpha": 0, "K": 0, "delta": 0, "adjacency": "ring"}"#,
            r#"{"omega": 1, "m": -1, "alpha": 0, "K": 0, "delta": 0, "N": 2, "adjacency": [[0,1,1],[1,0,1],[1,1,0]]}"#,
            r#"{"omega": 1, "m": -1, "alpha": 0, "K": 0, "delta": 0, "grid": {"delta": [0, 1, 0], "K": [0, 1, 2]}}"#,
            r#"{"omega": 1, "m": -1}"#,
        ] {
            assert!(ExperimentConfig::from_json(s).is_err(), "{s}");
        }
    }
}
