//! Parameter sweeps and studies behind the figures, written as deterministic CSV.

mod config;
mod convergence;
mod sweep;

pub use config::{Axis, ConvergenceSpec, ExperimentConfig, Grid, SimulateSpec};
pub use convergence::{
    on_torus_state, run_convergence, write_convergence_csv, ConvergenceReport, ConvergenceRow, SlopeFit,
};
pub use sweep::{
    detect_neimark_sacker, floquet_splay_point, floquet_sync_point, run_simulation, run_sweep_splay,
    run_sweep_splay_with, run_sweep_sync, run_sweep_sync_with, write_simulation_csv, write_sweep_csv,
    Crossing, SweepRow,
};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::model::{FullSystem, Network, Params, ShapeFn};
use crate::reduction::{assemble, ReducedSystem};
use crate::stability::{JacobianField, SystemLabel, VectorField};

/// How grid points are dispatched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon worker pool; identical to `Sequential` when built without the `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

/// Maps `f` over `items`, keeping input order.
pub fn map_points<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Sizes the global worker pool. Has no effect without the `parallel` feature.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::Error::InvalidParams(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

/// The full network or one of its reductions behind one vector-field interface.
#[derive(Clone, Debug)]
pub enum AnySystem {
    Full(FullSystem),
    Reduced(ReducedSystem),
}

impl AnySystem {
    pub fn build(label: SystemLabel, net: &Network, p: &Params, g: &ShapeFn) -> Result<Self> {
        Ok(match label {
            SystemLabel::Full => AnySystem::Full(FullSystem::new(*p, g.clone(), net.clone())?),
            SystemLabel::Reduced(order) => AnySystem::Reduced(assemble(net, p, g, order)?),
        })
    }
}

impl VectorField for AnySystem {
    fn dim(&self) -> usize {
        match self {
            AnySystem::Full(s) => s.dim(),
            AnySystem::Reduced(s) => s.dim(),
        }
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        match self {
            AnySystem::Full(s) => s.rhs(x, dx),
            AnySystem::Reduced(s) => s.rhs(x, dx),
        }
    }

    fn phase_offset(&self) -> usize {
        match self {
            AnySystem::Full(s) => s.phase_offset(),
            AnySystem::Reduced(s) => s.phase_offset(),
        }
    }
}

impl JacobianField for AnySystem {
    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        match self {
            AnySystem::Full(s) => s.jacobian(x, jac),
            AnySystem::Reduced(s) => s.jacobian(x, jac),
        }
    }
}
