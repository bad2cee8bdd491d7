//! The oscillator network: single deformed Stuart–Landau oscillators, the
//! graph-coupled Cartesian system, and its transformed polar form
//! `(F, G_k, H_k)` together with the analytic Jacobian.

mod dynamics;
mod network;
mod params;

pub use dynamics::{
    cartesian_rhs, from_transformed, full_jacobian, full_rhs, single_rhs, to_transformed,
    transformed_velocity_to_cartesian, FullState, FullSystem,
};
pub use network::{AdjacencySpec, Network};
pub use params::{Harmonic, Params, ShapeFn};
