//! Periodic orbits and their stability: adaptive integration, variational
//! monodromy, closed-form multipliers for synchronized and splay orbits, and
//! Newton–Poincaré shooting.

mod closed;
mod integrate;
mod monodromy;
mod orbit;

pub use closed::{
    appendix_sync_floquet_correction, full_sync_critical_exponent, full_sync_spectrum_delta0,
    prmm_sync_closed, splay_amplitude, splay_eigs_reduced,
};
pub use integrate::{flow, integrate, IntegratorOptions, JacobianField, Trajectory, VectorField};
pub use monodromy::{eigenvalues, fundamental_matrix, monodromy, return_residual, wrap_angle, MonodromyResult};
pub use orbit::{
    continue_orbit, order_parameter, splay_orbit_delta0, splay_orbit_reduced, sync_orbit_full,
    sync_orbit_reduced, Continued, OrbitKind, OrderParams, PeriodicOrbit, SystemLabel,
    MAX_NEWTON_ITERATIONS, SHOOTING_TOL,
};
