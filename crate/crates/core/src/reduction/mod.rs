//! Invariant-torus expansion and `(a, b)` phase reductions on arbitrary graphs.
//!
//! Everything symbolic is a [`TrigPoly`](crate::trigpoly::TrigPoly): the torus
//! radii `R^(1,j)` come from the resolvent solve order by order in δ, and the
//! reduction terms `P^(n,j)` are products of those with `∇_R H`.

mod oracle;
mod order;
mod system;
mod torus;

pub use oracle::{
    appendix_r11_harmonic, closed_form_r10, meanfield_20_rhs, s0, s1, s1_sine_alpha0,
    HarmonicKind, LeonPazoParams,
};
pub use order::{DeltaOrder, ReductionOrder};
pub use system::{assemble, ReducedSystem};
pub use torus::{
    cached_p_terms, compute_grad_h, compute_p, compute_r1, PTerms, TorusExpansion, MAX_DELTA_ORDER,
};
