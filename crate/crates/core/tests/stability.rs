use std::f64::consts::TAU;

use phasered::experiment::AnySystem;
use phasered::model::{FullSystem, Network, Params, ShapeFn};
use phasered::reduction::assemble;
use phasered::stability::{
    continue_orbit, integrate, order_parameter, splay_orbit_delta0, sync_orbit_full, IntegratorOptions, SystemLabel,
};

fn fig(k: f64, delta: f64) -> Params {
    Params::figure_defaults().with_coupling(k).with_delta(delta)
}

/// Largest deviation of consecutive phase gaps from `2π/3` along one period.
fn splay_drift(p: &Params) -> f64 {
    let net = Network::all_to_all(3);
    let sys = FullSystem::new(*p, ShapeFn::sine(), net).unwrap();
    let seed = splay_orbit_delta0(&p.with_delta(0.0), 3).unwrap();
    let traj = integrate(&sys, &seed.initial_state, (0.0, seed.period), &IntegratorOptions::with_tol(1e-12).dense())
        .unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=50 {
        let x = traj.sample(seed.period * i as f64 / 50.0).unwrap();
        for k in 0..3 {
            let gap = (x[3 + (k + 1) % 3] - x[3 + k]).rem_euclid(TAU);
            worst = worst.max((gap - TAU / 3.0).abs());
        }
    }
    worst
}

#[test]
fn splay_set_is_invariant_only_without_deformation() {
    assert!(splay_drift(&fig(-0.2, 0.0)) < 1e-9);
    assert!(splay_drift(&fig(-0.2, 0.2)) > 1e-4);
}

#[test]
fn converged_orbits_carry_a_unit_multiplier() {
    let net = Network::all_to_all(3);
    let g = ShapeFn::sine();
    let opts = IntegratorOptions::with_tol(1e-11);
    for label in ["full", "(2,2)", "(1,inf)"] {
        let system: SystemLabel = label.parse().unwrap();
        for k in [-0.2, 0.15] {
            let mut orbit = match system {
                SystemLabel::Full => splay_orbit_delta0(&fig(k, 0.0), 3).unwrap(),
                SystemLabel::Reduced(o) => phasered::stability::splay_orbit_reduced(&fig(k, 0.0), 3, o).unwrap(),
            };
            for step in 1..=5 {
                let sys = AnySystem::build(system, &net, &fig(k, 0.03 * step as f64), &g).unwrap();
                let c = continue_orbit(&sys, &orbit, &opts).unwrap();
                let m = c.monodromy().unwrap();
                assert!((m.trivial() - 1.0).norm() < 1e-6, "{label} K={k}: {}", m.trivial());
                assert!(m.alignment > 0.99);
                orbit = c.orbit;
            }
        }
    }
}

#[test]
fn sync_orbit_is_exact_for_deformed_oscillators() {
    let net = Network::all_to_all(4);
    let p = fig(0.2, 0.3);
    let sys = FullSystem::new(p, ShapeFn::sine(), net.clone()).unwrap();
    let orbit = sync_orbit_full(&p, 4);
    let c = continue_orbit(&sys, &orbit, &IntegratorOptions::with_tol(1e-11)).unwrap();
    assert_eq!(c.iterations, 0);
    let red = assemble(&net, &p, &ShapeFn::sine(), "(2,2)".parse().unwrap()).unwrap();
    let v = red.velocity(&[0.7; 4]).unwrap();
    assert!(v.iter().all(|x| (x - p.omega).abs() < 1e-14));
}

#[test]
fn order_parameter_separates_sync_and_splay() {
    assert!((order_parameter(&[0.3; 4]).r - 1.0).abs() < 1e-15);
    let splay: Vec<f64> = (0..5).map(|k| TAU * k as f64 / 5.0).collect();
    assert!(order_parameter(&splay).r < 1e-15);
}
