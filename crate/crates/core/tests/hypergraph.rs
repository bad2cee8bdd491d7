use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasered::hypergraph::{build_tensors, decompose, eval_second_order_via_hypergraph, InteractionDecomposition};
use phasered::model::{Network, Params, ShapeFn};
use phasered::reduction::compute_p;

fn digraph() -> impl Strategy<Value = Network> {
    (2usize..=6).prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![Just(0.0), 0.1f64..2.0], n * n).prop_map(move |w| {
            let rows: Vec<Vec<f64>> = w.chunks(n).map(|c| c.to_vec()).collect();
            Network::from_rows(&rows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hhat_is_head_symmetric_on_every_graph(net in digraph()) {
        let (hhat, _) = build_tensors(&net);
        prop_assert!(hhat.is_head_symmetric());
    }

    #[test]
    fn classes_resum_to_second_order_term(net in digraph(), seed in any::<u64>(), alpha in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Params::new(1.0, -1.2, alpha, 0.1, 0.0).unwrap();
        let p20 = compute_p(&net, &p, &ShapeFn::sine(), 2, 0).unwrap();
        let dec = decompose(&net);
        for _ in 0..20 {
            let phi: Vec<f64> = (0..net.len()).map(|_| rng.gen_range(0.0..TAU)).collect();
            let via_classes = dec.eval(&phi, &p).unwrap();
            let via_tensors = eval_second_order_via_hypergraph(&phi, &net, &p).unwrap();
            for k in 0..net.len() {
                let exact = p20[k].eval(&phi);
                prop_assert!((via_classes[k] - exact).abs() < 1e-12);
                prop_assert!((via_tensors[k] - exact).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn hbar_symmetry_fails_on_a_directed_witness() {
    // 0 → 1 → 2 with no way back.
    let net = Network::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]]).unwrap();
    let (hhat, hbar) = build_tensors(&net);
    assert!(hhat.is_head_symmetric());
    assert!(!hbar.is_head_symmetric());
}

#[test]
fn open_triangles_make_the_hypergraph_directed() {
    let graphs = [
        Network::undirected(4, &[(0, 1), (1, 2), (2, 3)]),
        Network::undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]),
        Network::undirected(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]),
        Network::undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
    ];
    for net in &graphs {
        let (hhat, _) = build_tensors(net);
        let (k, l, i) = hhat.directedness_witness().expect("witness");
        assert_ne!(hhat.get(k, l, i), hhat.get(l, k, i));
    }
    let (hhat, _) = build_tensors(&Network::all_to_all(5));
    assert_eq!(hhat.directedness_witness(), None);
}

#[test]
fn export_round_trips_through_a_file() {
    let net = Network::undirected(4, &[(0, 1), (1, 2), (2, 3)]);
    let p = Params::figure_defaults().with_coupling(0.1);
    let dec = decompose(&net).with_params(p);
    let path = std::env::temp_dir().join(format!("phasered-hyper-{}.json", std::process::id()));
    dec.export_json(&path).unwrap();
    let back = InteractionDecomposition::import_json(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(back, dec);
    let phi = [0.1, 2.0, 3.3, 5.0];
    assert_eq!(back.eval(&phi, &p).unwrap(), dec.eval(&phi, &p).unwrap());
}
