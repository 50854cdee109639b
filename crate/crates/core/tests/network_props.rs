use hetring::dynamics::{simulate, InitialState, Representation, SimParams};
use hetring::graph::make_ring;
use hetring::network::{build_network, enumerate_cycles};
use proptest::prelude::*;

fn ring_shape() -> impl Strategy<Value = (usize, usize)> {
    (3usize..=10).prop_flat_map(|n| (Just(n), 1usize..=((n - 1) / 2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn connections_commute_with_rotation((n, m) in ring_shape(), gamma in 1.5f64..8.0) {
        let g = make_ring(n, m).unwrap();
        let net = build_network(&g, 2.0, gamma).unwrap();
        for c in &net.connections {
            let src = c.source.rotated(n, 1);
            let tgt = c.target.rotated(n, 1);
            let from = net.index_of(&src).unwrap();
            let to = net.index_of(&tgt).unwrap();
            let rotated = net.connection_between(from, to);
            prop_assert!(rotated.is_some());
            prop_assert_eq!(net.connections[rotated.unwrap()].entering, (c.entering + 1) % n);
        }
    }

    #[test]
    fn targets_are_fixed_points_gaining_the_entering_node((n, m) in ring_shape()) {
        let g = make_ring(n, m).unwrap();
        let net = build_network(&g, 2.0, 3.04).unwrap();
        for c in &net.connections {
            prop_assert!(g.is_independent(&c.target));
            prop_assert!(c.target.contains(c.entering));
            prop_assert!(!c.source.contains(c.entering));
            for &d in c.displaced.members() {
                prop_assert!(c.source.contains(d) && g.inhibits(c.entering, d));
            }
        }
        let per_fp: usize = (0..net.fixed_points.len()).map(|i| net.outgoing(i).len()).sum();
        prop_assert_eq!(per_fp, net.connections.len());
    }

    #[test]
    fn cycles_are_closed_walks((n, m) in ring_shape()) {
        let net = build_network(&make_ring(n, m).unwrap(), 2.0, 3.04).unwrap();
        for cyc in enumerate_cycles(&net, 6).unwrap() {
            let k = cyc.len();
            for i in 0..k {
                let c = cyc.connections[i];
                prop_assert_eq!(net.source_index(c), cyc.fixed_points[i]);
                prop_assert_eq!(net.target_index(c), cyc.fixed_points[(i + 1) % k]);
            }
        }
    }
}

/// Start at the source with the entering node slightly raised and every other
/// inactive node far smaller; the epoch after the first crossing must shadow
/// the predicted target.
#[test]
fn connections_are_realized_by_simulation() {
    for (n, m) in [(5, 1), (7, 2)] {
        let g = make_ring(n, m).unwrap();
        let net = build_network(&g, 2.0, 3.04).unwrap();
        let ln_xhat = 0.5f64.ln();
        for c in &net.connections {
            let y: Vec<f64> = (0..n)
                .map(|k| {
                    if c.source.contains(k) {
                        ln_xhat
                    } else if k == c.entering {
                        1e-4f64.ln()
                    } else {
                        -70.0
                    }
                })
                .collect();
            let mut p = SimParams::new(g.clone(), 2.0, 3.04, 100_000, InitialState::Log(y));
            p.representation = Representation::Log;
            p.record_every = p.steps;
            p.stop_after_epochs = Some(1);
            let traj = simulate(&p).unwrap();
            assert_eq!(traj.epochs.boundaries.len(), 2, "connection {c}");
            assert_eq!(traj.epochs.epochs[0].shadowed.as_ref(), Some(&c.target), "connection {c}");
        }
    }
}
