use hetring::graph::{independent_sets, lucas, make_ring, suppression_profile, ActiveSet};
use proptest::prelude::*;

fn ring_shape() -> impl Strategy<Value = (usize, usize)> {
    (3usize..=14).prop_flat_map(|n| (Just(n), 1usize..=((n - 1) / 2)))
}

/// Count of independent sets on the (n,1) ring by transfer matrix over the
/// cycle, independent of the enumerator.
fn cycle_independent_sets(n: usize) -> u64 {
    // states: last node in/out; sum over first node's choice
    let mut total = 0;
    for first_in in [false, true] {
        let (mut out_, mut in_) = if first_in { (0u64, 1u64) } else { (1u64, 0u64) };
        for _ in 1..n {
            (out_, in_) = (out_ + in_, out_);
        }
        total += if first_in { out_ } else { out_ + in_ };
    }
    total
}

proptest! {
    #[test]
    fn lucas_matches_independent_set_count(n in 3usize..=20) {
        let g = make_ring(n, 1).unwrap();
        let count = independent_sets(&g).unwrap().len() as u64;
        prop_assert_eq!(count, lucas(n));
        prop_assert_eq!(count, cycle_independent_sets(n));
    }

    #[test]
    fn independent_sets_are_rotation_invariant((n, m) in ring_shape(), shift in 0usize..14) {
        let g = make_ring(n, m).unwrap();
        let sets = independent_sets(&g).unwrap();
        for s in &sets {
            let rotated = s.rotated(n, shift % n);
            prop_assert!(g.is_independent(&rotated));
            prop_assert!(sets.binary_search(&rotated).is_ok());
        }
    }

    #[test]
    fn suppression_profile_partitions_nodes((n, m) in ring_shape(), pick in any::<u64>()) {
        let g = make_ring(n, m).unwrap();
        let sets = independent_sets(&g).unwrap();
        let z = &sets[(pick % sets.len() as u64) as usize];
        let prof = suppression_profile(&g, z).unwrap();
        let mut seen = vec![0; n];
        for &a in z.members() { seen[a] += 1; }
        for &s in prof.suppressed.keys() { seen[s] += 1; }
        for &b in &prof.growing { seen[b] += 1; }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for (&node, &count) in &prof.suppressed {
            let expected = z.members().iter().filter(|&&a| g.inhibits(a, node)).count();
            prop_assert_eq!(count, expected);
            prop_assert!(count >= 1 && count <= m);
        }
    }

    #[test]
    fn active_set_label_round_trip(members in proptest::collection::btree_set(1usize..30, 0..8)) {
        let labels: Vec<usize> = members.into_iter().collect();
        let s = ActiveSet::from_one_based(&labels).unwrap();
        prop_assert_eq!(s.one_based(), labels);
        let json = serde_json::to_string(&s).unwrap();
        let back: ActiveSet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, s);
    }
}
