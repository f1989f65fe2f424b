use isoest_core::young::{
    count_stab, count_stab_hook, count_stab_recursive, dim_unitary, log2_dim_unitary, standard_tableaux,
    DimensionRecord,
};
use isoest_core::{DiagramSet, YoungDiagram};
use num_bigint::BigUint;
use proptest::prelude::*;

/// Partition counts p(n) for n = 0..=12, and p(n, ≤2 parts) = ⌊n/2⌋ + 1.
const PARTITIONS: [usize; 13] = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77];

#[test]
fn cardinalities_match_partition_counts() {
    for n in 0..=12 {
        assert_eq!(DiagramSet::enumerate(n.max(1), n).unwrap().len(), PARTITIONS[n]);
        assert_eq!(DiagramSet::enumerate(2, n).unwrap().len(), n / 2 + 1);
        assert_eq!(DiagramSet::enumerate(1, n).unwrap().len(), 1);
    }
}

#[test]
fn enumeration_is_descending_and_valid() {
    for d in 1..=4 {
        for n in 0..=12 {
            let set = DiagramSet::enumerate(d, n).unwrap();
            for w in set.diagrams().windows(2) {
                assert!(w[0] > w[1]);
            }
            for (i, a) in set.iter().enumerate() {
                assert_eq!(a.d(), d);
                assert_eq!(a.n(), n);
                assert_eq!(set.position(a), Some(i));
            }
        }
    }
}

#[test]
fn recursion_and_hook_length_agree() {
    for d in 1..=4 {
        for n in 0..=12 {
            for a in DiagramSet::enumerate(d, n).unwrap().iter() {
                assert_eq!(count_stab_recursive(a), count_stab_hook(a), "({a})");
            }
        }
    }
}

#[test]
fn schur_weyl_dimension_identity() {
    for d in 1..=4usize {
        for n in 0..=12usize {
            let total: BigUint = DiagramSet::enumerate(d, n)
                .unwrap()
                .iter()
                .map(|a| dim_unitary(a, d).unwrap() * count_stab(a))
                .sum();
            assert_eq!(total, BigUint::from(d).pow(n as u32), "d = {d}, n = {n}");
        }
    }
}

#[test]
fn symmetric_group_dimension_identity() {
    // Σ_α m_α² = n! over all partitions of n.
    let mut fact = BigUint::from(1u32);
    for n in 1..=10usize {
        fact *= n;
        let total: BigUint = DiagramSet::enumerate(n, n).unwrap().iter().map(|a| count_stab(a).pow(2)).sum();
        assert_eq!(total, fact);
    }
}

#[test]
fn tableaux_listing_matches_count() {
    for d in 1..=4 {
        for n in 0..=8 {
            for a in DiagramSet::enumerate(d, n).unwrap().iter() {
                let words = standard_tableaux(a);
                assert_eq!(BigUint::from(words.len()), count_stab(a));
                for w in words.windows(2) {
                    assert!(w[0] < w[1]);
                }
            }
        }
    }
}

#[test]
fn branching_is_symmetric() {
    for d in 1..=4 {
        for n in 0..=9 {
            let lower = DiagramSet::enumerate(d, n).unwrap();
            let upper = DiagramSet::enumerate(d, n + 1).unwrap();
            for a in lower.iter() {
                for b in upper.iter() {
                    assert_eq!(a.add_box().contains(b), b.remove_box().contains(a), "({a}) vs ({b})");
                }
            }
        }
    }
}

#[test]
fn dimension_grows_with_group_size() {
    for d in 1..=4 {
        for n in 0..=10 {
            for a in DiagramSet::enumerate(d, n).unwrap().iter() {
                for m in a.height().max(1)..8 {
                    assert!(dim_unitary(a, m + 1).unwrap() >= dim_unitary(a, m).unwrap());
                }
            }
        }
    }
}

#[test]
fn log_path_matches_exact_path() {
    for d in 1..=4 {
        for n in [0, 5, 40, 160] {
            for a in DiagramSet::enumerate(d, n).unwrap().iter().take(50) {
                for m in [d, d + 1, 2 * d + 3] {
                    let rec = DimensionRecord::new(a, m).unwrap();
                    assert!(rec.stab_count >= BigUint::from(1u32));
                    assert!(rec.dim_unitary >= BigUint::from(1u32));
                    assert!((rec.log2_dim - log2_dim_unitary(a, m).unwrap()).abs() == 0.0);
                }
            }
        }
    }
}

#[test]
fn serialization_is_deterministic() {
    let a = DiagramSet::enumerate(4, 11).unwrap().serialize();
    let b = DiagramSet::enumerate(4, 11).unwrap().serialize();
    assert_eq!(a.as_bytes(), b.as_bytes());
    assert_eq!(DiagramSet::parse(&a).unwrap(), DiagramSet::enumerate(4, 11).unwrap());
}

fn diagram_strategy() -> impl Strategy<Value = YoungDiagram> {
    (1usize..=5, prop::collection::vec(0u32..30, 5)).prop_map(|(d, mut rows)| {
        rows.truncate(d);
        rows.sort_unstable_by(|a, b| b.cmp(a));
        YoungDiagram::new(rows).unwrap()
    })
}

proptest! {
    #[test]
    fn add_then_remove_round_trips(a in diagram_strategy()) {
        for b in a.add_box() {
            prop_assert_eq!(b.n(), a.n() + 1);
            prop_assert!(b.remove_box().contains(&a));
        }
        for b in a.remove_box() {
            prop_assert!(b.add_box().contains(&a));
        }
    }

    #[test]
    fn display_round_trips(a in diagram_strategy()) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<YoungDiagram>().unwrap(), a);
    }

    #[test]
    fn hook_formula_matches_recursion(a in diagram_strategy()) {
        prop_assume!(a.n() <= 40);
        prop_assert_eq!(count_stab_hook(&a), count_stab_recursive(&a));
    }
}
