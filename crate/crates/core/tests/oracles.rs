//! Engine counts against a from-scratch reimplementation on small systems,
//! and the supremum over regular covers against exhaustion.

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use regent::entropy::count_sequence;
use regent::{
    check_r_map, entropy_on_k, entropy_sup_invariant, finest_regular_cover, invariant_sets, make_cover,
    EntropyOptions, FiniteSpace, PointSet, RMap,
};

const M: usize = 4;

fn closure_space(n: usize, edges: &[bool]) -> Arc<FiniteSpace> {
    let mut up: Vec<u64> = (0..n).map(|x| 1 << x).collect();
    for x in 0..n {
        for y in 0..n {
            if edges[x * n + y] {
                up[x] |= 1 << y;
            }
        }
    }
    for k in 0..n {
        for x in 0..n {
            if up[x] >> k & 1 == 1 {
                up[x] |= up[k];
            }
        }
    }
    FiniteSpace::from_min_nbhds(up.into_iter().map(PointSet::from_bits).collect()).unwrap()
}

fn system_strategy() -> impl Strategy<Value = RMap> {
    (1usize..=5)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(prop::bool::weighted(0.3), n * n),
                prop::collection::vec(0..n, n),
            )
        })
        .prop_map(|(n, e, t)| {
            let s = closure_space(n, &e);
            check_r_map(&s, t).unwrap_or_else(|_| RMap::identity(&s))
        })
}

fn preimage(table: &[usize], a: u64) -> u64 {
    (0..table.len()).filter(|&x| a >> table[x] & 1 == 1).fold(0, |p, x| p | 1 << x)
}

/// `U, U ∨ f⁻¹U, ..` as plain deduplicated families.
fn oracle_joins(table: &[usize], u: &[u64], m: usize) -> Vec<Vec<u64>> {
    let mut out = vec![u.to_vec()];
    while out.len() < m {
        let prev = out.last().unwrap();
        let next: BTreeSet<u64> = u
            .iter()
            .flat_map(|&a| prev.iter().map(move |&b| a & preimage(table, b)))
            .filter(|&s| s != 0)
            .collect();
        out.push(next.into_iter().collect());
    }
    out
}

/// Fewest members covering `target`, by breadth-first search on coverage.
fn oracle_count(family: &[u64], target: u64) -> usize {
    let mut frontier = BTreeSet::from([0u64]);
    for k in 0.. {
        if frontier.iter().any(|&c| target & !c == 0) {
            return k;
        }
        frontier = frontier
            .iter()
            .flat_map(|&c| family.iter().map(move |&s| (c | s) & target))
            .collect();
    }
    unreachable!()
}

/// Every regular cover drawn from the nonempty catalogue.
fn all_regular_covers(s: &FiniteSpace) -> Vec<Vec<u64>> {
    let cat: Vec<u64> = s.regular_opens().iter().map(|r| r.bits()).filter(|&b| b != 0).collect();
    let full = s.full().bits();
    (1u64..1 << cat.len())
        .map(|m| (0..cat.len()).filter(|i| m >> i & 1 == 1).map(|i| cat[i]).collect::<Vec<_>>())
        .filter(|c| c.iter().fold(0, |a, &b| a | b) == full)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_match_reimplementation(f in system_strategy()) {
        let s = f.space().clone();
        let covers = all_regular_covers(&s);
        let h = invariant_sets(&f).unwrap();
        for u in covers.iter().take(64) {
            let cover = make_cover(&s, u.iter().map(|&b| PointSet::from_bits(b)).collect()).unwrap();
            let joins = oracle_joins(f.table(), u, M);
            for &k in &h.members {
                let want: Vec<usize> = joins.iter().map(|c| oracle_count(c, k.bits())).collect();
                prop_assert_eq!(count_sequence(&f, &cover, k, M).unwrap(), want);
            }
        }
    }

    #[test]
    fn finest_cover_attains_the_supremum(f in system_strategy()) {
        let s = f.space().clone();
        let finest = finest_regular_cover(&s);
        let h = invariant_sets(&f).unwrap();
        let covers = all_regular_covers(&s);
        for &k in &h.members {
            let best: Vec<usize> = (0..M)
                .map(|m| {
                    covers
                        .iter()
                        .map(|u| oracle_count(&oracle_joins(f.table(), u, m + 1)[m], k.bits()))
                        .max()
                        .unwrap()
                })
                .collect();
            prop_assert_eq!(count_sequence(&f, &finest, k, M).unwrap(), best);
            let r = entropy_on_k(&f, k, EntropyOptions::default()).unwrap();
            prop_assert!(r.exact && r.value == 0.0);
        }
        let sup = entropy_sup_invariant(&f, &h, EntropyOptions::default()).unwrap();
        prop_assert_eq!(sup.value, 0.0);
        // ties resolve to the largest invariant set, which is X
        prop_assert_eq!(sup.target, Some(s.full()));
    }
}
