use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use regent::docs::{parse_doc, to_json, CoverDoc, MapDoc, SftDoc, SpaceDoc};
use regent::dynamics::invariant_sets_by_orbits;
use regent::entropy::count_sequence;
use regent::mincover::min_subcover_sets;
use regent::{
    check_r_map, entropy_rel_cover, entropy_sup_invariant, finest_regular_cover, invariant_sets, join, make_cover,
    pullback, refines, sft_product, spectral_entropy, sft_entropy, Certificate, Cover, EntropyOptions, FiniteSpace,
    LogBase, PointSet, RMap, SftSystem,
};

/// Alexandrov space of the reflexive-transitive closure of `edges`.
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

fn space_strategy(max_n: usize) -> impl Strategy<Value = Arc<FiniteSpace>> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(prop::bool::weighted(0.3), n * n)))
        .prop_map(|(n, e)| closure_space(n, &e))
}

/// A system `(X, f)` with `f` an R-map; identity stands in when the drawn
/// table fails.
fn system_strategy(max_n: usize) -> impl Strategy<Value = RMap> {
    space_strategy(max_n)
        .prop_flat_map(|s| {
            let n = s.len();
            (Just(s), prop::collection::vec(0..n, n))
        })
        .prop_map(|(s, t)| check_r_map(&s, t).unwrap_or_else(|_| RMap::identity(&s)))
}

fn oracle_closure(s: &FiniteSpace, a: u64) -> u64 {
    let full = s.full().bits();
    s.opens()
        .iter()
        .map(|o| full & !o.bits())
        .filter(|c| a & !c == 0)
        .fold(full, |acc, c| acc & c)
}

fn oracle_interior(s: &FiniteSpace, a: u64) -> u64 {
    s.opens()
        .iter()
        .map(|o| o.bits())
        .filter(|o| o & !a == 0)
        .fold(0, |acc, o| acc | o)
}

/// Minimum number of members covering `target`, by subset enumeration.
fn oracle_min_cover(members: &[u64], target: u64) -> Option<usize> {
    (0u32..1 << members.len())
        .filter(|m| {
            let u = (0..members.len()).filter(|i| m >> i & 1 == 1).fold(0, |a, i| a | members[i]);
            target & !u == 0
        })
        .map(|m| m.count_ones() as usize)
        .min()
}

fn bits(sets: &[PointSet]) -> Vec<u64> {
    sets.iter().map(|s| s.bits()).collect()
}

/// Random regular cover: a subset of the catalogue plus `X`.
fn some_regular_cover(s: &Arc<FiniteSpace>, pick: &[bool]) -> Cover {
    let mut sets: Vec<PointSet> = s
        .regular_opens()
        .iter()
        .zip(pick.iter().cycle())
        .filter(|(r, &p)| p && !r.is_empty())
        .map(|(r, _)| *r)
        .collect();
    let covered = sets.iter().fold(PointSet::EMPTY, |a, &b| a.union(b));
    for x in 0..s.len() {
        if !covered.contains(x) {
            sets.push(s.min_regular_nbhd(x));
        }
    }
    make_cover(s, sets).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn opens_form_a_topology(s in space_strategy(7)) {
        let opens: std::collections::HashSet<u64> = bits(s.opens()).into_iter().collect();
        prop_assert!(opens.contains(&0) && opens.contains(&s.full().bits()));
        for &a in &opens {
            for &b in &opens {
                prop_assert!(opens.contains(&(a | b)) && opens.contains(&(a & b)));
            }
        }
    }

    #[test]
    fn operators_match_opens_list(s in space_strategy(6), a in any::<u64>()) {
        let a = a & s.full().bits();
        let ps = PointSet::from_bits(a);
        prop_assert_eq!(s.closure(ps).bits(), oracle_closure(&s, a));
        prop_assert_eq!(s.interior(ps).bits(), oracle_interior(&s, a));
        let r = s.regularize(ps);
        prop_assert_eq!(r.bits(), oracle_interior(&s, oracle_closure(&s, a)));
        prop_assert_eq!(s.regularize(r), r);
    }

    #[test]
    fn catalogue_is_the_fixed_points_of_int_cl(s in space_strategy(6)) {
        let want: Vec<u64> = {
            let mut v: Vec<u64> = bits(s.opens())
                .into_iter()
                .filter(|&o| oracle_interior(&s, oracle_closure(&s, o)) == o)
                .collect();
            v.sort_by_key(|&b| PointSet::from_bits(b));
            v
        };
        prop_assert_eq!(bits(s.regular_opens()), want);
        for x in 0..s.len() {
            prop_assert!(s.min_nbhd(x).is_subset(s.min_regular_nbhd(x)));
        }
    }

    #[test]
    fn predicate_witnesses_recheck(s in space_strategy(6)) {
        for v in [s.is_hausdorff(), s.is_r_space()] {
            prop_assert_eq!(v.holds, v.witness.is_none());
            if let Some(w) = &v.witness {
                prop_assert!(w.recheck(&s));
            }
        }
        let discrete = s.opens().len() == 1 << s.len();
        prop_assert_eq!(s.is_hausdorff().holds, discrete);
    }

    #[test]
    fn min_cover_matches_subset_enumeration(
        members in prop::collection::vec(0u64..1 << 10, 1..10),
        target in 1u64..1 << 10,
    ) {
        let sets: Vec<PointSet> = members.iter().map(|&b| PointSet::from_bits(b)).collect();
        let got = min_subcover_sets(&sets, PointSet::from_bits(target));
        match oracle_min_cover(&members, target) {
            Some(k) => {
                let r = got.unwrap();
                prop_assert_eq!(r.count, k);
                prop_assert_eq!(r.witness.len(), k);
                let u = r.witness.iter().fold(0, |a, &i| a | members[i]);
                prop_assert_eq!(target & !u, 0);
            }
            None => prop_assert!(got.is_err()),
        }
    }

    #[test]
    fn join_refines_both_and_pullbacks_stay_regular(f in system_strategy(6), pick in prop::collection::vec(any::<bool>(), 1..8)) {
        let s = f.space().clone();
        let u = some_regular_cover(&s, &pick);
        let v = finest_regular_cover(&s);
        let w = join(&u, &v).unwrap();
        // U ≺ V reads "V is finer than U"
        prop_assert!(refines(&u, &w).unwrap() && refines(&v, &w).unwrap());
        prop_assert!(refines(&u, &v).unwrap());
        prop_assert!(refines(&u, &u).unwrap());
        let p = pullback(&f, &u).unwrap();
        prop_assert!(p.is_regular());
        let canon = p.canonical();
        prop_assert_eq!(canon.members(), p.members());
    }

    #[test]
    fn count_sequences_are_monotone_and_subadditive(f in system_strategy(6), pick in prop::collection::vec(any::<bool>(), 1..8)) {
        let s = f.space().clone();
        let u = some_regular_cover(&s, &pick);
        let c = count_sequence(&f, &u, s.full(), 8).unwrap();
        for m in 1..c.len() {
            prop_assert!(c[m - 1] <= c[m]);
        }
        for i in 1..=4 {
            for j in 1..=4 {
                prop_assert!(c[i + j - 1] <= c[i - 1] * c[j - 1]);
            }
        }
        // the finest cover refines every regular cover, so it dominates
        let top = count_sequence(&f, &finest_regular_cover(&s), s.full(), 8).unwrap();
        for m in 0..8 {
            prop_assert!(c[m] <= top[m]);
        }
    }

    #[test]
    fn finite_systems_have_zero_certificates(f in system_strategy(6), pick in prop::collection::vec(any::<bool>(), 1..8)) {
        let s = f.space().clone();
        let u = some_regular_cover(&s, &pick);
        let r = entropy_rel_cover(&f, &u, s.full(), EntropyOptions::default()).unwrap();
        let c = r.cycle.expect("finite catalogue forces a cycle");
        prop_assert!(c.preperiod + c.period <= s.regular_opens().len());
        let cycle_cert = matches!(r.certificate, Certificate::CoverCycle { .. });
        prop_assert!(cycle_cert);
        prop_assert!(r.exact && r.value == 0.0);
    }

    #[test]
    fn counts_are_monotone_in_k(f in system_strategy(6)) {
        let s = f.space().clone();
        let h = invariant_sets(&f).unwrap();
        let u = finest_regular_cover(&s);
        for (k1, k2) in h.nested_pairs() {
            let a = count_sequence(&f, &u, k1, 5).unwrap();
            let b = count_sequence(&f, &u, k2, 5).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
        }
        let sup = entropy_sup_invariant(&f, &h, EntropyOptions::default()).unwrap();
        prop_assert_eq!(sup.value, 0.0);
    }

    #[test]
    fn invariant_families_agree(f in system_strategy(7)) {
        let h = invariant_sets(&f).unwrap();
        prop_assert_eq!(&h, &invariant_sets_by_orbits(&f));
        for &k in &h.members {
            prop_assert!(f.image(k).is_subset(k) && !k.is_empty());
        }
    }

    #[test]
    fn space_documents_round_trip(s in space_strategy(7)) {
        let limits = regent::Limits::default();
        let doc = SpaceDoc::from_space(&s);
        let text = to_json(&doc);
        let back: SpaceDoc = parse_doc("space", &text).unwrap();
        prop_assert_eq!(back.canonical(limits).unwrap(), doc.canonical(limits).unwrap());
        prop_assert_eq!(to_json(&back.canonical(limits).unwrap()), text);
        prop_assert_eq!(&*back.to_space(limits).unwrap(), &*s);
    }

    #[test]
    fn map_and_cover_documents_round_trip(f in system_strategy(6), pick in prop::collection::vec(any::<bool>(), 1..8)) {
        let s = f.space().clone();
        let m = MapDoc::from_map(&f, None);
        let back: MapDoc = parse_doc("map", &to_json(&m)).unwrap();
        prop_assert_eq!(&back, &m);
        let u = some_regular_cover(&s, &pick);
        let c = CoverDoc::from_cover(&u, None).canonical();
        let back: CoverDoc = parse_doc("cover", &to_json(&c)).unwrap();
        prop_assert_eq!(back.canonical(), c.clone());
        let rebuilt = back.to_cover(&s).unwrap();
        prop_assert_eq!(rebuilt.members(), u.members());
    }

    #[test]
    fn shift_documents_round_trip(words in prop::collection::vec("[0-2]{2}", 0..5)) {
        let doc: SftDoc = parse_doc("sft", &format!(r#"{{"alphabet":3,"forbidden":{}}}"#, serde_json::to_string(&words).unwrap())).unwrap();
        let c = doc.canonical();
        let back: SftDoc = parse_doc("sft", &to_json(&c)).unwrap();
        prop_assert_eq!(back.canonical(), c);
    }

    #[test]
    fn shift_counts_are_submultiplicative_and_bound_the_spectrum(rows in prop::collection::vec(prop::collection::vec(0u8..=1, 3), 3)) {
        let Ok(x) = regent::build_sft(3, rows) else { return Ok(()) };
        let w: Vec<BigUint> = (1..=10).map(|m| x.count_words(m)).collect();
        for i in 1..=5 {
            for j in 1..=5 {
                prop_assert!(w[i + j - 1] <= &w[i - 1] * &w[j - 1]);
            }
        }
        let h = spectral_entropy(&x).unwrap();
        let r = sft_entropy(&x, 10, LogBase::Natural);
        prop_assert!(h <= r.fekete_inf + 1e-9);
        let sq = sft_product(&x, &x).unwrap();
        for m in 1..=8 {
            prop_assert_eq!(sq.count_words(m), x.count_words(m).pow(2));
        }
    }
}

#[test]
fn golden_mean_tensor_full_shift() {
    let p = sft_product(&SftSystem::golden_mean(), &SftSystem::full_shift(2).unwrap()).unwrap();
    for m in 1..=20 {
        assert_eq!(
            p.count_words(m),
            SftSystem::golden_mean().count_words(m) * BigUint::from(2u32).pow(m as u32)
        );
    }
}
