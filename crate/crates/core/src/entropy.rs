//! Nearly entropy of R-maps on finite spaces.
//!
//! For a regular cover `U` the join sequence `C_m = ⋁_{i<m} f⁻ⁱ(U)` is built
//! by the recurrence `C_{m+1} = U ∨ f⁻¹(C_m)` on canonical covers. Each step
//! refines the previous one, and refinement is a partial order on canonical
//! covers, so the sequence is strictly refining until it repeats and then
//! stays fixed. The down-sets `{R regular : R ⊆ some member}` shrink strictly
//! along the way, which bounds the detection step by the size of the
//! regular-open catalogue. A repeat pins `a_m = log N_K(C_m)` to a constant,
//! so the entropy is exactly zero and the repeat is the certificate.
//!
//! The supremum over regular covers is realised by the cover of minimal
//! regular neighbourhoods `{r(x)}`: every regular open containing `x`
//! contains `r(x)`, so this cover refines every regular cover.

use std::collections::HashMap;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{join, make_cover, pullback_unchecked, Cover};
use crate::dynamics::{InvariantFamily, RMap, RMapStatus};
use crate::error::{Error, Result};
use crate::mincover::{min_subcover, LogBase};
use crate::pointset::PointSet;
use crate::topology::FiniteSpace;

/// Iteration cap for families outside the regular catalogue.
const RAW_SEQUENCE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyOptions {
    pub m_max: usize,
    pub base: LogBase,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions {
            m_max: 12,
            base: LogBase::Natural,
        }
    }
}

/// `C_p = C_{p+period}`, first observed at step `p + period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub preperiod: usize,
    pub period: usize,
}

/// Why a reported value is exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// The canonical cover sequence repeated.
    CoverCycle { preperiod: usize, period: usize },
    /// No invariant sets: the value is zero by convention.
    EmptyInvariantFamily,
    /// Word counts grow by an exact integer ratio.
    GeometricGrowth { ratio: String },
    /// No certificate; the value is an estimate.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub log_base: LogBase,
    /// `K`, when the report is relative to an invariant set.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<PointSet>,
    /// `N_m` for `m = 1, 2, ..`.
    #[serde(with = "decimal_vec")]
    pub counts: Vec<BigUint>,
    /// `a_m = log N_m`.
    pub a_seq: Vec<f64>,
    /// `min_m a_m / m` over the computed range.
    pub fekete_inf: f64,
    pub cycle: Option<Cycle>,
    pub certificate: Certificate,
    pub value: f64,
    pub exact: bool,
}

impl EntropyReport {
    /// Report for the empty-family convention.
    pub fn convention_zero(base: LogBase) -> Self {
        EntropyReport {
            log_base: base,
            target: None,
            counts: Vec::new(),
            a_seq: Vec::new(),
            fekete_inf: 0.0,
            cycle: None,
            certificate: Certificate::EmptyInvariantFamily,
            value: 0.0,
            exact: true,
        }
    }

    /// Integer counts, when they fit a machine word.
    pub fn small_counts(&self) -> Option<Vec<u64>> {
        self.counts.iter().map(|c| c.try_into().ok()).collect()
    }
}

mod decimal_vec {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|c| c.to_str_radix(10))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .into_iter()
            .map(|s| {
                BigUint::parse_bytes(s.as_bytes(), 10)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad count {s:?}")))
            })
            .collect()
    }
}

/// `ln` of an arbitrary-size count.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    num_traits::ToPrimitive::to_f64(&top).unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn fekete_inf(a_seq: &[f64]) -> f64 {
    a_seq
        .iter()
        .enumerate()
        .map(|(i, a)| a / (i + 1) as f64)
        .fold(f64::INFINITY, f64::min)
}

/// The canonical join sequence `C_1 = U`, `C_{m+1} = U ∨ f⁻¹(C_m)`.
pub struct JoinSequence<'a> {
    f: &'a RMap,
    base: &'a Cover,
    current: Option<Cover>,
}

impl<'a> JoinSequence<'a> {
    /// No R-map or regularity demands; used for restricted systems.
    pub fn unchecked(f: &'a RMap, u: &'a Cover) -> Result<Self> {
        if !crate::cover::same_space(f.space(), u.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(JoinSequence {
            f,
            base: u,
            current: None,
        })
    }
}

impl Iterator for JoinSequence<'_> {
    type Item = Cover;

    fn next(&mut self) -> Option<Cover> {
        let next = match &self.current {
            None => self.base.canonical(),
            Some(c) => join(self.base, &pullback_unchecked(self.f, c).ok()?).ok()?,
        };
        self.current = Some(next.clone());
        Some(next)
    }
}

fn require_r_map(f: &RMap) -> Result<()> {
    match f.status() {
        RMapStatus::Verified => Ok(()),
        RMapStatus::Failed { witness } => Err(Error::NotRMap { witness }),
    }
}

fn require_regular(u: &Cover) -> Result<()> {
    match u.raw().iter().find(|&&s| !u.space().is_regular_open(s)) {
        None => Ok(()),
        Some(&set) => Err(Error::NotRegular { set }),
    }
}

fn require_invariant(f: &RMap, k: PointSet) -> Result<()> {
    f.space().check_set(k)?;
    if k.is_empty() {
        return Err(Error::EmptyTarget);
    }
    if !f.is_invariant(k) {
        return Err(Error::NotInvariant {
            set: k,
            image: f.image(k),
        });
    }
    Ok(())
}

/// `N_K(⋁_{i<m} f⁻ⁱ U)` for `m = 1..=m_max`.
pub fn count_sequence(f: &RMap, u: &Cover, k: PointSet, m_max: usize) -> Result<Vec<usize>> {
    require_r_map(f)?;
    require_regular(u)?;
    require_invariant(f, k)?;
    count_sequence_unchecked(f, u, k, m_max)
}

/// As [`count_sequence`] with only the covering requirement on `k`.
pub fn count_sequence_unchecked(
    f: &RMap,
    u: &Cover,
    k: PointSet,
    m_max: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(m_max);
    let mut prev: Option<Cover> = None;
    for c in JoinSequence::unchecked(f, u)?.take(m_max) {
        if prev.as_ref() == Some(&c) {
            // fixed point: every later term repeats
            let last = *out.last().unwrap();
            out.resize(m_max, last);
            break;
        }
        out.push(min_subcover(&c, k)?.count);
        prev = Some(c);
    }
    Ok(out)
}

/// `a_m = M_K(⋁_{i<m} f⁻ⁱ U)` for `m = 1..=m_max`.
pub fn m_sequence(f: &RMap, u: &Cover, k: PointSet, m_max: usize, base: LogBase) -> Result<Vec<f64>> {
    Ok(count_sequence(f, u, k, m_max)?
        .into_iter()
        .map(|n| crate::mincover::m_value(n, base))
        .collect())
}

/// `Ent_N(f, U, K)` with a cycle certificate.
pub fn entropy_rel_cover(f: &RMap, u: &Cover, k: PointSet, opts: EntropyOptions) -> Result<EntropyReport> {
    require_r_map(f)?;
    require_regular(u)?;
    require_invariant(f, k)?;
    let cap = opts.m_max.max(u.space().regular_opens().len() + 1);
    sequence_report(f, u, k, opts, cap)
}

/// Same computation for systems whose map or cover may fail the
/// regularity hypotheses (restrictions to subspaces).
pub fn entropy_rel_cover_unchecked(
    f: &RMap,
    u: &Cover,
    k: PointSet,
    opts: EntropyOptions,
) -> Result<EntropyReport> {
    require_invariant(f, k)?;
    sequence_report(f, u, k, opts, opts.m_max.max(RAW_SEQUENCE_CAP))
}

fn sequence_report(
    f: &RMap,
    u: &Cover,
    k: PointSet,
    opts: EntropyOptions,
    cap: usize,
) -> Result<EntropyReport> {
    let mut seen: HashMap<Vec<PointSet>, usize> = HashMap::new();
    let mut counts = Vec::new();
    let mut cycle = None;
    for (i, c) in JoinSequence::unchecked(f, u)?.take(cap).enumerate() {
        let m = i + 1;
        counts.push(min_subcover(&c, k)?.count);
        if let Some(&j) = seen.get(c.members()) {
            cycle = Some(Cycle {
                preperiod: j,
                period: m - j,
            });
            break;
        }
        seen.insert(c.members().to_vec(), m);
    }
    if let Some(Cycle { period, .. }) = cycle {
        // C_m = C_{m−period} from here on, so the tail repeats
        while counts.len() < opts.m_max {
            counts.push(counts[counts.len() - period]);
        }
    }
    let a_seq: Vec<f64> = counts
        .iter()
        .map(|&n| crate::mincover::m_value(n, opts.base))
        .collect();
    let inf = fekete_inf(&a_seq);
    let (certificate, value, exact) = match cycle {
        Some(Cycle { preperiod, period }) => (Certificate::CoverCycle { preperiod, period }, 0.0, true),
        None => (Certificate::None, inf, false),
    };
    Ok(EntropyReport {
        log_base: opts.base,
        target: Some(k),
        counts: counts.into_iter().map(BigUint::from).collect(),
        a_seq,
        fekete_inf: inf,
        cycle,
        certificate,
        value,
        exact,
    })
}

/// `{r(x) : x ∈ X}`; the raw family keeps one member per point.
pub fn finest_regular_cover(space: &std::sync::Arc<FiniteSpace>) -> Cover {
    let raw = (0..space.len()).map(|x| space.min_regular_nbhd(x)).collect();
    make_cover(space, raw).expect("minimal regular neighbourhoods cover the space")
}

/// `Ent_N(f, K)`, the supremum over regular covers.
pub fn entropy_on_k(f: &RMap, k: PointSet, opts: EntropyOptions) -> Result<EntropyReport> {
    entropy_rel_cover(f, &finest_regular_cover(f.space()), k, opts)
}

/// `Ent_N(f)` as the supremum of `Ent_N(f, K)` over `h`; zero when `h` is
/// empty. Ties prefer the larger `K`, then the earlier member.
pub fn entropy_sup_invariant(f: &RMap, h: &InvariantFamily, opts: EntropyOptions) -> Result<EntropyReport> {
    if h.is_empty() {
        return Ok(EntropyReport::convention_zero(opts.base));
    }
    let reports: Vec<EntropyReport> = h
        .members
        .par_iter()
        .map(|&k| entropy_on_k(f, k, opts))
        .collect::<Result<_>>()?;
    let best = reports
        .into_iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| {
            a.value
                .total_cmp(&b.value)
                .then(a.target.map(|t| t.len()).cmp(&b.target.map(|t| t.len())))
                .then(j.cmp(i))
        })
        .map(|(_, r)| r)
        .unwrap();
    Ok(best)
}

/// `Ent_n(f)` on the whole (nearly compact) space.
pub fn entropy_whole_space(f: &RMap, opts: EntropyOptions) -> Result<EntropyReport> {
    entropy_on_k(f, f.space().full(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::make_cover;
    use crate::dynamics::{check_r_map, invariant_sets};

    fn ps(v: &[usize]) -> PointSet {
        PointSet::from_indices(v.iter().copied())
    }

    fn singletons(s: &std::sync::Arc<FiniteSpace>) -> Cover {
        make_cover(s, (0..s.len()).map(PointSet::singleton).collect()).unwrap()
    }

    #[test]
    fn identity_sequence_is_flat() {
        let d = FiniteSpace::discrete(4);
        let id = RMap::identity(&d);
        let a = m_sequence(&id, &singletons(&d), d.full(), 6, LogBase::Natural).unwrap();
        assert!(a.iter().all(|&x| (x - 4f64.ln()).abs() < 1e-12));
        let r = entropy_rel_cover(&id, &singletons(&d), d.full(), EntropyOptions::default()).unwrap();
        assert_eq!(r.cycle, Some(Cycle { preperiod: 1, period: 1 }));
        assert_eq!(r.value, 0.0);
        assert!(r.exact);
    }

    #[test]
    fn swap_on_two_points() {
        let d = FiniteSpace::discrete(2);
        let swap = check_r_map(&d, vec![1, 0]).unwrap();
        let a = m_sequence(&swap, &singletons(&d), d.full(), 5, LogBase::Natural).unwrap();
        assert!(a.iter().all(|&x| (x - 2f64.ln()).abs() < 1e-12));
        let r = entropy_rel_cover(&swap, &singletons(&d), d.full(), EntropyOptions::default()).unwrap();
        assert_eq!(r.cycle, Some(Cycle { preperiod: 1, period: 1 }));
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn khalimsky_fixed_middle_point() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        let f = check_r_map(&k, vec![2; 5]).unwrap();
        let u = make_cover(&k, vec![k.full(), ps(&[0, 1]), ps(&[3, 4])]).unwrap();
        let a = m_sequence(&f, &u, ps(&[2]), 6, LogBase::Natural).unwrap();
        assert_eq!(a, vec![0.0; 6]);
    }

    #[test]
    fn finest_covers() {
        let d = FiniteSpace::discrete(3);
        assert_eq!(finest_regular_cover(&d), singletons(&d));
        let k = FiniteSpace::khalimsky(5).unwrap();
        let fine = finest_regular_cover(&k);
        assert_eq!(fine.raw(), &[ps(&[0, 1]), ps(&[0, 1]), k.full(), ps(&[3, 4]), ps(&[3, 4])]);
        assert_eq!(fine.members(), &[k.full()]);
        let s = FiniteSpace::sierpinski();
        assert_eq!(finest_regular_cover(&s).members(), &[s.full()]);
    }

    #[test]
    fn empty_family_convention() {
        let d = FiniteSpace::discrete(1);
        let f = RMap::identity(&d);
        let r = entropy_sup_invariant(&f, &InvariantFamily::default(), EntropyOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.exact);
        assert_eq!(r.certificate, Certificate::EmptyInvariantFamily);
    }

    #[test]
    fn fixed_point_singleton_family() {
        let d = FiniteSpace::discrete(3);
        let f = check_r_map(&d, vec![0, 0, 1]).unwrap();
        let h = InvariantFamily {
            members: vec![ps(&[0])],
        };
        let r = entropy_sup_invariant(&f, &h, EntropyOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.a_seq[0], 0.0);
    }

    #[test]
    fn big_n_equals_entropy_on_whole_space() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        let f = check_r_map(&k, vec![0; 5]).unwrap();
        let h = invariant_sets(&f).unwrap();
        let opts = EntropyOptions::default();
        assert_eq!(
            entropy_sup_invariant(&f, &h, opts).unwrap(),
            entropy_on_k(&f, k.full(), opts).unwrap()
        );
        assert_eq!(entropy_whole_space(&f, opts).unwrap().value, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        let bad = RMap::assess(&k, vec![2, 2, 0, 2, 2]).unwrap();
        let u = Cover::trivial(&k);
        assert!(matches!(
            entropy_rel_cover(&bad, &u, k.full(), EntropyOptions::default()),
            Err(Error::NotRMap { .. })
        ));
        let d = FiniteSpace::discrete(3);
        let f = check_r_map(&d, vec![1, 0, 2]).unwrap();
        assert!(matches!(
            entropy_on_k(&f, ps(&[0]), EntropyOptions::default()),
            Err(Error::NotInvariant { .. })
        ));
        let open_not_regular = make_cover(&k, vec![ps(&[1, 2, 3]), ps(&[0, 1]), ps(&[3, 4])]).unwrap();
        let g = check_r_map(&k, vec![2; 5]).unwrap();
        assert_eq!(
            entropy_rel_cover(&g, &open_not_regular, k.full(), EntropyOptions::default()).unwrap_err(),
            Error::NotRegular { set: ps(&[1, 2, 3]) }
        );
    }

    #[test]
    fn base_two_rescales() {
        let d = FiniteSpace::discrete(2);
        let swap = check_r_map(&d, vec![1, 0]).unwrap();
        let opts = EntropyOptions {
            m_max: 4,
            base: LogBase::Two,
        };
        let r = entropy_rel_cover(&swap, &singletons(&d), d.full(), opts).unwrap();
        assert_eq!(r.a_seq[0], 1.0);
    }

    #[test]
    fn big_log() {
        let x = BigUint::from(2u32).pow(3000);
        assert!((ln_big(&x) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_big(&BigUint::from(17711u32)) - 17711f64.ln()).abs() < 1e-15);
    }
}
