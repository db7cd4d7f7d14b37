//! Exact minimum subcovers `N_K(U)` and their logarithms.
//!
//! The solver is a branch-and-bound over uncovered points: it branches on
//! the point with the fewest covering members, starts from a greedy upper
//! bound, and prunes with a packing lower bound (a set of uncovered points
//! no two of which share a covering member needs that many members). The
//! witness is then fixed to the lexicographically least index set of
//! optimal size by a feasibility post-pass, so the output does not depend
//! on search order.

use serde::{Deserialize, Serialize};

use crate::cover::Cover;
use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// Largest family the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinCoverResult {
    pub count: usize,
    /// Indices into the member list, ascending.
    pub witness: Vec<usize>,
    pub target: PointSet,
}

impl MinCoverResult {
    pub fn m_value(&self, base: LogBase) -> f64 {
        m_value(self.count, base)
    }
}

/// Base of the logarithm in `M = log N`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "e")]
    Natural,
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }

    /// Converts a value expressed in nats.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Two => nats / std::f64::consts::LN_2,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Natural => "nats",
            LogBase::Two => "bits",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::Natural),
            "2" | "bits" => Ok(LogBase::Two),
            other => Err(format!("unknown log base {other:?}; use e or 2")),
        }
    }
}

/// `M = log N`; zero for `N = 1`.
pub fn m_value(count: usize, base: LogBase) -> f64 {
    debug_assert!(count >= 1);
    base.log(count as f64)
}

/// `N_target(U)` over the canonical members of `u`.
pub fn min_subcover(u: &Cover, target: PointSet) -> Result<MinCoverResult> {
    u.space().check_set(target)?;
    min_subcover_sets(u.members(), target)
}

pub fn min_subcover_sets(members: &[PointSet], target: PointSet) -> Result<MinCoverResult> {
    check_target(members, target)?;
    let count = Solver::new(members.iter().map(|s| s.bits()), target.bits())
        .optimum(usize::MAX)
        .expect("target checked coverable");
    let witness = least_witness(members, target, count);
    Ok(MinCoverResult {
        count,
        witness,
        target,
    })
}

/// Exhaustive oracle: subfamilies in increasing size, each size in
/// lexicographic index order.
pub fn brute_force_min_subcover(u: &Cover, target: PointSet) -> Result<MinCoverResult> {
    brute_force_min_subcover_sets(u.members(), target)
}

pub fn brute_force_min_subcover_sets(
    members: &[PointSet],
    target: PointSet,
) -> Result<MinCoverResult> {
    if members.len() > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge(format!(
            "brute force over {} members exceeds {BRUTE_FORCE_MAX}",
            members.len()
        )));
    }
    check_target(members, target)?;
    for size in 1..=members.len() {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let union = idx
                .iter()
                .fold(PointSet::EMPTY, |a, &i| a.union(members[i]));
            if target.is_subset(union) {
                return Ok(MinCoverResult {
                    count: size,
                    witness: idx,
                    target,
                });
            }
            if !next_combination(&mut idx, members.len()) {
                break;
            }
        }
    }
    unreachable!("target checked coverable")
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn check_target(members: &[PointSet], target: PointSet) -> Result<()> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let union = members.iter().fold(PointSet::EMPTY, |a, &s| a.union(s));
    if !target.is_subset(union) {
        return Err(Error::Uncoverable {
            missing: target.difference(union),
        });
    }
    Ok(())
}

/// Lexicographically least index set of size `count` covering `target`.
fn least_witness(members: &[PointSet], target: PointSet, count: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(count);
    let mut remaining = target.bits();
    let mut start = 0;
    for slot in 0..count {
        let budget = count - slot - 1;
        let pick = (start..members.len()).find(|&i| {
            let gain = members[i].bits() & remaining;
            if gain == 0 {
                return false;
            }
            let rest = remaining & !gain;
            if rest == 0 {
                return true;
            }
            budget > 0
                && Solver::new(members[i + 1..].iter().map(|s| s.bits()), rest)
                    .optimum(budget + 1)
                    .is_some()
        });
        let i = pick.expect("an optimal cover extends the current prefix");
        chosen.push(i);
        remaining &= !members[i].bits();
        start = i + 1;
        if remaining == 0 {
            break;
        }
    }
    debug_assert_eq!(remaining, 0);
    debug_assert_eq!(chosen.len(), count);
    chosen
}

struct Solver {
    sets: Vec<u64>,
    target: u64,
    /// For each point, the members containing it.
    covering: Vec<Vec<usize>>,
    /// For each point, the union of the members containing it.
    reach: Vec<u64>,
}

impl Solver {
    fn new(sets: impl Iterator<Item = u64>, target: u64) -> Self {
        let mut sets: Vec<u64> = sets.map(|s| s & target).filter(|&s| s != 0).collect();
        sets.sort_unstable_by_key(|s| std::cmp::Reverse(s.count_ones()));
        sets.dedup();
        let mut kept: Vec<u64> = Vec::with_capacity(sets.len());
        for s in sets {
            if !kept.iter().any(|&k| s & !k == 0) {
                kept.push(s);
            }
        }
        let mut covering = vec![Vec::new(); 64];
        let mut reach = vec![0u64; 64];
        for (j, &s) in kept.iter().enumerate() {
            for e in PointSet::from_bits(s) {
                covering[e].push(j);
                reach[e] |= s;
            }
        }
        Solver {
            sets: kept,
            target,
            covering,
            reach,
        }
    }

    /// Minimum number of members covering the target, if it is below
    /// `bound`.
    fn optimum(&self, bound: usize) -> Option<usize> {
        if self.target == 0 {
            return Some(0);
        }
        if self.sets.iter().fold(0, |a, &s| a | s) != self.target {
            return None;
        }
        let mut best = self.greedy().min(bound);
        let found_greedy = best < bound;
        let mut improved = false;
        self.search(self.target, 0, &mut best, &mut improved);
        (found_greedy || improved).then_some(best)
    }

    fn greedy(&self) -> usize {
        let mut left = self.target;
        let mut n = 0;
        while left != 0 {
            let s = self
                .sets
                .iter()
                .max_by_key(|&&s| (s & left).count_ones())
                .copied()
                .unwrap();
            left &= !s;
            n += 1;
        }
        n
    }

    fn lower_bound(&self, uncovered: u64) -> usize {
        let mut blocked = 0u64;
        let mut lb = 0;
        let mut pts: Vec<usize> = PointSet::from_bits(uncovered).to_vec();
        pts.sort_by_key(|&e| self.covering[e].len());
        for e in pts {
            if blocked >> e & 1 == 0 {
                lb += 1;
                blocked |= self.reach[e];
            }
        }
        lb
    }

    fn search(&self, uncovered: u64, depth: usize, best: &mut usize, improved: &mut bool) {
        if uncovered == 0 {
            if depth < *best {
                *best = depth;
                *improved = true;
            }
            return;
        }
        if depth + self.lower_bound(uncovered) >= *best {
            return;
        }
        let e = PointSet::from_bits(uncovered)
            .iter()
            .min_by_key(|&e| self.covering[e].len())
            .unwrap();
        let mut options: Vec<usize> = self.covering[e].clone();
        options.sort_by_key(|&j| std::cmp::Reverse((self.sets[j] & uncovered).count_ones()));
        for j in options {
            self.search(uncovered & !self.sets[j], depth + 1, best, improved);
        }
    }
}

/// Finite subfamily of a cover that covers `target`; the finite-space form
/// of a near-compactness certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearCompactCertificate {
    pub target: PointSet,
    pub family: Vec<PointSet>,
}

impl NearCompactCertificate {
    pub fn verifies(&self) -> bool {
        let u = self.family.iter().fold(PointSet::EMPTY, |a, &s| a.union(s));
        self.target.is_subset(u)
    }
}

/// A minimum subfamily of `members` covering `target` (empty for `∅`).
pub fn certificate_from(members: &[PointSet], target: PointSet) -> Result<NearCompactCertificate> {
    if target.is_empty() {
        return Ok(NearCompactCertificate {
            target,
            family: Vec::new(),
        });
    }
    let r = min_subcover_sets(members, target)?;
    Ok(NearCompactCertificate {
        target,
        family: r.witness.iter().map(|&i| members[i]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::make_cover;
    use crate::topology::FiniteSpace;

    fn ps(v: &[usize]) -> PointSet {
        PointSet::from_indices(v.iter().copied())
    }

    #[test]
    fn four_cycle_cover() {
        let members = [ps(&[0, 1]), ps(&[1, 2]), ps(&[2, 3]), ps(&[0, 3]), ps(&[1, 3])];
        let r = min_subcover_sets(&members, PointSet::full(4)).unwrap();
        assert_eq!(r.count, 2);
        assert_eq!(r.witness, vec![0, 2]);
        assert_eq!(r, brute_force_min_subcover_sets(&members, PointSet::full(4)).unwrap());
    }

    #[test]
    fn khalimsky_catalogue_point_two() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        let u = make_cover(&k, k.regular_opens().to_vec()).unwrap();
        let r = min_subcover(&u, ps(&[2])).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(u.members()[r.witness[0]], k.full());
    }

    #[test]
    fn trivial_cover_and_singletons() {
        let x = PointSet::full(5);
        assert_eq!(min_subcover_sets(&[x], ps(&[3])).unwrap().count, 1);
        let singles: Vec<PointSet> = (0..5).map(PointSet::singleton).collect();
        assert_eq!(min_subcover_sets(&singles, x).unwrap().count, 5);
        assert_eq!(brute_force_min_subcover_sets(&singles, x).unwrap().count, 5);
        let mut with_x = singles.clone();
        with_x.push(x);
        assert_eq!(brute_force_min_subcover_sets(&with_x, x).unwrap().count, 1);
    }

    #[test]
    fn errors() {
        let m = [ps(&[0, 1])];
        assert_eq!(min_subcover_sets(&m, PointSet::EMPTY).unwrap_err(), Error::EmptyTarget);
        assert_eq!(
            min_subcover_sets(&m, ps(&[1, 2])).unwrap_err(),
            Error::Uncoverable { missing: ps(&[2]) }
        );
        let many: Vec<PointSet> = (0..21).map(|i| PointSet::singleton(i % 5)).collect();
        assert!(matches!(
            brute_force_min_subcover_sets(&many, ps(&[0])),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn tie_break_prefers_low_indices() {
        // {0} and {0,1} both cover {0}; index 0 wins even though it is dominated
        let m = [ps(&[0]), ps(&[0, 1])];
        assert_eq!(min_subcover_sets(&m, ps(&[0])).unwrap().witness, vec![0]);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn m_values() {
        assert_eq!(m_value(1, LogBase::Natural), 0.0);
        assert!((m_value(2, LogBase::Natural) - 0.693_147_180_559_945_3).abs() < 1e-12);
        assert!((m_value(5, LogBase::Two) - 2.321_928_094_887_362).abs() < 1e-12);
    }

    #[test]
    fn certificates() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        let c = certificate_from(k.regular_opens(), ps(&[2])).unwrap();
        assert_eq!(c.family, vec![k.full()]);
        assert!(c.verifies());
        let e = certificate_from(k.regular_opens(), PointSet::EMPTY).unwrap();
        assert!(e.family.is_empty());
    }
}
