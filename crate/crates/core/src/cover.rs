//! Covers and the cover operations: join, refinement, pullback, restriction
//! and iterated join.
//!
//! A cover keeps the family it was built from (`raw`) and a canonical form
//! with `∅`, duplicates and dominated members removed. Minimal subcover
//! sizes and refinement are both invariant under canonicalisation, so all
//! computations run on the canonical members, and covers are compared and
//! hashed by them.

use std::fmt;
use std::sync::Arc;

use crate::dynamics::RMap;
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::topology::{FiniteSpace, Subspace};

/// What the members of a cover are known to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grade {
    /// Arbitrary point sets; only the min-cover machinery applies.
    Raw,
    Open,
    RegularOpen,
}

#[derive(Clone)]
pub struct Cover {
    space: Arc<FiniteSpace>,
    raw: Vec<PointSet>,
    members: Vec<PointSet>,
    grade: Grade,
}

impl PartialEq for Cover {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && same_space(&self.space, &other.space)
    }
}

impl Eq for Cover {}

impl std::hash::Hash for Cover {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.members.hash(state);
    }
}

impl fmt::Debug for Cover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cover{:?}", self.members)
    }
}

impl fmt::Display for Cover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Drops `∅`, duplicates and members contained in another member; sorts.
pub fn canonicalize(sets: &[PointSet]) -> Vec<PointSet> {
    let mut v: Vec<PointSet> = sets.iter().copied().filter(|s| !s.is_empty()).collect();
    v.sort_by_key(|s| std::cmp::Reverse(s.len()));
    v.dedup();
    let mut kept: Vec<PointSet> = Vec::with_capacity(v.len());
    for s in v {
        if !kept.iter().any(|k| s.is_subset(*k)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

/// Validates `sets` as an open cover of `space`.
pub fn make_cover(space: &Arc<FiniteSpace>, sets: Vec<PointSet>) -> Result<Cover> {
    let c = Cover::raw_family(space, sets)?;
    if c.grade == Grade::Raw {
        let set = c.raw.iter().find(|s| !space.is_open(**s)).copied();
        return Err(Error::NotOpen {
            set: set.unwrap_or_default(),
        });
    }
    Ok(c)
}

impl Cover {
    /// A covering family of arbitrary point sets. Meant for the min-cover
    /// oracle and for families produced by maps that are not R-maps.
    pub fn raw_family(space: &Arc<FiniteSpace>, sets: Vec<PointSet>) -> Result<Cover> {
        for &s in &sets {
            space.check_set(s)?;
        }
        let union = sets.iter().fold(PointSet::EMPTY, |a, &s| a.union(s));
        if union != space.full() {
            return Err(Error::NotACover {
                uncovered: space.full().difference(union),
            });
        }
        let grade = if sets.iter().all(|&s| space.is_regular_open(s)) {
            Grade::RegularOpen
        } else if sets.iter().all(|&s| space.is_open(s)) {
            Grade::Open
        } else {
            Grade::Raw
        };
        Ok(Cover {
            space: Arc::clone(space),
            members: canonicalize(&sets),
            raw: sets,
            grade,
        })
    }

    /// `{X}`.
    pub fn trivial(space: &Arc<FiniteSpace>) -> Cover {
        Cover {
            space: Arc::clone(space),
            raw: vec![space.full()],
            members: vec![space.full()],
            grade: Grade::RegularOpen,
        }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    /// Canonical members, sorted lexicographically.
    pub fn members(&self) -> &[PointSet] {
        &self.members
    }

    /// The family as given.
    pub fn raw(&self) -> &[PointSet] {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn grade(&self) -> Grade {
        self.grade
    }

    pub fn is_regular(&self) -> bool {
        self.grade == Grade::RegularOpen
    }

    /// Same cover with only the canonical members kept as raw form.
    pub fn canonical(&self) -> Cover {
        Cover {
            raw: self.members.clone(),
            ..self.clone()
        }
    }

    fn from_family(space: &Arc<FiniteSpace>, mut raw: Vec<PointSet>) -> Cover {
        raw.sort();
        raw.dedup();
        let grade = if raw.iter().all(|&s| space.is_regular_open(s)) {
            Grade::RegularOpen
        } else if raw.iter().all(|&s| space.is_open(s)) {
            Grade::Open
        } else {
            Grade::Raw
        };
        Cover {
            space: Arc::clone(space),
            members: canonicalize(&raw),
            raw,
            grade,
        }
    }
}

/// `U ∨ V = {A ∩ B}`, canonicalised.
pub fn join(u: &Cover, v: &Cover) -> Result<Cover> {
    if !same_space(&u.space, &v.space) {
        return Err(Error::SpaceMismatch);
    }
    let raw = u
        .members
        .iter()
        .flat_map(|&a| v.members.iter().map(move |&b| a.intersection(b)))
        .collect();
    let c = Cover::from_family(&u.space, raw);
    debug_assert!(!(u.is_regular() && v.is_regular()) || c.is_regular());
    Ok(c)
}

/// `U ≺ V`: every member of `V` lies inside some member of `U`.
pub fn refines(u: &Cover, v: &Cover) -> Result<bool> {
    if !same_space(&u.space, &v.space) {
        return Err(Error::SpaceMismatch);
    }
    Ok(v
        .members
        .iter()
        .all(|&b| u.members.iter().any(|&a| b.is_subset(a))))
}

/// `f⁻¹(U)`; requires `f` to be a verified R-map so that regularity carries
/// over.
pub fn pullback(f: &RMap, u: &Cover) -> Result<Cover> {
    if let crate::dynamics::RMapStatus::Failed { witness } = f.status() {
        return Err(Error::NotRMap { witness });
    }
    pullback_unchecked(f, u)
}

/// `f⁻¹(U)` for any total map; the grade of the result is recomputed.
pub fn pullback_unchecked(f: &RMap, u: &Cover) -> Result<Cover> {
    if !same_space(f.space(), &u.space) {
        return Err(Error::SpaceMismatch);
    }
    let raw = u.members.iter().map(|&a| f.preimage(a)).collect();
    Ok(Cover::from_family(&u.space, raw))
}

/// `U|_K` over the subspace `K`.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub sub: Subspace,
    pub cover: Cover,
    /// Per raw member of the original cover, whether its trace is
    /// regular open in the subspace topology.
    pub trace_regular: Vec<bool>,
}

/// `U|_K = {A ∩ K : A ∈ U}`, reindexed into the subspace. Traces need not be
/// regular open in `K`; `trace_regular` reports which are.
pub fn restrict(u: &Cover, k: PointSet) -> Result<Restriction> {
    let sub = u.space.subspace(k)?;
    let traces: Vec<PointSet> = u.raw.iter().map(|&a| sub.lower(a)).collect();
    let trace_regular = traces
        .iter()
        .map(|&t| sub.space.is_regular_open(t))
        .collect();
    let cover = Cover::from_family(&sub.space, traces);
    Ok(Restriction {
        sub,
        cover,
        trace_regular,
    })
}

/// `⋁_{i<m} f⁻ⁱ(U)` via `C₁ = U`, `C_{k+1} = U ∨ f⁻¹(C_k)`.
pub fn iterated_join(f: &RMap, u: &Cover, m: usize) -> Result<Cover> {
    if let crate::dynamics::RMapStatus::Failed { witness } = f.status() {
        return Err(Error::NotRMap { witness });
    }
    iterated_join_unchecked(f, u, m)
}

pub fn iterated_join_unchecked(f: &RMap, u: &Cover, m: usize) -> Result<Cover> {
    assert!(m >= 1, "iterated join needs m >= 1");
    let mut c = u.clone();
    for _ in 1..m {
        c = join(u, &pullback_unchecked(f, &c)?)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::check_r_map;

    fn ps(v: &[usize]) -> PointSet {
        PointSet::from_indices(v.iter().copied())
    }

    fn cover(space: &Arc<FiniteSpace>, sets: &[&[usize]]) -> Cover {
        make_cover(space, sets.iter().map(|s| ps(s)).collect()).unwrap()
    }

    #[test]
    fn make_cover_examples() {
        let d = FiniteSpace::discrete(3);
        let c = cover(&d, &[&[0, 1], &[1, 2]]);
        assert!(c.is_regular());

        let k = FiniteSpace::khalimsky(5).unwrap();
        let err = make_cover(&k, vec![ps(&[0, 1]), ps(&[3, 4])]).unwrap_err();
        assert_eq!(err, Error::NotACover { uncovered: ps(&[2]) });

        let c = cover(&d, &[&[0, 1], &[1], &[0, 1, 2]]);
        assert_eq!(c.members(), &[ps(&[0, 1, 2])]);
        assert_eq!(c.raw().len(), 3);
    }

    #[test]
    fn make_cover_rejects_non_open() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        assert!(make_cover(&k, vec![ps(&[2]), k.full()]).is_err());
        assert!(Cover::raw_family(&k, vec![ps(&[2]), k.full()]).is_ok());
    }

    #[test]
    fn join_examples() {
        let d = FiniteSpace::discrete(3);
        let u = cover(&d, &[&[0, 1], &[1, 2]]);
        let v = cover(&d, &[&[0], &[1, 2]]);
        assert_eq!(join(&u, &v).unwrap().members(), &[ps(&[0]), ps(&[1, 2])]);
        assert_eq!(join(&u, &Cover::trivial(&d)).unwrap(), u);
        assert_eq!(join(&u, &u).unwrap(), u);
        let other = Cover::trivial(&FiniteSpace::discrete(2));
        assert_eq!(join(&u, &other).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn refinement_examples() {
        let d = FiniteSpace::discrete(3);
        let u = cover(&d, &[&[0, 1], &[1, 2]]);
        let v = cover(&d, &[&[0], &[1], &[2]]);
        assert!(refines(&u, &v).unwrap());
        assert!(!refines(&v, &u).unwrap());
        assert!(refines(&Cover::trivial(&d), &u).unwrap());
        assert!(refines(&u, &join(&u, &v).unwrap()).unwrap());
    }

    #[test]
    fn pullback_examples() {
        let d = FiniteSpace::discrete(3);
        let u = cover(&d, &[&[1], &[0, 2]]);
        assert_eq!(pullback(&RMap::identity(&d), &u).unwrap(), u);

        let f = check_r_map(&d, vec![1, 2, 2]).unwrap();
        assert_eq!(pullback(&f, &u).unwrap().members(), &[ps(&[0]), ps(&[1, 2])]);

        let c = check_r_map(&d, vec![0, 0, 0]).unwrap();
        let singles = cover(&d, &[&[0], &[1], &[2]]);
        assert_eq!(pullback(&c, &singles).unwrap().members(), &[d.full()]);
    }

    #[test]
    fn pullback_requires_r_map() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        let f = RMap::assess(&k, vec![2, 2, 0, 2, 2]).unwrap();
        let u = Cover::trivial(&k);
        assert!(matches!(pullback(&f, &u), Err(Error::NotRMap { .. })));
        assert!(pullback_unchecked(&f, &u).is_ok());
    }

    #[test]
    fn restrict_examples() {
        let d = FiniteSpace::discrete(3);
        let u = cover(&d, &[&[0, 1], &[1, 2]]);
        let r = restrict(&u, d.full()).unwrap();
        assert_eq!(r.cover.members(), u.members());

        let r = restrict(&u, ps(&[0, 2])).unwrap();
        assert_eq!(r.cover.members(), &[ps(&[0]), ps(&[1])]);
        assert_eq!(r.sub.lift(ps(&[1])), ps(&[2]));

        let k = FiniteSpace::khalimsky(5).unwrap();
        let u = cover(&k, &[&[0, 1, 2, 3, 4], &[0, 1]]);
        let r = restrict(&u, ps(&[0, 1, 2])).unwrap();
        assert_eq!(r.cover.raw(), &[ps(&[0, 1]), ps(&[0, 1, 2])]);
        assert_eq!(r.trace_regular, vec![true, false]);
        assert_eq!(r.cover.members(), &[ps(&[0, 1, 2])]);
        assert_eq!(restrict(&u, PointSet::EMPTY).unwrap_err(), Error::EmptySubspace);
    }

    #[test]
    fn iterated_join_examples() {
        let d = FiniteSpace::discrete(2);
        let swap = check_r_map(&d, vec![1, 0]).unwrap();
        let u = cover(&d, &[&[0], &[1]]);
        assert_eq!(iterated_join(&swap, &u, 1).unwrap(), u);
        assert_eq!(iterated_join(&swap, &u, 3).unwrap(), u);
        let half = cover(&d, &[&[0, 1]]);
        assert_eq!(iterated_join(&RMap::identity(&d), &half, 4).unwrap(), half);
    }
}
