//! Self-maps of finite spaces: R-map verification, invariant sets,
//! restriction and inversion.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::topology::{FiniteSpace, Subspace};

/// Hard cap for exhaustive subset enumeration.
pub const MAX_ENUMERATION_POINTS: usize = 20;

/// Whether preimages of regular opens are regular open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RMapStatus {
    Verified,
    /// `witness` is a regular open whose preimage is not regular open.
    Failed { witness: PointSet },
}

/// A total self-map of a finite space with its R-map status.
#[derive(Debug, Clone)]
pub struct RMap {
    space: Arc<FiniteSpace>,
    table: Vec<usize>,
    status: RMapStatus,
}

impl PartialEq for RMap {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table && *self.space == *other.space
    }
}

impl Eq for RMap {}

/// Verifies `table` as an R-map of `space`; rejection carries the failing
/// regular open.
pub fn check_r_map(space: &Arc<FiniteSpace>, table: Vec<usize>) -> Result<RMap> {
    let f = RMap::assess(space, table)?;
    match f.status {
        RMapStatus::Verified => Ok(f),
        RMapStatus::Failed { witness } => Err(Error::NotRMap { witness }),
    }
}

impl RMap {
    /// Builds the map and records its R-map status without rejecting it.
    pub fn assess(space: &Arc<FiniteSpace>, table: Vec<usize>) -> Result<RMap> {
        let n = space.len();
        if table.len() != n {
            return Err(Error::BadTable {
                got: table.len(),
                expected: n,
            });
        }
        if let Some(&index) = table.iter().find(|&&y| y >= n) {
            return Err(Error::BadIndex { index, points: n });
        }
        let mut f = RMap {
            space: Arc::clone(space),
            table,
            status: RMapStatus::Verified,
        };
        if let Some(&witness) = space
            .regular_opens()
            .iter()
            .find(|&&r| !space.is_regular_open(f.preimage(r)))
        {
            f.status = RMapStatus::Failed { witness };
        }
        Ok(f)
    }

    pub fn identity(space: &Arc<FiniteSpace>) -> RMap {
        RMap {
            space: Arc::clone(space),
            table: (0..space.len()).collect(),
            status: RMapStatus::Verified,
        }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn status(&self) -> RMapStatus {
        self.status
    }

    pub fn is_r_map(&self) -> bool {
        self.status == RMapStatus::Verified
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `f⁻¹(A)`.
    pub fn preimage(&self, a: PointSet) -> PointSet {
        self.table
            .iter()
            .enumerate()
            .filter(|(_, &y)| a.contains(y))
            .map(|(x, _)| x)
            .collect()
    }

    /// `f(K)`.
    pub fn image(&self, k: PointSet) -> PointSet {
        k.iter().map(|x| self.table[x]).collect()
    }

    pub fn is_invariant(&self, k: PointSet) -> bool {
        self.image(k).is_subset(k)
    }

    pub fn is_bijective(&self) -> bool {
        self.image(self.space.full()) == self.space.full()
    }

    /// Smallest invariant superset of `a`: `a` together with all forward
    /// orbits of its points.
    pub fn orbit_closure(&self, a: PointSet) -> PointSet {
        let mut k = a;
        loop {
            let next = k.union(self.image(k));
            if next == k {
                return k;
            }
            k = next;
        }
    }

    /// The eventual image `⋂ fⁱ(X)`, the largest set with `f(K) = K`.
    pub fn eventual_image(&self) -> PointSet {
        let mut k = self.space.full();
        loop {
            let next = self.image(k);
            if next == k {
                return k;
            }
            k = next;
        }
    }

    /// `f ∘ g` (apply `g` first).
    pub fn compose(&self, g: &RMap) -> Result<RMap> {
        if *self.space != *g.space {
            return Err(Error::SpaceMismatch);
        }
        RMap::assess(&self.space, g.table.iter().map(|&y| self.table[y]).collect())
    }
}

/// A family of nonempty invariant sets.
///
/// In a finite space every subset is nearly compact relative to the space,
/// so invariance is the only membership condition.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InvariantFamily {
    pub members: Vec<PointSet>,
}

impl InvariantFamily {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, k: PointSet) -> bool {
        self.members.binary_search(&k).is_ok()
    }

    /// Nested pairs `(K₁, K₂)` with `K₁ ⊊ K₂`.
    pub fn nested_pairs(&self) -> impl Iterator<Item = (PointSet, PointSet)> + '_ {
        self.members.iter().flat_map(move |&a| {
            self.members
                .iter()
                .filter(move |&&b| a != b && a.is_subset(b))
                .map(move |&b| (a, b))
        })
    }
}

/// Every nonempty `K` with `f(K) ⊆ K`, by exhaustion over subsets, sorted
/// lexicographically.
pub fn invariant_sets(f: &RMap) -> Result<InvariantFamily> {
    let n = f.space.len();
    if n > MAX_ENUMERATION_POINTS {
        return Err(Error::TooLarge(format!(
            "invariant-set enumeration over {n} points exceeds the cap of {MAX_ENUMERATION_POINTS}"
        )));
    }
    let mut members: Vec<PointSet> = (1u64..(1u64 << n))
        .into_par_iter()
        .map(PointSet::from_bits)
        .filter(|&k| f.is_invariant(k))
        .collect();
    members.sort();
    Ok(InvariantFamily { members })
}

/// Same family as [`invariant_sets`], generated as all unions of point orbit
/// closures. Invariant sets are exactly such unions.
pub fn invariant_sets_by_orbits(f: &RMap) -> InvariantFamily {
    let generators: Vec<PointSet> = (0..f.space.len())
        .map(|x| f.orbit_closure(PointSet::singleton(x)))
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<PointSet> = generators.clone();
    while let Some(k) = stack.pop() {
        if !seen.insert(k) {
            continue;
        }
        for &g in &generators {
            let u = k.union(g);
            if !seen.contains(&u) {
                stack.push(u);
            }
        }
    }
    let mut members: Vec<PointSet> = seen.into_iter().collect();
    members.sort();
    InvariantFamily { members }
}

/// A map restricted to an invariant subspace.
#[derive(Debug, Clone)]
pub struct RestrictedMap {
    pub map: RMap,
    pub sub: Subspace,
}

/// `f|_K : K → K` on the subspace topology. The R-map status is re-derived
/// in the subspace and reported, not assumed.
pub fn restrict_map(f: &RMap, k: PointSet) -> Result<RestrictedMap> {
    f.space.check_set(k)?;
    if k.is_empty() {
        return Err(Error::EmptySubspace);
    }
    if !f.is_invariant(k) {
        return Err(Error::NotInvariant {
            set: k,
            image: f.image(k),
        });
    }
    let sub = f.space.subspace(k)?;
    let table = sub
        .embedding
        .iter()
        .map(|&p| {
            sub.lower(PointSet::singleton(f.table[p]))
                .first()
                .expect("invariant set maps into itself")
        })
        .collect();
    let map = RMap::assess(&sub.space, table)?;
    Ok(RestrictedMap { map, sub })
}

/// Inverse of a bijective map, itself checked to be an R-map.
pub fn inverse_map(f: &RMap) -> Result<RMap> {
    if !f.is_bijective() {
        return Err(Error::NotBijective);
    }
    let mut inv = vec![0; f.table.len()];
    for (x, &y) in f.table.iter().enumerate() {
        inv[y] = x;
    }
    check_r_map(&f.space, inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(v: &[usize]) -> PointSet {
        PointSet::from_indices(v.iter().copied())
    }

    #[test]
    fn any_map_on_discrete_is_r_map() {
        let d = FiniteSpace::discrete(3);
        for t in [vec![0, 0, 0], vec![2, 0, 1], vec![1, 1, 0]] {
            assert!(check_r_map(&d, t).is_ok());
        }
    }

    #[test]
    fn khalimsky_constant_maps() {
        let k = FiniteSpace::khalimsky(5).unwrap();
        assert!(check_r_map(&k, vec![2; 5]).is_ok());
        assert!(check_r_map(&k, vec![0; 5]).is_ok());
        let err = check_r_map(&k, vec![2, 2, 0, 2, 2]).unwrap_err();
        assert_eq!(err, Error::NotRMap { witness: ps(&[0, 1]) });
    }

    #[test]
    fn table_validation() {
        let d = FiniteSpace::discrete(2);
        assert_eq!(
            RMap::assess(&d, vec![0]).unwrap_err(),
            Error::BadTable { got: 1, expected: 2 }
        );
        assert_eq!(
            RMap::assess(&d, vec![0, 2]).unwrap_err(),
            Error::BadIndex { index: 2, points: 2 }
        );
    }

    #[test]
    fn image_and_invariance() {
        let d = FiniteSpace::discrete(3);
        let f = check_r_map(&d, vec![1, 0, 2]).unwrap();
        assert!(f.is_invariant(ps(&[0, 1])));
        assert!(f.is_invariant(d.full()));
        assert_eq!(f.image(ps(&[0])), ps(&[1]));
        assert!(!f.is_invariant(ps(&[0])));
    }

    #[test]
    fn invariant_family_examples() {
        let d = FiniteSpace::discrete(3);
        let f = check_r_map(&d, vec![1, 0, 2]).unwrap();
        let h = invariant_sets(&f).unwrap();
        assert_eq!(h.members, vec![ps(&[0, 1]), ps(&[0, 1, 2]), ps(&[2])]);

        let id = RMap::identity(&FiniteSpace::discrete(4));
        assert_eq!(invariant_sets(&id).unwrap().len(), 15);

        let cyc = check_r_map(&d, vec![1, 2, 0]).unwrap();
        assert_eq!(invariant_sets(&cyc).unwrap().members, vec![d.full()]);
    }

    #[test]
    fn orbit_generation_matches_exhaustion() {
        let k = FiniteSpace::khalimsky(6).unwrap();
        for t in [vec![0, 0, 2, 2, 4, 4], vec![1, 2, 3, 4, 5, 0], vec![5, 4, 3, 2, 1, 0]] {
            let f = RMap::assess(&k, t).unwrap();
            assert_eq!(invariant_sets(&f).unwrap(), invariant_sets_by_orbits(&f));
        }
    }

    #[test]
    fn restriction() {
        let d = FiniteSpace::discrete(3);
        let f = check_r_map(&d, vec![1, 0, 2]).unwrap();
        let r = restrict_map(&f, ps(&[0, 1])).unwrap();
        assert_eq!(r.map.table(), &[1, 0]);
        assert!(r.map.is_r_map());
        assert_eq!(*r.map.space(), FiniteSpace::discrete(2));

        let whole = restrict_map(&f, d.full()).unwrap();
        assert_eq!(whole.map, f);

        assert!(matches!(
            restrict_map(&f, ps(&[0])),
            Err(Error::NotInvariant { .. })
        ));
    }

    #[test]
    fn inverses() {
        let d = FiniteSpace::discrete(3);
        let swap = check_r_map(&d, vec![1, 0, 2]).unwrap();
        assert_eq!(inverse_map(&swap).unwrap(), swap);
        let cyc = check_r_map(&d, vec![1, 2, 0]).unwrap();
        assert_eq!(inverse_map(&cyc).unwrap().table(), &[2, 0, 1]);
        let c = check_r_map(&d, vec![0, 0, 0]).unwrap();
        assert_eq!(inverse_map(&c).unwrap_err(), Error::NotBijective);
    }

    #[test]
    fn eventual_image_is_onto() {
        let d = FiniteSpace::discrete(4);
        let f = check_r_map(&d, vec![1, 2, 1, 0]).unwrap();
        let k = f.eventual_image();
        assert_eq!(k, ps(&[1, 2]));
        assert_eq!(f.image(k), k);
    }
}
