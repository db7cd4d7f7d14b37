//! Finite topological spaces presented by their open families.
//!
//! Every finite topology is an Alexandrov topology: each point `x` has a
//! smallest open neighbourhood `U(x)`, and the opens are exactly the unions
//! of these. Interior and closure are computed from the minimal
//! neighbourhoods (`int A = ⋃{U(x) : U(x) ⊆ A}`, `cl A = {x : U(x) ∩ A ≠ ∅}`).
//!
//! Spaces are validated on construction and never silently completed: an
//! open family that is missing a union or an intersection is rejected.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mincover::{certificate_from, NearCompactCertificate};
use crate::pointset::{PointSet, MAX_WIDTH};

/// Environment variable overriding [`Limits`]: `P` or `P,O` for a point cap
/// `P` and an open-family cap `O`.
pub const SIZE_CAP_ENV: &str = "REGENT_SIZE_CAP";

/// Desk-scale caps that keep the exhaustive oracles feasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_points: usize,
    pub max_opens: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_points: 20,
            max_opens: 4096,
        }
    }
}

impl Limits {
    /// Defaults, overridden by `REGENT_SIZE_CAP` when set and well formed.
    pub fn from_env() -> Self {
        std::env::var(SIZE_CAP_ENV)
            .ok()
            .and_then(|v| Limits::parse(&v))
            .unwrap_or_default()
    }

    pub fn parse(spec: &str) -> Option<Self> {
        let mut parts = spec.split(',').map(|p| p.trim().parse::<usize>());
        let max_points = parts.next()?.ok()?.min(MAX_WIDTH);
        let max_opens = match parts.next() {
            Some(p) => p.ok()?,
            None => Limits::default().max_opens,
        };
        if parts.next().is_some() {
            return None;
        }
        Some(Limits {
            max_points,
            max_opens,
        })
    }
}

/// A validated finite topological space.
#[derive(Clone)]
pub struct FiniteSpace {
    n: usize,
    opens: Vec<PointSet>,
    names: Vec<String>,
    min_nbhds: Vec<PointSet>,
    regular: Vec<PointSet>,
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.opens == other.opens
    }
}

impl Eq for FiniteSpace {}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteSpace")
            .field("n", &self.n)
            .field("opens", &self.opens)
            .finish()
    }
}

impl FiniteSpace {
    /// Validates an explicit open family under the default [`Limits`].
    pub fn new(n: usize, opens: Vec<PointSet>) -> Result<Arc<Self>> {
        Self::with_limits(n, opens, Limits::default())
    }

    pub fn with_limits(n: usize, opens: Vec<PointSet>, limits: Limits) -> Result<Arc<Self>> {
        check_point_count(n, limits)?;
        for o in &opens {
            if !o.within(n) {
                let index = o.iter().find(|&i| i >= n).unwrap_or(n);
                return Err(Error::BadIndex { index, points: n });
            }
        }
        let index: HashSet<PointSet> = opens.iter().copied().collect();
        if index.len() > limits.max_opens {
            return Err(Error::TooLarge(format!(
                "{} opens exceed the cap of {}",
                index.len(),
                limits.max_opens
            )));
        }
        let full = PointSet::full(n);
        if !index.contains(&PointSet::EMPTY) {
            return Err(Error::NotATopology("the empty set is not open".into()));
        }
        if !index.contains(&full) {
            return Err(Error::NotATopology(format!("the whole space {full} is not open")));
        }
        let mut sorted: Vec<PointSet> = index.iter().copied().collect();
        sorted.sort();
        for (i, &a) in sorted.iter().enumerate() {
            for &b in &sorted[i + 1..] {
                if !index.contains(&a.union(b)) {
                    return Err(Error::NotATopology(format!(
                        "union {a} ∪ {b} = {} is not open",
                        a.union(b)
                    )));
                }
                if !index.contains(&a.intersection(b)) {
                    return Err(Error::NotATopology(format!(
                        "intersection {a} ∩ {b} = {} is not open",
                        a.intersection(b)
                    )));
                }
            }
        }
        let min_nbhds = (0..n)
            .map(|x| {
                sorted
                    .iter()
                    .filter(|o| o.contains(x))
                    .fold(full, |acc, &o| acc.intersection(o))
            })
            .collect();
        Ok(Arc::new(Self::assemble(n, sorted, min_nbhds)))
    }

    /// Builds the space whose minimal neighbourhoods are `nbhds` (a preorder
    /// presentation), generating every union.
    pub fn from_min_nbhds(nbhds: Vec<PointSet>) -> Result<Arc<Self>> {
        Self::from_min_nbhds_with_limits(nbhds, Limits::default())
    }

    pub fn from_min_nbhds_with_limits(nbhds: Vec<PointSet>, limits: Limits) -> Result<Arc<Self>> {
        let n = nbhds.len();
        check_point_count(n, limits)?;
        for (x, &u) in nbhds.iter().enumerate() {
            if !u.within(n) {
                let index = u.iter().find(|&i| i >= n).unwrap_or(n);
                return Err(Error::BadIndex { index, points: n });
            }
            if !u.contains(x) {
                return Err(Error::NotATopology(format!(
                    "minimal neighbourhood {u} of point {x} does not contain it"
                )));
            }
            for y in u {
                if !nbhds[y].is_subset(u) {
                    return Err(Error::NotATopology(format!(
                        "{y} ∈ U({x}) = {u} but U({y}) = {} ⊄ U({x})",
                        nbhds[y]
                    )));
                }
            }
        }
        let mut seen: HashSet<PointSet> = HashSet::new();
        seen.insert(PointSet::EMPTY);
        let mut frontier = vec![PointSet::EMPTY];
        while let Some(o) = frontier.pop() {
            for (x, &u) in nbhds.iter().enumerate() {
                if o.contains(x) {
                    continue;
                }
                let next = o.union(u);
                if seen.insert(next) {
                    if seen.len() > limits.max_opens {
                        return Err(Error::TooLarge(format!(
                            "generated topology exceeds the cap of {} opens",
                            limits.max_opens
                        )));
                    }
                    frontier.push(next);
                }
            }
        }
        let mut sorted: Vec<PointSet> = seen.into_iter().collect();
        sorted.sort();
        Ok(Arc::new(Self::assemble(n, sorted, nbhds)))
    }

    fn assemble(n: usize, opens: Vec<PointSet>, min_nbhds: Vec<PointSet>) -> Self {
        let mut space = FiniteSpace {
            n,
            opens,
            names: (0..n).map(|i| i.to_string()).collect(),
            min_nbhds,
            regular: Vec::new(),
        };
        // every regular open is int(cl(U)) of itself, so images over opens suffice
        let mut regular: Vec<PointSet> = space
            .opens
            .iter()
            .map(|&u| space.regularize(u))
            .collect();
        regular.sort_unstable();
        regular.dedup();
        space.regular = regular;
        space
    }

    /// Replaces the point labels. Labels are cosmetic: they do not
    /// participate in equality.
    pub fn named(mut self: Arc<Self>, names: Vec<String>) -> Result<Arc<Self>> {
        if names.len() != self.n {
            return Err(Error::NotATopology(format!(
                "{} labels for {} points",
                names.len(),
                self.n
            )));
        }
        Arc::make_mut(&mut self).names = names;
        Ok(self)
    }

    /// The discrete topology on `n` points.
    pub fn discrete(n: usize) -> Arc<Self> {
        Self::from_min_nbhds_with_limits(
            (0..n).map(PointSet::singleton).collect(),
            Limits {
                max_points: MAX_WIDTH,
                max_opens: usize::MAX,
            },
        )
        .expect("discrete topology is valid")
    }

    /// Two points with opens `{∅, {1}, {0,1}}`.
    pub fn sierpinski() -> Arc<Self> {
        Self::new(
            2,
            vec![
                PointSet::EMPTY,
                PointSet::singleton(1),
                PointSet::full(2),
            ],
        )
        .expect("Sierpiński space is valid")
    }

    /// The Khalimsky segment on `n` points: odd points are open, the
    /// smallest neighbourhood of an even point is itself plus its neighbours.
    pub fn khalimsky(n: usize) -> Result<Arc<Self>> {
        let nbhds = (0..n)
            .map(|i| {
                if i % 2 == 1 {
                    PointSet::singleton(i)
                } else {
                    let lo = i.saturating_sub(1);
                    let hi = (i + 1).min(n - 1);
                    PointSet::from_indices(lo..=hi)
                }
            })
            .collect();
        Self::from_min_nbhds(nbhds)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.n)
    }

    /// The open family, sorted lexicographically.
    pub fn opens(&self) -> &[PointSet] {
        &self.opens
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Smallest open set containing `x`.
    pub fn min_nbhd(&self, x: usize) -> PointSet {
        self.min_nbhds[x]
    }

    pub fn min_nbhds(&self) -> &[PointSet] {
        &self.min_nbhds
    }

    pub fn check_set(&self, a: PointSet) -> Result<()> {
        if a.within(self.n) {
            Ok(())
        } else {
            Err(Error::BadIndex {
                index: a.iter().find(|&i| i >= self.n).unwrap_or(self.n),
                points: self.n,
            })
        }
    }

    /// `A` is open iff it contains `U(x)` for each of its points.
    pub fn is_open(&self, a: PointSet) -> bool {
        a.within(self.n) && a.iter().all(|x| self.min_nbhds[x].is_subset(a))
    }

    pub fn interior(&self, a: PointSet) -> PointSet {
        self.min_nbhds
            .iter()
            .filter(|u| u.is_subset(a))
            .fold(PointSet::EMPTY, |acc, &u| acc.union(u))
    }

    pub fn closure(&self, a: PointSet) -> PointSet {
        (0..self.n)
            .filter(|&x| self.min_nbhds[x].intersects(a))
            .collect()
    }

    /// `int(cl(A))`, the regularisation of `A`.
    pub fn regularize(&self, a: PointSet) -> PointSet {
        self.interior(self.closure(a))
    }

    pub fn is_regular_open(&self, a: PointSet) -> bool {
        a.within(self.n) && self.regularize(a) == a
    }

    /// `A` is regular closed iff `A = cl(int(A))`.
    pub fn is_regular_closed(&self, a: PointSet) -> bool {
        self.closure(self.interior(a)) == a
    }

    /// The regular-open catalogue, deduplicated and sorted lexicographically.
    pub fn regular_opens(&self) -> &[PointSet] {
        &self.regular
    }

    /// `r(x) = int cl U(x)`, the smallest regular open containing `x`: any
    /// regular open through `x` contains `U(x)` and hence `int cl U(x)`.
    pub fn min_regular_nbhd(&self, x: usize) -> PointSet {
        self.regularize(self.min_nbhds[x])
    }

    /// Hausdorff check. For a finite space two points are separable iff
    /// their minimal neighbourhoods are disjoint, so a finite space is
    /// Hausdorff exactly when it is discrete.
    pub fn is_hausdorff(&self) -> Verdict {
        for x in 0..self.n {
            for y in x + 1..self.n {
                if self.min_nbhds[x].intersects(self.min_nbhds[y]) {
                    return Verdict::fails(SpaceWitness::NonSeparable { x, y });
                }
            }
        }
        Verdict::holds()
    }

    /// R-space check: unions of regular opens stay regular open. Every
    /// regular open `A` is the union of the `r(x)` with `x ∈ A`, so it is
    /// enough to test `A ∪ r(x)` for each regular `A` and each point `x`.
    pub fn is_r_space(&self) -> Verdict {
        let mut generators: Vec<PointSet> = (0..self.n).map(|x| self.min_regular_nbhd(x)).collect();
        generators.sort();
        generators.dedup();
        for &a in &self.regular {
            for &b in generators.iter().filter(|b| !b.is_subset(a)) {
                let u = a.union(b);
                if !self.is_regular_open(u) {
                    return Verdict::fails(SpaceWitness::UnionNotRegular {
                        a,
                        b,
                        regularized: self.regularize(u),
                    });
                }
            }
        }
        Verdict::holds()
    }

    /// Explicit finite subfamily of the finest regular cover `{r(x)}`
    /// covering `y`; always exists in a finite space.
    pub fn nearly_compact_certificate(&self, y: PointSet) -> Result<NearCompactCertificate> {
        self.check_set(y)?;
        let finest: Vec<PointSet> = (0..self.n).map(|x| self.min_regular_nbhd(x)).collect();
        certificate_from(&finest, y)
    }

    /// The subspace on `k` with the trace topology, reindexed in ascending
    /// order of the parent indices.
    pub fn subspace(self: &Arc<Self>, k: PointSet) -> Result<Subspace> {
        self.check_set(k)?;
        if k.is_empty() {
            return Err(Error::EmptySubspace);
        }
        let embedding: Vec<usize> = k.to_vec();
        if k == self.full() {
            return Ok(Subspace {
                space: Arc::clone(self),
                embedding,
                parent: Arc::clone(self),
            });
        }
        let reindex = |s: PointSet| -> PointSet {
            embedding
                .iter()
                .enumerate()
                .filter(|(_, &p)| s.contains(p))
                .map(|(i, _)| i)
                .collect()
        };
        let mut opens: Vec<PointSet> = self
            .opens
            .iter()
            .map(|&o| reindex(o))
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        opens.sort();
        let min_nbhds = embedding.iter().map(|&p| reindex(self.min_nbhds[p])).collect();
        let mut sub = Self::assemble(embedding.len(), opens, min_nbhds);
        sub.names = embedding.iter().map(|&p| self.names[p].clone()).collect();
        Ok(Subspace {
            space: Arc::new(sub),
            embedding,
            parent: Arc::clone(self),
        })
    }
}

impl Serialize for FiniteSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::docs::SpaceDoc::from_space(self).serialize(s)
    }
}

fn check_point_count(n: usize, limits: Limits) -> Result<()> {
    if n == 0 {
        return Err(Error::NotATopology("a space needs at least one point".into()));
    }
    if n > limits.max_points || n > MAX_WIDTH {
        return Err(Error::TooLarge(format!(
            "{n} points exceed the cap of {}",
            limits.max_points.min(MAX_WIDTH)
        )));
    }
    Ok(())
}

/// A subspace together with its embedding into the parent.
#[derive(Debug, Clone)]
pub struct Subspace {
    pub space: Arc<FiniteSpace>,
    /// `embedding[i]` is the parent index of subspace point `i`.
    pub embedding: Vec<usize>,
    pub parent: Arc<FiniteSpace>,
}

impl Subspace {
    /// `A ∩ K`, reindexed into the subspace.
    pub fn lower(&self, a: PointSet) -> PointSet {
        self.embedding
            .iter()
            .enumerate()
            .filter(|(_, &p)| a.contains(p))
            .map(|(i, _)| i)
            .collect()
    }

    /// Parent-indexed copy of a subspace set.
    pub fn lift(&self, b: PointSet) -> PointSet {
        b.iter().map(|i| self.embedding[i]).collect()
    }

    /// `K` as a parent set.
    pub fn carrier(&self) -> PointSet {
        self.embedding.iter().copied().collect()
    }
}

/// Evidence attached to a space-level predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceWitness {
    /// Two distinct points whose minimal neighbourhoods meet.
    NonSeparable { x: usize, y: usize },
    /// Two regular opens whose union is not regular open.
    UnionNotRegular {
        a: PointSet,
        b: PointSet,
        regularized: PointSet,
    },
}

impl SpaceWitness {
    /// Re-checks the witness against `space`; true iff it still refutes the
    /// predicate it was produced for.
    pub fn recheck(&self, space: &FiniteSpace) -> bool {
        match *self {
            SpaceWitness::NonSeparable { x, y } => {
                x != y
                    && x < space.len()
                    && y < space.len()
                    && space
                        .opens()
                        .iter()
                        .filter(|o| o.contains(x))
                        .all(|gx| {
                            space
                                .opens()
                                .iter()
                                .filter(|o| o.contains(y))
                                .all(|gy| gx.intersects(*gy))
                        })
            }
            SpaceWitness::UnionNotRegular { a, b, regularized } => {
                let u = a.union(b);
                space.is_regular_open(a)
                    && space.is_regular_open(b)
                    && space.regularize(u) == regularized
                    && regularized != u
            }
        }
    }
}

impl fmt::Display for SpaceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceWitness::NonSeparable { x, y } => write!(f, "points {x} and {y} cannot be separated"),
            SpaceWitness::UnionNotRegular { a, b, regularized } => {
                write!(f, "{a}∪{b} has int(cl) = {regularized}")
            }
        }
    }
}

/// Outcome of a space-level predicate; failures carry a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<SpaceWitness>,
}

impl Verdict {
    fn holds() -> Self {
        Verdict {
            holds: true,
            witness: None,
        }
    }

    fn fails(w: SpaceWitness) -> Self {
        Verdict {
            holds: false,
            witness: Some(w),
        }
    }
}
