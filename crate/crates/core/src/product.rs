//! Products of two finite systems.
//!
//! Points of `S × T` are flattened row-major: `(x, y) ↦ x·|T| + y`. The
//! product topology is generated from the boxes `U(x) × U(y)` of minimal
//! neighbourhoods, which are the minimal neighbourhoods of the product.

use std::sync::Arc;

use crate::cover::{make_cover, Cover};
use crate::dynamics::RMap;
use crate::error::{Error, Result};
use crate::mincover::min_subcover_sets;
use crate::pointset::PointSet;
use crate::topology::{FiniteSpace, Limits};

#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub left: Arc<FiniteSpace>,
    pub right: Arc<FiniteSpace>,
    pub space: Arc<FiniteSpace>,
}

pub fn product_space(s: &Arc<FiniteSpace>, t: &Arc<FiniteSpace>) -> Result<ProductSpace> {
    product_space_with_limits(s, t, Limits::default())
}

pub fn product_space_with_limits(
    s: &Arc<FiniteSpace>,
    t: &Arc<FiniteSpace>,
    limits: Limits,
) -> Result<ProductSpace> {
    let n = s.len() * t.len();
    if n > limits.max_points {
        return Err(Error::TooLarge(format!(
            "product of {} and {} points exceeds the cap of {}",
            s.len(),
            t.len(),
            limits.max_points
        )));
    }
    let mut nbhds = Vec::with_capacity(n);
    for x in 0..s.len() {
        for y in 0..t.len() {
            nbhds.push(box_points(t.len(), s.min_nbhd(x), t.min_nbhd(y)));
        }
    }
    let space = FiniteSpace::from_min_nbhds_with_limits(nbhds, limits)?;
    let names = (0..s.len())
        .flat_map(|x| (0..t.len()).map(move |y| (x, y)))
        .map(|(x, y)| format!("({},{})", s.names()[x], t.names()[y]))
        .collect();
    Ok(ProductSpace {
        left: Arc::clone(s),
        right: Arc::clone(t),
        space: space.named(names)?,
    })
}

fn box_points(width: usize, a: PointSet, b: PointSet) -> PointSet {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * width + y))
        .collect()
}

impl ProductSpace {
    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.right.len() + y
    }

    pub fn coords(&self, p: usize) -> (usize, usize) {
        (p / self.right.len(), p % self.right.len())
    }

    /// `A × B`.
    pub fn box_set(&self, a: PointSet, b: PointSet) -> PointSet {
        box_points(self.right.len(), a, b)
    }

    /// `(T_x(K), T_y(K))`.
    pub fn projections(&self, k: PointSet) -> (PointSet, PointSet) {
        k.iter().fold((PointSet::EMPTY, PointSet::EMPTY), |(a, b), p| {
            let (x, y) = self.coords(p);
            (a.with(x), b.with(y))
        })
    }

    /// `f × h`; R-map status is re-derived on the product.
    pub fn product_map(&self, f: &RMap, h: &RMap) -> Result<RMap> {
        if **f.space() != *self.left || **h.space() != *self.right {
            return Err(Error::SpaceMismatch);
        }
        let table = (0..self.space.len())
            .map(|p| {
                let (x, y) = self.coords(p);
                self.index(f.apply(x), h.apply(y))
            })
            .collect();
        RMap::assess(&self.space, table)
    }

    /// `U × V = {A × B}`.
    pub fn product_cover(&self, u: &Cover, v: &Cover) -> Result<Cover> {
        if **u.space() != *self.left || **v.space() != *self.right {
            return Err(Error::SpaceMismatch);
        }
        let sets = u
            .members()
            .iter()
            .flat_map(|&a| v.members().iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.box_set(a, b))
            .collect();
        make_cover(&self.space, sets)
    }

    /// Regular covers `U` of `S` and `V` of `T` with `W ≺ U × V`, extracted
    /// the constructive way: per-`x` fibre covers first, then intersections
    /// of the collected `y`-neighbourhoods.
    pub fn common_refinement_boxes(&self, w: &Cover) -> Result<(Cover, Cover)> {
        if !crate::cover::same_space(w.space(), &self.space) {
            return Err(Error::SpaceMismatch);
        }
        let (s, t) = (&self.left, &self.right);
        let mut u_of_x = Vec::with_capacity(s.len());
        let mut fibre_vs = Vec::with_capacity(s.len());
        for x in 0..s.len() {
            let boxes: Vec<(PointSet, PointSet)> = (0..t.len())
                .map(|y| {
                    let p = PointSet::singleton(self.index(x, y));
                    let a = *w
                        .members()
                        .iter()
                        .find(|m| p.is_subset(**m))
                        .expect("W covers the product");
                    self.largest_box_inside(a, x, y)
                })
                .collect();
            let vs: Vec<PointSet> = boxes.iter().map(|b| b.1).collect();
            let sub = min_subcover_sets(&vs, t.full())?;
            let ux = sub
                .witness
                .iter()
                .fold(s.full(), |acc, &j| acc.intersection(boxes[j].0));
            u_of_x.push(ux);
            fibre_vs.push(sub.witness.iter().map(|&j| vs[j]).collect::<Vec<_>>());
        }
        let xs = min_subcover_sets(&u_of_x, s.full())?;
        let collected: Vec<PointSet> = xs
            .witness
            .iter()
            .flat_map(|&i| fibre_vs[i].iter().copied())
            .collect();
        let v_of_y: Vec<PointSet> = (0..t.len())
            .map(|y| {
                collected
                    .iter()
                    .filter(|v| v.contains(y))
                    .fold(t.full(), |acc, &v| acc.intersection(v))
            })
            .collect();
        let ys = min_subcover_sets(&v_of_y, t.full())?;
        let u = make_cover(s, xs.witness.iter().map(|&i| u_of_x[i]).collect())?;
        let v = make_cover(t, ys.witness.iter().map(|&j| v_of_y[j]).collect())?;
        Ok((u, v))
    }

    /// Regular opens `R ∋ x`, `Q ∋ y` with `R × Q ⊆ a`, largest first
    /// (ties: lexicographically least pair). `r(x) × r(y)` always qualifies.
    fn largest_box_inside(&self, a: PointSet, x: usize, y: usize) -> (PointSet, PointSet) {
        let (s, t) = (&self.left, &self.right);
        let mut best: Option<(usize, PointSet, PointSet)> = None;
        for &r in s.regular_opens().iter().filter(|r| r.contains(x)) {
            for &q in t.regular_opens().iter().filter(|q| q.contains(y)) {
                if !self.box_set(r, q).is_subset(a) {
                    continue;
                }
                let size = r.len() * q.len();
                if best.is_none_or(|(b, _, _)| size > b) {
                    best = Some((size, r, q));
                }
            }
        }
        let (_, r, q) = best.expect("minimal regular neighbourhood box lies inside a");
        (r, q)
    }
}
