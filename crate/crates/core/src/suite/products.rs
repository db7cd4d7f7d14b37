//! Checks on products of two seeded finite systems.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::checks::{guarded, n_of, Checker, Outcome, System};
use super::gen::{
    data_rng, gen_r_map, gen_space, instance_seed, random_invariant, random_regular_cover,
    InstanceSpec,
};
use crate::cover::{iterated_join, make_cover, refines, restrict, Cover};
use crate::dynamics::{invariant_sets, restrict_map, RMap};
use crate::entropy::{
    count_sequence, count_sequence_unchecked, entropy_on_k, entropy_sup_invariant,
    entropy_whole_space, EntropyOptions, EntropyReport,
};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::product::{product_space_with_limits, ProductSpace};
use crate::topology::{FiniteSpace, Limits};

/// Join depth for the product chains.
pub const M_PRODUCT: usize = 4;

/// Exhaustive sup over `H` runs up to this many members; beyond it the
/// maximal member `X` is used, which attains the sup by monotonicity.
const SUP_FAMILY_MAX: usize = 4096;

/// Room for a product of two 4-point discrete spaces.
pub const PRODUCT_LIMITS: Limits = Limits {
    max_points: 16,
    max_opens: 1 << 16,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductSpec {
    pub seed: u64,
    pub left: InstanceSpec,
    pub right: InstanceSpec,
}

impl ProductSpec {
    pub fn draw(seed: u64, max_factor_points: usize) -> ProductSpec {
        let max = max_factor_points.clamp(1, 4);
        ProductSpec {
            seed,
            left: InstanceSpec::draw(instance_seed(seed, "left", 0), max, None),
            right: InstanceSpec::draw(instance_seed(seed, "right", 0), max, None),
        }
    }
}

struct ProductSystem {
    s: System,
    t: System,
    p: ProductSpace,
    fh: RMap,
}

fn factor(spec: &InstanceSpec) -> Result<Option<System>> {
    let space = gen_space(spec)?;
    match gen_r_map(spec, &space) {
        Ok(f) => Ok(Some(System { space, f })),
        Err(Error::GaveUp { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Builds the product system; the product map's R-map status is itself an
/// assertion (asserted without proof for general spaces).
fn product_system(c: &mut Checker, spec: &ProductSpec) -> Result<Option<ProductSystem>> {
    let (Some(s), Some(t)) = (factor(&spec.left)?, factor(&spec.right)?) else {
        c.skip("no R-map drawn within the attempt cap");
        return Ok(None);
    };
    let p = product_space_with_limits(&s.space, &t.space, PRODUCT_LIMITS)?;
    let fh = p.product_map(&s.f, &t.f)?;
    c.ensure(fh.is_r_map(), || format!("f×h is not an R-map: {:?}", fh.status()));
    if !fh.is_r_map() {
        return Ok(None);
    }
    Ok(Some(ProductSystem { s, t, p, fh }))
}

macro_rules! require_product {
    ($c:expr, $spec:expr) => {
        match product_system($c, $spec)? {
            Some(ps) => ps,
            None => return Ok(()),
        }
    };
}

pub fn product_cover_lemma(spec: &ProductSpec) -> Outcome {
    guarded(|c| {
        let ps = require_product!(c, spec);
        let mut rng = data_rng(spec.seed);
        let u = random_regular_cover(&ps.s.space, &mut rng);
        let v = random_regular_cover(&ps.t.space, &mut rng);
        let uv = ps.p.product_cover(&u, &v)?;
        c.ensure(uv.is_regular(), || "U×V is not a regular cover".into());
        for m in 1..=M_PRODUCT {
            let ju = iterated_join(&ps.s.f, &u, m)?;
            let jv = iterated_join(&ps.t.f, &v, m)?;
            let juv = iterated_join(&ps.fh, &uv, m)?;
            let (nu, nv, nuv) = (
                n_of(&ju, ps.s.space.full())?,
                n_of(&jv, ps.t.space.full())?,
                n_of(&juv, ps.p.space.full())?,
            );
            c.ensure(nuv <= nu * nv, || format!("m={m}: N(U×V)={nuv} > {nu}·{nv}"));
            c.ensure(juv == ps.p.product_cover(&ju, &jv)?, || {
                format!("m={m}: join of products is not the product of joins")
            });
        }
        Ok(())
    })
}

pub fn projection_lemma(spec: &ProductSpec) -> Outcome {
    guarded(|c| {
        let ps = require_product!(c, spec);
        let mut rng = data_rng(spec.seed);
        let k = random_invariant(&ps.fh, ps.p.space.full(), &mut rng);
        let (kx, ky) = ps.p.projections(k);
        c.ensure(ps.s.f.is_invariant(kx), || format!("T_x(K)={kx} not f-invariant"));
        c.ensure(ps.t.f.is_invariant(ky), || format!("T_y(K)={ky} not h-invariant"));
        let hull = ps.p.box_set(kx, ky);
        c.ensure(k.is_subset(hull), || format!("K={k} ⊄ T_x(K)×T_y(K)={hull}"));
        if k != hull {
            c.note("strict containment K ⊊ T_x(K)×T_y(K)");
        }
        Ok(())
    })
}

fn check_refinement(c: &mut Checker, p: &ProductSpace, w: &Cover) -> Result<(Cover, Cover)> {
    let (u, v) = p.common_refinement_boxes(w)?;
    c.ensure(u.is_regular() && v.is_regular(), || "extracted covers are not regular".into());
    c.ensure(refines(w, &p.product_cover(&u, &v)?)?, || {
        format!("W ⊀ U×V for U={:?}, V={:?}", u.members(), v.members())
    });
    Ok((u, v))
}

pub fn common_refinement(spec: &ProductSpec) -> Outcome {
    guarded(|c| {
        let ps = require_product!(c, spec);
        let mut rng = data_rng(spec.seed);
        let w = random_regular_cover(&ps.p.space, &mut rng);
        check_refinement(c, &ps.p, &w)?;
        let u0 = random_regular_cover(&ps.s.space, &mut rng);
        let v0 = random_regular_cover(&ps.t.space, &mut rng);
        let boxes = ps.p.product_cover(&u0, &v0)?;
        check_refinement(c, &ps.p, &boxes)?;
        Ok(())
    })
}

pub fn product_theorem_n(spec: &ProductSpec) -> Outcome {
    guarded(|c| {
        let ps = require_product!(c, spec);
        let mut rng = data_rng(spec.seed);
        let w = random_regular_cover(&ps.p.space, &mut rng);
        let (u, v) = check_refinement(c, &ps.p, &w)?;
        let uv = ps.p.product_cover(&u, &v)?;
        for m in 1..=M_PRODUCT {
            let nw = n_of(&iterated_join(&ps.fh, &w, m)?, ps.p.space.full())?;
            let nuv = n_of(&iterated_join(&ps.fh, &uv, m)?, ps.p.space.full())?;
            let nu = n_of(&iterated_join(&ps.s.f, &u, m)?, ps.s.space.full())?;
            let nv = n_of(&iterated_join(&ps.t.f, &v, m)?, ps.t.space.full())?;
            c.ensure(nw <= nuv && nuv <= nu * nv, || {
                format!("m={m}: chain N(C)={nw}, N(U×V)={nuv}, N(U)·N(V)={nu}·{nv}")
            });
        }
        let opts = EntropyOptions::default();
        let e = entropy_whole_space(&ps.fh, opts)?;
        let (ef, eh) = (entropy_whole_space(&ps.s.f, opts)?, entropy_whole_space(&ps.t.f, opts)?);
        c.ensure(e.exact && ef.exact && eh.exact && e.value <= ef.value + eh.value, || {
            format!("Ent_n(f×h)={} > {}+{}", e.value, ef.value, eh.value)
        });
        Ok(())
    })
}

fn sup_entropy(c: &mut Checker, f: &RMap) -> Result<EntropyReport> {
    let opts = EntropyOptions::default();
    let h = invariant_sets(f)?;
    if h.len() <= SUP_FAMILY_MAX {
        entropy_sup_invariant(f, &h, opts)
    } else {
        c.note("sup over H taken at its maximal member X");
        entropy_on_k(f, f.space().full(), opts)
    }
}

/// A regular open of `space` whose trace on `k` is `trace`; the smallest
/// such under the catalogue order.
fn regular_extension(space: &FiniteSpace, k: PointSet, trace: PointSet) -> Option<PointSet> {
    space
        .regular_opens()
        .iter()
        .copied()
        .filter(|r| r.intersection(k) == trace)
        .min_by_key(|r| r.len())
}

/// Lifts a cover of the subspace on `k` to a regular cover of `space` by
/// regular extensions plus `X∖K`.
fn lift_cover(c: &mut Checker, space: &Arc<FiniteSpace>, k: PointSet, sub_embed: &[usize], sub: &Cover) -> Result<Option<Cover>> {
    let mut sets = Vec::new();
    for m in sub.members() {
        let trace: PointSet = m.iter().map(|i| sub_embed[i]).collect();
        match regular_extension(space, k, trace) {
            Some(r) => sets.push(r),
            None => {
                c.ensure(false, || format!("no regular open of X traces to {trace} on {k}"));
                return Ok(None);
            }
        }
    }
    let rest = k.complement(space.len());
    c.ensure(space.is_regular_open(rest), || format!("X∖K={rest} is not regular open"));
    sets.push(rest);
    Ok(Some(make_cover(space, sets)?))
}

pub fn product_theorem_big_n(spec: &ProductSpec) -> Outcome {
    guarded(|c| {
        let ps = require_product!(c, spec);
        let hausdorff = ps.s.space.is_hausdorff().holds && ps.t.space.is_hausdorff().holds;
        if !hausdorff || !ps.p.space.is_r_space().holds {
            c.skip("factors not Hausdorff or product not an R-space");
            return Ok(());
        }
        let mut rng = data_rng(spec.seed);
        let k = random_invariant(&ps.fh, ps.p.space.full(), &mut rng);
        let (kx, ky) = ps.p.projections(k);
        c.ensure(ps.s.f.is_invariant(kx) && ps.t.f.is_invariant(ky), || "projections not invariant".into());
        c.ensure(ps.s.space.is_regular_closed(kx) && ps.t.space.is_regular_closed(ky), || {
            format!("T_x(K)={kx} or T_y(K)={ky} not regular closed")
        });
        let hull = ps.p.box_set(kx, ky);
        c.ensure(k.is_subset(hull) && ps.fh.is_invariant(hull), || format!("K_x×K_y={hull} not invariant over K"));
        let w = random_regular_cover(&ps.p.space, &mut rng);
        let n_k = count_sequence(&ps.fh, &w, k, M_PRODUCT)?;
        let n_hull = count_sequence(&ps.fh, &w, hull, M_PRODUCT)?;
        c.ensure(n_k.iter().zip(&n_hull).all(|(a, b)| a <= b), || format!("N_K {n_k:?} > N_hull {n_hull:?}"));
        // restriction to the box, which is itself a product of subspaces
        let rm = restrict_map(&ps.fh, hull)?;
        let rw = restrict(&w, hull)?;
        let n_rest = count_sequence_unchecked(&rm.map, &rw.cover, rm.sub.space.full(), M_PRODUCT)?;
        c.ensure(n_rest == n_hull, || format!("restricted counts {n_rest:?} ≠ {n_hull:?}"));
        let sx = ps.s.space.subspace(kx)?;
        let sy = ps.t.space.subspace(ky)?;
        let sub_p = product_space_with_limits(&sx.space, &sy.space, PRODUCT_LIMITS)?;
        c.ensure(*sub_p.space == *rm.sub.space, || "K_x×K_y is not the product of subspaces".into());
        let w_sub = make_cover(&sub_p.space, rw.cover.raw().to_vec())?;
        let (u_sub, v_sub) = check_refinement(c, &sub_p, &w_sub)?;
        let (Some(u), Some(v)) = (
            lift_cover(c, &ps.s.space, kx, &sx.embedding, &u_sub)?,
            lift_cover(c, &ps.t.space, ky, &sy.embedding, &v_sub)?,
        ) else {
            return Ok(());
        };
        let n_u = count_sequence(&ps.s.f, &u, kx, M_PRODUCT)?;
        let n_v = count_sequence(&ps.t.f, &v, ky, M_PRODUCT)?;
        for m in 0..M_PRODUCT {
            c.ensure(n_hull[m] <= n_u[m] * n_v[m], || {
                format!("m={}: N_hull={} > N_Kx(U)·N_Ky(V)={}·{}", m + 1, n_hull[m], n_u[m], n_v[m])
            });
        }
        let e = sup_entropy(c, &ps.fh)?;
        let (ef, eh) = (sup_entropy(c, &ps.s.f)?, sup_entropy(c, &ps.t.f)?);
        c.ensure(e.exact && e.value <= ef.value + eh.value, || {
            format!("Ent_N(f×h)={} > {}+{}", e.value, ef.value, eh.value)
        });
        Ok(())
    })
}
