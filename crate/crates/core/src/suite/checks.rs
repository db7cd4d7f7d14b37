//! Executable statements for finite R-dynamical systems. Each check draws
//! its data from the instance seed, so a spec replays to the same verdict.
//! Inequalities are compared on integer subcover counts.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gen::{
    data_rng, gen_r_map, gen_space, random_invariant, random_regular_cover, random_subset,
    InstanceSpec, SpaceKind,
};
use crate::cover::{iterated_join, join, pullback, refines, restrict, Cover};
use crate::dynamics::{inverse_map, invariant_sets, restrict_map, RMap};
use crate::entropy::{
    count_sequence, count_sequence_unchecked, entropy_on_k, entropy_rel_cover,
    entropy_sup_invariant, entropy_whole_space, finest_regular_cover, Certificate, EntropyOptions,
    EntropyReport,
};
use crate::error::{Error, Result};
use crate::mincover::{certificate_from, min_subcover, min_subcover_sets};
use crate::pointset::PointSet;
use crate::topology::{FiniteSpace, SpaceWitness};

/// Join depth for per-`m` integer comparisons.
pub const M_CHECK: usize = 5;

/// Sequence length for the subadditivity check.
const M_LIMIT: usize = 8;

/// Nested-pair sweep over `H(X,f)` runs when the family is at most this big.
const NESTED_SWEEP_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Hypotheses unmet; the reason is reported.
    Skipped(String),
    /// Hypotheses met; an empty failure list is a pass.
    Checked {
        failures: Vec<String>,
        notes: Vec<String>,
    },
}

impl Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Checked { failures, .. } if failures.is_empty())
    }
}

#[derive(Default)]
pub(crate) struct Checker {
    failures: Vec<String>,
    notes: Vec<String>,
    skipped: Option<String>,
}

impl Checker {
    pub(crate) fn ensure(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    pub(crate) fn note(&mut self, n: &str) {
        self.notes.push(n.to_string());
    }

    pub(crate) fn skip(&mut self, reason: impl Into<String>) {
        self.skipped = Some(reason.into());
    }
}

/// Runs a check body; engine errors become failures.
pub(crate) fn guarded(body: impl FnOnce(&mut Checker) -> Result<()>) -> Outcome {
    let mut c = Checker::default();
    if let Err(e) = body(&mut c) {
        c.failures.push(format!("engine error: {e}"));
    }
    match c.skipped {
        Some(reason) if c.failures.is_empty() => Outcome::Skipped(reason),
        _ => {
            let mut notes = c.notes;
            notes.sort();
            notes.dedup();
            Outcome::Checked {
                failures: c.failures,
                notes,
            }
        }
    }
}

pub(crate) struct System {
    pub space: Arc<FiniteSpace>,
    pub f: RMap,
}

/// Space and map of a spec; `None` when no R-map was drawn.
pub(crate) fn system(spec: &InstanceSpec) -> Result<Option<System>> {
    let space = gen_space(spec)?;
    match gen_r_map(spec, &space) {
        Ok(f) => Ok(Some(System { space, f })),
        Err(Error::GaveUp { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

macro_rules! require_system {
    ($c:expr, $spec:expr) => {
        match system($spec)? {
            Some(s) => s,
            None => {
                $c.skip("no R-map drawn within the attempt cap");
                return Ok(());
            }
        }
    };
}

pub(crate) fn n_of(u: &Cover, k: PointSet) -> Result<usize> {
    Ok(min_subcover(u, k)?.count)
}

fn show(family: &[PointSet]) -> String {
    let parts: Vec<String> = family.iter().map(|s| s.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// The four monotonicity statements relative to `k`; `equal_case` says
/// whether the pullback equality is expected.
fn cover_inequalities(
    c: &mut Checker,
    f: &RMap,
    u: &Cover,
    v: &Cover,
    k: PointSet,
    equal_case: bool,
) -> Result<()> {
    let space = f.space();
    let (nu, nv) = (n_of(u, k)?, n_of(v, k)?);
    // (a)
    for m in 1..=M_CHECK {
        let n = n_of(&iterated_join(f, u, m)?, k)?;
        c.ensure(n >= 1, || format!("(a) N_K of the {m}-fold join is {n}"));
    }
    c.ensure(nu >= 1 && nv >= 1, || format!("(a) N_K(U)={nu}, N_K(V)={nv}"));
    // (b)
    let w = join(u, v)?;
    c.ensure(refines(u, &w)?, || "(b) U ≺ U∨V fails".into());
    let nw = n_of(&w, k)?;
    c.ensure(nu <= nw, || format!("(b) N_K(U)={nu} > N_K(U∨V)={nw}"));
    let fine = finest_regular_cover(space);
    c.ensure(refines(u, &fine)?, || "(b) U ≺ finest cover fails".into());
    let nf = n_of(&fine, k)?;
    c.ensure(nu <= nf, || format!("(b) N_K(U)={nu} > N_K(finest)={nf}"));
    // (c)
    c.ensure(nw <= nu * nv, || format!("(c) N_K(U∨V)={nw} > {nu}·{nv}"));
    // (d)
    let p = pullback(f, u)?;
    let np = n_of(&p, k)?;
    c.ensure(np <= nu, || format!("(d) N_K(f⁻¹U)={np} > N_K(U)={nu} for U={}", show(u.members())));
    if equal_case {
        c.ensure(np == nu, || format!("(d) equality case: N_K(f⁻¹U)={np} ≠ N_K(U)={nu}"));
    }
    Ok(())
}

pub fn relative_bounds(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let u = random_regular_cover(&s.space, &mut rng);
        let v = random_regular_cover(&s.space, &mut rng);
        let k = random_invariant(&s.f, s.space.full(), &mut rng);
        let onto_k = s.f.image(k) == k;
        if onto_k {
            c.note("equality case f(K)=K exercised");
        }
        cover_inequalities(c, &s.f, &u, &v, k, onto_k)?;
        let core = s.f.eventual_image();
        c.ensure(s.f.image(core) == core, || format!("eventual image {core} is not mapped onto itself"));
        cover_inequalities(c, &s.f, &u, &v, core, true)?;
        c.note("equality case on the eventual image exercised");
        Ok(())
    })
}

pub fn whole_space_bounds(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let u = random_regular_cover(&s.space, &mut rng);
        let v = random_regular_cover(&s.space, &mut rng);
        let onto = s.f.image(s.space.full()) == s.space.full();
        if onto {
            c.note("equality case f onto exercised");
        }
        cover_inequalities(c, &s.f, &u, &v, s.space.full(), onto)
    })
}

pub fn monotone_in_k(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let k2 = random_invariant(&s.f, s.space.full(), &mut rng);
        let k1 = random_invariant(&s.f, k2, &mut rng);
        c.ensure(k1.is_subset(k2) && s.f.is_invariant(k1), || format!("generator: {k1} ⊄ {k2}"));
        let u = random_regular_cover(&s.space, &mut rng);
        for cover in [u, finest_regular_cover(&s.space)] {
            let a = count_sequence(&s.f, &cover, k1, M_CHECK)?;
            let b = count_sequence(&s.f, &cover, k2, M_CHECK)?;
            c.ensure(a.iter().zip(&b).all(|(x, y)| x <= y), || {
                format!("N_K1 {a:?} exceeds N_K2 {b:?} for K1={k1}, K2={k2}")
            });
        }
        let opts = EntropyOptions::default();
        let (e1, e2) = (entropy_on_k(&s.f, k1, opts)?, entropy_on_k(&s.f, k2, opts)?);
        c.ensure(e1.exact && e2.exact && e1.value <= e2.value, || {
            format!("Ent(f,K1)={} > Ent(f,K2)={}", e1.value, e2.value)
        });
        let h = invariant_sets(&s.f)?;
        if h.len() <= NESTED_SWEEP_MAX {
            let fine = finest_regular_cover(&s.space);
            let joins: Vec<Cover> = (1..=3)
                .map(|m| iterated_join(&s.f, &fine, m))
                .collect::<Result<_>>()?;
            for (a, b) in h.nested_pairs() {
                for (i, j) in joins.iter().enumerate() {
                    let (na, nb) = (n_of(j, a)?, n_of(j, b)?);
                    c.ensure(na <= nb, || format!("nested pair {a} ⊆ {b}, m={}: {na} > {nb}", i + 1));
                }
            }
            c.note("every nested pair of H swept");
        }
        Ok(())
    })
}

pub fn inverse_entropy(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        if !s.f.is_bijective() {
            c.skip("map is not a bijection");
            return Ok(());
        }
        let g = match inverse_map(&s.f) {
            Ok(g) => g,
            Err(Error::NotRMap { .. }) => {
                c.skip("inverse is not an R-map");
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let mut rng = data_rng(spec.seed);
        let u = random_regular_cover(&s.space, &mut rng);
        let k = random_invariant(&s.f, s.space.full(), &mut rng);
        c.ensure(s.f.image(k) == k && g.is_invariant(k), || format!("f(K) ≠ K for K={k}"));
        // forward images fⁱ(U) are the pullbacks under f⁻¹
        let forward = count_sequence(&g, &u, k, M_CHECK)?;
        let backward = count_sequence(&s.f, &u, k, M_CHECK)?;
        c.ensure(forward == backward, || {
            format!("N_K(⋁fⁱU)={forward:?} ≠ N_K(⋁f⁻ⁱU)={backward:?}, U={}, K={k}", show(u.members()))
        });
        let (hf, hg) = (invariant_sets(&s.f)?, invariant_sets(&g)?);
        c.ensure(hf == hg, || "H(X,f) ≠ H(X,f⁻¹)".into());
        let opts = EntropyOptions::default();
        let (ef, eg) = (entropy_sup_invariant(&s.f, &hf, opts)?, entropy_sup_invariant(&g, &hg, opts)?);
        c.ensure(ef.exact && eg.exact && ef.value == 0.0 && eg.value == 0.0, || {
            format!("Ent_N(f)={}, Ent_N(f⁻¹)={}", ef.value, eg.value)
        });
        let rf = restrict_map(&s.f, k)?;
        match (inverse_map(&rf.map), restrict_map(&g, k)) {
            (Ok(a), Ok(b)) => c.ensure(a.table() == b.map.table(), || {
                "restriction and inversion do not commute".into()
            }),
            _ => c.note("restricted inverse undefined"),
        }
        Ok(())
    })
}

pub fn limit_subadditive(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let u = random_regular_cover(&s.space, &mut rng);
        let n = count_sequence(&s.f, &u, s.space.full(), M_LIMIT)?;
        for m in 1..M_LIMIT {
            for k in 1..=M_LIMIT - m {
                let (a, b, ab) = (n[m - 1], n[k - 1], n[m + k - 1]);
                c.ensure(ab <= a * b, || format!("N_{{{}}}={ab} > N_{m}·N_{k}={a}·{b}", m + k));
            }
        }
        c.ensure(n.windows(2).all(|w| w[0] <= w[1]), || format!("counts not monotone: {n:?}"));
        let r = entropy_rel_cover(&s.f, &u, s.space.full(), EntropyOptions::default())?;
        c.ensure(r.exact && r.value == 0.0, || format!("value {} (exact {})", r.value, r.exact));
        c.ensure(r.fekete_inf >= r.value, || format!("fekete_inf {} < value {}", r.fekete_inf, r.value));
        let a1 = r.a_seq[0];
        c.ensure(
            r.a_seq
                .iter()
                .enumerate()
                .all(|(i, a)| a / (i + 1) as f64 <= a1 + 1e-12),
            || format!("a_m/m exceeds a_1 in {:?}", r.a_seq),
        );
        Ok(())
    })
}

pub fn n_equals_big_n(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let u = random_regular_cover(&s.space, &mut rng);
        let k = random_invariant(&s.f, s.space.full(), &mut rng);
        let rm = restrict_map(&s.f, k)?;
        let rc = restrict(&u, k)?;
        if !rm.map.is_r_map() {
            c.note("f|K is not an R-map of the subspace");
        }
        if rc.trace_regular.iter().any(|r| !r) {
            c.note("some trace is not regular open in the subspace");
        }
        let lhs = count_sequence_unchecked(&rm.map, &rc.cover, rm.sub.space.full(), M_CHECK)?;
        let rhs = count_sequence(&s.f, &u, k, M_CHECK)?;
        c.ensure(lhs == rhs, || {
            format!("N_n over (f|K, U|K) {lhs:?} ≠ N_K over (f, U) {rhs:?}, K={k}, U={}", show(u.members()))
        });
        Ok(())
    })
}

fn same_certificate(a: &EntropyReport, b: &EntropyReport) -> bool {
    matches!(
        (&a.certificate, &b.certificate),
        (Certificate::CoverCycle { .. }, Certificate::CoverCycle { .. })
    ) && a.cycle == b.cycle
}

pub fn coincidence(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let opts = EntropyOptions::default();
        let small = entropy_whole_space(&s.f, opts)?;
        let big = entropy_sup_invariant(&s.f, &invariant_sets(&s.f)?, opts)?;
        c.ensure(small.exact && big.exact && small.value == 0.0 && big.value == 0.0, || {
            format!("Ent_n={} Ent_N={}", small.value, big.value)
        });
        c.ensure(same_certificate(&small, &big), || {
            format!("certificates differ: {:?} vs {:?}", small.certificate, big.certificate)
        });
        c.ensure(small == big, || "reports differ".into());
        Ok(())
    })
}

pub fn zero_certificate(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let k = random_invariant(&s.f, s.space.full(), &mut rng);
        let catalogue = s.space.regular_opens().len();
        let covers = [finest_regular_cover(&s.space), random_regular_cover(&s.space, &mut rng)];
        for u in &covers {
            let r = entropy_rel_cover(&s.f, u, k, EntropyOptions::default())?;
            match r.cycle {
                Some(cy) => {
                    let detected = cy.preperiod + cy.period;
                    c.ensure(detected <= catalogue, || {
                        format!("cycle detected at m={detected} > catalogue size {catalogue}")
                    });
                    c.ensure(
                        r.certificate
                            == Certificate::CoverCycle {
                                preperiod: cy.preperiod,
                                period: cy.period,
                            },
                        || format!("certificate {:?} does not match cycle", r.certificate),
                    );
                    if cy.period == 1 {
                        c.note("period-1 cycle");
                    }
                }
                None => c.ensure(false, || "no cycle certificate".into()),
            }
            c.ensure(r.exact && r.value == 0.0, || format!("value {} exact {}", r.value, r.exact));
        }
        Ok(())
    })
}

/// `int(cl(A))` from the open family alone, without minimal neighbourhoods.
fn regularize_by_opens(space: &FiniteSpace, a: PointSet) -> PointSet {
    let n = space.len();
    let interior = |b: PointSet| {
        space
            .opens()
            .iter()
            .filter(|o| o.is_subset(b))
            .fold(PointSet::EMPTY, |acc, &o| acc.union(o))
    };
    let closure = interior(a.complement(n)).complement(n);
    interior(closure)
}

pub fn r_space_predicates(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let space = gen_space(spec)?;
        let cat: Vec<PointSet> = space
            .opens()
            .iter()
            .copied()
            .filter(|&o| regularize_by_opens(&space, o) == o)
            .collect();
        c.ensure(cat == space.regular_opens(), || "regular-open catalogue disagrees with oracle".into());
        let oracle_r = cat.iter().all(|&a| {
            cat.iter()
                .all(|&b| regularize_by_opens(&space, a.union(b)) == a.union(b))
        });
        let v = space.is_r_space();
        c.ensure(v.holds == oracle_r, || format!("R-space verdict {} vs oracle {oracle_r}", v.holds));
        if let Some(w) = &v.witness {
            c.ensure(w.recheck(&space), || format!("witness {w} does not recheck"));
        }
        let oracle_h = (0..space.len()).all(|x| {
            (0..space.len()).filter(|&y| y != x).all(|y| {
                space.opens().iter().filter(|o| o.contains(x)).any(|gx| {
                    space
                        .opens()
                        .iter()
                        .any(|gy| gy.contains(y) && !gx.intersects(*gy))
                })
            })
        });
        let hv = space.is_hausdorff();
        c.ensure(hv.holds == oracle_h, || format!("Hausdorff verdict {} vs oracle {oracle_h}", hv.holds));
        let discrete = space.opens().len() == 1usize << space.len();
        c.ensure(hv.holds == discrete, || "Hausdorff does not coincide with discreteness".into());
        if let Some(w) = &hv.witness {
            c.ensure(w.recheck(&space), || format!("witness {w} does not recheck"));
        }
        if spec.kind == SpaceKind::Khalimsky && spec.n == 5 {
            let expected = SpaceWitness::UnionNotRegular {
                a: PointSet::from_indices([0, 1]),
                b: PointSet::from_indices([3, 4]),
                regularized: space.full(),
            };
            c.ensure(v.witness == Some(expected), || format!("Khalimsky witness {:?}", v.witness));
        }
        Ok(())
    })
}

fn hausdorff_r_space(space: &FiniteSpace) -> bool {
    space.is_hausdorff().holds && space.is_r_space().holds
}

pub fn hausdorff_lemmas(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let space = gen_space(spec)?;
        if !hausdorff_r_space(&space) {
            c.skip("space is not Hausdorff and R-space");
            return Ok(());
        }
        let mut rng = data_rng(spec.seed);
        let a = random_subset(space.full(), &mut rng);
        c.ensure(space.is_regular_closed(a), || format!("{a} is not regular closed"));
        let outside = a.complement(space.len());
        let Some(p) = outside.iter().nth(rng.gen_range(0..outside.len().max(1))) else {
            c.note("A = X, separation lemmas vacuous");
            return Ok(());
        };
        // separating opens U(p), U(a) for each a ∈ A, then a finite subfamily
        let mut enlarged = Vec::new();
        let mut g_parts = Vec::new();
        for x in a.iter() {
            let (gp, hx) = (space.min_nbhd(p), space.min_nbhd(x));
            c.ensure(!gp.intersects(hx), || format!("U({p}) meets U({x})"));
            enlarged.push(space.regularize(hx));
            g_parts.push(space.regularize(gp));
        }
        let sub = min_subcover_sets(&enlarged, a)?;
        let h = sub.witness.iter().fold(PointSet::EMPTY, |acc, &i| acc.union(enlarged[i]));
        let g = sub.witness.iter().fold(space.full(), |acc, &i| acc.intersection(g_parts[i]));
        c.ensure(space.is_regular_open(h) && space.is_regular_open(g), || {
            format!("G={g} or H={h} not regular open")
        });
        c.ensure(a.is_subset(h) && g.contains(p), || format!("p={p}, G={g}, A={a}, H={h}"));
        c.ensure(!g.intersects(h), || format!("G={g} meets H={h}"));
        c.ensure(!g.intersects(a), || format!("G={g} meets A={a}"));
        Ok(())
    })
}

pub fn hausdorff_coincidence(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        if !hausdorff_r_space(&s.space) {
            c.skip("space is not Hausdorff and R-space");
            return Ok(());
        }
        let mut rng = data_rng(spec.seed);
        let k = random_invariant(&s.f, s.space.full(), &mut rng);
        let rm = restrict_map(&s.f, k)?;
        c.ensure(rm.map.is_r_map(), || "f|K is not an R-map".into());
        let opts = EntropyOptions::default();
        let big_k = entropy_on_k(&s.f, k, opts)?;
        let small_k = entropy_whole_space(&rm.map, opts)?;
        c.ensure(big_k.value == small_k.value && big_k.exact && small_k.exact, || {
            format!("(a) Ent_N(f,K)={} ≠ Ent_n(f|K)={}", big_k.value, small_k.value)
        });
        c.ensure(big_k.counts == small_k.counts, || {
            format!("(a) counts {:?} vs {:?}", big_k.counts, small_k.counts)
        });
        let big = entropy_sup_invariant(&s.f, &invariant_sets(&s.f)?, opts)?;
        c.ensure(big.value == small_k.value, || {
            format!("(b) Ent_N(f)={} ≠ Ent_n(f|K)={}", big.value, small_k.value)
        });
        Ok(())
    })
}

pub fn image_lemma(spec: &InstanceSpec) -> Outcome {
    guarded(|c| {
        let s = require_system!(c, spec);
        let mut rng = data_rng(spec.seed);
        let a = random_subset(s.space.full(), &mut rng);
        let w = random_regular_cover(&s.space, &mut rng);
        let fa = s.f.image(a);
        // one member through each f(x), pulled back to a regular cover of A
        let picked: Vec<PointSet> = a
            .iter()
            .map(|x| *w.members().iter().find(|m| m.contains(s.f.apply(x))).expect("W covers"))
            .collect();
        let pulled: Vec<PointSet> = picked.iter().map(|&m| s.f.preimage(m)).collect();
        c.ensure(pulled.iter().all(|&p| s.space.is_regular_open(p)), || {
            "a pulled-back member is not regular open".into()
        });
        let sub = min_subcover_sets(&pulled, a)?;
        let image_cover = sub.witness.iter().fold(PointSet::EMPTY, |acc, &i| acc.union(picked[i]));
        c.ensure(fa.is_subset(image_cover), || format!("f(A)={fa} ⊄ {image_cover}"));
        let cert = certificate_from(w.members(), fa)?;
        c.ensure(cert.verifies(), || "near-compactness certificate fails".into());
        let own = s.space.nearly_compact_certificate(fa)?;
        c.ensure(own.verifies(), || "finest-cover certificate fails".into());
        Ok(())
    })
}
