//! Randomised, seed-replayable verification of the theory's statements.
//!
//! Each statement owns an instance stream keyed by `(seed, id, index)`.
//! Instances are checked in parallel and assembled in `(statement, index)`
//! order, so a report is byte-identical for identical configurations.

pub mod checks;
pub mod gen;
pub mod products;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::Outcome;
pub use gen::{gen_r_map, gen_space, instance_seed, InstanceSpec, MapPolicy, SpaceKind};
pub use products::ProductSpec;

use crate::mincover::{brute_force_min_subcover_sets, min_subcover_sets};
use crate::pointset::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Instances per finite-space statement.
    pub instances: usize,
    pub max_points: usize,
    pub product_instances: usize,
    pub max_factor_points: usize,
    pub mincover_instances: usize,
    pub mincover_universe: usize,
    pub mincover_members: usize,
    /// Statement ids to run; empty runs all.
    pub theorems: Vec<String>,
    /// Group tags to run; empty runs all.
    pub sections: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            instances: 200,
            max_points: 6,
            product_instances: 100,
            max_factor_points: 4,
            mincover_instances: 500,
            mincover_universe: 12,
            mincover_members: 12,
            theorems: Vec::new(),
            sections: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinCoverSpec {
    pub seed: u64,
    pub universe: usize,
    pub members: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "stream", rename_all = "snake_case")]
pub enum Instance {
    Finite(InstanceSpec),
    Product(ProductSpec),
    MinCover(MinCoverSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StreamKind {
    Finite(Option<MapPolicy>),
    Product,
    MinCover,
}

enum CheckFn {
    Finite(fn(&InstanceSpec) -> Outcome),
    Product(fn(&ProductSpec) -> Outcome),
    MinCover(fn(&MinCoverSpec) -> Outcome),
}

pub struct Statement {
    pub id: &'static str,
    pub section: &'static str,
    pub title: &'static str,
    stream: StreamKind,
    check: CheckFn,
}

use checks as c;
use products as p;

fn registry() -> Vec<Statement> {
    use CheckFn as F;
    use StreamKind as S;
    let st = |id, section, title, stream, check| Statement {
        id,
        section,
        title,
        stream,
        check,
    };
    vec![
        st("relative-bounds", "relative", "M_K bounds: (a) nonnegative, (b) refinement monotone, (c) join subadditive, (d) pullback, equality when f(K)=K", S::Finite(None), F::Finite(c::relative_bounds)),
        st("monotone-in-k", "relative", "monotonicity of N_K and Ent_N(f,K) in K", S::Finite(None), F::Finite(c::monotone_in_k)),
        st("inverse", "inverse", "bijective R-maps with R-map inverse: N_K(⋁fⁱU) = N_K(⋁f⁻ⁱU) and Ent_N(f) = Ent_N(f⁻¹)", S::Finite(Some(MapPolicy::Permutation)), F::Finite(c::inverse_entropy)),
        st("whole-space-bounds", "whole-space", "M_n bounds (a)-(d), equality when f is onto", S::Finite(None), F::Finite(c::whole_space_bounds)),
        st("limit", "whole-space", "subadditivity of the count sequence and the Fekete limit", S::Finite(None), F::Finite(c::limit_subadditive)),
        st("n=N", "whole-space", "N_n over (f|K, U|K) equals N_K over (f, U)", S::Finite(None), F::Finite(c::n_equals_big_n)),
        st("coincidence", "whole-space", "Ent_n(f) = Ent_N(f) on nearly compact X", S::Finite(None), F::Finite(c::coincidence)),
        st("zero-certificate", "whole-space", "finite systems: cover-sequence cycle within the catalogue size, value exactly 0", S::Finite(None), F::Finite(c::zero_certificate)),
        st("r-space", "whole-space", "R-space and Hausdorff predicates against brute-force oracles, witnesses recheck", S::Finite(None), F::Finite(c::r_space_predicates)),
        st("hausdorff-lemmas", "whole-space", "Hausdorff R-space: separation by regular opens, G ⊆ Aᶜ, A regular closed", S::Finite(None), F::Finite(c::hausdorff_lemmas)),
        st("hausdorff-coincidence", "whole-space", "Hausdorff R-space: Ent_N(f,K) = Ent_n(f|K,K) and Ent_N(f) = Ent_n(f|K)", S::Finite(None), F::Finite(c::hausdorff_coincidence)),
        st("image-lemma", "product", "R-maps carry nearly compact relative sets to nearly compact relative sets", S::Finite(None), F::Finite(c::image_lemma)),
        st("product-cover", "product", "N_n(U×V) ≤ N_n(U)·N_n(V) along the join sequence", S::Product, F::Product(p::product_cover_lemma)),
        st("projections", "product", "T_x(K), T_y(K) invariant and K ⊆ T_x(K)×T_y(K)", S::Product, F::Product(p::projection_lemma)),
        st("common-refinement", "product", "constructive U, V with W ≺ U×V", S::Product, F::Product(p::common_refinement)),
        st("product-n", "product", "Ent_n(f×h) ≤ Ent_n(f) + Ent_n(h)", S::Product, F::Product(p::product_theorem_n)),
        st("product-N", "product", "Hausdorff factors, R-space product: Ent_N(f×h) ≤ Ent_N(f) + Ent_N(h)", S::Product, F::Product(p::product_theorem_big_n)),
        st("mincover", "mincover", "branch-and-bound equals brute force", S::MinCover, F::MinCover(mincover_exact)),
    ]
}

/// Ids and group tags of every statement, in report order.
pub fn statements() -> Vec<(&'static str, &'static str, &'static str)> {
    registry().into_iter().map(|s| (s.id, s.section, s.title)).collect()
}

impl MinCoverSpec {
    pub fn draw(seed: u64, max_universe: usize, max_members: usize) -> MinCoverSpec {
        let mut rng = gen::data_rng(seed);
        MinCoverSpec {
            seed,
            universe: rng.gen_range(1..=max_universe.clamp(1, 64)),
            members: rng.gen_range(1..=max_members.clamp(1, crate::mincover::BRUTE_FORCE_MAX)),
        }
    }

    /// Members and target; one draw in ten targets the whole universe
    /// regardless of coverage.
    pub fn family(&self) -> (Vec<PointSet>, PointSet) {
        let mut rng = gen::rng_for(self.seed, gen::Stream::Topology);
        let density = rng.gen_range(0.15..0.6);
        let members: Vec<PointSet> = (0..self.members)
            .map(|_| (0..self.universe).filter(|_| rng.gen_bool(density)).collect())
            .collect();
        let union = members.iter().fold(PointSet::EMPTY, |a, &m| a.union(m));
        let target = if rng.gen_range(0..10) == 0 || union.is_empty() {
            PointSet::full(self.universe)
        } else {
            gen::random_subset(union, &mut rng)
        };
        (members, target)
    }
}

fn mincover_exact(spec: &MinCoverSpec) -> Outcome {
    checks::guarded(|c| {
        let (members, target) = spec.family();
        match (min_subcover_sets(&members, target), brute_force_min_subcover_sets(&members, target)) {
            (Ok(a), Ok(b)) => c.ensure(a == b, || format!("branch-and-bound {a:?} vs brute force {b:?}")),
            (Err(a), Err(b)) => {
                c.note("uncoverable target");
                c.ensure(a == b, || format!("errors differ: {a} vs {b}"))
            }
            (a, b) => c.ensure(false, || format!("disagreement: {a:?} vs {b:?}")),
        }
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub index: usize,
    pub instance: Instance,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementReport {
    pub id: String,
    pub section: String,
    pub title: String,
    pub tried: usize,
    pub applicable: usize,
    pub passed: usize,
    /// Skip reasons with counts.
    pub skipped: BTreeMap<String, usize>,
    /// Instance counts per observed note (equality cases exercised, etc).
    pub notes: BTreeMap<String, usize>,
    pub failures: Vec<FailureRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub statements: Vec<StatementReport>,
    pub total_failures: usize,
    pub all_passed: bool,
}

impl SuiteReport {
    pub fn statement(&self, id: &str) -> Option<&StatementReport> {
        self.statements.iter().find(|s| s.id == id)
    }
}

fn selected(cfg: &SuiteConfig, s: &Statement) -> bool {
    (cfg.theorems.is_empty() || cfg.theorems.iter().any(|t| t == s.id))
        && (cfg.sections.is_empty() || cfg.sections.iter().any(|t| t == s.section))
}

/// The `index`-th instance of statement `id` under `cfg`.
pub fn instance_for(cfg: &SuiteConfig, id: &str, index: usize) -> Option<Instance> {
    let s = registry().into_iter().find(|s| s.id == id)?;
    Some(make_instance(cfg, &s, index))
}

fn make_instance(cfg: &SuiteConfig, s: &Statement, index: usize) -> Instance {
    let seed = instance_seed(cfg.seed, s.id, index);
    match s.stream {
        StreamKind::Finite(policy) => Instance::Finite(InstanceSpec::draw(seed, cfg.max_points, policy)),
        StreamKind::Product => Instance::Product(ProductSpec::draw(seed, cfg.max_factor_points)),
        StreamKind::MinCover => {
            Instance::MinCover(MinCoverSpec::draw(seed, cfg.mincover_universe, cfg.mincover_members))
        }
    }
}

/// Re-runs one statement on one instance.
pub fn replay(id: &str, instance: &Instance) -> Option<Outcome> {
    let s = registry().into_iter().find(|s| s.id == id)?;
    Some(run_one(&s, instance))
}

fn run_one(s: &Statement, instance: &Instance) -> Outcome {
    match (&s.check, instance) {
        (CheckFn::Finite(f), Instance::Finite(spec)) => f(spec),
        (CheckFn::Product(f), Instance::Product(spec)) => f(spec),
        (CheckFn::MinCover(f), Instance::MinCover(spec)) => f(spec),
        _ => Outcome::Skipped("instance stream does not match the statement".into()),
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut statements = Vec::new();
    for s in registry().iter().filter(|s| selected(cfg, s)) {
        let count = match s.stream {
            StreamKind::Finite(_) => cfg.instances,
            StreamKind::Product => cfg.product_instances,
            StreamKind::MinCover => cfg.mincover_instances,
        };
        let outcomes: Vec<(Instance, Outcome)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let inst = make_instance(cfg, s, i);
                let out = run_one(s, &inst);
                (inst, out)
            })
            .collect();
        let mut r = StatementReport {
            id: s.id.to_string(),
            section: s.section.to_string(),
            title: s.title.to_string(),
            tried: count,
            applicable: 0,
            passed: 0,
            skipped: BTreeMap::new(),
            notes: BTreeMap::new(),
            failures: Vec::new(),
        };
        for (index, (instance, out)) in outcomes.into_iter().enumerate() {
            match out {
                Outcome::Skipped(reason) => *r.skipped.entry(reason).or_default() += 1,
                Outcome::Checked { failures, notes } => {
                    r.applicable += 1;
                    for n in notes {
                        *r.notes.entry(n).or_default() += 1;
                    }
                    if failures.is_empty() {
                        r.passed += 1;
                    } else {
                        r.failures.push(FailureRecord {
                            index,
                            instance,
                            messages: failures,
                        });
                    }
                }
            }
        }
        statements.push(r);
    }
    let total_failures = statements.iter().map(|s| s.failures.len()).sum();
    SuiteReport {
        config: cfg.clone(),
        statements,
        total_failures,
        all_passed: total_failures == 0,
    }
}
