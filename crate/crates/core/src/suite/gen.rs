//! Seeded instance generation. Every random choice is drawn from a ChaCha8
//! stream keyed by the instance seed, so a spec replays byte-identically.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{make_cover, Cover};
use crate::dynamics::{check_r_map, RMap};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::topology::FiniteSpace;

/// Draw cap for [`gen_r_map`].
pub const MAX_MAP_ATTEMPTS: usize = 5_000;

/// Largest point count accepted for random preorder spaces.
pub const MAX_RANDOM_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpaceKind {
    /// Alexandrov topology of a random preorder; each ordered pair is an
    /// edge with probability `edge_pct`%.
    RandomPreorder { edge_pct: u8 },
    Discrete,
    Sierpinski,
    Khalimsky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapPolicy {
    /// Uniform tables.
    Random,
    /// Uniform permutations.
    Permutation,
    /// Uniform constant maps.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub n: usize,
    pub kind: SpaceKind,
    pub policy: MapPolicy,
}

/// Independent streams derived from one seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stream {
    Space = 1,
    Map = 2,
    Data = 3,
    Topology = 4,
}

pub(crate) fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ (stream as u64).wrapping_mul(0xA24B_AED4_963E_E407)))
}

pub(crate) fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// FNV-1a; stable across platforms and releases.
pub(crate) fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed of the `index`-th instance of a named stream.
pub fn instance_seed(base: u64, label: &str, index: usize) -> u64 {
    splitmix(splitmix(base ^ label_hash(label)) ^ index as u64)
}

impl InstanceSpec {
    /// Draws kind and size from the seed; `policy` of `None` draws one too.
    pub fn draw(seed: u64, max_points: usize, policy: Option<MapPolicy>) -> InstanceSpec {
        let mut rng = rng_for(seed, Stream::Space);
        let max_points = max_points.clamp(1, MAX_RANDOM_POINTS);
        let roll = rng.gen_range(0..100);
        let kind = match roll {
            0..=59 => SpaceKind::RandomPreorder {
                edge_pct: rng.gen_range(5..=60),
            },
            60..=79 => SpaceKind::Discrete,
            80..=84 => SpaceKind::Sierpinski,
            _ => SpaceKind::Khalimsky,
        };
        let n = match kind {
            SpaceKind::Sierpinski => 2,
            _ => rng.gen_range(1..=max_points),
        };
        let policy = policy.unwrap_or_else(|| match rng.gen_range(0..10) {
            0..=6 => MapPolicy::Random,
            7..=8 => MapPolicy::Permutation,
            _ => MapPolicy::Constant,
        });
        InstanceSpec {
            seed,
            n,
            kind,
            policy,
        }
    }
}

pub fn gen_space(spec: &InstanceSpec) -> Result<Arc<FiniteSpace>> {
    match spec.kind {
        SpaceKind::Discrete => Ok(FiniteSpace::discrete(spec.n)),
        SpaceKind::Sierpinski => Ok(FiniteSpace::sierpinski()),
        SpaceKind::Khalimsky => FiniteSpace::khalimsky(spec.n),
        SpaceKind::RandomPreorder { edge_pct } => {
            if spec.n == 0 || spec.n > MAX_RANDOM_POINTS {
                return Err(Error::TooLarge(format!(
                    "random spaces take 1..={MAX_RANDOM_POINTS} points"
                )));
            }
            let mut rng = rng_for(spec.seed, Stream::Topology);
            let n = spec.n;
            let mut reach: Vec<PointSet> = (0..n).map(PointSet::singleton).collect();
            for (x, r) in reach.iter_mut().enumerate() {
                for y in 0..n {
                    if x != y && rng.gen_range(0..100u8) < edge_pct {
                        *r = r.with(y);
                    }
                }
            }
            // reflexive-transitive closure: U(x) is the up-set of x
            for k in 0..n {
                for x in 0..n {
                    if reach[x].contains(k) {
                        reach[x] = reach[x].union(reach[k]);
                    }
                }
            }
            FiniteSpace::from_min_nbhds(reach)
        }
    }
}

fn draw_table(policy: MapPolicy, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match policy {
        MapPolicy::Random => (0..n).map(|_| rng.gen_range(0..n)).collect(),
        MapPolicy::Permutation => {
            let mut t: Vec<usize> = (0..n).collect();
            t.shuffle(rng);
            t
        }
        MapPolicy::Constant => vec![rng.gen_range(0..n); n],
    }
}

/// Rejection-samples tables under the spec's policy until one is an R-map.
pub fn gen_r_map(spec: &InstanceSpec, space: &Arc<FiniteSpace>) -> Result<RMap> {
    let mut rng = rng_for(spec.seed, Stream::Map);
    for _ in 0..MAX_MAP_ATTEMPTS {
        let table = draw_table(spec.policy, space.len(), &mut rng);
        if let Ok(f) = check_r_map(space, table) {
            return Ok(f);
        }
    }
    Err(Error::GaveUp {
        attempts: MAX_MAP_ATTEMPTS,
    })
}

/// The data stream of an instance, for covers and subsets.
pub fn data_rng(seed: u64) -> ChaCha8Rng {
    rng_for(seed, Stream::Data)
}

/// A few random catalogue members, completed to a cover by random regular
/// opens through each uncovered point.
pub fn random_regular_cover<R: Rng>(space: &Arc<FiniteSpace>, rng: &mut R) -> Cover {
    let nonempty: Vec<PointSet> = space
        .regular_opens()
        .iter()
        .copied()
        .filter(|r| !r.is_empty())
        .collect();
    let want = rng.gen_range(1..=nonempty.len().min(6));
    let mut sets: Vec<PointSet> = nonempty.choose_multiple(rng, want).copied().collect();
    for x in 0..space.len() {
        if sets.iter().any(|s| s.contains(x)) {
            continue;
        }
        let through: Vec<PointSet> = nonempty.iter().copied().filter(|r| r.contains(x)).collect();
        sets.push(*through.choose(rng).expect("X is regular open"));
    }
    make_cover(space, sets).expect("completed family covers")
}

/// Uniform nonempty subset of `within`.
pub fn random_subset<R: Rng>(within: PointSet, rng: &mut R) -> PointSet {
    let pts = within.to_vec();
    loop {
        let s: PointSet = pts.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() || pts.is_empty() {
            return s;
        }
    }
}

/// Forward orbit closure of a random nonempty subset of `within`; `within`
/// must be invariant. One draw in four returns `within` itself.
pub fn random_invariant<R: Rng>(f: &RMap, within: PointSet, rng: &mut R) -> PointSet {
    if rng.gen_range(0..4) == 0 {
        return within;
    }
    f.orbit_closure(random_subset(within, rng))
}
