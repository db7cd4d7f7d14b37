//! Exact regular-open cover combinatorics on finite topological spaces,
//! nearly entropy of R-maps, products, and a subshift backend.
//!
//! Sets of points are bitsets ([`PointSet`]); every count reported by the
//! engine is an exact integer, and logarithms are taken only for reports.

pub mod cover;
pub mod docs;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod mincover;
pub mod pointset;
pub mod product;
pub mod sft;
pub mod suite;
pub mod topology;

pub use cover::{canonicalize, iterated_join, join, make_cover, pullback, refines, restrict, Cover, Grade};
pub use dynamics::{check_r_map, inverse_map, invariant_sets, restrict_map, InvariantFamily, RMap, RMapStatus};
pub use entropy::{
    count_sequence, entropy_on_k, entropy_rel_cover, entropy_sup_invariant, entropy_whole_space,
    finest_regular_cover, m_sequence, Certificate, Cycle, EntropyOptions, EntropyReport,
};
pub use error::{Error, Result};
pub use mincover::{brute_force_min_subcover, min_subcover, LogBase, MinCoverResult};
pub use pointset::PointSet;
pub use product::{product_space, ProductSpace};
pub use sft::{build_sft, build_sft_forbidden, sft_entropy, sft_product, spectral_entropy, SftSystem};
pub use topology::{FiniteSpace, Limits, SpaceWitness, Verdict};
