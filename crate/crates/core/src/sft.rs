//! Subshifts of finite type as positive-entropy compact R-systems.
//!
//! Cylinder sets are clopen, hence regular open, and shift preimages of
//! clopens are clopen, so the shift is an R-map of a compact (hence nearly
//! compact) space. The join `⋁_{i<m} σ⁻ⁱ` of the 1-cylinder partition is the
//! partition into m-cylinders; a partition has no proper subcover, so its
//! minimal subcover size is the number of admissible words of length `m`.
//! The shift space itself is never materialised.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::entropy::{fekete_inf, ln_big, Certificate, EntropyReport};
use crate::error::{Error, Result};
use crate::mincover::LogBase;

/// Largest alphabet accepted by [`sft_product`].
pub const MAX_PRODUCT_ALPHABET: usize = 256;

const POWER_ITERATION_CAP: usize = 1_000_000;
const SPECTRAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftSystem {
    /// Surviving symbols, as indices into the presented alphabet.
    pub symbols: Vec<usize>,
    /// 0/1 transition matrix over the surviving symbols.
    pub matrix: Vec<Vec<u8>>,
    pub description: String,
}

/// Validates a 0/1 transition matrix and prunes symbols that cannot occur in
/// a bi-infinite sequence.
pub fn build_sft(k: usize, matrix: Vec<Vec<u8>>) -> Result<SftSystem> {
    if k == 0 {
        return Err(Error::BadShift("alphabet must be nonempty".into()));
    }
    if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
        return Err(Error::BadShift(format!("transition matrix must be {k}×{k}")));
    }
    if matrix.iter().flatten().any(|&v| v > 1) {
        return Err(Error::BadShift("transition matrix entries must be 0 or 1".into()));
    }
    let mut alive = vec![true; k];
    loop {
        let mut changed = false;
        for s in 0..k {
            if !alive[s] {
                continue;
            }
            let out = (0..k).any(|t| alive[t] && matrix[s][t] == 1);
            let inc = (0..k).any(|t| alive[t] && matrix[t][s] == 1);
            if !(out && inc) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let symbols: Vec<usize> = (0..k).filter(|&s| alive[s]).collect();
    if symbols.is_empty() {
        return Err(Error::EmptyShift);
    }
    let pruned = symbols
        .iter()
        .map(|&s| symbols.iter().map(|&t| matrix[s][t]).collect())
        .collect();
    Ok(SftSystem {
        description: format!("{k}-symbol shift, {} symbols after pruning", symbols.len()),
        symbols,
        matrix: pruned,
    })
}

/// Compiles forbidden two-letter words into a transition matrix. Symbols
/// are base-36 digits; without an explicit `k` the alphabet is the largest
/// mentioned symbol plus one.
pub fn build_sft_forbidden(k: Option<usize>, forbidden: &[String]) -> Result<SftSystem> {
    let mut pairs = Vec::with_capacity(forbidden.len());
    for w in forbidden {
        let digits: Vec<usize> = w
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::BadShift(format!("forbidden word {w:?} has a non-symbol")))?;
        if digits.len() != 2 {
            return Err(Error::BadShift(format!(
                "forbidden word {w:?} must have length 2"
            )));
        }
        pairs.push((digits[0], digits[1]));
    }
    let needed = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(1);
    let k = k.unwrap_or(needed);
    if needed > k {
        return Err(Error::BadShift(format!(
            "forbidden words mention symbol {} outside a {k}-letter alphabet",
            needed - 1
        )));
    }
    let mut matrix = vec![vec![1u8; k]; k];
    for (a, b) in pairs {
        matrix[a][b] = 0;
    }
    let mut s = build_sft(k, matrix)?;
    s.description = format!("{k}-symbol shift avoiding {}", forbidden.join(","));
    Ok(s)
}

impl SftSystem {
    pub fn full_shift(k: usize) -> Result<SftSystem> {
        let mut s = build_sft(k, vec![vec![1; k]; k])?;
        s.description = format!("full {k}-shift");
        Ok(s)
    }

    pub fn golden_mean() -> SftSystem {
        build_sft_forbidden(Some(2), &["11".to_string()]).expect("golden mean shift is nonempty")
    }

    pub fn alphabet(&self) -> usize {
        self.matrix.len()
    }

    /// Common row sum of the transition matrix, if all rows agree.
    pub fn constant_row_sum(&self) -> Option<usize> {
        let sums: Vec<usize> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|&v| v as usize).sum())
            .collect();
        sums.iter().all(|&x| x == sums[0]).then_some(sums[0])
    }

    /// Number of admissible words of length `m`.
    pub fn count_words(&self, m: usize) -> BigUint {
        assert!(m >= 1, "word length must be positive");
        let k = self.alphabet();
        // v[s] = number of admissible words of the current length starting at s
        let mut v = vec![BigUint::one(); k];
        for _ in 1..m {
            v = (0..k)
                .map(|s| {
                    (0..k)
                        .filter(|&t| self.matrix[s][t] == 1)
                        .fold(BigUint::zero(), |acc, t| acc + &v[t])
                })
                .collect();
        }
        v.into_iter().sum()
    }
}

/// Word-count entropy over `m = 1..=m_max`. The value is the growth-rate
/// estimate `a_{m_max} − a_{m_max−1}`. When every row of the transition
/// matrix sums to the same `r`, counts are exactly `k·r^{m−1}` and the value
/// `ln r` is reported as exact.
pub fn sft_entropy(sft: &SftSystem, m_max: usize, base: LogBase) -> EntropyReport {
    assert!(m_max >= 2, "m_max must be at least 2");
    let counts: Vec<BigUint> = (1..=m_max).map(|m| sft.count_words(m)).collect();
    let a_seq: Vec<f64> = counts.iter().map(|c| base.from_nats(ln_big(c))).collect();
    let inf = fekete_inf(&a_seq);
    let (certificate, value, exact) = match sft.constant_row_sum() {
        Some(r) => (
            Certificate::GeometricGrowth {
                ratio: r.to_string(),
            },
            base.from_nats((r as f64).ln()),
            true,
        ),
        None => (
            Certificate::None,
            a_seq[m_max - 1] - a_seq[m_max - 2],
            false,
        ),
    };
    EntropyReport {
        log_base: base,
        target: None,
        counts,
        a_seq,
        fekete_inf: inf,
        cycle: None,
        certificate,
        value,
        exact,
    }
}

/// `ln ρ(A)` by power iteration, run per irreducible block on `B + I`
/// (primitive, same Perron vector) with Collatz–Wielandt bounds as the
/// stopping rule.
pub fn spectral_entropy(sft: &SftSystem) -> Result<f64> {
    let k = sft.alphabet();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..k).map(|_| g.add_node(())).collect();
    for s in 0..k {
        for t in 0..k {
            if sft.matrix[s][t] == 1 {
                g.add_edge(nodes[s], nodes[t], ());
            }
        }
    }
    let mut radius: f64 = 0.0;
    for comp in tarjan_scc(&g) {
        let idx: Vec<usize> = comp.iter().map(|n| n.index()).collect();
        let has_cycle = idx.len() > 1 || sft.matrix[idx[0]][idx[0]] == 1;
        if !has_cycle {
            continue;
        }
        radius = radius.max(block_radius(sft, &idx)?);
    }
    Ok(radius.ln())
}

fn block_radius(sft: &SftSystem, idx: &[usize]) -> Result<f64> {
    let n = idx.len();
    let mut v = vec![1.0f64; n];
    for _ in 0..POWER_ITERATION_CAP {
        let w: Vec<f64> = (0..n)
            .map(|i| {
                v[i] + (0..n)
                    .filter(|&j| sft.matrix[idx[i]][idx[j]] == 1)
                    .map(|j| v[j])
                    .sum::<f64>()
            })
            .collect();
        let (lo, hi) = w
            .iter()
            .zip(&v)
            .map(|(a, b)| a / b)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / norm).collect();
        if (hi - lo) <= SPECTRAL_TOLERANCE * hi {
            return Ok(0.5 * (lo + hi) - 1.0);
        }
    }
    Err(Error::NonConvergence {
        iterations: POWER_ITERATION_CAP,
    })
}

/// Product shift on symbol pairs; transitions are the tensor product, so
/// word counts multiply.
pub fn sft_product(a: &SftSystem, b: &SftSystem) -> Result<SftSystem> {
    let (ka, kb) = (a.alphabet(), b.alphabet());
    if ka * kb > MAX_PRODUCT_ALPHABET {
        return Err(Error::TooLarge(format!(
            "product alphabet {} exceeds {MAX_PRODUCT_ALPHABET}",
            ka * kb
        )));
    }
    let matrix = (0..ka * kb)
        .map(|p| {
            (0..ka * kb)
                .map(|q| a.matrix[p / kb][q / kb] * b.matrix[p % kb][q % kb])
                .collect()
        })
        .collect();
    let mut s = build_sft(ka * kb, matrix)?;
    s.description = format!("({}) × ({})", a.description, b.description);
    Ok(s)
}
