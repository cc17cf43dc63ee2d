//! The family variance `Var(A)`: exact by vertex enumeration, upper by
//! spectral norm, lower by member probes.
//!
//! `Var(A, φ)` is a positive-semidefinite quadratic form in φ, so its
//! supremum over the ∞-ball is attained at a ±1 vertex; on supports of at
//! most [`EXACT_SUPPORT_CAP`] points all `2^|X|` vertices are enumerated.
//! Beyond that only the sandwich
//!
//! ```text
//! max_members Var(A, f) ≤ Var(A) ≤ (|X|/|A|)·‖M(A)‖₂²
//! ```
//!
//! is reported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::LabeledFamily;
use crate::numeric::{pairwise_map_sum, spectral_norm_sq};

/// Supports larger than this refuse the exact path (2^|X| vertex sweep).
pub const EXACT_SUPPORT_CAP: usize = 24;

/// Vertices per enumeration chunk. Chunk boundaries are fixed by the problem
/// size, not the worker count, and the running inner-product vector is
/// recomputed from scratch at each chunk start to stop error accumulation.
const CHUNK: u64 = 4096;

/// Which variance quantities to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Exact when the support is small enough, bounds always.
    Auto,
    /// Fail if the exact path is infeasible.
    Exact,
    /// Bounds only, even when exact would be feasible.
    BoundsOnly,
}

/// Variance estimates for one family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceReport {
    /// `Var(A)` by exhaustive vertex enumeration, when feasible.
    pub exact: Option<f64>,
    /// `(|X|/|A|)·‖M(A)‖₂²`.
    pub upper_spectral: f64,
    /// `max_{(f,D)∈A} Var(A, f)` — every member's own target is a feasible probe.
    pub lower_member: f64,
    /// A maximizing ±1 vertex (full-cube table, +1 off support), when exact ran.
    pub argmax_phi: Option<Vec<f64>>,
}

/// `Var(A, φ)`: mean squared correlation of the probe with the members.
pub fn variance_at(a: &LabeledFamily, phi: &[f64]) -> Result<f64> {
    if phi.len() != 1 << a.dimension() {
        return Err(Error::Dimension(format!(
            "probe has {} entries for a dimension-{} family",
            phi.len(),
            a.dimension()
        )));
    }
    if let Some(bad) = phi.iter().find(|&&v| !(v.abs() <= 1.0 + 1e-12)) {
        return Err(Error::Norm(format!("probe entry {bad} exceeds sup-norm 1")));
    }
    let corrs = a.correlations(phi);
    Ok(pairwise_map_sum(corrs.len(), &|i| corrs[i] * corrs[i]) / corrs.len() as f64)
}

/// `Var(A)` and a maximizing ±1 probe, by enumerating all sign vertices over
/// the support.
///
/// Enumeration follows the Gray-code order so each step flips one support
/// coordinate and updates the member correlation vector in O(|A|). Ties on
/// the maximum go to the earliest vertex, making the reported argmax
/// deterministic under any worker count.
pub fn variance_exact(a: &LabeledFamily) -> Result<(f64, Vec<f64>)> {
    let support = a.support();
    let s = support.len();
    if s > EXACT_SUPPORT_CAP {
        return Err(Error::DomainTooLarge(format!(
            "exact variance enumerates 2^{s} vertices; cap is 2^{EXACT_SUPPORT_CAP}"
        )));
    }
    let members = a.len();
    // Column j holds f(x_j)·D(x_j) across members.
    let columns: Vec<Vec<f64>> = (0..s)
        .map(|j| {
            let idx = support[j] as usize;
            a.members()
                .iter()
                .map(|m| (m.f.eval_index(idx) as f64) * m.dist.prob(idx))
                .collect()
        })
        .collect();

    let total: u64 = 1u64 << s;
    let chunks = total.div_ceil(CHUNK);

    let sweep = |chunk: u64| -> (f64, u64) {
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(total);
        // Correlation vector at the chunk's first vertex, from scratch.
        let gray0 = start ^ (start >> 1);
        let mut r: Vec<f64> = (0..members)
            .map(|m| {
                pairwise_map_sum(s, &|j| {
                    let sign = if (gray0 >> j) & 1 == 1 { -1.0 } else { 1.0 };
                    sign * columns[j][m]
                })
            })
            .collect();
        let score = |r: &[f64]| pairwise_map_sum(members, &|m| r[m] * r[m]);
        let mut best = (score(&r), start);
        for t in start + 1..end {
            let bit = t.trailing_zeros() as usize;
            let now_negative = ((t ^ (t >> 1)) >> bit) & 1 == 1;
            let delta = if now_negative { -2.0 } else { 2.0 };
            let col = &columns[bit];
            for m in 0..members {
                r[m] += delta * col[m];
            }
            let v = score(&r);
            if v > best.0 {
                best = (v, t);
            }
        }
        best
    };

    let best = (0..chunks)
        .into_par_iter()
        .map(sweep)
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|acc, cand| if cand.0 > acc.0 { cand } else { acc })
        .expect("at least one chunk");

    let gray = best.1 ^ (best.1 >> 1);
    let mut phi = vec![1.0; 1 << a.dimension()];
    for (j, &idx) in support.iter().enumerate() {
        phi[idx as usize] = if (gray >> j) & 1 == 1 { -1.0 } else { 1.0 };
    }
    Ok((best.0 / members as f64, phi))
}

/// Spectral upper bound `(|X|/|A|)·‖M(A)‖₂²`.
pub fn variance_upper_spectral(a: &LabeledFamily) -> Result<f64> {
    let op = a.operator_matrix()?;
    let norm_sq = spectral_norm_sq(op.matrix())?;
    Ok(norm_sq * a.support().len() as f64 / a.len() as f64)
}

/// Certified lower bound: the best member's own target as probe.
pub fn variance_lower_members(a: &LabeledFamily) -> f64 {
    let values: Vec<f64> = (0..a.len())
        .into_par_iter()
        .map(|i| {
            let phi = a.members()[i].f.to_real();
            let corrs: Vec<f64> = (0..a.len()).map(|m| a.member_correlation(m, &phi)).collect();
            pairwise_map_sum(corrs.len(), &|k| corrs[k] * corrs[k]) / corrs.len() as f64
        })
        .collect();
    values.into_iter().fold(0.0, f64::max)
}

/// Full report per the requested mode.
pub fn variance_report(a: &LabeledFamily, mode: VarianceMode) -> Result<VarianceReport> {
    let feasible = a.support().len() <= EXACT_SUPPORT_CAP;
    let exact_pair = match mode {
        VarianceMode::BoundsOnly => None,
        VarianceMode::Exact => Some(variance_exact(a)?),
        VarianceMode::Auto => {
            if feasible {
                Some(variance_exact(a)?)
            } else {
                None
            }
        }
    };
    let (exact, argmax_phi) = match exact_pair {
        Some((v, phi)) => (Some(v), Some(phi)),
        None => (None, None),
    };
    Ok(VarianceReport {
        exact,
        upper_spectral: variance_upper_spectral(a)?,
        lower_member: variance_lower_members(a),
        argmax_phi,
    })
}
