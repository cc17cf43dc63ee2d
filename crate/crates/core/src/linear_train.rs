//! Projected subgradient training of linear predictors over a fixed
//! embedding, with exact population objectives.
//!
//! Everything here is population-level: losses and gradients are exact sums
//! over the cube weighted by the member's distribution, so the trained loss
//! is a certified upper bound on nothing and a certified *witness* that the
//! floor from [`crate::bounds::linear_approx_bound`] cannot be beaten — the
//! exact minimum lies between the floor and any trained value.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{linear_approx_bound, BoundValue, LossSpec};
use crate::error::{Error, Result};
use crate::family::{LabeledFamily, LabeledPair};
use crate::numeric::{euclidean_norm, pairwise_map_sum};
use crate::variance::{variance_exact, variance_upper_spectral, EXACT_SUPPORT_CAP};

/// A fixed embedding `Ψ : {±1}^n → [−1,1]^N`, stored densely with one row
/// per cube point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    n: usize,
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn new(n: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "embedding has {} rows for a dimension-{n} cube",
                rows.len()
            )));
        }
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Param("embedding dimension must be at least 1".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "embedding row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|&&v| !(v.abs() <= 1.0) || !v.is_finite()) {
                return Err(Error::Norm(format!("embedding entry {bad} outside [−1, 1]")));
            }
        }
        Ok(Embedding { n, dim, rows })
    }

    /// Seeded ±1 entries.
    pub fn random_sign(n: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..1usize << n)
            .map(|_| (0..dim).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect())
            .collect();
        Self::new(n, rows)
    }

    /// Seeded uniform entries in [−1, 1].
    pub fn random_uniform(n: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..1usize << n)
            .map(|_| (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        Self::new(n, rows)
    }

    /// The identity embedding on the input coordinates: `Ψ(x) = x`, `N = n`.
    pub fn coordinate(n: usize) -> Result<Self> {
        let rows = (0..1usize << n)
            .map(|idx| {
                (0..n)
                    .map(|i| if (idx >> i) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        Self::new(n, rows)
    }

    /// From a dense matrix with one row per cube point.
    pub fn from_matrix(n: usize, m: &Array2<f64>) -> Result<Self> {
        let rows = m.outer_iter().map(|r| r.to_vec()).collect();
        Self::new(n, rows)
    }

    pub fn input_dimension(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, index: usize) -> &[f64] {
        &self.rows[index]
    }

    /// Largest row norm, the certified gradient bound of the induced linear
    /// model.
    pub fn max_row_norm(&self) -> f64 {
        self.rows.iter().map(|r| euclidean_norm(r)).fold(0.0, f64::max)
    }

    pub fn predict(&self, w: &[f64], index: usize) -> f64 {
        pairwise_map_sum(self.dim, &|i| self.rows[index][i] * w[i])
    }
}

/// Training configuration for projected subgradient descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step_size: f64,
    pub steps: usize,
    /// Projection radius: the weight vector is kept inside `‖w‖₂ ≤ radius`.
    pub radius: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::Param(format!("step size {} must be positive", self.step_size)));
        }
        if self.radius < 0.0 {
            return Err(Error::Param(format!("radius {} must be non-negative", self.radius)));
        }
        Ok(())
    }
}

/// Exact population loss of the linear predictor `x ↦ ⟨Ψ(x), w⟩` on one
/// member.
pub fn population_loss(member: &LabeledPair, emb: &Embedding, loss: &LossSpec, w: &[f64]) -> f64 {
    let size = 1usize << member.dimension();
    pairwise_map_sum(size, &|x| {
        let p = member.dist.prob(x);
        if p == 0.0 {
            0.0
        } else {
            p * loss.eval(emb.predict(w, x), member.f.eval_index(x) as f64)
        }
    })
}

/// Exact population subgradient at `w`.
pub fn population_subgradient(
    member: &LabeledPair,
    emb: &Embedding,
    loss: &LossSpec,
    w: &[f64],
) -> Vec<f64> {
    let size = 1usize << member.dimension();
    let mut g = vec![0.0; emb.dim()];
    for x in 0..size {
        let p = member.dist.prob(x);
        if p == 0.0 {
            continue;
        }
        let slope = loss.subgradient(emb.predict(w, x), member.f.eval_index(x) as f64);
        if slope == 0.0 {
            continue;
        }
        let row = emb.row(x);
        let scale = p * slope;
        for i in 0..g.len() {
            g[i] += scale * row[i];
        }
    }
    g
}

/// Gradient of the population loss at `w = 0` for unit-slope losses:
/// `−Σ_x D(x) f(x) Ψ(x)`, the vector of negated column correlations.
pub fn gradient_at_zero(member: &LabeledPair, emb: &Embedding) -> Vec<f64> {
    let size = 1usize << member.dimension();
    (0..emb.dim())
        .map(|i| {
            -pairwise_map_sum(size, &|x| {
                member.dist.prob(x) * (member.f.eval_index(x) as f64) * emb.row(x)[i]
            })
        })
        .collect()
}

/// Outcome of training one member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub weights: Vec<f64>,
    /// Exact population loss of the best iterate (including the start `w = 0`).
    pub loss_achieved: f64,
}

/// Projected subgradient descent from `w = 0` with a fixed step size,
/// reporting the best iterate by exact population loss.
pub fn train_linear(
    member: &LabeledPair,
    emb: &Embedding,
    loss: &LossSpec,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if !loss.convex {
        return Err(Error::LossContract(format!(
            "train_linear needs a convex loss, {:?} is not",
            loss.kind
        )));
    }
    cfg.validate()?;
    if member.dimension() != emb.input_dimension() {
        return Err(Error::Dimension(format!(
            "member dimension {} vs embedding dimension {}",
            member.dimension(),
            emb.input_dimension()
        )));
    }

    let mut w = vec![0.0; emb.dim()];
    let mut best_w = w.clone();
    let mut best_loss = population_loss(member, emb, loss, &w);
    for _ in 0..cfg.steps {
        let g = population_subgradient(member, emb, loss, &w);
        for i in 0..w.len() {
            w[i] -= cfg.step_size * g[i];
        }
        let norm = euclidean_norm(&w);
        if norm > cfg.radius {
            let scale = if cfg.radius == 0.0 { 0.0 } else { cfg.radius / norm };
            for v in w.iter_mut() {
                *v *= scale;
            }
        }
        let l = population_loss(member, emb, loss, &w);
        if l < best_loss {
            best_loss = l;
            best_w.copy_from_slice(&w);
        }
    }
    Ok(TrainOutcome { weights: best_w, loss_achieved: best_loss })
}

/// Per-member training result inside a family profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberProfile {
    pub member: usize,
    pub loss_achieved: f64,
    /// `‖∇L(0)‖₂²` for this member.
    pub grad_zero_sq_norm: f64,
}

/// Family-level training summary against the linear-class floor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyProfile {
    pub per_member: Vec<MemberProfile>,
    pub mean_loss: f64,
    pub min_loss: f64,
    /// Floor from the embedding dimension, the radius and the family variance.
    pub bound: BoundValue,
    /// Variance value the floor was computed from.
    pub variance_used: f64,
    /// True when `variance_used` is exact, false when it is the spectral
    /// upper bound (which only weakens the floor, keeping it valid).
    pub variance_exact: bool,
    /// Mean of `‖∇L(0)‖₂²` over members.
    pub mean_grad_zero_sq: f64,
    /// Mean of `‖∇L(0)‖₂` over members.
    pub mean_grad_zero_norm: f64,
    /// Cap `N·var` on the mean squared gradient norm at zero.
    pub grad_sq_cap: f64,
}

/// Trains every member and assembles the profile.
pub fn family_profile(
    a: &LabeledFamily,
    emb: &Embedding,
    loss: &LossSpec,
    cfg: &TrainConfig,
) -> Result<FamilyProfile> {
    if !loss.satisfies_slope_contract() {
        return Err(Error::LossContract(format!(
            "family_profile compares against the linear floor, which needs the unit-slope \
             contract; {:?} does not satisfy it",
            loss.kind
        )));
    }
    let (variance_used, is_exact) = if a.support().len() <= EXACT_SUPPORT_CAP {
        (variance_exact(a)?.0, true)
    } else {
        (variance_upper_spectral(a)?, false)
    };
    let bound = linear_approx_bound(loss, cfg.radius, emb.dim() as f64, variance_used)?;

    let per_member: Vec<MemberProfile> = a
        .members()
        .par_iter()
        .enumerate()
        .map(|(i, member)| {
            let outcome = train_linear(member, emb, loss, cfg)?;
            let g0 = gradient_at_zero(member, emb);
            Ok(MemberProfile {
                member: i,
                loss_achieved: outcome.loss_achieved,
                grad_zero_sq_norm: pairwise_map_sum(g0.len(), &|k| g0[k] * g0[k]),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let count = per_member.len();
    let mean_loss = pairwise_map_sum(count, &|i| per_member[i].loss_achieved) / count as f64;
    let min_loss = per_member.iter().map(|m| m.loss_achieved).fold(f64::INFINITY, f64::min);
    let mean_grad_zero_sq =
        pairwise_map_sum(count, &|i| per_member[i].grad_zero_sq_norm) / count as f64;
    let mean_grad_zero_norm =
        pairwise_map_sum(count, &|i| per_member[i].grad_zero_sq_norm.sqrt()) / count as f64;
    Ok(FamilyProfile {
        per_member,
        mean_loss,
        min_loss,
        bound,
        variance_used,
        variance_exact: is_exact,
        mean_grad_zero_sq,
        mean_grad_zero_norm,
        grad_sq_cap: emb.dim() as f64 * variance_used,
    })
}

/// Compares the analytic population gradient against central finite
/// differences; returns the largest per-coordinate relative error
/// `|g_i − fd_i| / max(1, |g_i|)`.
///
/// The caller is responsible for probing away from hinge kinks (no point
/// with `ŷ·y` within the finite-difference window of 1).
pub fn grad_check(
    member: &LabeledPair,
    emb: &Embedding,
    loss: &LossSpec,
    w: &[f64],
    h: f64,
) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::Param(format!("finite-difference step {h} must be positive")));
    }
    if w.len() != emb.dim() {
        return Err(Error::Dimension(format!(
            "weight vector has {} entries for an embedding of dimension {}",
            w.len(),
            emb.dim()
        )));
    }
    let analytic = population_subgradient(member, emb, loss, w);
    let mut probe = w.to_vec();
    let mut worst = 0.0f64;
    for i in 0..w.len() {
        probe[i] = w[i] + h;
        let up = population_loss(member, emb, loss, &probe);
        probe[i] = w[i] - h;
        let down = population_loss(member, emb, loss, &probe);
        probe[i] = w[i];
        let fd = (up - down) / (2.0 * h);
        let err = (analytic[i] - fd).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
