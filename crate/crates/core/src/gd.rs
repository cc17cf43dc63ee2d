//! Grid-rounded and noisy gradient descent against family members.
//!
//! The update is `w_t = w_{t−1} − η·v_t` where `v_t` rounds the population
//! gradient (plus, in noisy mode, an on-grid noise vector `ξ_t` with
//! `‖ξ_t‖₂ ≤ σ`) to the grid `ΔZ^N`. When the family variance is small,
//! most members' gradients start — and stay — below `Δ/2`, so rounding
//! erases them: approximate descent never leaves the initializer, and noisy
//! descent follows the noise alone.
//!
//! Losses here are hinge; its linearity on `|ŷ| ≤ 1` is what ties gradient
//! coordinates to member correlations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as RandDistribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::LossKind;
use crate::error::{Error, Result};
use crate::family::{LabeledFamily, LabeledPair};
use crate::linear_train::Embedding;
use crate::numeric::{euclidean_norm, pairwise_map_sum};
use crate::variance::{variance_exact, variance_upper_spectral, EXACT_SUPPORT_CAP};

/// A parametric hypothesis class with value and gradient oracles and
/// certified bounds.
pub trait HypothesisModel: Sync {
    /// Number of parameters `N`.
    fn param_dim(&self) -> usize;
    /// Cube dimension of the inputs.
    fn input_dim(&self) -> usize;
    /// `h_w(x)` at the cube point with the given index.
    fn value(&self, w: &[f64], x_index: usize) -> f64;
    /// `∇_w h_w(x)`, written into `out`.
    fn grad(&self, w: &[f64], x_index: usize, out: &mut [f64]);
    /// Certified bound `B` with `‖∇_w h_w(x)‖₂ ≤ B` for all inputs.
    fn gradient_bound(&self) -> f64;
    /// Starting parameters.
    fn initial_params(&self) -> Vec<f64>;

    /// Exact `max_x |h_w(x)|` over the cube.
    fn output_bound(&self, w: &[f64]) -> f64 {
        (0..1usize << self.input_dim())
            .map(|x| self.value(w, x).abs())
            .fold(0.0, f64::max)
    }
}

/// Linear predictor over a fixed embedding: `h_w(x) = ⟨Ψ(x), w⟩`.
///
/// Starts at `w = 0`, so the output bound at initialization is 0 and the
/// gradient bound is the largest embedding row norm.
#[derive(Debug, Clone)]
pub struct LinearModel {
    embedding: Embedding,
    gradient_bound: f64,
}

impl LinearModel {
    pub fn new(embedding: Embedding) -> Self {
        let gradient_bound = embedding.max_row_norm();
        LinearModel { embedding, gradient_bound }
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }
}

impl HypothesisModel for LinearModel {
    fn param_dim(&self) -> usize {
        self.embedding.dim()
    }

    fn input_dim(&self) -> usize {
        self.embedding.input_dimension()
    }

    fn value(&self, w: &[f64], x_index: usize) -> f64 {
        self.embedding.predict(w, x_index)
    }

    fn grad(&self, _w: &[f64], x_index: usize, out: &mut [f64]) {
        out.copy_from_slice(self.embedding.row(x_index));
    }

    fn gradient_bound(&self) -> f64 {
        self.gradient_bound
    }

    fn initial_params(&self) -> Vec<f64> {
        vec![0.0; self.embedding.dim()]
    }
}

/// 1-Lipschitz activations with σ(0) = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Depth-two network over a product input `(x, z)`:
/// `g(x, z) = Σ_i u_i σ(⟨w⁽ⁱ⁾, x⟩ + ⟨v⁽ⁱ⁾, z⟩ + b_i)`,
/// with every layer vector capped at `‖·‖₂ ≤ R`.
///
/// The combined cube packs x in the low `n_x` bits and z in the next `n_z`
/// bits, matching the induced-problem convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerNet {
    pub n_x: usize,
    pub n_z: usize,
    pub units: usize,
    pub norm_cap: f64,
    pub activation: Activation,
    /// Per-unit first-layer weights on x, `units × n_x`.
    pub w: Vec<Vec<f64>>,
    /// Per-unit first-layer weights on z, `units × n_z`.
    pub v: Vec<Vec<f64>>,
    /// Output weights, length `units`.
    pub u: Vec<f64>,
    /// Biases, length `units`.
    pub b: Vec<f64>,
}

impl TwoLayerNet {
    pub fn new(
        n_x: usize,
        n_z: usize,
        norm_cap: f64,
        activation: Activation,
        w: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        u: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Self> {
        let units = u.len();
        if w.len() != units || v.len() != units || b.len() != units {
            return Err(Error::Dimension(format!(
                "inconsistent unit counts: w {} v {} u {} b {}",
                w.len(),
                v.len(),
                units,
                b.len()
            )));
        }
        if norm_cap < 0.0 {
            return Err(Error::Param(format!("norm cap {norm_cap} must be non-negative")));
        }
        let tol = norm_cap * 1e-12 + 1e-12;
        for (i, wi) in w.iter().enumerate() {
            if wi.len() != n_x {
                return Err(Error::Dimension(format!("w[{i}] has {} entries, expected {n_x}", wi.len())));
            }
            if euclidean_norm(wi) > norm_cap + tol {
                return Err(Error::Norm(format!("‖w[{i}]‖ exceeds the cap {norm_cap}")));
            }
        }
        for (i, vi) in v.iter().enumerate() {
            if vi.len() != n_z {
                return Err(Error::Dimension(format!("v[{i}] has {} entries, expected {n_z}", vi.len())));
            }
            if euclidean_norm(vi) > norm_cap + tol {
                return Err(Error::Norm(format!("‖v[{i}]‖ exceeds the cap {norm_cap}")));
            }
        }
        if euclidean_norm(&u) > norm_cap + tol || euclidean_norm(&b) > norm_cap + tol {
            return Err(Error::Norm(format!("‖u‖ or ‖b‖ exceeds the cap {norm_cap}")));
        }
        Ok(TwoLayerNet { n_x, n_z, units, norm_cap, activation, w, v, u, b })
    }

    /// Seeded random net: each layer vector is a Gaussian direction scaled to
    /// a uniform norm in `[0, norm_cap]`.
    pub fn random(
        n_x: usize,
        n_z: usize,
        units: usize,
        norm_cap: f64,
        activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vector = |len: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
            let raw: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
            let norm = euclidean_norm(&raw);
            if norm == 0.0 {
                return vec![0.0; len];
            }
            let target = rng.random::<f64>() * norm_cap;
            raw.into_iter().map(|x| x * target / norm).collect()
        };
        let w: Vec<Vec<f64>> = (0..units).map(|_| vector(n_x, &mut rng)).collect();
        let v: Vec<Vec<f64>> = (0..units).map(|_| vector(n_z, &mut rng)).collect();
        let u = vector(units, &mut rng);
        let b = vector(units, &mut rng);
        Self::new(n_x, n_z, norm_cap, activation, w, v, u, b)
    }

    fn unit_input(&self, i: usize, x_index: usize) -> f64 {
        let x_sum = pairwise_map_sum(self.n_x, &|j| {
            let sign = if (x_index >> j) & 1 == 1 { -1.0 } else { 1.0 };
            self.w[i][j] * sign
        });
        let z_sum = pairwise_map_sum(self.n_z, &|j| {
            let sign = if (x_index >> (self.n_x + j)) & 1 == 1 { -1.0 } else { 1.0 };
            self.v[i][j] * sign
        });
        x_sum + z_sum + self.b[i]
    }

    /// Network output at a combined cube index.
    pub fn eval_index(&self, x_index: usize) -> f64 {
        pairwise_map_sum(self.units, &|i| {
            self.u[i] * self.activation.apply(self.unit_input(i, x_index))
        })
    }

    /// Flattened parameters in the order `[w…, v…, u, b]`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for wi in &self.w {
            out.extend_from_slice(wi);
        }
        for vi in &self.v {
            out.extend_from_slice(vi);
        }
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.b);
        out
    }

    pub fn param_count(&self) -> usize {
        self.units * (self.n_x + self.n_z + 2)
    }

    /// Floors the z-side first-layer weights to the grid `ΔZ` element-wise,
    /// leaving everything else untouched.
    pub fn discretize(&self, delta: f64) -> Result<TwoLayerNet> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Param(format!("grid pitch {delta} must lie in (0, 1)")));
        }
        let v = self
            .v
            .iter()
            .map(|vi| vi.iter().map(|&x| delta * (x / delta).floor()).collect())
            .collect();
        // Flooring can only shrink each coordinate's magnitude by less than Δ,
        // but re-validate norms with a Δ√n slack on the cap.
        let mut net = self.clone();
        net.v = v;
        Ok(net)
    }

    /// Uniform drift cap `R·√k·Δ·n_z` for the discretized network.
    pub fn discretization_drift_bound(&self, delta: f64) -> f64 {
        self.norm_cap * (self.units as f64).sqrt() * delta * self.n_z as f64
    }
}

impl HypothesisModel for TwoLayerNet {
    fn param_dim(&self) -> usize {
        self.param_count()
    }

    fn input_dim(&self) -> usize {
        self.n_x + self.n_z
    }

    fn value(&self, w: &[f64], x_index: usize) -> f64 {
        let k = self.units;
        let (nx, nz) = (self.n_x, self.n_z);
        pairwise_map_sum(k, &|i| {
            let wi = &w[i * nx..(i + 1) * nx];
            let vi = &w[k * nx + i * nz..k * nx + (i + 1) * nz];
            let ui = w[k * (nx + nz) + i];
            let bi = w[k * (nx + nz) + k + i];
            let s = pairwise_map_sum(nx, &|j| {
                let sign = if (x_index >> j) & 1 == 1 { -1.0 } else { 1.0 };
                wi[j] * sign
            }) + pairwise_map_sum(nz, &|j| {
                let sign = if (x_index >> (nx + j)) & 1 == 1 { -1.0 } else { 1.0 };
                vi[j] * sign
            }) + bi;
            ui * self.activation.apply(s)
        })
    }

    fn grad(&self, w: &[f64], x_index: usize, out: &mut [f64]) {
        let k = self.units;
        let (nx, nz) = (self.n_x, self.n_z);
        out.fill(0.0);
        for i in 0..k {
            let wi = &w[i * nx..(i + 1) * nx];
            let vi = &w[k * nx + i * nz..k * nx + (i + 1) * nz];
            let ui = w[k * (nx + nz) + i];
            let bi = w[k * (nx + nz) + k + i];
            let mut s = bi;
            for j in 0..nx {
                let sign = if (x_index >> j) & 1 == 1 { -1.0 } else { 1.0 };
                s += wi[j] * sign;
            }
            for j in 0..nz {
                let sign = if (x_index >> (nx + j)) & 1 == 1 { -1.0 } else { 1.0 };
                s += vi[j] * sign;
            }
            let act = self.activation.apply(s);
            let der = ui * self.activation.derivative(s);
            for j in 0..nx {
                let sign = if (x_index >> j) & 1 == 1 { -1.0 } else { 1.0 };
                out[i * nx + j] = der * sign;
            }
            for j in 0..nz {
                let sign = if (x_index >> (nx + j)) & 1 == 1 { -1.0 } else { 1.0 };
                out[k * nx + i * nz + j] = der * sign;
            }
            out[k * (nx + nz) + i] = act;
            out[k * (nx + nz) + k + i] = der;
        }
    }

    fn gradient_bound(&self) -> f64 {
        // ‖∇‖² ≤ ‖u‖²·(n_x + n_z + 1) + Σ_i sup|σ(s_i)|², with
        // |σ(s)| ≤ |s| ≤ R(√n_x + √n_z) + |b_i| for σ(0) = 0, 1-Lipschitz σ.
        let r = self.norm_cap;
        let u_sq: f64 = self.u.iter().map(|x| x * x).sum();
        let act_sq: f64 = self
            .b
            .iter()
            .map(|bi| {
                let s = r * ((self.n_x as f64).sqrt() + (self.n_z as f64).sqrt()) + bi.abs();
                s * s
            })
            .sum();
        (u_sq * (self.n_x as f64 + self.n_z as f64 + 1.0) + act_sq).sqrt()
    }

    fn initial_params(&self) -> Vec<f64> {
        self.flatten()
    }
}

/// Descent variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdMode {
    /// Plain gradient descent, no rounding.
    Exact,
    /// Gradients rounded to `ΔZ^N` before the step.
    Approx,
    /// On-grid noise added before rounding.
    Noisy,
}

/// One descent configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdRun {
    pub eta: f64,
    pub steps: usize,
    /// Grid pitch; required positive in approx and noisy modes.
    pub delta: f64,
    /// Noise norm cap; noisy mode only.
    pub sigma: f64,
    pub seed: u64,
    pub mode: GdMode,
}

impl GdRun {
    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::Param(format!("step size {} must be positive", self.eta)));
        }
        match self.mode {
            GdMode::Exact => Ok(()),
            GdMode::Approx | GdMode::Noisy => {
                if !(self.delta > 0.0) {
                    return Err(Error::Param(format!(
                        "grid pitch {} must be positive in rounded modes",
                        self.delta
                    )));
                }
                if self.mode == GdMode::Noisy && self.sigma < 0.0 {
                    return Err(Error::Param(format!(
                        "noise cap {} must be non-negative",
                        self.sigma
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Exact population hinge gradient
/// `Σ_x D(x)·ℓ′(h_w(x), f(x))·∇_w h_w(x)` with `ℓ′ = −y` on `ŷ·y ≤ 1`.
pub fn population_gradient<M: HypothesisModel>(
    member: &LabeledPair,
    model: &M,
    w: &[f64],
) -> Vec<f64> {
    let hinge = LossKind::Hinge.spec();
    let size = 1usize << member.dimension();
    let mut g = vec![0.0; model.param_dim()];
    let mut point_grad = vec![0.0; model.param_dim()];
    for x in 0..size {
        let p = member.dist.prob(x);
        if p == 0.0 {
            continue;
        }
        let y = member.f.eval_index(x) as f64;
        let slope = hinge.subgradient(model.value(w, x), y);
        if slope == 0.0 {
            continue;
        }
        model.grad(w, x, &mut point_grad);
        let scale = p * slope;
        for i in 0..g.len() {
            g[i] += scale * point_grad[i];
        }
    }
    g
}

/// Exact population hinge loss of `h_w` on a member.
pub fn population_hinge_loss<M: HypothesisModel>(
    member: &LabeledPair,
    model: &M,
    w: &[f64],
) -> f64 {
    let size = 1usize << member.dimension();
    pairwise_map_sum(size, &|x| {
        let p = member.dist.prob(x);
        if p == 0.0 {
            0.0
        } else {
            let y = member.f.eval_index(x) as f64;
            p * (1.0 - model.value(w, x) * y).max(0.0)
        }
    })
}

/// Rounds each coordinate to the nearest multiple of `delta`, ties to the
/// even multiple; the result satisfies `‖out − v‖_∞ ≤ delta/2`.
pub fn round_to_grid(v: &[f64], delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0) {
        return Err(Error::Param(format!("grid pitch {delta} must be positive")));
    }
    Ok(v.iter().map(|&x| (x / delta).round_ties_even() * delta).collect())
}

/// Draws i.i.d. noise vectors from `ΔZ^N` with `‖ξ‖₂ ≤ σ`: a uniform
/// direction scaled to a uniform radius in `[0, σ]`, rounded to the grid,
/// rejected while the rounded norm exceeds σ.
///
/// Streams are keyed by `(seed, member_id)` so per-member runs are
/// order-independent under parallel execution.
pub struct NoiseGenerator {
    delta: f64,
    sigma: f64,
    dim: usize,
    rng: ChaCha8Rng,
}

impl NoiseGenerator {
    pub fn new(delta: f64, sigma: f64, dim: usize, seed: u64, member_id: u64) -> Self {
        let key = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            ^ member_id.wrapping_mul(0xD1B5_4A32_D192_ED03);
        NoiseGenerator { delta, sigma, dim, rng: ChaCha8Rng::seed_from_u64(key) }
    }

    pub fn draw(&mut self) -> Vec<f64> {
        if self.sigma == 0.0 {
            return vec![0.0; self.dim];
        }
        loop {
            let raw: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut self.rng)).collect();
            let norm = euclidean_norm(&raw);
            if norm == 0.0 {
                continue;
            }
            let radius = self.rng.random::<f64>() * self.sigma;
            let scaled: Vec<f64> = raw.iter().map(|&x| x * radius / norm).collect();
            let rounded: Vec<f64> = scaled
                .iter()
                .map(|&x| (x / self.delta).round_ties_even() * self.delta)
                .collect();
            if euclidean_norm(&rounded) <= self.sigma {
                return rounded;
            }
        }
    }
}

/// Full record of one descent run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GdRunRecord {
    pub mode: GdMode,
    /// Approx mode: the first rounded gradient was zero (the run never
    /// moves). Noisy mode: every rounded step equalled its noise vector
    /// bit-for-bit (the run is noise-driven).
    pub stuck_at_zero: bool,
    pub final_loss: f64,
    /// Iterates `w_0 … w_T`.
    pub trajectory: Vec<Vec<f64>>,
    /// Noise vectors `ξ_1 … ξ_T`; empty outside noisy mode.
    pub noise: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// Runs one descent configuration on one member.
pub fn run_gd<M: HypothesisModel>(
    member: &LabeledPair,
    model: &M,
    run: &GdRun,
    member_id: u64,
) -> Result<GdRunRecord> {
    run.validate()?;
    if member.dimension() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "member dimension {} vs model input dimension {}",
            member.dimension(),
            model.input_dim()
        )));
    }
    let mut warnings = Vec::new();
    if run.mode == GdMode::Noisy && run.sigma > 0.0 {
        let cap = 1.0 / (2.0 * run.sigma * model.gradient_bound() * run.steps.max(1) as f64);
        if run.eta > cap {
            warnings.push(format!(
                "step size {} exceeds the noise-drift cap {cap}; the noise-driven trajectory \
                 may leave the certified output range",
                run.eta
            ));
        }
    }

    let mut w = model.initial_params();
    let mut trajectory = vec![w.clone()];
    let mut noise_log: Vec<Vec<f64>> = Vec::new();
    let mut noise = NoiseGenerator::new(run.delta.max(f64::MIN_POSITIVE), run.sigma, w.len(), run.seed, member_id);
    let mut stuck = true;
    for step in 0..run.steps {
        let g = population_gradient(member, model, &w);
        let v = match run.mode {
            GdMode::Exact => {
                if step == 0 {
                    stuck = g.iter().all(|&x| x == 0.0);
                }
                g
            }
            GdMode::Approx => {
                let v = round_to_grid(&g, run.delta)?;
                if step == 0 {
                    stuck = v.iter().all(|&x| x == 0.0);
                }
                v
            }
            GdMode::Noisy => {
                let xi = noise.draw();
                let shifted: Vec<f64> = g.iter().zip(&xi).map(|(a, b)| a + b).collect();
                let v = round_to_grid(&shifted, run.delta)?;
                if stuck {
                    // Value equality, not bit equality: rounding a −0.0 noise
                    // coordinate through `g + ξ` yields +0.0.
                    stuck = v.iter().zip(&xi).all(|(a, b)| a == b);
                }
                noise_log.push(xi);
                v
            }
        };
        for i in 0..w.len() {
            w[i] -= run.eta * v[i];
        }
        trajectory.push(w.clone());
    }
    let final_loss = population_hinge_loss(member, model, &w);
    Ok(GdRunRecord {
        mode: run.mode,
        stuck_at_zero: stuck,
        final_loss,
        trajectory,
        noise: noise_log,
        warnings,
    })
}

/// Family-level first-step analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StuckReport {
    /// Fraction of members with `‖∇L(w₀)‖₂ < Δ/2`.
    pub fraction: f64,
    pub stuck_members: usize,
    pub member_count: usize,
    /// Markov floor `1 − 4B²N·var/Δ²` on the stuck fraction (may be ≤ 0,
    /// i.e. vacuous).
    pub markov_floor: f64,
    /// Mean `‖∇L(w₀)‖₂²` over members.
    pub mean_grad_sq: f64,
    /// Cap `B²·N·var` on that mean.
    pub mean_grad_sq_cap: f64,
    pub variance_used: f64,
    pub variance_exact: bool,
}

/// Measures how many members the grid erases at the very first step, and the
/// averages the floors are computed from.
pub fn family_stuck_fraction<M: HypothesisModel>(
    a: &LabeledFamily,
    model: &M,
    delta: f64,
) -> Result<StuckReport> {
    if !(delta > 0.0) {
        return Err(Error::Param(format!("grid pitch {delta} must be positive")));
    }
    if a.dimension() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "family dimension {} vs model input dimension {}",
            a.dimension(),
            model.input_dim()
        )));
    }
    let w0 = model.initial_params();
    let out_bound = model.output_bound(&w0);
    if out_bound > 1.0 + 1e-12 {
        return Err(Error::Contract(format!(
            "initial output bound {out_bound} exceeds 1; the hinge-correlation identity needs \
             |h| ≤ 1"
        )));
    }

    let grad_sq: Vec<f64> = a
        .members()
        .par_iter()
        .map(|m| {
            let g = population_gradient(m, model, &w0);
            pairwise_map_sum(g.len(), &|i| g[i] * g[i])
        })
        .collect();
    let count = grad_sq.len();
    let stuck_members = grad_sq.iter().filter(|&&sq| sq.sqrt() < delta / 2.0).count();
    let mean_grad_sq = pairwise_map_sum(count, &|i| grad_sq[i]) / count as f64;

    let (variance_used, is_exact) = if a.support().len() <= EXACT_SUPPORT_CAP {
        (variance_exact(a)?.0, true)
    } else {
        (variance_upper_spectral(a)?, false)
    };
    let b = model.gradient_bound();
    let n = model.param_dim() as f64;
    Ok(StuckReport {
        fraction: stuck_members as f64 / count as f64,
        stuck_members,
        member_count: count,
        markov_floor: 1.0 - 4.0 * b * b * n * variance_used / (delta * delta),
        mean_grad_sq,
        mean_grad_sq_cap: b * b * n * variance_used,
        variance_used,
        variance_exact: is_exact,
    })
}

/// Floors the z-side weights of a depth-two network to `ΔZ`.
pub fn discretize_net(net: &TwoLayerNet, delta: f64) -> Result<TwoLayerNet> {
    net.discretize(delta)
}
