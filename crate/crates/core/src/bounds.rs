//! Closed-form loss floors implied by a family variance value.
//!
//! Every evaluator returns the raw bound (possibly ≤ 0, i.e. vacuous —
//! flagged, never clamped) so callers can see when their parameters defeat
//! the bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Loss function identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `max(1 − ŷy, 0)`.
    Hinge,
    /// `½(y − ŷ)²`; satisfies the unit-slope contract the linear
    /// approximation bound needs, unlike the plain square loss.
    HalfSquare,
    /// `(y − ŷ)²`.
    Square,
    /// `1{sign(ŷ) ≠ y}`, with sign(0) counting half.
    ZeroOne,
}

/// Loss descriptor: value and slope at 0, the correlation-query floor
/// constants `(a, b)`, and the structural flags the bound evaluators check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// `ℓ(0, y)`, independent of the label.
    pub loss_at_zero: f64,
    /// Derivative of `ℓ(·, y)` at 0 as a coefficient of −y.
    pub slope_at_zero: f64,
    /// Query floor: `loss ≥ csq_a − csq_b·τ` for clamped hypotheses.
    pub csq_a: f64,
    pub csq_b: f64,
    pub convex: bool,
    pub lipschitz_one: bool,
}

impl LossKind {
    pub fn spec(self) -> LossSpec {
        match self {
            LossKind::Hinge => LossSpec {
                kind: self,
                loss_at_zero: 1.0,
                slope_at_zero: 1.0,
                csq_a: 1.0,
                csq_b: 1.0,
                convex: true,
                lipschitz_one: true,
            },
            LossKind::HalfSquare => LossSpec {
                kind: self,
                loss_at_zero: 0.5,
                slope_at_zero: 1.0,
                csq_a: 0.5,
                csq_b: 1.0,
                convex: true,
                lipschitz_one: false,
            },
            LossKind::Square => LossSpec {
                kind: self,
                loss_at_zero: 1.0,
                slope_at_zero: 2.0,
                csq_a: 1.0,
                csq_b: 2.0,
                convex: true,
                lipschitz_one: false,
            },
            LossKind::ZeroOne => LossSpec {
                kind: self,
                loss_at_zero: 0.5,
                slope_at_zero: 0.0,
                csq_a: 0.5,
                csq_b: 0.5,
                convex: false,
                lipschitz_one: false,
            },
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl LossSpec {
    /// Pointwise loss value; `y` is a ±1 label.
    pub fn eval(&self, yhat: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => (1.0 - yhat * y).max(0.0),
            LossKind::HalfSquare => 0.5 * (y - yhat) * (y - yhat),
            LossKind::Square => (y - yhat) * (y - yhat),
            LossKind::ZeroOne => 0.5 - 0.5 * sign(yhat) * y,
        }
    }

    /// Pointwise (sub)gradient in ŷ. The hinge uses −y on the whole closed
    /// region `ŷy ≤ 1`, matching its linear form on [−1, 1].
    pub fn subgradient(&self, yhat: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => {
                if yhat * y <= 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            LossKind::HalfSquare => yhat - y,
            LossKind::Square => 2.0 * (yhat - y),
            LossKind::ZeroOne => 0.0,
        }
    }

    /// Whether the loss is convex with `ℓ(0,y) = ℓ₀` and `ℓ'(0,y) = −y`
    /// exactly, as the linear approximation bound requires.
    pub fn satisfies_slope_contract(&self) -> bool {
        self.convex && self.slope_at_zero == 1.0
    }

    fn require_slope_contract(&self, op: &str) -> Result<()> {
        if !self.satisfies_slope_contract() {
            return Err(Error::LossContract(format!(
                "{op} needs a convex loss with unit slope at zero; {:?} has convex={} slope={}",
                self.kind, self.convex, self.slope_at_zero
            )));
        }
        Ok(())
    }

    fn require_lipschitz(&self, op: &str) -> Result<()> {
        if !self.lipschitz_one {
            return Err(Error::LossContract(format!(
                "{op} needs a 1-Lipschitz loss; {:?} is not",
                self.kind
            )));
        }
        Ok(())
    }
}

/// A raw bound value with its vacuousness flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    /// True when the bound carries no information (≤ 0).
    pub vacuous: bool,
}

impl BoundValue {
    fn new(value: f64) -> Self {
        BoundValue { value, vacuous: value <= 0.0 }
    }
}

/// Loss floor for linear predictors over any `[−1,1]`-entry embedding of
/// dimension `n_embed` with weight norm at most `b`:
/// `ℓ₀ − b·√n_embed·√var`.
pub fn linear_approx_bound(
    loss: &LossSpec,
    b: f64,
    n_embed: f64,
    var: f64,
) -> Result<BoundValue> {
    loss.require_slope_contract("linear_approx_bound")?;
    if b < 0.0 || n_embed < 0.0 || !(0.0..=1.0 + 1e-12).contains(&var) {
        return Err(Error::Param(format!(
            "linear_approx_bound: b={b}, n_embed={n_embed}, var={var} out of range"
        )));
    }
    Ok(BoundValue::new(loss.loss_at_zero - b * n_embed.sqrt() * var.sqrt()))
}

/// Constant appearing in the sharper (proof-side) depth-two floor.
pub const SHALLOW_PROOF_CONSTANT: f64 = 5.241482788417902; // 2^(4/3)·3^(2/3)

/// Loss floors for depth-two networks with `k` hidden units, layer norms at
/// most `r`, over an `n`-dimensional second input.
///
/// Returns `(stated, sharper)`: the stated form uses constant 6, the sharper
/// form the exact constant `2^{4/3}·3^{2/3}`; the sharper floor is never
/// below the stated one.
pub fn shallow_net_bound(
    loss: &LossSpec,
    k: f64,
    r: f64,
    n: f64,
    var: f64,
) -> Result<(BoundValue, BoundValue)> {
    loss.require_slope_contract("shallow_net_bound")?;
    loss.require_lipschitz("shallow_net_bound")?;
    if k < 0.0 || r < 0.0 || n < 0.0 || !(0.0..=1.0 + 1e-12).contains(&var) {
        return Err(Error::Param(format!(
            "shallow_net_bound: k={k}, r={r}, n={n}, var={var} out of range"
        )));
    }
    let shape = k.sqrt() * r * r * n.powf(5.0 / 6.0) * var.cbrt();
    Ok((
        BoundValue::new(loss.loss_at_zero - 6.0 * shape),
        BoundValue::new(loss.loss_at_zero - SHALLOW_PROOF_CONSTANT * shape),
    ))
}

/// Loss floor for depth-two networks whose second-layer input weights lie on
/// the grid `ΔZ`: `ℓ₀ − 3√(2k)·r^{5/2}·n^{3/4}·√(var/Δ)`.
pub fn discrete_net_bound(
    loss: &LossSpec,
    k: f64,
    r: f64,
    n: f64,
    var: f64,
    delta: f64,
) -> Result<BoundValue> {
    loss.require_slope_contract("discrete_net_bound")?;
    if delta <= 0.0 {
        return Err(Error::Param(format!("discrete_net_bound: delta={delta} must be positive")));
    }
    if k < 0.0 || r < 0.0 || n < 0.0 || !(0.0..=1.0 + 1e-12).contains(&var) {
        return Err(Error::Param(format!(
            "discrete_net_bound: k={k}, r={r}, n={n}, var={var} out of range"
        )));
    }
    let value = loss.loss_at_zero
        - 3.0 * (2.0 * k).sqrt() * r.powf(2.5) * n.powf(0.75) * (var / delta).sqrt();
    Ok(BoundValue::new(value))
}

/// Queries needed before a correlation-query learner can beat the loss floor
/// `a_ℓ − b_ℓ·τ`: `τ²/var − 1`.
pub fn csq_query_bound(tau: f64, var: f64) -> Result<f64> {
    if tau <= 0.0 || var <= 0.0 {
        return Err(Error::Param(format!(
            "csq_query_bound: tau={tau} and var={var} must be positive"
        )));
    }
    Ok(tau * tau / var - 1.0)
}

/// Thresholds for grid-rounded and noisy gradient descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GdThresholds {
    /// Grid pitch above which most members see their first gradient round to
    /// zero: `4√(2·b²·n_params·var)`.
    pub min_delta: f64,
    /// Step budget under which noisy descent stays noise-driven:
    /// `Δ²/(32·b²·n_params·var)`; present when Δ was supplied.
    pub max_steps: Option<f64>,
    /// Family-average loss floor `¾(1 − √(8·var))`.
    pub loss_floor: f64,
    /// Step-size cap `1/(2σ·b·T)`; present when σ and the step budget were
    /// supplied.
    pub max_eta: Option<f64>,
}

/// Evaluates the gradient-descent thresholds for gradient bound `b`,
/// parameter count `n_params` and family variance `var`.
pub fn gd_thresholds(
    b: f64,
    n_params: f64,
    var: f64,
    delta: Option<f64>,
    sigma: Option<f64>,
    steps: Option<f64>,
) -> Result<GdThresholds> {
    if b <= 0.0 || n_params <= 0.0 {
        return Err(Error::Param(format!(
            "gd_thresholds: b={b} and n_params={n_params} must be positive"
        )));
    }
    if var <= 0.0 {
        return Err(Error::Param(format!("gd_thresholds: var={var} must be positive")));
    }
    let base = b * b * n_params * var;
    let min_delta = 4.0 * (2.0 * base).sqrt();
    let max_steps = match delta {
        Some(d) if d > 0.0 => Some(d * d / (32.0 * base)),
        Some(d) => return Err(Error::Param(format!("gd_thresholds: delta={d} must be positive"))),
        None => None,
    };
    let max_eta = match (sigma, steps) {
        (Some(s), Some(t)) if s > 0.0 && t > 0.0 => Some(1.0 / (2.0 * s * b * t)),
        (Some(s), Some(t)) => {
            return Err(Error::Param(format!(
                "gd_thresholds: sigma={s} and steps={t} must be positive"
            )))
        }
        _ => None,
    };
    Ok(GdThresholds {
        min_delta,
        max_steps,
        loss_floor: 0.75 * (1.0 - (8.0 * var).sqrt()),
        max_eta,
    })
}
