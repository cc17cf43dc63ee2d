//! Variance analysis of labeled distribution families over Boolean cubes.
//!
//! A *labeled distribution family* is a finite set of pairs `(f, D)` where
//! `f : {±1}^n → {±1}` is a target function and `D` is a distribution over
//! the cube. The central quantity is the family variance
//!
//! ```text
//! Var(A, φ) = mean over (f, D) in A of ⟨f, φ⟩_D²,      ⟨f, φ⟩_D = Σ_x D(x) f(x) φ(x)
//! Var(A)    = sup over ‖φ‖_∞ ≤ 1 of Var(A, φ)
//! ```
//!
//! A small `Var(A)` certifies that the family is hard to handle for a wide
//! range of methods, and this crate provides both sides of that story:
//!
//! * [`variance`] computes `Var(A)` exactly (vertex enumeration on small
//!   supports), as a spectral upper bound, and as a member-probe lower bound.
//! * [`bounds`] evaluates the closed-form loss floors implied by a variance
//!   value: linear classes over fixed embeddings, depth-two networks,
//!   correlation-query learners, and approximate/noisy gradient descent.
//! * [`linear_train`], [`csq`] and [`gd`] are simulators that check those
//!   floors empirically: projected subgradient training, an adversarial
//!   correlation-query oracle, and grid-rounded gradient descent.
//! * [`pattern`] builds the selector/shift ("pattern") families whose
//!   variance decays super-polynomially, at desk-scale parameters.
//!
//! Conventions used throughout: cube points are indexed by their bit
//! pattern, bit `i` set means coordinate `i` equals −1; logical TRUE is +1.

pub mod boolean;
pub mod bounds;
pub mod csq;
pub mod error;
pub mod family;
pub mod formula;
pub mod gd;
pub mod linear_train;
pub mod numeric;
pub mod pattern;
pub mod variance;

pub use boolean::{
    induced_pair, weighted_inner, BooleanFunction, Distribution, ParityDescriptor, Point, MAX_DIM,
};
pub use bounds::{
    csq_query_bound, discrete_net_bound, gd_thresholds, linear_approx_bound, shallow_net_bound,
    BoundValue, GdThresholds, LossKind, LossSpec,
};
pub use csq::{run_learner, CorrelationQuery, CsqOracle, Learner, LearnerReport, ScriptedLearner};
pub use error::{Error, Result};
pub use family::{apply_isomorphism, FamilyOperator, LabeledFamily, LabeledPair};
pub use formula::Formula;
pub use gd::{
    discretize_net, family_stuck_fraction, population_gradient, round_to_grid, run_gd, Activation,
    GdMode, GdRun, HypothesisModel, LinearModel, TwoLayerNet,
};
pub use linear_train::{family_profile, grad_check, train_linear, Embedding, TrainConfig};
pub use pattern::{
    build_pattern_family, encode_subcube, hadamard_norm, mp_formula, mp_function, pattern_matrix,
    project_xor, BlockSelector, PatternFamily, PatternFamilySpec, SubcubeEncoding,
};
pub use variance::{
    variance_at, variance_exact, variance_lower_members, variance_report, variance_upper_spectral,
    VarianceMode, VarianceReport,
};
