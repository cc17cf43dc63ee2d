//! Adversarial correlation-query oracle, learner harness and transcript
//! audit.
//!
//! The oracle holds the whole family and answers every correlation query
//! with 0, which is a legal τ-tolerant answer for every member whose true
//! correlation is below τ in magnitude. Members at or above τ are struck
//! from the surviving set; since the mean squared correlation is at most
//! `Var(A)`, each query eliminates at most `(Var(A)/τ²)·|A|` members. A
//! learner that stops before `τ²/Var − 1` queries therefore always leaves a
//! survivor that is consistent with every response *and* has correlation at
//! most τ with the clamped hypothesis — pinning its loss above `a − b·τ`.
//!
//! General statistical queries `ψ(x, y)` are deliberately rejected: only the
//! correlation form `ψ(x, y) = y·φ(x)` is covered by the guarantee in the
//! distribution-free setting.
//!
//! Ties at exactly τ count as eliminated, so learner authors cannot exploit
//! boundary queries.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::LossSpec;
use crate::error::{Error, Result};
use crate::family::LabeledFamily;
use crate::numeric::pairwise_map_sum;

/// A bounded probe `φ` submitted as a correlation query.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationQuery {
    values: Vec<f64>,
}

impl CorrelationQuery {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "query table has {} entries for a dimension-{n} cube",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&v| !(v.abs() <= 1.0 + 1e-12)) {
            return Err(Error::Norm(format!("query entry {bad} exceeds sup-norm 1")));
        }
        Ok(CorrelationQuery { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// SHA-256 over the little-endian bytes of the table.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for v in &self.values {
            hasher.update(v.to_le_bytes());
        }
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One answered query in the transcript. The eliminated list is enough to
/// replay the surviving chain without the query tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub digest: String,
    pub response: f64,
    /// Members of the full family whose correlation magnitude reached τ.
    pub eliminated: Vec<usize>,
    /// Full query table, only when the oracle was built with table storage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
}

/// Oracle state: the family, the tolerance, the surviving set and the
/// transcript. Queries are processed serially; transcript order is
/// semantics.
#[derive(Debug, Clone)]
pub struct CsqOracle<'a> {
    family: &'a LabeledFamily,
    tau: f64,
    surviving: Vec<bool>,
    transcript: Vec<TranscriptEntry>,
    store_tables: bool,
}

impl<'a> CsqOracle<'a> {
    pub fn new(family: &'a LabeledFamily, tau: f64, store_tables: bool) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Param(format!("tolerance {tau} must be positive")));
        }
        Ok(CsqOracle {
            family,
            tau,
            surviving: vec![true; family.len()],
            transcript: Vec::new(),
            store_tables,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn family(&self) -> &LabeledFamily {
        self.family
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn survivors(&self) -> Vec<usize> {
        self.surviving
            .iter()
            .enumerate()
            .filter_map(|(i, &alive)| alive.then_some(i))
            .collect()
    }

    pub fn survivor_count(&self) -> usize {
        self.surviving.iter().filter(|&&v| v).count()
    }

    /// Answers a query with 0 and strikes every member of the family whose
    /// correlation with φ reaches τ in magnitude.
    ///
    /// The returned 0 is τ-legal for every survivor: after the strike, all
    /// surviving members satisfy `|⟨f, φ⟩_D − 0| < τ`.
    pub fn answer(&mut self, query: &CorrelationQuery) -> Result<f64> {
        if query.values.len() != 1 << self.family.dimension() {
            return Err(Error::Dimension(format!(
                "query over {} entries vs family dimension {}",
                query.values.len(),
                self.family.dimension()
            )));
        }
        let correlations = self.family.correlations(&query.values);
        let eliminated: Vec<usize> = correlations
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c.abs() >= self.tau).then_some(i))
            .collect();
        for &i in &eliminated {
            self.surviving[i] = false;
        }
        self.transcript.push(TranscriptEntry {
            digest: query.digest(),
            response: 0.0,
            eliminated,
            table: self.store_tables.then(|| query.values.clone()),
        });
        Ok(0.0)
    }

    /// Clamps the hypothesis, selects a surviving member with correlation at
    /// most τ against the clamped hypothesis, and reports that member's
    /// exact loss.
    ///
    /// Among qualifying survivors the one with the largest raw-hypothesis
    /// loss is reported (ties to the lowest index). Errors with
    /// `BudgetExceeded` when no survivor qualifies — the learner out-queried
    /// the guarantee.
    pub fn finalize(&self, hypothesis: &[f64], loss: &LossSpec) -> Result<FinalizeReport> {
        let n = self.family.dimension();
        if hypothesis.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "hypothesis table has {} entries for a dimension-{n} cube",
                hypothesis.len()
            )));
        }
        let clamped: Vec<f64> = match loss.kind {
            crate::bounds::LossKind::ZeroOne => hypothesis
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
            _ => hypothesis.iter().map(|&v| v.clamp(-1.0, 1.0)).collect(),
        };
        let correlations = self.family.correlations(&clamped);

        let mut chosen: Option<(usize, f64, f64)> = None; // (index, loss of h, corr)
        for (i, alive) in self.surviving.iter().enumerate() {
            if !alive || correlations[i].abs() > self.tau {
                continue;
            }
            let raw_loss = self.member_loss(i, hypothesis, loss);
            let better = match &chosen {
                None => true,
                Some((_, best_loss, _)) => raw_loss > *best_loss,
            };
            if better {
                chosen = Some((i, raw_loss, correlations[i]));
            }
        }
        let (worst_member, loss_lb, correlation) = chosen.ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "no surviving member has correlation ≤ {} with the clamped hypothesis",
                self.tau
            ))
        })?;
        let clamped_loss = self.member_loss(worst_member, &clamped, loss);
        Ok(FinalizeReport { worst_member, loss_lb, clamped_loss, correlation, clamped_h: clamped })
    }

    fn member_loss(&self, member: usize, hypothesis: &[f64], loss: &LossSpec) -> f64 {
        let m = &self.family.members()[member];
        let support = self.family.support();
        pairwise_map_sum(support.len(), &|k| {
            let x = support[k] as usize;
            m.dist.prob(x) * loss.eval(hypothesis[x], m.f.eval_index(x) as f64)
        })
    }
}

/// Result of auditing a final hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalizeReport {
    /// Surviving member certifying the floor.
    pub worst_member: usize,
    /// Exact loss of the raw hypothesis on that member; at least the loss of
    /// the clamped hypothesis, hence at least `a − b·τ`.
    pub loss_lb: f64,
    /// Exact loss of the clamped hypothesis on that member.
    pub clamped_loss: f64,
    /// Correlation of the clamped hypothesis with that member (|·| ≤ τ).
    pub correlation: f64,
    pub clamped_h: Vec<f64>,
}

/// Replays a transcript's elimination lists, returning the surviving sets
/// after each entry. The chain is decreasing by construction.
pub fn replay_transcript(member_count: usize, transcript: &[TranscriptEntry]) -> Vec<Vec<usize>> {
    let mut alive = vec![true; member_count];
    let mut chain = Vec::with_capacity(transcript.len());
    for entry in transcript {
        for &i in &entry.eliminated {
            if i < member_count {
                alive[i] = false;
            }
        }
        chain.push(
            alive
                .iter()
                .enumerate()
                .filter_map(|(i, &a)| a.then_some(i))
                .collect(),
        );
    }
    chain
}

/// A query-issuing strategy driven by the harness.
pub trait Learner {
    /// Next query, given the responses so far; `None` ends the query phase.
    fn next_query(&mut self, responses: &[f64]) -> Option<CorrelationQuery>;
    /// Final hypothesis as a full-cube real table.
    fn hypothesis(&mut self) -> Vec<f64>;
}

/// A learner that plays a fixed list of queries and a fixed hypothesis.
pub struct ScriptedLearner {
    queries: std::collections::VecDeque<CorrelationQuery>,
    hypothesis: Vec<f64>,
}

impl ScriptedLearner {
    pub fn new(queries: Vec<CorrelationQuery>, hypothesis: Vec<f64>) -> Self {
        ScriptedLearner { queries: queries.into(), hypothesis }
    }
}

impl Learner for ScriptedLearner {
    fn next_query(&mut self, _responses: &[f64]) -> Option<CorrelationQuery> {
        self.queries.pop_front()
    }

    fn hypothesis(&mut self) -> Vec<f64> {
        self.hypothesis.clone()
    }
}

/// Outcome of a full harness run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerReport {
    pub queries_asked: usize,
    /// True when the learner wanted more queries than `max_queries`.
    pub truncated: bool,
    /// `τ²/var − 1` with the variance value used.
    pub query_bound: f64,
    pub variance_used: f64,
    pub survivor_count: usize,
    /// Per-query elimination counts, for the counting-certificate audit.
    pub eliminations_per_query: Vec<usize>,
    /// Loss audit of the final hypothesis; `None` when the learner
    /// out-queried the guarantee and no qualifying survivor exists.
    pub finalize: Option<FinalizeReport>,
    pub transcript: Vec<TranscriptEntry>,
}

/// Drives a learner against the oracle: queries first, then the hypothesis
/// audit. `var_hint` supplies the family variance for the query-budget
/// comparison; when absent the spectral upper bound is computed.
pub fn run_learner<L: Learner>(
    learner: &mut L,
    family: &LabeledFamily,
    tau: f64,
    loss: &LossSpec,
    max_queries: usize,
    store_tables: bool,
    var_hint: Option<f64>,
) -> Result<LearnerReport> {
    let variance_used = match var_hint {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::Param(format!("variance hint {v} must be positive"))),
        None => crate::variance::variance_upper_spectral(family)?,
    };
    let mut oracle = CsqOracle::new(family, tau, store_tables)?;
    let mut responses = Vec::new();
    let mut truncated = false;
    while let Some(query) = learner.next_query(&responses) {
        if responses.len() >= max_queries {
            truncated = true;
            break;
        }
        responses.push(oracle.answer(&query)?);
    }
    let hypothesis = learner.hypothesis();
    let finalize = match oracle.finalize(&hypothesis, loss) {
        Ok(report) => Some(report),
        Err(Error::BudgetExceeded(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(LearnerReport {
        queries_asked: responses.len(),
        truncated,
        query_bound: crate::bounds::csq_query_bound(tau, variance_used)?,
        variance_used,
        survivor_count: oracle.survivor_count(),
        eliminations_per_query: oracle.transcript().iter().map(|e| e.eliminated.len()).collect(),
        finalize,
        transcript: oracle.transcript,
    })
}
