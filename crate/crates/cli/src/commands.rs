//! Command implementations: each loads its config, runs the library, and
//! writes deterministic artifacts under the output directory.

use std::path::{Path, PathBuf};

use anyhow::Context;
use famvar::bounds::{BoundValue, GdThresholds};
use famvar::csq::TranscriptEntry;
use famvar::{
    family_profile, family_stuck_fraction, gd_thresholds, run_gd, run_learner, variance_report,
    CorrelationQuery, Embedding, GdRun, HypothesisModel, LabeledFamily, LinearModel, LossKind,
    ScriptedLearner, TrainConfig, VarianceReport,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::*;
use crate::output::{checks_table, write_csv, write_json, write_jsonl, Check, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub struct CommandCtx {
    pub provenance: Provenance,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl CommandCtx {
    fn announce(&self, path: &Path) {
        println!("wrote {}", path.display());
    }

    fn maybe_print_checks(&self, checks: &[Check]) {
        if self.format == Format::Text && !checks.is_empty() {
            print!("{}", checks_table(checks));
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FamilyMeta {
    dimension: usize,
    member_count: usize,
    support_size: usize,
}

impl FamilyMeta {
    fn of(a: &LabeledFamily) -> Self {
        FamilyMeta {
            dimension: a.dimension(),
            member_count: a.len(),
            support_size: a.support().len(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VarianceOut {
    provenance: Provenance,
    family: FamilyMeta,
    report: VarianceReport,
    checks: Vec<Check>,
}

pub fn cmd_variance(ctx: &CommandCtx, cfg: &VarianceConfig) -> anyhow::Result<Vec<Check>> {
    let family = cfg.family.load()?;
    let report = variance_report(&family, cfg.mode.into())?;
    let mut checks =
        vec![Check::ge("variance_upper_ge_lower", report.lower_member, report.upper_spectral)];
    if let Some(exact) = report.exact {
        checks.push(Check::ge("variance_exact_ge_lower", report.lower_member, exact));
        checks.push(Check::le("variance_exact_le_upper", report.upper_spectral, exact));
    }
    let out = VarianceOut {
        provenance: ctx.provenance.clone(),
        family: FamilyMeta::of(&family),
        report,
        checks: checks.clone(),
    };
    let path = write_json(&ctx.out_dir, "variance_report.json", &out)?;
    ctx.announce(&path);
    ctx.maybe_print_checks(&checks);
    Ok(checks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ShallowOut {
    stated: BoundValue,
    sharper: BoundValue,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BoundsOut {
    provenance: Provenance,
    loss: LossKind,
    var: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    linear: Option<BoundValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shallow: Option<ShallowOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discrete: Option<BoundValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    csq_queries_needed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gd: Option<GdThresholds>,
}

pub fn cmd_bounds(ctx: &CommandCtx, cfg: &BoundsConfig) -> anyhow::Result<Vec<Check>> {
    let loss = cfg.loss.spec();
    let linear = cfg
        .linear
        .map(|l| famvar::linear_approx_bound(&loss, l.b, l.n_embed, cfg.var))
        .transpose()?;
    let shallow = cfg
        .shallow
        .map(|s| famvar::shallow_net_bound(&loss, s.k, s.r, s.n, cfg.var))
        .transpose()?
        .map(|(stated, sharper)| ShallowOut { stated, sharper });
    let discrete = cfg
        .discrete
        .map(|d| famvar::discrete_net_bound(&loss, d.k, d.r, d.n, cfg.var, d.delta))
        .transpose()?;
    let csq_queries_needed =
        cfg.csq.map(|c| famvar::csq_query_bound(c.tau, cfg.var)).transpose()?;
    let gd = cfg
        .gd
        .map(|g| gd_thresholds(g.b, g.n_params, cfg.var, g.delta, g.sigma, g.steps))
        .transpose()?;
    let out = BoundsOut {
        provenance: ctx.provenance.clone(),
        loss: cfg.loss,
        var: cfg.var,
        linear,
        shallow,
        discrete,
        csq_queries_needed,
        gd,
    };
    let path = write_json(&ctx.out_dir, "bounds_report.json", &out)?;
    ctx.announce(&path);
    Ok(Vec::new())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrainLinearOut {
    provenance: Provenance,
    family: FamilyMeta,
    loss: LossKind,
    embedding_dim: usize,
    step_size: f64,
    steps: usize,
    radius: f64,
    bound: BoundValue,
    variance_used: f64,
    variance_exact: bool,
    mean_loss: f64,
    min_loss: f64,
    mean_grad_zero_sq: f64,
    mean_grad_zero_norm: f64,
    grad_sq_cap: f64,
    checks: Vec<Check>,
}

pub fn cmd_train_linear(ctx: &CommandCtx, cfg: &TrainLinearConfig) -> anyhow::Result<Vec<Check>> {
    let family = cfg.family.load()?;
    let embedding: Embedding = cfg.embedding.load(family.dimension())?;
    let train_cfg = TrainConfig {
        step_size: cfg.step_size,
        steps: cfg.steps,
        radius: cfg.radius,
        seed: ctx.provenance.seed,
    };
    let loss = cfg.loss.spec();
    let profile = family_profile(&family, &embedding, &loss, &train_cfg)?;

    let checks = vec![
        Check::ge("train_mean_loss_ge_linear_floor", profile.bound.value, profile.mean_loss),
        Check::ge("train_min_loss_ge_linear_floor", profile.bound.value, profile.min_loss),
        Check::le("train_mean_sq_grad_le_cap", profile.grad_sq_cap, profile.mean_grad_zero_sq),
        Check::le(
            "train_mean_grad_norm_le_cap",
            profile.grad_sq_cap.sqrt(),
            profile.mean_grad_zero_norm,
        ),
    ];
    let rows: Vec<Vec<String>> = profile
        .per_member
        .iter()
        .map(|m| {
            vec![
                m.member.to_string(),
                format!("{:.17e}", m.loss_achieved),
                format!("{:.17e}", m.grad_zero_sq_norm.sqrt()),
            ]
        })
        .collect();
    let csv_path = write_csv(
        &ctx.out_dir,
        "train_linear_members.csv",
        &["member_id", "loss_achieved", "grad0_norm"],
        &rows,
    )?;
    ctx.announce(&csv_path);

    let out = TrainLinearOut {
        provenance: ctx.provenance.clone(),
        family: FamilyMeta::of(&family),
        loss: cfg.loss,
        embedding_dim: embedding.dim(),
        step_size: cfg.step_size,
        steps: cfg.steps,
        radius: cfg.radius,
        bound: profile.bound,
        variance_used: profile.variance_used,
        variance_exact: profile.variance_exact,
        mean_loss: profile.mean_loss,
        min_loss: profile.min_loss,
        mean_grad_zero_sq: profile.mean_grad_zero_sq,
        mean_grad_zero_norm: profile.mean_grad_zero_norm,
        grad_sq_cap: profile.grad_sq_cap,
        checks: checks.clone(),
    };
    let path = write_json(&ctx.out_dir, "train_linear_summary.json", &out)?;
    ctx.announce(&path);
    ctx.maybe_print_checks(&checks);
    Ok(checks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CsqFinalizeOut {
    worst_member: usize,
    loss_lb: f64,
    clamped_loss: f64,
    correlation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CsqOut {
    provenance: Provenance,
    family: FamilyMeta,
    tau: f64,
    loss: LossKind,
    queries_asked: usize,
    truncated: bool,
    query_bound: f64,
    variance_used: f64,
    survivor_count: usize,
    max_eliminations: usize,
    elimination_cap: f64,
    loss_floor: f64,
    /// Absent when the learner out-queried the guarantee.
    #[serde(skip_serializing_if = "Option::is_none")]
    finalize: Option<CsqFinalizeOut>,
    budget_exhausted: bool,
    checks: Vec<Check>,
}

pub fn cmd_csq(ctx: &CommandCtx, cfg: &CsqConfig) -> anyhow::Result<Vec<Check>> {
    let family = cfg.family.load()?;
    let n = family.dimension();
    let queries = cfg
        .learner
        .queries
        .iter()
        .map(|spec| Ok(CorrelationQuery::new(n, spec.materialize(&family)?)?))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let hypothesis = cfg.learner.hypothesis.materialize(&family)?;
    let loss = cfg.loss.spec();
    let mut learner = ScriptedLearner::new(queries, hypothesis);
    let report = run_learner(
        &mut learner,
        &family,
        cfg.tau,
        &loss,
        cfg.max_queries,
        cfg.store_tables,
        None,
    )?;

    let elimination_cap = report.variance_used / (cfg.tau * cfg.tau) * family.len() as f64;
    let max_eliminations = report.eliminations_per_query.iter().copied().max().unwrap_or(0);
    let loss_floor = loss.csq_a - loss.csq_b * cfg.tau;
    let mut checks =
        vec![Check::le("csq_eliminations_le_cap", elimination_cap, max_eliminations as f64)];
    if let Some(fin) = &report.finalize {
        checks.push(Check::ge("csq_survivor_loss_ge_floor", loss_floor, fin.loss_lb));
        checks.push(Check::ge("csq_clamped_loss_ge_floor", loss_floor, fin.clamped_loss));
    }

    let transcript_path =
        write_jsonl::<TranscriptEntry>(&ctx.out_dir, "csq_transcript.jsonl", &report.transcript)?;
    ctx.announce(&transcript_path);

    let out = CsqOut {
        provenance: ctx.provenance.clone(),
        family: FamilyMeta::of(&family),
        tau: cfg.tau,
        loss: cfg.loss,
        queries_asked: report.queries_asked,
        truncated: report.truncated,
        query_bound: report.query_bound,
        variance_used: report.variance_used,
        survivor_count: report.survivor_count,
        max_eliminations,
        elimination_cap,
        loss_floor,
        finalize: report.finalize.as_ref().map(|f| CsqFinalizeOut {
            worst_member: f.worst_member,
            loss_lb: f.loss_lb,
            clamped_loss: f.clamped_loss,
            correlation: f.correlation,
        }),
        budget_exhausted: report.finalize.is_none(),
        checks: checks.clone(),
    };
    let path = write_json(&ctx.out_dir, "csq_report.json", &out)?;
    ctx.announce(&path);
    ctx.maybe_print_checks(&checks);
    Ok(checks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GdRunRow {
    member_id: usize,
    mode: famvar::GdMode,
    stuck_at_zero: bool,
    final_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GdOut {
    provenance: Provenance,
    family: FamilyMeta,
    mode: famvar::GdMode,
    eta: f64,
    steps: usize,
    delta: f64,
    sigma: f64,
    gradient_bound: f64,
    param_dim: usize,
    mean_final_loss: f64,
    stuck_fraction_in_runs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    stuck: Option<famvar::gd::StuckReport>,
    thresholds: GdThresholds,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

pub fn cmd_gd(ctx: &CommandCtx, cfg: &GdConfig) -> anyhow::Result<Vec<Check>> {
    let family = cfg.family.load()?;
    let model = match &cfg.model {
        ModelSource::CoordinateLinear => {
            LinearModel::new(Embedding::coordinate(family.dimension())?)
        }
        ModelSource::RandomSignLinear { dim, seed } => {
            LinearModel::new(Embedding::random_sign(family.dimension(), *dim, *seed)?)
        }
    };
    let run = GdRun {
        eta: cfg.eta,
        steps: cfg.steps,
        delta: cfg.delta,
        sigma: cfg.sigma,
        seed: ctx.provenance.seed,
        mode: cfg.mode.into(),
    };

    let records = family
        .members()
        .par_iter()
        .enumerate()
        .map(|(i, member)| Ok((i, run_gd(member, &model, &run, i as u64)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let rows: Vec<GdRunRow> = records
        .iter()
        .map(|(i, r)| GdRunRow {
            member_id: *i,
            mode: r.mode,
            stuck_at_zero: r.stuck_at_zero,
            final_loss: r.final_loss,
        })
        .collect();
    let runs_path = write_jsonl(&ctx.out_dir, "gd_runs.jsonl", &rows)?;
    ctx.announce(&runs_path);

    let count = rows.len() as f64;
    let mean_final_loss = rows.iter().map(|r| r.final_loss).sum::<f64>() / count;
    let stuck_fraction_in_runs =
        rows.iter().filter(|r| r.stuck_at_zero).count() as f64 / count;
    let mut warnings: Vec<String> = Vec::new();
    for (i, r) in &records {
        for w in &r.warnings {
            warnings.push(format!("member {i}: {w}"));
        }
    }
    warnings.sort();
    warnings.dedup();

    let stuck_delta = cfg.stuck_delta.unwrap_or(cfg.delta);
    let stuck = if stuck_delta > 0.0 {
        Some(family_stuck_fraction(&family, &model, stuck_delta)?)
    } else {
        None
    };
    let variance_used = match &stuck {
        Some(s) => s.variance_used,
        None => famvar::variance_upper_spectral(&family)?,
    };
    let thresholds = gd_thresholds(
        model.gradient_bound(),
        model.param_dim() as f64,
        variance_used,
        (cfg.delta > 0.0).then_some(cfg.delta),
        (cfg.sigma > 0.0).then_some(cfg.sigma),
        Some(cfg.steps.max(1) as f64),
    )?;

    let mut checks = Vec::new();
    if let Some(s) = &stuck {
        checks.push(Check::ge("gd_stuck_fraction_ge_markov_floor", s.markov_floor, s.fraction));
        checks.push(Check::le(
            "gd_initial_mean_sq_grad_le_cap",
            s.mean_grad_sq_cap,
            s.mean_grad_sq,
        ));
    }
    // The loss floor applies once the grid pitch reaches the threshold.
    if run.mode != famvar::GdMode::Exact && cfg.delta >= thresholds.min_delta - 1e-12 {
        checks.push(Check::ge(
            "gd_mean_final_loss_ge_floor",
            thresholds.loss_floor,
            mean_final_loss,
        ));
    }

    let out = GdOut {
        provenance: ctx.provenance.clone(),
        family: FamilyMeta::of(&family),
        mode: run.mode,
        eta: cfg.eta,
        steps: cfg.steps,
        delta: cfg.delta,
        sigma: cfg.sigma,
        gradient_bound: model.gradient_bound(),
        param_dim: model.param_dim(),
        mean_final_loss,
        stuck_fraction_in_runs,
        stuck,
        thresholds,
        checks: checks.clone(),
        warnings,
    };
    let path = write_json(&ctx.out_dir, "gd_summary.json", &out)?;
    ctx.announce(&path);
    ctx.maybe_print_checks(&checks);
    Ok(checks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PatternOut {
    provenance: Provenance,
    inner_dim: usize,
    big_n: usize,
    member_count: usize,
    max_normalization_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    encoded_dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity_violations: Option<usize>,
    checks: Vec<Check>,
}

pub fn cmd_pattern(ctx: &CommandCtx, cfg: &PatternConfig) -> anyhow::Result<Vec<Check>> {
    let spec = pattern_spec(&cfg.inner, cfg.big_n, &cfg.mu)?;
    let pf = famvar::build_pattern_family(spec)?;

    let manifest = pf.family.to_manifest();
    let manifest_path = write_json(&ctx.out_dir, "family.json", &manifest)?;
    ctx.announce(&manifest_path);

    let max_dev = pf
        .family
        .members()
        .iter()
        .map(|m| (m.dist.probs().iter().sum::<f64>() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let mut checks = vec![Check::le("pattern_member_normalization", 1e-12, max_dev)];

    if cfg.emit_matrices {
        let n = pf.spec.inner_dim();
        for (name, table) in [
            ("inner_pattern_matrix.csv", pf.spec.inner.to_real()),
            ("mu_pattern_matrix.csv", pf.spec.mu.probs().to_vec()),
        ] {
            let m = famvar::pattern_matrix(cfg.big_n, n, &table)?;
            let rows: Vec<Vec<String>> = m
                .outer_iter()
                .map(|row| row.iter().map(|v| format!("{v:.17e}")).collect())
                .collect();
            let header: Vec<String> = (0..m.ncols()).map(|c| format!("c{c}")).collect();
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let path = write_csv(&ctx.out_dir, name, &header_refs, &rows)?;
            ctx.announce(&path);
        }
    }

    let mut encoded_dimension = None;
    let mut identity_violations = None;
    if cfg.encode {
        let enc = famvar::encode_subcube(&pf)?;
        encoded_dimension = Some(enc.n_encoded);
        let enc_manifest = enc.family.to_manifest();
        let enc_path = write_json(&ctx.out_dir, "encoded_family.json", &enc_manifest)?;
        ctx.announce(&enc_path);
        if let InnerSource::AndOr { m } = cfg.inner {
            let violations =
                famvar::pattern::encoded_identity_violations(&pf, &enc, m, 1000, ctx.provenance.seed)?;
            identity_violations = Some(violations);
            checks.push(Check::le("pattern_encoding_identity_violations", 0.0, violations as f64));
        }
        // Probe-level variance transport along the encoding.
        let lower_orig = famvar::variance_lower_members(&pf.family);
        let lower_enc = famvar::variance_lower_members(&enc.family);
        checks.push(Check::le(
            "pattern_encoding_lower_bound_drift",
            1e-12,
            (lower_orig - lower_enc).abs(),
        ));
    }

    let out = PatternOut {
        provenance: ctx.provenance.clone(),
        inner_dim: pf.spec.inner_dim(),
        big_n: cfg.big_n,
        member_count: pf.family.len(),
        max_normalization_deviation: max_dev,
        encoded_dimension,
        identity_violations,
        checks: checks.clone(),
    };
    let path = write_json(&ctx.out_dir, "pattern_report.json", &out)?;
    ctx.announce(&path);
    ctx.maybe_print_checks(&checks);
    Ok(checks)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportRow {
    source: String,
    name: String,
    bound: f64,
    empirical: f64,
    relation: crate::output::Relation,
    satisfied: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportOut {
    provenance: Provenance,
    rows: Vec<ReportRow>,
    all_satisfied: bool,
}

/// Aggregates the checks of previously produced result files, re-deriving
/// every satisfaction flag from the stored numbers. Returns whether all
/// checks hold.
pub fn cmd_report(ctx: &CommandCtx, cfg: &ReportConfig) -> anyhow::Result<bool> {
    let mut rows = Vec::new();
    for input in &cfg.inputs {
        let bytes = std::fs::read(input)
            .with_context(|| format!("reading result file {}", input.display()))?;
        let value: serde_json::Value = serde_json::from_slice(&bytes)
            .with_context(|| format!("parsing result file {}", input.display()))?;
        let checks: Vec<Check> = match value.get("checks") {
            Some(c) => serde_json::from_value(c.clone())
                .with_context(|| format!("parsing checks in {}", input.display()))?,
            None => Vec::new(),
        };
        let source = input
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| input.display().to_string());
        for check in checks {
            rows.push(ReportRow {
                source: source.clone(),
                name: check.name.clone(),
                bound: check.bound,
                empirical: check.empirical,
                relation: check.relation,
                satisfied: check.revalidate(),
            });
        }
    }
    let all_satisfied = rows.iter().all(|r| r.satisfied);
    let out =
        ReportOut { provenance: ctx.provenance.clone(), rows: rows.clone(), all_satisfied };
    let json_path = write_json(&ctx.out_dir, "report.json", &out)?;
    ctx.announce(&json_path);

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.source.clone(),
                r.name.clone(),
                format!("{:.17e}", r.bound),
                format!("{:.17e}", r.empirical),
                match r.relation {
                    crate::output::Relation::Ge => "ge".to_string(),
                    crate::output::Relation::Le => "le".to_string(),
                },
                r.satisfied.to_string(),
            ]
        })
        .collect();
    let csv_path = write_csv(
        &ctx.out_dir,
        "report.csv",
        &["source", "name", "bound", "empirical", "relation", "satisfied"],
        &csv_rows,
    )?;
    ctx.announce(&csv_path);

    if ctx.format == Format::Text {
        let checks: Vec<Check> = rows
            .iter()
            .map(|r| Check {
                name: format!("{}:{}", r.source, r.name),
                bound: r.bound,
                empirical: r.empirical,
                relation: r.relation,
                satisfied: r.satisfied,
            })
            .collect();
        print!("{}", checks_table(&checks));
    }
    Ok(all_satisfied)
}
