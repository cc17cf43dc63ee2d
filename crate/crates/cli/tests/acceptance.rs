//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see them).
//!
//! The full-scale constructions (variance 17^{-2m} at N = 17⁶n and the
//! circuit-class corollaries) are not reproducible on dense tables — the
//! tool says so itself via its infeasible-scale error — so the suite pins
//! the exact small-scale identities and property families below.

use std::process::Command;
use std::time::Instant;

use famvar::bounds::LossKind;
use famvar::csq::{CorrelationQuery, CsqOracle};
use famvar::{
    build_pattern_family, encode_subcube, family_stuck_fraction, grad_check, run_gd, run_learner, train_linear, variance_exact, variance_lower_members,
    variance_upper_spectral, Activation, BooleanFunction, Distribution, Embedding, Formula, GdMode,
    GdRun, HypothesisModel, LabeledFamily, LabeledPair, LinearModel, ParityDescriptor,
    PatternFamilySpec, ScriptedLearner, TrainConfig, TwoLayerNet,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_family(n: usize, members: usize, seed: u64) -> LabeledFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 1usize << n;
    let pairs = (0..members)
        .map(|_| {
            let table: Vec<i8> =
                (0..size).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let weights: Vec<f64> = (0..size).map(|_| -rng.random::<f64>().ln()).collect();
            LabeledPair::new(
                BooleanFunction::new(n, table).unwrap(),
                Distribution::normalized(n, weights).unwrap(),
            )
            .unwrap()
        })
        .collect();
    LabeledFamily::full_support(n, pairs).unwrap()
}

#[test]
fn acceptance_01_parity_variance_closed_form() {
    for n in 2..=4usize {
        let a = LabeledFamily::parity(n).unwrap();
        let start = Instant::now();
        let (v, _) = variance_exact(&a).unwrap();
        let elapsed = start.elapsed();
        let expect = 0.5f64.powi(n as i32);
        assert!(
            (v - expect).abs() < 1e-12,
            "n={n}: exact {v} vs closed form {expect}"
        );
        if n == 4 {
            assert!(elapsed.as_secs_f64() < 10.0, "n=4 exact took {elapsed:?}");
            println!(
                "[criterion 01] PASS: parity exact variance = 2^-n for n=2..4 \
                 (n=4 ran in {:.3}s < 10s)",
                elapsed.as_secs_f64()
            );
        }
    }
}

#[test]
fn acceptance_02_variance_sandwich() {
    for seed in 0..50u64 {
        let a = random_family(3, 2 + (seed % 7) as usize, 7000 + seed);
        let (exact, _) = variance_exact(&a).unwrap();
        let lower = variance_lower_members(&a);
        let upper = variance_upper_spectral(&a).unwrap();
        assert!(lower <= exact + 1e-9, "seed {seed}: lower {lower} > exact {exact}");
        assert!(exact <= upper + 1e-9, "seed {seed}: exact {exact} > upper {upper}");
    }
    // The parity family's operator Gram is a scaled identity, so the
    // spectral bound coincides with the exact value.
    for n in 2..=4usize {
        let a = LabeledFamily::parity(n).unwrap();
        let (exact, _) = variance_exact(&a).unwrap();
        let upper = variance_upper_spectral(&a).unwrap();
        assert!((upper - exact).abs() < 1e-9, "n={n}: upper {upper} vs exact {exact}");
    }
    println!(
        "[criterion 02] PASS: lower ≤ exact ≤ upper on 50 seeded families; \
         spectral bound tight on parity families"
    );
}

#[test]
fn acceptance_03_gradient_norm_chain() {
    let mut worst_slack = f64::INFINITY;
    for n in [4usize, 7, 10] {
        let a = LabeledFamily::parity(n).unwrap();
        let var = 0.5f64.powi(n as i32);
        let embeddings = vec![
            Embedding::random_sign(n, 8, 100 + n as u64).unwrap(),
            Embedding::random_uniform(n, 16, 200 + n as u64).unwrap(),
            Embedding::coordinate(n).unwrap(),
        ];
        for emb in &embeddings {
            let cap = emb.dim() as f64 * var;
            let mean_sq: f64 = a
                .members()
                .iter()
                .map(|m| {
                    let g = famvar::linear_train::gradient_at_zero(m, emb);
                    g.iter().map(|x| x * x).sum::<f64>()
                })
                .sum::<f64>()
                / a.len() as f64;
            assert!(
                mean_sq <= cap + 1e-9,
                "n={n} dim={}: mean {mean_sq} > cap {cap}",
                emb.dim()
            );
            worst_slack = worst_slack.min(cap + 1e-9 - mean_sq);
        }
    }
    println!(
        "[criterion 03] PASS: mean ‖∇L(0)‖² ≤ N·2^-n for parity families n ≤ 10 \
         across embeddings (tightest slack {worst_slack:.3e})"
    );
}

#[test]
fn acceptance_04_linear_training_floor() {
    let start = Instant::now();
    let n = 10;
    let a = LabeledFamily::parity(n).unwrap();
    let emb = Embedding::random_sign(n, 8, 42).unwrap();
    let hinge = LossKind::Hinge.spec();
    let cfg = TrainConfig { step_size: 0.005, steps: 100, radius: 2.0, seed: 42 };
    let var = 0.5f64.powi(10);
    let bound = famvar::linear_approx_bound(&hinge, 2.0, 8.0, var).unwrap();
    assert!((bound.value - 0.8232).abs() < 1e-4);

    use rayon::prelude::*;
    let losses: Vec<f64> = a
        .members()
        .par_iter()
        .map(|m| train_linear(m, &emb, &hinge, &cfg).unwrap().loss_achieved)
        .collect();
    let mean: f64 = losses.iter().sum::<f64>() / losses.len() as f64;
    let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min >= 0.8232, "worst trained member {min} below the floor");
    assert!(min >= bound.value - 1e-9);
    assert!(mean >= 0.99, "family mean {mean} below 0.99");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "training took {elapsed:?}");
    println!(
        "[criterion 04] PASS: every member ≥ {:.6} (floor 0.8232), mean {mean:.6} ≥ 0.99, \
         in {:.2}s < 60s",
        min,
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_05_elimination_cap() {
    // τ²-counting: no bounded query can eliminate more than var/τ²·|A|
    // members.
    let cases = [(10usize, 0.125f64, 64.0f64), (3, 0.5, 4.0)];
    for (n, tau, cap) in cases {
        let a = LabeledFamily::parity(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(500 + n as u64);
        let mut oracle = CsqOracle::new(&a, tau, false).unwrap();
        let mut max_seen = 0usize;
        for _ in 0..100 {
            let table: Vec<f64> =
                (0..1usize << n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let q = CorrelationQuery::new(n, table).unwrap();
            oracle.answer(&q).unwrap();
            let removed = oracle.transcript().last().unwrap().eliminated.len();
            assert!(
                removed as f64 <= cap,
                "n={n} τ={tau}: query eliminated {removed} > cap {cap}"
            );
            max_seen = max_seen.max(removed);
        }
        println!(
            "[criterion 05] PASS (n={n}, τ={tau}): per-query eliminations ≤ {cap} \
             (max observed {max_seen}) over 100 random queries"
        );
    }
}

#[test]
fn acceptance_06_query_harness_loss_floor() {
    let n = 10;
    let a = LabeledFamily::parity(n).unwrap();
    let tau = 0.125;
    let var = 0.5f64.powi(n as i32);
    // Query budget strictly below τ²/var − 1 = 15.
    let queries_per_seed = 14usize;
    let hinge = LossKind::Hinge.spec();
    let zero_one = LossKind::ZeroOne.spec();
    let mut worst_hinge = f64::INFINITY;
    let mut worst_zero_one = f64::INFINITY;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let queries: Vec<CorrelationQuery> = (0..queries_per_seed)
            .map(|_| {
                let t: Vec<f64> =
                    (0..1usize << n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                CorrelationQuery::new(n, t).unwrap()
            })
            .collect();
        // Mix hypothesis styles: random tables and member functions.
        let hypothesis: Vec<f64> = if seed % 3 == 0 {
            a.members()[(seed as usize * 37) % a.len()].f.to_real()
        } else {
            (0..1usize << n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
        };

        let mut learner = ScriptedLearner::new(queries.clone(), hypothesis.clone());
        let report = run_learner(&mut learner, &a, tau, &hinge, 50, false, Some(var)).unwrap();
        assert!((report.query_bound - 15.0).abs() < 1e-9);
        let fin = report.finalize.expect("survivor guaranteed below the query bound");
        assert!(fin.loss_lb >= 1.0 - 0.125 - 1e-12, "seed {seed}: hinge {}", fin.loss_lb);
        worst_hinge = worst_hinge.min(fin.loss_lb);

        let mut learner = ScriptedLearner::new(queries, hypothesis);
        let report =
            run_learner(&mut learner, &a, tau, &zero_one, 50, false, Some(var)).unwrap();
        let fin = report.finalize.expect("survivor guaranteed below the query bound");
        assert!(
            fin.loss_lb >= 0.5 - 1.0 / 16.0 - 1e-12,
            "seed {seed}: zero-one {}",
            fin.loss_lb
        );
        worst_zero_one = worst_zero_one.min(fin.loss_lb);
    }
    println!(
        "[criterion 06] PASS: 100 seeds × 14 queries — surviving member always has \
         hinge loss ≥ 0.875 (worst {worst_hinge:.6}) and zero-one loss ≥ 0.4375 \
         (worst {worst_zero_one:.6})"
    );
}

#[test]
fn acceptance_07_stuck_fraction_and_loss_floor() {
    let n = 10;
    let a = LabeledFamily::parity(n).unwrap();
    let model = LinearModel::new(Embedding::coordinate(n).unwrap());
    let b = model.gradient_bound();
    assert!((b - (n as f64).sqrt()).abs() < 1e-12);
    let var = 0.5f64.powi(n as i32);
    let delta = 4.0 * (2.0 * b * b * n as f64 * var).sqrt();

    let report = family_stuck_fraction(&a, &model, delta).unwrap();
    assert_eq!(report.stuck_members, 1014, "exactly the 10 singletons move");
    assert!(report.fraction >= 0.75);
    assert!(report.fraction >= report.markov_floor - 1e-12);
    assert!(report.mean_grad_sq <= report.mean_grad_sq_cap + 1e-9);

    // Run the rounded descent and check the family-average loss floor.
    use rayon::prelude::*;
    let run = GdRun { eta: 0.5, steps: 5, delta, sigma: 0.0, seed: 11, mode: GdMode::Approx };
    let losses: Vec<(bool, f64)> = a
        .members()
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let r = run_gd(m, &model, &run, i as u64).unwrap();
            (r.stuck_at_zero, r.final_loss)
        })
        .collect();
    let stuck_count = losses.iter().filter(|(s, _)| *s).count();
    assert_eq!(stuck_count, 1014);
    for (stuck, loss) in &losses {
        if *stuck {
            assert_eq!(*loss, 1.0, "stuck members never leave the zero predictor");
        }
    }
    let mean: f64 = losses.iter().map(|(_, l)| l).sum::<f64>() / losses.len() as f64;
    let floor = 0.75 * (1.0 - (8.0 * var).sqrt());
    assert!(mean >= floor - 1e-9, "mean {mean} below floor {floor}");
    println!(
        "[criterion 07] PASS: stuck {}/{} ≥ 3/4 (Markov floor {:.4}), \
         average final loss {mean:.4} ≥ {floor:.4}",
        report.stuck_members, report.member_count, report.markov_floor
    );
}

#[test]
fn acceptance_08_noisy_trajectory_identity() {
    let n = 10;
    let a = LabeledFamily::parity(n).unwrap();
    let model = LinearModel::new(Embedding::coordinate(n).unwrap());
    let b = model.gradient_bound();
    let var = 0.5f64.powi(n as i32);
    // Dyadic grid pitch above the threshold, so arithmetic is exact and the
    // whole family is noise-driven.
    let delta = 8.0;
    assert!(delta >= 4.0 * (2.0 * b * b * n as f64 * var).sqrt());
    let steps = (delta * delta / (32.0 * b * b * n as f64 * var)).floor() as usize;
    assert_eq!(steps, 20);
    let sigma = 2.0 * delta;
    let eta_cap = 1.0 / (2.0 * sigma * b * steps as f64);
    let eta = 0.5f64.powi(12);
    assert!(eta <= eta_cap);

    use rayon::prelude::*;
    let run = GdRun { eta, steps, delta, sigma, seed: 29, mode: GdMode::Noisy };
    let loss_floor = 1.0 - (8.0 * var).sqrt();
    let worst: Vec<f64> = a
        .members()
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let r = run_gd(m, &model, &run, i as u64).unwrap();
            assert!(r.stuck_at_zero, "member {i} must be noise-driven at this pitch");
            assert!(r.warnings.is_empty());
            // Trajectory identity, bit for bit: w_t = w_0 − η·Σ_{s≤t} ξ_s
            // (the update subtracts the rounded step, which equals the noise).
            let mut prefix = vec![0.0f64; n];
            for (t, xi) in r.noise.iter().enumerate() {
                for c in 0..n {
                    prefix[c] += xi[c];
                }
                for c in 0..n {
                    let expect = 0.0 - eta * prefix[c];
                    assert_eq!(
                        r.trajectory[t + 1][c].to_bits(),
                        expect.to_bits(),
                        "member {i} step {t} coordinate {c}"
                    );
                }
            }
            assert!(r.final_loss >= loss_floor - 1e-12, "member {i}: {}", r.final_loss);
            r.final_loss
        })
        .collect();
    let min = worst.iter().copied().fold(f64::INFINITY, f64::min);
    println!(
        "[criterion 08] PASS: T={steps}, η={eta:.2e} ≤ {eta_cap:.2e} — noise-driven \
         trajectory identity bit-exact for all 1024 members; min final loss {min:.4} ≥ \
         {loss_floor:.4}"
    );
}

#[test]
fn acceptance_09_discretization_drift() {
    let mut rng = ChaCha8Rng::seed_from_u64(3100);
    let delta = 0.1;
    let mut checked = 0usize;
    for net_idx in 0..100 {
        let k = 1 + (rng.random::<u32>() % 8) as usize;
        let n_z = 1 + (rng.random::<u32>() % 10) as usize;
        let n_x = 1 + (rng.random::<u32>() % 4) as usize;
        let r = 0.25 + 1.75 * rng.random::<f64>();
        let act = match net_idx % 3 {
            0 => Activation::Relu,
            1 => Activation::Tanh,
            _ => Activation::Identity,
        };
        let net = TwoLayerNet::random(n_x, n_z, k, r, act, 4000 + net_idx as u64).unwrap();
        let snapped = net.discretize(delta).unwrap();
        let bound = net.discretization_drift_bound(delta);
        let cube = 1usize << (n_x + n_z);
        for _ in 0..100 {
            let idx = (rng.random::<u64>() % cube as u64) as usize;
            let drift = (net.eval_index(idx) - snapped.eval_index(idx)).abs();
            assert!(
                drift <= bound + 1e-12,
                "net {net_idx} (k={k}, r={r:.3}, n_z={n_z}): drift {drift} > bound {bound}"
            );
            checked += 1;
        }
    }
    println!(
        "[criterion 09] PASS: |g − ĝ| ≤ R·√k·Δ·n on {checked} points across 100 random \
         depth-two nets, zero violations"
    );
}

#[test]
fn acceptance_10_or_product_parity_identity() {
    for n in 1..=6usize {
        let f = Formula::or_pair_product(n);
        for z in 0..1usize << n {
            let subset: Vec<usize> = (0..n).filter(|i| (z >> i) & 1 == 1).collect();
            let parity = ParityDescriptor::new(n, subset).unwrap().materialize();
            for x in 0..1usize << n {
                let got = f.eval_index(2 * n, (z << n) | x).unwrap();
                assert_eq!(got, parity.eval_index(x), "n={n} z={z:b} x={x:b}");
            }
        }
    }
    println!(
        "[criterion 10] PASS: ∏(x_i ∨ z_i) equals the parity over {{i : z_i = −1}} \
         exhaustively for n ≤ 6"
    );
}

#[test]
fn acceptance_11_pattern_family_structure() {
    // Toy scale: 1-level AND-of-ORs inner function, N = 8, uniform inner
    // distribution.
    let pf = build_pattern_family(PatternFamilySpec {
        inner: famvar::mp_function(1).unwrap(),
        big_n: 8,
        mu: Distribution::uniform(4).unwrap(),
    })
    .unwrap();
    assert_eq!(pf.family.len(), 256);
    let max_dev = pf
        .family
        .members()
        .iter()
        .map(|m| (m.dist.probs().iter().sum::<f64>() - 1.0).abs())
        .fold(0.0f64, f64::max)
        ;
    assert!(max_dev < 1e-12, "member normalization deviates by {max_dev}");

    let enc = encode_subcube(&pf).unwrap();
    let violations =
        famvar::pattern::encoded_identity_violations(&pf, &enc, 1, 1000, 77).unwrap();
    assert_eq!(violations, 0, "normal-form identity must hold on all samples");
    let lower_orig = variance_lower_members(&pf.family);
    let lower_enc = variance_lower_members(&enc.family);
    assert!((lower_orig - lower_enc).abs() < 1e-12);

    // Variance transport with the exact path on both sides, on an instance
    // small enough to enumerate: inner OR on 2 inputs, N = 4.
    let or2 = Formula::or(vec![Formula::var(0), Formula::var(1)]).to_function(2).unwrap();
    let tiny = build_pattern_family(PatternFamilySpec {
        inner: or2,
        big_n: 4,
        mu: Distribution::uniform(2).unwrap(),
    })
    .unwrap();
    let tiny_enc = encode_subcube(&tiny).unwrap();
    let (v_orig, _) = variance_exact(&tiny.family).unwrap();
    let (v_enc, _) = variance_exact(&tiny_enc.family).unwrap();
    assert!((v_orig - v_enc).abs() < 1e-12, "{v_orig} vs {v_enc}");
    println!(
        "[criterion 11] PASS: 256 member distributions normalized (max dev {max_dev:.2e}); \
         encoding identity 0/1000 violations; exact variance transported ({v_orig:.6} both \
         sides)"
    );
}

#[test]
fn acceptance_12_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(1200);
    let half_square = LossKind::HalfSquare.spec();
    let hinge = LossKind::Hinge.spec();
    let mut worst = 0.0f64;
    for config in 0..100 {
        let n = 3 + (config % 3);
        let size = 1usize << n;
        let table: Vec<i8> =
            (0..size).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let weights: Vec<f64> = (0..size).map(|_| -rng.random::<f64>().ln()).collect();
        let member = LabeledPair::new(
            BooleanFunction::new(n, table).unwrap(),
            Distribution::normalized(n, weights).unwrap(),
        )
        .unwrap();
        let dim = 2 + (config % 5);
        let emb = Embedding::random_uniform(n, dim, 6000 + config as u64).unwrap();
        let err = if config % 2 == 0 {
            let w: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            grad_check(&member, &emb, &half_square, &w, 1e-5).unwrap()
        } else {
            // Hinge probed away from its kinks: scale weights so every
            // prediction stays below 0.9 in magnitude.
            let mut w: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let max_pred = (0..size)
                .map(|x| emb.predict(&w, x).abs())
                .fold(0.0f64, f64::max);
            if max_pred > 0.9 {
                for v in w.iter_mut() {
                    *v *= 0.9 / max_pred;
                }
            }
            grad_check(&member, &emb, &hinge, &w, 1e-5).unwrap()
        };
        assert!(err <= 1e-6, "config {config}: relative error {err}");
        worst = worst.max(err);
    }
    println!(
        "[criterion 12] PASS: analytic vs central-difference gradients agree to ≤ 1e-6 \
         on 100 configurations (worst {worst:.3e})"
    );
}

fn run_cli(args: &[&str], workers: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_famvar"))
        .args(args)
        .env("FAMVAR_WORKERS", workers)
        .output()
        .expect("spawning the CLI")
}

#[test]
fn acceptance_13_reproducibility() {
    let base = tempfile::tempdir().unwrap();
    let cfg_dir = base.path().join("cfg");
    std::fs::create_dir_all(&cfg_dir).unwrap();

    let variance_cfg = cfg_dir.join("variance.json");
    std::fs::write(
        &variance_cfg,
        br#"{"family": {"type": "parity", "n": 3}, "mode": "exact", "seed": 5}"#,
    )
    .unwrap();
    let gd_cfg = cfg_dir.join("gd.json");
    std::fs::write(
        &gd_cfg,
        br#"{"family": {"type": "parity", "n": 6}, "model": {"type": "coordinate_linear"},
            "mode": "noisy", "eta": 0.000244140625, "steps": 8, "delta": 8.0, "sigma": 16.0,
            "seed": 5}"#,
    )
    .unwrap();
    let train_cfg = cfg_dir.join("train.json");
    std::fs::write(
        &train_cfg,
        br#"{"family": {"type": "parity", "n": 6},
            "embedding": {"type": "random_sign", "dim": 6, "seed": 9},
            "loss": "hinge", "step_size": 0.01, "steps": 30, "radius": 1.5, "seed": 5}"#,
    )
    .unwrap();

    let jobs: Vec<(&str, &std::path::PathBuf, Vec<&str>)> = vec![
        ("variance", &variance_cfg, vec!["variance_report.json"]),
        ("gd", &gd_cfg, vec!["gd_summary.json", "gd_runs.jsonl"]),
        ("train-linear", &train_cfg, vec!["train_linear_summary.json", "train_linear_members.csv"]),
    ];

    for (command, cfg, artifacts) in &jobs {
        let mut outputs: Vec<Vec<Vec<u8>>> = Vec::new();
        for (run_idx, workers) in ["1", "4", "1"].iter().enumerate() {
            let out_dir = base.path().join(format!("{command}-{run_idx}"));
            std::fs::create_dir_all(&out_dir).unwrap();
            let status = run_cli(
                &[command, "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
                workers,
            );
            assert!(status.status.success(), "{command} failed: {status:?}");
            outputs.push(
                artifacts
                    .iter()
                    .map(|name| std::fs::read(out_dir.join(name)).unwrap())
                    .collect(),
            );
        }
        assert_eq!(outputs[0], outputs[1], "{command}: workers=1 vs workers=4 differ");
        assert_eq!(outputs[0], outputs[2], "{command}: repeated run differs");
    }
    println!(
        "[criterion 13] PASS: variance, gd and train-linear artifacts byte-identical \
         across repeats and across worker counts 1 and 4"
    );
}
