//! Independent oracles for the variance machinery: a duplicate brute-force
//! enumerator, a dense eigendecomposition, and summation identities.

use famvar::{
    apply_isomorphism, hadamard_norm, variance_at, variance_exact, variance_lower_members,
    variance_upper_spectral, BooleanFunction, Distribution, LabeledFamily, LabeledPair,
    ParityDescriptor,
};
use ndarray::Array2;
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

/// Test-only re-enumeration: every ±1 table over the full cube, variance by
/// plain nested loops. Independent of the library's Gray-code path.
fn brute_force_variance(a: &LabeledFamily) -> (f64, Vec<f64>) {
    let n = a.dimension();
    let size = 1usize << n;
    let mut best = (f64::NEG_INFINITY, vec![0.0; size]);
    for assignment in 0..1u64 << size {
        let phi: Vec<f64> = (0..size)
            .map(|i| if (assignment >> i) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let mut total = 0.0;
        for m in a.members() {
            let mut corr = 0.0;
            for x in 0..size {
                corr += m.dist.prob(x) * m.f.eval_index(x) as f64 * phi[x];
            }
            total += corr * corr;
        }
        let v = total / a.len() as f64;
        if v > best.0 {
            best = (v, phi);
        }
    }
    best
}

#[test]
fn exact_matches_brute_force_reenumeration() {
    for seed in 0..12u64 {
        let a = random_family(3, 2 + (seed % 6) as usize, seed);
        let (exact, argmax) = variance_exact(&a).unwrap();
        let (brute, _) = brute_force_variance(&a);
        assert!((exact - brute).abs() < 1e-12, "seed {seed}: {exact} vs {brute}");
        let at = variance_at(&a, &argmax).unwrap();
        assert!((at - exact).abs() < 1e-12, "argmax must attain the maximum");
    }
}

#[test]
fn sandwich_on_seeded_random_families() {
    for seed in 0..50u64 {
        let a = random_family(3, 2 + (seed % 7) as usize, 1000 + seed);
        let (exact, _) = variance_exact(&a).unwrap();
        let lower = variance_lower_members(&a);
        let upper = variance_upper_spectral(&a).unwrap();
        assert!(lower <= exact + 1e-9, "seed {seed}: lower {lower} exact {exact}");
        assert!(exact <= upper + 1e-9, "seed {seed}: exact {exact} upper {upper}");
    }
}

#[test]
fn parseval_identity_for_random_tables() {
    // Full parity expansion: the squared coefficients of any table sum to
    // its mean square.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2usize, 4, 6] {
        let size = 1usize << n;
        let d = Distribution::uniform(n).unwrap();
        let parities: Vec<BooleanFunction> = (0..size)
            .map(|mask| ParityDescriptor::from_mask(n, mask).unwrap().materialize())
            .collect();
        let trials = if n == 6 { 100 } else { 30 };
        for _ in 0..trials {
            let g: Vec<f64> = (0..size).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let mut coeff_sq = 0.0;
            for p in &parities {
                let c = famvar::weighted_inner(p, &g, &d).unwrap();
                coeff_sq += c * c;
            }
            let mean_sq: f64 = g.iter().map(|v| v * v).sum::<f64>() / size as f64;
            assert!((coeff_sq - mean_sq).abs() < 1e-9, "n={n}");
        }
    }
}

#[test]
fn orthonormal_subfamilies_capped_by_inverse_size() {
    // Any subfamily of parities is orthonormal; its variance is exactly
    // 1/|F| (each member's own function attains the cap).
    let n = 3;
    let d = Distribution::uniform(n).unwrap();
    for masks in [vec![1usize, 2, 4], vec![0, 3, 5, 6], vec![7], vec![0, 1, 2, 3, 4, 5, 6, 7]] {
        let members: Vec<LabeledPair> = masks
            .iter()
            .map(|&mask| {
                LabeledPair::new(
                    ParityDescriptor::from_mask(n, mask).unwrap().materialize(),
                    d.clone(),
                )
                .unwrap()
            })
            .collect();
        let count = members.len();
        let a = LabeledFamily::full_support(n, members).unwrap();
        let (exact, _) = variance_exact(&a).unwrap();
        let cap = 1.0 / count as f64;
        assert!(exact <= cap + 1e-9, "masks {masks:?}: {exact} > {cap}");
        assert!((exact - cap).abs() < 1e-9, "orthonormal families attain 1/|F|");
    }
}

#[test]
fn isomorphism_preserves_exact_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..10u64 {
        let a = random_family(3, 4, 2000 + seed);
        // Random permutation of the cube.
        let mut perm: Vec<u32> = (0..8).collect();
        for i in (1..8usize).rev() {
            let j = (rng.random::<u32>() as usize) % (i + 1);
            perm.swap(i, j);
        }
        let b = apply_isomorphism(&a, &perm).unwrap();
        let (va, _) = variance_exact(&a).unwrap();
        let (vb, _) = variance_exact(&b).unwrap();
        assert!((va - vb).abs() < 1e-12, "seed {seed}: {va} vs {vb}");
    }
}

#[test]
fn isomorphism_transports_probe_values() {
    // Var(A, φ∘Ψ⁻¹) = Var(A', φ) where A' = A∘Ψ.
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let a = random_family(3, 5, 321);
    let mut perm: Vec<u32> = (0..8).collect();
    for i in (1..8usize).rev() {
        let j = (rng.random::<u32>() as usize) % (i + 1);
        perm.swap(i, j);
    }
    let b = apply_isomorphism(&a, &perm).unwrap();
    for _ in 0..20 {
        let phi: Vec<f64> = (0..8).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        // φ∘Ψ⁻¹ has value φ(x) at position perm[x].
        let mut phi_pushed = vec![0.0; 8];
        for x in 0..8 {
            phi_pushed[perm[x] as usize] = phi[x];
        }
        let va = variance_at(&a, &phi_pushed).unwrap();
        let vb = variance_at(&b, &phi).unwrap();
        assert!((va - vb).abs() < 1e-12);
    }
}

#[test]
fn spectral_norm_matches_dense_eigendecomposition() {
    // Oracle: λ_max of MᵀM via nalgebra's symmetric eigensolver.
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for trial in 0..20 {
        let m = Array2::from_shape_fn((16, 16), |_| rng.random::<f64>() * 2.0 - 1.0);
        let p = Array2::from_shape_fn((16, 16), |_| rng.random::<f64>() * 2.0 - 1.0);
        let product = &m * &p;
        let got = hadamard_norm(&m, &p).unwrap();
        let dm = nalgebra::DMatrix::from_fn(16, 16, |i, j| product[(i, j)]);
        let gram = dm.transpose() * &dm;
        let eig = gram.symmetric_eigen();
        let expect = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt();
        let rel = (got - expect).abs() / expect.max(1e-300);
        assert!(rel <= 1e-8, "trial {trial}: {got} vs {expect} (rel {rel})");
    }
}

#[test]
fn spectral_upper_bound_from_gram_closed_form() {
    // For the parity family the Gram matrix is 2^{-n}·I, so the upper bound
    // equals 2^{-n} with no iteration error to speak of.
    for n in 2..=5usize {
        let a = LabeledFamily::parity(n).unwrap();
        let op = a.operator_matrix().unwrap();
        let m = op.matrix();
        // Closed-form Gram check: M·Mᵀ = 2^{-n} I.
        let scale = 0.5f64.powi(n as i32);
        for i in 0..a.len().min(8) {
            for j in 0..a.len().min(8) {
                let dot: f64 = (0..m.ncols()).map(|c| m[(i, c)] * m[(j, c)]).sum();
                let expect = if i == j { scale } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
        let upper = variance_upper_spectral(&a).unwrap();
        assert!((upper - scale).abs() < 1e-10);
    }
}
