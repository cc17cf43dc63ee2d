//! Variance transport through the indicator-coordinate encoding, on an
//! instance small enough for the exact path on both sides.

use famvar::{
    build_pattern_family, encode_subcube, variance_at, variance_exact, variance_lower_members,
    Distribution, Formula, PatternFamilySpec,
};

fn tiny_family() -> famvar::PatternFamily {
    let or2 = Formula::or(vec![Formula::var(0), Formula::var(1)]).to_function(2).unwrap();
    build_pattern_family(PatternFamilySpec {
        inner: or2,
        big_n: 4,
        mu: Distribution::uniform(2).unwrap(),
    })
    .unwrap()
}

#[test]
fn encoding_preserves_exact_variance() {
    let pf = tiny_family();
    let enc = encode_subcube(&pf).unwrap();
    assert_eq!(enc.n_encoded, 8);
    assert_eq!(enc.family.support().len(), 16);
    let (orig, _) = variance_exact(&pf.family).unwrap();
    let (encoded, _) = variance_exact(&enc.family).unwrap();
    assert!((orig - encoded).abs() < 1e-12, "{orig} vs {encoded}");
}

#[test]
fn encoding_preserves_probe_values_and_lower_bound() {
    let pf = tiny_family();
    let enc = encode_subcube(&pf).unwrap();
    // Transport an arbitrary probe along the bijection.
    let phi: Vec<f64> = (0..16).map(|i| ((i * 5 % 7) as f64 - 3.0) / 3.0).collect();
    let mut phi_enc = vec![0.0; 1 << enc.n_encoded];
    for (x, &y) in enc.x_map.iter().enumerate() {
        phi_enc[y as usize] = phi[x];
    }
    let a = variance_at(&pf.family, &phi).unwrap();
    let b = variance_at(&enc.family, &phi_enc).unwrap();
    assert!((a - b).abs() < 1e-12);
    let la = variance_lower_members(&pf.family);
    let lb = variance_lower_members(&enc.family);
    assert!((la - lb).abs() < 1e-12);
}

#[test]
fn member_distributions_transport_exactly() {
    let pf = tiny_family();
    let enc = encode_subcube(&pf).unwrap();
    for (m_orig, m_enc) in pf.family.members().iter().zip(enc.family.members()) {
        for (x, &y) in enc.x_map.iter().enumerate() {
            assert_eq!(m_orig.f.eval_index(x), m_enc.f.eval_index(y as usize));
            assert_eq!(m_orig.dist.prob(x), m_enc.dist.prob(y as usize));
        }
    }
}
