//! Selector/shift ("pattern") families at desk-scale parameters.
//!
//! A block selector `V` picks one coordinate from each of `n` contiguous
//! blocks of size `N/n` in `[N]`; together with a shift `w ∈ {±1}^n` it
//! turns an inner function `φ` on `n` inputs into a member
//!
//! ```text
//! f_{V,w}(x) = φ(x|_V ⊕ w),     D_{V,w}(x) = 2^{−(N−n)}·ψ(x|_V ⊕ w)
//! ```
//!
//! over `{±1}^N`, where `ψ` is a caller-supplied distribution on the inner
//! cube and `⊕` multiplies ±1 coordinates. The full-scale construction sets
//! `N = 17⁶·n`, far beyond dense tables; it is refused with a distinct
//! error so the gap stays visible, and nothing computed here at reduced `N`
//! claims the full-scale variance certificate for a user-supplied `ψ`.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolean::{BooleanFunction, Distribution, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::family::{LabeledFamily, LabeledPair, DENSE_CELL_CAP};
use crate::formula::Formula;
use crate::numeric::spectral_norm;

/// One coordinate choice per block: `choices[b] ∈ [0, N/n)` picks the
/// element `b·(N/n) + choices[b]` of block `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSelector {
    big_n: usize,
    n: usize,
    choices: Vec<usize>,
}

impl BlockSelector {
    pub fn new(big_n: usize, n: usize, choices: Vec<usize>) -> Result<Self> {
        if n == 0 || big_n % n != 0 {
            return Err(Error::Param(format!("block structure needs n | N, got N={big_n}, n={n}")));
        }
        if choices.len() != n {
            return Err(Error::Dimension(format!(
                "selector has {} choices for {n} blocks",
                choices.len()
            )));
        }
        let block = big_n / n;
        if let Some(&bad) = choices.iter().find(|&&c| c >= block) {
            return Err(Error::Param(format!("choice {bad} outside block of size {block}")));
        }
        Ok(BlockSelector { big_n, n, choices })
    }

    /// Number of selectors `(N/n)^n`, as u128 to survive silly inputs.
    pub fn count(big_n: usize, n: usize) -> Result<u128> {
        if n == 0 || big_n % n != 0 {
            return Err(Error::Param(format!("block structure needs n | N, got N={big_n}, n={n}")));
        }
        let block = (big_n / n) as u128;
        let mut acc: u128 = 1;
        for _ in 0..n {
            acc = acc
                .checked_mul(block)
                .ok_or_else(|| Error::DomainTooLarge("selector count overflows".into()))?;
        }
        Ok(acc)
    }

    /// Selector at a lexicographic rank, block 0 most significant.
    pub fn from_rank(big_n: usize, n: usize, mut rank: u128) -> Result<Self> {
        let total = Self::count(big_n, n)?;
        if rank >= total {
            return Err(Error::Param(format!("selector rank {rank} out of range {total}")));
        }
        let block = (big_n / n) as u128;
        let mut choices = vec![0usize; n];
        for b in (0..n).rev() {
            choices[b] = (rank % block) as usize;
            rank /= block;
        }
        BlockSelector::new(big_n, n, choices)
    }

    pub fn rank(&self) -> u128 {
        let block = (self.big_n / self.n) as u128;
        self.choices.iter().fold(0u128, |acc, &c| acc * block + c as u128)
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn blocks(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.big_n
    }

    /// Ambient coordinate selected for block `b`.
    #[inline]
    pub fn selected_coordinate(&self, b: usize) -> usize {
        b * (self.big_n / self.n) + self.choices[b]
    }
}

/// Projects `x` onto the selected coordinates and shifts by `w`:
/// coordinate `b` of the result is `x_{V_b} · w_b`.
pub fn project_xor(x: &Point, v: &BlockSelector, w: &Point) -> Result<Point> {
    if x.dimension() != v.ambient_dim() || w.dimension() != v.blocks() {
        return Err(Error::Dimension(format!(
            "project_xor: x has dimension {}, selector expects {}, w has dimension {} for {} blocks",
            x.dimension(),
            v.ambient_dim(),
            w.dimension(),
            v.blocks()
        )));
    }
    let idx = project_xor_index(x.index(), v, w.index());
    Point::new(v.blocks(), idx as u32)
}

#[inline]
fn project_xor_index(x_index: usize, v: &BlockSelector, w_index: usize) -> usize {
    let mut z = 0usize;
    for b in 0..v.blocks() {
        let bit = ((x_index >> v.selected_coordinate(b)) & 1) ^ ((w_index >> b) & 1);
        z |= bit << b;
    }
    z
}

/// Dense pattern matrix `[φ(x|_V ⊕ w)]` with rows indexed by `x ∈ {±1}^N`
/// and columns by `(V, w)` in lexicographic order (`col = rank(V)·2^n + w`).
pub fn pattern_matrix(big_n: usize, n: usize, phi: &[f64]) -> Result<Array2<f64>> {
    if phi.len() != 1 << n {
        return Err(Error::Dimension(format!(
            "inner table has {} entries for dimension {n}",
            phi.len()
        )));
    }
    let selector_count = BlockSelector::count(big_n, n)?;
    let cols = selector_count
        .checked_mul(1 << n)
        .ok_or_else(|| Error::DomainTooLarge("pattern matrix columns overflow".into()))?;
    let rows = 1u128 << big_n;
    let cells = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::DomainTooLarge("pattern matrix size overflows".into()))?;
    if big_n > MAX_DIM || cells > DENSE_CELL_CAP as u128 {
        return Err(Error::DomainTooLarge(format!(
            "pattern matrix needs {cells} cells (cap {DENSE_CELL_CAP})"
        )));
    }
    let (rows, cols) = (1usize << big_n, cols as usize);
    let selectors: Vec<BlockSelector> = (0..selector_count)
        .map(|r| BlockSelector::from_rank(big_n, n, r))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = Array2::<f64>::zeros((rows, cols));
    matrix
        .outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(x, mut row)| {
            for (vr, sel) in selectors.iter().enumerate() {
                let base = vr << n;
                for w in 0..1usize << n {
                    row[base + w] = phi[project_xor_index(x, sel, w)];
                }
            }
        });
    Ok(matrix)
}

/// AND-of-ORs inner function on `4m³` inputs: block `(i, j)` for `i ∈ [m]`,
/// `j ∈ [4m²]` maps to coordinate `i·4m² + j`.
pub fn mp_function(m: usize) -> Result<BooleanFunction> {
    mp_formula(m)?.to_function(4 * m * m * m)
}

/// The same function as a formula.
pub fn mp_formula(m: usize) -> Result<Formula> {
    if m == 0 {
        return Err(Error::Param("m must be at least 1".into()));
    }
    let n = 4usize
        .checked_mul(m * m * m)
        .filter(|&n| n <= MAX_DIM)
        .ok_or_else(|| {
            Error::DomainTooLarge(format!(
                "AND-of-ORs on 4·{m}³ inputs exceeds the dimension cap {MAX_DIM}"
            ))
        })?;
    debug_assert_eq!(n, 4 * m * m * m);
    let inner = 4 * m * m;
    Ok(Formula::and(
        (0..m)
            .map(|i| Formula::or((0..inner).map(|j| Formula::var(i * inner + j)).collect()))
            .collect(),
    ))
}

/// Everything needed to build a selector/shift family.
#[derive(Debug, Clone)]
pub struct PatternFamilySpec {
    /// Inner function on `n` inputs.
    pub inner: BooleanFunction,
    /// Ambient dimension `N`, a multiple of `n`.
    pub big_n: usize,
    /// Distribution on the inner cube pushed onto each member.
    pub mu: Distribution,
}

const FULL_SCALE_RATIO: u128 = 24_137_569; // 17^6

impl PatternFamilySpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.inner.dimension();
        if self.mu.dimension() != n {
            return Err(Error::Dimension(format!(
                "inner function dimension {n} vs inner distribution dimension {}",
                self.mu.dimension()
            )));
        }
        if self.big_n == 0 || self.big_n % n != 0 {
            return Err(Error::Param(format!(
                "ambient dimension {} must be a positive multiple of {n}",
                self.big_n
            )));
        }
        if self.big_n as u128 == FULL_SCALE_RATIO * n as u128 {
            return Err(Error::InfeasibleScale(format!(
                "N = 17^6·n (N = {}, n = {n}) is the full-scale construction; dense truth \
                 tables of 2^N entries cannot be built at that size — run a reduced N (for \
                 example 2n or 4n) for structural checks",
                self.big_n
            )));
        }
        if self.big_n > MAX_DIM {
            return Err(Error::DomainTooLarge(format!(
                "ambient dimension {} exceeds the cap {MAX_DIM}",
                self.big_n
            )));
        }
        let members = self.member_count()?;
        let cells = members
            .checked_mul(1u128 << self.big_n)
            .ok_or_else(|| Error::DomainTooLarge("family size overflows".into()))?;
        if cells > DENSE_CELL_CAP as u128 {
            return Err(Error::DomainTooLarge(format!(
                "family needs {cells} dense cells (cap {DENSE_CELL_CAP})"
            )));
        }
        Ok(())
    }

    pub fn inner_dim(&self) -> usize {
        self.inner.dimension()
    }

    /// `(N/n)^n · 2^n` members.
    pub fn member_count(&self) -> Result<u128> {
        let n = self.inner.dimension();
        BlockSelector::count(self.big_n, n)?
            .checked_mul(1u128 << n)
            .ok_or_else(|| Error::DomainTooLarge("member count overflows".into()))
    }
}

/// A built family plus the `(V, w)` labels of its members, in build order.
#[derive(Debug, Clone)]
pub struct PatternFamily {
    pub spec: PatternFamilySpec,
    pub family: LabeledFamily,
    /// Member `k` corresponds to `selectors[k / 2^n]` and shift `k % 2^n`.
    pub selectors: Vec<BlockSelector>,
}

impl PatternFamily {
    pub fn member_label(&self, member: usize) -> (&BlockSelector, usize) {
        let n = self.spec.inner_dim();
        (&self.selectors[member >> n], member & ((1 << n) - 1))
    }
}

/// Builds the family `{(f_{V,w}, D_{V,w})}` over the full `{±1}^N` cube,
/// members ordered lexicographically in `(V, w)`.
pub fn build_pattern_family(spec: PatternFamilySpec) -> Result<PatternFamily> {
    spec.validate()?;
    let n = spec.inner_dim();
    let big_n = spec.big_n;
    let size = 1usize << big_n;
    let selector_count = BlockSelector::count(big_n, n)? as usize;
    let selectors: Vec<BlockSelector> = (0..selector_count)
        .map(|r| BlockSelector::from_rank(big_n, n, r as u128))
        .collect::<Result<Vec<_>>>()?;
    let scale = (0.5f64).powi((big_n - n) as i32);

    let members: Vec<LabeledPair> = (0..selector_count * (1 << n))
        .into_par_iter()
        .map(|k| {
            let sel = &selectors[k >> n];
            let w = k & ((1 << n) - 1);
            let mut table = vec![0i8; size];
            let mut probs = vec![0.0f64; size];
            for x in 0..size {
                let z = project_xor_index(x, sel, w);
                table[x] = spec.inner.eval_index(z);
                probs[x] = spec.mu.prob(z) * scale;
            }
            // The normalization is forced: each inner point has exactly
            // 2^{N−n} preimages under the projection. Distribution::new
            // still verifies it to 1e-12.
            LabeledPair::new(BooleanFunction::new(big_n, table)?, Distribution::new(big_n, probs)?)
        })
        .collect::<Result<Vec<_>>>()?;

    let family = LabeledFamily::full_support(big_n, members)?;
    Ok(PatternFamily { spec, family, selectors })
}

/// The family transported onto indicator coordinates: point `x` of `{±1}^N`
/// becomes `Ψ(x) ∈ {±1}^{2N}` with `Ψ(x)_{(c,ε)} = +1` iff `x_c = ε`, and
/// member `(V, w)` gets the code `Φ(V,w)_{(c,ε)} = +1` iff block `b(c)`
/// selects `c` and `w_b = ε`.
#[derive(Debug, Clone)]
pub struct SubcubeEncoding {
    pub family: LabeledFamily,
    /// Encoded cube dimension, `2N`.
    pub n_encoded: usize,
    /// `x_map[x]` is the encoded index of cube point `x`; injective.
    pub x_map: Vec<u32>,
    /// Per-member codes `Φ(V, w)`, same order as the family members.
    pub z_codes: Vec<u32>,
}

/// Encoded coordinate for (ambient coordinate `c`, sign `ε`): `2c` tests
/// `x_c = +1`, `2c + 1` tests `x_c = −1`.
#[inline]
fn encoded_coord(c: usize, eps_negative: bool) -> usize {
    2 * c + usize::from(eps_negative)
}

/// Builds the encoded family together with the point bijection onto its
/// image. Member functions and distributions transport along `Ψ`, so every
/// variance quantity is preserved.
pub fn encode_subcube(pf: &PatternFamily) -> Result<SubcubeEncoding> {
    let n = pf.spec.inner_dim();
    let big_n = pf.spec.big_n;
    let n_enc = 2 * big_n;
    if n_enc > MAX_DIM {
        return Err(Error::DomainTooLarge(format!(
            "encoded dimension {n_enc} exceeds the cap {MAX_DIM}"
        )));
    }
    let size = 1usize << big_n;
    let enc_size = 1usize << n_enc;
    let cells = (pf.family.len() as u128) * (enc_size as u128);
    if cells > DENSE_CELL_CAP as u128 {
        return Err(Error::DomainTooLarge(format!(
            "encoded family needs {cells} dense cells (cap {DENSE_CELL_CAP})"
        )));
    }

    let x_map: Vec<u32> = (0..size)
        .map(|x| {
            let mut enc = 0u32;
            for c in 0..big_n {
                let bit = ((x >> c) & 1) as u32;
                // x_c = +1 (bit 0): coordinate 2c is +1 (bit 0), 2c+1 is −1 (bit 1).
                enc |= bit << encoded_coord(c, false);
                enc |= (1 - bit) << encoded_coord(c, true);
            }
            enc
        })
        .collect();

    let block = big_n / n;
    let z_codes: Vec<u32> = (0..pf.family.len())
        .map(|k| {
            let (sel, w) = pf.member_label(k);
            let mut code = 0u32;
            for c in 0..big_n {
                let b = c / block;
                let selected = sel.selected_coordinate(b) == c;
                let w_b_positive = (w >> b) & 1 == 0;
                // Φ = +1 iff the selector picks c and ε matches w_b.
                let plus_true = selected && w_b_positive;
                let minus_true = selected && !w_b_positive;
                code |= u32::from(!plus_true) << encoded_coord(c, false);
                code |= u32::from(!minus_true) << encoded_coord(c, true);
            }
            code
        })
        .collect();

    let support: Vec<u32> = {
        let mut s = x_map.clone();
        s.sort_unstable();
        s
    };
    let members: Vec<LabeledPair> = pf
        .family
        .members()
        .par_iter()
        .map(|m| {
            let mut table = vec![1i8; enc_size];
            let mut probs = vec![0.0f64; enc_size];
            for x in 0..size {
                let y = x_map[x] as usize;
                table[y] = m.f.eval_index(x);
                probs[y] = m.dist.prob(x);
            }
            LabeledPair::new(
                BooleanFunction::new(n_enc, table)?,
                Distribution::new(n_enc, probs)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let family = LabeledFamily::new(n_enc, support, members)?;
    Ok(SubcubeEncoding { family, n_encoded: n_enc, x_map, z_codes })
}

/// Checks, on random samples, that the encoded member functions are
/// recovered by the AND-OR normal form over the codes:
///
/// ```text
/// f_{V,w}(x) = ⋀_{i≤m} ⋁_{j,k,ε} ( Ψ(x)_{ijkε} ∧ Φ(V,w)_{ijkε} )
/// ```
///
/// where `(i, j)` ranges over the AND-of-ORs block grid and `k` over block
/// positions. Requires the family's inner function to be the `m`-level
/// AND-of-ORs. Returns the number of violated samples (0 on success).
pub fn encoded_identity_violations(
    pf: &PatternFamily,
    enc: &SubcubeEncoding,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let n = pf.spec.inner_dim();
    if mp_function(m)? != pf.spec.inner {
        return Err(Error::Param(format!(
            "inner function is not the {m}-level AND-of-ORs; the normal-form identity does \
             not apply"
        )));
    }
    let big_n = pf.spec.big_n;
    let block = big_n / n;
    let or_width = 4 * m * m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    for _ in 0..samples {
        let member = (rng.random::<u64>() % pf.family.len() as u64) as usize;
        let x = (rng.random::<u64>() % (1u64 << big_n)) as usize;
        let psi = enc.x_map[x];
        let phi = enc.z_codes[member];

        let mut formula_value = 1i8;
        for i in 0..m {
            let mut or_value = -1i8;
            for j in 0..or_width {
                let b = i * or_width + j;
                for k in 0..block {
                    let c = b * block + k;
                    for eps_negative in [false, true] {
                        let coord = encoded_coord(c, eps_negative);
                        let psi_true = (psi >> coord) & 1 == 0;
                        let phi_true = (phi >> coord) & 1 == 0;
                        if psi_true && phi_true {
                            or_value = 1;
                        }
                    }
                }
            }
            if or_value == -1 {
                formula_value = -1;
            }
        }

        if formula_value != pf.family.members()[member].f.eval_index(x) {
            violations += 1;
        }
    }
    Ok(violations)
}

/// Spectral norm of the Hadamard (entrywise) product of two equal-shape
/// matrices.
pub fn hadamard_norm(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "hadamard_norm: shapes {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let product = a * b;
    spectral_norm(&product)
}
