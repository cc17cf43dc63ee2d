//! Labeled distribution families, their operator matrix, and isomorphism
//! transport.
//!
//! A family is a finite list of `(f, D)` pairs over a shared explicit
//! support; the meta-distribution over members is always uniform. The
//! operator matrix `M` has one row per member and one column per support
//! point, with entry `f(x)·D(x)`, so `M·φ` stacks the weighted inner
//! products `⟨f, φ⟩_D` of every member at once.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolean::{BooleanFunction, Distribution, Point, MAX_DIM};
use crate::error::{Error, Result};
use crate::numeric::pairwise_map_sum;

/// Cap on dense cells (`members × 2^n` table entries and `|A| × |X|`
/// operator entries) so constructions stay within desk-scale memory.
pub const DENSE_CELL_CAP: usize = 1 << 24;

/// One member of a family: a target function and its input distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub f: BooleanFunction,
    pub dist: Distribution,
}

impl LabeledPair {
    pub fn new(f: BooleanFunction, dist: Distribution) -> Result<Self> {
        if f.dimension() != dist.dimension() {
            return Err(Error::Dimension(format!(
                "function dimension {} vs distribution dimension {}",
                f.dimension(),
                dist.dimension()
            )));
        }
        Ok(LabeledPair { f, dist })
    }

    pub fn dimension(&self) -> usize {
        self.f.dimension()
    }
}

/// A finite family of labeled pairs over a common explicit support, with the
/// uniform meta-distribution over members.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFamily {
    n: usize,
    support: Vec<u32>,
    members: Vec<LabeledPair>,
}

impl LabeledFamily {
    /// `support` lists cube indices (deduplicated, kept sorted); every
    /// member's distribution must vanish outside it.
    pub fn new(n: usize, mut support: Vec<u32>, members: Vec<LabeledPair>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Param("a family needs at least one member".into()));
        }
        support.sort_unstable();
        support.dedup();
        let size = 1usize << n;
        if let Some(&bad) = support.iter().find(|&&i| i as usize >= size) {
            return Err(Error::Dimension(format!(
                "support index {bad} out of range for dimension {n}"
            )));
        }
        if support.is_empty() {
            return Err(Error::Param("support must be non-empty".into()));
        }
        let mut in_support = vec![false; size];
        for &i in &support {
            in_support[i as usize] = true;
        }
        for (k, m) in members.iter().enumerate() {
            if m.dimension() != n {
                return Err(Error::Dimension(format!(
                    "member {k} has dimension {} in a dimension-{n} family",
                    m.dimension()
                )));
            }
            for idx in 0..size {
                if !in_support[idx] && m.dist.prob(idx) != 0.0 {
                    return Err(Error::Param(format!(
                        "member {k} assigns mass {} outside the declared support (index {idx})",
                        m.dist.prob(idx)
                    )));
                }
            }
        }
        Ok(LabeledFamily { n, support, members })
    }

    /// Family with the full cube as support.
    pub fn full_support(n: usize, members: Vec<LabeledPair>) -> Result<Self> {
        Self::new(n, (0..1u32 << n).collect(), members)
    }

    /// The family of all `2^n` parities under the uniform distribution,
    /// ordered by subset mask.
    pub fn parity(n: usize) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::DomainTooLarge(format!("dimension {n} exceeds {MAX_DIM}")));
        }
        let cells = (1usize << n).checked_mul(1 << n).ok_or_else(|| {
            Error::DomainTooLarge(format!("parity family at n={n} overflows"))
        })?;
        if cells > DENSE_CELL_CAP {
            return Err(Error::DomainTooLarge(format!(
                "parity family at n={n} needs {cells} dense cells (cap {DENSE_CELL_CAP})"
            )));
        }
        let uniform = Distribution::uniform(n)?;
        let members = (0..1usize << n)
            .map(|mask| {
                let f = crate::boolean::ParityDescriptor::from_mask(n, mask)?.materialize();
                LabeledPair::new(f, uniform.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::full_support(n, members)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn support_points(&self) -> Vec<Point> {
        self.support
            .iter()
            .map(|&i| Point::new(self.n, i).expect("validated support index"))
            .collect()
    }

    pub fn members(&self) -> &[LabeledPair] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `⟨f, φ⟩_D` for one member, summing over the support only (the
    /// distribution vanishes elsewhere). `phi` is a full-cube table.
    pub fn member_correlation(&self, member: usize, phi: &[f64]) -> f64 {
        let m = &self.members[member];
        pairwise_map_sum(self.support.len(), &|k| {
            let idx = self.support[k] as usize;
            m.dist.prob(idx) * (m.f.eval_index(idx) as f64) * phi[idx]
        })
    }

    /// Correlations of every member with `phi`, in member order.
    pub fn correlations(&self, phi: &[f64]) -> Vec<f64> {
        (0..self.members.len())
            .into_par_iter()
            .map(|m| self.member_correlation(m, phi))
            .collect()
    }

    /// Dense operator matrix `M` with `M[(f,D), x] = f(x)·D(x)` over the
    /// support columns.
    pub fn operator_matrix(&self) -> Result<FamilyOperator> {
        let rows = self.members.len();
        let cols = self.support.len();
        let cells = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::DomainTooLarge("operator matrix size overflows".into()))?;
        if cells > DENSE_CELL_CAP {
            return Err(Error::DomainTooLarge(format!(
                "operator matrix needs {cells} cells (cap {DENSE_CELL_CAP})"
            )));
        }
        let mut matrix = Array2::<f64>::zeros((rows, cols));
        matrix
            .outer_iter_mut()
            .into_par_iter()
            .enumerate()
            .for_each(|(r, mut row)| {
                let m = &self.members[r];
                for (c, &idx) in self.support.iter().enumerate() {
                    let idx = idx as usize;
                    row[c] = (m.f.eval_index(idx) as f64) * m.dist.prob(idx);
                }
            });
        Ok(FamilyOperator { matrix, support: self.support.clone() })
    }

    /// Restricts a full-cube table to the support columns, in column order.
    pub fn restrict_to_support(&self, table: &[f64]) -> Vec<f64> {
        self.support.iter().map(|&i| table[i as usize]).collect()
    }
}

/// Serialization schema tag for family manifests.
pub const FAMILY_SCHEMA: &str = "family/v1";

/// JSON manifest form of a family: dimension, support list and dense member
/// tables in index order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyManifest {
    pub schema: String,
    pub dimension: usize,
    pub support: Vec<u32>,
    pub members: Vec<MemberManifest>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberManifest {
    pub f: Vec<i8>,
    pub d: Vec<f64>,
}

impl LabeledFamily {
    pub fn to_manifest(&self) -> FamilyManifest {
        FamilyManifest {
            schema: FAMILY_SCHEMA.to_string(),
            dimension: self.n,
            support: self.support.clone(),
            members: self
                .members
                .iter()
                .map(|m| MemberManifest { f: m.f.table().to_vec(), d: m.dist.probs().to_vec() })
                .collect(),
        }
    }

    pub fn from_manifest(manifest: &FamilyManifest) -> Result<Self> {
        if manifest.schema != FAMILY_SCHEMA {
            return Err(Error::Param(format!(
                "unsupported manifest schema {:?} (expected {FAMILY_SCHEMA:?})",
                manifest.schema
            )));
        }
        let n = manifest.dimension;
        let members = manifest
            .members
            .iter()
            .map(|m| {
                LabeledPair::new(
                    BooleanFunction::new(n, m.f.clone())?,
                    Distribution::new(n, m.d.clone())?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, manifest.support.clone(), members)
    }
}

/// Dense `|A| × |X|` matrix with entries `f(x)·D(x)`.
#[derive(Debug, Clone)]
pub struct FamilyOperator {
    matrix: Array2<f64>,
    support: Vec<u32>,
}

impl FamilyOperator {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    /// Applies the operator to a full-cube table, returning one weighted
    /// inner product per member.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let restricted: Vec<f64> = self.support.iter().map(|&i| phi[i as usize]).collect();
        self.apply_restricted(&restricted)
    }

    /// Applies the operator to a table already restricted to support columns.
    pub fn apply_restricted(&self, phi: &[f64]) -> Vec<f64> {
        debug_assert_eq!(phi.len(), self.matrix.ncols());
        (0..self.matrix.nrows())
            .into_par_iter()
            .map(|r| {
                let row = self.matrix.row(r);
                pairwise_map_sum(phi.len(), &|c| row[c] * phi[c])
            })
            .collect()
    }
}

/// Transports a family along a permutation of the cube: each member becomes
/// `(f ∘ Ψ, D ∘ Ψ)` where `Ψ(x)` is the point with index `perm[x]`.
///
/// The variance profile is preserved: `Var(A, φ ∘ Ψ⁻¹) = Var(A', φ)`.
pub fn apply_isomorphism(a: &LabeledFamily, perm: &[u32]) -> Result<LabeledFamily> {
    let size = 1usize << a.dimension();
    if perm.len() != size {
        return Err(Error::Bijection(format!(
            "permutation table has {} entries for a cube of {size} points",
            perm.len()
        )));
    }
    let mut seen = vec![false; size];
    for &t in perm {
        let t = t as usize;
        if t >= size || seen[t] {
            return Err(Error::Bijection(
                "point map is not a permutation of the cube".into(),
            ));
        }
        seen[t] = true;
    }

    let n = a.dimension();
    let mut in_support = vec![false; size];
    for &i in a.support() {
        in_support[i as usize] = true;
    }
    let new_support: Vec<u32> = (0..size as u32)
        .filter(|&x| in_support[perm[x as usize] as usize])
        .collect();

    let members = a
        .members()
        .iter()
        .map(|m| {
            let table: Vec<i8> = (0..size).map(|x| m.f.eval_index(perm[x] as usize)).collect();
            let probs: Vec<f64> = (0..size).map(|x| m.dist.prob(perm[x] as usize)).collect();
            LabeledPair::new(BooleanFunction::new(n, table)?, Distribution::new(n, probs)?)
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledFamily::new(n, new_support, members)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_family_counts() {
        let a = LabeledFamily::parity(2).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a.support().len(), 4);
    }

    #[test]
    fn parity_family_orthonormal() {
        let a = LabeledFamily::parity(3).unwrap();
        for (i, mi) in a.members().iter().enumerate() {
            for (j, mj) in a.members().iter().enumerate() {
                let v = crate::boolean::weighted_inner(&mi.f, &mj.f.to_real(), &mi.dist).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "i={i} j={j} v={v}");
            }
        }
    }

    #[test]
    fn parity_operator_entries() {
        let a = LabeledFamily::parity(3).unwrap();
        let op = a.operator_matrix().unwrap();
        for v in op.matrix().iter() {
            assert!((v.abs() - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn operator_row_abs_sums_are_one() {
        let a = LabeledFamily::parity(3).unwrap();
        let op = a.operator_matrix().unwrap();
        for row in op.matrix().outer_iter() {
            let s: f64 = row.iter().map(|v| v.abs()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_picks_out_members_on_parity_family() {
        let a = LabeledFamily::parity(2).unwrap();
        let op = a.operator_matrix().unwrap();
        for (j, m) in a.members().iter().enumerate() {
            let out = op.apply(&m.f.to_real());
            for (i, &v) in out.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_isomorphism_is_noop() {
        let a = LabeledFamily::parity(2).unwrap();
        let perm: Vec<u32> = (0..4).collect();
        let b = apply_isomorphism(&a, &perm).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coordinate_swap_permutes_parity_members() {
        // Swapping coordinates 0 and 1 maps f_{0} to f_{1} and vice versa.
        let a = LabeledFamily::parity(2).unwrap();
        let perm: Vec<u32> = (0..4u32)
            .map(|x| {
                let b0 = x & 1;
                let b1 = (x >> 1) & 1;
                (b0 << 1) | b1
            })
            .collect();
        let b = apply_isomorphism(&a, &perm).unwrap();
        assert_eq!(b.members()[1].f, a.members()[2].f);
        assert_eq!(b.members()[2].f, a.members()[1].f);
        assert_eq!(b.members()[0].f, a.members()[0].f);
        assert_eq!(b.members()[3].f, a.members()[3].f);
    }

    #[test]
    fn non_bijective_map_rejected() {
        let a = LabeledFamily::parity(2).unwrap();
        assert!(matches!(
            apply_isomorphism(&a, &[0, 0, 1, 2]),
            Err(Error::Bijection(_))
        ));
    }

    #[test]
    fn manifest_roundtrip() {
        let a = LabeledFamily::parity(2).unwrap();
        let manifest = a.to_manifest();
        assert_eq!(manifest.schema, FAMILY_SCHEMA);
        let b = LabeledFamily::from_manifest(&manifest).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mass_outside_support_rejected() {
        let f = BooleanFunction::constant(2, 1).unwrap();
        let d = Distribution::uniform(2).unwrap();
        let pair = LabeledPair::new(f, d).unwrap();
        assert!(matches!(
            LabeledFamily::new(2, vec![0, 1], vec![pair]),
            Err(Error::Param(_))
        ));
    }
}
