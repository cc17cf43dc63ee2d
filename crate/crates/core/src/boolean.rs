//! Sign-valued functions, distributions and weighted inner products over
//! `{±1}^n`, plus the induced single-problem packaging of a family.
//!
//! Index convention: a cube point is identified with the integer given by its
//! bit pattern, where bit `i` set means coordinate `i` has value −1. Truth
//! tables and probability tables are dense vectors in that index order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::LabeledFamily;
use crate::numeric::pairwise_map_sum;

/// Hard cap on cube dimension; dense tables beyond 2^24 entries are refused.
pub const MAX_DIM: usize = 24;

/// Tolerance on distribution normalization.
pub const DIST_NORM_TOL: f64 = 1e-12;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::DomainTooLarge(format!(
            "dimension {n} outside supported range 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

/// A vertex of `{±1}^n`, stored as its bit-pattern index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    n: usize,
    index: u32,
}

impl Point {
    pub fn new(n: usize, index: u32) -> Result<Self> {
        check_dim(n)?;
        if (index as u64) >= (1u64 << n) {
            return Err(Error::Dimension(format!(
                "index {index} out of range for dimension {n}"
            )));
        }
        Ok(Point { n, index })
    }

    /// Builds a point from explicit ±1 coordinate values.
    pub fn from_values(values: &[i8]) -> Result<Self> {
        check_dim(values.len())?;
        let mut index = 0u32;
        for (i, &v) in values.iter().enumerate() {
            match v {
                1 => {}
                -1 => index |= 1 << i,
                other => {
                    return Err(Error::Param(format!("coordinate value {other} is not ±1")))
                }
            }
        }
        Ok(Point { n: values.len(), index })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Bit-pattern index of the point within the full cube.
    pub fn index(&self) -> usize {
        self.index as usize
    }

    /// Value of coordinate `i` (0-based): +1 for bit 0, −1 for bit 1.
    pub fn coord(&self, i: usize) -> i8 {
        debug_assert!(i < self.n);
        if (self.index >> i) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn values(&self) -> Vec<i8> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }
}

/// A ±1-valued function on `{±1}^n` as a dense truth table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<i8>,
}

impl BooleanFunction {
    pub fn new(n: usize, table: Vec<i8>) -> Result<Self> {
        check_dim(n)?;
        if table.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "table length {} does not match 2^{n}",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Param(format!("table entry {bad} is not ±1")));
        }
        Ok(BooleanFunction { n, table })
    }

    pub fn from_fn<F: Fn(usize) -> i8>(n: usize, f: F) -> Result<Self> {
        check_dim(n)?;
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        Self::new(n, vec![value; 1 << n])
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    #[inline]
    pub fn eval_index(&self, index: usize) -> i8 {
        self.table[index]
    }

    pub fn eval(&self, x: &Point) -> Result<i8> {
        if x.dimension() != self.n {
            return Err(Error::Dimension(format!(
                "point dimension {} vs function dimension {}",
                x.dimension(),
                self.n
            )));
        }
        Ok(self.table[x.index()])
    }

    /// Table as reals, for use as a probe φ.
    pub fn to_real(&self) -> Vec<f64> {
        self.table.iter().map(|&v| v as f64).collect()
    }
}

/// Subset `I ⊆ [n]` describing the parity `f_I(x) = ∏_{i∈I} x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityDescriptor {
    n: usize,
    subset: Vec<usize>,
}

impl ParityDescriptor {
    /// `subset` holds 0-based coordinate indices, all below `n`.
    pub fn new(n: usize, mut subset: Vec<usize>) -> Result<Self> {
        check_dim(n)?;
        subset.sort_unstable();
        subset.dedup();
        if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
            return Err(Error::Dimension(format!("subset index {bad} out of range for [{n}]")));
        }
        Ok(ParityDescriptor { n, subset })
    }

    /// Parity from the mask of its subset bits.
    pub fn from_mask(n: usize, mask: usize) -> Result<Self> {
        check_dim(n)?;
        if mask >= 1 << n {
            return Err(Error::Dimension(format!("mask {mask} out of range for dimension {n}")));
        }
        let subset = (0..n).filter(|i| (mask >> i) & 1 == 1).collect();
        Ok(ParityDescriptor { n, subset })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn mask(&self) -> usize {
        self.subset.iter().fold(0, |acc, &i| acc | (1 << i))
    }

    /// Materializes the dense truth table. The empty subset gives the
    /// constant +1 (empty product).
    pub fn materialize(&self) -> BooleanFunction {
        let mask = self.mask();
        let table = (0..1usize << self.n)
            .map(|idx| if (idx & mask).count_ones() % 2 == 0 { 1 } else { -1 })
            .collect();
        BooleanFunction { n: self.n, table }
    }
}

/// A probability table over `{±1}^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    n: usize,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates non-negativity and normalization to within
    /// [`DIST_NORM_TOL`]; does not renormalize.
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if probs.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "probability table length {} does not match 2^{n}",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|&&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Param(format!("probability {bad} is negative or not finite")));
        }
        let total = pairwise_map_sum(probs.len(), &|i| probs[i]);
        if (total - 1.0).abs() > DIST_NORM_TOL {
            return Err(Error::Param(format!(
                "probabilities sum to {total}, outside 1 ± {DIST_NORM_TOL}"
            )));
        }
        Ok(Distribution { n, probs })
    }

    /// Explicitly renormalizes non-negative weights to a distribution.
    pub fn normalized(n: usize, weights: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if weights.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "weight table length {} does not match 2^{n}",
                weights.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|&&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Param(format!("weight {bad} is negative or not finite")));
        }
        let total = pairwise_map_sum(weights.len(), &|i| weights[i]);
        if total <= 0.0 {
            return Err(Error::Param("weights sum to zero".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Distribution { n, probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_dim(n)?;
        let p = 1.0 / (1u64 << n) as f64;
        Ok(Distribution { n, probs: vec![p; 1 << n] })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }
}

/// Weighted inner product `⟨f, g⟩_D = Σ_x D(x) f(x) g(x)`.
///
/// `g` is an arbitrary real table in index order; the result lies in [−1, 1]
/// whenever `‖g‖_∞ ≤ 1`.
pub fn weighted_inner(f: &BooleanFunction, g: &[f64], d: &Distribution) -> Result<f64> {
    if f.dimension() != d.dimension() || g.len() != f.table.len() {
        return Err(Error::Dimension(format!(
            "weighted_inner: f is 2^{}, g has {} entries, D is 2^{}",
            f.dimension(),
            g.len(),
            d.dimension()
        )));
    }
    Ok(pairwise_map_sum(g.len(), &|i| {
        d.probs[i] * (f.table[i] as f64) * g[i]
    }))
}

/// Packages a whole family as one labeled problem on the product cube.
///
/// `z_to_member[z]` names the member assigned to the z-pattern `z`; the map
/// must be a permutation of the member indices, and the member count must be
/// a power of two so that z-patterns form a subcube. The product point packs
/// x in the low `n` bits and z in the high bits, so the induced function is
/// `F(x, z) = f_z(x)` and the induced distribution is
/// `D'(x, z) = D_z(x) / |A|`.
pub fn induced_pair(
    a: &LabeledFamily,
    z_to_member: &[usize],
) -> Result<(BooleanFunction, Distribution)> {
    let count = a.members().len();
    if z_to_member.len() != count {
        return Err(Error::Dimension(format!(
            "bijection has {} entries for {} members",
            z_to_member.len(),
            count
        )));
    }
    if !count.is_power_of_two() {
        return Err(Error::Param(format!(
            "member count {count} is not a power of two; z-patterns must fill a subcube"
        )));
    }
    let mut seen = vec![false; count];
    for &m in z_to_member {
        if m >= count || seen[m] {
            return Err(Error::Bijection(format!(
                "member map is not a permutation of 0..{count}"
            )));
        }
        seen[m] = true;
    }
    let n_x = a.dimension();
    let n_z = count.trailing_zeros() as usize;
    let n_total = n_x + n_z;
    if n_total > MAX_DIM {
        return Err(Error::DomainTooLarge(format!(
            "product cube dimension {n_total} exceeds {MAX_DIM}"
        )));
    }

    let size_x = 1usize << n_x;
    let inv_count = 1.0 / count as f64;
    let mut table = vec![0i8; 1 << n_total];
    let mut probs = vec![0.0f64; 1 << n_total];
    for z in 0..count {
        let member = &a.members()[z_to_member[z]];
        let base = z << n_x;
        for x in 0..size_x {
            table[base | x] = member.f.eval_index(x);
            probs[base | x] = member.dist.prob(x) * inv_count;
        }
    }
    let f = BooleanFunction::new(n_total, table)?;
    let d = Distribution::new(n_total, probs)?;
    Ok((f, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_index_roundtrip() {
        let p = Point::from_values(&[-1, 1, -1]).unwrap();
        assert_eq!(p.index(), 0b101);
        assert_eq!(p.values(), vec![-1, 1, -1]);
        assert_eq!(Point::new(3, 0b101).unwrap(), p);
    }

    #[test]
    fn parity_empty_subset_is_constant_one() {
        let f = ParityDescriptor::new(2, vec![]).unwrap().materialize();
        assert_eq!(f.table(), &[1, 1, 1, 1]);
    }

    #[test]
    fn parity_single_coordinate() {
        let f = ParityDescriptor::new(2, vec![0]).unwrap().materialize();
        let x = Point::from_values(&[-1, 1]).unwrap();
        assert_eq!(f.eval(&x).unwrap(), -1);
    }

    #[test]
    fn parity_two_coordinates_full_table() {
        // Direct product evaluation over the n = 2 cube in index order.
        let f = ParityDescriptor::new(2, vec![0, 1]).unwrap().materialize();
        assert_eq!(f.table(), &[1, -1, -1, 1]);
    }

    #[test]
    fn self_inner_product_is_one() {
        let f = ParityDescriptor::new(3, vec![0]).unwrap().materialize();
        let d = Distribution::uniform(3).unwrap();
        let v = weighted_inner(&f, &f.to_real(), &d).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_parities_orthogonal() {
        let f1 = ParityDescriptor::new(2, vec![0]).unwrap().materialize();
        let f2 = ParityDescriptor::new(2, vec![1]).unwrap().materialize();
        let d = Distribution::uniform(2).unwrap();
        let v = weighted_inner(&f1, &f2.to_real(), &d).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn weighted_inner_matches_naive_loop() {
        // Independent naive summation oracle on random-ish tables.
        let n = 4;
        let f = BooleanFunction::from_fn(n, |i| if i.count_ones() % 3 == 0 { 1 } else { -1 })
            .unwrap();
        let g: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) / 2.0).collect();
        let weights: Vec<f64> = (0..16).map(|i| (i % 3 + 1) as f64).collect();
        let d = Distribution::normalized(n, weights).unwrap();
        let mut naive = 0.0;
        for i in 0..16 {
            naive += d.prob(i) * f.eval_index(i) as f64 * g[i];
        }
        let v = weighted_inner(&f, &g, &d).unwrap();
        assert!((v - naive).abs() < 1e-15);
    }

    #[test]
    fn weighted_inner_dimension_mismatch() {
        let f = BooleanFunction::constant(2, 1).unwrap();
        let d = Distribution::uniform(3).unwrap();
        assert!(matches!(
            weighted_inner(&f, &f.to_real(), &d),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn distribution_rejects_unnormalized() {
        let probs = vec![0.3, 0.3, 0.3, 0.3];
        assert!(matches!(Distribution::new(2, probs), Err(Error::Param(_))));
    }

    #[test]
    fn distribution_normalized_on_request() {
        let d = Distribution::normalized(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.probs(), &[0.25; 4]);
    }

    #[test]
    fn induced_pair_parity_family_is_uniform() {
        let a = LabeledFamily::parity(2).unwrap();
        let map: Vec<usize> = (0..4).collect();
        let (f, d) = induced_pair(&a, &map).unwrap();
        assert_eq!(f.dimension(), 4);
        for i in 0..16 {
            assert!((d.prob(i) - 1.0 / 16.0).abs() < 1e-15);
        }
        // F(x, z) = f_z(x) for all product points.
        for z in 0..4usize {
            let member = a.members()[z].f.clone();
            for x in 0..4usize {
                assert_eq!(f.eval_index((z << 2) | x), member.eval_index(x));
            }
        }
    }

    #[test]
    fn induced_pair_marginal_over_z_is_uniform() {
        let a = LabeledFamily::parity(2).unwrap();
        let map: Vec<usize> = vec![2, 0, 3, 1];
        let (_, d) = induced_pair(&a, &map).unwrap();
        for z in 0..4usize {
            let mut mass = 0.0;
            for x in 0..4usize {
                mass += d.prob((z << 2) | x);
            }
            assert!((mass - 0.25).abs() < 1e-15);
        }
        let total = pairwise_map_sum(1 << 4, &|i| d.prob(i));
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn induced_pair_rejects_bad_map() {
        let a = LabeledFamily::parity(2).unwrap();
        assert!(matches!(
            induced_pair(&a, &[0, 0, 1, 2]),
            Err(Error::Bijection(_))
        ));
        assert!(matches!(
            induced_pair(&a, &[0, 1]),
            Err(Error::Dimension(_))
        ));
    }
}
