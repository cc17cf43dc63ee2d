//! Logic formulas over cube coordinates, with TRUE ↔ +1.
//!
//! Under this convention `(+1 ∨ x) = +1` and `(−1 ∨ x) = x`, so the product
//! of pairwise ORs `∏_i (x_i ∨ z_i)` collapses to the parity over the
//! coordinates where `z_i = −1`. `Prod` is that arithmetic ±1 product; it is
//! what XOR-style constructions need and is not expressible as a small
//! AND/OR tree.

use serde::{Deserialize, Serialize};

use crate::boolean::BooleanFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    /// Coordinate reference, 0-based.
    Var(usize),
    Not(Box<Formula>),
    /// +1 iff every child is +1; empty AND is +1.
    And(Vec<Formula>),
    /// +1 iff some child is +1; empty OR is −1.
    Or(Vec<Formula>),
    /// Arithmetic product of child values.
    Prod(Vec<Formula>),
}

impl Formula {
    pub fn var(i: usize) -> Self {
        Formula::Var(i)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(children: Vec<Formula>) -> Self {
        Formula::And(children)
    }

    pub fn or(children: Vec<Formula>) -> Self {
        Formula::Or(children)
    }

    pub fn prod(children: Vec<Formula>) -> Self {
        Formula::Prod(children)
    }

    /// `∏_{i<n} (x_i ∨ z_i)` over a 2n-dimensional cube with x in
    /// coordinates `0..n` and z in coordinates `n..2n`.
    pub fn or_pair_product(n: usize) -> Self {
        Formula::Prod(
            (0..n)
                .map(|i| Formula::Or(vec![Formula::Var(i), Formula::Var(n + i)]))
                .collect(),
        )
    }

    /// Evaluates against an assignment of ±1 values; every referenced
    /// coordinate must be bound. Children are evaluated eagerly so unbound
    /// coordinates are reported regardless of short-circuit value.
    pub fn eval(&self, values: &[i8]) -> Result<i8> {
        match self {
            Formula::Var(i) => match values.get(*i) {
                Some(&v) if v == 1 || v == -1 => Ok(v),
                Some(&v) => Err(Error::Eval(format!("coordinate {i} has non-sign value {v}"))),
                None => Err(Error::Eval(format!(
                    "coordinate {i} unbound (assignment has {} coordinates)",
                    values.len()
                ))),
            },
            Formula::Not(f) => Ok(-f.eval(values)?),
            Formula::And(children) => {
                let mut acc = 1i8;
                for c in children {
                    if c.eval(values)? == -1 {
                        acc = -1;
                    }
                }
                Ok(acc)
            }
            Formula::Or(children) => {
                let mut acc = -1i8;
                for c in children {
                    if c.eval(values)? == 1 {
                        acc = 1;
                    }
                }
                Ok(acc)
            }
            Formula::Prod(children) => {
                let mut acc = 1i8;
                for c in children {
                    acc *= c.eval(values)?;
                }
                Ok(acc)
            }
        }
    }

    /// Evaluates at the cube point with the given bit-pattern index.
    pub fn eval_index(&self, n: usize, index: usize) -> Result<i8> {
        let values: Vec<i8> = (0..n)
            .map(|i| if (index >> i) & 1 == 1 { -1 } else { 1 })
            .collect();
        self.eval(&values)
    }

    /// Materializes the full truth table over `{±1}^n`.
    pub fn to_function(&self, n: usize) -> Result<BooleanFunction> {
        let mut table = Vec::with_capacity(1 << n);
        for idx in 0..1usize << n {
            table.push(self.eval_index(n, idx)?);
        }
        BooleanFunction::new(n, table)
    }
}
