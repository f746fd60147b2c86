//! Generating matrices over `F_p`, indicator messages and the quadratic lift.
//!
//! Every message carries a trailing affine coordinate fixed to one, so row
//! `c` of a generating matrix evaluates to `Σ a_ℓ z_ℓ − b`. The lifted
//! matrix has columns ordered as `q_{a,b}` (row-major, `n²` columns), then
//! the `x`-linear block, the `y`-linear block and the constant; the same
//! order is used by [`lifted_message`].

use crate::csp::CspInstance;
use crate::error::{CspError, Result};
use crate::field::FieldPrime;
use crate::ordering::{require_vanishing, Permutation};

/// A weighted linear code given by its rows over `F_p`.
pub trait WeightedCode {
    fn field(&self) -> FieldPrime;
    fn rows(&self) -> &[Vec<u32>];
    fn coord_weights(&self) -> &[f64];
    fn cols(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingMatrix {
    p: FieldPrime,
    n: usize,
    rows: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix {
    p: FieldPrime,
    n: usize,
    rows: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

macro_rules! weighted_code {
    ($t:ty, $cols:expr) => {
        impl WeightedCode for $t {
            fn field(&self) -> FieldPrime {
                self.p
            }
            fn rows(&self) -> &[Vec<u32>] {
                &self.rows
            }
            fn coord_weights(&self) -> &[f64] {
                &self.weights
            }
            fn cols(&self) -> usize {
                $cols(self.n)
            }
        }
    };
}

weighted_code!(GeneratingMatrix, |n: usize| n + 1);
weighted_code!(LiftedMatrix, lifted_len);

impl GeneratingMatrix {
    /// Number of variables (columns minus the affine column).
    pub fn n(&self) -> usize {
        self.n
    }
}

impl LiftedMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Keeps the listed rows, lifting commuting with row selection.
    pub fn select_rows(&self, rows: &[usize]) -> LiftedMatrix {
        LiftedMatrix {
            p: self.p,
            n: self.n,
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            weights: rows.iter().map(|&r| self.weights[r]).collect(),
        }
    }
}

impl GeneratingMatrix {
    pub fn select_rows(&self, rows: &[usize]) -> GeneratingMatrix {
        GeneratingMatrix {
            p: self.p,
            n: self.n,
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            weights: rows.iter().map(|&r| self.weights[r]).collect(),
        }
    }
}

/// `n² + 2n + 1`.
pub fn lifted_len(n: usize) -> usize {
    n * n + 2 * n + 1
}

/// Row `c` holds `a_i` at the column of `x_i` and `−b` in column `n`.
pub fn generating_matrix(instance: &CspInstance) -> GeneratingMatrix {
    let p = instance.field();
    let n = instance.n();
    let rows = instance
        .constraints()
        .iter()
        .map(|c| {
            let mut row = vec![0u32; n + 1];
            for (&v, &a) in c.vars().iter().zip(c.coeffs()) {
                row[v] = a;
            }
            row[n] = p.neg(c.offset());
            row
        })
        .collect();
    GeneratingMatrix {
        p,
        n,
        rows,
        weights: instance.weights(),
    }
}

/// Prefix indicator `z_{π,≤i}`: ones at the variables in positions `0..=i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndicatorMessage {
    z: Vec<u8>,
}

impl IndicatorMessage {
    pub fn bits(&self) -> &[u8] {
        &self.z
    }

    /// The message with its affine coordinate appended.
    pub fn to_message(&self) -> Vec<u32> {
        self.z.iter().map(|&b| b as u32).chain(std::iter::once(1)).collect()
    }
}

pub fn indicator_message(perm: &Permutation, i: usize) -> Result<IndicatorMessage> {
    let n = perm.len();
    if i + 1 >= n {
        return Err(CspError::IndexOutOfRange {
            index: i,
            n: n.saturating_sub(1),
        });
    }
    let mut z = vec![0u8; n];
    for &v in &perm.order()[..=i] {
        z[v] = 1;
    }
    Ok(IndicatorMessage { z })
}

/// Weighted Hamming weight of `M·msg`.
pub fn codeword_weight<M: WeightedCode + ?Sized>(code: &M, msg: &[u32]) -> Result<f64> {
    if msg.len() != code.cols() {
        return Err(CspError::Dimension {
            expected: code.cols(),
            got: msg.len(),
        });
    }
    let p = code.field();
    Ok(code
        .rows()
        .iter()
        .zip(code.coord_weights())
        .filter(|(row, _)| {
            row.iter()
                .zip(msg)
                .fold(0u32, |acc, (&a, &x)| p.add(acc, p.mul(a, x % p.get())))
                != 0
        })
        .map(|(_, &w)| w)
        .sum())
}

/// `wt(G·z_{π,≤i})`, the code-side expression of `d_{C,π}(i)`.
pub fn crossing_via_code(
    instance: &CspInstance,
    gen: &GeneratingMatrix,
    perm: &Permutation,
    i: usize,
) -> Result<f64> {
    let p = instance.field();
    for c in instance.constraints() {
        require_vanishing(c, p)?;
    }
    if perm.len() != gen.n {
        return Err(CspError::Dimension {
            expected: gen.n,
            got: perm.len(),
        });
    }
    codeword_weight(gen, &indicator_message(perm, i)?.to_message())
}

/// Row-wise expansion of `(Σ a_i x_i − b)(Σ a_j y_j − b)` into `q_{i,j}`,
/// linear and constant columns.
pub fn lift(gen: &GeneratingMatrix) -> LiftedMatrix {
    let p = gen.p;
    let n = gen.n;
    let rows = gen
        .rows
        .iter()
        .map(|g| {
            let (a, c0) = (&g[..n], g[n]);
            let mut row = vec![0u32; lifted_len(n)];
            for i in 0..n {
                for j in 0..n {
                    row[i * n + j] = p.mul(a[i], a[j]);
                }
                row[n * n + i] = p.mul(c0, a[i]);
                row[n * n + n + i] = p.mul(c0, a[i]);
            }
            row[n * n + 2 * n] = p.mul(c0, c0);
            row
        })
        .collect();
    LiftedMatrix {
        p,
        n,
        rows,
        weights: gen.weights.clone(),
    }
}

/// `(z_{π,≤i} ⊗ z_{π,≤j}, z_{π,≤i}, z_{π,≤j}, 1)`.
pub fn lifted_message(perm: &Permutation, i: usize, j: usize) -> Result<Vec<u32>> {
    let zi = indicator_message(perm, i)?;
    let zj = indicator_message(perm, j)?;
    Ok(lifted_from_indicators(zi.bits(), zj.bits()))
}

pub(crate) fn lifted_from_indicators(zi: &[u8], zj: &[u8]) -> Vec<u32> {
    let n = zi.len();
    let mut out = Vec::with_capacity(lifted_len(n));
    for &a in zi {
        out.extend(zj.iter().map(|&b| (a & b) as u32));
    }
    out.extend(zi.iter().map(|&v| v as u32));
    out.extend(zj.iter().map(|&v| v as u32));
    out.push(1);
    out
}
