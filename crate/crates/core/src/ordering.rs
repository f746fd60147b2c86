//! Per-permutation geometry of an augmented instance.
//!
//! A [`Permutation`] lists variables in ascending value order: `order[0]`
//! holds the smallest coordinate. Gap `k` (for `k < n−1`) is the open
//! interval between positions `k` and `k+1`; a threshold inside it rounds
//! exactly the variables at positions `> k` to one. With that convention
//! `J·P_π·x` has entries `x_{π[k]} − x_{π[k+1]} ≤ 0` for every π-consistent
//! `x`, and `B^inc = B^cross·J·P_π`.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::csp::{Constraint, CspInstance, FractionalAssignment};
use crate::error::{CspError, Result};
use crate::field::FieldPrime;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(CspError::Structure(format!("{order:?} is not a permutation")));
            }
            seen[v] = true;
        }
        Ok(Permutation { order })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            order: (0..n).collect(),
        }
    }

    pub fn reversal(n: usize) -> Self {
        Permutation {
            order: (0..n).rev().collect(),
        }
    }

    /// A permutation under which `x` is consistent (stable ascending sort).
    pub fn sorting(x: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        Permutation { order }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Permutation { order }
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (0..n)
            .permutations(n)
            .map(|order| Permutation { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `rank()[v]` is the position of variable `v`.
    pub fn rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (k, &v) in self.order.iter().enumerate() {
            rank[v] = k;
        }
        rank
    }

    /// `x[π[0]] ≤ x[π[1]] ≤ …` (ties allowed).
    pub fn is_consistent(&self, x: &[f64]) -> bool {
        x.len() == self.order.len() && self.order.windows(2).all(|w| x[w[0]] <= x[w[1]])
    }
}

/// Maximal runs of active gaps, as position pairs `(lo, hi)`: the interval
/// `[x_{π[lo]}, x_{π[hi]}]` is active and covers gaps `lo..hi`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActiveRegion {
    intervals: Vec<(usize, usize)>,
}

impl ActiveRegion {
    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn gaps(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().flat_map(|&(lo, hi)| lo..hi)
    }
}

pub(crate) fn require_vanishing(c: &Constraint, p: FieldPrime) -> Result<()> {
    if c.vanishes_on_constants(p) {
        Ok(())
    } else {
        Err(CspError::ContractViolation(format!(
            "constraint on {:?} is satisfied at θ=0 or θ=1; augment the instance first",
            c.vars()
        )))
    }
}

fn check_perm(n: usize, perm: &Permutation) -> Result<()> {
    if perm.len() != n {
        return Err(CspError::Dimension {
            expected: n,
            got: perm.len(),
        });
    }
    Ok(())
}

/// Activity of each gap, by sweeping the positions of the constraint's
/// variables upward and tracking the coefficient mass rounded to zero.
pub(crate) fn gap_pattern(c: &Constraint, p: FieldPrime, rank: &[usize]) -> Vec<bool> {
    let n = rank.len();
    let mut pairs: Vec<(usize, u32)> = c
        .vars()
        .iter()
        .zip(c.coeffs())
        .map(|(&v, &a)| (rank[v], a))
        .collect();
    pairs.sort_unstable();
    let total = c.coeff_sum(p);
    let mut below = 0u32;
    let mut next = 0;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        while next < pairs.len() && pairs[next].0 <= k {
            below = p.add(below, pairs[next].1);
            next += 1;
        }
        out.push(p.sub(p.sub(total, below), c.offset()) != 0);
    }
    out
}

fn merge_gaps(pattern: &[bool]) -> ActiveRegion {
    let mut intervals = Vec::new();
    let mut start = None;
    for (k, &on) in pattern.iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(k),
            (false, Some(lo)) => {
                intervals.push((lo, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, pattern.len()));
    }
    ActiveRegion { intervals }
}

pub fn active_region(c: &Constraint, perm: &Permutation, p: FieldPrime) -> Result<ActiveRegion> {
    require_vanishing(c, p)?;
    if let Some(&v) = c.vars().iter().find(|&&v| v >= perm.len()) {
        return Err(CspError::IndexOutOfRange {
            index: v,
            n: perm.len(),
        });
    }
    Ok(merge_gaps(&gap_pattern(c, p, &perm.rank())))
}

/// Gaps whose bisector lies in the active region, found by rounding a
/// strictly increasing witness vector at each bisector.
pub fn crossing_indices(c: &Constraint, perm: &Permutation, p: FieldPrime) -> Result<Vec<usize>> {
    require_vanishing(c, p)?;
    let n = perm.len();
    let rank = perm.rank();
    let denom = (n + 1) as f64;
    let witness =
        FractionalAssignment::new(rank.iter().map(|&k| (k + 1) as f64 / denom).collect())?;
    let mut out = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let bisector = (k as f64 + 1.5) / denom;
        if c.eval(p, &witness.round(bisector)?)? {
            out.push(k);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix(pub Matrix<i64>);

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingMatrix(pub Matrix<i64>);

impl IncidenceMatrix {
    pub fn matrix(&self) -> &Matrix<i64> {
        &self.0
    }
}

impl CrossingMatrix {
    pub fn matrix(&self) -> &Matrix<i64> {
        &self.0
    }

    pub fn is_crossing(&self, c: usize, gap: usize) -> bool {
        self.0.get(c, gap) != 0
    }
}

/// `J ∈ {−1,0,1}^{(n−1)×n}` with `J(i,i) = 1`, `J(i,i+1) = −1`.
pub fn difference_matrix(n: usize) -> Matrix<i64> {
    let mut j = Matrix::zeros(n.saturating_sub(1), n);
    for i in 0..n.saturating_sub(1) {
        j.set(i, i, 1);
        j.set(i, i + 1, -1);
    }
    j
}

/// `P_π(i,j) = 1` iff `j = π[i]`, so `(P_π x)_i = x_{π[i]}`.
pub fn permutation_matrix(perm: &Permutation) -> Matrix<i64> {
    let n = perm.len();
    let mut m = Matrix::zeros(n, n);
    for (i, &j) in perm.order().iter().enumerate() {
        m.set(i, j, 1);
    }
    m
}

fn patterns(instance: &CspInstance, perm: &Permutation) -> Result<Vec<Vec<bool>>> {
    check_perm(instance.n(), perm)?;
    let p = instance.field();
    let rank = perm.rank();
    instance
        .constraints()
        .iter()
        .map(|c| {
            require_vanishing(c, p)?;
            Ok(gap_pattern(c, p, &rank))
        })
        .collect()
}

/// `+1` at lower borders and `−1` at upper borders of each active interval.
pub fn incidence_matrix(instance: &CspInstance, perm: &Permutation) -> Result<IncidenceMatrix> {
    let pats = patterns(instance, perm)?;
    let mut b = Matrix::zeros(instance.m(), instance.n());
    for (c, pat) in pats.iter().enumerate() {
        for &(lo, hi) in merge_gaps(pat).intervals() {
            b.set(c, perm.order()[lo], 1);
            b.set(c, perm.order()[hi], -1);
        }
    }
    Ok(IncidenceMatrix(b))
}

pub fn crossing_matrix(instance: &CspInstance, perm: &Permutation) -> Result<CrossingMatrix> {
    let pats = patterns(instance, perm)?;
    let mut b = Matrix::zeros(instance.m(), instance.n().saturating_sub(1));
    for (c, pat) in pats.iter().enumerate() {
        for (k, &on) in pat.iter().enumerate() {
            if on {
                b.set(c, k, 1);
            }
        }
    }
    Ok(CrossingMatrix(b))
}

fn check_gap(n: usize, gap: usize) -> Result<()> {
    if gap + 1 >= n {
        return Err(CspError::IndexOutOfRange {
            index: gap,
            n: n.saturating_sub(1),
        });
    }
    Ok(())
}

/// `d_{C,π}(i)`: total weight of constraints crossed at gap `i`.
pub fn crossing_degree(instance: &CspInstance, perm: &Permutation, i: usize) -> Result<f64> {
    crossing_degree_pair(instance, perm, i, i)
}

/// `d_{C,π}(i,j)`: total weight of constraints crossed at both gaps.
pub fn crossing_degree_pair(
    instance: &CspInstance,
    perm: &Permutation,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_gap(instance.n(), i)?;
    check_gap(instance.n(), j)?;
    let pats = patterns(instance, perm)?;
    Ok(instance
        .constraints()
        .iter()
        .zip(&pats)
        .filter(|(_, pat)| pat[i] && pat[j])
        .map(|(c, _)| c.weight())
        .sum())
}

/// `(B^cross)ᵀ·diag(weights)·B^cross`.
pub fn crossing_gram(cross: &CrossingMatrix, weights: &[f64]) -> Matrix<f64> {
    let b = cross.matrix();
    let g = b.cols();
    let mut out = Matrix::zeros(g, g);
    for (c, &w) in weights.iter().enumerate().take(b.rows()) {
        let crossed: Vec<usize> = (0..g).filter(|&k| b.get(c, k) != 0).collect();
        for &i in &crossed {
            for &j in &crossed {
                out.set(i, j, out.get(i, j) + w);
            }
        }
    }
    out
}

/// `xᵀ (B^inc)ᵀ W B^inc x` for a π-consistent `x`.
pub fn quadratic_form_energy(instance: &CspInstance, perm: &Permutation, x: &[f64]) -> Result<f64> {
    check_perm(instance.n(), perm)?;
    if !perm.is_consistent(x) {
        return Err(CspError::Precondition("x is not sorted according to π".into()));
    }
    let inc = incidence_matrix(instance, perm)?;
    let bx = inc.matrix().map(|v| v as f64).matvec(x);
    Ok(instance
        .constraints()
        .iter()
        .zip(bx)
        .map(|(c, v)| c.weight() * v * v)
        .sum())
}

/// Entrywise comparison of `B^inc` with `B^cross·J·P_π`.
pub fn factorization_matches(inc: &IncidenceMatrix, cross: &CrossingMatrix, perm: &Permutation) -> bool {
    let n = perm.len();
    if cross.matrix().cols() + 1 != n.max(1) || inc.matrix().cols() != n {
        return false;
    }
    let rhs = cross
        .matrix()
        .matmul(&difference_matrix(n))
        .matmul(&permutation_matrix(perm));
    rhs == *inc.matrix()
}

pub fn verify_factorization(instance: &CspInstance, perm: &Permutation) -> Result<bool> {
    let inc = incidence_matrix(instance, perm)?;
    let cross = crossing_matrix(instance, perm)?;
    Ok(factorization_matches(&inc, &cross, perm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{Constraint, CspInstance};

    fn f2() -> FieldPrime {
        FieldPrime::new(2).unwrap()
    }

    /// 4-XOR on x2, x3, x6, x9 (1-based) among nine variables.
    fn nine_var_example() -> CspInstance {
        let c = Constraint::xor(vec![1, 2, 5, 8], 0, 1.0).unwrap();
        CspInstance::new(9, f2(), vec![c]).unwrap()
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::new(vec![0, 2, 1]).is_ok());
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert_eq!(Permutation::all(4).count(), 24);
        assert_eq!(Permutation::reversal(3).rank(), vec![2, 1, 0]);
    }

    #[test]
    fn special_matrices() {
        assert_eq!(difference_matrix(2).to_rows(), vec![vec![1, -1]]);
        let id = permutation_matrix(&Permutation::identity(3));
        assert_eq!(id.to_rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(difference_matrix(2).matvec(&[3, 1]), vec![2]);
    }

    #[test]
    fn active_region_nine_var_example() {
        let inst = nine_var_example();
        let c = &inst.constraints()[0];
        let region = active_region(c, &Permutation::identity(9), f2()).unwrap();
        // [x2, x3] ∪ [x6, x9] in 1-based names
        assert_eq!(region.intervals(), &[(1, 2), (5, 8)]);
        let crossing = crossing_indices(c, &Permutation::identity(9), f2()).unwrap();
        assert_eq!(crossing, vec![1, 5, 6, 7]);
        assert_eq!(region.gaps().collect::<Vec<_>>(), crossing);
    }

    #[test]
    fn two_xor_region_and_crossing() {
        let c = Constraint::xor(vec![3, 1], 0, 1.0).unwrap();
        let perm = Permutation::new(vec![0, 1, 2, 3, 4]).unwrap();
        let region = active_region(&c, &perm, f2()).unwrap();
        assert_eq!(region.intervals(), &[(1, 3)]);
        // adjacent positions k, k+1 give exactly {k}
        let perm = Permutation::new(vec![0, 3, 1, 2, 4]).unwrap();
        assert_eq!(crossing_indices(&c, &perm, f2()).unwrap(), vec![1]);
    }

    #[test]
    fn empty_region_for_empty_constraint() {
        // a constraint with no variables and offset 0 is never satisfied
        let c = Constraint::new(f2(), vec![], vec![], 0, 1.0).unwrap();
        let region = active_region(&c, &Permutation::identity(3), f2()).unwrap();
        assert!(region.is_empty());
        assert!(crossing_indices(&c, &Permutation::identity(3), f2()).unwrap().is_empty());
        let inst = CspInstance::new(3, f2(), vec![c]).unwrap();
        let inc = incidence_matrix(&inst, &Permutation::identity(3)).unwrap();
        assert_eq!(inc.matrix().row(0), &[0, 0, 0]);
        let cross = crossing_matrix(&inst, &Permutation::identity(3)).unwrap();
        assert_eq!(cross.matrix().row(0), &[0, 0]);
    }

    #[test]
    fn three_term_constraint_mod_3() {
        let p = FieldPrime::new(3).unwrap();
        // x1 + x2 + x3 ≠ 0 (mod 3): proper suffix sums are 1 or 2, so every gap is active
        let c = Constraint::new(p, vec![0, 1, 2], vec![1, 1, 1], 0, 1.0).unwrap();
        let region = active_region(&c, &Permutation::identity(3), p).unwrap();
        assert_eq!(region.intervals(), &[(0, 2)]);
    }

    #[test]
    fn non_vanishing_constraint_is_rejected() {
        let c = Constraint::xor(vec![0, 1, 2], 0, 1.0).unwrap();
        let err = active_region(&c, &Permutation::identity(3), f2()).unwrap_err();
        assert!(matches!(err, CspError::ContractViolation(_)));
    }

    #[test]
    fn incidence_rows() {
        // 4-XOR on sorted variables: +1, −1, +1, −1
        let inst = CspInstance::new(4, f2(), vec![Constraint::xor(vec![0, 1, 2, 3], 0, 1.0).unwrap()]).unwrap();
        let perm = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        let inc = incidence_matrix(&inst, &perm).unwrap();
        // positions: u1 = x2, u2 = x0, u3 = x3, u4 = x1
        assert_eq!(inc.matrix().row(0), &[-1, -1, 1, 1]);
        assert_eq!(inc.matrix().row(0).iter().sum::<i64>(), 0);
        // 2-XOR edge
        let inst = CspInstance::new(3, f2(), vec![Constraint::xor(vec![2, 0], 0, 1.0).unwrap()]).unwrap();
        let inc = incidence_matrix(&inst, &Permutation::identity(3)).unwrap();
        assert_eq!(inc.matrix().row(0), &[1, 0, -1]);
    }

    #[test]
    fn crossing_matrix_rows() {
        let inst = nine_var_example();
        let cross = crossing_matrix(&inst, &Permutation::identity(9)).unwrap();
        assert_eq!(cross.matrix().row(0), &[0, 1, 0, 0, 0, 1, 1, 1]);
        // 2-XOR spanning positions 1 < 4 → ones at gaps 1..4
        let inst = CspInstance::new(6, f2(), vec![Constraint::xor(vec![1, 4], 0, 1.0).unwrap()]).unwrap();
        let cross = crossing_matrix(&inst, &Permutation::identity(6)).unwrap();
        assert_eq!(cross.matrix().row(0), &[0, 1, 1, 1, 0]);
    }

    #[test]
    fn crossing_degrees() {
        let inst = nine_var_example();
        let id = Permutation::identity(9);
        // 1-based d(2,7) = 1 and d(3,7) = 0
        assert_eq!(crossing_degree_pair(&inst, &id, 1, 6).unwrap(), 1.0);
        assert_eq!(crossing_degree_pair(&inst, &id, 2, 6).unwrap(), 0.0);
        assert_eq!(crossing_degree(&inst, &id, 6).unwrap(), 1.0);
        let empty = CspInstance::new(9, f2(), vec![]).unwrap();
        assert_eq!(crossing_degree(&empty, &id, 3).unwrap(), 0.0);
        assert!(crossing_degree(&inst, &id, 8).is_err());
    }

    #[test]
    fn quadratic_form_examples() {
        let inst = CspInstance::new(2, f2(), vec![Constraint::xor(vec![0, 1], 0, 1.0).unwrap()]).unwrap();
        let q = quadratic_form_energy(&inst, &Permutation::identity(2), &[0.2, 0.7]).unwrap();
        assert!((q - 0.25).abs() < 1e-12);
        let q = quadratic_form_energy(&inst, &Permutation::identity(2), &[0.4, 0.4]).unwrap();
        assert_eq!(q, 0.0);
        let err = quadratic_form_energy(&inst, &Permutation::identity(2), &[0.7, 0.2]);
        assert!(matches!(err, Err(CspError::Precondition(_))));
    }

    #[test]
    fn factorization_and_negative_control() {
        let inst = nine_var_example();
        let id = Permutation::identity(9);
        assert!(verify_factorization(&inst, &id).unwrap());
        let inc = incidence_matrix(&inst, &id).unwrap();
        let mut cross = crossing_matrix(&inst, &id).unwrap();
        cross.0.set(0, 3, 1);
        assert!(!factorization_matches(&inc, &cross, &id));
    }
}
