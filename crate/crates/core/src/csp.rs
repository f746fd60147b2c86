//! Field-affine constraints, instances and their exact evaluation.
//!
//! A constraint over `F_p` is the predicate `1[Σ a_i x_i ≠ b (mod p)]` on
//! Boolean inputs. Fractional assignments are evaluated through threshold
//! rounding: the satisfaction probability of a constraint is the Lebesgue
//! measure of thresholds `θ ∈ [0,1]` whose rounding `1[x_i ≥ θ]` satisfies it,
//! and the energy is the weighted sum of squared probabilities.

use crate::error::{CspError, Result};
use crate::field::FieldPrime;

/// Absolute tolerance used for every floating-point comparison in the crate.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    vars: Vec<usize>,
    coeffs: Vec<u32>,
    offset: u32,
    weight: f64,
}

impl Constraint {
    /// Builds `1[Σ coeffs[i]·x_{vars[i]} ≠ offset (mod p)]` with the given weight.
    ///
    /// Coefficients and offset are reduced mod `p`; a coefficient that
    /// reduces to zero is rejected.
    pub fn new(
        p: FieldPrime,
        vars: Vec<usize>,
        coeffs: Vec<i64>,
        offset: i64,
        weight: f64,
    ) -> Result<Self> {
        if vars.len() != coeffs.len() {
            return Err(CspError::Structure(format!(
                "{} variables but {} coefficients",
                vars.len(),
                coeffs.len()
            )));
        }
        let mut seen = vars.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(CspError::Structure("repeated variable".into()));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(CspError::Structure(format!("weight {weight} is not a finite nonnegative number")));
        }
        let coeffs: Vec<u32> = coeffs.into_iter().map(|a| p.reduce(a)).collect();
        if coeffs.contains(&0) {
            return Err(CspError::Structure(format!("zero coefficient mod {p}")));
        }
        Ok(Constraint {
            vars,
            coeffs,
            offset: p.reduce(offset),
            weight,
        })
    }

    /// XOR over `F_2`: satisfied iff the parity of `vars` differs from `parity`.
    pub fn xor(vars: Vec<usize>, parity: u8, weight: f64) -> Result<Self> {
        let k = vars.len();
        Constraint::new(FieldPrime::new(2)?, vars, vec![1; k], parity as i64, weight)
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn with_weight(&self, weight: f64) -> Self {
        Constraint {
            weight,
            ..self.clone()
        }
    }

    pub(crate) fn coeff_sum(&self, p: FieldPrime) -> u32 {
        self.coeffs.iter().fold(0, |acc, &a| p.add(acc, a))
    }

    /// `Σ a_i·bit(v_i) − b (mod p)`.
    pub(crate) fn residual(&self, p: FieldPrime, bit: impl Fn(usize) -> bool) -> u32 {
        let s = self
            .vars
            .iter()
            .zip(&self.coeffs)
            .filter(|(&v, _)| bit(v))
            .fold(0, |acc, (_, &a)| p.add(acc, a));
        p.sub(s, self.offset)
    }

    pub(crate) fn holds(&self, p: FieldPrime, bit: impl Fn(usize) -> bool) -> bool {
        self.residual(p, bit) != 0
    }

    /// True when the constraint is unsatisfied by both all-zeros and all-ones.
    pub fn vanishes_on_constants(&self, p: FieldPrime) -> bool {
        self.offset == 0 && self.coeff_sum(p) == 0
    }

    fn check_indices(&self, n: usize) -> Result<()> {
        match self.vars.iter().find(|&&v| v >= n) {
            Some(&index) => Err(CspError::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }

    pub fn eval(&self, p: FieldPrime, x: &BooleanAssignment) -> Result<bool> {
        self.check_indices(x.len())?;
        Ok(self.holds(p, |v| x.bits[v]))
    }

    pub fn sat_prob(&self, p: FieldPrime, x: &FractionalAssignment) -> Result<f64> {
        self.check_indices(x.len())?;
        Ok(self.sat_measure(p, |v| x.values[v]))
    }

    /// Measure of thresholds in `[0,1]` at which the rounded vector satisfies
    /// the constraint. Values are assumed to lie in `[0,1]`.
    pub(crate) fn sat_measure(&self, p: FieldPrime, value: impl Fn(usize) -> f64) -> f64 {
        let mut pairs: Vec<(f64, u32)> = self
            .vars
            .iter()
            .zip(&self.coeffs)
            .map(|(&v, &a)| (value(v), a))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut points: Vec<f64> = Vec::with_capacity(pairs.len() + 2);
        points.push(0.0);
        points.extend(pairs.iter().map(|&(x, _)| x));
        points.push(1.0);
        points.dedup();

        let total = self.coeff_sum(p);
        let mut below = 0u32;
        let mut next = 0usize;
        let mut measure = 0.0;
        for w in points.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            while next < pairs.len() && pairs[next].0 <= lo {
                below = p.add(below, pairs[next].1);
                next += 1;
            }
            // on (lo, hi] the ones are exactly the variables with value > lo
            if p.sub(p.sub(total, below), self.offset) != 0 {
                measure += hi - lo;
            }
        }
        measure
    }
}

/// Records which dummy variables were appended by augmentation.
///
/// The offset dummy (index `original_n`) carries `−b`; the parity dummy
/// (next index) carries `−(Σa − b)`. Setting offset = 1 and parity = 0
/// recovers the original predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Augmentation {
    pub original_n: usize,
    pub offset_dummy: bool,
    pub parity_dummy: bool,
}

impl Augmentation {
    /// The smallest layout able to augment every constraint of `instance`.
    pub fn for_instance(instance: &CspInstance) -> Self {
        let p = instance.p;
        let offset_dummy = instance.constraints.iter().any(|c| c.offset != 0);
        let parity_dummy = instance
            .constraints
            .iter()
            .any(|c| p.sub(c.coeff_sum(p), c.offset) != 0);
        Augmentation {
            original_n: instance.n,
            offset_dummy,
            parity_dummy,
        }
    }

    pub fn offset_var(&self) -> Option<usize> {
        self.offset_dummy.then_some(self.original_n)
    }

    pub fn parity_var(&self) -> Option<usize> {
        self.parity_dummy
            .then_some(self.original_n + self.offset_dummy as usize)
    }

    pub fn total_vars(&self) -> usize {
        self.original_n + self.offset_dummy as usize + self.parity_dummy as usize
    }

    /// Extends an original-space vector with offset = 1 and parity = 0.
    pub fn extend_values(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        if self.offset_dummy {
            out.push(1.0);
        }
        if self.parity_dummy {
            out.push(0.0);
        }
        out
    }

    pub fn extend_bits(&self, x: &[bool]) -> Vec<bool> {
        let mut out = x.to_vec();
        if self.offset_dummy {
            out.push(true);
        }
        if self.parity_dummy {
            out.push(false);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspInstance {
    n: usize,
    p: FieldPrime,
    constraints: Vec<Constraint>,
    augmentation: Option<Augmentation>,
}

impl CspInstance {
    pub fn new(n: usize, p: FieldPrime, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            c.check_indices(n)?;
            if let Some(&a) = c.coeffs.iter().find(|&&a| a >= p.get()) {
                return Err(CspError::Structure(format!("coefficient {a} not reduced mod {p}")));
            }
        }
        Ok(CspInstance {
            n,
            p,
            constraints,
            augmentation: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn field(&self) -> FieldPrime {
        self.p
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn weights(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.constraints.iter().map(|c| c.weight).sum()
    }

    pub fn augmentation(&self) -> Option<&Augmentation> {
        self.augmentation.as_ref()
    }

    pub fn is_augmented(&self) -> bool {
        self.augmentation.is_some()
    }

    /// Every constraint is unsatisfied by the all-zeros and all-ones inputs.
    pub fn vanishes_on_constants(&self) -> bool {
        self.constraints.iter().all(|c| c.vanishes_on_constants(self.p))
    }

    pub fn eval_constraint(&self, index: usize, x: &BooleanAssignment) -> Result<bool> {
        self.constraint(index)?.eval(self.p, x)
    }

    fn constraint(&self, index: usize) -> Result<&Constraint> {
        self.constraints.get(index).ok_or(CspError::IndexOutOfRange {
            index,
            n: self.constraints.len(),
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(CspError::Dimension {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Total weight of satisfied constraints.
    pub fn csp_value(&self, x: &BooleanAssignment) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self
            .constraints
            .iter()
            .filter(|c| c.holds(self.p, |v| x.bits[v]))
            .map(|c| c.weight)
            .sum())
    }

    pub fn sat_prob(&self, index: usize, x: &FractionalAssignment) -> Result<f64> {
        self.constraint(index)?.sat_prob(self.p, x)
    }

    /// `Σ_c w_c · sat_prob(c, x)²`.
    pub fn energy(&self, x: &FractionalAssignment) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.energy_unchecked(&x.values))
    }

    pub(crate) fn energy_unchecked(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let q = c.sat_measure(self.p, |v| x[v]);
                c.weight * q * q
            })
            .sum()
    }

    /// Appends the dummy variables needed so that every constraint vanishes
    /// on the all-zeros and all-ones assignments. Idempotent.
    pub fn augment(&self) -> CspInstance {
        if self.is_augmented() {
            return self.clone();
        }
        let layout = Augmentation::for_instance(self);
        self.augment_with(layout)
            .expect("layout derived from the instance covers every constraint")
    }

    /// Augments with an externally fixed layout, so that a reweighted subset
    /// of an instance lands in the same variable space as the original.
    pub fn augment_with(&self, layout: Augmentation) -> Result<CspInstance> {
        if layout.original_n != self.n {
            return Err(CspError::Dimension {
                expected: layout.original_n,
                got: self.n,
            });
        }
        let p = self.p;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let mut vars = c.vars.clone();
            let mut coeffs = c.coeffs.clone();
            let off = p.neg(c.offset);
            if off != 0 {
                let v = layout.offset_var().ok_or_else(|| {
                    CspError::ContractViolation("layout lacks the offset dummy".into())
                })?;
                vars.push(v);
                coeffs.push(off);
            }
            let par = p.neg(p.sub(c.coeff_sum(p), c.offset));
            if par != 0 {
                let v = layout.parity_var().ok_or_else(|| {
                    CspError::ContractViolation("layout lacks the parity dummy".into())
                })?;
                vars.push(v);
                coeffs.push(par);
            }
            constraints.push(Constraint {
                vars,
                coeffs,
                offset: 0,
                weight: c.weight,
            });
        }
        Ok(CspInstance {
            n: layout.total_vars(),
            p,
            constraints,
            augmentation: Some(layout),
        })
    }

    /// Keeps only the listed constraints, with new weights.
    pub fn reweighted(&self, kept: &[(usize, f64)]) -> Result<CspInstance> {
        let constraints = kept
            .iter()
            .map(|&(i, w)| Ok(self.constraint(i)?.with_weight(w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(CspInstance {
            constraints,
            ..self.clone()
        })
    }

    pub fn with_constraints(&self, constraints: Vec<Constraint>) -> Result<CspInstance> {
        CspInstance::new(self.n, self.p, constraints)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanAssignment {
    bits: Vec<bool>,
}

impl BooleanAssignment {
    pub fn new(bits: &[u8]) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(CspError::InvalidAssignment(format!("bit value {b}")));
        }
        Ok(BooleanAssignment {
            bits: bits.iter().map(|&b| b == 1).collect(),
        })
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        BooleanAssignment { bits }
    }

    /// Bit `i` is bit `i` of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        BooleanAssignment {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_fractional(&self) -> FractionalAssignment {
        FractionalAssignment {
            values: self.bits.iter().map(|&b| b as u8 as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalAssignment {
    values: Vec<f64>,
}

impl FractionalAssignment {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(CspError::InvalidAssignment(format!("coordinate {v} outside [0,1]")));
        }
        Ok(FractionalAssignment { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Threshold rounding: bit `i` is `1[x_i ≥ θ]`.
    pub fn round(&self, theta: f64) -> Result<BooleanAssignment> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(CspError::Precondition(format!("threshold {theta} outside [0,1]")));
        }
        Ok(BooleanAssignment {
            bits: self.values.iter().map(|&x| x >= theta).collect(),
        })
    }
}
