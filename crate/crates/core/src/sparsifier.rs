//! Spectral sparsification through family-restricted code sparsification.
//!
//! Preserving every `d_{C,π}(i,j)` to `(1±ε)` makes both
//! `(B^cross)ᵀ(W_Ĉ − (1−ε)W_C)B^cross` and `(B^cross)ᵀ((1+ε)W_C − W_Ĉ)B^cross`
//! entrywise nonnegative, hence copositive, which sandwiches the energy of
//! every π-consistent assignment. Those degrees are exactly the weights of
//! the lifted codewords `Φ(G)·x_{π,i,j}`, so it is enough to sparsify the
//! lifted code on that structured family of messages.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{generating_matrix, lift, LiftedMatrix, WeightedCode};
use crate::csp::{Augmentation, BooleanAssignment, CspInstance, TOL};
use crate::error::{CspError, Result};
use crate::field::FieldPrime;
use crate::ordering::{crossing_gram, crossing_matrix, Permutation};
use crate::report::Check;

/// Largest variable count (after augmentation) for which all `n!`
/// permutations are enumerated.
pub const MAX_EXHAUSTIVE_VARS: usize = 7;
/// Largest variable count for the `2^n` Boolean value check.
pub const MAX_BOOLEAN_VARS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    Exhaustive,
    Sampled { permutations: usize },
}

impl FamilyMode {
    pub fn is_heuristic(&self) -> bool {
        matches!(self, FamilyMode::Sampled { .. })
    }
}

/// Where a family message came from: `x_{π,i,j}` with `π = perms[perm]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageTag {
    pub perm: usize,
    pub i: usize,
    pub j: usize,
}

/// The lifted messages `x_{π,i,j}` over which codeword weights must be
/// preserved. Messages are materialized on demand from their tags.
#[derive(Debug, Clone)]
pub struct CodewordFamily {
    n: usize,
    mode: FamilyMode,
    perms: Vec<Permutation>,
    tags: Vec<MessageTag>,
}

impl CodewordFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn tags(&self) -> &[MessageTag] {
        &self.tags
    }

    pub fn message(&self, k: usize) -> Vec<u32> {
        let t = self.tags[k];
        crate::codes::lifted_message(&self.perms[t.perm], t.i, t.j)
            .expect("tags are in range by construction")
    }

    fn prefix_mask(&self, perm: usize, i: usize) -> u64 {
        self.perms[perm].order()[..=i]
            .iter()
            .fold(0u64, |m, &v| m | 1 << v)
    }

    /// Distinct messages, keyed by the pair of prefix sets, with the first
    /// tag that produced each.
    fn distinct(&self) -> Vec<(u64, u64, usize)> {
        let mut seen: HashMap<(u64, u64), ()> = HashMap::new();
        let mut out = Vec::new();
        for (k, t) in self.tags.iter().enumerate() {
            let key = (self.prefix_mask(t.perm, t.i), self.prefix_mask(t.perm, t.j));
            if seen.insert(key, ()).is_none() {
                out.push((key.0, key.1, k));
            }
        }
        out
    }

    fn describe(&self, k: usize) -> String {
        let t = self.tags[k];
        format!("pi={:?} i={} j={}", self.perms[t.perm].order(), t.i, t.j)
    }
}

/// Builds the message family for an augmented instance.
pub fn build_family(instance: &CspInstance, mode: FamilyMode, seed: u64) -> Result<CodewordFamily> {
    if !instance.vanishes_on_constants() {
        return Err(CspError::ContractViolation(
            "family construction needs an augmented instance".into(),
        ));
    }
    let n = instance.n();
    if n > 63 {
        return Err(CspError::Guard(format!("{n} variables exceed the 63-variable message limit")));
    }
    let perms: Vec<Permutation> = match mode {
        FamilyMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_VARS {
                return Err(CspError::Guard(format!(
                    "exhaustive family needs n ≤ {MAX_EXHAUSTIVE_VARS}, got {n}; use sampled mode"
                )));
            }
            Permutation::all(n).collect()
        }
        FamilyMode::Sampled { permutations } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..permutations).map(|_| Permutation::random(n, &mut rng)).collect()
        }
    };
    let gaps = n.saturating_sub(1);
    let mut tags = Vec::with_capacity(perms.len() * gaps * gaps);
    for perm in 0..perms.len() {
        for i in 0..gaps {
            for j in 0..gaps {
                tags.push(MessageTag { perm, i, j });
            }
        }
    }
    Ok(CodewordFamily {
        n,
        mode,
        perms,
        tags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Oversampling constant in `α = κ·ln(|family|+1)/ε²`.
    pub kappa: f64,
    pub retry_cap: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kappa: 12.0,
            retry_cap: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifierResult {
    /// `(row index, new weight)`, sorted by index.
    pub kept: Vec<(usize, f64)>,
    pub epsilon: f64,
    pub attempts: usize,
    pub family_size: usize,
    pub heuristic: bool,
}

impl SparsifierResult {
    /// The reweighted sub-instance of `original`.
    pub fn apply(&self, original: &CspInstance) -> Result<CspInstance> {
        original.reweighted(&self.kept)
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CspError::Precondition(format!("epsilon {eps} not in (0,1)")));
    }
    Ok(())
}

/// Rows equal up to a nonzero scalar have identical zero patterns on every
/// message; they are merged into their first occurrence.
struct RowGroup {
    representative: usize,
    row: Vec<u32>,
    weight: f64,
}

fn group_rows(code: &LiftedMatrix) -> Vec<RowGroup> {
    let p: FieldPrime = code.field();
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut groups: Vec<RowGroup> = Vec::new();
    for (r, (row, &w)) in code.rows().iter().zip(code.coord_weights()).enumerate() {
        if w <= 0.0 {
            continue;
        }
        let Some(&lead) = row.iter().find(|&&v| v != 0) else {
            continue;
        };
        let scale = p.inv(lead);
        let key: Vec<u32> = row.iter().map(|&v| p.mul(v, scale)).collect();
        match index.get(&key) {
            Some(&g) => groups[g].weight += w,
            None => {
                index.insert(key.clone(), groups.len());
                groups.push(RowGroup {
                    representative: r,
                    row: key,
                    weight: w,
                });
            }
        }
    }
    groups
}

fn support(n: usize, zi: u64, zj: u64) -> Vec<usize> {
    let mut out = Vec::new();
    for a in 0..n {
        if zi >> a & 1 == 0 {
            continue;
        }
        for b in 0..n {
            if zj >> b & 1 == 1 {
                out.push(a * n + b);
            }
        }
    }
    out.extend((0..n).filter(|&a| zi >> a & 1 == 1).map(|a| n * n + a));
    out.extend((0..n).filter(|&b| zj >> b & 1 == 1).map(|b| n * n + n + b));
    out.push(n * n + 2 * n);
    out
}

/// Reweights a subset of rows of `code` so that every family codeword keeps
/// its weighted Hamming weight within `(1±ε)`.
///
/// Rows are coalesced up to scalar multiples, then kept independently with
/// probability `min(1, α·max_v w_c/wt(Mv))` and reweighted by `1/p_c`. The
/// sample is checked against the whole family and redrawn on violation.
pub fn code_sparsify(
    code: &LiftedMatrix,
    family: &CodewordFamily,
    eps: f64,
    seed: u64,
    config: &SamplerConfig,
) -> Result<SparsifierResult> {
    check_epsilon(eps)?;
    if family.is_empty() {
        return Err(CspError::Precondition("empty codeword family".into()));
    }
    if code.n() != family.n() {
        return Err(CspError::Dimension {
            expected: code.n(),
            got: family.n(),
        });
    }
    let p = code.field();
    let n = code.n();
    let groups = group_rows(code);
    let messages = family.distinct();

    // hit lists and original weights per distinct message
    let hits: Vec<Vec<usize>> = messages
        .par_iter()
        .map(|&(zi, zj, _)| {
            let supp = support(n, zi, zj);
            groups
                .iter()
                .enumerate()
                .filter(|(_, g)| supp.iter().fold(0u32, |acc, &k| p.add(acc, g.row[k])) != 0)
                .map(|(gi, _)| gi)
                .collect()
        })
        .collect();
    let base: Vec<f64> = hits
        .iter()
        .map(|h| h.iter().map(|&g| groups[g].weight).sum())
        .collect();

    let mut sensitivity = vec![0.0f64; groups.len()];
    for (h, &wt) in hits.iter().zip(&base) {
        for &g in h {
            sensitivity[g] = sensitivity[g].max(groups[g].weight / wt);
        }
    }
    let alpha = config.kappa * ((family.len() + 1) as f64).ln() / (eps * eps);
    let heuristic = family.mode().is_heuristic();
    let probs: Vec<f64> = sensitivity
        .iter()
        .map(|&s| {
            if s == 0.0 {
                // never observed by the family: provably energy-free only
                // when every permutation was enumerated
                if heuristic { 1.0 } else { 0.0 }
            } else {
                (alpha * s).min(1.0)
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, usize)> = None;
    for attempt in 1..=config.retry_cap.max(1) {
        let new_weight: Vec<f64> = groups
            .iter()
            .zip(&probs)
            .map(|(g, &pr)| {
                if pr >= 1.0 {
                    g.weight
                } else if pr > 0.0 && rng.gen::<f64>() < pr {
                    g.weight / pr
                } else {
                    0.0
                }
            })
            .collect();

        let mut attempt_worst: Option<(f64, usize)> = None;
        for (k, (h, &wt)) in hits.iter().zip(&base).enumerate() {
            let got: f64 = h.iter().map(|&g| new_weight[g]).sum();
            let ok = got >= (1.0 - eps) * wt - TOL && got <= (1.0 + eps) * wt + TOL;
            if !ok {
                let dev = (got - wt).abs() / wt.max(TOL);
                if attempt_worst.is_none_or(|(d, _)| dev > d) {
                    attempt_worst = Some((dev, k));
                }
            }
        }
        match attempt_worst {
            None => {
                let mut kept: Vec<(usize, f64)> = groups
                    .iter()
                    .zip(&new_weight)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(g, &w)| (g.representative, w))
                    .collect();
                kept.sort_by_key(|&(i, _)| i);
                return Ok(SparsifierResult {
                    kept,
                    epsilon: eps,
                    attempts: attempt,
                    family_size: family.len(),
                    heuristic,
                });
            }
            Some(w) => {
                if worst.is_none_or(|(d, _)| w.0 > d) {
                    worst = Some(w);
                }
            }
        }
    }
    let (dev, k) = worst.expect("a failed attempt records a violation");
    Err(CspError::SparsifyFailed {
        attempts: config.retry_cap.max(1),
        worst: format!("{} relative deviation {dev}", family.describe(messages[k].2)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifyConfig {
    pub mode: FamilyMode,
    pub sampler: SamplerConfig,
}

impl Default for SparsifyConfig {
    fn default() -> Self {
        SparsifyConfig {
            mode: FamilyMode::Exhaustive,
            sampler: SamplerConfig::default(),
        }
    }
}

/// Augment, lift, sparsify the lifted code on the message family, and map
/// the kept rows back to constraints of `instance`.
pub fn spectral_sparsify(
    instance: &CspInstance,
    eps: f64,
    seed: u64,
    config: &SparsifyConfig,
) -> Result<SparsifierResult> {
    check_epsilon(eps)?;
    let augmented = instance.augment();
    let lifted = lift(&generating_matrix(&augmented));
    let family = build_family(&augmented, config.mode, seed)?;
    if family.is_empty() {
        // fewer than two variables: no gaps, every energy is zero
        return Ok(SparsifierResult {
            kept: instance
                .constraints()
                .iter()
                .enumerate()
                .filter(|(_, c)| c.weight() > 0.0)
                .map(|(i, c)| (i, c.weight()))
                .collect(),
            epsilon: eps,
            attempts: 0,
            family_size: 0,
            heuristic: config.mode.is_heuristic(),
        });
    }
    code_sparsify(&lifted, &family, eps, seed, &config.sampler)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyCheck {
    Exhaustive,
    Sampled { permutations: usize },
    Skip,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparsifierReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl SparsifierReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Accumulates `(original, sparsified)` pairs against a `(1±ε)` band with
/// absolute slack [`TOL`]. The margin is `ε` minus the worst relative deviation.
#[derive(Debug, Clone, Copy)]
struct Band {
    eps: f64,
    worst: f64,
    violations: usize,
    tested: usize,
}

impl Band {
    fn new(eps: f64) -> Self {
        Band {
            eps,
            worst: 0.0,
            violations: 0,
            tested: 0,
        }
    }

    fn push(&mut self, orig: f64, sparse: f64) {
        self.tested += 1;
        if sparse < (1.0 - self.eps) * orig - TOL || sparse > (1.0 + self.eps) * orig + TOL {
            self.violations += 1;
        }
        let dev = if orig.abs() <= TOL && (sparse - orig).abs() <= TOL {
            0.0
        } else {
            (sparse - orig).abs() / orig.abs().max(TOL)
        };
        self.worst = self.worst.max(dev);
    }

    fn merge(mut self, other: Band) -> Band {
        self.worst = self.worst.max(other.worst);
        self.violations += other.violations;
        self.tested += other.tested;
        self
    }

    fn into_check(self, name: &str) -> Check {
        Check::new(name, self.violations == 0, self.eps - self.worst, TOL).with_detail(format!(
            "tested={} violations={}",
            self.tested, self.violations
        ))
    }
}

/// Checks `sparse` against `original`: (a) every Boolean assignment's value,
/// (b) `n_random` uniform fractional energies, and (c) the crossing-degree
/// family `d_{Ĉ,π}(i,j) ∈ (1±ε)·d_{C,π}(i,j)`. Violations are report entries.
pub fn verify_sparsifier(
    original: &CspInstance,
    sparse: &CspInstance,
    eps: f64,
    n_random: usize,
    seed: u64,
    family: FamilyCheck,
) -> Result<SparsifierReport> {
    check_epsilon(eps)?;
    if original.n() != sparse.n() || original.field() != sparse.field() {
        return Err(CspError::Dimension {
            expected: original.n(),
            got: sparse.n(),
        });
    }
    let n = original.n();
    let mut report = SparsifierReport::default();

    if n <= MAX_BOOLEAN_VARS {
        let band = (0..1u64 << n)
            .into_par_iter()
            .fold(
                || Band::new(eps),
                |mut band, mask| {
                    let x = BooleanAssignment::from_mask(n, mask);
                    let a = original.csp_value(&x).expect("length matches");
                    let b = sparse.csp_value(&x).expect("length matches");
                    band.push(a, b);
                    band
                },
            )
            .reduce(|| Band::new(eps), Band::merge);
        report.checks.push(band.into_check("boolean_values"));
    } else {
        report
            .notes
            .push(format!("boolean_values skipped: n={n} exceeds {MAX_BOOLEAN_VARS}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut band = Band::new(eps);
    for _ in 0..n_random {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        band.push(original.energy_unchecked(&x), sparse.energy_unchecked(&x));
    }
    report.checks.push(band.into_check("random_energies"));

    let layout = Augmentation::for_instance(original);
    let aug_orig = original.augment_with(layout)?;
    let aug_sparse = sparse.augment_with(layout)?;
    let n_aug = aug_orig.n();
    let perms: Option<(Vec<Permutation>, bool)> = match family {
        FamilyCheck::Skip => None,
        FamilyCheck::Exhaustive if n_aug > MAX_EXHAUSTIVE_VARS => {
            report.notes.push(format!(
                "family check skipped: {n_aug} augmented variables exceed {MAX_EXHAUSTIVE_VARS}"
            ));
            None
        }
        FamilyCheck::Exhaustive => Some((Permutation::all(n_aug).collect(), false)),
        FamilyCheck::Sampled { permutations } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            Some((
                (0..permutations)
                    .map(|_| Permutation::random(n_aug, &mut rng))
                    .collect(),
                true,
            ))
        }
    };
    if let Some((perms, heuristic)) = perms {
        let w_orig = aug_orig.weights();
        let w_sparse = aug_sparse.weights();
        let bands: Vec<Band> = perms
            .par_iter()
            .map(|perm| {
                let g_orig = crossing_gram(&crossing_matrix(&aug_orig, perm)?, &w_orig);
                let g_sparse = crossing_gram(&crossing_matrix(&aug_sparse, perm)?, &w_sparse);
                let mut band = Band::new(eps);
                for i in 0..g_orig.rows() {
                    for j in 0..g_orig.cols() {
                        band.push(g_orig.get(i, j), g_sparse.get(i, j));
                    }
                }
                Ok(band)
            })
            .collect::<Result<_>>()?;
        let band = bands.into_iter().fold(Band::new(eps), Band::merge);
        let mut check = band.into_check("family_crossing_degrees");
        if heuristic {
            let detail = check.detail.take().unwrap_or_default();
            check.detail = Some(format!("{detail} heuristic (sampled permutations)"));
        }
        report.checks.push(check);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::codeword_weight;
    use crate::csp::Constraint;

    fn f2() -> FieldPrime {
        FieldPrime::new(2).unwrap()
    }

    #[test]
    fn family_counts() {
        let inst = CspInstance::new(4, f2(), vec![Constraint::xor(vec![0, 1], 0, 1.0).unwrap()]).unwrap();
        assert_eq!(build_family(&inst, FamilyMode::Exhaustive, 0).unwrap().len(), 216);
        let inst = CspInstance::new(3, f2(), vec![Constraint::xor(vec![0, 1], 0, 1.0).unwrap()]).unwrap();
        let fam = build_family(&inst, FamilyMode::Exhaustive, 0).unwrap();
        assert_eq!(fam.len(), 24);
        // diagonal pairs are present
        assert!(fam.tags().iter().any(|t| t.i == t.j));
    }

    #[test]
    fn family_guards() {
        let inst = CspInstance::new(8, f2(), vec![Constraint::xor(vec![0, 1], 0, 1.0).unwrap()]).unwrap();
        assert!(matches!(build_family(&inst, FamilyMode::Exhaustive, 0), Err(CspError::Guard(_))));
        let odd = CspInstance::new(3, f2(), vec![Constraint::xor(vec![0, 1, 2], 0, 1.0).unwrap()]).unwrap();
        assert!(matches!(
            build_family(&odd, FamilyMode::Exhaustive, 0),
            Err(CspError::ContractViolation(_))
        ));
    }

    #[test]
    fn sampled_family_is_deterministic() {
        let inst = CspInstance::new(6, f2(), vec![Constraint::xor(vec![0, 1], 0, 1.0).unwrap()]).unwrap();
        let mode = FamilyMode::Sampled { permutations: 10 };
        let a = build_family(&inst, mode, 42).unwrap();
        let b = build_family(&inst, mode, 42).unwrap();
        assert_eq!(a.permutations(), b.permutations());
        assert_eq!(a.len(), 10 * 25);
        let c = build_family(&inst, mode, 43).unwrap();
        assert_ne!(a.permutations(), c.permutations());
    }

    #[test]
    fn identical_rows_collapse() {
        let m = 40;
        let inst = CspInstance::new(4, f2(), vec![Constraint::xor(vec![0, 2], 0, 1.0).unwrap(); m]).unwrap();
        let lifted = lift(&generating_matrix(&inst));
        let fam = build_family(&inst, FamilyMode::Exhaustive, 0).unwrap();
        let res = code_sparsify(&lifted, &fam, 0.1, 3, &SamplerConfig::default()).unwrap();
        assert_eq!(res.kept, vec![(0, m as f64)]);
        let sparse = lifted.select_rows(&[0]);
        let sparse = LiftedMatrixReweighted::new(&sparse, &[m as f64]);
        for k in 0..fam.len() {
            let msg = fam.message(k);
            let a = codeword_weight(&lifted, &msg).unwrap();
            let b = sparse.weight(&msg);
            assert!((a - b).abs() < TOL);
            assert!(a == 0.0 || a == m as f64);
        }
    }

    /// Test-side reweighting of a lifted matrix without touching its rows.
    struct LiftedMatrixReweighted<'a> {
        code: &'a LiftedMatrix,
        weights: Vec<f64>,
    }

    impl<'a> LiftedMatrixReweighted<'a> {
        fn new(code: &'a LiftedMatrix, weights: &[f64]) -> Self {
            LiftedMatrixReweighted {
                code,
                weights: weights.to_vec(),
            }
        }

        fn weight(&self, msg: &[u32]) -> f64 {
            let p = self.code.field();
            self.code
                .rows()
                .iter()
                .zip(&self.weights)
                .filter(|(row, _)| row.iter().zip(msg).fold(0, |a, (&r, &x)| p.add(a, p.mul(r, x))) != 0)
                .map(|(_, &w)| w)
                .sum()
        }
    }

    #[test]
    fn single_row_is_kept_unchanged() {
        let inst = CspInstance::new(3, f2(), vec![Constraint::xor(vec![0, 2], 0, 2.5).unwrap()]).unwrap();
        let lifted = lift(&generating_matrix(&inst));
        let fam = build_family(&inst, FamilyMode::Exhaustive, 0).unwrap();
        let res = code_sparsify(&lifted, &fam, 0.5, 0, &SamplerConfig::default()).unwrap();
        assert_eq!(res.kept, vec![(0, 2.5)]);
        assert_eq!(res.attempts, 1);
    }

    #[test]
    fn proportional_rows_mod_3_merge() {
        let p = FieldPrime::new(3).unwrap();
        // 2·(x1 + x2 + x3) ≠ 0 is the same predicate as x1 + x2 + x3 ≠ 0
        let a = Constraint::new(p, vec![0, 1, 2], vec![1, 1, 1], 0, 1.0).unwrap();
        let b = Constraint::new(p, vec![0, 1, 2], vec![2, 2, 2], 0, 2.0).unwrap();
        let inst = CspInstance::new(3, p, vec![a, b]).unwrap();
        let lifted = lift(&generating_matrix(&inst));
        let fam = build_family(&inst, FamilyMode::Exhaustive, 0).unwrap();
        let res = code_sparsify(&lifted, &fam, 0.2, 0, &SamplerConfig::default()).unwrap();
        assert_eq!(res.kept, vec![(0, 3.0)]);
    }

    #[test]
    fn bad_epsilon_and_empty_family() {
        let inst = CspInstance::new(3, f2(), vec![Constraint::xor(vec![0, 2], 0, 1.0).unwrap()]).unwrap();
        assert!(spectral_sparsify(&inst, 0.0, 0, &SparsifyConfig::default()).is_err());
        assert!(spectral_sparsify(&inst, 1.0, 0, &SparsifyConfig::default()).is_err());
        let lifted = lift(&generating_matrix(&inst));
        let fam = build_family(&inst, FamilyMode::Sampled { permutations: 0 }, 0).unwrap();
        assert!(code_sparsify(&lifted, &fam, 0.1, 0, &SamplerConfig::default()).is_err());
    }

    #[test]
    fn retry_cap_exhaustion_reports_worst_message() {
        // distinct rows, tiny κ: sampling drops rows that some message needs
        let p = FieldPrime::new(2).unwrap();
        let mut cs = Vec::new();
        for u in 0..5 {
            for v in u + 1..5 {
                cs.push(Constraint::xor(vec![u, v], 0, 1.0).unwrap());
            }
        }
        let inst = CspInstance::new(5, p, cs).unwrap();
        let lifted = lift(&generating_matrix(&inst));
        let fam = build_family(&inst, FamilyMode::Exhaustive, 0).unwrap();
        let cfg = SamplerConfig {
            kappa: 1e-6,
            retry_cap: 3,
        };
        match code_sparsify(&lifted, &fam, 0.01, 1, &cfg) {
            Err(CspError::SparsifyFailed { attempts, worst }) => {
                assert_eq!(attempts, 3);
                assert!(worst.contains("pi="));
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn identity_sparsifier_has_margin_epsilon() {
        let p = FieldPrime::new(3).unwrap();
        let c1 = Constraint::new(p, vec![0, 1], vec![1, 2], 1, 1.0).unwrap();
        let c2 = Constraint::new(p, vec![1, 2, 3], vec![1, 1, 2], 0, 0.5).unwrap();
        let inst = CspInstance::new(4, p, vec![c1, c2]).unwrap();
        let rep = verify_sparsifier(&inst, &inst, 0.2, 50, 1, FamilyCheck::Skip).unwrap();
        assert!(rep.all_passed());
        for c in &rep.checks {
            assert!((c.margin - 0.2).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn scaled_isolated_constraint_fails_boolean_check() {
        let eps = 0.1;
        let inst = CspInstance::new(
            4,
            f2(),
            vec![
                Constraint::xor(vec![0, 1], 0, 1.0).unwrap(),
                Constraint::xor(vec![2, 3], 0, 1.0).unwrap(),
            ],
        )
        .unwrap();
        let bumped = inst.reweighted(&[(0, 1.0 + 2.0 * eps), (1, 1.0)]).unwrap();
        let rep = verify_sparsifier(&inst, &bumped, eps, 10, 0, FamilyCheck::Exhaustive).unwrap();
        assert!(!rep.check("boolean_values").unwrap().passed);
        assert!(!rep.check("family_crossing_degrees").unwrap().passed);
        assert!(!rep.all_passed());
    }
}
