//! Expansion, discrepancy ratios and the Cheeger inequality for even-arity
//! XOR instances (`p = 2`, every constraint `Σ x_i ≠ 0` over an even set).
//!
//! A constraint is cut by `S` when it evaluates to 1 on `1_S`. Discrepancy
//! uses the squared denominator `⟨f,f⟩_w = Σ w_u f_u²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::csp::{Constraint, CspInstance, TOL};
use crate::error::{CspError, Result};
use crate::field::FieldPrime;
use crate::report::Check;

/// Largest `n` for exhaustive subset enumeration.
pub const MAX_EXPANSION_VARS: usize = 20;
/// Largest `n` for which every indicator seed of the γ₂ search is built.
pub const MAX_SEEDED_VARS: usize = 12;
/// Seeds with the smallest discrepancy that are also locally descended.
const DESCENDED_SEEDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CutSet {
    members: Vec<usize>,
}

impl CutSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        CutSet { members }
    }

    pub fn from_mask(mask: u64) -> Self {
        CutSet {
            members: (0..64).filter(|&v| mask >> v & 1 == 1).collect(),
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &v in &self.members {
            out[v] = 1.0;
        }
        out
    }
}

/// `w(S) ≤ w(V)/2`, with the shared slack [`TOL`].
pub fn is_balanced(weight: f64, total: f64) -> bool {
    weight <= total / 2.0 + TOL
}

fn f2() -> FieldPrime {
    FieldPrime::new(2).expect("2 is prime")
}

/// Checks the even-arity XOR shape and returns the largest arity `ℓ`.
pub fn even_xor_arity(instance: &CspInstance) -> Result<usize> {
    if instance.field().get() != 2 {
        return Err(CspError::Domain(format!(
            "Cheeger analysis needs an XOR instance over F_2, got p = {}",
            instance.field()
        )));
    }
    let mut ell = 0;
    for (k, c) in instance.constraints().iter().enumerate() {
        if c.offset() != 0 || c.arity() == 0 || c.arity() % 2 == 1 {
            return Err(CspError::Domain(format!(
                "constraint {k} is not an even-arity XOR with right-hand side 0"
            )));
        }
        ell = ell.max(c.arity());
    }
    Ok(ell)
}

pub fn vertex_weights(instance: &CspInstance) -> Vec<f64> {
    let mut w = vec![0.0; instance.n()];
    for c in instance.constraints() {
        for &v in c.vars() {
            w[v] += c.weight();
        }
    }
    w
}

fn set_weight(w: &[f64], s: &CutSet) -> f64 {
    s.members().iter().map(|&v| w[v]).sum()
}

fn check_set(instance: &CspInstance, s: &CutSet) -> Result<()> {
    if let Some(&v) = s.members().iter().find(|&&v| v >= instance.n()) {
        return Err(CspError::IndexOutOfRange {
            index: v,
            n: instance.n(),
        });
    }
    Ok(())
}

fn is_cut(c: &Constraint, s: &CutSet) -> bool {
    c.vars().iter().filter(|&&v| s.contains(v)).count() % 2 == 1
}

/// Indices of the constraints cut by `S`.
pub fn boundary(instance: &CspInstance, s: &CutSet) -> Result<Vec<usize>> {
    even_xor_arity(instance)?;
    check_set(instance, s)?;
    Ok(instance
        .constraints()
        .iter()
        .enumerate()
        .filter(|(_, c)| is_cut(c, s))
        .map(|(k, _)| k)
        .collect())
}

/// `Φ(S) = w(δS)/w(S)`.
pub fn expansion(instance: &CspInstance, s: &CutSet) -> Result<f64> {
    let cut = boundary(instance, s)?;
    let ws = set_weight(&vertex_weights(instance), s);
    if ws <= 0.0 {
        return Err(CspError::Domain("expansion of a set with zero weight".into()));
    }
    let dw: f64 = cut.iter().map(|&k| instance.constraints()[k].weight()).sum();
    Ok(dw / ws)
}

/// `Φ_C` by enumerating every `S` with `0 < w(S) ≤ w(V)/2`; ties go to the
/// smallest bitmask.
pub fn csp_expansion(instance: &CspInstance) -> Result<(f64, CutSet)> {
    even_xor_arity(instance)?;
    let n = instance.n();
    if n > MAX_EXPANSION_VARS {
        return Err(CspError::Guard(format!(
            "expansion enumerates 2^n sets; n = {n} exceeds {MAX_EXPANSION_VARS}"
        )));
    }
    let w = vertex_weights(instance);
    let total: f64 = w.iter().sum();
    let masks: Vec<(u64, f64)> = instance
        .constraints()
        .iter()
        .map(|c| (c.vars().iter().fold(0u64, |m, &v| m | 1 << v), c.weight()))
        .collect();
    let best = (1u64..1 << n)
        .into_par_iter()
        .filter_map(|s| {
            let ws: f64 = (0..n).filter(|&v| s >> v & 1 == 1).map(|v| w[v]).sum();
            if ws <= 0.0 || !is_balanced(ws, total) {
                return None;
            }
            let cut: f64 = masks
                .iter()
                .filter(|(m, _)| (m & s).count_ones() % 2 == 1)
                .map(|&(_, wc)| wc)
                .sum();
            Some((cut / ws, s))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match best {
        Some((phi, s)) => Ok((phi, CutSet::from_mask(s))),
        None => Err(CspError::Domain("no set with 0 < w(S) ≤ w(V)/2".into())),
    }
}

/// `Q_c(f) = (max f − min f)·sat_prob(c, (f − min f)/(max f − min f))`.
pub fn general_energy(c: &Constraint, p: FieldPrime, f: &[f64]) -> f64 {
    let (lo, hi) = f
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range.is_nan() || range <= 0.0 {
        return 0.0;
    }
    range * c.sat_measure(p, |v| (f[v] - lo) / range)
}

fn check_vector(instance: &CspInstance, f: &[f64]) -> Result<()> {
    if f.len() != instance.n() {
        return Err(CspError::Dimension {
            expected: instance.n(),
            got: f.len(),
        });
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(CspError::Precondition("vector has non-finite entries".into()));
    }
    Ok(())
}

fn energy_numerator(instance: &CspInstance, f: &[f64]) -> f64 {
    let p = instance.field();
    instance
        .constraints()
        .iter()
        .map(|c| {
            let q = general_energy(c, p, f);
            c.weight() * q * q
        })
        .sum()
}

fn mass(w: &[f64], f: &[f64]) -> f64 {
    w.iter().zip(f).map(|(w, f)| w * f * f).sum()
}

/// `D_w(f) = Σ w_c Q_c(f)² / Σ w_u f_u²`.
pub fn discrepancy(instance: &CspInstance, f: &[f64]) -> Result<f64> {
    check_vector(instance, f)?;
    let den = mass(&vertex_weights(instance), f);
    if den <= 0.0 {
        return Err(CspError::Domain("discrepancy of a vector with zero mass".into()));
    }
    Ok(energy_numerator(instance, f) / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gamma2Estimate {
    /// An upper bound on γ₂.
    pub value: f64,
    /// w-orthogonal to `1`, unit w-norm.
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gamma2Config {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for Gamma2Config {
    fn default() -> Self {
        Gamma2Config {
            restarts: 64,
            iterations: 200,
            seed: 0,
        }
    }
}

struct Surface<'a> {
    instance: &'a CspInstance,
    w: Vec<f64>,
    total: f64,
}

impl Surface<'_> {
    /// Projects onto `{f : Σ w_u f_u = 0}` and rescales to unit w-norm.
    fn project(&self, f: &mut [f64]) -> bool {
        let mean = self.w.iter().zip(f.iter()).map(|(w, f)| w * f).sum::<f64>() / self.total;
        for v in f.iter_mut() {
            *v -= mean;
        }
        let norm = mass(&self.w, f).sqrt();
        if norm.is_nan() || norm <= 1e-12 {
            return false;
        }
        for v in f.iter_mut() {
            *v /= norm;
        }
        true
    }

    fn ratio(&self, f: &[f64]) -> f64 {
        energy_numerator(self.instance, f) / mass(&self.w, f)
    }

    fn descend(&self, mut f: Vec<f64>, iterations: usize) -> (f64, Vec<f64>) {
        if !self.project(&mut f) {
            return (f64::INFINITY, f);
        }
        let mut d = self.ratio(&f);
        let mut step = 0.25 * f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..iterations {
            let mut improved = false;
            'coords: for u in 0..f.len() {
                for sign in [1.0, -1.0] {
                    let mut g = f.clone();
                    g[u] += sign * step;
                    if !self.project(&mut g) {
                        continue;
                    }
                    let dg = self.ratio(&g);
                    if dg < d {
                        f = g;
                        d = dg;
                        improved = true;
                        break 'coords;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-9 {
                    break;
                }
            }
        }
        (d, f)
    }
}

/// Upper bound on `γ₂ = min_{f ⊥_w 1, f ≠ 0} D_w(f)` by coordinate descent on
/// the w-orthogonal unit sphere, seeded with `1_S − (w(S)/w(V))·1` for every
/// balanced `S` plus `restarts` random starts.
pub fn gamma2_estimate(instance: &CspInstance, config: &Gamma2Config) -> Result<Gamma2Estimate> {
    even_xor_arity(instance)?;
    let n = instance.n();
    let w = vertex_weights(instance);
    if let Some(v) = w.iter().position(|&x| x <= 0.0) {
        return Err(CspError::Domain(format!(
            "variable {} lies in no positive-weight constraint; restrict to covered variables first",
            v + 1
        )));
    }
    if n < 2 {
        return Err(CspError::Domain("γ₂ needs at least two variables".into()));
    }
    if n > MAX_SEEDED_VARS {
        return Err(CspError::Guard(format!(
            "γ₂ seeding enumerates 2^n sets; n = {n} exceeds {MAX_SEEDED_VARS}"
        )));
    }
    let total: f64 = w.iter().sum();
    let surface = Surface {
        instance,
        w,
        total,
    };

    let mut seeds: Vec<(f64, u64, Vec<f64>)> = (1u64..1 << n)
        .into_par_iter()
        .filter_map(|s| {
            let ws: f64 = (0..n).filter(|&v| s >> v & 1 == 1).map(|v| surface.w[v]).sum();
            if !is_balanced(ws, total) {
                return None;
            }
            let mut f: Vec<f64> = (0..n)
                .map(|v| (s >> v & 1) as f64 - ws / total)
                .collect();
            if !surface.project(&mut f) {
                return None;
            }
            Some((surface.ratio(&f), s, f))
        })
        .collect();
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut starts: Vec<Vec<f64>> = seeds
        .iter()
        .take(DESCENDED_SEEDS)
        .map(|(_, _, f)| f.clone())
        .collect();
    for k in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(k as u64);
        starts.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let descended: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|f| surface.descend(f, config.iterations))
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = seeds.first().map(|(d, _, f)| (*d, f.clone()));
    for (d, f) in descended {
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, f));
        }
    }
    let (value, witness) = best.ok_or_else(|| CspError::Domain("no w-orthogonal start".into()))?;
    Ok(Gamma2Estimate { value, witness })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCut {
    pub set: CutSet,
    pub expansion: f64,
    /// `R(f) = Σ w_c Q_c(f) / Σ w_u f_u`; the sweep guarantees `Φ(S) ≤ R(f)`.
    pub bound: f64,
}

/// Threshold rounding of a nonnegative `f`: among `S_t = {u : f_u ≥ t}` for
/// the distinct positive values `t` of `f`, returns the one of least expansion.
pub fn sweep_round(instance: &CspInstance, f: &[f64]) -> Result<SweepCut> {
    even_xor_arity(instance)?;
    check_vector(instance, f)?;
    if f.iter().any(|&v| v < 0.0) {
        return Err(CspError::Precondition("sweep rounding needs f ≥ 0".into()));
    }
    let w = vertex_weights(instance);
    let den: f64 = w.iter().zip(f).map(|(w, f)| w * f).sum();
    if den <= 0.0 {
        return Err(CspError::Domain("sweep rounding of a vector with zero mass".into()));
    }
    let p = instance.field();
    let num: f64 = instance
        .constraints()
        .iter()
        .map(|c| c.weight() * general_energy(c, p, f))
        .sum();

    let mut levels: Vec<f64> = f.iter().copied().filter(|&v| v > 0.0).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut best: Option<(f64, CutSet)> = None;
    for t in levels {
        let s = CutSet::new((0..f.len()).filter(|&u| f[u] >= t).collect());
        if set_weight(&w, &s) <= 0.0 {
            continue;
        }
        let phi = expansion(instance, &s)?;
        if best.as_ref().is_none_or(|(b, _)| phi < *b) {
            best = Some((phi, s));
        }
    }
    let (expansion, set) = best.expect("positive mass implies a weighted level set");
    Ok(SweepCut {
        set,
        expansion,
        bound: num / den,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpperCut {
    pub set: CutSet,
    pub expansion: f64,
    /// `D_w(f)` of the input.
    pub discrepancy: f64,
    /// `D_w(f) + 2√(ℓ/2)·√D_w(f)`.
    pub certified_bound: f64,
    /// Shift `t` with `g = f − t·1`.
    pub shift: f64,
    /// `D_w(h)` for the chosen half `h ∈ {g⁺, g⁻}`.
    pub half_discrepancy: f64,
}

/// `D + 2√(ℓ/2)·√D`.
pub fn certified_bound(d: f64, ell: usize) -> f64 {
    d + 2.0 * (ell as f64 / 2.0).sqrt() * d.max(0.0).sqrt()
}

/// Smallest value `t` of `f` with `w({f ≤ t}) ≥ w(V)/2`.
pub fn weighted_median(w: &[f64], f: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    let mut idx: Vec<usize> = (0..f.len()).collect();
    idx.sort_by(|&a, &b| f[a].total_cmp(&f[b]));
    let mut acc = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let t = f[idx[k]];
        while k < idx.len() && f[idx[k]] == t {
            acc += w[idx[k]];
            k += 1;
        }
        if acc >= total / 2.0 - TOL {
            return t;
        }
    }
    f[idx[idx.len() - 1]]
}

/// Rounds a w-orthogonal `f` to a balanced set: shift by the weighted median,
/// keep the half with smaller discrepancy, and sweep its square.
pub fn cheeger_upper(instance: &CspInstance, f: &[f64]) -> Result<UpperCut> {
    let ell = even_xor_arity(instance)?;
    check_vector(instance, f)?;
    let w = vertex_weights(instance);
    if mass(&w, f) <= 0.0 {
        return Err(CspError::Precondition("f has zero w-norm".into()));
    }
    let dot: f64 = w.iter().zip(f).map(|(w, f)| w * f).sum();
    let scale: f64 = w.iter().zip(f).map(|(w, f)| w * f.abs()).sum::<f64>().max(1.0);
    if dot.abs() > TOL * scale {
        return Err(CspError::Precondition(format!(
            "f is not w-orthogonal to the all-ones vector (⟨f,1⟩_w = {dot})"
        )));
    }
    let d = discrepancy(instance, f)?;
    let shift = weighted_median(&w, f);
    let plus: Vec<f64> = f.iter().map(|&v| (v - shift).max(0.0)).collect();
    let minus: Vec<f64> = f.iter().map(|&v| (shift - v).max(0.0)).collect();
    let mut half: Option<(f64, Vec<f64>)> = None;
    for h in [plus, minus] {
        if mass(&w, &h) <= 0.0 {
            continue;
        }
        let dh = discrepancy(instance, &h)?;
        if half.as_ref().is_none_or(|(b, _)| dh < *b) {
            half = Some((dh, h));
        }
    }
    let (half_discrepancy, h) = half.expect("a w-orthogonal nonzero f is not constant");
    let squared: Vec<f64> = h.iter().map(|v| v * v).collect();
    let sweep = sweep_round(instance, &squared)?;
    Ok(UpperCut {
        set: sweep.set,
        expansion: sweep.expansion,
        discrepancy: d,
        certified_bound: certified_bound(d, ell),
        shift,
        half_discrepancy,
    })
}

/// Per-constraint margins of the two inequalities behind the rounding bound:
/// `Q_c(h)² + 2Q_c(h)·Σ_odd min⁽ⁱ⁾ − Q_c(h²)` and
/// `(ℓ/2)·Σ_{i∈c} h_i² − (Σ_odd min⁽ⁱ⁾)²`, where `min⁽ⁱ⁾` is the `i`-th
/// smallest value of `h` on `c` and "odd" counts from one.
pub fn appendix_inequalities(c: &Constraint, h: &[f64]) -> Result<(f64, f64)> {
    if c.offset() != 0 || c.arity() % 2 == 1 || c.coeffs().iter().any(|&a| a != 1) {
        return Err(CspError::Domain("needs an even-arity XOR constraint".into()));
    }
    if let Some(&v) = c.vars().iter().find(|&&v| v >= h.len()) {
        return Err(CspError::IndexOutOfRange { index: v, n: h.len() });
    }
    if h.iter().any(|&v| v.is_nan() || v < 0.0) {
        return Err(CspError::Precondition("h must be nonnegative".into()));
    }
    let p = f2();
    let mut vals: Vec<f64> = c.vars().iter().map(|&v| h[v]).collect();
    vals.sort_by(f64::total_cmp);
    let odd: f64 = vals.iter().step_by(2).sum();
    let sq: Vec<f64> = h.iter().map(|v| v * v).collect();
    let q = general_energy(c, p, h);
    let q_sq = general_energy(c, p, &sq);
    let margin1 = q * q + 2.0 * q * odd - q_sq;
    let margin2 = c.arity() as f64 / 2.0 * vals.iter().map(|v| v * v).sum::<f64>() - odd * odd;
    Ok((margin1, margin2))
}

/// Drops variables that lie in no positive-weight constraint. Returns the
/// reduced instance and, for each new index, its original index.
pub fn restrict_to_covered(instance: &CspInstance) -> Result<(CspInstance, Vec<usize>)> {
    let w = vertex_weights(instance);
    let keep: Vec<usize> = (0..instance.n()).filter(|&v| w[v] > 0.0).collect();
    let mut index = vec![usize::MAX; instance.n()];
    for (k, &v) in keep.iter().enumerate() {
        index[v] = k;
    }
    let p = instance.field();
    let constraints = instance
        .constraints()
        .iter()
        .filter(|c| c.weight() > 0.0)
        .map(|c| {
            Constraint::new(
                p,
                c.vars().iter().map(|&v| index[v]).collect(),
                c.coeffs().iter().map(|&a| a as i64).collect(),
                c.offset() as i64,
                c.weight(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((CspInstance::new(keep.len(), p, constraints)?, keep))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheegerReport {
    /// Original indices of the variables analysed.
    pub variables: Vec<usize>,
    pub ell: usize,
    pub expansion: f64,
    /// Minimizing set, in original indices.
    pub expansion_set: CutSet,
    pub gamma2: f64,
    pub witness: Vec<f64>,
    pub rounded: UpperCut,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl CheegerReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Computes `Φ_C` exactly, an upper bound on γ₂, and checks
/// `γ₂/2 ≤ Φ_C ≤ (2√(ℓ/2)+1)·√γ₂` plus the rounding pipeline.
pub fn verify_cheeger(instance: &CspInstance, config: &Gamma2Config) -> Result<CheegerReport> {
    even_xor_arity(instance)?;
    let (reduced, variables) = restrict_to_covered(instance)?;
    let mut notes = Vec::new();
    if reduced.n() < instance.n() {
        let dropped: Vec<String> = (0..instance.n())
            .filter(|v| !variables.contains(v))
            .map(|v| format!("x{}", v + 1))
            .collect();
        let msg = format!("excluded uncovered variables {}", dropped.join(","));
        log::warn!("{msg}");
        notes.push(msg);
    }
    let ell = even_xor_arity(&reduced)?;
    let (phi, set) = csp_expansion(&reduced)?;
    let est = gamma2_estimate(&reduced, config)?;
    let rounded = cheeger_upper(&reduced, &est.witness)?;

    let lower = 2.0 * phi - est.value;
    let factor = 2.0 * (ell as f64 / 2.0).sqrt() + 1.0;
    let upper = factor * est.value.max(0.0).sqrt() - phi;
    let pipeline = (rounded.certified_bound - rounded.expansion).min(rounded.expansion - phi);
    let checks = vec![
        Check::new("gamma2_at_most_twice_expansion", lower >= -TOL, lower, TOL),
        Check::new("expansion_within_cheeger_bound", upper >= -TOL, upper, TOL),
        Check::new("rounded_cut_certified", pipeline >= -TOL, pipeline, TOL).with_detail(format!(
            "phi_rounded={} certified={}",
            rounded.expansion, rounded.certified_bound
        )),
    ];
    let lift = |s: &CutSet| CutSet::new(s.members().iter().map(|&v| variables[v]).collect());
    let rounded = UpperCut {
        set: lift(&rounded.set),
        ..rounded
    };
    Ok(CheegerReport {
        ell,
        expansion: phi,
        expansion_set: lift(&set),
        gamma2: est.value,
        witness: est.witness,
        rounded,
        checks,
        notes,
        variables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> CspInstance {
        let cs = edges
            .iter()
            .map(|&(u, v)| Constraint::xor(vec![u, v], 0, 1.0).unwrap())
            .collect();
        CspInstance::new(n, f2(), cs).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn expansion_examples() {
        let tri = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(close(expansion(&tri, &CutSet::new(vec![0])).unwrap(), 1.0));
        let four = CspInstance::new(4, f2(), vec![Constraint::xor(vec![0, 1, 2, 3], 0, 1.0).unwrap()]).unwrap();
        assert_eq!(expansion(&four, &CutSet::new(vec![0, 1])).unwrap(), 0.0);
        assert!(boundary(&four, &CutSet::new(vec![0, 1])).unwrap().is_empty());
        let isolated = graph(3, &[(0, 1)]);
        assert!(matches!(expansion(&isolated, &CutSet::new(vec![2])), Err(CspError::Domain(_))));
    }

    #[test]
    fn csp_expansion_examples() {
        let (phi, s) = csp_expansion(&graph(2, &[(0, 1)])).unwrap();
        assert!(close(phi, 1.0));
        assert_eq!(s.len(), 1);
        let (phi, s) = csp_expansion(&graph(4, &[(0, 1), (2, 3)])).unwrap();
        assert_eq!(phi, 0.0);
        assert!(s == CutSet::new(vec![0, 1]) || s == CutSet::new(vec![2, 3]));
        let (phi, _) = csp_expansion(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert!(close(phi, 1.0));
    }

    #[test]
    fn rejects_non_even_xor() {
        let odd = CspInstance::new(3, f2(), vec![Constraint::xor(vec![0, 1, 2], 0, 1.0).unwrap()]).unwrap();
        assert!(matches!(csp_expansion(&odd), Err(CspError::Domain(_))));
        let p3 = FieldPrime::new(3).unwrap();
        let c = Constraint::new(p3, vec![0, 1], vec![1, 2], 0, 1.0).unwrap();
        let inst = CspInstance::new(2, p3, vec![c]).unwrap();
        assert!(matches!(csp_expansion(&inst), Err(CspError::Domain(_))));
    }

    #[test]
    fn general_energy_examples() {
        let c = Constraint::xor(vec![0, 1, 2, 3], 0, 1.0).unwrap();
        let x = [0.1, 0.5, 0.3, 0.9];
        let sp = c.sat_measure(f2(), |v| x[v]);
        assert!(close(general_energy(&c, f2(), &x), sp));
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!(close(general_energy(&c, f2(), &doubled), 2.0 * sp));
        assert_eq!(general_energy(&c, f2(), &[0.4; 4]), 0.0);
        // pairs of sorted values: (0.3-0.1) + (0.9-0.5)
        assert!(close(sp, 0.6));
    }

    #[test]
    fn discrepancy_of_indicator_is_expansion() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]);
        let s = CutSet::new(vec![0, 3]);
        let d = discrepancy(&g, &s.indicator(4)).unwrap();
        assert!(close(d, expansion(&g, &s).unwrap()));
        assert!(close(discrepancy(&g, &[0.7; 4]).unwrap(), 0.0));
        assert!(matches!(discrepancy(&g, &[0.0; 4]), Err(CspError::Domain(_))));
    }

    #[test]
    fn gamma2_examples() {
        let cfg = Gamma2Config {
            restarts: 4,
            iterations: 50,
            seed: 1,
        };
        let edge = gamma2_estimate(&graph(2, &[(0, 1)]), &cfg).unwrap();
        assert!(edge.value <= 2.0 + TOL && edge.value >= 0.0);
        let two = gamma2_estimate(&graph(4, &[(0, 1), (2, 3)]), &cfg).unwrap();
        assert!(two.value.abs() < 1e-12);
        assert!(matches!(
            gamma2_estimate(&graph(3, &[(0, 1)]), &cfg),
            Err(CspError::Domain(msg)) if msg.contains("x3") || msg.contains("variable 3")
        ));
    }

    #[test]
    fn gamma2_matches_laplacian_eigenvalue_on_path() {
        // for graphs γ₂ is the second eigenvalue of D^{-1}L; path P3 gives 1
        let est = gamma2_estimate(&graph(3, &[(0, 1), (1, 2)]), &Gamma2Config::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
    }

    #[test]
    fn sweep_examples() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]);
        let s = CutSet::new(vec![1, 3]);
        let cut = sweep_round(&g, &s.indicator(4)).unwrap();
        assert_eq!(cut.set, s);
        assert!(close(cut.bound, cut.expansion));
        let path = graph(3, &[(0, 1), (1, 2)]);
        let cut = sweep_round(&path, &[0.0, 0.5, 1.0]).unwrap();
        assert!(cut.expansion <= cut.bound + TOL);
        assert!(sweep_round(&path, &[0.0, -0.5, 1.0]).is_err());
        assert!(sweep_round(&path, &[0.0; 3]).is_err());
    }

    #[test]
    fn cheeger_upper_graph_bound() {
        let path = graph(3, &[(0, 1), (1, 2)]);
        // w = (1,2,1); f ⊥_w 1
        let f = [1.0, 0.0, -1.0];
        let cut = cheeger_upper(&path, &f).unwrap();
        assert!(close(cut.certified_bound, cut.discrepancy + 2.0 * cut.discrepancy.sqrt()));
        assert!(cut.expansion <= cut.certified_bound + TOL);
        let w = vertex_weights(&path);
        assert!(is_balanced(set_weight(&w, &cut.set), 4.0));
        assert!(matches!(cheeger_upper(&path, &[1.0, 0.0, 0.0]), Err(CspError::Precondition(_))));
    }

    #[test]
    fn weighted_median_balances() {
        let w = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(weighted_median(&w, &[4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(weighted_median(&[3.0, 1.0], &[0.0, 5.0]), 0.0);
    }

    #[test]
    fn appendix_examples() {
        let c = Constraint::xor(vec![0, 1, 2, 3], 0, 1.0).unwrap();
        let (m1, m2) = appendix_inequalities(&c, &[1.0; 4]).unwrap();
        assert!(close(m2, 4.0));
        assert!(close(m1, 0.0));
        assert_eq!(appendix_inequalities(&c, &[0.0; 4]).unwrap(), (0.0, 0.0));
        let e = Constraint::xor(vec![0, 1], 0, 1.0).unwrap();
        let (m1, _) = appendix_inequalities(&e, &[0.3, 0.8]).unwrap();
        assert!(close(m1, 0.0));
    }

    #[test]
    fn verify_examples() {
        let cfg = Gamma2Config {
            restarts: 8,
            iterations: 100,
            seed: 0,
        };
        let rep = verify_cheeger(&graph(2, &[(0, 1)]), &cfg).unwrap();
        assert!(close(rep.expansion, 1.0));
        assert_eq!(rep.ell, 2);
        assert!(rep.all_passed(), "{:?}", rep.checks);
        let rep = verify_cheeger(&graph(3, &[(0, 1), (1, 2), (0, 2)]), &cfg).unwrap();
        assert!(close(rep.expansion, 1.0));
        assert!(rep.all_passed(), "{:?}", rep.checks);
        let rep = verify_cheeger(&graph(4, &[(0, 1), (1, 2)]), &cfg).unwrap();
        assert_eq!(rep.variables, vec![0, 1, 2]);
        assert_eq!(rep.notes.len(), 1);
        assert!(rep.all_passed());
    }
}
