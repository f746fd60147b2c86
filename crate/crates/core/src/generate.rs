//! Seeded random instances.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::{Constraint, CspInstance};
use crate::error::{CspError, Result};
use crate::field::FieldPrime;

fn check_weights(weights: (f64, f64)) -> Result<()> {
    let (lo, hi) = weights;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
        return Err(CspError::Precondition(format!("bad weight range [{lo}, {hi}]")));
    }
    Ok(())
}

fn draw_weight(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// `m` constraints on uniformly random `arity`-subsets with nonzero uniform
/// coefficients, uniform right-hand sides and weights uniform in `weights`.
pub fn generate_random(
    n: usize,
    m: usize,
    p: u64,
    arity: usize,
    weights: (f64, f64),
    seed: u64,
) -> Result<CspInstance> {
    let p = FieldPrime::new(p)?;
    if arity == 0 || arity > n {
        return Err(CspError::Precondition(format!("arity {arity} not in 1..={n}")));
    }
    check_weights(weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = p.get() as i64;
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = sample(&mut rng, n, arity).into_vec();
        let coeffs = (0..arity).map(|_| rng.gen_range(1..q)).collect();
        let offset = rng.gen_range(0..q);
        let w = draw_weight(&mut rng, weights);
        constraints.push(Constraint::new(p, vars, coeffs, offset, w)?);
    }
    CspInstance::new(n, p, constraints)
}

/// `m` XOR constraints `Σ x_i ≠ 0` over `F_2` with even arities drawn from
/// `2..=max_arity`. While some variable is uncovered, each new constraint
/// includes one, so every variable is covered when `m` allows it.
pub fn generate_even_xor(
    n: usize,
    m: usize,
    max_arity: usize,
    weights: (f64, f64),
    seed: u64,
) -> Result<CspInstance> {
    let max_arity = max_arity.min(n) & !1;
    if max_arity < 2 {
        return Err(CspError::Precondition(format!(
            "even arity needs max_arity ≥ 2 and n ≥ 2 (n = {n})"
        )));
    }
    check_weights(weights)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covered = vec![false; n];
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let arity = 2 * rng.gen_range(1..=max_arity / 2);
        let uncovered: Vec<usize> = (0..n).filter(|&v| !covered[v]).collect();
        let vars = if uncovered.is_empty() {
            sample(&mut rng, n, arity).into_vec()
        } else {
            let first = uncovered[rng.gen_range(0..uncovered.len())];
            let mut vars = vec![first];
            let rest: Vec<usize> = (0..n).filter(|&v| v != first).collect();
            vars.extend(sample(&mut rng, n - 1, arity - 1).into_iter().map(|k| rest[k]));
            vars
        };
        for &v in &vars {
            covered[v] = true;
        }
        let w = draw_weight(&mut rng, weights);
        constraints.push(Constraint::xor(vars, 0, w)?);
    }
    CspInstance::new(n, FieldPrime::new(2)?, constraints)
}

/// Like [`generate_even_xor`] but refuses an `m` that cannot cover all `n`.
pub fn generate_covering_even_xor(
    n: usize,
    m: usize,
    max_arity: usize,
    weights: (f64, f64),
    seed: u64,
) -> Result<CspInstance> {
    let inst = generate_even_xor(n, m, max_arity, weights, seed)?;
    let mut covered = vec![false; n];
    for c in inst.constraints() {
        for &v in c.vars() {
            covered[v] = true;
        }
    }
    if covered.iter().all(|&c| c) {
        Ok(inst)
    } else {
        Err(CspError::Precondition(format!("{m} constraints leave some of {n} variables uncovered")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_instance, serialize_instance};

    #[test]
    fn seed_stable() {
        let a = generate_random(6, 40, 5, 3, (0.5, 2.0), 9).unwrap();
        let b = generate_random(6, 40, 5, 3, (0.5, 2.0), 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_random(6, 40, 5, 3, (0.5, 2.0), 10).unwrap());
    }

    #[test]
    fn xor_graph() {
        let g = generate_random(5, 30, 2, 2, (1.0, 1.0), 0).unwrap();
        for c in g.constraints() {
            assert_eq!(c.arity(), 2);
            assert_eq!(c.coeffs(), &[1, 1]);
            assert_ne!(c.vars()[0], c.vars()[1]);
        }
    }

    #[test]
    fn round_trips() {
        let inst = generate_random(5, 200, 3, 3, (0.1, 3.0), 4).unwrap();
        assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn infeasible() {
        assert!(generate_random(3, 1, 2, 4, (1.0, 1.0), 0).is_err());
        assert!(generate_random(3, 1, 4, 2, (1.0, 1.0), 0).is_err());
        assert!(generate_random(3, 1, 2, 2, (2.0, 1.0), 0).is_err());
        assert!(generate_covering_even_xor(9, 2, 2, (1.0, 1.0), 0).is_err());
    }

    #[test]
    fn even_xor_covers() {
        for seed in 0..20 {
            let inst = generate_covering_even_xor(8, 6, 4, (0.5, 2.0), seed).unwrap();
            for c in inst.constraints() {
                assert_eq!(c.arity() % 2, 0);
                assert_eq!(c.offset(), 0);
            }
        }
    }
}
