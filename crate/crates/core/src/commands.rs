//! Subcommand bodies shared by the binary and the tests. Each returns a
//! [`RunReport`]; file I/O and argument parsing stay in the binary.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cheeger::{verify_cheeger, CutSet, Gamma2Config};
use crate::csp::{Augmentation, BooleanAssignment, CspInstance, FractionalAssignment, TOL};
use crate::error::{CspError, Result};
use crate::matrix::Matrix;
use crate::ordering::{
    crossing_indices, crossing_matrix, difference_matrix, factorization_matches, incidence_matrix,
    permutation_matrix, quadratic_form_energy, Permutation,
};
use crate::report::{Check, RunReport};
use crate::sparsifier::{
    spectral_sparsify, verify_sparsifier, FamilyCheck, FamilyMode, SamplerConfig, SparsifyConfig,
    MAX_BOOLEAN_VARS, MAX_EXHAUSTIVE_VARS,
};

/// Largest augmented `n` for `matrices --perm all`.
pub const MAX_ALL_PERMS_VARS: usize = 8;

fn bad(msg: String) -> CspError {
    CspError::Precondition(msg)
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| bad(format!("bad {what} count `{s}`")))
}

/// `--assign` values: comma-separated reals, `random:k`, or `all-boolean`.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignSpec {
    Values(Vec<f64>),
    Random(usize),
    AllBoolean,
}

impl FromStr for AssignSpec {
    type Err = CspError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all-boolean" {
            return Ok(AssignSpec::AllBoolean);
        }
        if let Some(k) = s.strip_prefix("random:") {
            return Ok(AssignSpec::Random(parse_count(k, "random")?));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad assignment entry `{t}`")))
            })
            .collect::<Result<_>>()
            .map(AssignSpec::Values)
    }
}

/// `--mode exhaustive|sampled:K`.
pub fn parse_mode(s: &str) -> Result<FamilyMode> {
    match s {
        "exhaustive" => Ok(FamilyMode::Exhaustive),
        _ => match s.strip_prefix("sampled:") {
            Some(k) => Ok(FamilyMode::Sampled {
                permutations: parse_count(k, "permutation")?,
            }),
            None => Err(bad(format!("unknown mode `{s}`; use exhaustive or sampled:K"))),
        },
    }
}

/// `--family auto|exhaustive|sampled:K|none`; `auto` enumerates when the
/// augmented instance is small enough and samples 256 orderings otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilySpec {
    Auto,
    Fixed(FamilyCheck),
}

impl FromStr for FamilySpec {
    type Err = CspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(FamilySpec::Auto),
            "none" => Ok(FamilySpec::Fixed(FamilyCheck::Skip)),
            "exhaustive" => Ok(FamilySpec::Fixed(FamilyCheck::Exhaustive)),
            _ => match s.strip_prefix("sampled:") {
                Some(k) => Ok(FamilySpec::Fixed(FamilyCheck::Sampled {
                    permutations: parse_count(k, "permutation")?,
                })),
                None => Err(bad(format!(
                    "unknown family check `{s}`; use auto, exhaustive, sampled:K or none"
                ))),
            },
        }
    }
}

impl FamilySpec {
    fn resolve(self, instance: &CspInstance) -> FamilyCheck {
        match self {
            FamilySpec::Fixed(f) => f,
            FamilySpec::Auto => {
                if Augmentation::for_instance(instance).total_vars() <= MAX_EXHAUSTIVE_VARS {
                    FamilyCheck::Exhaustive
                } else {
                    FamilyCheck::Sampled { permutations: 256 }
                }
            }
        }
    }
}

/// `--perm id|all|<1-based csv>`; the order lists variables from smallest to
/// largest value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermSpec {
    Identity,
    Explicit(Vec<usize>),
    All,
}

impl FromStr for PermSpec {
    type Err = CspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(PermSpec::Identity),
            "all" => Ok(PermSpec::All),
            _ => s
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(bad(format!("bad permutation entry `{t}` (variables count from 1)"))),
                })
                .collect::<Result<_>>()
                .map(PermSpec::Explicit),
        }
    }
}

fn one_based(order: &[usize]) -> String {
    order
        .iter()
        .map(|v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn set_text(s: &CutSet) -> String {
    let names: Vec<String> = s.members().iter().map(|v| format!("x{}", v + 1)).collect();
    format!("{{{}}}", names.join(","))
}

fn instance_params(report: &mut RunReport, instance: &CspInstance) {
    report
        .param("n", instance.n())
        .param("m", instance.m())
        .param("p", instance.field());
}

fn equality_check(name: &str, worst: f64, tested: usize) -> Check {
    Check::new(name, worst <= TOL, -worst, TOL).with_detail(format!("tested={tested}"))
}

/// `|energy − quadratic form|` on the augmented instance, with the
/// permutation that sorts the extended vector.
fn quadratic_gap(augmented: &CspInstance, layout: &Augmentation, x: &[f64], energy: f64) -> Result<f64> {
    let ext = layout.extend_values(x);
    let perm = Permutation::sorting(&ext);
    Ok((quadratic_form_energy(augmented, &perm, &ext)? - energy).abs())
}

pub fn energy(instance: &CspInstance, spec: &AssignSpec, seed: u64) -> Result<RunReport> {
    let mut report = RunReport::new("energy");
    instance_params(&mut report, instance);
    let layout = Augmentation::for_instance(instance);
    let augmented = instance.augment_with(layout)?;
    match spec {
        AssignSpec::Values(values) => {
            report.param("assign", "values");
            let x = FractionalAssignment::new(values.clone())?;
            let e = instance.energy(&x)?;
            report.value("energy", e);
            let gap = quadratic_gap(&augmented, &layout, values, e)?;
            report.check(equality_check("quadratic_form_matches_energy", gap, 1));
            if values.iter().all(|&v| v == 0.0 || v == 1.0) {
                let bits = BooleanAssignment::from_bools(values.iter().map(|&v| v == 1.0).collect());
                let value = instance.csp_value(&bits)?;
                report.value("csp_value", value);
                report.check(equality_check("energy_equals_value", (e - value).abs(), 1));
            }
        }
        AssignSpec::Random(k) => {
            report.param("assign", format!("random:{k}"));
            report.seed = Some(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for i in 0..*k {
                let x: Vec<f64> = (0..instance.n()).map(|_| rng.gen::<f64>()).collect();
                let e = instance.energy(&FractionalAssignment::new(x.clone())?)?;
                worst = worst.max(quadratic_gap(&augmented, &layout, &x, e)?);
                report.value(&format!("energy[{i}]"), e);
            }
            report.check(equality_check("quadratic_form_matches_energy", worst, *k));
        }
        AssignSpec::AllBoolean => {
            report.param("assign", "all-boolean");
            let n = instance.n();
            if n > MAX_BOOLEAN_VARS {
                return Err(CspError::Guard(format!(
                    "all-boolean enumerates 2^n assignments; n = {n} exceeds {MAX_BOOLEAN_VARS}"
                )));
            }
            let mut worst = 0.0f64;
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for mask in 0..1u64 << n {
                let bits = BooleanAssignment::from_mask(n, mask);
                let value = instance.csp_value(&bits)?;
                let e = instance.energy(&bits.to_fractional())?;
                worst = worst.max((e - value).abs());
                lo = lo.min(value);
                hi = hi.max(value);
            }
            report
                .value("assignments", 1usize << n)
                .value("min_value", lo)
                .value("max_value", hi);
            report.check(equality_check("energy_equals_value", worst, 1 << n));
        }
    }
    Ok(report)
}

fn push_sparsifier_checks(
    report: &mut RunReport,
    original: &CspInstance,
    sparse: &CspInstance,
    eps: f64,
    n_random: usize,
    seed: u64,
    family: FamilyCheck,
) -> Result<()> {
    let verified = verify_sparsifier(original, sparse, eps, n_random, seed, family)?;
    for n in verified.notes {
        report.note(n);
    }
    for c in verified.checks {
        report.check(c);
    }
    Ok(())
}

/// Sparsifies `instance` and verifies the result. Returns the report and
/// the sparsified instance.
pub fn sparsify(
    instance: &CspInstance,
    eps: f64,
    seed: u64,
    mode: FamilyMode,
    n_random: usize,
) -> Result<(RunReport, CspInstance)> {
    let mut report = RunReport::new("sparsify");
    instance_params(&mut report, instance);
    report.param("eps", eps).param("mode", match mode {
        FamilyMode::Exhaustive => "exhaustive".to_string(),
        FamilyMode::Sampled { permutations } => format!("sampled:{permutations}"),
    });
    report.param("random", n_random);
    report.seed = Some(seed);
    let config = SparsifyConfig {
        mode,
        sampler: SamplerConfig::default(),
    };
    let result = spectral_sparsify(instance, eps, seed, &config)?;
    let sparse = result.apply(instance)?;
    report
        .value("kept", result.kept.len())
        .value("family_size", result.family_size)
        .value("attempts", result.attempts)
        .value("kept_weight", sparse.total_weight())
        .value("original_weight", instance.total_weight());
    if result.heuristic {
        report.note("heuristic: family built from sampled permutations, no guarantee over all orderings");
    }
    let family = match mode {
        FamilyMode::Exhaustive => FamilyCheck::Exhaustive,
        FamilyMode::Sampled { permutations } => FamilyCheck::Sampled { permutations },
    };
    push_sparsifier_checks(&mut report, instance, &sparse, eps, n_random, seed, family)?;
    Ok((report, sparse))
}

pub fn verify(
    original: &CspInstance,
    sparse: &CspInstance,
    eps: f64,
    n_random: usize,
    seed: u64,
    family: FamilySpec,
) -> Result<RunReport> {
    let mut report = RunReport::new("verify");
    instance_params(&mut report, original);
    report.param("m_sparse", sparse.m()).param("eps", eps).param("random", n_random);
    report.seed = Some(seed);
    let family = family.resolve(original);
    report.param(
        "family",
        match family {
            FamilyCheck::Exhaustive => "exhaustive".to_string(),
            FamilyCheck::Sampled { permutations } => format!("sampled:{permutations}"),
            FamilyCheck::Skip => "none".to_string(),
        },
    );
    push_sparsifier_checks(&mut report, original, sparse, eps, n_random, seed, family)?;
    Ok(report)
}

fn matrix_lines(m: &Matrix<i64>) -> Vec<String> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:>2}")).collect::<Vec<_>>().join(" "))
        .collect()
}

/// Both crossing constructions agree and `B^inc = B^cross·J·P_π`.
fn check_permutation(instance: &CspInstance, perm: &Permutation) -> Result<(bool, bool)> {
    let inc = incidence_matrix(instance, perm)?;
    let cross = crossing_matrix(instance, perm)?;
    let p = instance.field();
    let mut routes = true;
    for (k, c) in instance.constraints().iter().enumerate() {
        let bisector = crossing_indices(c, perm, p)?;
        let sweep: Vec<usize> = (0..cross.matrix().cols())
            .filter(|&g| cross.is_crossing(k, g))
            .collect();
        routes &= bisector == sweep;
    }
    Ok((factorization_matches(&inc, &cross, perm), routes))
}

pub fn matrices(instance: &CspInstance, spec: &PermSpec) -> Result<RunReport> {
    let mut report = RunReport::new("matrices");
    instance_params(&mut report, instance);
    let augmented = if instance.vanishes_on_constants() {
        instance.clone()
    } else {
        let a = instance.augment();
        report.note(format!(
            "augmented to {} variables so every constraint vanishes on constants",
            a.n()
        ));
        a
    };
    let n = augmented.n();
    match spec {
        PermSpec::All => {
            report.param("perm", "all");
            if n > MAX_ALL_PERMS_VARS {
                return Err(CspError::Guard(format!(
                    "--perm all enumerates n! orderings; n = {n} exceeds {MAX_ALL_PERMS_VARS}"
                )));
            }
            let (mut total, mut fact, mut routes) = (0usize, 0usize, 0usize);
            for perm in Permutation::all(n) {
                let (f, r) = check_permutation(&augmented, &perm)?;
                total += 1;
                fact += f as usize;
                routes += r as usize;
            }
            report
                .value("permutations", total)
                .value("factorization_holds", fact)
                .value("crossing_routes_agree", routes);
            report.check(
                Check::new("factorization", fact == total, fact as f64 - total as f64, 0.0)
                    .with_detail(format!("tested={total}")),
            );
            report.check(
                Check::new("crossing_routes", routes == total, routes as f64 - total as f64, 0.0)
                    .with_detail(format!("tested={total}")),
            );
        }
        PermSpec::Identity | PermSpec::Explicit(_) => {
            let perm = match spec {
                PermSpec::Explicit(order) => Permutation::new(order.clone()).map_err(|_| {
                    bad(format!(
                        "--perm must list each of the {n} variables of the augmented instance once"
                    ))
                })?,
                _ => Permutation::identity(n),
            };
            report.param("perm", one_based(perm.order()));
            let inc = incidence_matrix(&augmented, &perm)?;
            let cross = crossing_matrix(&augmented, &perm)?;
            report
                .block("B_inc", matrix_lines(inc.matrix()))
                .block("B_cross", matrix_lines(cross.matrix()))
                .block("J", matrix_lines(&difference_matrix(n)))
                .block("P", matrix_lines(&permutation_matrix(&perm)));
            let (f, r) = check_permutation(&augmented, &perm)?;
            report.check(Check::new("factorization", f, if f { 0.0 } else { -1.0 }, 0.0));
            report.check(Check::new("crossing_routes", r, if r { 0.0 } else { -1.0 }, 0.0));
        }
    }
    Ok(report)
}

pub fn cheeger(instance: &CspInstance, config: &Gamma2Config) -> Result<RunReport> {
    let mut report = RunReport::new("cheeger");
    instance_params(&mut report, instance);
    report
        .param("restarts", config.restarts)
        .param("iterations", config.iterations);
    report.seed = Some(config.seed);
    let rep = verify_cheeger(instance, config)?;
    report
        .value("analysed_vars", rep.variables.len())
        .value("ell", rep.ell)
        .value("expansion", rep.expansion)
        .value("expansion_set", set_text(&rep.expansion_set))
        .value("gamma2_upper", rep.gamma2)
        .value("rounded_set", set_text(&rep.rounded.set))
        .value("rounded_expansion", rep.rounded.expansion)
        .value("certified_bound", rep.rounded.certified_bound);
    for n in rep.notes {
        report.note(n);
    }
    for c in rep.checks {
        report.check(c);
    }
    Ok(report)
}
