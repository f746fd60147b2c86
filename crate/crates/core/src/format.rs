//! Plain-text instance files.
//!
//! ```text
//! csp 1
//! field 3
//! vars 4
//! # weight : terms != rhs, variables numbered from 1
//! c 1.5 : 1*x1 + 2*x3 != 1
//! ```

use std::fmt::Write as _;

use crate::csp::{Constraint, CspInstance};
use crate::error::{CspError, Result};
use crate::field::FieldPrime;

pub const FORMAT_VERSION: u32 = 1;

fn err(line: usize, msg: impl Into<String>) -> CspError {
    CspError::Parse {
        line,
        msg: msg.into(),
    }
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    key: &str,
    last_line: usize,
) -> Result<(usize, u64)> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| err(last_line, format!("missing `{key}` header")))?;
    let mut toks = line.split_whitespace();
    if toks.next() != Some(key) {
        return Err(err(no, format!("expected `{key} <value>`")));
    }
    let value = toks
        .next()
        .ok_or_else(|| err(no, format!("`{key}` needs a value")))?
        .parse::<u64>()
        .map_err(|e| err(no, format!("bad `{key}` value: {e}")))?;
    if toks.next().is_some() {
        return Err(err(no, format!("trailing tokens after `{key}`")));
    }
    Ok((no, value))
}

fn parse_term(no: usize, term: &str, n: usize) -> Result<(usize, i64)> {
    let (coeff, var) = match term.split_once('*') {
        Some((a, x)) => (
            a.parse::<i64>()
                .map_err(|e| err(no, format!("bad coefficient `{a}`: {e}")))?,
            x,
        ),
        None => (1, term),
    };
    let index = var
        .strip_prefix('x')
        .ok_or_else(|| err(no, format!("expected a variable like x1, got `{var}`")))?
        .parse::<usize>()
        .map_err(|e| err(no, format!("bad variable `{var}`: {e}")))?;
    if index == 0 || index > n {
        return Err(err(no, format!("variable x{index} out of range 1..={n}")));
    }
    Ok((index - 1, coeff))
}

fn parse_constraint(no: usize, body: &str, p: FieldPrime, n: usize) -> Result<Constraint> {
    let (weight, rest) = body
        .split_once(':')
        .ok_or_else(|| err(no, "expected `c <weight> : <terms> != <rhs>`"))?;
    let weight = weight
        .trim()
        .parse::<f64>()
        .map_err(|e| err(no, format!("bad weight: {e}")))?;
    let (lhs, rhs) = rest
        .split_once("!=")
        .ok_or_else(|| err(no, "missing `!=`"))?;
    let rhs: String = rhs.split_whitespace().collect();
    let offset = rhs
        .parse::<i64>()
        .map_err(|e| err(no, format!("bad right-hand side: {e}")))?;
    let lhs: String = lhs.split_whitespace().collect();
    if lhs.is_empty() {
        return Err(err(no, "constraint has no terms"));
    }
    let mut vars = Vec::new();
    let mut coeffs = Vec::new();
    for term in lhs.split('+') {
        let (v, a) = parse_term(no, term, n)?;
        if p.reduce(a) == 0 {
            return Err(err(no, format!("zero coefficient on x{} mod {p}", v + 1)));
        }
        vars.push(v);
        coeffs.push(a);
    }
    Constraint::new(p, vars, coeffs, offset, weight).map_err(|e| err(no, e.to_string()))
}

pub fn parse_instance(text: &str) -> Result<CspInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let last = text.lines().count().max(1);
    let (no, version) = header(&mut lines, "csp", last)?;
    if version != FORMAT_VERSION as u64 {
        return Err(err(no, format!("unknown format version {version}")));
    }
    let (no, p) = header(&mut lines, "field", last)?;
    let p = FieldPrime::new(p).map_err(|_| err(no, format!("field size {p} is not prime")))?;
    let (_, n) = header(&mut lines, "vars", last)?;
    let n = n as usize;
    let mut constraints = Vec::new();
    for (no, line) in lines {
        let body = line
            .strip_prefix('c')
            .filter(|b| b.starts_with(char::is_whitespace))
            .ok_or_else(|| err(no, "expected a constraint line starting with `c`"))?;
        constraints.push(parse_constraint(no, body, p, n)?);
    }
    CspInstance::new(n, p, constraints)
}

pub fn serialize_instance(instance: &CspInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "csp {FORMAT_VERSION}");
    let _ = writeln!(out, "field {}", instance.field());
    let _ = writeln!(out, "vars {}", instance.n());
    for c in instance.constraints() {
        let terms: Vec<String> = c
            .vars()
            .iter()
            .zip(c.coeffs())
            .map(|(v, a)| format!("{a}*x{}", v + 1))
            .collect();
        let _ = writeln!(out, "c {} : {} != {}", c.weight(), terms.join(" + "), c.offset());
    }
    out
}
