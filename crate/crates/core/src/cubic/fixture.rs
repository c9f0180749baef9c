//! Printed class group tables of cyclic fields of prime degree `p`.
//!
//! A table file is UTF-8 text. Lines starting with `#!` are directives
//! (`#! p=3`, `#! exceptional`, `#! cp-base=<int>`), other lines starting
//! with `# ` are comments and lines starting with `(` mark elided rows. A row
//! is a `key=value` line such as
//!
//! ```text
//! f=657 N=2 P=x^3-219*x-1241          Cl=[3,3]
//! ```
//!
//! optionally followed by continuation lines: polynomial wraps begin with
//! `+` or `-`, an indented line may carry `Cl=`, and `Structure of Tor=[..]`
//! and `#Tor=<int> Cp=<decimal>` lines attach torsion data to the row above.
//! A line `p=<int> [f=<int>[=<factorization>]]` without a polynomial sets
//! the prime and the default conductor for the rows that follow.

use serde::{Deserialize, Serialize};

use crate::arith::{factor, is_prime, multiplicative_order, valuation};
use crate::error::{Error, Result};
use crate::group::AbelianGroupStructure;
use crate::quadclass::fundamental_discriminant;

use super::{cubic_polynomials, discriminant_filter, format_poly, is_cubic_conductor, rank_window, CubicField};

/// One parsed table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub p: u64,
    /// Conductor; for quadratic rows this is `|D|`.
    pub f: u128,
    /// Radicand of a quadratic row.
    pub m: Option<i128>,
    /// Number of primes dividing `f`.
    pub n: usize,
    pub printed_n: Option<usize>,
    /// Factorization printed after the conductor (`f=1983163=7*13*19*31*37`).
    pub printed_factors: Option<Vec<u128>>,
    /// Polynomial coefficients, constant term first.
    pub poly: Option<Vec<i128>>,
    /// The class group column (restricted sense for quadratic rows).
    pub cl: AbelianGroupStructure,
    pub cl_ord: Option<AbelianGroupStructure>,
    pub tor: Option<AbelianGroupStructure>,
    pub tor_order: Option<u128>,
    pub cp: Option<f64>,
    pub starred: bool,
    /// Text printed after the class group, such as `[13]x[3,3,3,3,3]`.
    pub note: Option<String>,
    /// 1-based line of the row in its file (0 for a standalone line).
    pub line: usize,
}

impl Fixture {
    /// Short label for reports.
    pub fn label(&self) -> String {
        match (self.m, &self.poly) {
            (Some(m), _) => format!("p={} m={m}", self.p),
            (None, Some(poly)) => format!("p={} f={} P={}", self.p, self.f, format_poly(poly)),
            (None, None) => format!("p={} f={}", self.p, self.f),
        }
    }

    /// `log √D` of the field: `(p-1)/2 · log f`.
    pub fn log_sqrt_disc(&self) -> f64 {
        (self.p as f64 - 1.0) / 2.0 * (self.f as f64).ln()
    }
}

/// A parsed table file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub p: Option<u64>,
    /// Every row was selected for having `p`-rank at least `N`.
    pub exceptional: bool,
    /// The table prints `Cp` against this conductor instead of each row's own.
    pub cp_base: Option<u128>,
    pub rows: Vec<Fixture>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Context {
    p: Option<u64>,
    f: Option<u128>,
}

const KEYS: [&str; 12] =
    ["Structure of Tor=", "#Tor=", "Clord =", "Clord=", "Clres=", "Cl=", "Cp=", "P=", "N=", "f=", "m=", "p="];

/// Splits a logical row into `(key, value, column)` triples.
fn split_keys(text: &str) -> Vec<(&'static str, &str, usize)> {
    let bytes = text.as_bytes();
    let mut hits: Vec<(usize, &'static str)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let boundary = i == 0 || !bytes[i - 1].is_ascii_alphabetic();
        let found = if boundary { KEYS.iter().find(|k| text[i..].starts_with(**k)) } else { None };
        match found {
            Some(k) => {
                hits.push((i, k));
                i += k.len();
            }
            None => i += 1,
        }
    }
    let mut out = Vec::new();
    for (j, &(start, key)) in hits.iter().enumerate() {
        let vstart = start + key.len();
        let vend = hits.get(j + 1).map_or(text.len(), |h| h.0);
        out.push((key, text[vstart..vend].trim(), vstart + 1));
    }
    out
}

fn perr(column: usize, message: impl Into<String>) -> Error {
    Error::Parse { column, message: message.into() }
}

fn parse_uint(s: &str, column: usize) -> Result<u128> {
    s.parse().map_err(|_| perr(column, format!("expected an unsigned integer, got {s:?}")))
}

fn parse_int(s: &str, column: usize) -> Result<i128> {
    let t = s.strip_prefix('+').unwrap_or(s);
    t.parse().map_err(|_| perr(column, format!("expected an integer, got {s:?}")))
}

/// Parses `x^3+x^2-661054*x+ 49725976` into coefficients, constant term first.
pub fn parse_poly(s: &str, column: usize) -> Result<Vec<i128>> {
    let chars: Vec<(usize, char)> = s.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(perr(column, "empty polynomial"));
    }
    let mut coeffs: Vec<i128> = Vec::new();
    let mut i = 0;
    let col = |k: usize| column + chars.get(k).map_or(s.len(), |c| c.0);
    while i < chars.len() {
        let mut sign = 1i128;
        if chars[i].1 == '+' || chars[i].1 == '-' {
            if chars[i].1 == '-' {
                sign = -1;
            }
            i += 1;
        } else if !coeffs.is_empty() || i > 0 {
            return Err(perr(col(i), format!("expected + or -, got {:?}", chars[i].1)));
        }
        let start = i;
        while i < chars.len() && chars[i].1.is_ascii_digit() {
            i += 1;
        }
        let digits: String = chars[start..i].iter().map(|c| c.1).collect();
        let mut coef: i128 = if digits.is_empty() {
            1
        } else {
            digits.parse().map_err(|_| perr(col(start), format!("coefficient {digits} out of range")))?
        };
        coef *= sign;
        let mut deg = 0usize;
        if i < chars.len() && chars[i].1 == '*' {
            if digits.is_empty() {
                return Err(perr(col(i), "* without a coefficient"));
            }
            i += 1;
            if i >= chars.len() || chars[i].1 != 'x' {
                return Err(perr(col(i), "expected x after *"));
            }
        }
        if i < chars.len() && chars[i].1 == 'x' {
            i += 1;
            deg = 1;
            if i < chars.len() && chars[i].1 == '^' {
                i += 1;
                let s0 = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let e: String = chars[s0..i].iter().map(|c| c.1).collect();
                deg = e.parse().map_err(|_| perr(col(s0), "expected an exponent after ^"))?;
            }
        } else if digits.is_empty() {
            return Err(perr(col(i), "empty term"));
        }
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] = coeffs[deg].checked_add(coef).ok_or_else(|| perr(col(start), "coefficient out of range"))?;
    }
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
        coeffs.pop();
    }
    Ok(coeffs)
}

/// `[a,b,...]` followed by optional `=...` text and an optional `*`.
fn parse_group_value(s: &str, column: usize) -> Result<(AbelianGroupStructure, Option<String>, bool)> {
    let close = s.find(']').ok_or_else(|| perr(column, format!("missing ] in {s:?}")))?;
    let group = s[..=close].parse::<AbelianGroupStructure>().map_err(|e| match e {
        Error::Parse { message, .. } => perr(column, message),
        other => perr(column, other.to_string()),
    })?;
    let rest = s[close + 1..].trim();
    let starred = rest.ends_with('*');
    let rest = rest.trim_end_matches('*').trim();
    let note = rest.strip_prefix('=').map(|r| r.trim().to_string()).filter(|r| !r.is_empty());
    if note.is_none() && !rest.is_empty() {
        return Err(perr(column + close + 1, format!("unexpected text {rest:?} after group")));
    }
    Ok((group, note, starred))
}

/// Conductor implied by a cyclic cubic period polynomial.
fn conductor_from_cubic(poly: &[i128]) -> Option<u128> {
    if poly.len() != 4 || poly[3] != 1 {
        return None;
    }
    match poly[2] {
        0 => u128::try_from(-3 * poly[1]).ok(),
        1 | -1 => u128::try_from(1 - 3 * poly[1]).ok(),
        _ => None,
    }
}

fn parse_with(text: &str, ctx: Context, line: usize) -> Result<Fixture> {
    let fields = split_keys(text);
    if fields.is_empty() {
        return Err(perr(1, format!("no key=value fields in {text:?}")));
    }
    let mut p = ctx.p;
    let mut f = None;
    let mut printed_factors = None;
    let mut printed_n = None;
    let mut m = None;
    let mut poly = None;
    let mut cl = None;
    let mut cl_ord = None;
    let mut tor = None;
    let mut tor_order = None;
    let mut cp = None;
    let mut starred = false;
    let mut note = None;
    for (key, val, col) in fields {
        match key {
            "p=" => p = Some(parse_uint(val, col)? as u64),
            "f=" => {
                let (head, tail) = val.split_once('=').unwrap_or((val, ""));
                f = Some(parse_uint(head.trim(), col)?);
                if !tail.is_empty() {
                    let parts = tail
                        .split('*')
                        .map(|q| parse_uint(q.trim(), col + head.len() + 1))
                        .collect::<Result<Vec<_>>>()?;
                    printed_factors = Some(parts);
                }
            }
            "N=" => printed_n = Some(parse_uint(val, col)? as usize),
            "m=" => m = Some(parse_int(val, col)?),
            "P=" => poly = Some(parse_poly(val, col)?),
            "Cl=" | "Clres=" => {
                let (g, n, s) = parse_group_value(val, col)?;
                cl = Some(g);
                note = n;
                starred = s;
            }
            "Clord =" | "Clord=" => cl_ord = Some(parse_group_value(val, col)?.0),
            "Structure of Tor=" => tor = Some(parse_group_value(val, col)?.0),
            "#Tor=" => tor_order = Some(parse_uint(val, col)?),
            "Cp=" => cp = Some(val.parse::<f64>().map_err(|_| perr(col, format!("expected a decimal, got {val:?}")))?),
            _ => unreachable!("key list is fixed"),
        }
    }
    let cl = cl.ok_or_else(|| perr(text.len() + 1, "row has no Cl= field"))?;
    let f = match (m, f) {
        (Some(m), _) => {
            p = Some(2);
            fundamental_discriminant(m).map_err(|e| perr(1, e.to_string()))?.abs()
        }
        (None, Some(f)) => f,
        (None, None) => match (ctx.f, &poly) {
            (Some(f), _) => f,
            (None, Some(c)) => conductor_from_cubic(c).ok_or_else(|| perr(1, "row has no conductor"))?,
            (None, None) => return Err(perr(1, "row has no conductor")),
        },
    };
    let p = match (p, &poly) {
        (Some(p), _) => p,
        (None, Some(c)) => (c.len() - 1) as u64,
        (None, None) => return Err(perr(1, "prime p unknown for row")),
    };
    let n = factor(f).map_err(|e| perr(1, e.to_string()))?.omega();
    Ok(Fixture { p, f, m, n, printed_n, printed_factors, poly, cl, cl_ord, tor, tor_order, cp, starred, note, line })
}

/// Parses one logical row (continuation lines already joined).
pub fn parse_fixture_line(text: &str) -> Result<Fixture> {
    parse_with(text, Context::default(), 0)
}

fn line_err(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { column, message } => Error::Parse { column, message: format!("line {line}: {message}") },
        other => other,
    }
}

/// Parses a table file.
pub fn parse_fixture_file(text: &str) -> Result<FixtureFile> {
    let mut file = FixtureFile { p: None, exceptional: false, cp_base: None, rows: Vec::new() };
    let mut ctx = Context::default();
    let mut pending: Option<(String, usize, Context)> = None;
    let flush = |pending: &mut Option<(String, usize, Context)>, rows: &mut Vec<Fixture>| -> Result<()> {
        if let Some((text, line, c)) = pending.take() {
            rows.push(parse_with(&text, c, line).map_err(|e| line_err(line, e))?);
        }
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('(') {
            continue;
        }
        if let Some(d) = t.strip_prefix("#!") {
            let d = d.trim();
            if d == "exceptional" {
                file.exceptional = true;
            } else if let Some(v) = d.strip_prefix("p=") {
                let p = parse_uint(v.trim(), 1).map_err(|e| line_err(line, e))? as u64;
                file.p = Some(p);
                ctx.p = Some(p);
            } else if let Some(v) = d.strip_prefix("cp-base=") {
                file.cp_base = Some(parse_uint(v.trim(), 1).map_err(|e| line_err(line, e))?);
            } else {
                return Err(line_err(line, perr(1, format!("unknown directive {d:?}"))));
            }
            continue;
        }
        let attach = t.starts_with("#Tor=")
            || t.starts_with("Structure of Tor=")
            || t.starts_with('+')
            || t.starts_with('-')
            || (raw.starts_with(char::is_whitespace) && t.starts_with("Cl"));
        if attach {
            let Some((text, _, _)) = pending.as_mut() else {
                return Err(line_err(line, perr(1, "continuation line without a row")));
            };
            if !(t.starts_with('+') || t.starts_with('-')) {
                text.push(' ');
            }
            text.push_str(t);
            continue;
        }
        if t.starts_with('#') {
            continue;
        }
        flush(&mut pending, &mut file.rows)?;
        if t.starts_with("p=") && !t.contains("P=") {
            let fields = split_keys(t);
            ctx.f = None;
            for (key, val, col) in fields {
                match key {
                    "p=" => ctx.p = Some(parse_uint(val, col).map_err(|e| line_err(line, e))? as u64),
                    "f=" => {
                        let head = val.split('=').next().unwrap_or(val).trim();
                        ctx.f = Some(parse_uint(head, col).map_err(|e| line_err(line, e))?);
                    }
                    _ => return Err(line_err(line, perr(col, format!("unexpected key {key} in context line")))),
                }
            }
            continue;
        }
        pending = Some((t.to_string(), line, ctx));
    }
    flush(&mut pending, &mut file.rows)?;
    Ok(file)
}

/// One named check of a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_fixture`]: failed checks, plus notes that record
/// irregularities in the printed row without failing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub line: usize,
    pub label: String,
    pub checks: Vec<FixtureCheck>,
    pub notes: Vec<String>,
    /// `(δ, Δ)` when both are nonnegative.
    pub delta: Option<(u32, u32)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &FixtureCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(FixtureCheck { name: name.to_string(), passed, detail: detail.into() });
    }
}

/// `(δ, Δ)`: excess of the `p`-rank and of `v_p` of the `p`-part order over `N-1`.
pub fn delta_from_fixture(fix: &Fixture) -> Result<(u32, u32)> {
    let base = fix.n.saturating_sub(1) as i64;
    let rank = fix.cl.p_rank(fix.p as u128) as i64;
    let v = fix.cl.v_p_order(fix.p as u128) as i64;
    if rank < base || v < base {
        return Err(Error::Inconsistent(format!("{}: p-rank {rank} or v_p {v} below N-1 = {base}", fix.label())));
    }
    Ok(((rank - base) as u32, (v - base) as u32))
}

/// Whether `f` is a conductor of cyclic fields of prime degree `p`.
fn is_conductor(f: u128, p: u64) -> Result<bool> {
    if p == 3 {
        return Ok(is_cubic_conductor(f));
    }
    let pp = p as u128;
    let e = valuation(f, pp);
    if e != 0 && e != 2 {
        return Ok(false);
    }
    let rest = factor(f / pp.pow(e))?;
    Ok(rest.is_squarefree() && rest.primes().all(|q| q % pp == 1))
}

/// Relative agreement to `1e-6`, which is stricter than six significant digits.
fn close(printed: f64, computed: f64) -> bool {
    (printed - computed).abs() <= 1e-6 * computed.abs().max(1e-300)
}

/// Arithmetic consistency of one row, with file-level directives from `file`.
pub fn validate_fixture_in(fix: &Fixture, exceptional: bool, cp_base: Option<u128>) -> ValidationReport {
    let p = fix.p;
    let pp = p as u128;
    let mut r =
        ValidationReport { line: fix.line, label: fix.label(), checks: Vec::new(), notes: Vec::new(), delta: None };

    match is_conductor(fix.f, p) {
        Ok(ok) if fix.m.is_some() => r.check("conductor", ok || p == 2, format!("|D| = {}", fix.f)),
        Ok(ok) => r.check("conductor", ok, format!("f = {} for p = {p}", fix.f)),
        Err(e) => r.check("conductor", false, e.to_string()),
    }
    if let Some(n) = fix.printed_n {
        r.check("omega", n == fix.n, format!("printed N = {n}, omega(f) = {}", fix.n));
    }
    if let Some(qs) = &fix.printed_factors {
        let prod = qs.iter().try_fold(1u128, |acc, &q| acc.checked_mul(q));
        let ok = prod == Some(fix.f) && qs.iter().all(|&q| is_prime(q)) && qs.len() == fix.n;
        r.check("factorization", ok, format!("printed factors {qs:?}"));
    }

    let (lo, hi) = rank_window(fix.n, p);
    let rank = fix.cl.p_rank(pp);
    r.check("rank-window", (lo..=hi).contains(&rank), format!("{p}-rank {rank} in [{lo}, {hi}]"));

    let v = fix.cl.v_p_order(pp) as usize;
    r.check("chevalley", v + 1 >= fix.n, format!("v_{p}(#Cl) = {v} >= N-1 = {}", fix.n.saturating_sub(1)));

    match factor(fix.cl.order()) {
        Ok(fac) => {
            let mut ok = true;
            let mut detail = Vec::new();
            for q in fac.primes().filter(|&q| q != pp) {
                let dim = fix.cl.p_rank(q);
                let deg = if p == 2 { 1 } else { multiplicative_order((q % pp) as u64, p) as usize };
                ok &= dim % deg == 0;
                detail.push(format!("q={q}: dim {dim}, degree {deg}"));
            }
            r.check("zp-dimension", ok, detail.join("; "));
        }
        Err(e) => r.check("zp-dimension", false, e.to_string()),
    }

    match delta_from_fixture(fix) {
        Ok((d, big_d)) => {
            r.delta = Some((d, big_d));
            r.check("delta", big_d >= d, format!("delta = {d}, Delta = {big_d}"));
            if fix.starred {
                r.check("star", big_d > 0, format!("starred row has Delta = {big_d}"));
            } else if big_d > 0 {
                r.notes.push(format!("unstarred row has Delta = {big_d}"));
            }
            if exceptional {
                r.check("exceptional", d >= 1, format!("{p}-rank {rank} >= N = {}", fix.n));
            }
        }
        Err(e) => r.check("delta", false, e.to_string()),
    }

    if let Some(poly) = &fix.poly {
        if p == 3 {
            check_cubic_poly(&mut r, fix.f, poly);
        } else {
            let ok = poly.len() == p as usize + 1 && poly[p as usize] == 1 && poly[p as usize - 1].abs() == 1;
            r.check("polynomial", ok, format!("monic of degree {p} with trace ±1"));
        }
    }

    if let Some(note) = &fix.note {
        check_note(&mut r, fix, note);
    }

    if let Some(tor) = &fix.tor {
        let pgroup = tor.p_part(pp) == *tor;
        r.check("tor-p-group", pgroup, format!("Tor = {tor}"));
        if let Some(t) = fix.tor_order {
            r.check("tor-order", t == tor.order(), format!("#Tor = {t}, structure order {}", tor.order()));
        }
    }
    if let (Some(cp), Some(t)) = (fix.cp, fix.tor_order.or(fix.tor.as_ref().map(|g| g.order()))) {
        let own = (t as f64).ln() / fix.log_sqrt_disc();
        match cp_base {
            Some(base) => {
                let alt = Fixture { f: base, ..fix.clone() };
                let printed_against = (t as f64).ln() / alt.log_sqrt_disc();
                r.check("cp", close(cp, printed_against), format!("Cp = {cp} against conductor {base}"));
                if base != fix.f && !close(cp, own) {
                    r.notes.push(format!("Cp printed against conductor {base}; against f = {} it is {own:.12}", fix.f));
                }
            }
            None => r.check("cp", close(cp, own), format!("printed {cp}, computed {own:.12}")),
        }
    }
    r
}

/// [`validate_fixture_in`] without file directives.
pub fn validate_fixture(fix: &Fixture) -> ValidationReport {
    validate_fixture_in(fix, false, None)
}

/// Validates every row of a parsed file.
pub fn validate_file(file: &FixtureFile) -> Vec<ValidationReport> {
    file.rows.iter().map(|f| validate_fixture_in(f, file.exceptional, file.cp_base)).collect()
}

fn check_cubic_poly(r: &mut ValidationReport, f: u128, poly: &[i128]) {
    let field = CubicField { f, e: valuation(f, 3), a: 0, b: 0, poly: poly.to_vec() };
    match discriminant_filter(&field) {
        Ok(ok) => r.check("discriminant", ok, "polynomial discriminant is f^2 times a square"),
        Err(e) => r.check("discriminant", false, e.to_string()),
    }
    // the tables may list P(-x) up to sign instead of P(x)
    let mirrored: Vec<i128> = poly.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { -c } else { c }).collect();
    match cubic_polynomials(f) {
        Ok(fields) => {
            let ok = fields.iter().any(|fl| fl.poly == poly || fl.poly == mirrored);
            r.check("enumerated", ok, format!("polynomial among the {} fields of conductor {f}", fields.len()));
        }
        Err(e) => r.check("enumerated", false, e.to_string()),
    }
}

/// Compares a printed decomposition such as `[13]x[3,3,3,3,3]` or
/// `[2]xClord` with the group; disagreements are notes only.
fn check_note(r: &mut ValidationReport, fix: &Fixture, note: &str) {
    let mut order: u128 = 1;
    for part in note.split(']') {
        let part = part.trim_start_matches('x').trim();
        if part.is_empty() {
            continue;
        }
        if part == "Clord" || part == "xClord" {
            match &fix.cl_ord {
                Some(g) => order *= g.order(),
                None => return,
            }
            continue;
        }
        let Some(inner) = part.strip_prefix('[') else {
            r.notes.push(format!("unrecognized decomposition {note:?}"));
            return;
        };
        for d in inner.split(',') {
            match d.trim().parse::<u128>() {
                Ok(v) => order = order.saturating_mul(v),
                Err(_) => {
                    r.notes.push(format!("unrecognized decomposition {note:?}"));
                    return;
                }
            }
        }
    }
    if order != fix.cl.order() {
        r.notes.push(format!("printed decomposition {note} has order {order}, the group has order {}", fix.cl.order()));
    }
}
