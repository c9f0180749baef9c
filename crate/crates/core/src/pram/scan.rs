//! Scans of `v_p(#T)` over imaginary discriminants and along the family of
//! products of the first odd primes.

use serde::{Deserialize, Serialize};

use crate::arith::primes_up_to;
use crate::error::Result;
use crate::group::AbelianGroupStructure;
use crate::quadclass::scan::for_each_imaginary;
use crate::quadclass::{fundamental_discriminant, ClassGroupConfig, Discriminant};

use super::{class_part, stable_invariants, tor_report_from, ClassPart, RayContext, TorsionReport};

/// One emitted row of [`tor_scan_imaginary`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorScanRecord {
    pub d: i128,
    pub m: i128,
    pub p: u128,
    /// Level `n` of the ray class group modulo `p^n` used for the row.
    pub level: u32,
    /// `v_p(#Cl_{p^n}) - v_p(largest cyclic factor) - (n - 1)`.
    pub vptor: i64,
    pub cp: f64,
    /// Set when the row could not be computed.
    pub error: Option<String>,
}

/// The fixed level used by the scans: `20` for `p = 2`, `8` otherwise.
pub fn scan_level(p: u128) -> u32 {
    if p == 2 {
        20
    } else {
        8
    }
}

/// The scan statistic at level `n`: the valuation of the ray class group
/// with its largest cyclic factor and `n - 1` further lines removed. It
/// equals `v_p(#T)` when the second free line has exponent `n - 1`, and is
/// one less when that line has exponent `n - 2`.
pub fn scan_vptor(part: &ClassPart, n: u32) -> Result<i64> {
    let stat = |level: u32, ray: &[u32]| {
        let total: u32 = ray.iter().sum();
        total as i64 - ray.first().copied().unwrap_or(0) as i64 - (level as i64 - 1)
    };
    // past the stable level the statistic no longer depends on n
    let (stable, ray) = stable_invariants(part)?;
    if stable <= n {
        return Ok(stat(stable, &ray));
    }
    let ctx = RayContext::new(part.clone(), n + 2)?;
    Ok(stat(n, &ctx.invariants(n)?.0))
}

fn report_row(d_abs: u64, h: u32, p: u128, n: u32, cfg: &ClassGroupConfig) -> TorScanRecord {
    let m = if d_abs % 4 == 0 { -(d_abs as i128) / 4 } else { -(d_abs as i128) };
    let mut row = TorScanRecord { d: -(d_abs as i128), m, p, level: n, vptor: 0, cp: 0.0, error: None };
    let run = || -> Result<(i64, f64)> {
        let disc = fundamental_discriminant(m)?;
        let part = class_part(&disc, p, Some(h as u128), cfg)?;
        let v = scan_vptor(&part, n)?;
        Ok((v, v as f64 * (p as f64).ln() / disc.log_sqrt()))
    };
    match run() {
        Ok((v, cp)) => {
            row.vptor = v;
            row.cp = cp;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Fundamental `D < 0` with `min_abs <= |D| <= max_abs`, in order of
/// increasing `|D|`, keeping the rows whose `vptor` is at least the running
/// maximum (which starts at 0), so ties after a new maximum are emitted
/// again. Failed rows are always kept and do not move the maximum.
pub fn tor_scan_imaginary(
    p: u128,
    min_abs: u64,
    max_abs: u64,
    workers: usize,
    cfg: &ClassGroupConfig,
) -> Vec<TorScanRecord> {
    let n = scan_level(p);
    let mut fields: Vec<(u64, u32)> = Vec::new();
    for_each_imaginary(min_abs, max_abs, |d, h, _, _| fields.push((d, h)));
    let workers = workers.max(1);
    let chunk = fields.len().div_ceil(workers).max(1);
    let rows: Vec<TorScanRecord> = std::thread::scope(|s| {
        let handles: Vec<_> = fields
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|&(d, h)| report_row(d, h, p, n, cfg)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("scan worker panicked")).collect()
    });
    let mut vp = 0i64;
    let mut out = Vec::new();
    for r in rows {
        if r.error.is_some() {
            out.push(r);
            continue;
        }
        if r.vptor > vp {
            vp = r.vptor;
        }
        if r.vptor >= vp {
            out.push(r);
        }
    }
    out
}

/// Radicands `±ℓ_1 ⋯ ℓ_N` over the first odd primes, signed to be `1 mod 4`,
/// for `N = 2, 3, ...`.
pub fn family_radicands(count: usize) -> Vec<i128> {
    let primes = primes_up_to(1000);
    let mut out = Vec::new();
    let mut prod: i128 = 3;
    for &l in primes.iter().skip(2).take(count) {
        prod *= l as i128;
        out.push(if prod.rem_euclid(4) == 1 { prod } else { -prod });
    }
    out
}

/// One field of the family with its class groups and `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub m: i128,
    pub d: i128,
    /// The restricted class group.
    pub class_restricted: Option<AbelianGroupStructure>,
    pub report: Option<TorsionReport>,
    pub error: Option<String>,
}

pub fn tor_family(p: u128, count: usize, cfg: &ClassGroupConfig) -> Vec<FamilyRow> {
    family_radicands(count)
        .into_iter()
        .map(|m| {
            let run = || -> Result<(Discriminant, AbelianGroupStructure, TorsionReport)> {
                let disc = fundamental_discriminant(m)?;
                let restricted = if disc.is_imaginary() {
                    crate::quadclass::imag::class_group_imaginary_full(&disc, cfg)?.structure
                } else {
                    crate::quadclass::real::class_group_real_full(&disc, cfg)?.narrow
                };
                let part = class_part(&disc, p, None, cfg)?;
                Ok((disc, restricted, tor_report_from(&part)?))
            };
            match run() {
                Ok((disc, cl, rep)) => {
                    FamilyRow { m, d: disc.value, class_restricted: Some(cl), report: Some(rep), error: None }
                }
                Err(e) => FamilyRow {
                    m,
                    d: if m.rem_euclid(4) == 1 { m } else { 4 * m },
                    class_restricted: None,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// A printed scan row `D=... m=... vptor=... Cp=...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorScanFixtureRow {
    pub d: i128,
    pub m: i128,
    pub vptor: i64,
    pub cp: f64,
}

/// Rows printed under one `p=.., Interval [..]` header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorScanBlock {
    pub p: u128,
    pub interval: String,
    pub rows: Vec<TorScanFixtureRow>,
    /// Whether rows were elided (`(...)`) somewhere in the block.
    pub elided: bool,
}

fn field<'a>(line: &'a str, key: &str, column: usize) -> Result<&'a str> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
        .ok_or_else(|| crate::Error::Parse { column, message: format!("missing {key}= in {line:?}") })
}

fn parse_num<T: std::str::FromStr>(s: &str, column: usize) -> Result<T> {
    s.parse().map_err(|_| crate::Error::Parse { column, message: format!("bad number {s:?}") })
}

/// Parses a file of printed torsion-scan tables.
pub fn parse_tor_scan_fixture(text: &str) -> Result<Vec<TorScanBlock>> {
    let mut blocks: Vec<TorScanBlock> = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "(...)" {
            if let Some(b) = blocks.last_mut() {
                b.elided = true;
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p=") {
            let (p, interval) = rest
                .split_once(',')
                .ok_or_else(|| crate::Error::Parse { column: 1, message: format!("bad header {line:?}") })?;
            let interval = interval.trim().trim_start_matches("Interval").trim().to_string();
            blocks.push(TorScanBlock { p: parse_num(p.trim(), 1)?, interval, rows: Vec::new(), elided: false });
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| crate::Error::Parse { column: 1, message: "row before any p= header".into() })?;
        block.rows.push(TorScanFixtureRow {
            d: parse_num(field(line, "D", 1)?, 1)?,
            m: parse_num(field(line, "m", 2)?, 2)?,
            vptor: parse_num(field(line, "vptor", 3)?, 3)?,
            cp: parse_num(field(line, "Cp", 4)?, 4)?,
        });
    }
    Ok(blocks)
}

/// The scan statistic for one field, with its `Cp`.
pub fn scan_row(disc: &Discriminant, p: u128, cfg: &ClassGroupConfig) -> Result<(i64, f64)> {
    let part = class_part(disc, p, None, cfg)?;
    let v = scan_vptor(&part, scan_level(p))?;
    Ok((v, v as f64 * (p as f64).ln() / disc.log_sqrt()))
}
