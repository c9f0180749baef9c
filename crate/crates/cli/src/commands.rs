//! One function per subcommand, each producing a [`Table`].

use std::path::{Path, PathBuf};

use epsclass::arith::{mv_bounds_hold, primes_in_class, SpfSieve};
use epsclass::cubic::{
    ambiguous_number, cubic_conductors_up_to, cubic_polynomials, parse_fixture_file, validate_file, ValidationReport,
};
use epsclass::epsanalysis::{
    bound_report, envelope_report, find_n0, golden_max_x0, BoundParams, EnvelopePoint, EnvelopeReport, Quantity,
};
use epsclass::filtration::{
    filtration, filtration_iterated, from_quadratic, monte_carlo, order_identity_check, FiltrationResult,
    FinitePModule, SynthProfile,
};
use epsclass::pram::scan::{parse_tor_scan_fixture, tor_family, tor_scan_imaginary};
use epsclass::pram::{reflection_check, tor_report};
use epsclass::quadclass::imag::class_group_imaginary_full;
use epsclass::quadclass::real::class_group_real_full;
use epsclass::quadclass::scan::{for_each_imaginary, normic_search, prime_disc_report, scan_local_maxima, Statistic};
use epsclass::quadclass::{discriminant_from_value, fundamental_discriminant, is_fundamental_with, ClassGroupConfig};
use epsclass::Error;

use crate::output::{Cell, Table};
use crate::{Cli, Command, Failure, Sign, Stat};

/// A finished table and whether every check in it passed.
pub struct Outcome {
    pub table: Table,
    pub ok: bool,
    /// Some row failed on a budget or cap.
    pub budget: bool,
}

impl Outcome {
    fn new(table: Table, ok: bool) -> Self {
        let budget = match table.columns.iter().position(|&c| c == "error") {
            Some(i) => table.rows.iter().any(|r| matches!(&r[i], Cell::Text(m) if Error::is_budget_message(m))),
            None => false,
        };
        Outcome { table, ok, budget }
    }
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Outcome::new(table, true)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn require_prime(p: u64) -> Result<(), Failure> {
    if epsclass::arith::is_prime(p as u128) {
        Ok(())
    } else {
        Err(usage(format!("--p must be prime, got {p}")))
    }
}

fn require_range(min_d: u64, max_d: u64) -> Result<(), Failure> {
    if min_d > max_d {
        return Err(usage(format!("--min-d {min_d} exceeds --max-d {max_d}")));
    }
    Ok(())
}

fn require_positive(name: &str, x: f64) -> Result<(), Failure> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be a positive number, got {x}")))
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let cfg = ClassGroupConfig::from_env();
    let workers = cli.workers.max(1);
    match &cli.command {
        Command::Primes { p, count } => primes(*p, *count).map(Into::into),
        Command::QuadScan { min_d, max_d, sign } => quad_scan(*min_d, *max_d, *sign, workers, &cfg),
        Command::QuadMaxima { stat, eps, p, min_d, max_d, envelope } => {
            quad_maxima(*stat, *eps, *p, *min_d, *max_d, *envelope)
        }
        Command::CubicEnum { f, max_f } => cubic_enum(*f, *max_f).map(Into::into),
        Command::CubicValidate { fixtures } => cubic_validate(fixtures),
        Command::FiltrationRun { p, relations, sigma, n, m } => {
            filtration_run(*p, relations.as_deref(), sigma.as_deref(), *n, *m)
        }
        Command::FiltrationMc { p, n, samples, seed, max_log_order } => {
            filtration_mc(*p, *n, *samples, *seed, *max_log_order).map(Into::into)
        }
        Command::TorScan { p, min_d, max_d, all, envelope } => {
            tor_scan(*p, *min_d, *max_d, *all, *envelope, workers, &cfg)
        }
        Command::TorFamily { p, count } => tor_family_cmd(*p, *count, &cfg),
        Command::ReflectionCheck { min_d, max_d } => reflection(*min_d, *max_d, &cfg),
        Command::NormicSearch { p, rho, q, a_min, a_max } => normic(*p, *rho, *q, *a_min, *a_max, &cfg),
        Command::Bounds { p, eps, o1, delta, c_p, n } => bounds(*p, *eps, *o1, delta, *c_p, n).map(Into::into),
        Command::FixturesCheck { dir } => fixtures_check(dir),
    }
}

fn primes(p: u64, count: usize) -> Result<Table, Failure> {
    require_prime(p)?;
    let seq = primes_in_class(p, count);
    let half = (p as f64 - 1.0) / 2.0;
    let mut t = Table::new(&["k", "l_k", "lower_rhs", "lower_holds", "count_rhs", "count_holds"]);
    for (i, &l) in seq.primes.iter().enumerate() {
        let k = i + 1;
        let lg = (l as f64 / p as f64).ln();
        let lower = half * k as f64 * lg;
        let count_rhs = 2.0 * l as f64 / ((p as f64 - 1.0) * lg);
        t.push(vec![
            k.into(),
            l.into(),
            lower.into(),
            (l as f64 > lower).into(),
            count_rhs.into(),
            (k as f64 <= count_rhs).into(),
        ]);
    }
    let report = mv_bounds_hold(count, p);
    t.note("all_hold", report.holds);
    Ok(t)
}

fn quad_scan(min_d: u64, max_d: u64, sign: Sign, workers: usize, cfg: &ClassGroupConfig) -> Result<Outcome, Failure> {
    require_range(min_d, max_d)?;
    if max_d > i64::MAX as u64 / 4 {
        return Err(usage("--max-d is too large"));
    }
    let values: Vec<i128> = match sign {
        Sign::Neg => {
            let mut v = Vec::new();
            for_each_imaginary(min_d, max_d, |d, _, _, _| v.push(-(d as i128)));
            v
        }
        Sign::Pos => {
            let sieve = SpfSieve::new(max_d as usize + 1);
            (min_d.max(5)..=max_d).filter(|&d| is_fundamental_with(d as i64, &sieve)).map(|d| d as i128).collect()
        }
    };
    let rows = sharded(&values, workers, |&d| quad_row(d, cfg));
    let mut t = Table::new(&["D", "N", "h", "structure", "two_rank", "narrow", "unit_norm", "error"]);
    let mut errors = 0usize;
    for r in rows {
        errors += usize::from(r.last() != Some(&Cell::Null));
        t.push(r);
    }
    t.note("fields", values.len());
    t.note("errors", errors);
    Ok(Outcome::new(t, errors == 0))
}

fn quad_row(d: i128, cfg: &ClassGroupConfig) -> Vec<Cell> {
    let result = discriminant_from_value(d).and_then(|disc| {
        if disc.is_imaginary() {
            let g = class_group_imaginary_full(&disc, cfg)?;
            Ok((disc.ramified_count, g.structure, None, None))
        } else {
            let g = class_group_real_full(&disc, cfg)?;
            Ok((disc.ramified_count, g.ordinary, Some(g.narrow), Some(g.unit_norm)))
        }
    });
    match result {
        Ok((n, cl, narrow, norm)) => {
            let restricted = narrow.as_ref().unwrap_or(&cl);
            vec![
                d.into(),
                n.into(),
                cl.order().into(),
                cl.to_string().into(),
                restricted.p_rank(2).into(),
                narrow.map(|g| g.to_string()).into(),
                norm.map(|v| v as i64).into(),
                Cell::Null,
            ]
        }
        Err(e) => {
            let mut row = vec![d.into()];
            row.extend(std::iter::repeat(Cell::Null).take(6));
            row.push(e.to_string().into());
            row
        }
    }
}

/// Maps `f` over contiguous shards on scoped threads; the output order is
/// the input order for every worker count.
fn sharded<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn envelope_columns(t: &mut Table, report: &EnvelopeReport) {
    t.columns.extend(["excess", "envelope"]);
    for (row, env) in t.rows.iter_mut().zip(&report.rows) {
        row.push(env.excess.into());
        row.push(env.envelope.into());
    }
    t.note("envelope", report.envelope);
}

fn quad_maxima(
    stat: Stat,
    eps: Option<f64>,
    p: Option<u64>,
    min_d: u64,
    max_d: u64,
    envelope: Option<f64>,
) -> Result<Outcome, Failure> {
    require_range(min_d, max_d)?;
    let statistic = match stat {
        Stat::Genus | Stat::Raw => {
            let eps = eps.ok_or_else(|| usage("--eps is required for this statistic"))?;
            require_positive("eps", eps)?;
            if stat == Stat::Genus {
                Statistic::GenusNormalized { eps }
            } else {
                Statistic::Raw { eps }
            }
        }
        Stat::Pexp => {
            let p = p.ok_or_else(|| usage("--p is required for --stat pexp"))?;
            require_prime(p)?;
            Statistic::PExponent { p }
        }
    };
    let records = scan_local_maxima(min_d, max_d, statistic);
    let mut t = Table::new(&["D", "h", "N", "stat", "prime_disc", "error"]);
    for r in &records {
        t.push(vec![r.d.into(), r.h.into(), r.n.into(), r.stat.into(), r.is_prime_disc.into(), r.error.clone().into()]);
    }
    let report = prime_disc_report(&records);
    t.note("rows", records.len());
    t.note("all_prime_disc", report.all_prime);
    if let Some(env_eps) = envelope {
        require_positive("envelope", env_eps)?;
        let q = p.unwrap_or(2);
        require_prime(q)?;
        let points: Vec<EnvelopePoint> = records.iter().map(|r| EnvelopePoint::from_scan(r, q)).collect();
        envelope_columns(&mut t, &envelope_report(&points, q, env_eps, Quantity::ClassPPart));
    }
    let ok = records.iter().all(|r| r.error.is_none());
    Ok(Outcome::new(t, ok))
}

fn cubic_enum(f: Option<u128>, max_f: Option<u64>) -> Result<Table, Failure> {
    let conductors = match (f, max_f) {
        (Some(f), None) => vec![f],
        (None, Some(m)) => cubic_conductors_up_to(m),
        _ => return Err(usage("give exactly one of --f and --max-f")),
    };
    let mut t = Table::new(&["f", "N", "e", "a", "b", "polynomial", "ambiguous"]);
    for f in conductors {
        let fields = cubic_polynomials(f)?;
        let n = epsclass::arith::factor(f)?.omega();
        let amb = ambiguous_number(f, 3)?;
        for x in fields {
            t.push(vec![x.f.into(), n.into(), x.e.into(), x.a.into(), x.b.into(), x.poly_string().into(), amb.into()]);
        }
    }
    t.note("fields", t.rows.len());
    Ok(t)
}

fn fixture_files(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(usage(format!("{} is neither a file nor a directory", path.display())));
    }
    let mut out = Vec::new();
    let mut stack = vec![path.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "txt") {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn validation_rows(t: &mut Table, file: &str, reports: &[ValidationReport]) -> bool {
    let mut ok = true;
    for r in reports {
        ok &= r.passed();
        let failed: Vec<String> = r.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        t.push(vec![
            file.into(),
            r.line.into(),
            r.label.clone().into(),
            r.checks.len().into(),
            r.passed().into(),
            failed.join("; ").into(),
            r.notes.join("; ").into(),
        ]);
    }
    ok
}

const VALIDATION_COLUMNS: [&str; 7] = ["file", "line", "label", "checks", "passed", "failures", "notes"];

fn cubic_validate(path: &Path) -> Result<Outcome, Failure> {
    let mut t = Table::new(&VALIDATION_COLUMNS);
    let mut ok = true;
    for file in fixture_files(path)? {
        let text = std::fs::read_to_string(&file)?;
        let parsed = parse_fixture_file(&text)?;
        ok &= validation_rows(&mut t, &file.display().to_string(), &validate_file(&parsed));
    }
    t.note("rows", t.rows.len());
    t.note("all_passed", ok);
    Ok(Outcome::new(t, ok))
}

/// Parses `"3,0;0,3"` into rows.
fn parse_matrix(s: &str, flag: &str) -> Result<Vec<Vec<i128>>, Failure> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<i128>().map_err(|e| usage(format!("--{flag}: {x:?}: {e}"))))
                .collect()
        })
        .collect()
}

fn filtration_run(
    p: Option<u64>,
    relations: Option<&str>,
    sigma: Option<&str>,
    n: Option<usize>,
    m: Option<i128>,
) -> Result<Outcome, Failure> {
    let (module, n, expected_delta) = match (m, relations, sigma) {
        (Some(m), None, None) => {
            if p.is_some_and(|p| p != 2) {
                return Err(usage("--m uses p = 2"));
            }
            let disc = fundamental_discriminant(m)?;
            let module = from_quadratic(&disc)?;
            let (big_n, delta) = epsclass::quadclass::genus_delta(&disc)?;
            if n.is_some_and(|n| n != big_n) {
                return Err(usage(format!("--n must be {big_n} for this field")));
            }
            (module, big_n, Some(delta))
        }
        (None, Some(rel), Some(sig)) => {
            let p = p.ok_or_else(|| usage("--p is required with --relations"))?;
            require_prime(p)?;
            let n = n.ok_or_else(|| usage("--n is required with --relations"))?;
            let module = FinitePModule::new(p, parse_matrix(rel, "relations")?, parse_matrix(sig, "sigma")?)?;
            (module, n, None)
        }
        _ => return Err(usage("give either --m, or --relations with --sigma")),
    };
    let direct = filtration(&module, n)?;
    let iterated = filtration_iterated(&module, n)?;
    let agree = direct == iterated;
    let identity = order_identity_check(&direct);
    let mut t = Table::new(&["i", "order_M_i", "t_i"]);
    for (i, (order, ti)) in direct.chain.iter().zip(&direct.t).enumerate() {
        t.push(vec![i.into(), (*order).into(), (*ti).into()]);
    }
    summarize_filtration(&mut t, &direct);
    t.note("methods_agree", agree);
    t.note("order_identity", identity);
    let mut ok = agree && identity;
    if let Some(d) = expected_delta {
        t.note("genus_Delta", d);
        ok &= d == direct.big_delta();
    }
    Ok(Outcome::new(t, ok))
}

fn summarize_filtration(t: &mut Table, r: &FiltrationResult) {
    t.note("p", r.p);
    t.note("N", r.n);
    t.note("m", r.m);
    t.note("Delta", r.big_delta());
}

fn filtration_mc(p: u64, n: usize, samples: usize, seed: u64, max_log_order: u32) -> Result<Table, Failure> {
    require_prime(p)?;
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let profile = SynthProfile { max_log_order, ..SynthProfile::default() };
    let report = monte_carlo(p, n, samples, seed, &profile)?;
    let mut t = Table::new(&["Delta", "count", "fraction"]);
    let found = (samples - report.failures).max(1) as f64;
    for (&delta, &count) in &report.histogram {
        t.push(vec![delta.into(), count.into(), (count as f64 / found).into()]);
    }
    t.note("samples", samples);
    t.note("failures", report.failures);
    Ok(t)
}

fn tor_scan(
    p: u64,
    min_d: u64,
    max_d: u64,
    all: bool,
    envelope: Option<f64>,
    workers: usize,
    cfg: &ClassGroupConfig,
) -> Result<Outcome, Failure> {
    require_prime(p)?;
    require_range(min_d, max_d)?;
    if all {
        let mut values = Vec::new();
        for_each_imaginary(min_d, max_d, |d, _, _, _| values.push(-(d as i128)));
        let reports = sharded(&values, workers, |&d| {
            discriminant_from_value(d).and_then(|disc| tor_report(&disc, p as u128, cfg))
        });
        let mut t = Table::new(&["D", "p", "n_stable", "T_structure", "vp", "W", "c_tilde", "error"]);
        let mut points = Vec::new();
        let mut ok = true;
        for (d, r) in values.iter().zip(reports) {
            match r {
                Ok(r) => {
                    points.push(EnvelopePoint::from_torsion(&r, Quantity::Torsion));
                    t.push(vec![
                        r.d.into(),
                        r.p.into(),
                        r.n_stable.into(),
                        r.structure.to_string().into(),
                        r.vp.into(),
                        r.w.into(),
                        r.c_tilde.into(),
                        Cell::Null,
                    ]);
                }
                Err(e) => {
                    ok = false;
                    t.push(vec![
                        (*d).into(),
                        p.into(),
                        Cell::Null,
                        Cell::Null,
                        Cell::Null,
                        Cell::Null,
                        Cell::Null,
                        e.to_string().into(),
                    ]);
                }
            }
        }
        if let Some(eps) = envelope {
            require_positive("envelope", eps)?;
            let report = envelope_report(&points, p, eps, Quantity::Torsion);
            t.note("envelope", report.envelope);
        }
        return Ok(Outcome::new(t, ok));
    }
    let rows = tor_scan_imaginary(p as u128, min_d, max_d, workers, cfg);
    let mut t = Table::new(&["D", "m", "p", "level", "vptor", "Cp", "error"]);
    for r in &rows {
        t.push(vec![
            r.d.into(),
            r.m.into(),
            r.p.into(),
            r.level.into(),
            r.vptor.into(),
            r.cp.into(),
            r.error.clone().into(),
        ]);
    }
    let ok = rows.iter().all(|r| r.error.is_none());
    if let Some(eps) = envelope {
        require_positive("envelope", eps)?;
        let points: Vec<EnvelopePoint> = rows.iter().filter_map(EnvelopePoint::from_tor_scan).collect();
        let report = envelope_report(&points, p, eps, Quantity::Torsion);
        t.note("envelope", report.envelope);
    }
    Ok(Outcome::new(t, ok))
}

fn tor_family_cmd(p: u64, count: usize, cfg: &ClassGroupConfig) -> Result<Outcome, Failure> {
    require_prime(p)?;
    let rows = tor_family(p as u128, count, cfg);
    let mut t = Table::new(&["m", "D", "Cl_restricted", "T_structure", "vp", "W", "c_tilde", "error"]);
    for r in &rows {
        let rep = r.report.as_ref();
        t.push(vec![
            r.m.into(),
            r.d.into(),
            r.class_restricted.as_ref().map(|g| g.to_string()).into(),
            rep.map(|x| x.structure.to_string()).into(),
            rep.map(|x| x.vp).into(),
            rep.map(|x| x.w).into(),
            rep.map(|x| x.c_tilde).into(),
            r.error.clone().into(),
        ]);
    }
    let ok = rows.iter().all(|r| r.error.is_none());
    Ok(Outcome::new(t, ok))
}

fn reflection(min_d: u64, max_d: u64, cfg: &ClassGroupConfig) -> Result<Outcome, Failure> {
    require_range(min_d, max_d)?;
    let mut values = Vec::new();
    for_each_imaginary(min_d, max_d, |d, _, _, _| values.push(-(d as i128)));
    let mut t = Table::new(&["D", "rk_T", "rk_S", "S_count", "holds", "error"]);
    let mut ok = true;
    for d in values {
        match discriminant_from_value(d).and_then(|disc| reflection_check(&disc, cfg)) {
            Ok(r) => {
                ok &= r.holds;
                t.push(vec![r.d.into(), r.rk_t.into(), r.rk_s.into(), r.s_count.into(), r.holds.into(), Cell::Null]);
            }
            Err(e) => {
                ok = false;
                t.push(vec![d.into(), Cell::Null, Cell::Null, Cell::Null, Cell::Null, e.to_string().into()]);
            }
        }
    }
    t.note("all_hold", ok);
    Ok(Outcome::new(t, ok))
}

fn normic(
    p: u64,
    rho: u32,
    q: u64,
    a_min: u128,
    a_max: Option<u128>,
    cfg: &ClassGroupConfig,
) -> Result<Outcome, Failure> {
    require_prime(p)?;
    let a_max = a_max.unwrap_or(u128::MAX);
    let rows = normic_search(p, rho, q, a_min, a_max, cfg)?;
    let mut t = Table::new(&["a", "b", "m", "D", "h", "structure", "C", "error"]);
    for r in &rows {
        let rec = &r.record;
        t.push(vec![
            r.a.into(),
            r.b.into(),
            r.m.into(),
            rec.d.into(),
            rec.h.into(),
            rec.structure.as_ref().map(|g| g.to_string()).into(),
            rec.stat.into(),
            rec.error.clone().into(),
        ]);
    }
    let ok = rows.iter().all(|r| r.record.error.is_none());
    Ok(Outcome::new(t, ok))
}

fn bounds(p: u64, eps: f64, o1: f64, delta: &str, c_p: f64, ns: &[f64]) -> Result<Table, Failure> {
    require_prime(p)?;
    if p < 3 {
        return Err(usage("--p must be an odd prime"));
    }
    require_positive("eps", eps)?;
    require_positive("c-p", c_p)?;
    if !o1.is_finite() {
        return Err(usage("--o1 must be finite"));
    }
    let fixed_delta = match delta {
        "max" => None,
        s => Some(s.parse::<u32>().map_err(|e| usage(format!("--delta: {s:?}: {e}")))? as f64),
    };
    let params = BoundParams::new(p, eps)?.with_o1(o1);
    let default_ns: Vec<f64> = (0..=18).map(|k| 10f64.powi(k)).collect();
    let ns = if ns.is_empty() { &default_ns[..] } else { ns };
    if let Some(bad) = ns.iter().find(|&&n| !(n.is_finite() && n >= 1.0)) {
        return Err(usage(format!("--n values must be at least 1, got {bad}")));
    }
    let mut t = Table::new(&["N", "delta", "X", "X0", "Y0_lower", "logC_required"]);
    for &n in ns {
        let d = fixed_delta.unwrap_or((p as f64 - 2.0) * (n - 1.0));
        let r = bound_report(n, &params, d, c_p);
        t.push(vec![r.N.into(), d.into(), r.X.into(), r.X0.into(), r.Y0_lower.into(), r.logC_required.into()]);
    }
    let (n0, x0) = find_n0(&params);
    t.note("N0", n0);
    t.note("X0_at_N0", x0);
    let (_, x0max) = golden_max_x0(&params, 0.0, 2.0 * n0.ln().max(1.0), 1e-10);
    t.note("X0max", x0max);
    Ok(t)
}

fn fixtures_check(dir: &Path) -> Result<Outcome, Failure> {
    let mut t = Table::new(&VALIDATION_COLUMNS);
    let mut ok = true;
    for file in fixture_files(dir)? {
        let text = std::fs::read_to_string(&file)?;
        let name = file.display().to_string();
        if file.parent().and_then(|d| d.file_name()).is_some_and(|d| d == "tor_scan") {
            for block in parse_tor_scan_fixture(&text)? {
                for row in &block.rows {
                    let lp = (block.p as f64).ln();
                    let cp = row.vptor as f64 * lp / (0.5 * (row.d.unsigned_abs() as f64).ln());
                    let passed = (cp - row.cp).abs() <= 1e-9 * row.cp.abs().max(1.0);
                    ok &= passed;
                    t.push(vec![
                        name.clone().into(),
                        Cell::Null,
                        format!("D={} p={}", row.d, block.p).into(),
                        1usize.into(),
                        passed.into(),
                        if passed { Cell::from("") } else { format!("Cp: computed {cp}").into() },
                        "".into(),
                    ]);
                }
            }
        } else {
            let parsed = parse_fixture_file(&text)?;
            ok &= validation_rows(&mut t, &name, &validate_file(&parsed));
        }
    }
    t.note("rows", t.rows.len());
    t.note("all_passed", ok);
    Ok(Outcome::new(t, ok))
}
