use epsclass::epsanalysis::*;
use epsclass::pram::tor_report;
use epsclass::quadclass::{fundamental_discriminant, ClassGroupConfig};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn n0_example() {
    let params = BoundParams::new(7, 0.1).unwrap();
    let (n0, x0) = find_n0(&params);
    assert!(rel(n0, 2.935394e16) < 0.002, "N0={n0}");
    assert!(rel(x0, 8.8e15) < 0.005, "X0={x0}");
    assert!(rel(X0_of_N(n0, &params), x0) < 1e-12);
}

#[test]
fn n0_matches_golden_section() {
    for (p, eps, o1) in [(7u64, 0.1, 0.0), (3, 0.05, 0.0), (5, 0.2, 1.5), (11, 0.3, -0.7), (2, 0.5, 0.0)] {
        let params = BoundParams::new(p, eps).unwrap().with_o1(o1);
        let (n0, x0) = find_n0(&params);
        let (n, x) = golden_max_x0(&params, 0.0, 2.0 * n0.ln().max(1.0) + 5.0, 1e-12);
        // the maximum value is resolved far better than its location
        assert!(rel(x, x0) < 1e-9, "p={p} eps={eps}: {x} vs {x0}");
        assert!(rel(n, n0) < 1e-6, "p={p} eps={eps}: {n} vs {n0}");
        assert!(X0_of_N(n0 * 0.9, &params) < x0);
        assert!(X0_of_N(n0 * 1.1, &params) < x0);
    }
}

#[test]
fn n0_trivial_case() {
    let p = 5u64;
    let params = BoundParams::new(p, 2.0 * (p as f64).ln()).unwrap();
    assert!((find_n0(&params).0 - 1.0).abs() < 1e-12);
    assert!((X0_of_N(1.0, &params) - 4.0 * 5f64.ln()).abs() < 1e-12);
    assert!(X0_of_N(1e30, &params) < 0.0);
}

#[test]
fn x_limits_and_monotonicity() {
    for p in [2u64, 3, 7] {
        for n in [2.0, 10.0, 1000.0] {
            let params = BoundParams::new(p, 1e-12).unwrap();
            let x = X_of_N(n, &params, 0.0);
            assert!((x - (n - 1.0) * (p as f64).ln()).abs() < 1e-6);
            let mut last = f64::INFINITY;
            for eps in [0.01, 0.05, 0.1, 0.5, 1.0] {
                let x = X_of_N(n, &BoundParams::new(p, eps).unwrap(), 3.0);
                assert!(x < last);
                last = x;
            }
        }
    }
    let params = BoundParams::new(3, 0.1).unwrap();
    let (a, b) = x_of_n_forms(10.0, &params, 0.0);
    assert!((a - b).abs() <= 1e-12 * a.abs());
}

#[test]
fn c_variant_shifts_exponent() {
    let base = BoundParams::new(3, 0.1).unwrap();
    let shifted = base.with_c(0.2).unwrap();
    assert!((X_of_N(50.0, &shifted, 0.0) - X_of_N(50.0, &BoundParams::new(3, 0.1 + 0.2).unwrap(), 0.0)).abs() < 1e-9);
    assert!(base.with_c(1.5).is_err());
    assert!(BoundParams::new(4, 0.1).is_err());
    assert!(BoundParams::new(3, 0.0).is_err());
}

#[test]
fn dual_forms_agree_on_random_inputs() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let primes = [2u64, 3, 5, 7, 11, 13];
    for _ in 0..10_000 {
        let p = primes[rng.gen_range(0..primes.len())];
        let n = 10f64.powf(rng.gen_range(0.31..12.0));
        let eps = 10f64.powf(rng.gen_range(-3.0..0.0));
        let delta = (rng.gen_range(0.0..=1.0) * (p as f64 - 2.0).max(0.0) * (n - 1.0)).floor();
        let o1 = rng.gen_range(-5.0..5.0);
        let params = BoundParams::new(p, eps).unwrap().with_o1(o1);
        let (a, b) = x_of_n_forms(n, &params, delta);
        let scale = n * (1.0 + n.ln()) * p as f64 * (1.0 + o1.abs());
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3 * scale), "p={p} N={n} eps={eps}: {a} vs {b}");
    }
}

#[test]
fn y0_examples() {
    let params = BoundParams::new(3, 5.0).unwrap();
    assert!(Y0_lower(100.0, &params, 0.0, 1.0) < -1000.0);
    let y = Y0_lower(100.0, &BoundParams::new(3, 0.05).unwrap(), 0.0, 1.0);
    assert!(y.is_finite());
    // (99) log 3 - 0.05 (2 * 100 log 100 + 100 (2 log 2 - 2) + log 100)
    let oracle = 99.0 * 3f64.ln() - 0.05 * (200.0 * 100f64.ln() + 100.0 * (2.0 * 2f64.ln() - 2.0) + 100f64.ln());
    assert!((y - oracle).abs() < 1e-9);
}

#[test]
fn ceiling_dominates_floor() {
    for p in [3u64, 5, 7, 11] {
        for eps in [0.01, 0.1, 0.5] {
            for n in [2.0, 5.0, 30.0, 1e3, 1e6, 1e12] {
                let params = BoundParams::new(p, eps).unwrap();
                let delta = (p as f64 - 2.0) * (n - 1.0);
                let r = bound_report(n, &params, delta, 10.0);
                assert!(r.X >= r.Y0_lower, "p={p} eps={eps} N={n}");
                assert_eq!(r.logC_required, r.X.max(0.0));
            }
        }
    }
}

#[test]
fn stirling_examples() {
    assert_eq!(stirling_log_factorial(1).0, 0.0);
    assert!((stirling_log_factorial(10).0 - 3628800f64.ln()).abs() < 1e-12);
    assert!((stirling_log_factorial(10).0 - 15.104413).abs() < 1e-6);
    let (v, err) = stirling_log_factorial(10_000_000);
    assert!(v > 0.0 && err < 1e-6);
}

#[test]
fn stirling_series_within_bound() {
    let mut direct = 0.0f64;
    let mut comp = 0.0f64;
    for k in 2u64..=1_000_000 {
        let y = (k as f64).ln() - comp;
        let t = direct + y;
        comp = (t - direct) - y;
        direct = t;
        if k < 50 || k % 9973 == 0 || k == 1_000_000 {
            let (s, bound) = stirling_series(k);
            let sum_err = 4.0 * f64::EPSILON * direct;
            assert!((s - direct).abs() <= bound + sum_err, "N={k}: {s} vs {direct}");
        }
    }
    assert_eq!(direct, log_factorial_sum(1_000_000));
}

#[test]
fn log_sqrt_disc_examples() {
    assert!((log_sqrt_disc(7, 3) - 7f64.ln()).abs() < 1e-15);
    assert!((log_sqrt_disc(1983163, 3) - 14.5002).abs() < 5e-5);
    assert!((log_sqrt_disc(105, 2) - 0.5 * 105f64.ln()).abs() < 1e-15);
}

#[test]
fn h_eps_examples() {
    let d = -1983163i128;
    assert!((h_eps_threshold(d, 3, 1.0, 0.2).unwrap() - (1983163f64.sqrt()).powf(0.2)).abs() < 1e-9);
    // choose ε with (√|D|)^ε = p^(N-1)
    let eps = 4.0 * 3f64.ln() / (0.5 * 1983163f64.ln());
    assert!((h_eps_threshold(d, 3, 5.0, eps).unwrap() - 1.0).abs() < 1e-12);
    assert!(h_eps_threshold(2, 3, 1.0, 0.1).is_err());
    let mut last = 0.0;
    for d in [3i128, 10, 1000, 10i128.pow(9), 10i128.pow(20)] {
        let h = h_eps_threshold(-d, 3, 4.0, 0.1).unwrap();
        assert!(h > last);
        last = h;
    }
}

/// Along the lower conductors the increments of `log h_ε` are
/// `ε log l'_N - log p`, which grow without bound. At `ε = 0.01` they are
/// still negative for `N <= 10^4`; at `ε = 0.5` they turn positive early.
#[test]
fn h_eps_along_family() {
    let ls = family_lower_log_sqrt(3, 10_000);
    for eps in [0.01, 0.5] {
        let logs: Vec<f64> = ls.iter().enumerate().map(|(i, &l)| log_h_eps(l, 3, (i + 1) as f64, eps)).collect();
        let inc: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(inc.windows(2).skip(2).all(|w| w[1] >= w[0]), "eps={eps}");
        if eps == 0.5 {
            let turn = inc.iter().position(|&x| x > 0.0).unwrap();
            assert!(logs[9999] > logs[turn] + 1000.0);
        }
    }
}

#[test]
fn envelope_examples() {
    let empty = envelope_report(&[], 3, 0.05, Quantity::ClassPPart);
    assert_eq!(empty.envelope, f64::NEG_INFINITY);
    assert!(empty.rows.is_empty());

    // successive maxima of the 3-class number
    let rows: [(i128, u128, f64); 9] = [
        (-23, 3, 0.70075861284442195),
        (-199, 9, 0.83019007976763599),
        (-983, 27, 0.95661698654993162),
        (-3671, 81, 1.07074359233325762),
        (-29399, 243, 1.06778367209896382),
        (-178559, 729, 1.09019287826209803),
        (-2102999, 2187, 1.05643959875714456),
        (-14868719, 6561, 1.06436822551851828),
        (-98311919, 19683, 1.07451592116950263),
    ];
    let points: Vec<EnvelopePoint> =
        rows.iter().map(|&(d, h, _)| EnvelopePoint { d, vp: epsclass::arith::valuation(h, 3) }).collect();
    let rep = envelope_report(&points, 3, 0.05, Quantity::ClassPPart);
    for (row, &(_, _, c)) in rep.rows.iter().zip(&rows) {
        assert!(rel(row.cp, c) < 1e-12, "D={}", row.d);
    }
    assert!(rep.rows.windows(2).all(|w| w[1].envelope > w[0].envelope));
    assert_eq!(rep.envelope, rep.rows.last().unwrap().excess);
}

#[test]
fn torsion_envelope_matches_c_tilde() {
    let cfg = ClassGroupConfig::default();
    let reports: Vec<_> = [-15i128, 105, -1155, -15015]
        .iter()
        .map(|&m| tor_report(&fundamental_discriminant(m).unwrap(), 2, &cfg).unwrap())
        .collect();
    let points: Vec<_> = reports.iter().map(|r| EnvelopePoint::from_torsion(r, Quantity::Torsion)).collect();
    let env = envelope_report(&points, 2, 0.1, Quantity::Torsion);
    for (row, r) in env.rows.iter().zip(&reports) {
        assert!((row.cp - r.c_tilde).abs() <= 1e-15 * r.c_tilde.abs().max(1.0));
    }
}

proptest! {
    #[test]
    fn x0_maximum_is_strict(p in prop::sample::select(vec![2u64, 3, 5, 7, 11]), eps in 0.02f64..2.0, o1 in -2.0f64..2.0, s in 0.01f64..0.5) {
        let params = BoundParams::new(p, eps).unwrap().with_o1(o1);
        let (n0, x0) = find_n0(&params);
        prop_assert!(X0_of_N(n0 * (1.0 + s), &params) < x0);
        prop_assert!(X0_of_N(n0 * (1.0 - s), &params) < x0);
    }

    #[test]
    fn h_eps_monotone_in_d(a in 3u64..u64::MAX / 2, b in 1u64..1000, n in 1.0f64..50.0, eps in 0.001f64..1.0) {
        let lo = h_eps_threshold(-(a as i128), 5, n, eps).unwrap();
        let hi = h_eps_threshold(-(a as i128) * b as i128 - 1, 5, n, eps).unwrap();
        prop_assert!(hi >= lo);
    }
}
