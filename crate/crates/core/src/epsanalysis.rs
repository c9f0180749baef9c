//! Analytic estimates for the family of cyclic degree `p` fields whose
//! conductor is a product of the first primes `≡ 1 (mod p)`, and envelopes
//! of scan data against `(√|D|)^ε`.
//!
//! `N` is a real number here: the interesting maxima sit near `10^16`.

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, primes_in_class};
use crate::error::{Error, Result};
use crate::group::AbelianGroupStructure;
use crate::pram::scan::TorScanRecord;
use crate::pram::TorsionReport;
use crate::quadclass::scan::ScanRecord;

/// Parameters shared by the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub p: u64,
    pub eps: f64,
    /// The bounded remainder collected into one constant.
    #[serde(rename = "O1")]
    pub o1: f64,
    /// `log((p-1)/2) - 1`.
    pub gamma_p: f64,
    /// Extra exponent `c` in `(√D)^(c+ε)`, if any.
    pub c: Option<f64>,
}

impl BoundParams {
    pub fn new(p: u64, eps: f64) -> Result<Self> {
        if !is_prime(p as u128) {
            return Err(Error::InvalidInput(format!("p={p} is not prime")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps={eps} must be positive")));
        }
        Ok(BoundParams { p, eps, o1: 0.0, gamma_p: gamma_p(p), c: None })
    }

    pub fn with_o1(mut self, o1: f64) -> Self {
        self.o1 = o1;
        self
    }

    pub fn with_c(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidInput(format!("c={c} must lie in (0,1)")));
        }
        self.c = Some(c);
        Ok(self)
    }

    /// The exponent of `√D` actually used: `c + ε`, or `ε`.
    pub fn exponent(&self) -> f64 {
        self.c.unwrap_or(0.0) + self.eps
    }

    fn half(&self) -> f64 {
        (self.p as f64 - 1.0) / 2.0
    }

    fn log_p(&self) -> f64 {
        (self.p as f64).ln()
    }
}

pub fn gamma_p(p: u64) -> f64 {
    ((p as f64 - 1.0) / 2.0).ln() - 1.0
}

/// The bounds evaluated at one `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BoundReport {
    pub N: f64,
    pub X: f64,
    pub X0: f64,
    pub Y0_lower: f64,
    /// The `log C` this `N` alone forces, `max(X, 0)`.
    pub logC_required: f64,
}

/// `log √D` for `D = f^(p-1)`.
pub fn log_sqrt_disc(f: u128, p: u64) -> f64 {
    (p as f64 - 1.0) / 2.0 * (f as f64).ln()
}

/// Both forms of `X(N)`: `(factored, expanded)`.
///
/// The factored form is `N [-ε (p-1)/2 log N + (Δ/N) log p + (1 - 1/N) log p - ε O1]`.
/// The expanded form keeps the `γ_p` and `(p-1)/4 log N` terms apart and puts
/// what is left of `N·O1` into its trailing constant.
#[allow(non_snake_case)]
pub fn x_of_n_forms(N: f64, params: &BoundParams, delta: f64) -> (f64, f64) {
    let e = params.exponent();
    let h = params.half();
    let lp = params.log_p();
    let ln = N.ln();
    let factored = N * (-e * h * ln + delta / N * lp + (1.0 - 1.0 / N) * lp - e * params.o1);
    let tail = N * params.o1 - h * N * params.gamma_p - h / 2.0 * ln;
    let expanded =
        N * lp + delta * lp - e * h * N * ln - lp - e * h * N * params.gamma_p - e * (h / 2.0) * ln - e * tail;
    (factored, expanded)
}

/// `X(N)` in factored form. Panics if the two forms disagree by more than
/// `1e-12 |X|` (plus a few ulps of the largest term).
#[allow(non_snake_case)]
pub fn X_of_N(N: f64, params: &BoundParams, delta: f64) -> f64 {
    let (x, y) = x_of_n_forms(N, params, delta);
    assert!(forms_agree(N, params, delta, x, y), "forms of X(N) disagree at N={N}: {x} vs {y}");
    x
}

fn forms_agree(n: f64, params: &BoundParams, delta: f64, x: f64, y: f64) -> bool {
    // the expanded form cancels terms of size ~ N log N
    let scale = n * (1.0 + n.ln()) * params.p as f64 * (1.0 + params.o1.abs()) + delta.abs() * params.log_p();
    (x - y).abs() <= 1e-12 * x.abs().max(scale * 1e-3) + 64.0 * f64::EPSILON * scale
}

/// `X0(N) = -ε (p-1)/2 N log N + N((p-1) log p - ε O1)`.
#[allow(non_snake_case)]
pub fn X0_of_N(N: f64, params: &BoundParams) -> f64 {
    let e = params.exponent();
    -e * params.half() * N * N.ln() + N * ((params.p as f64 - 1.0) * params.log_p() - e * params.o1)
}

/// The maximum `(N0, X0(N0))` of `X0`, from the vanishing derivative.
pub fn find_n0(params: &BoundParams) -> (f64, f64) {
    let e = params.exponent();
    let log_n0 = 2.0 * params.log_p() / e - 1.0 - 2.0 * params.o1 / (params.p as f64 - 1.0);
    let n0 = log_n0.exp();
    (n0, e * params.half() * n0)
}

/// Golden-section maximisation of `X0` over `log N ∈ [lo, hi]`, stopping
/// when the bracket is below `tol` in `log N`.
pub fn golden_max_x0(params: &BoundParams, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let f = |t: f64| X0_of_N(t.exp(), params);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t.exp(), f(t))
}

/// Lower bound for `log C`, with `γ''_p = log c_p + 2 log(p-1) - 2`.
#[allow(non_snake_case)]
pub fn Y0_lower(N: f64, params: &BoundParams, delta: f64, c_p: f64) -> f64 {
    let e = params.exponent();
    let h = params.half();
    let gamma2 = c_p.ln() + 2.0 * (params.p as f64 - 1.0).ln() - 2.0;
    (N - 1.0 + delta) * params.log_p()
        - e * (params.p as f64 - 1.0) * N * N.ln()
        - e * h * N * gamma2
        - e * h * N.ln()
        - e * params.o1
}

pub fn bound_report(n: f64, params: &BoundParams, delta: f64, c_p: f64) -> BoundReport {
    let x = X_of_N(n, params, delta);
    BoundReport {
        N: n,
        X: x,
        X0: X0_of_N(n, params),
        Y0_lower: Y0_lower(n, params, delta, c_p),
        logC_required: x.max(0.0),
    }
}

/// `log h_ε = ε log √|D| - (N-1) log p`.
pub fn log_h_eps(log_sqrt_d: f64, p: u64, n: f64, eps: f64) -> f64 {
    eps * log_sqrt_d - (n - 1.0) * (p as f64).ln()
}

/// `(√|D|)^ε / p^(N-1)`.
pub fn h_eps_threshold(d: i128, p: u64, n: f64, eps: f64) -> Result<f64> {
    if d.unsigned_abs() < 3 {
        return Err(Error::InvalidInput(format!("|D|={} must be at least 3", d.unsigned_abs())));
    }
    Ok(log_h_eps(0.5 * (d.unsigned_abs() as f64).ln(), p, n, eps).exp())
}

/// `log √D'_N` for the lower conductors `f'_N = ∏ ((p-1)/2) k log(l_k/p)`
/// built from the first `count` primes `l_k ≡ 1 (mod p)`, for `N = 1..=count`.
/// The factor with `l_k < e p` is replaced by 1.
pub fn family_lower_log_sqrt(p: u64, count: usize) -> Vec<f64> {
    let half = (p as f64 - 1.0) / 2.0;
    let mut acc = 0.0;
    primes_in_class(p, count)
        .primes
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let l_low = half * (i + 1) as f64 * (l as f64 / p as f64).ln();
            acc += half * l_low.max(1.0).ln();
            acc
        })
        .collect()
}

const EXACT_FACTORIAL_LIMIT: u64 = 1_000_000;

/// `log N!` with an absolute error bound: a compensated sum up to `10^6`,
/// the Stirling series beyond.
pub fn stirling_log_factorial(n: u64) -> (f64, f64) {
    if n <= EXACT_FACTORIAL_LIMIT {
        let v = log_factorial_sum(n);
        (v, 4.0 * f64::EPSILON * v.max(1.0))
    } else {
        stirling_series(n)
    }
}

/// Kahan-summed `Σ_{k<=n} log k`.
pub fn log_factorial_sum(n: u64) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for k in 2..=n {
        let y = (k as f64).ln() - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// `N log N - N + ½ log(2πN) + 1/(12N) - 1/(360N³)`, whose remainder is
/// below `1/(1260 N^5)`; the bound also covers rounding.
pub fn stirling_series(n: u64) -> (f64, f64) {
    let x = n as f64;
    let v = x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3));
    (v, 1.0 / (1260.0 * x.powi(5)) + 8.0 * f64::EPSILON * v.abs().max(1.0))
}

/// What the envelope measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    ClassPPart,
    Torsion,
}

/// One field: discriminant and `v_p` of the measured quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub d: i128,
    pub vp: u32,
}

impl EnvelopePoint {
    pub fn from_scan(r: &ScanRecord, p: u64) -> Self {
        EnvelopePoint { d: r.d, vp: crate::arith::valuation(r.h, p as u128) }
    }

    /// `None` for failed or negative rows.
    pub fn from_tor_scan(r: &TorScanRecord) -> Option<Self> {
        (r.error.is_none() && r.vptor >= 0).then(|| EnvelopePoint { d: r.d, vp: r.vptor as u32 })
    }

    pub fn from_torsion(r: &TorsionReport, quantity: Quantity) -> Self {
        let vp = match quantity {
            Quantity::Torsion => r.vp,
            Quantity::ClassPPart => r.class_p.v_p_order(r.p),
        };
        EnvelopePoint { d: r.d, vp }
    }

    pub fn from_structure(d: i128, g: &AbelianGroupStructure, p: u64) -> Self {
        EnvelopePoint { d, vp: g.v_p_order(p as u128) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub d: i128,
    pub vp: u32,
    /// `log(quantity) - ε log √|D|`.
    pub excess: f64,
    /// Running maximum of `excess`.
    pub envelope: f64,
    /// `log(quantity) / log √|D|`: `C_{K,p}`, or `C̃_{K,p}` for the torsion.
    pub cp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub p: u64,
    pub eps: f64,
    pub quantity: Quantity,
    pub rows: Vec<EnvelopeRow>,
    /// Final running maximum; `-∞` for no input.
    pub envelope: f64,
}

pub fn envelope_report(points: &[EnvelopePoint], p: u64, eps: f64, quantity: Quantity) -> EnvelopeReport {
    let lp = (p as f64).ln();
    let mut env = f64::NEG_INFINITY;
    let rows = points
        .iter()
        .map(|pt| {
            let ls = 0.5 * (pt.d.unsigned_abs() as f64).ln();
            let lq = pt.vp as f64 * lp;
            let excess = lq - eps * ls;
            env = env.max(excess);
            EnvelopeRow { d: pt.d, vp: pt.vp, excess, envelope: env, cp: lq / ls }
        })
        .collect();
    EnvelopeReport { p, eps, quantity, rows, envelope: env }
}
