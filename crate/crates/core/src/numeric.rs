//! Floating-point cross-checks: quadrature of the kernel recursions against
//! the exact volumes, and the series expansions behind the transformed
//! recursions.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laplace::csc_hol_coefficients;
use crate::poly::{FloatPoly, MultiPoly};
use crate::recursion::{is_stable, ordered_splits, without, VolumeKey, VolumeTable};
use crate::verdict::Verdict;

/// Logistic term `1/(1+e^z)`, stable for large `|z|`.
fn logistic(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `H(x, L) = 1/(1 + e^((x+L)/2)) + 1/(1 + e^((x-L)/2))`.
pub fn eval_h(x: f64, l: f64) -> f64 {
    logistic((x + l) / 2.0) + logistic((x - l) / 2.0)
}

/// `H^su(x, L) = (sech((x+L)/4) - sech((x-L)/4)) / 2`.
pub fn eval_hsu(x: f64, l: f64) -> f64 {
    0.5 * (sech((x + l) / 4.0) - sech((x - l) / 4.0))
}

/// Settings for [`quad_semi_infinite`].
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureConfig {
    /// Fixed cutoff; `None` picks one from the decay bound.
    pub cutoff: Option<f64>,
    /// Initial number of equal panels on `[0, X]`.
    pub panels: usize,
    /// Panel budget before giving up.
    pub max_panels: usize,
    /// Target relative error.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            cutoff: None,
            panels: 16,
            max_panels: 4000,
            tol: 1e-13,
        }
    }
}

/// Envelope `|f(u)| <= prefactor * bound(u) * exp(-rate (u - shift))`, where
/// `bound` is nondecreasing and grows at most like `u^degree`.
pub struct Decay<'a> {
    pub prefactor: f64,
    pub rate: f64,
    pub shift: f64,
    pub degree: u32,
    pub bound: Box<dyn Fn(f64) -> f64 + 'a>,
}

impl Decay<'_> {
    pub fn exponential(rate: f64) -> Self {
        Decay {
            prefactor: 1.0,
            rate,
            shift: 0.0,
            degree: 0,
            bound: Box::new(|_| 1.0),
        }
    }

    /// Upper bound on the integral over `[x, inf)`; valid once
    /// `x >= 2 degree / rate`.
    pub fn tail(&self, x: f64) -> f64 {
        let x = x.max(self.min_cutoff());
        self.prefactor * (self.bound)(x) * (-self.rate * (x - self.shift)).exp() * 2.0 / self.rate
    }

    fn min_cutoff(&self) -> f64 {
        2.0 * self.degree as f64 / self.rate
    }
}

/// Value of an integral with an error estimate that includes the tail.
#[derive(Clone, Debug, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub cutoff: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

struct Rules {
    lo: GaussLegendre,
    hi: GaussLegendre,
}

impl Rules {
    fn new() -> Self {
        Rules {
            lo: GaussLegendre::new(NonZeroUsize::new(7).unwrap()),
            hi: GaussLegendre::new(NonZeroUsize::new(15).unwrap()),
        }
    }

    fn panel(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Panel {
        let hi = self.hi.integrate(a, b, &mut *f);
        let lo = self.lo.integrate(a, b, &mut *f);
        Panel {
            a,
            b,
            value: hi,
            error: (hi - lo).abs(),
        }
    }
}

/// Globally adaptive integration on `[a, b]`.
pub fn quad_interval(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let rules = Rules::new();
    let n = cfg.panels.max(1);
    let h = (b - a) / n as f64;
    let mut heap: BinaryHeap<Panel> = (0..n)
        .map(|i| rules.panel(&mut f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .collect();
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let scale: f64 = heap.iter().map(|p| p.value.abs()).sum();
        if error <= cfg.tol * scale.max(f64::MIN_POSITIVE) || error == 0.0 {
            return Ok(QuadResult {
                value,
                error,
                cutoff: b,
                panels: heap.len(),
            });
        }
        if heap.len() >= cfg.max_panels {
            return Err(Error::Quadrature(format!(
                "{} panels, error {error:e} against {value:e}",
                heap.len()
            )));
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(rules.panel(&mut f, worst.a, mid));
        heap.push(rules.panel(&mut f, mid, worst.b));
    }
}

/// Adaptive integration over `[0, inf)` for an exponentially decaying
/// integrand. The cutoff is raised until the tail bound is below `1e-16`
/// of the estimate; the tail bound is added to the reported error.
pub fn quad_semi_infinite(
    mut f: impl FnMut(f64) -> f64,
    decay: &Decay<'_>,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    const MAX_CUTOFF: f64 = 4000.0;
    let mut x = cfg
        .cutoff
        .unwrap_or_else(|| decay.min_cutoff().max(decay.shift + 20.0 / decay.rate));
    let mut res = quad_interval(&mut f, 0.0, x, cfg)?;
    if cfg.cutoff.is_none() {
        let target = 1e-16 * res.value.abs().max(res.error);
        let mut grown = x;
        while decay.tail(grown) > target && grown < MAX_CUTOFF {
            grown += 10.0 / decay.rate;
        }
        if grown > x {
            x = grown;
            res = quad_interval(&mut f, 0.0, x, cfg)?;
        }
    }
    res.error += decay.tail(x);
    res.cutoff = x;
    Ok(res)
}

/// One evaluation point of a numeric recursion check.
#[derive(Clone, Debug, Serialize)]
pub struct NumericSample {
    pub l: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub quad_error: f64,
    pub pass: bool,
}

/// Per-key report of a numeric recursion check.
#[derive(Clone, Debug, Serialize)]
pub struct NumericReport {
    pub key: String,
    pub tol: f64,
    pub samples: Vec<NumericSample>,
    pub status: Verdict,
}

impl NumericReport {
    pub fn pass(&self) -> bool {
        self.status.is_pass()
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Three generic, pairwise distinct sample points in `n` variables.
pub fn default_samples(n: usize) -> Vec<Vec<f64>> {
    (0..3)
        .map(|k| {
            (0..n)
                .map(|i| 0.6 + 0.55 * ((3 * i + 2 * k) % 7) as f64 + 0.13 * k as f64)
                .collect()
        })
        .collect()
}

fn abs_bound(p: &FloatPoly, pt: &[f64]) -> f64 {
    let v: Vec<f64> = pt.iter().map(|x| x.abs()).collect();
    p.eval_abs(&v)
}

struct Kernel {
    eval: fn(f64, f64) -> f64,
    rate: f64,
    c_pair: f64,
    c_lower: f64,
}

const ORDINARY: Kernel = Kernel {
    eval: eval_h,
    rate: 0.5,
    c_pair: 0.5,
    c_lower: 0.5,
};

const SUPER: Kernel = Kernel {
    eval: eval_hsu,
    rate: 0.25,
    c_pair: 0.5,
    c_lower: 1.0,
};

/// Polynomials entering the kernel recursion for `(g, n)`.
struct RhsPieces {
    /// `(V_{g-1,n+1}(x, y, L2..))`, if present.
    first: Option<FloatPoly>,
    /// `(V1(x, L_I), I, V2(y, L_J), J)` with `I, J` slots into `L`.
    splits: Vec<(FloatPoly, Vec<usize>, FloatPoly, Vec<usize>)>,
    /// `(j, V_{g,n-1}(x, L without j))`.
    lower: Vec<(usize, FloatPoly)>,
    degree: u32,
}

impl RhsPieces {
    fn gather(key: VolumeKey, table: &VolumeTable) -> Result<Self> {
        let (g, n, sup) = (key.g, key.n, key.sup);
        let k = |g, n| VolumeKey { g, n, sup };
        let mut degree = 0u32;
        let mut fl = |p: &MultiPoly| {
            degree = degree.max(p.total_degree().unwrap_or(0));
            p.to_float()
        };
        let first = if g >= 1 && is_stable(g - 1, n + 1) && !(sup && g == 1) {
            let v = table.ensure(k(g - 1, n + 1))?;
            Some(fl(&v))
        } else {
            None
        };
        let mut splits = Vec::new();
        for s in ordered_splits(g, n, sup) {
            let va = table.ensure(k(s.g1, s.left.len() + 1))?;
            let vb = table.ensure(k(s.g2, s.right.len() + 1))?;
            let (a, b) = (fl(&va), fl(&vb));
            splits.push((a, s.left, b, s.right));
        }
        let mut lower = Vec::new();
        if n >= 2 && is_stable(g, n - 1) && !(sup && g == 0) {
            let v = table.ensure(k(g, n - 1))?;
            let v = fl(&v);
            for j in 1..n {
                lower.push((j, v.clone()));
            }
        }
        Ok(RhsPieces {
            first,
            splits,
            lower,
            degree,
        })
    }
}

/// Right-hand side of the kernel recursion at `l`, by quadrature.
fn kernel_rhs(
    pieces: &RhsPieces,
    kernel: &Kernel,
    l: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let n = l.len();
    let inner = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let pick = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| l[i]).collect() };
    let spectators = pick(&(1..n).collect::<Vec<_>>());
    let split_args: Vec<(Vec<f64>, Vec<f64>)> = pieces
        .splits
        .iter()
        .map(|(_, i, _, j)| (pick(i), pick(j)))
        .collect();
    let lower_args: Vec<Vec<f64>> = pieces
        .lower
        .iter()
        .map(|(j, _)| pick(&without(n, *j)))
        .collect();
    let with_first = |x: f64, rest: &[f64]| -> Vec<f64> {
        std::iter::once(x).chain(rest.iter().copied()).collect()
    };

    // Polynomial factor multiplying K(u, L1), via u = x + y.
    let pair_factor = |u: f64, abs: bool| -> f64 {
        if pieces.first.is_none() && pieces.splits.is_empty() {
            return 0.0;
        }
        if abs {
            let mut b = 0.0;
            if let Some(p) = &pieces.first {
                let mut pt = vec![u, u];
                pt.extend(&spectators);
                b += abs_bound(p, &pt);
            }
            for ((p1, _, p2, _), (a1, a2)) in pieces.splits.iter().zip(&split_args) {
                b += abs_bound(p1, &with_first(u, a1)) * abs_bound(p2, &with_first(u, a2));
            }
            return kernel.c_pair * b * u.powi(3) / 6.0;
        }
        let val = inner.integrate(0.0, u, |x| {
            let y = u - x;
            let mut s = 0.0;
            if let Some(p) = &pieces.first {
                let mut pt = vec![x, y];
                pt.extend(&spectators);
                s += p.eval(&pt);
            }
            for ((p1, _, p2, _), (a1, a2)) in pieces.splits.iter().zip(&split_args) {
                s += p1.eval(&with_first(x, a1)) * p2.eval(&with_first(y, a2));
            }
            s * x * y
        });
        kernel.c_pair * val
    };
    let lower_factor = |x: f64, i: usize, abs: bool| -> f64 {
        let (_, p) = &pieces.lower[i];
        let pt = with_first(x, &lower_args[i]);
        kernel.c_lower * x * if abs { abs_bound(p, &pt) } else { p.eval(&pt) }
    };

    let l1 = l[0];
    let integrand = |u: f64| -> f64 {
        let mut s = (kernel.eval)(u, l1) * pair_factor(u, false);
        for (i, (j, _)) in pieces.lower.iter().enumerate() {
            let lj = l[*j];
            s += lower_factor(u, i, false) * ((kernel.eval)(u, l1 + lj) + (kernel.eval)(u, l1 - lj));
        }
        s
    };
    let shift = pieces
        .lower
        .iter()
        .map(|(j, _)| l1.abs() + l[*j].abs())
        .fold(l1.abs(), f64::max);
    let decay = Decay {
        prefactor: 4.0,
        rate: kernel.rate,
        shift,
        degree: pieces.degree + 3,
        bound: Box::new(|u: f64| {
            let mut b = pair_factor(u, true);
            for i in 0..pieces.lower.len() {
                b += lower_factor(u, i, true);
            }
            b
        }),
    };
    quad_semi_infinite(integrand, &decay, cfg)
}

fn lhs_poly(candidate: &MultiPoly, sup: bool) -> Result<MultiPoly> {
    let l1v = candidate.mul_var_pow(0, 1);
    if sup {
        Ok(l1v)
    } else {
        l1v.differentiate(0)
    }
}

/// Numeric check of the kernel recursion for `key` with `candidate` in
/// place of the exact volume; lower volumes come from `table`.
pub fn check_candidate_numeric(
    key: VolumeKey,
    candidate: &MultiPoly,
    table: &VolumeTable,
    samples: &[Vec<f64>],
    tol: f64,
    cfg: &QuadratureConfig,
) -> Result<NumericReport> {
    if !is_stable(key.g, key.n) {
        return Err(Error::Unstable { g: key.g, n: key.n });
    }
    if (key.g, key.n) == (0, 3) || (key.g, key.n) == (1, 1) {
        return Ok(NumericReport {
            key: key.to_string(),
            tol,
            samples: Vec::new(),
            status: Verdict::skipped("base case"),
        });
    }
    let pieces = RhsPieces::gather(key, table)?;
    let kernel = if key.sup { &SUPER } else { &ORDINARY };
    let lhs = lhs_poly(candidate, key.sup)?.to_float();
    let lhs_scale = if key.sup { 4.0 * PI } else { 1.0 };
    let mut out = Vec::new();
    for l in samples {
        if l.len() != key.n {
            return Err(Error::NvarsMismatch(l.len(), key.n));
        }
        let left = lhs_scale * lhs.eval(l);
        let right = kernel_rhs(&pieces, kernel, l, cfg)?;
        let rel_err = relative_error(left, right.value);
        out.push(NumericSample {
            l: l.clone(),
            lhs: left,
            rhs: right.value,
            rel_err,
            quad_error: right.error,
            pass: rel_err <= tol,
        });
    }
    Ok(NumericReport {
        key: key.to_string(),
        tol,
        status: Verdict::from_bool(out.iter().all(|s| s.pass), || {
            let worst = out.iter().map(|s| s.rel_err).fold(0.0, f64::max);
            format!("relative error {worst:.2e} above {tol:e}")
        }),
        samples: out,
    })
}

/// `d/dL1 (L1 V_{g,n})` against quadrature of the kernel recursion with `H`.
pub fn check_original_recursion_numeric(
    g: u32,
    n: usize,
    samples: &[Vec<f64>],
    tol: f64,
    table: &VolumeTable,
) -> Result<NumericReport> {
    let key = VolumeKey::ordinary(g, n);
    let v = table.ensure(key)?;
    check_candidate_numeric(key, &v, table, samples, tol, &QuadratureConfig::default())
}

/// `4 pi L1 V^su_{g,n}` against quadrature of the kernel recursion with `H^su`.
pub fn check_super_recursion_numeric(
    g: u32,
    n: usize,
    samples: &[Vec<f64>],
    tol: f64,
    table: &VolumeTable,
) -> Result<NumericReport> {
    let key = VolumeKey::sup(g, n);
    let v = table.ensure(key)?;
    check_candidate_numeric(key, &v, table, samples, tol, &QuadratureConfig::default())
}

/// Series expansions checked numerically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AppendixCase {
    /// `int e^{-lt} / (1 + e^{(x+l)/2}) dl`
    A1a { x: f64, t: f64 },
    /// `int e^{-lt} / (1 + e^{(x-l)/2}) dl`
    A1b { x: f64, t: f64 },
    /// Double integral with kernel `1/(1 + e^{(x + s1 l1 + s2 l2)/2})`;
    /// `variant` 0..=3 selects the signs `(+,+), (-,+), (+,-), (-,-)`.
    A2 { variant: u8, x: f64, t1: f64, t2: f64 },
    /// Partial sum over `0 < |k| <= N` against the holomorphic part of
    /// `2 pi / (t^p sin 2 pi t)`.
    A3 { p: u32, t: f64 },
}

/// Outcome of one series check.
#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub case: AppendixCase,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

const POLE_GUARD: f64 = 1e-3;

fn guard_poles(t: f64) -> Result<()> {
    let pole = (2.0 * t).round() / 2.0;
    let distance = (t - pole).abs();
    if distance < POLE_GUARD {
        return Err(Error::PoleProximity { pole, distance });
    }
    Ok(())
}

fn alt(k: u64) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Checks one series identity with `terms` summands on the series side.
pub fn verify_appendix_series(case: AppendixCase, terms: u64, tol: f64) -> Result<AppendixReport> {
    let cfg = QuadratureConfig {
        tol: 1e-12,
        ..QuadratureConfig::default()
    };
    let series_tail = |x: f64| (-x * terms as f64 / 2.0).exp();
    let check_tail = |x: f64| -> Result<()> {
        if series_tail(x) > tol * 1e-3 {
            return Err(Error::Quadrature(format!(
                "{terms} terms leave a series tail of {:e}",
                series_tail(x)
            )));
        }
        Ok(())
    };
    let (lhs, rhs) = match case {
        AppendixCase::A1a { x, t } => {
            check_tail(x)?;
            let f = |l: f64| (-l * t).exp() * logistic((x + l) / 2.0);
            let q = quad_semi_infinite(f, &Decay::exponential(t + 0.5), &cfg)?;
            let s: f64 = (1..=terms)
                .map(|k| -alt(k) * (-x * k as f64 / 2.0).exp() / (t + k as f64 / 2.0))
                .sum();
            (q.value, s)
        }
        AppendixCase::A1b { x, t } => {
            guard_poles(t)?;
            check_tail(x)?;
            let f = |l: f64| (-l * t).exp() * logistic((x - l) / 2.0);
            let q = quad_semi_infinite(f, &Decay::exponential(t), &cfg)?;
            let s: f64 = (1..=terms)
                .map(|k| alt(k) * (-x * k as f64 / 2.0).exp() / (t - k as f64 / 2.0))
                .sum();
            (q.value, 2.0 * PI * (-t * x).exp() / (2.0 * PI * t).sin() - s)
        }
        AppendixCase::A2 { variant, x, t1, t2 } => {
            let (s1, s2) = match variant {
                0 => (1.0, 1.0),
                1 => (-1.0, 1.0),
                2 => (1.0, -1.0),
                3 => (-1.0, -1.0),
                _ => return Err(Error::Parse(format!("A2 variant {variant} not in 0..=3"))),
            };
            if s1 < 0.0 {
                guard_poles(t1)?;
            }
            if s2 < 0.0 {
                guard_poles(t2)?;
            }
            if variant == 3 && (t1 - t2).abs() < POLE_GUARD {
                return Err(Error::PoleProximity {
                    pole: t2,
                    distance: (t1 - t2).abs(),
                });
            }
            check_tail(x)?;
            let mut err = None;
            let outer = |l1: f64| -> f64 {
                let f = |l2: f64| (-l2 * t2).exp() * logistic((x + s1 * l1 + s2 * l2) / 2.0);
                match quad_semi_infinite(f, &Decay::exponential(t2), &cfg) {
                    Ok(r) => (-l1 * t1).exp() * r.value,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            };
            let mut decay = Decay::exponential(t1);
            decay.bound = Box::new(move |_| 1.0 / t2);
            let q = quad_semi_infinite(outer, &decay, &cfg)?;
            if let Some(e) = err {
                return Err(e);
            }
            let series: f64 = (1..=terms)
                .map(|k| {
                    let h = k as f64 / 2.0;
                    alt(k) * (-x * h).exp() / ((t1 + s1 * h) * (t2 + s2 * h))
                })
                .sum();
            let csc = |t: f64| 2.0 * PI * (-x * t).exp() / (2.0 * PI * t).sin();
            let closed = match variant {
                0 => 0.0,
                1 => csc(t1) / (t1 + t2),
                2 => csc(t2) / (t1 + t2),
                _ => (csc(t2) - csc(t1)) / (t1 - t2),
            };
            (q.value, closed - series)
        }
        AppendixCase::A3 { p, t } => {
            guard_poles(t)?;
            if t.abs() >= 0.5 {
                return Err(Error::Parse(format!(
                    "t = {t} outside the disc where the series converges"
                )));
            }
            let mut s = 0.0;
            for k in (1..=terms).rev() {
                let h = k as f64 / 2.0;
                let w = (2.0 / k as f64).powi(p as i32);
                let sign_p = if p % 2 == 0 { 1.0 } else { -1.0 };
                s += alt(k) * w * (1.0 / (t - h) + sign_p / (t + h));
            }
            let needed = (-36.0 / (2.0 * t.abs()).ln()).ceil() as usize + 1;
            let coeffs = csc_hol_coefficients(p, needed.clamp(8, 400));
            let hol: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
            (s, hol)
        }
    };
    let rel_err = relative_error(lhs, rhs);
    Ok(AppendixReport {
        case,
        lhs,
        rhs,
        rel_err,
        pass: rel_err <= tol,
    })
}

/// Parameter points used by the suites: five per lemma family.
pub fn appendix_cases() -> Vec<AppendixCase> {
    let xt = [(1.0, 0.3), (0.5, 0.7), (2.0, 1.2), (1.5, 0.15), (3.0, 2.35)];
    let mut out = Vec::new();
    for &(x, t) in &xt {
        out.push(AppendixCase::A1a { x, t });
    }
    for &(x, t) in &xt {
        out.push(AppendixCase::A1b { x, t });
    }
    let xtt = [
        (1.0, 0.3, 0.6),
        (0.8, 0.7, 0.4),
        (2.0, 1.2, 0.35),
        (1.5, 0.2, 0.9),
        (2.5, 0.65, 1.1),
    ];
    for variant in 0..4u8 {
        for &(x, t1, t2) in &xtt {
            out.push(AppendixCase::A2 { variant, x, t1, t2 });
        }
    }
    for (p, t) in [(1, 0.1), (2, 0.1), (3, 0.23), (4, -0.17), (5, 0.31), (2, 0.4)] {
        out.push(AppendixCase::A3 { p, t });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{rat, RingElem};

    #[test]
    fn kernel_values() {
        assert_eq!(eval_h(0.0, 0.0), 1.0);
        for (x, l) in [(0.3, 1.2), (2.0, -0.4), (5.0, 3.0)] {
            assert!((eval_h(x, l) - eval_h(x, -l)).abs() < 1e-15);
            assert!((eval_hsu(x, l) + eval_hsu(x, -l)).abs() < 1e-15);
            assert!(eval_hsu(x, 0.0).abs() < 1e-300);
        }
        assert!(eval_h(100.0, 1.0) < 1e-20);
        assert!(eval_h(1e6, 1.0) >= 0.0);
        assert_eq!(eval_hsu(0.0, 2.0), 0.0);
        assert!(eval_hsu(1.0, 0.5) < 0.0);
    }

    #[test]
    fn quadrature_examples() {
        let cfg = QuadratureConfig::default();
        let r = quad_semi_infinite(|x: f64| (-x).exp(), &Decay::exponential(1.0), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let mut d = Decay::exponential(0.5);
        d.degree = 1;
        d.bound = Box::new(|x| x);
        let r = quad_semi_infinite(|x: f64| x * (-x / 2.0).exp(), &d, &cfg).unwrap();
        assert!((r.value - 4.0).abs() < 1e-11);
    }

    fn first_moment(kernel: fn(f64, f64) -> f64, rate: f64, l: f64) -> f64 {
        let mut d = Decay::exponential(rate);
        d.prefactor = 2.0;
        d.shift = l.abs();
        d.degree = 1;
        d.bound = Box::new(|x| x);
        quad_semi_infinite(|x| x * kernel(x, l), &d, &QuadratureConfig::default())
            .unwrap()
            .value
    }

    #[test]
    fn kernel_moments_have_closed_forms() {
        for l in [0.5, 1.0, 2.0] {
            let h = first_moment(eval_h, 0.5, l);
            let want = l * l / 2.0 + 2.0 * PI * PI / 3.0;
            assert!(relative_error(h, want) < 1e-11, "{h} vs {want}");
            let s = first_moment(eval_hsu, 0.25, l);
            assert!(relative_error(s, -2.0 * PI * l) < 1e-11, "{s}");
        }
    }

    #[test]
    fn error_estimate_is_honest() {
        let f = |x: f64| x.powi(3) * eval_h(x, 2.0);
        let mut d = Decay::exponential(0.5);
        d.prefactor = 2.0;
        d.shift = 2.0;
        d.degree = 3;
        d.bound = Box::new(|x| x.powi(3));
        let coarse = QuadratureConfig {
            tol: 1e-8,
            ..Default::default()
        };
        let fine = QuadratureConfig {
            tol: 1e-8,
            panels: 32,
            ..Default::default()
        };
        let a = quad_semi_infinite(f, &d, &coarse).unwrap();
        let b = quad_semi_infinite(f, &d, &fine).unwrap();
        assert!((a.value - b.value).abs() <= a.error.max(b.error));
    }

    #[test]
    fn recursion_examples() {
        let tb = VolumeTable::new();
        let tol = 1e-8;
        let r = check_original_recursion_numeric(0, 4, &[vec![1.0, 2.0, 3.0, 4.0]], tol, &tb).unwrap();
        assert!(r.pass(), "{r:?}");
        let r = check_original_recursion_numeric(1, 2, &[vec![1.0, 1.0]], tol, &tb).unwrap();
        assert!(r.pass(), "{r:?}");
        let r = check_super_recursion_numeric(1, 2, &[vec![1.0, 2.0]], tol, &tb).unwrap();
        assert!(r.pass(), "{r:?}");
        assert!((r.samples[0].lhs + 4.0 * PI / 8.0).abs() < 1e-12);
        let r = check_super_recursion_numeric(2, 1, &[vec![1.0]], tol, &tb).unwrap();
        assert!(r.pass(), "{r:?}");
        let r = check_super_recursion_numeric(1, 3, &[vec![1.0, 2.0, 3.0]], tol, &tb).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn corrupted_volume_is_detected() {
        let tb = VolumeTable::new();
        let key = VolumeKey::ordinary(0, 4);
        let v = tb.ensure(key).unwrap();
        let mut bad = (*v).clone();
        bad.add_term(vec![0; 4], RingElem::one());
        let samples = [vec![1.0, 2.0, 3.0, 4.0]];
        let cfg = QuadratureConfig::default();
        let r = check_candidate_numeric(key, &bad, &tb, &samples, 1e-8, &cfg).unwrap();
        assert!(!r.pass());
        // every single coefficient, nudged by 1e-3
        for (e, _) in v.terms() {
            let mut m = (*v).clone();
            m.add_term(e.clone(), RingElem::from_rational(rat(1, 1000)));
            let r = check_candidate_numeric(key, &m, &tb, &samples, 1e-8, &cfg).unwrap();
            assert!(!r.pass(), "nudge at {e:?} went unnoticed");
        }
    }

    #[test]
    fn appendix_examples() {
        let r = verify_appendix_series(AppendixCase::A1a { x: 1.0, t: 0.3 }, 200, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        let r = verify_appendix_series(AppendixCase::A1b { x: 1.0, t: 0.3 }, 200, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        let r = verify_appendix_series(AppendixCase::A3 { p: 2, t: 0.1 }, 10_000, 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(matches!(
            verify_appendix_series(AppendixCase::A1b { x: 1.0, t: 0.5004 }, 200, 1e-6),
            Err(Error::PoleProximity { .. })
        ));
        assert!(verify_appendix_series(AppendixCase::A1a { x: 1.0, t: 0.3 }, 5, 1e-10).is_err());
    }

    #[test]
    fn double_integral_expansions() {
        for variant in 0..4 {
            let case = AppendixCase::A2 {
                variant,
                x: 1.0,
                t1: 0.3,
                t2: 0.6,
            };
            let r = verify_appendix_series(case, 200, 1e-6).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
}
