//! Identities read off the computed volumes: the leading-order recursion,
//! psi-class intersection numbers and the Virasoro (DVV) constraint, and
//! the relations obtained by evaluating at `L1 = 2 pi i`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{eval_at_2pi_i, MultiPoly, Parity};
use crate::recursion::{is_stable, rhs_with, VolumeKey, VolumeTable};
use crate::ring::{factorial, format_rational, int, Rational};
use crate::verdict::Verdict;

/// Index `(g; alpha_1..alpha_n)` of a top intersection number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IntersectionIndex {
    pub g: u32,
    pub alphas: Vec<u32>,
}

impl IntersectionIndex {
    pub fn new(g: u32, alphas: Vec<u32>) -> Self {
        IntersectionIndex { g, alphas }
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    /// `3g - 3 + n`, the degree a nonzero index must sum to.
    pub fn top_degree(&self) -> i64 {
        3 * self.g as i64 - 3 + self.n() as i64
    }

    fn is_top(&self) -> bool {
        self.alphas.iter().map(|&a| a as i64).sum::<i64>() == self.top_degree()
    }
}

fn is_base(g: u32, n: usize) -> bool {
    (g, n) == (0, 3) || (g, n) == (1, 1)
}

/// Homogeneous component of degree `6g - 6 + 2n`.
pub fn top_part(v: &MultiPoly, g: u32, n: usize) -> MultiPoly {
    v.homogeneous_part(6 * g + 2 * n as u32 - 6)
}

/// Exact check of the leading-order recursion: `d/dL1 (L1 V^M)` against the
/// polygon-integral right-hand side built from top parts only.
pub fn check_leading_recursion(g: u32, n: usize, table: &VolumeTable) -> Result<Verdict> {
    if is_base(g, n) {
        return Ok(Verdict::skipped("base case"));
    }
    let v = table.volume(g, n)?;
    let lhs = top_part(&v, g, n).mul_var_pow(0, 1).differentiate(0)?;
    let rhs = rhs_with(g, n, |key: VolumeKey| {
        let w = table.ensure(key)?;
        Ok(top_part(&w, key.g, key.n))
    })?;
    Ok(Verdict::from_bool(lhs == rhs, || {
        format!("leading-order sides differ: {lhs} vs {rhs}")
    }))
}

/// Every top intersection number `<tau_alpha>_g` with `n` points, keyed by
/// the ordered index. Coefficients of the top part must be free of `pi`.
pub fn intersection_numbers(
    g: u32,
    n: usize,
    table: &VolumeTable,
) -> Result<BTreeMap<IntersectionIndex, Rational>> {
    let v = table.volume(g, n)?;
    let top = top_part(&v, g, n);
    let mut out = BTreeMap::new();
    for (e, c) in top.terms() {
        let r = c.as_rational().ok_or_else(|| not_pi_free(c))?;
        let alphas: Vec<u32> = e.iter().map(|&k| k as u32 / 2).collect();
        out.insert(IntersectionIndex::new(g, alphas), weight(&r, e));
    }
    Ok(out)
}

fn not_pi_free(c: &crate::ring::RingElem) -> Error {
    Error::NotPiFree(c.to_string())
}

/// `coef * 2^(sum alpha) * prod alpha!` for the monomial with exponents `e`.
fn weight(coef: &Rational, e: &[u16]) -> Rational {
    let mut w = coef.clone();
    for &k in e {
        let a = k as u32 / 2;
        w *= factorial(a) * int(1i64 << a);
    }
    w
}

/// `<tau_alpha>_g`; zero off top degree, for unstable types and for
/// negative entries.
pub fn intersection(g: i64, alphas: &[i64], table: &VolumeTable) -> Result<Rational> {
    if g < 0 || alphas.iter().any(|&a| a < 0) || !is_stable(g as u32, alphas.len()) {
        return Ok(Rational::zero());
    }
    let idx = IntersectionIndex::new(g as u32, alphas.iter().map(|&a| a as u32).collect());
    if !idx.is_top() {
        return Ok(Rational::zero());
    }
    let v = table.volume(idx.g, idx.n())?;
    let e: Vec<u16> = idx.alphas.iter().map(|&a| 2 * a as u16).collect();
    let c = v.coeff(&e);
    let r = c.as_rational().ok_or_else(|| not_pi_free(&c))?;
    Ok(weight(&r, &e))
}

/// `(2k-1)!!` with `(-1)!! = 1`.
pub fn odd_double_factorial(k: i64) -> Rational {
    let mut acc = Rational::one();
    let mut m = 2 * k - 1;
    while m > 1 {
        acc *= int(m);
        m -= 2;
    }
    acc
}

/// Both sides of the Virasoro constraint for `<tau_{alpha_1} .. >_g`.
pub fn dvv_sides(g: u32, alphas: &[u32], table: &VolumeTable) -> Result<(Rational, Rational)> {
    let n = alphas.len();
    let a: Vec<i64> = alphas.iter().map(|&x| x as i64).collect();
    let idx = IntersectionIndex::new(g, alphas.to_vec());
    if !idx.is_top() {
        let got = alphas.iter().sum::<u32>();
        return Err(Error::NotTopDegree {
            got,
            want: idx.top_degree().max(0) as u32,
        });
    }
    let g = g as i64;
    let lhs = odd_double_factorial(a[0] + 1) * intersection(g, &a, table)?;
    let rest = &a[1..];
    let mut rhs = Rational::zero();
    let half = Rational::new(1.into(), 2.into());
    for nu in 0..=a[0] - 2 {
        let mu = a[0] - 2 - nu;
        if mu < 0 {
            continue;
        }
        let w = odd_double_factorial(nu + 1) * odd_double_factorial(mu + 1);
        let mut inner = {
            let mut idx = vec![mu, nu];
            idx.extend_from_slice(rest);
            intersection(g - 1, &idx, table)?
        };
        for mask in 0u32..(1 << rest.len()) {
            let (mut left, mut right) = (vec![nu], vec![mu]);
            for (b, &x) in rest.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    left.push(x);
                } else {
                    right.push(x);
                }
            }
            for g1 in 0..=g {
                inner += intersection(g1, &left, table)? * intersection(g - g1, &right, table)?;
            }
        }
        rhs += &half * w * inner;
    }
    for j in 1..n {
        let ratio = odd_double_factorial(a[0] + a[j]) / odd_double_factorial(a[j]);
        let mut idx = vec![a[0] + a[j] - 1];
        idx.extend(a[1..].iter().enumerate().filter(|&(k, _)| k + 1 != j).map(|(_, &x)| x));
        rhs += ratio * intersection(g, &idx, table)?;
    }
    Ok((lhs, rhs))
}

/// DVV check; skipped for the two base types, whose correlators seed the
/// constraint rather than follow from it.
pub fn check_dvv(g: u32, alphas: &[u32], table: &VolumeTable) -> Result<Verdict> {
    if alphas.is_empty() || !is_stable(g, alphas.len()) {
        return Err(Error::Unstable { g, n: alphas.len() });
    }
    if is_base(g, alphas.len()) {
        let idx = IntersectionIndex::new(g, alphas.to_vec());
        if !idx.is_top() {
            return Err(Error::NotTopDegree {
                got: alphas.iter().sum(),
                want: idx.top_degree() as u32,
            });
        }
        return Ok(Verdict::skipped("base correlator"));
    }
    let (lhs, rhs) = dvv_sides(g, alphas, table)?;
    Ok(Verdict::from_bool(lhs == rhs, || {
        format!(
            "lhs {} != rhs {}",
            format_rational(&lhs),
            format_rational(&rhs)
        )
    }))
}

/// All ordered top-degree indices for `(g, n)`.
pub fn top_indices(g: u32, n: usize) -> Vec<Vec<u32>> {
    let d = 3 * g as i64 - 3 + n as i64;
    if d < 0 || n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[pos] = a;
            rec(pos + 1, left - a, cur, out);
        }
    }
    rec(0, d as u32, &mut cur, &mut out);
    out
}

/// `int_0^{L_s} L_s P dL_s` taken monomially in slot `s`.
fn integrate_times_var(p: &MultiPoly, s: usize) -> MultiPoly {
    let mut out = MultiPoly::zero(p.nvars());
    for (e, c) in p.terms() {
        let mut e2 = e.clone();
        e2[s] += 2;
        out.add_term(e2, c.scale(&Rational::new(1.into(), (e[s] as i64 + 2).into())));
    }
    out
}

fn lower_pair(g: u32, n: usize, table: &VolumeTable) -> Result<Option<(MultiPoly, MultiPoly)>> {
    if n < 2 || !is_stable(g, n - 1) {
        return Ok(None);
    }
    let v = table.volume(g, n)?;
    let w = table.volume(g, n - 1)?;
    Ok(Some(((*v).clone(), (*w).clone())))
}

/// `V_{g,n}(2 pi i, L2..Ln) = sum_k int_0^{L_k} L_k V_{g,n-1}(L2..Ln) dL_k`.
pub fn check_do_norbury(g: u32, n: usize, table: &VolumeTable) -> Result<Verdict> {
    let Some((v, w)) = lower_pair(g, n, table)? else {
        return Ok(Verdict::skipped("needs n >= 2 and a stable (g, n-1)"));
    };
    let lhs = eval_at_2pi_i(&v, Parity::Even)?;
    let mut rhs = MultiPoly::zero(n - 1);
    for s in 0..n - 1 {
        rhs += &integrate_times_var(&w, s);
    }
    Ok(Verdict::from_bool(lhs == rhs, || format!("{lhs} vs {rhs}")))
}

/// `dV/dL1 (2 pi i, ..) / (2 pi i) = (2g - 3 + n) V_{g,n-1}`.
pub fn check_derivative_relation(g: u32, n: usize, table: &VolumeTable) -> Result<Verdict> {
    let Some((v, w)) = lower_pair(g, n, table)? else {
        return Ok(Verdict::skipped("needs n >= 2 and a stable (g, n-1)"));
    };
    let lhs = eval_at_2pi_i(&v.differentiate(0)?, Parity::Odd)?;
    let rhs = w.scale_rational(&int(2 * g as i64 - 3 + n as i64));
    Ok(Verdict::from_bool(lhs == rhs, || format!("{lhs} vs {rhs}")))
}

/// `d^2V/dL1^2 (2 pi i, ..) = sum_k d/dL_k (L_k V_{g,n-1}) - 2(2g-3+n) V_{g,n-1}`.
pub fn check_second_derivative(g: u32, n: usize, table: &VolumeTable) -> Result<Verdict> {
    let Some((v, w)) = lower_pair(g, n, table)? else {
        return Ok(Verdict::skipped("needs n >= 2 and a stable (g, n-1)"));
    };
    let lhs = eval_at_2pi_i(&v.differentiate(0)?.differentiate(0)?, Parity::Even)?;
    let mut rhs = w.scale_rational(&int(-2 * (2 * g as i64 - 3 + n as i64)));
    for s in 0..n - 1 {
        rhs += &w.mul_var_pow(s, 1).differentiate(s)?;
    }
    Ok(Verdict::from_bool(lhs == rhs, || format!("{lhs} vs {rhs}")))
}
