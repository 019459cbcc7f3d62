//! Exact arithmetic in `Q` and in `Q[pi^2]`.
//!
//! Every exact quantity produced by the engine lives in `Q[pi^2]`: the
//! complex shifts by `2*pi*i` only ever contribute even powers
//! `(2*pi*i)^(2j) = (-4*pi^2)^j`, and the trigonometric kernels used by the
//! Laplace-side identities expand with coefficients of the same shape.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary precision rational number in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Builds `p/q` from machine integers. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Canonical text form `"p/q"`; integers keep the explicit `/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("invalid rational {s:?}"));
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// `n!` as a rational.
pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    Rational::from_integer(acc)
}

/// Binomial coefficient `C(n, k)` as a rational.
pub fn binomial(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    Rational::from_integer(acc)
}

/// Element of `Q[pi^2]`: `coeffs[k]` multiplies `(pi^2)^k`.
///
/// Trailing zero coefficients are always trimmed, so the zero element has an
/// empty coefficient vector and structural equality is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RingElem {
    coeffs: Vec<Rational>,
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self::from_coeffs(vec![r])
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(int(n))
    }

    /// `(pi^2)^k`.
    pub fn pi2_pow(k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = Rational::one();
        RingElem { coeffs }
    }

    /// `(-4*pi^2)^j`, the value of `(2*pi*i)^(2j)`.
    pub fn two_pi_i_even_pow(j: usize) -> Self {
        let mut c = Rational::one();
        for _ in 0..j {
            c *= int(-4);
        }
        Self::pi2_pow(j).scale(&c)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RingElem { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `(pi^2)^k`.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when the element has no `pi^2` component.
    pub fn is_rational(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeff(0))
    }

    /// Degree in `pi^2`; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        RingElem {
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Division by a nonzero rational scalar; the only division the ring
    /// supports.
    pub fn div_rational(&self, r: &Rational) -> Self {
        assert!(!r.is_zero(), "division of RingElem by zero");
        self.scale(&r.recip())
    }

    /// True when every `pi^2`-power coefficient is nonnegative.
    pub fn all_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Lowest common denominator of all coefficients.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Quick double precision evaluation.
    pub fn to_f64(&self) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * pi2 + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Rational approximation of the value with relative error below
    /// `10^(1 - digits)`.
    ///
    /// `pi` is enclosed in a rational interval and the element is evaluated
    /// with interval arithmetic; the working precision grows until the
    /// enclosure is narrow enough.
    pub fn approx(&self, digits: u32) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        let target = pow10_recip(digits.saturating_sub(1)) / int(10);
        let mut work = digits + 10;
        loop {
            let (pi_lo, pi_hi) = pi_enclosure(work);
            let (lo2, hi2) = (&pi_lo * &pi_lo, &pi_hi * &pi_hi);
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            let mut p_lo = Rational::one();
            let mut p_hi = Rational::one();
            for c in &self.coeffs {
                if c.is_negative() {
                    lo += c * &p_hi;
                    hi += c * &p_lo;
                } else {
                    lo += c * &p_lo;
                    hi += c * &p_hi;
                }
                p_lo *= &lo2;
                p_hi *= &hi2;
            }
            let mid = (&lo + &hi) / int(2);
            let width = &hi - &lo;
            if width <= &target * mid.abs() {
                return mid;
            }
            work += 20;
        }
    }

    /// Floating point value computed through [`RingElem::approx`]; the
    /// result carries at most double precision.
    pub fn eval_float(&self, digits: u32) -> f64 {
        assert!(digits >= 15, "precision must be at least 15 digits");
        self.approx(digits).to_f64().unwrap_or(f64::NAN)
    }
}

fn pow10_recip(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(10u32).pow(k))
}

/// `atan(1/x) * scale`, truncated; error at most one unit per series term.
fn atan_recip_scaled(x: u32, scale: &BigInt) -> (BigInt, u32) {
    let x2 = BigInt::from(x) * x;
    let mut power = scale / x;
    let mut sum = BigInt::zero();
    let mut k = 0u32;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    (sum, k + 1)
}

/// Rational interval `[lo, hi]` containing `pi` with width about
/// `10^(-digits)`. Uses Machin's formula in fixed point.
fn pi_enclosure(digits: u32) -> (Rational, Rational) {
    let guard = 10;
    let scale = BigInt::from(10u32).pow(digits + guard);
    let (a, na) = atan_recip_scaled(5, &scale);
    let (b, nb) = atan_recip_scaled(239, &scale);
    let approx = a * 16 - b * 4;
    let slack = BigInt::from(16 * na + 4 * nb + 8);
    let lo = Rational::new(&approx - &slack, scale.clone());
    let hi = Rational::new(approx + slack, scale);
    (lo, hi)
}

impl fmt::Display for RingElem {
    /// Human form such as `1/48 + 1/12*pi^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "pi^{}", 2 * k)?;
                }
            }
        }
        Ok(())
    }
}

impl Serialize for RingElem {
    /// Canonical form: `[[k, "p/q"], ...]` meaning `sum (p/q) * pi^(2k)`.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(usize, String)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, format_rational(c)))
            .collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(usize, String)> = Vec::deserialize(d)?;
        let mut out = RingElem::zero();
        for (k, text) in pairs {
            let c = parse_rational(&text).map_err(D::Error::custom)?;
            out += RingElem::pi2_pow(k).scale(&c);
        }
        Ok(out)
    }
}

impl From<Rational> for RingElem {
    fn from(r: Rational) -> Self {
        RingElem::from_rational(r)
    }
}

impl AddAssign<&RingElem> for RingElem {
    fn add_assign(&mut self, rhs: &RingElem) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }
}

impl AddAssign for RingElem {
    fn add_assign(&mut self, rhs: RingElem) {
        *self += &rhs;
    }
}

impl SubAssign<&RingElem> for RingElem {
    fn sub_assign(&mut self, rhs: &RingElem) {
        *self += &(-rhs);
    }
}

impl SubAssign for RingElem {
    fn sub_assign(&mut self, rhs: RingElem) {
        *self -= &rhs;
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for RingElem {
    type Output = RingElem;
    fn add(mut self, rhs: RingElem) -> RingElem {
        self += &rhs;
        self
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for RingElem {
    type Output = RingElem;
    fn sub(mut self, rhs: RingElem) -> RingElem {
        self -= &rhs;
        self
    }
}

impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        if self.is_zero() || rhs.is_zero() {
            return RingElem::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        RingElem::from_coeffs(coeffs)
    }
}

impl Mul for RingElem {
    type Output = RingElem;
    fn mul(self, rhs: RingElem) -> RingElem {
        &self * &rhs
    }
}

impl MulAssign<&RingElem> for RingElem {
    fn mul_assign(&mut self, rhs: &RingElem) {
        *self = &*self * rhs;
    }
}
