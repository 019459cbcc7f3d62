//! Sparse multivariate polynomials in the boundary lengths over `Q[pi^2]`,
//! the complex-shift operators acting on the first variable, and the exact
//! integral rules used by both volume recursions.
//!
//! Variable slot `0` is always the distinguished length `L1`. Operators that
//! integrate out auxiliary variables document the slot layout they expect.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ring::{binomial, factorial, int, Rational, RingElem};

/// Exponent vector; one entry per variable.
pub type Exponents = Vec<u16>;

/// Sparse polynomial in `nvars` variables with [`RingElem`] coefficients.
///
/// No zero coefficients are stored and every exponent vector has length
/// `nvars`. Terms iterate in lexicographic exponent order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, RingElem>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: RingElem) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, RingElem::one())
    }

    /// The variable in slot `i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, RingElem::one())
    }

    pub fn monomial(exps: Exponents, c: RingElem) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &RingElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u16]) -> RingElem {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    /// Adds `c * x^exps`, dropping the entry if it cancels.
    pub fn add_term(&mut self, exps: Exponents, c: RingElem) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i >= self.nvars {
            return Err(Error::VariableOutOfRange {
                index: i,
                nvars: self.nvars,
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: &RingElem) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (e.clone(), v.scale(r)))
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch(self.nvars, other.nvars));
        }
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch(self.nvars, other.nvars));
        }
        Ok(self * other)
    }

    /// Partial derivative with respect to slot `i`.
    pub fn differentiate(&self, i: usize) -> Result<Self> {
        self.check_var(i)?;
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c.scale(&int(e[i] as i64)));
        }
        Ok(out)
    }

    /// Multiplies by `x_i^k`.
    pub fn mul_var_pow(&self, i: usize, k: u16) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2[i] += k;
                    (e2, c.clone())
                })
                .collect(),
        }
    }

    /// Exact division by `x_i`; fails if some term is constant in `x_i`.
    pub fn div_var(&self, i: usize) -> Result<Self> {
        self.check_var(i)?;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                return Err(Error::NotDivisible(format!(
                    "term {e:?} is not divisible by variable {i}"
                )));
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            terms.insert(e2, c.clone());
        }
        Ok(MultiPoly {
            nvars: self.nvars,
            terms,
        })
    }

    /// Replaces slot `i` by the polynomial `expr` (same variable space).
    pub fn substitute_var(&self, i: usize, expr: &MultiPoly) -> Result<Self> {
        self.check_var(i)?;
        if expr.nvars != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, expr.nvars));
        }
        let mut powers = vec![MultiPoly::one(self.nvars)];
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[i] as usize;
            while powers.len() <= k {
                let next = powers.last().unwrap() * expr;
                powers.push(next);
            }
            let mut rest = e.clone();
            rest[i] = 0;
            let base = MultiPoly::monomial(rest, c.clone());
            out += &(&base * &powers[k]);
        }
        Ok(out)
    }

    /// Moves the polynomial into a space with `new_nvars` variables, sending
    /// old slot `k` to new slot `map[k]`.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.nvars, "embedding map length");
        let mut out = Self::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u16; new_nvars];
            for (k, &x) in e.iter().enumerate() {
                e2[map[k]] += x;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Reorders variables: new slot `perm[k]` receives old slot `k`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        self.embed(self.nvars, perm)
    }

    /// Drops slot `i`, which must not occur in any term.
    pub fn remove_unused_var(&self, i: usize) -> Result<Self> {
        self.check_var(i)?;
        let mut out = Self::zero(self.nvars - 1);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                return Err(Error::Inconsistent(format!("variable {i} still occurs")));
            }
            let mut e2 = e.clone();
            e2.remove(i);
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    /// Highest exponent of slot `i`, `None` for the zero polynomial.
    pub fn degree_in(&self, i: usize) -> Option<u16> {
        self.terms.keys().map(|e| e[i]).max()
    }

    /// Total degree in the variables (powers of `pi^2` do not count).
    pub fn total_degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
    }

    /// Homogeneous component of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().map(|&x| x as u32).sum::<u32>() == d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn is_even_in(&self, i: usize) -> bool {
        self.terms.keys().all(|e| e[i] % 2 == 0)
    }

    pub fn is_odd_in(&self, i: usize) -> bool {
        self.terms.keys().all(|e| e[i] % 2 == 1)
    }

    /// Even in every variable.
    pub fn is_even(&self) -> bool {
        (0..self.nvars).all(|i| self.is_even_in(i))
    }

    /// Invariance under every permutation of the slots in `vars`; checked on
    /// a transposition and a full cycle, which generate the symmetric group.
    pub fn is_symmetric_in(&self, vars: &[usize]) -> bool {
        if vars.len() < 2 {
            return true;
        }
        let mut swap: Vec<usize> = (0..self.nvars).collect();
        swap.swap(vars[0], vars[1]);
        let mut cycle: Vec<usize> = (0..self.nvars).collect();
        for (k, &v) in vars.iter().enumerate() {
            cycle[v] = vars[(k + 1) % vars.len()];
        }
        &self.permute(&swap) == self && &self.permute(&cycle) == self
    }

    pub fn is_symmetric(&self) -> bool {
        let all: Vec<usize> = (0..self.nvars).collect();
        self.is_symmetric_in(&all)
    }

    /// Splits by the exponent of slot `i`; the returned coefficients keep the
    /// same variable space with slot `i` set to zero.
    pub fn coefficients_in(&self, i: usize) -> BTreeMap<u16, MultiPoly> {
        let mut out: BTreeMap<u16, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            rest[i] = 0;
            out.entry(e[i])
                .or_insert_with(|| MultiPoly::zero(self.nvars))
                .add_term(rest, c.clone());
        }
        out
    }

    /// Lowest common denominator over every rational coefficient.
    pub fn denominator_lcm(&self) -> num_bigint::BigInt {
        use num_integer::Integer;
        self.terms
            .values()
            .fold(num_bigint::BigInt::one(), |acc, c| {
                acc.lcm(&c.denominator_lcm())
            })
    }

    /// Double precision evaluator for quadrature.
    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.to_f64()))
                .collect(),
        }
    }
}

/// Double precision copy of a [`MultiPoly`] for pointwise evaluation.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    nvars: usize,
    terms: Vec<(Exponents, f64)>,
}

impl FloatPoly {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(*c, |acc, (&k, &x)| acc * x.powi(k as i32))
            })
            .sum()
    }

    /// Largest absolute term value at `point`; used as a cancellation scale.
    pub fn eval_abs(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(c.abs(), |acc, (&k, &x)| acc * x.abs().powi(k as i32))
            })
            .sum()
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in addition");
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), c.clone());
        }
    }
}

impl SubAssign<&MultiPoly> for MultiPoly {
    fn sub_assign(&mut self, rhs: &MultiPoly) {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in subtraction");
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), -c);
        }
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch in product");
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    /// Plain listing `c * L1^a * L2^b + ...`; see the CLI renderers for the
    /// normalized output formats.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| format!("L{}^{}", i + 1, k))
                    .collect();
                if mono.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Exponents,
    coef: RingElem,
}

impl Serialize for MultiPoly {
    /// `[{"exp":[..], "coef":[[k,"p/q"],..]}, ..]`, exponents sorted
    /// lexicographically.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(e, c)| TermJson {
                exp: e.clone(),
                coef: c.clone(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl MultiPoly {
    /// Parses the canonical term list; `nvars` disambiguates the empty list.
    pub fn from_json_terms(value: &serde_json::Value, nvars: usize) -> Result<Self> {
        let terms: Vec<TermJson> = serde_json::from_value(value.clone())?;
        let mut out = MultiPoly::zero(nvars);
        for t in terms {
            if t.exp.len() != nvars {
                return Err(Error::Parse(format!(
                    "exponent vector {:?} has wrong length, expected {nvars}",
                    t.exp
                )));
            }
            out.add_term(t.exp, t.coef);
        }
        Ok(out)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms: Vec<TermJson> = Vec::deserialize(d)?;
        let nvars = terms.first().map_or(0, |t| t.exp.len());
        let mut out = MultiPoly::zero(nvars);
        for t in terms {
            if t.exp.len() != nvars {
                return Err(D::Error::custom("ragged exponent vectors"));
            }
            out.add_term(t.exp, t.coef);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Complex-shift operators in slot 0.

fn minus_four_pi2_powers(n: usize) -> Vec<RingElem> {
    (0..=n).map(RingElem::two_pi_i_even_pow).collect()
}

/// `[P(L1 + 2 pi i) - P(L1 - 2 pi i)] / (4 pi i)` for any polynomial `P`,
/// written as the finite sum `sum_j P^(2j+1)(L1) (-4 pi^2)^j / (2j+1)!`.
pub fn shift_difference_any(p: &MultiPoly) -> MultiPoly {
    let top = p.degree_in(0).unwrap_or(0) as usize;
    let pw = minus_four_pi2_powers(top / 2 + 1);
    let mut out = MultiPoly::zero(p.nvars);
    for (e, c) in &p.terms {
        let k = e[0] as u32;
        let mut j = 0u32;
        while 2 * j < k {
            let coef = &pw[j as usize] * &c.scale(&binomial(k, 2 * j + 1));
            let mut e2 = e.clone();
            e2[0] = (k - 2 * j - 1) as u16;
            out.add_term(e2, coef);
            j += 1;
        }
    }
    out
}

/// `P(L1 + 2 pi i) + P(L1 - 2 pi i)` for any polynomial `P`, written as
/// `2 sum_j P^(2j)(L1) (-4 pi^2)^j / (2j)!`.
pub fn shift_sum_any(p: &MultiPoly) -> MultiPoly {
    let top = p.degree_in(0).unwrap_or(0) as usize;
    let pw = minus_four_pi2_powers(top / 2 + 1);
    let two = int(2);
    let mut out = MultiPoly::zero(p.nvars);
    for (e, c) in &p.terms {
        let k = e[0] as u32;
        let mut j = 0u32;
        while 2 * j <= k {
            let coef = &pw[j as usize] * &c.scale(&(&binomial(k, 2 * j) * &two));
            let mut e2 = e.clone();
            e2[0] = (k - 2 * j) as u16;
            out.add_term(e2, coef);
            j += 1;
        }
    }
    out
}

fn require_odd(q: &MultiPoly, what: &str) -> Result<()> {
    if q.nvars == 0 || !q.is_odd_in(0) {
        return Err(Error::Parity(format!("{what}: input must be odd in L1")));
    }
    Ok(())
}

/// Shift-difference operator on polynomials odd in `L1`; the result is even
/// in `L1` with degree lowered by one.
pub fn shift_diff_op(q: &MultiPoly) -> Result<MultiPoly> {
    if q.is_zero() {
        return Ok(q.clone());
    }
    require_odd(q, "shift_diff_op")?;
    Ok(shift_difference_any(q))
}

/// Shift-sum operator on polynomials odd in `L1`; the result stays odd with
/// leading term doubled.
pub fn shift_sum_op(q: &MultiPoly) -> Result<MultiPoly> {
    if q.is_zero() {
        return Ok(q.clone());
    }
    require_odd(q, "shift_sum_op")?;
    Ok(shift_sum_any(q))
}

/// Solves `shift_diff_op(Q) = R` for the unique `Q` odd in `L1`.
///
/// Back-substitution from the top `L1`-degree: `L1^(d+1)` maps to
/// `(d+1) L1^d` plus lower even powers. The forward operator is re-applied
/// at the end and must reproduce `R` exactly.
pub fn invert_shift_diff(r: &MultiPoly) -> Result<MultiPoly> {
    if r.nvars == 0 {
        return Err(Error::VariableOutOfRange { index: 0, nvars: 0 });
    }
    if !r.is_even_in(0) {
        return Err(Error::Parity(
            "invert_shift_diff: right-hand side must be even in L1".into(),
        ));
    }
    let mut residual = r.clone();
    let mut q = MultiPoly::zero(r.nvars);
    while let Some(d) = residual.degree_in(0) {
        let top = residual.coefficients_in(0).remove(&d).unwrap();
        let step = top
            .mul_var_pow(0, d + 1)
            .scale_rational(&Rational::new(1.into(), (d as i64 + 1).into()));
        residual -= &shift_difference_any(&step);
        if residual.degree_in(0) == Some(d) {
            return Err(Error::Inconsistent(format!(
                "leading L1^{d} term survived elimination"
            )));
        }
        q += &step;
    }
    if shift_diff_op(&q)? != *r {
        return Err(Error::Inconsistent(
            "shift_diff_op(Q) does not reproduce the right-hand side".into(),
        ));
    }
    Ok(q)
}

/// Solves `shift_sum_op(Q) = R` for the unique `Q` odd in `L1`.
pub fn invert_shift_sum(r: &MultiPoly) -> Result<MultiPoly> {
    if r.nvars == 0 {
        return Err(Error::VariableOutOfRange { index: 0, nvars: 0 });
    }
    if !r.is_odd_in(0) {
        return Err(Error::Parity(
            "invert_shift_sum: right-hand side must be odd in L1".into(),
        ));
    }
    let half = Rational::new(1.into(), 2.into());
    let mut residual = r.clone();
    let mut q = MultiPoly::zero(r.nvars);
    while let Some(d) = residual.degree_in(0) {
        let top = residual.coefficients_in(0).remove(&d).unwrap();
        let step = top.mul_var_pow(0, d).scale_rational(&half);
        residual -= &shift_sum_any(&step);
        if residual.degree_in(0) == Some(d) {
            return Err(Error::Inconsistent(format!(
                "leading L1^{d} term survived elimination"
            )));
        }
        q += &step;
    }
    if shift_sum_op(&q)? != *r {
        return Err(Error::Inconsistent(
            "shift_sum_op(Q) does not reproduce the right-hand side".into(),
        ));
    }
    Ok(q)
}

// ---------------------------------------------------------------------------
// Exact integral rules.

fn beta_coeff(p: u32, q: u32, extra: u32) -> Rational {
    // p! q! / (p + q + extra)!
    &(&factorial(p) * &factorial(q)) / &factorial(p + q + extra)
}

/// `iint_{x,y >= 0, x+y <= L1} P(x, y, rest) x y dx dy`.
///
/// Input slots: `0 = x`, `1 = y`, `2.. = spectators`. Output slots:
/// `0 = L1`, `1.. = spectators`. Monomial rule
/// `x^a y^b -> (a+1)! (b+1)! / (a+b+4)! L1^(a+b+4)`.
pub fn double_polygon_integral(p: &MultiPoly) -> Result<MultiPoly> {
    if p.nvars < 2 {
        return Err(Error::VariableOutOfRange {
            index: 1,
            nvars: p.nvars,
        });
    }
    let mut out = MultiPoly::zero(p.nvars - 1);
    for (e, c) in &p.terms {
        let (a, b) = (e[0] as u32, e[1] as u32);
        let mut e2: Exponents = Vec::with_capacity(p.nvars - 1);
        e2.push((a + b + 4) as u16);
        e2.extend_from_slice(&e[2..]);
        out.add_term(e2, c.scale(&beta_coeff(a + 1, b + 1, 2)));
    }
    Ok(out)
}

/// `int_0^L1 P(x, L1 - x, rest) x (L1 - x) dx`, same slot layout as
/// [`double_polygon_integral`]. Beta rule
/// `int_0^L x^p (L-x)^q dx = p! q! / (p+q+1)! L^(p+q+1)`.
pub fn segment_integral(p: &MultiPoly) -> Result<MultiPoly> {
    if p.nvars < 2 {
        return Err(Error::VariableOutOfRange {
            index: 1,
            nvars: p.nvars,
        });
    }
    let mut out = MultiPoly::zero(p.nvars - 1);
    for (e, c) in &p.terms {
        let (a, b) = (e[0] as u32, e[1] as u32);
        let mut e2: Exponents = Vec::with_capacity(p.nvars - 1);
        e2.push((a + b + 3) as u16);
        e2.extend_from_slice(&e[2..]);
        out.add_term(e2, c.scale(&beta_coeff(a + 1, b + 1, 1)));
    }
    Ok(out)
}

/// `int_0^L1 P1(x, ..) P2(L1 - x, ..) x (L1 - x) dx` where `p1` depends on
/// slot 0 (`x`) and `p2` on slot 1 (`y`); both already embedded in the
/// `(x, y, spectators)` space.
pub fn segment_convolution_integral(p1: &MultiPoly, p2: &MultiPoly) -> Result<MultiPoly> {
    segment_integral(&p1.try_mul(p2)?)
}

/// `(int_0^{L1+Lj} + int_0^{L1-Lj}) P(x, rest) x dx`.
///
/// Slot 0 carries `x` on input and `L1` on output; slot `j` must be absent
/// from `P` and carries `Lj` on output. The symmetric pair keeps only even
/// powers of `Lj`: `x^a -> ((L1+Lj)^(a+2) + (L1-Lj)^(a+2)) / (a+2)`.
pub fn pair_interval_integral(p: &MultiPoly, j: usize) -> Result<MultiPoly> {
    if j == 0 || j >= p.nvars {
        return Err(Error::VariableOutOfRange {
            index: j,
            nvars: p.nvars,
        });
    }
    let mut out = MultiPoly::zero(p.nvars);
    for (e, c) in &p.terms {
        if e[j] != 0 {
            return Err(Error::Inconsistent(format!(
                "pair_interval_integral: slot {j} already occupied"
            )));
        }
        let k = e[0] as u32 + 2;
        let inv = Rational::new(1.into(), (k as i64).into());
        for m in (0..=k).step_by(2) {
            let mut e2 = e.clone();
            e2[0] = (k - m) as u16;
            e2[j] = m as u16;
            let w = &binomial(k, m) * &inv * int(2);
            out.add_term(e2, c.scale(&w));
        }
    }
    Ok(out)
}

/// Parity of a polynomial in `L1`, selecting how [`eval_at_2pi_i`] divides
/// out the imaginary unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Evaluates slot 0 at `L1 = 2 pi i`.
///
/// Even input: returns `P(2 pi i)` by `L1^2 -> -4 pi^2`. Odd input: returns
/// `P(2 pi i) / (2 pi i)`. Both land in `Q[pi^2]`; slot 0 is removed.
pub fn eval_at_2pi_i(p: &MultiPoly, parity: Parity) -> Result<MultiPoly> {
    if p.nvars == 0 {
        return Err(Error::VariableOutOfRange { index: 0, nvars: 0 });
    }
    let ok = match parity {
        Parity::Even => p.is_even_in(0),
        Parity::Odd => p.is_odd_in(0),
    };
    if !ok {
        return Err(Error::Parity(format!(
            "eval_at_2pi_i: polynomial is not purely {parity:?} in L1"
        )));
    }
    let mut out = MultiPoly::zero(p.nvars - 1);
    for (e, c) in &p.terms {
        let j = (e[0] / 2) as usize;
        out.add_term(e[1..].to_vec(), c * &RingElem::two_pi_i_even_pow(j));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;
    use proptest::prelude::*;

    fn pi2() -> RingElem {
        RingElem::pi2_pow(1)
    }

    fn c(r: Rational) -> RingElem {
        RingElem::from_rational(r)
    }

    fn mono(e: &[u16], r: Rational) -> MultiPoly {
        MultiPoly::monomial(e.to_vec(), c(r))
    }

    fn l(nv: usize, i: usize) -> MultiPoly {
        MultiPoly::var(nv, i)
    }

    #[test]
    fn arithmetic_examples() {
        let l1c = mono(&[3], int(1));
        assert_eq!(l1c.differentiate(0).unwrap(), mono(&[2], int(3)));
        let sq = mono(&[2, 0], int(1));
        let sum = &l(2, 0) + &l(2, 1);
        let want = &(&mono(&[2, 0], int(1)) + &mono(&[1, 1], int(2))) + &mono(&[0, 2], int(1));
        assert_eq!(sq.substitute_var(0, &sum).unwrap(), want);
        let v11 = &mono(&[2], rat(1, 48)) + &MultiPoly::constant(1, pi2().scale(&rat(1, 12)));
        let back = &mono(&[2], int(1)) + &MultiPoly::constant(1, pi2().scale(&int(4)));
        assert_eq!(v11.scale_rational(&int(48)), back);
        assert!(matches!(
            l1c.differentiate(3),
            Err(Error::VariableOutOfRange { .. })
        ));
    }

    #[test]
    fn shift_diff_examples() {
        assert_eq!(shift_diff_op(&l(1, 0)).unwrap(), MultiPoly::one(1));
        let want = &mono(&[2], int(3)) - &MultiPoly::constant(1, pi2().scale(&int(4)));
        assert_eq!(shift_diff_op(&mono(&[3], int(1))).unwrap(), want);
        // L1 * V11 = (L1^3 + 4 pi^2 L1) / 48 -> (3 L1^2 - 4pi^2 + 4pi^2)/48 = L1^2/16
        let q = &mono(&[3], rat(1, 48)) + &MultiPoly::monomial(vec![1], pi2().scale(&rat(1, 12)));
        assert_eq!(shift_diff_op(&q).unwrap(), mono(&[2], rat(1, 16)));
        assert!(matches!(
            shift_diff_op(&mono(&[2], int(1))),
            Err(Error::Parity(_))
        ));
    }

    #[test]
    fn shift_sum_examples() {
        assert_eq!(shift_sum_op(&l(1, 0)).unwrap(), mono(&[1], int(2)));
        let want = &mono(&[3], int(2)) - &MultiPoly::monomial(vec![1], pi2().scale(&int(24)));
        assert_eq!(shift_sum_op(&mono(&[3], int(1))).unwrap(), want);
        assert_eq!(
            shift_sum_op(&mono(&[1, 2], int(1))).unwrap(),
            mono(&[1, 2], int(2))
        );
        assert!(shift_sum_op(&mono(&[0], int(1))).is_err());
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(invert_shift_diff(&MultiPoly::one(1)).unwrap(), l(1, 0));
        let r = &mono(&[2], int(3)) - &MultiPoly::constant(1, pi2().scale(&int(4)));
        assert_eq!(invert_shift_diff(&r).unwrap(), mono(&[3], int(1)));
        assert_eq!(invert_shift_sum(&mono(&[1], int(2))).unwrap(), l(1, 0));
        assert_eq!(
            invert_shift_sum(&mono(&[1], rat(-1, 4))).unwrap(),
            mono(&[1], rat(-1, 8))
        );
        let r = &mono(&[3], int(2)) - &MultiPoly::monomial(vec![1], pi2().scale(&int(24)));
        assert_eq!(invert_shift_sum(&r).unwrap(), mono(&[3], int(1)));
        assert!(invert_shift_diff(&l(1, 0)).is_err());
        assert!(invert_shift_sum(&MultiPoly::one(1)).is_err());
    }

    #[test]
    fn inversion_of_genus_zero_four_holed_rhs() {
        // 3/2 L1^2 + (L2^2 + L3^2 + L4^2)/2
        let mut r = mono(&[2, 0, 0, 0], rat(3, 2));
        for j in 1..4 {
            let mut e = vec![0; 4];
            e[j] = 2;
            r += &mono(&e, rat(1, 2));
        }
        let q = invert_shift_diff(&r).unwrap();
        let mut v = MultiPoly::constant(4, pi2().scale(&int(2)));
        for j in 0..4 {
            let mut e = vec![0; 4];
            e[j] = 2;
            v += &mono(&e, rat(1, 2));
        }
        assert_eq!(q, v.mul_var_pow(0, 1));
    }

    #[test]
    fn double_polygon_examples() {
        assert_eq!(
            double_polygon_integral(&MultiPoly::one(2)).unwrap(),
            mono(&[4], rat(1, 24))
        );
        assert_eq!(
            double_polygon_integral(&mono(&[2, 0], int(1))).unwrap(),
            mono(&[6], rat(1, 120))
        );
        assert_eq!(
            double_polygon_integral(&mono(&[0, 0, 2], int(1))).unwrap(),
            mono(&[4, 2], rat(1, 24))
        );
    }

    #[test]
    fn pair_interval_examples() {
        let one = MultiPoly::one(2);
        let want = &mono(&[2, 0], int(1)) + &mono(&[0, 2], int(1));
        assert_eq!(pair_interval_integral(&one, 1).unwrap(), want);
        // x^2 -> ((L1+Lj)^4 + (L1-Lj)^4)/4 = (L1^4 + 6 L1^2 Lj^2 + Lj^4)/2
        let want = &(&mono(&[4, 0], rat(1, 2)) + &mono(&[2, 2], int(3))) + &mono(&[0, 4], rat(1, 2));
        assert_eq!(
            pair_interval_integral(&mono(&[2, 0], int(1)), 1).unwrap(),
            want
        );
        assert!(pair_interval_integral(&MultiPoly::zero(2), 1)
            .unwrap()
            .is_zero());
        assert!(pair_interval_integral(&one, 0).is_err());
    }

    #[test]
    fn segment_examples() {
        let one = MultiPoly::one(2);
        assert_eq!(
            segment_convolution_integral(&one, &one).unwrap(),
            mono(&[3], rat(1, 6))
        );
        assert_eq!(
            segment_convolution_integral(&mono(&[2, 0], int(1)), &one).unwrap(),
            mono(&[5], rat(1, 20))
        );
        let p2 = mono(&[0, 0, 1], int(1));
        assert_eq!(
            segment_convolution_integral(&MultiPoly::one(3), &p2).unwrap(),
            mono(&[3, 1], rat(1, 6))
        );
    }

    #[test]
    fn eval_at_two_pi_i_examples() {
        let v11 = &mono(&[2], rat(1, 48)) + &MultiPoly::constant(1, pi2().scale(&rat(1, 12)));
        assert!(eval_at_2pi_i(&v11, Parity::Even).unwrap().is_zero());
        let p = &mono(&[2, 0], int(1)) + &mono(&[0, 2], int(1));
        let want = &MultiPoly::constant(1, pi2().scale(&int(-4))) + &mono(&[2], int(1));
        assert_eq!(eval_at_2pi_i(&p, Parity::Even).unwrap(), want);
        assert_eq!(
            eval_at_2pi_i(&mono(&[3], int(1)), Parity::Odd).unwrap(),
            MultiPoly::constant(0, pi2().scale(&int(-4)))
        );
        let mixed = &mono(&[2], int(1)) + &mono(&[1], int(1));
        assert!(eval_at_2pi_i(&mixed, Parity::Even).is_err());
        assert!(eval_at_2pi_i(&mixed, Parity::Odd).is_err());
    }

    #[test]
    fn symmetry_predicate() {
        let s = &mono(&[2, 0, 0], int(1)) + &(&mono(&[0, 2, 0], int(1)) + &mono(&[0, 0, 2], int(1)));
        assert!(s.is_symmetric());
        let a = &mono(&[2, 0, 0], int(1)) + &mono(&[0, 2, 0], int(1));
        assert!(!a.is_symmetric());
        assert!(a.is_symmetric_in(&[0, 1]));
    }

    #[test]
    fn json_round_trip() {
        let p = &mono(&[2, 0], rat(1, 48)) + &MultiPoly::monomial(vec![0, 0], pi2().scale(&rat(1, 12)));
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(
            text,
            r#"[{"exp":[0,0],"coef":[[1,"1/12"]]},{"exp":[2,0],"coef":[[0,"1/48"]]}]"#
        );
        let back: MultiPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    // -- brute-force oracle for the shift operators -----------------------
    //
    // Numbers in Q[pi, i] stored as (pi power, i power mod 4) -> rational.
    // Independent of the derivative-series route used above.
    type Gauss = BTreeMap<(u32, u32), Rational>;

    fn gmul(a: &Gauss, b: &Gauss) -> Gauss {
        let mut out = Gauss::new();
        for ((pa, ia), ca) in a {
            for ((pb, ib), cb) in b {
                let mut v = ca * cb;
                let mut i = ia + ib;
                if i >= 2 {
                    v = -v;
                    i -= 2;
                }
                *out.entry((pa + pb, i)).or_insert_with(Rational::zero) += v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Univariate `P(L + 2 pi i) -/+ P(L - 2 pi i)` as polynomial coefficients
    /// in `L` over Q[pi, i].
    fn brute_shift(p: &[RingElem], sign: i64) -> Vec<Gauss> {
        let deg = p.len();
        let mut out = vec![Gauss::new(); deg];
        for (k, ck) in p.iter().enumerate() {
            let mut cg = Gauss::new();
            for (m, r) in ck.coeffs().iter().enumerate() {
                if !r.is_zero() {
                    cg.insert((2 * m as u32, 0), r.clone());
                }
            }
            for m in 0..=k {
                // binom(k, m) L^(k-m) (2 pi i)^m (+ sign * (-2 pi i)^m)
                let s = if m % 2 == 0 { 1 + sign } else { 1 - sign };
                if s == 0 {
                    continue;
                }
                let mut a = Gauss::new();
                a.insert(
                    (m as u32, (m % 2) as u32),
                    &binomial(k as u32, m as u32)
                        * int(s * 2i64.pow(m as u32) * if m % 4 >= 2 { -1 } else { 1 }),
                );
                let term = gmul(&cg, &a);
                for (key, v) in term {
                    *out[k - m].entry(key).or_insert_with(Rational::zero) += v;
                }
            }
        }
        for g in &mut out {
            g.retain(|_, v| !v.is_zero());
        }
        out
    }

    fn to_gauss(r: &RingElem) -> Gauss {
        r.coeffs()
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(m, v)| ((2 * m as u32, 0), v.clone()))
            .collect()
    }

    fn univariate(p: &MultiPoly) -> Vec<RingElem> {
        let d = p.degree_in(0).unwrap_or(0) as usize;
        (0..=d).map(|k| p.coeff(&[k as u16])).collect()
    }

    #[test]
    fn shift_operators_match_binomial_expansion() {
        let q = &(&mono(&[5], rat(3, 7)) + &MultiPoly::monomial(vec![3], pi2().scale(&rat(-1, 5))))
            + &mono(&[1], int(2));
        // difference: brute / (4 pi i)  <=> engine * 4 pi i
        let brute = brute_shift(&univariate(&q), -1);
        let eng = univariate(&shift_diff_op(&q).unwrap());
        let mut four_pi_i = Gauss::new();
        four_pi_i.insert((1, 1), int(4));
        for (k, b) in brute.iter().enumerate() {
            let e = eng.get(k).cloned().unwrap_or_default();
            assert_eq!(*b, gmul(&to_gauss(&e), &four_pi_i), "L^{k}");
        }
        let brute = brute_shift(&univariate(&q), 1);
        let eng = univariate(&shift_sum_op(&q).unwrap());
        for (k, b) in brute.iter().enumerate() {
            let e = eng.get(k).cloned().unwrap_or_default();
            assert_eq!(*b, to_gauss(&e), "L^{k}");
        }
    }

    /// Iterated antiderivative oracle for the polygon rule.
    fn polygon_oracle(a: u32, b: u32) -> Rational {
        // int_0^L y^(b+1) (L-y)^(a+2)/(a+2) dy, expanded binomially.
        let mut acc = Rational::zero();
        for i in 0..=(a + 2) {
            let sign = if i % 2 == 0 { int(1) } else { int(-1) };
            acc += &binomial(a + 2, i) * sign / int((b + 2 + i) as i64);
        }
        acc / int((a + 2) as i64)
    }

    #[test]
    fn polygon_rule_matches_iterated_antiderivatives() {
        for a in 0..=8u16 {
            for b in 0..=(8 - a) {
                let got = double_polygon_integral(&mono(&[a, b], int(1))).unwrap();
                let want = mono(&[a + b + 4], polygon_oracle(a as u32, b as u32));
                assert_eq!(got, want, "x^{a} y^{b}");
            }
        }
    }

    fn arb_parity_poly(nvars: usize, odd: bool) -> impl Strategy<Value = MultiPoly> {
        let term = (
            0u16..4,
            prop::collection::vec(0u16..3, nvars - 1),
            -9i64..10,
            1i64..7,
            0usize..3,
        );
        prop::collection::vec(term, 0..6).prop_map(move |ts| {
            let mut p = MultiPoly::zero(nvars);
            for (h, rest, num, den, pk) in ts {
                let mut e = vec![2 * h + odd as u16];
                e.extend(rest);
                p.add_term(e, RingElem::pi2_pow(pk).scale(&rat(num, den)));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn diff_round_trip(q in arb_parity_poly(2, true), r in arb_parity_poly(2, false)) {
            prop_assert_eq!(invert_shift_diff(&shift_diff_op(&q).unwrap()).unwrap(), q.clone());
            prop_assert_eq!(shift_diff_op(&invert_shift_diff(&r).unwrap()).unwrap(), r);
            let image = shift_diff_op(&q).unwrap();
            prop_assert!(image.is_even_in(0));
            if let Some(d) = q.degree_in(0) {
                prop_assert_eq!(image.degree_in(0), Some(d - 1));
            }
        }

        #[test]
        fn sum_round_trip(q in arb_parity_poly(3, true), r in arb_parity_poly(3, true)) {
            prop_assert_eq!(invert_shift_sum(&shift_sum_op(&q).unwrap()).unwrap(), q.clone());
            prop_assert_eq!(shift_sum_op(&invert_shift_sum(&r).unwrap()).unwrap(), r);
            let image = shift_sum_op(&q).unwrap();
            prop_assert!(image.is_odd_in(0) || image.is_zero());
            prop_assert_eq!(image.degree_in(0), q.degree_in(0));
        }

        #[test]
        fn leading_term_is_derivative(a in -5i64..5, b in -5i64..5) {
            // pi-free input of degree <= 2 in L1 (odd part only: degree 1)
            let q = &mono(&[1, 0], int(a)) + &mono(&[1, 2], int(b));
            prop_assert_eq!(shift_diff_op(&q).unwrap(), q.differentiate(0).unwrap());
        }
    }
}
