//! Text and LaTeX renderings of volume polynomials and Laurent transforms.

use num_traits::{One, Signed, Zero};
use wpvol_core::{LaurentPoly, MultiPoly, Rational};

/// `(L-exponents, pi^2 power, coefficient)`, in graded lex order with the
/// `pi^2` power treated as the last variable.
fn ordered_terms(p: &MultiPoly) -> Vec<(Vec<u16>, usize, Rational)> {
    let mut out: Vec<_> = p
        .terms()
        .flat_map(|(e, c)| {
            c.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.is_zero())
                .map(move |(k, r)| (e.clone(), k, r.clone()))
        })
        .collect();
    out.sort_by(|a, b| {
        let weight = |t: &(Vec<u16>, usize, Rational)| {
            t.0.iter().map(|&x| x as usize).sum::<usize>() + 2 * t.1
        };
        weight(b)
            .cmp(&weight(a))
            .then_with(|| b.0.cmp(&a.0))
            .then_with(|| b.1.cmp(&a.1))
    });
    out
}

fn text_monomial(e: &[u16], k: usize) -> Vec<String> {
    let mut f: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0)
        .map(|(i, &x)| {
            if x == 1 {
                format!("L{}", i + 1)
            } else {
                format!("L{}^{x}", i + 1)
            }
        })
        .collect();
    if k > 0 {
        f.push(format!("pi^{}", 2 * k));
    }
    f
}

/// `(L1^2 + 4*pi^2)/48`: integer numerator over the common denominator.
pub fn text(p: &MultiPoly) -> String {
    let terms = ordered_terms(p);
    if terms.is_empty() {
        return "0".into();
    }
    let den = Rational::from_integer(p.denominator_lcm());
    let mut body = String::new();
    for (i, (e, k, r)) in terms.iter().enumerate() {
        let a = r * &den;
        let mono = text_monomial(e, *k);
        let mag = a.abs();
        let mut factors = Vec::new();
        if !mag.is_one() || mono.is_empty() {
            factors.push(mag.to_string());
        }
        factors.extend(mono);
        let sign = match (i, a.is_negative()) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        body.push_str(sign);
        body.push_str(&factors.join("*"));
    }
    if den.is_one() {
        body
    } else if terms.len() == 1 {
        format!("{body}/{}", den)
    } else {
        format!("({body})/{}", den)
    }
}

fn latex_power(base: &str, e: usize) -> String {
    match e {
        1 => base.to_string(),
        e if e < 10 => format!("{base}^{e}"),
        e => format!("{base}^{{{e}}}"),
    }
}

fn latex_monomial(e: &[u16], k: usize) -> String {
    let mut s = String::new();
    for (i, &x) in e.iter().enumerate() {
        if x > 0 {
            let var = if i < 9 {
                format!("L_{}", i + 1)
            } else {
                format!("L_{{{}}}", i + 1)
            };
            s.push_str(&latex_power(&var, x as usize));
        }
    }
    if k > 0 {
        s.push_str(&latex_power("\\pi", 2 * k));
    }
    s
}

fn latex_magnitude(r: &Rational) -> String {
    let r = r.abs();
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("\\tfrac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

/// LaTeX with runs of equal coefficients factored:
/// `\tfrac{1}{2}(L_1^2+L_2^2) + 2\pi^2`.
pub fn latex(p: &MultiPoly) -> String {
    let terms = ordered_terms(p);
    if terms.is_empty() {
        return "0".into();
    }
    let mut groups: Vec<(Rational, Vec<String>)> = Vec::new();
    for (e, k, r) in &terms {
        let mono = latex_monomial(e, *k);
        match groups.last_mut() {
            Some((c, ms)) if c == r && !r.abs().is_one() && !mono.is_empty() => ms.push(mono),
            _ => groups.push((r.clone(), vec![mono])),
        }
    }
    let mut out = String::new();
    for (i, (c, ms)) in groups.iter().enumerate() {
        let sign = match (i, c.is_negative()) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        out.push_str(sign);
        let bare = ms.len() == 1 && ms[0].is_empty();
        if !c.abs().is_one() || bare {
            out.push_str(&latex_magnitude(c));
        }
        if ms.len() > 1 {
            out.push('(');
            out.push_str(&ms.join("+"));
            out.push(')');
        } else {
            out.push_str(&ms[0]);
        }
    }
    out
}

/// Laurent transforms: `1/24*t1^-3 + 1/12*pi^2*t1^-1`.
pub fn laurent_text(f: &LaurentPoly) -> String {
    let mut terms: Vec<(Vec<i32>, usize, Rational)> = f
        .terms()
        .flat_map(|(e, c)| {
            c.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.is_zero())
                .map(move |(k, r)| (e.clone(), k, r.clone()))
        })
        .collect();
    if terms.is_empty() {
        return "0".into();
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut out = String::new();
    for (i, (e, k, r)) in terms.iter().enumerate() {
        let sign = match (i, r.is_negative()) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        let mut factors = vec![r.abs().to_string()];
        if *k > 0 {
            factors.push(format!("pi^{}", 2 * k));
        }
        for (i, &x) in e.iter().enumerate() {
            if x != 0 {
                factors.push(format!("t{}^{x}", i + 1));
            }
        }
        out.push_str(sign);
        out.push_str(&factors.join("*"));
    }
    out
}
