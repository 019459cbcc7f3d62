//! Verification suites run by `wpvol check`.

use clap::ValueEnum;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use wpvol_core::identities::{
    check_derivative_relation, check_do_norbury, check_dvv, check_leading_recursion,
    check_second_derivative, top_indices,
};
use wpvol_core::laplace::{
    check_laplace_new, check_laplace_original, check_lemma_laplace_shift, check_super_laplace,
    check_toprec, LaplaceCheck, ShiftLemma, SuperForm,
};
use wpvol_core::numeric::{
    appendix_cases, check_original_recursion_numeric, check_super_recursion_numeric,
    default_samples, verify_appendix_series, AppendixCase, NumericReport,
};
use wpvol_core::recursion::self_consistent;
use wpvol_core::ring::rat;
use wpvol_core::{keys_up_to, MultiPoly, Result, RingElem, Verdict, VolumeKey, VolumeTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Identities,
    Laplace,
    Numeric,
    Appendix,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// One line of a check report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub suite: &'static str,
    pub check: &'static str,
    pub anchor: &'static str,
    pub key: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericReport>,
}

impl CheckRecord {
    fn new(suite: &'static str, check: &'static str, anchor: &'static str, key: String, verdict: Verdict) -> Self {
        CheckRecord {
            suite,
            check,
            anchor,
            key,
            verdict,
            order: None,
            numeric: None,
        }
    }

    fn laplace(check: &'static str, anchor: &'static str, key: VolumeKey, c: LaplaceCheck) -> Self {
        CheckRecord {
            order: c.order,
            ..CheckRecord::new("laplace", check, anchor, key.to_string(), c.verdict)
        }
    }
}

pub struct Options {
    pub max_dim: u32,
    pub tol: f64,
}

pub fn run(suite: Suite, opts: &Options, table: &VolumeTable) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let keys = keys_up_to(opts.max_dim);
    if suite.includes(Suite::Identities) {
        identities(&keys, table, &mut out)?;
    }
    if suite.includes(Suite::Laplace) {
        laplace(&keys, table, &mut out)?;
    }
    if suite.includes(Suite::Numeric) {
        numeric(&keys, opts.tol, table, &mut out)?;
    }
    if suite.includes(Suite::Appendix) {
        appendix(&mut out)?;
    }
    Ok(out)
}

fn identities(keys: &[(u32, usize)], table: &VolumeTable, out: &mut Vec<CheckRecord>) -> Result<()> {
    let rec = |check, anchor, key: VolumeKey, v| CheckRecord::new("identities", check, anchor, key.to_string(), v);
    for &(g, n) in keys {
        let key = VolumeKey::ordinary(g, n);
        for k in [key, VolumeKey::sup(g, n)] {
            let v = match self_consistent(k, table)? {
                Some(ok) => Verdict::from_bool(ok, || "shift operator image differs from the right-hand side".into()),
                None => Verdict::skipped("base case"),
            };
            let (check, anchor) = if k.sup {
                ("super-shift", "super shift recursion")
            } else {
                ("shift", "shift recursion")
            };
            out.push(rec(check, anchor, k, v));
        }
        out.push(rec(
            "leading-order",
            "leading-order volume recursion",
            key,
            check_leading_recursion(g, n, table)?,
        ));
        let mut failures = Vec::new();
        let mut checked = 0;
        for alphas in top_indices(g, n) {
            match check_dvv(g, &alphas, table)? {
                Verdict::Pass => checked += 1,
                Verdict::Fail(d) => failures.push(format!("{alphas:?}: {d}")),
                Verdict::Skipped(_) => {}
            }
        }
        let dvv = if checked == 0 && failures.is_empty() {
            Verdict::skipped("base case")
        } else {
            Verdict::from_bool(failures.is_empty(), || failures.join("; "))
        };
        out.push(rec("dvv", "DVV constraint on top intersection numbers", key, dvv));
        out.push(rec("do-norbury", "vanishing at L1 = 2 pi i", key, check_do_norbury(g, n, table)?));
        out.push(rec(
            "derivative",
            "first derivative at L1 = 2 pi i",
            key,
            check_derivative_relation(g, n, table)?,
        ));
        out.push(rec(
            "second-derivative",
            "second derivative at L1 = 2 pi i",
            key,
            check_second_derivative(g, n, table)?,
        ));
    }
    Ok(())
}

fn laplace(keys: &[(u32, usize)], table: &VolumeTable, out: &mut Vec<CheckRecord>) -> Result<()> {
    for &(g, n) in keys {
        let key = VolumeKey::ordinary(g, n);
        let sup = VolumeKey::sup(g, n);
        out.push(CheckRecord::laplace(
            "original",
            "transformed kernel recursion",
            key,
            check_laplace_original(g, n, table)?,
        ));
        out.push(CheckRecord::laplace(
            "new",
            "transformed shift recursion",
            key,
            check_laplace_new(g, n, table)?,
        ));
        out.push(CheckRecord::laplace(
            "toprec",
            "topological recursion for W",
            key,
            check_toprec(g, n, table)?,
        ));
        out.push(CheckRecord::laplace(
            "super-original",
            "transformed super kernel recursion",
            sup,
            check_super_laplace(g, n, SuperForm::Original, table)?,
        ));
        out.push(CheckRecord::laplace(
            "super-new",
            "transformed super shift recursion",
            sup,
            check_super_laplace(g, n, SuperForm::New, table)?,
        ));
    }
    Ok(())
}

fn numeric(keys: &[(u32, usize)], tol: f64, table: &VolumeTable, out: &mut Vec<CheckRecord>) -> Result<()> {
    let mut push = |check, anchor, r: NumericReport| {
        out.push(CheckRecord {
            numeric: Some(r.clone()),
            ..CheckRecord::new("numeric", check, anchor, r.key.clone(), r.status.clone())
        })
    };
    for &(g, n) in keys {
        let samples = default_samples(n);
        push(
            "kernel",
            "kernel recursion with H",
            check_original_recursion_numeric(g, n, &samples, tol, table)?,
        );
        if g >= 1 {
            push(
                "super-kernel",
                "super kernel recursion with H^su",
                check_super_recursion_numeric(g, n, &samples, tol, table)?,
            );
        }
    }
    Ok(())
}

fn random_poly(rng: &mut StdRng, odd: bool) -> MultiPoly {
    let mut p = MultiPoly::zero(1);
    for _ in 0..rng.gen_range(1..=6) {
        let mut k: u16 = rng.gen_range(0..=10);
        if odd {
            k = (k | 1).min(9);
        }
        let c = RingElem::pi2_pow(rng.gen_range(0..3))
            .scale(&rat(rng.gen_range(-30..=30), rng.gen_range(1..=12)));
        p.add_term(vec![k], c);
    }
    p
}

fn appendix(out: &mut Vec<CheckRecord>) -> Result<()> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for i in 0..40 {
        let (kind, check, anchor) = if i % 2 == 0 {
            (ShiftLemma::Sine, "sine-lemma", "transform of the shift difference")
        } else {
            (ShiftLemma::Cosine, "cosine-lemma", "transform of the shift sum")
        };
        let p = random_poly(&mut rng, kind == ShiftLemma::Cosine);
        let v = check_lemma_laplace_shift(&p, kind)?;
        out.push(CheckRecord::new("appendix", check, anchor, format!("P = {p}"), v));
    }
    for case in appendix_cases() {
        let (check, anchor, terms) = match case {
            AppendixCase::A1a { .. } => ("logistic-a", "logistic integral expansion (x + l)", 400),
            AppendixCase::A1b { .. } => ("logistic-b", "logistic integral expansion (x - l)", 400),
            AppendixCase::A2 { .. } => ("double-logistic", "double logistic integral expansion", 400),
            AppendixCase::A3 { .. } => ("csc-series", "holomorphic part of the cosecant series", 10_000),
        };
        let r = verify_appendix_series(case, terms, 1e-6)?;
        let v = Verdict::from_bool(r.pass, || format!("relative error {:.2e}", r.rel_err));
        out.push(CheckRecord::new("appendix", check, anchor, serde_json::to_string(&case)?, v));
    }
    Ok(())
}
