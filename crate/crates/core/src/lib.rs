//! Exact Weil-Petersson volume polynomials of moduli spaces of bordered
//! hyperbolic surfaces, their super analogs, and machine checks of the
//! identities they satisfy.
//!
//! The volumes are produced by the complex-shift recursions: the left-hand
//! side `[(L1+2 pi i) V(L1+2 pi i) -/+ (L1-2 pi i) V(L1-2 pi i)]` is a
//! triangular linear operator on polynomials odd in `L1`, and the right-hand
//! side involves only integrals over polygons. Everything lives in
//! `Q[pi^2]`, so results are exact.

pub mod error;
pub mod identities;
pub mod laplace;
pub mod numeric;
pub mod poly;
pub mod recursion;
pub mod ring;
pub mod verdict;

pub use error::{Error, Result};
pub use identities::IntersectionIndex;
pub use laplace::{LaurentPoly, LaurentSeries};
pub use poly::{MultiPoly, Parity};
pub use recursion::{is_stable, VolumeKey, VolumeTable};
pub use ring::{Rational, RingElem};
pub use verdict::Verdict;

/// Engine version stamped into caches and manifests.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every stable `(g, n)` with `3g - 3 + n <= max_dim`, ordered by
/// `(3g - 3 + n, g, n)`.
pub fn keys_up_to(max_dim: u32) -> Vec<(u32, usize)> {
    let mut out = Vec::new();
    for g in 0..=(max_dim + 3) / 3 {
        for n in 1..=(max_dim as i64 + 3 - 3 * g as i64).max(0) as usize {
            if is_stable(g, n) && 3 * g as i64 - 3 + n as i64 <= max_dim as i64 {
                out.push((g, n));
            }
        }
    }
    out.sort_by_key(|&(g, n)| (3 * g as i64 - 3 + n as i64, g, n));
    out
}
