//! Memoized volume computation through the complex-shift recursions.
//!
//! Ordinary volumes solve
//! `shift_diff_op(L1 * V_{g,n}) = RHS` where the right-hand side is built from
//! polygon integrals of smaller volumes; super volumes solve the analogous
//! `shift_sum_op` equation. Both are triangular in the `L1`-degree, so the
//! unknown is recovered by back-substitution and then divided by `L1`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{
    double_polygon_integral, invert_shift_diff, invert_shift_sum, pair_interval_integral,
    segment_convolution_integral, segment_integral, shift_diff_op, shift_sum_op, MultiPoly,
};
use crate::ring::{rat, RingElem};
use crate::ENGINE_VERSION;

/// `2g - 2 + n > 0`.
pub fn is_stable(g: u32, n: usize) -> bool {
    2 * g as i64 - 2 + n as i64 > 0
}

/// Memoization key for ordinary (`sup == false`) and super volumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VolumeKey {
    pub g: u32,
    pub n: usize,
    pub sup: bool,
}

impl VolumeKey {
    pub fn ordinary(g: u32, n: usize) -> Self {
        VolumeKey { g, n, sup: false }
    }

    pub fn sup(g: u32, n: usize) -> Self {
        VolumeKey { g, n, sup: true }
    }

    /// `"g,n,super"` as used in the cache file.
    pub fn cache_id(&self) -> String {
        format!("{},{},{}", self.g, self.n, self.sup)
    }

    fn parse_cache_id(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        let bad = || Error::Cache(format!("malformed cache key {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(VolumeKey {
            g: parts[0].parse().map_err(|_| bad())?,
            n: parts[1].parse().map_err(|_| bad())?,
            sup: parts[2].parse().map_err(|_| bad())?,
        })
    }

    /// Keys the recursion for `self` reads from.
    pub fn dependencies(&self) -> Vec<VolumeKey> {
        let (g, n, sup) = (self.g, self.n, self.sup);
        let mk = |g, n| VolumeKey { g, n, sup };
        if !is_stable(g, n) || (g, n) == (0, 3) || (g, n) == (1, 1) || (sup && g == 0) {
            return Vec::new();
        }
        let mut deps = Vec::new();
        if g >= 1 && is_stable(g - 1, n + 1) && !(sup && g == 1) {
            deps.push(mk(g - 1, n + 1));
        }
        for s in ordered_splits(g, n, sup) {
            deps.push(mk(s.g1, s.left.len() + 1));
            deps.push(mk(s.g2, s.right.len() + 1));
        }
        if n >= 2 && is_stable(g, n - 1) {
            deps.push(mk(g, n - 1));
        }
        deps.sort();
        deps.dedup();
        deps
    }
}

impl fmt::Display for VolumeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sup {
            write!(f, "Vsu[{},{}]", self.g, self.n)
        } else {
            write!(f, "V[{},{}]", self.g, self.n)
        }
    }
}

/// One ordered splitting `(g1, I) | (g2, J)` of a surface of type `(g, n)`
/// with `I` and `J` partitioning the spectator slots `1..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub g1: u32,
    pub left: Vec<usize>,
    pub g2: u32,
    pub right: Vec<usize>,
}

fn splits_with(g: u32, n: usize, keep: impl Fn(u32, usize) -> bool) -> Vec<Split> {
    let m = n.saturating_sub(1);
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let left: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        let right: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 0).map(|b| b + 1).collect();
        for g1 in 0..=g {
            let g2 = g - g1;
            if keep(g1, left.len() + 1) && keep(g2, right.len() + 1) {
                out.push(Split {
                    g1,
                    left: left.clone(),
                    g2,
                    right: right.clone(),
                });
            }
        }
    }
    out
}

/// Ordered stable splittings; in super mode both genera must be positive.
pub fn ordered_splits(g: u32, n: usize, sup: bool) -> Vec<Split> {
    splits_with(g, n, |gi, ni| is_stable(gi, ni) && (!sup || gi >= 1))
}

/// Ordered splittings where each factor is stable or of type `(0,2)`.
pub fn ordered_splits_with_cylinders(g: u32, n: usize) -> Vec<Split> {
    splits_with(g, n, |gi, ni| is_stable(gi, ni) || (gi, ni) == (0, 2))
}

/// Slot map placing a volume of type `(g_i, |I|+1)` into a space whose
/// slot `first` carries its distinguished variable and whose spectator
/// `L_i` sits at slot `i + offset`.
pub(crate) fn split_map(first: usize, spectators: &[usize], offset: usize) -> Vec<usize> {
    std::iter::once(first)
        .chain(spectators.iter().map(|&i| i + offset))
        .collect()
}

/// Spectator slots `1..n` with `j` removed.
pub(crate) fn without(n: usize, j: usize) -> Vec<usize> {
    (1..n).filter(|&k| k != j).collect()
}

fn half() -> crate::ring::Rational {
    rat(1, 2)
}

/// The base volume `V_{1,1} = (L1^2 + 4 pi^2) / 48`.
pub fn v11() -> MultiPoly {
    let mut p = MultiPoly::monomial(vec![2], RingElem::from_rational(rat(1, 48)));
    p.add_term(vec![0], RingElem::pi2_pow(1).scale(&rat(1, 12)));
    p
}

/// Thread-safe memo table with an optional JSON backing file.
#[derive(Debug, Default)]
pub struct VolumeTable {
    map: RwLock<BTreeMap<VolumeKey, Arc<MultiPoly>>>,
    path: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: String,
    entries: BTreeMap<String, serde_json::Value>,
}

impl VolumeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table backed by `path`. An existing file is loaded when its version
    /// stamp matches this engine; every loaded entry is re-checked for
    /// evenness, symmetry and (ordinary case) degree. A stale or foreign
    /// file is ignored and overwritten on the next [`VolumeTable::save`].
    pub fn with_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let table = VolumeTable {
            map: RwLock::new(BTreeMap::new()),
            path: Some(path.clone()),
        };
        if !path.exists() {
            return Ok(table);
        }
        let text = std::fs::read_to_string(&path)?;
        let file: CacheFile = serde_json::from_str(&text)
            .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        if file.version != ENGINE_VERSION {
            return Ok(table);
        }
        {
            let mut map = table.map.write().unwrap();
            for (id, value) in file.entries {
                let key = VolumeKey::parse_cache_id(&id)?;
                let poly = MultiPoly::from_json_terms(&value, key.n)?;
                spot_check(key, &poly)?;
                map.insert(key, Arc::new(poly));
            }
        }
        Ok(table)
    }

    pub fn cache_path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Writes every entry to the backing file (no-op without one).
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let text = self.to_canonical_json()?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Canonical JSON of the whole table, versioned.
    pub fn to_canonical_json(&self) -> Result<String> {
        let map = self.map.read().unwrap();
        let entries = map
            .iter()
            .map(|(k, v)| Ok((k.cache_id(), serde_json::to_value(v.as_ref())?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(serde_json::to_string(&CacheFile {
            version: ENGINE_VERSION.to_string(),
            entries,
        })?)
    }

    pub fn get(&self, key: VolumeKey) -> Option<Arc<MultiPoly>> {
        self.map.read().unwrap().get(&key).cloned()
    }

    fn require(&self, key: VolumeKey) -> Result<Arc<MultiPoly>> {
        self.get(key).ok_or(Error::MissingDependency(key))
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn keys(&self) -> Vec<VolumeKey> {
        self.map.read().unwrap().keys().copied().collect()
    }

    fn publish(&self, key: VolumeKey, poly: MultiPoly) -> Arc<MultiPoly> {
        let arc = Arc::new(poly);
        self.map
            .write()
            .unwrap()
            .entry(key)
            .or_insert_with(|| arc.clone())
            .clone()
    }

    /// Returns `V_{g,n}` (or the super volume), computing it and every
    /// missing dependency on the way.
    pub fn ensure(&self, key: VolumeKey) -> Result<Arc<MultiPoly>> {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        if !is_stable(key.g, key.n) {
            return Err(Error::Unstable { g: key.g, n: key.n });
        }
        for dep in key.dependencies() {
            self.ensure(dep)?;
        }
        let poly = if key.sup {
            compute_super_volume(key.g, key.n, self)?
        } else {
            compute_volume(key.g, key.n, self)?
        };
        Ok(self.publish(key, poly))
    }

    pub fn volume(&self, g: u32, n: usize) -> Result<Arc<MultiPoly>> {
        self.ensure(VolumeKey::ordinary(g, n))
    }

    pub fn super_volume(&self, g: u32, n: usize) -> Result<Arc<MultiPoly>> {
        self.ensure(VolumeKey::sup(g, n))
    }
}

fn spot_check(key: VolumeKey, p: &MultiPoly) -> Result<()> {
    let fail = |what: &str| {
        Err(Error::Invariant {
            key,
            what: what.to_string(),
        })
    };
    if p.nvars() != key.n {
        return fail("wrong number of variables");
    }
    if !p.is_even() {
        return fail("not even in every variable");
    }
    if !p.is_symmetric() {
        return fail("not symmetric in the boundary lengths");
    }
    if !key.sup && p.total_degree() != Some(6 * key.g + 2 * key.n as u32 - 6) {
        return fail("total degree differs from 6g-6+2n");
    }
    Ok(())
}

/// Right-hand side of the ordinary shift recursion for a non-base key.
///
/// Term 1 is half the polygon integral of `V_{g-1,n+1}(x, y, ..)`, term 2
/// half the sum of polygon integrals over ordered stable splittings, term 3
/// half the sum of paired interval integrals of `V_{g,n-1}`.
pub fn mirzakhani_rhs(g: u32, n: usize, table: &VolumeTable) -> Result<MultiPoly> {
    rhs_with(g, n, |key| table.require(key).map(|v| (*v).clone()))
}

/// Same right-hand side, with the dependency lookup supplied by the caller
/// (used for the leading-order variant on top-degree parts).
pub(crate) fn rhs_with(
    g: u32,
    n: usize,
    lookup: impl Fn(VolumeKey) -> Result<MultiPoly>,
) -> Result<MultiPoly> {
    if !is_stable(g, n) {
        return Err(Error::Unstable { g, n });
    }
    let mut rhs = MultiPoly::zero(n);
    if g >= 1 && is_stable(g - 1, n + 1) {
        let v = lookup(VolumeKey::ordinary(g - 1, n + 1))?;
        rhs += &double_polygon_integral(&v)?.scale_rational(&half());
    }
    for s in ordered_splits(g, n, false) {
        let v1 = lookup(VolumeKey::ordinary(s.g1, s.left.len() + 1))?;
        let v2 = lookup(VolumeKey::ordinary(s.g2, s.right.len() + 1))?;
        let a = v1.embed(n + 1, &split_map(0, &s.left, 1));
        let b = v2.embed(n + 1, &split_map(1, &s.right, 1));
        rhs += &double_polygon_integral(&(&a * &b))?.scale_rational(&half());
    }
    if n >= 2 && is_stable(g, n - 1) {
        let v = lookup(VolumeKey::ordinary(g, n - 1))?;
        for j in 1..n {
            let p = v.embed(n, &split_map(0, &without(n, j), 0));
            rhs += &pair_interval_integral(&p, j)?.scale_rational(&half());
        }
    }
    Ok(rhs)
}

/// `V_{g,n}`: base cases directly, otherwise inversion of the shift
/// recursion followed by exact division by `L1`. The result is checked for
/// evenness, symmetry, degree `6g-6+2n` and nonnegative coefficients before
/// it is returned.
pub fn compute_volume(g: u32, n: usize, table: &VolumeTable) -> Result<MultiPoly> {
    if !is_stable(g, n) {
        return Err(Error::Unstable { g, n });
    }
    let key = VolumeKey::ordinary(g, n);
    let v = match (g, n) {
        (0, 3) => MultiPoly::one(3),
        (1, 1) => v11(),
        _ => {
            let rhs = mirzakhani_rhs(g, n, table)?;
            invert_shift_diff(&rhs)?.div_var(0)?
        }
    };
    spot_check(key, &v)?;
    if !v.terms().all(|(_, c)| c.all_nonnegative()) {
        return Err(Error::Invariant {
            key,
            what: "negative coefficient".into(),
        });
    }
    Ok(v)
}

/// Right-hand side of the super shift recursion for a non-base key with
/// `g >= 1`. Genus-zero super volumes vanish, so terms that would read one
/// are omitted.
pub fn super_rhs(g: u32, n: usize, table: &VolumeTable) -> Result<MultiPoly> {
    if !is_stable(g, n) {
        return Err(Error::Unstable { g, n });
    }
    let minus_half = rat(-1, 2);
    let mut rhs = MultiPoly::zero(n);
    if g >= 2 {
        let v = table.require(VolumeKey::sup(g - 1, n + 1))?;
        rhs += &segment_integral(&v)?.scale_rational(&minus_half);
    }
    for s in ordered_splits(g, n, true) {
        let v1 = table.require(VolumeKey::sup(s.g1, s.left.len() + 1))?;
        let v2 = table.require(VolumeKey::sup(s.g2, s.right.len() + 1))?;
        let a = v1.embed(n + 1, &split_map(0, &s.left, 1));
        let b = v2.embed(n + 1, &split_map(1, &s.right, 1));
        rhs += &segment_convolution_integral(&a, &b)?.scale_rational(&minus_half);
    }
    if n >= 2 && g >= 1 && is_stable(g, n - 1) {
        let v = table.require(VolumeKey::sup(g, n - 1))?;
        for j in 1..n {
            let k = v.embed(n, &split_map(0, &without(n, j), 0)).mul_var_pow(0, 1);
            let l1 = MultiPoly::var(n, 0);
            let lj = MultiPoly::var(n, j);
            rhs -= &k.substitute_var(0, &(&l1 + &lj))?;
            rhs -= &k.substitute_var(0, &(&l1 - &lj))?;
        }
    }
    Ok(rhs)
}

/// `V^su_{g,n}`: zero in genus zero, `1/8` for `(1,1)`, otherwise inversion
/// of the super shift recursion and exact division by `L1`; checked for
/// evenness and symmetry.
pub fn compute_super_volume(g: u32, n: usize, table: &VolumeTable) -> Result<MultiPoly> {
    if !is_stable(g, n) {
        return Err(Error::Unstable { g, n });
    }
    let key = VolumeKey::sup(g, n);
    let v = match (g, n) {
        (0, _) => MultiPoly::zero(n),
        (1, 1) => MultiPoly::constant(1, RingElem::from_rational(rat(1, 8))),
        _ => {
            let rhs = super_rhs(g, n, table)?;
            invert_shift_sum(&rhs)?.div_var(0)?
        }
    };
    spot_check(key, &v)?;
    Ok(v)
}

/// Re-applies the forward operator to `L1 * V` and compares with the
/// freshly built right-hand side. Base keys return `None`.
pub fn self_consistent(key: VolumeKey, table: &VolumeTable) -> Result<Option<bool>> {
    let (g, n) = (key.g, key.n);
    if (g, n) == (0, 3) || (g, n) == (1, 1) || (key.sup && g == 0) {
        return Ok(None);
    }
    let v = table.ensure(key)?;
    let q = v.mul_var_pow(0, 1);
    Ok(Some(if key.sup {
        shift_sum_op(&q)? == super_rhs(g, n, table)?
    } else {
        shift_diff_op(&q)? == mirzakhani_rhs(g, n, table)?
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, Rational};

    fn c(r: Rational) -> RingElem {
        RingElem::from_rational(r)
    }

    fn sum_sq(n: usize, pow: u16) -> MultiPoly {
        let mut p = MultiPoly::zero(n);
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = pow;
            p.add_term(e, RingElem::one());
        }
        p
    }

    #[test]
    fn stability() {
        assert!(is_stable(0, 3));
        assert!(!is_stable(0, 2));
        assert!(!is_stable(1, 0));
        assert!(is_stable(1, 1));
    }

    #[test]
    fn base_cases() {
        let t = VolumeTable::new();
        assert_eq!(*t.volume(0, 3).unwrap(), MultiPoly::one(3));
        assert_eq!(*t.volume(1, 1).unwrap(), v11());
        assert_eq!(
            *t.super_volume(1, 1).unwrap(),
            MultiPoly::constant(1, c(rat(1, 8)))
        );
        assert!(matches!(t.volume(0, 2), Err(Error::Unstable { g: 0, n: 2 })));
    }

    #[test]
    fn four_holed_sphere_rhs_and_volume() {
        let t = VolumeTable::new();
        t.volume(0, 3).unwrap();
        let rhs = mirzakhani_rhs(0, 4, &t).unwrap();
        let mut want = MultiPoly::monomial(vec![2, 0, 0, 0], c(rat(3, 2)));
        for j in 1..4 {
            let mut e = vec![0; 4];
            e[j] = 2;
            want.add_term(e, c(rat(1, 2)));
        }
        assert_eq!(rhs, want);
        let v = t.volume(0, 4).unwrap();
        let oracle = &sum_sq(4, 2).scale_rational(&rat(1, 2))
            + &MultiPoly::constant(4, RingElem::pi2_pow(1).scale(&int(2)));
        assert_eq!(*v, oracle);
    }

    #[test]
    fn once_punctured_torus_with_two_boundaries() {
        let t = VolumeTable::new();
        let v = t.volume(1, 2).unwrap();
        // (L1^2 + L2^2 + 4 pi^2)(L1^2 + L2^2 + 12 pi^2) / 192
        let s = sum_sq(2, 2);
        let a = &s + &MultiPoly::constant(2, RingElem::pi2_pow(1).scale(&int(4)));
        let b = &s + &MultiPoly::constant(2, RingElem::pi2_pow(1).scale(&int(12)));
        assert_eq!(*v, (&a * &b).scale_rational(&rat(1, 192)));
    }

    #[test]
    fn genus_two_one_boundary() {
        let t = VolumeTable::new();
        let v = t.volume(2, 1).unwrap();
        let l2 = MultiPoly::monomial(vec![2], RingElem::one());
        let k = |a: i64, p: usize| MultiPoly::constant(1, RingElem::pi2_pow(p).scale(&int(a)));
        let f1 = &l2 + &k(4, 1);
        let f2 = &l2 + &k(12, 1);
        let f3 = &(&k(6960, 2) + &l2.scale(&RingElem::pi2_pow(1).scale(&int(384))))
            + &MultiPoly::monomial(vec![4], c(int(5)));
        let oracle = (&(&f1 * &f2) * &f3).scale_rational(&rat(1, 2211840));
        assert_eq!(*v, oracle);
    }

    #[test]
    fn five_holed_sphere() {
        let t = VolumeTable::new();
        let v = t.volume(0, 5).unwrap();
        let mut oracle = sum_sq(5, 4).scale_rational(&rat(1, 8));
        for i in 0..5 {
            for j in (i + 1)..5 {
                let mut e = vec![0; 5];
                e[i] = 2;
                e[j] = 2;
                oracle.add_term(e, c(rat(1, 2)));
            }
        }
        oracle += &sum_sq(5, 2).scale(&RingElem::pi2_pow(1).scale(&int(3)));
        oracle += &MultiPoly::constant(5, RingElem::pi2_pow(2).scale(&int(10)));
        assert_eq!(*v, oracle);
    }

    #[test]
    fn super_low_cases() {
        let t = VolumeTable::new();
        t.super_volume(1, 1).unwrap();
        let rhs = super_rhs(1, 2, &t).unwrap();
        assert_eq!(rhs, MultiPoly::monomial(vec![1, 0], c(rat(-1, 4))));
        assert_eq!(
            *t.super_volume(1, 2).unwrap(),
            MultiPoly::constant(2, c(rat(-1, 8)))
        );
        assert!(t.super_volume(0, 4).unwrap().is_zero());
        assert!(t.super_volume(2, 1).unwrap().total_degree().is_some());
    }

    #[test]
    fn genus_two_super_rhs_matches_hand_enumeration() {
        let t = VolumeTable::new();
        t.super_volume(1, 2).unwrap();
        // -1/2 int (-1/8) x(L-x) - 1/2 * 1 * int (1/64) x(L-x), ordered split counted once
        let rhs = super_rhs(2, 1, &t).unwrap();
        let want = MultiPoly::monomial(vec![3], c(rat(1, 96) - rat(1, 768)));
        assert_eq!(rhs, want);
    }

    #[test]
    fn dependencies_are_smaller() {
        for (g, n) in crate::keys_up_to(5) {
            for sup in [false, true] {
                let key = VolumeKey { g, n, sup };
                for d in key.dependencies() {
                    assert!(2 * d.g + (d.n as u32) < 2 * g + (n as u32), "{key} -> {d}");
                }
            }
        }
    }

    #[test]
    fn split_enumeration() {
        // g=2, n=1: only (1,{}) | (1,{})
        let s = ordered_splits(2, 1, false);
        assert_eq!(s.len(), 1);
        // g=0, n=5: I of size 2 with J of size 2, ordered: C(4,2) = 6
        assert_eq!(ordered_splits(0, 5, false).len(), 6);
        assert!(ordered_splits(1, 2, true).is_empty());
        // cylinders: g=0,n=4 -> each j alone on either side: 3 + 3
        assert_eq!(ordered_splits_with_cylinders(0, 4).len(), 6);
    }

    #[test]
    fn cache_round_trip_and_invalidation() {
        let dir = std::env::temp_dir().join(format!("wpvol-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cache.json");
        let _ = std::fs::remove_file(&path);
        let t = VolumeTable::with_cache(&path).unwrap();
        t.volume(1, 2).unwrap();
        t.super_volume(1, 2).unwrap();
        t.save().unwrap();
        let warm = VolumeTable::with_cache(&path).unwrap();
        assert_eq!(warm.len(), t.len());
        assert_eq!(warm.to_canonical_json().unwrap(), t.to_canonical_json().unwrap());
        let cold = VolumeTable::new();
        cold.volume(1, 2).unwrap();
        cold.super_volume(1, 2).unwrap();
        assert_eq!(cold.to_canonical_json().unwrap(), t.to_canonical_json().unwrap());

        let stale = t.to_canonical_json().unwrap().replace(ENGINE_VERSION, "0.0.0-old");
        std::fs::write(&path, stale).unwrap();
        assert!(VolumeTable::with_cache(&path).unwrap().is_empty());

        let corrupt = t
            .to_canonical_json()
            .unwrap()
            .replacen("\"1/192\"", "\"1/191\"", 1);
        std::fs::write(&path, corrupt).unwrap();
        assert!(matches!(
            VolumeTable::with_cache(&path),
            Err(Error::Invariant { .. })
        ));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
