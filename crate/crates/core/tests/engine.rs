//! Public-API checks across the whole key range, against independently
//! written closed forms.

use wpvol_core::laplace::{
    check_super_laplace_as_printed, inverse_laplace, laplace_transform, SuperForm,
};
use wpvol_core::ring::rat;
use wpvol_core::{keys_up_to, MultiPoly, RingElem, VolumeKey, VolumeTable};

fn pi2(k: usize, a: i64, b: i64) -> RingElem {
    RingElem::pi2_pow(k).scale(&rat(a, b))
}

fn l_sq(nvars: usize, i: usize) -> MultiPoly {
    MultiPoly::monomial(
        (0..nvars).map(|k| if k == i { 2 } else { 0 }).collect(),
        RingElem::one(),
    )
}

fn c(nvars: usize, r: RingElem) -> MultiPoly {
    MultiPoly::constant(nvars, r)
}

#[test]
fn genus_two_one_boundary() {
    let s = l_sq(1, 0);
    let a = &s + &c(1, pi2(1, 4, 1));
    let b = &s + &c(1, pi2(1, 12, 1));
    let quartic = &(&s * &s).scale_rational(&rat(5, 1))
        + &(&s.scale(&pi2(1, 384, 1)) + &c(1, pi2(2, 6960, 1)));
    let want = (&(&a * &b) * &quartic).scale_rational(&rat(1, 2_211_840));
    let table = VolumeTable::new();
    assert_eq!(*table.volume(2, 1).unwrap(), want);
}

#[test]
fn genus_one_two_boundaries() {
    let s = &l_sq(2, 0) + &l_sq(2, 1);
    let want = (&(&s + &c(2, pi2(1, 4, 1))) * &(&s + &c(2, pi2(1, 12, 1))))
        .scale_rational(&rat(1, 192));
    assert_eq!(*VolumeTable::new().volume(1, 2).unwrap(), want);
}

#[test]
fn sphere_five_boundaries() {
    let n = 5;
    let mut want = c(n, pi2(2, 10, 1));
    for i in 0..n {
        let li = l_sq(n, i);
        want += &(&li * &li).scale_rational(&rat(1, 8));
        want += &li.scale(&pi2(1, 3, 1));
        for j in i + 1..n {
            want += &(&li * &l_sq(n, j)).scale_rational(&rat(1, 2));
        }
    }
    assert_eq!(*VolumeTable::new().volume(0, 5).unwrap(), want);
}

#[test]
fn super_values() {
    let t = VolumeTable::new();
    assert_eq!(*t.super_volume(1, 1).unwrap(), c(1, RingElem::from_rational(rat(1, 8))));
    assert_eq!(*t.super_volume(1, 2).unwrap(), c(2, RingElem::from_rational(rat(-1, 8))));
    assert!(t.super_volume(0, 5).unwrap().is_zero());
}

#[test]
fn transforms_round_trip_and_are_odd_in_reciprocals() {
    let t = VolumeTable::new();
    for (g, n) in keys_up_to(5) {
        for key in [VolumeKey::ordinary(g, n), VolumeKey::sup(g, n)] {
            let v = t.ensure(key).unwrap();
            let f = laplace_transform(&v);
            assert!(f.is_odd_in_reciprocals(), "{key}");
            assert_eq!(inverse_laplace(&f).unwrap(), *v, "{key}");
        }
    }
}

#[test]
fn printed_super_forms_disagree_with_volumes() {
    let t = VolumeTable::new();
    for (g, n) in [(1, 2), (1, 3), (2, 1), (2, 2)] {
        for form in [SuperForm::Original, SuperForm::New] {
            let c = check_super_laplace_as_printed(g, n, form, &t).unwrap();
            assert!(c.verdict.is_fail(), "({g},{n}) {form:?}");
        }
    }
}

#[test]
fn warm_and_cold_caches_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("volumes.json");
    let cold = VolumeTable::new();
    let warm = VolumeTable::with_cache(&path).unwrap();
    for (g, n) in keys_up_to(4) {
        warm.volume(g, n).unwrap();
    }
    warm.save().unwrap();
    let reloaded = VolumeTable::with_cache(&path).unwrap();
    assert_eq!(reloaded.len(), warm.len());
    for (g, n) in keys_up_to(4) {
        assert_eq!(reloaded.volume(g, n).unwrap(), cold.volume(g, n).unwrap());
    }
    assert_eq!(
        reloaded.to_canonical_json().unwrap(),
        warm.to_canonical_json().unwrap()
    );
}
