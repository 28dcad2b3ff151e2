use albert_theta::enumerate::{shell, ShellCache, ShellSource};
use albert_theta::lattice::make_lattice;
use albert_theta::modforms::{eisenstein, identify_named, QSeries, Space};
use albert_theta::weightpoly::{builtin_b, theta_series, Normalization, WeightPolynomial};
use albert_theta::LatticeName;

#[test]
fn qseries_json_round_trip() {
    let e4 = eisenstein(4, 3).unwrap();
    let text = serde_json::to_string(&e4).unwrap();
    assert!(text.contains("\"240/1\""));
    let back: QSeries = serde_json::from_str(&text).unwrap();
    assert_eq!(back, e4);
}

#[test]
fn weight_polynomial_json() {
    let p = WeightPolynomial::new(2, builtin_b().unwrap()).unwrap();
    let v = p.to_json();
    assert_eq!(v["lattice"], "jz");
    assert_eq!(v["n"], 2);
    assert_eq!(v["d"], 2);
    assert_eq!(v["provenance"]["kind"], "builtin");
}

#[test]
fn lattices_are_unimodular() {
    for name in [LatticeName::JZ, LatticeName::JE] {
        let l = make_lattice(name);
        assert_eq!(l.gram_det(), 1);
        assert_eq!(l.descriptor()["schema"], "albert-theta/lattice/v1");
    }
}

#[test]
fn cached_and_fresh_theta_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ShellCache::new(dir.path());
    let fresh = theta_series(LatticeName::JZ, None, 3, Normalization::ElkiesGross, &ShellSource::default()).unwrap();
    let src = ShellSource::with_cache(cache.clone());
    let first = theta_series(LatticeName::JZ, None, 3, Normalization::ElkiesGross, &src).unwrap();
    assert!(cache.path(LatticeName::JZ, 3).exists());
    let second = theta_series(LatticeName::JZ, None, 3, Normalization::ElkiesGross, &src).unwrap();
    assert_eq!(fresh.rational, first.rational);
    assert_eq!(first.rational, second.rational);
    assert_eq!(identify_named(&second.rational, Space::Modular).unwrap().to_string(), "E12 + 432000/691 * Delta");
    assert_eq!(shell(LatticeName::JZ, 3, Some(&cache), false).unwrap().len(), 70563);
}
