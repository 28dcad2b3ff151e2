use super::*;
use crate::arith::{rat, rat_int};
use crate::octonion::CoxeterOrder;
use proptest::prelude::*;

type Q = AlbertElement<Rational>;
type O = Octonion<Rational>;

fn beta() -> O {
    O::new(std::array::from_fn(|i| if i == 0 { rat(-1, 2) } else { rat(1, 2) }))
}

fn big_e() -> Q {
    Q::new(rat_int(2), rat_int(2), rat_int(2), beta(), beta(), beta())
}

fn ri(n: i64) -> Rational {
    rat_int(n)
}

#[test]
fn adjoint_examples() {
    assert_eq!(Q::identity().adjoint(), Q::identity());
    assert!(Q::e(1).adjoint().is_zero());
    let bb = beta().conj();
    assert_eq!(big_e().adjoint(), Q::new(ri(2), ri(2), ri(2), bb.clone(), bb.clone(), bb));
}

#[test]
fn det_examples() {
    assert_eq!(Q::identity().det(), ri(1));
    assert_eq!(big_e().det(), ri(1));
    assert_eq!((&Q::e(1) + &Q::e(2)).det(), ri(0));
}

#[test]
fn form_trace_cross_examples() {
    let (f, t, _) = bilinear_trace_cross(&Q::identity(), &Q::identity());
    assert_eq!((f, t), (ri(3), ri(3)));
    let a = sample(3);
    assert_eq!(a.cross(&a), a.adjoint().scale(&ri(2)));
    assert_eq!(Q::e(1).form(&big_e()), ri(2));
}

#[test]
fn jordan_examples() {
    let a = sample(7);
    assert_eq!(Q::identity().jordan_product(&a), a);
    assert!(Q::e(1).jordan_product(&Q::e(2)).is_zero());
    let b = sample(11);
    assert_eq!(a.jordan_product(&b).trace(), a.form(&b));
    assert_eq!(a.jordan_product(&b), b.jordan_product(&a));
}

#[test]
fn rank_examples() {
    assert_eq!(Q::zero().rank(), 0);
    assert_eq!(Q::e(3).rank(), 1);
    assert_eq!((&Q::e(1) + &Q::e(2)).rank(), 2);
    assert_eq!(Q::identity().rank(), 3);
}

#[test]
fn psd_examples() {
    assert!(Q::identity().is_psd());
    let z = Q::new(ri(1), ri(1), ri(0), O::zero(), O::zero(), O::unit(3));
    assert!(z.is_psd());
    assert_eq!(z.rank(), 1);
    assert!(!Q::diag(ri(1), ri(-1), ri(0)).is_psd());
    assert!(big_e().is_psd());
}

#[test]
fn polarization_examples() {
    let (d1, _) = det_polarize(&Q::e(1), &Q::e(1), &Q::identity());
    assert_eq!(d1, ri(1));
    let a = sample(5);
    let b = sample(6);
    let (da, dab) = det_polarize(&a, &b, &Q::identity());
    let (db, _) = det_polarize(&b, &a, &Q::identity());
    assert_eq!(da.clone() * db - dab, a.form(&b));
    // Euler: t-coefficient of det(A + tA) = 3 det(A).
    let (d, _) = det_polarize(&a, &a, &a);
    assert_eq!(d, a.det() * ri(3));
    // D1(A; P) = (P^#, A) and D2(A, B; P) = (P, A x B).
    let p = sample(9);
    let (d1, d2) = det_polarize(&a, &b, &p);
    assert_eq!(d1, p.adjoint().form(&a));
    assert_eq!(d2, p.form(&a.cross(&b)));
}

#[test]
fn json_shape() {
    let e = big_e();
    let v = serde_json::to_value(&e).unwrap();
    assert_eq!(v["a"], "2/1");
    assert_eq!(v["x"][0], "-1/2");
    let back: Q = serde_json::from_value(v).unwrap();
    assert_eq!(back, e);
}

#[test]
fn integer_and_rational_paths_agree() {
    // Doubled integer coordinates: (2A)^# = 4 A^#, det(2A) = 8 det(A).
    let a = sample(13);
    let doubled = a.map(|v| i64::try_from((v * ri(2)).to_integer()).unwrap());
    let adj = doubled.adjoint();
    assert_eq!(adj.map(|v| rat(*v, 4)), a.adjoint());
    assert_eq!(rat(doubled.det(), 8), a.det());
}

/// A deterministic pseudo-random integral element.
fn sample(seed: u64) -> Q {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 33) % 7) as i64 - 3
    };
    let order = CoxeterOrder::get();
    let mut oct = || {
        let c: Vec<i64> = (0..8).map(|_| next()).collect();
        O::from_doubled(&order.doubled_from_coords(&c))
    };
    let (x, y, z) = (oct(), oct(), oct());
    Q::new(ri(next()), ri(next()), ri(next()), x, y, z)
}

pub(crate) fn integral_element() -> impl Strategy<Value = Q> {
    let order = CoxeterOrder::get();
    let oct = move || prop::array::uniform8(-3i64..=3).prop_map(move |c| O::from_doubled(&order.doubled_from_coords(&c)));
    (-4i64..=4, -4i64..=4, -4i64..=4, oct(), oct(), oct())
        .prop_map(|(a, b, c, x, y, z)| Q::new(ri(a), ri(b), ri(c), x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn freudenthal(a in integral_element()) {
        prop_assert_eq!(a.adjoint().adjoint(), a.scale(&a.det()));
    }

    #[test]
    fn cubic_expansion(a in integral_element(), b in integral_element()) {
        let [c0, c1, c2, c3] = det_line(&a, &b);
        prop_assert_eq!(c0, a.det());
        prop_assert_eq!(c1, a.adjoint().form(&b));
        prop_assert_eq!(c2, b.adjoint().form(&a));
        prop_assert_eq!(c3, b.det());
    }

    #[test]
    fn adjoint_pairing(a in integral_element()) {
        prop_assert_eq!(a.form(&a.adjoint()), a.det() * ri(3));
    }

    #[test]
    fn polarized_form_matches_explicit(a in integral_element(), b in integral_element()) {
        let i = Q::identity();
        let (da, dab) = det_polarize(&a, &b, &i);
        let (db, _) = det_polarize(&b, &a, &i);
        prop_assert_eq!(da * db - dab, a.form(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jordan_trace(a in integral_element(), b in integral_element()) {
        prop_assert_eq!(a.jordan_product(&b).trace(), a.form(&b));
    }

    #[test]
    fn rank_one_squares(y in prop::array::uniform8(-3i64..=3), z in prop::array::uniform8(-3i64..=3), s in 1i64..4) {
        // [a, N(z)/a, N(y)/a; conj(yz)/a, y, z] is rank one for any a != 0.
        let order = CoxeterOrder::get();
        let y = O::from_doubled(&order.doubled_from_coords(&y));
        let z = O::from_doubled(&order.doubled_from_coords(&z));
        let a = ri(s);
        let inv = ri(1) / a.clone();
        let t = Q::new(a, z.norm() * inv.clone(), y.norm() * inv.clone(), y.mul(&z).conj().scale(&inv), y, z);
        prop_assert_eq!(t.rank(), 1);
        prop_assert_eq!(t.jordan_product(&t), t.scale(&t.trace()));
        prop_assert_eq!(t.form(&t), t.trace() * t.trace());
        prop_assert!(t.is_psd());
    }
}
