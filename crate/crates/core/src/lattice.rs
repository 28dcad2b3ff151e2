//! The two Euclidean Albert lattices on the common module `Z^27`.
//!
//! `JZ` is `Her_3` of Coxeter's order with the standard unit and adjoint.
//! `JE` is the isotope with unit `E^#` and adjoint
//! `X -> (E^#, X^#) E^# - E x X^#`, where `E = [2,2,2; β,β,β]` and
//! `β = (-1 + e_1 + ... + e_7)/2`. The determinant is shared.
//!
//! Lattice coordinates are integers on the basis `E_1, E_2, E_3` followed by
//! the Coxeter basis placed in the `x`, `y` and `z` slots.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::albert::{det_polarize, AlbertElement, JsonScalar};
use crate::arith::{rat, rat_int};
use crate::error::{Error, Result};
use crate::linalg::{content_of, det_integer};
use crate::octonion::{CoxeterOrder, Octonion};
use crate::scalar::Scalar;
use crate::{IntAlbert, RatAlbert, Rational};

pub const RANK: usize = 27;

/// Integer coordinates of a lattice vector.
pub type LatticeVector = [i64; RANK];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LatticeName {
    #[serde(rename = "jz")]
    JZ,
    #[serde(rename = "je")]
    JE,
}

impl fmt::Display for LatticeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatticeName::JZ => "jz",
            LatticeName::JE => "je",
        })
    }
}

impl FromStr for LatticeName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jz" => Ok(LatticeName::JZ),
            "je" => Ok(LatticeName::JE),
            _ => Err(Error::Parse(format!("unknown lattice {s:?} (expected jz or je)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IsotopeData {
    pub e: RatAlbert,
    pub e_sharp: RatAlbert,
}

impl IsotopeData {
    pub fn standard() -> Self {
        let beta = Octonion::new(std::array::from_fn(|i| if i == 0 { rat(-1, 2) } else { rat(1, 2) }));
        let two = rat_int(2);
        let e = AlbertElement::new(two.clone(), two.clone(), two, beta.clone(), beta.clone(), beta);
        let e_sharp = e.adjoint();
        IsotopeData { e, e_sharp }
    }
}

#[derive(Clone, Debug)]
pub enum AdjointKind {
    Standard,
    Isotope(IsotopeData),
}

pub struct AlbertLattice {
    pub name: LatticeName,
    /// Rows are the lattice basis in reference coordinates.
    pub basis: Vec<RatAlbert>,
    pub unit: RatAlbert,
    pub adjoint_kind: AdjointKind,
    /// The lattice trace form on the basis.
    pub gram: Vec<Vec<i64>>,
    /// `2 * basis[i]` in reference coordinates.
    doubled_basis: Vec<[i64; RANK]>,
    /// Doubled `E` and `E^#` for the isotope kernel.
    doubled_e: Option<(IntAlbert, IntAlbert)>,
}

static JZ: OnceLock<AlbertLattice> = OnceLock::new();
static JE: OnceLock<AlbertLattice> = OnceLock::new();

pub fn make_lattice(which: LatticeName) -> &'static AlbertLattice {
    match which {
        LatticeName::JZ => JZ.get_or_init(|| AlbertLattice::build(LatticeName::JZ)),
        LatticeName::JE => JE.get_or_init(|| AlbertLattice::build(LatticeName::JE)),
    }
}

impl AlbertLattice {
    fn build(name: LatticeName) -> Self {
        let order = CoxeterOrder::get();
        let mut doubled_basis = Vec::with_capacity(RANK);
        for i in 0..3 {
            let mut v = [0i64; RANK];
            v[i] = 2;
            doubled_basis.push(v);
        }
        for slot in 0..3 {
            for row in &order.basis {
                let mut v = [0i64; RANK];
                v[3 + 8 * slot..11 + 8 * slot].copy_from_slice(row);
                doubled_basis.push(v);
            }
        }
        let basis: Vec<RatAlbert> = doubled_basis.iter().map(from_doubled).collect();
        let (unit, adjoint_kind, doubled_e) = match name {
            LatticeName::JZ => (RatAlbert::identity(), AdjointKind::Standard, None),
            LatticeName::JE => {
                let iso = IsotopeData::standard();
                let de = to_doubled(&iso.e).expect("E is integral");
                let des = to_doubled(&iso.e_sharp).expect("E^# is integral");
                (iso.e_sharp.clone(), AdjointKind::Isotope(iso), Some((de, des)))
            }
        };
        let mut lat = AlbertLattice { name, basis, unit, adjoint_kind, gram: Vec::new(), doubled_basis, doubled_e };
        let mut gram = vec![vec![0i64; RANK]; RANK];
        for i in 0..RANK {
            for j in i..RANK {
                let v = lat.form_explicit(&lat.basis[i], &lat.basis[j]);
                assert!(v.is_integer(), "trace form is not integral on the basis");
                let v = i64::try_from(v.to_integer()).expect("small Gram entry");
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        lat.gram = gram;
        lat
    }

    pub fn isotope(&self) -> Option<&IsotopeData> {
        match &self.adjoint_kind {
            AdjointKind::Standard => None,
            AdjointKind::Isotope(d) => Some(d),
        }
    }

    /// The lattice adjoint, standard or isotope.
    pub fn adjoint<S: Scalar + From<Rational>>(&self, t: &AlbertElement<S>) -> AlbertElement<S> {
        match &self.adjoint_kind {
            AdjointKind::Standard => t.adjoint(),
            AdjointKind::Isotope(iso) => {
                let es = iso.e_sharp.map(|v| S::from(v.clone()));
                let e = iso.e.map(|v| S::from(v.clone()));
                let ts = t.adjoint();
                &es.scale(&es.form(&ts)) - &e.cross(&ts)
            }
        }
    }

    /// Polarization of the lattice adjoint.
    pub fn cross<S: Scalar + From<Rational>>(&self, a: &AlbertElement<S>, b: &AlbertElement<S>) -> AlbertElement<S> {
        &(&self.adjoint(&(a + b)) - &self.adjoint(a)) - &self.adjoint(b)
    }

    /// `(TrL(A), (A, B)_L)` from the determinant polarized at the unit.
    pub fn trace_and_form<S: Scalar + From<Rational>>(&self, a: &AlbertElement<S>, b: &AlbertElement<S>) -> (S, S) {
        let u = self.unit.map(|v| S::from(v.clone()));
        let form = |p: &AlbertElement<S>, q: &AlbertElement<S>| {
            let (dp, dpq) = det_polarize(p, q, &u);
            let (dq, _) = det_polarize(q, p, &u);
            dp * dq - dpq
        };
        (form(a, &u), form(a, b))
    }

    /// The trace form through closed expressions: `(A, B)` for `JZ` and
    /// `(E, A)(E, B) - (E^#, A x B)` for `JE`.
    pub fn form_explicit<S: Scalar + From<Rational>>(&self, a: &AlbertElement<S>, b: &AlbertElement<S>) -> S {
        match &self.adjoint_kind {
            AdjointKind::Standard => a.form(b),
            AdjointKind::Isotope(iso) => {
                let e = iso.e.map(|v| S::from(v.clone()));
                let es = iso.e_sharp.map(|v| S::from(v.clone()));
                e.form(a) * e.form(b) - es.form(&a.cross(b))
            }
        }
    }

    /// `TrL(A)`: `a + b + c` for `JZ`, `(E, A)` for `JE`.
    pub fn trace_explicit<S: Scalar + From<Rational>>(&self, a: &AlbertElement<S>) -> S {
        match &self.adjoint_kind {
            AdjointKind::Standard => a.trace(),
            AdjointKind::Isotope(iso) => iso.e.map(|v| S::from(v.clone())).form(a),
        }
    }

    pub fn element(&self, coords: &[i64]) -> RatAlbert {
        from_doubled(&self.doubled_reference(coords))
    }

    /// `2T` in reference coordinates for lattice coordinates `coords`.
    pub fn doubled_reference(&self, coords: &[i64]) -> [i64; RANK] {
        let mut out = [0i64; RANK];
        for (c, row) in coords.iter().zip(&self.doubled_basis) {
            if *c != 0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += c * r;
                }
            }
        }
        out
    }

    pub fn doubled_element(&self, coords: &[i64]) -> IntAlbert {
        IntAlbert::from_coords(&self.doubled_reference(coords))
    }

    /// Lattice coordinates of `t`, or `NotInLattice`.
    pub fn coordinates(&self, t: &RatAlbert) -> Result<LatticeVector> {
        let d = to_doubled(t).ok_or(Error::NotInLattice)?;
        coords_of_doubled(&d).ok_or(Error::NotInLattice)
    }

    pub fn contains(&self, t: &RatAlbert) -> bool {
        self.coordinates(t).is_ok()
    }

    /// The largest `c` with `T / c` in the lattice.
    pub fn content(&self, t: &RatAlbert) -> Result<u64> {
        let v = self.coordinates(t)?;
        if v.iter().all(|&x| x == 0) {
            return Err(Error::InvalidArgument("content of the zero element".into()));
        }
        Ok(content_of(&v) as u64)
    }

    /// `16 T^#L` for `T` given as doubled reference coordinates.
    pub fn adjoint_doubled_x16(&self, d: &IntAlbert) -> IntAlbert {
        let y4 = d.adjoint();
        match &self.doubled_e {
            None => y4.scale(&4),
            Some((de, des)) => &des.scale(&des.form(&y4)) - &de.cross(&y4).scale(&2),
        }
    }

    /// Whether `T` (doubled reference coordinates) has vanishing lattice adjoint.
    pub fn is_rank_one_doubled(&self, d: &IntAlbert) -> bool {
        if d.is_zero() {
            return false;
        }
        // 4T^# = 0 is necessary for either structure; the isotope map is checked in full.
        let y4 = d.adjoint();
        if !y4.is_zero() {
            return false;
        }
        self.doubled_e.is_none() || self.adjoint_doubled_x16(d).is_zero()
    }

    /// `TrL(T)` from doubled reference coordinates.
    pub fn trace_doubled(&self, d: &IntAlbert) -> i64 {
        match &self.doubled_e {
            None => {
                let t = d.a + d.b + d.c;
                debug_assert!(t % 2 == 0);
                t / 2
            }
            Some((de, _)) => {
                let t = de.form(d);
                debug_assert!(t % 4 == 0);
                t / 4
            }
        }
    }

    /// `(T, T)_L` from lattice coordinates via the Gram matrix.
    pub fn norm_coords(&self, v: &[i64]) -> i64 {
        let mut s = 0i64;
        for i in 0..RANK {
            if v[i] != 0 {
                let row: i64 = (0..RANK).map(|j| self.gram[i][j] * v[j]).sum();
                s += v[i] * row;
            }
        }
        s
    }

    pub fn gram_det(&self) -> i64 {
        det_integer(&self.gram).try_into().expect("small determinant")
    }

    /// JSON descriptor: basis rows, unit, and Gram matrix.
    pub fn descriptor(&self) -> Value {
        let basis: Vec<Vec<Value>> =
            self.basis.iter().map(|b| b.to_coords().iter().map(JsonScalar::to_json).collect()).collect();
        json!({
            "schema": "albert-theta/lattice/v1",
            "name": self.name,
            "coordinates": "a,b,c,x0..x7,y0..y7,z0..z7",
            "basis": basis,
            "unit": serde_json::to_value(&self.unit).expect("serializable"),
            "unit_coordinates": self.coordinates(&self.unit).expect("unit in lattice").to_vec(),
            "gram": self.gram,
            "gram_det": self.gram_det(),
        })
    }
}

fn from_doubled(v: &[i64; RANK]) -> RatAlbert {
    let r: Vec<Rational> = v.iter().map(|&x| rat(x, 2)).collect();
    RatAlbert::from_coords(&r)
}

pub(crate) fn to_doubled(t: &RatAlbert) -> Option<IntAlbert> {
    let two = rat_int(2);
    let mut out = Vec::with_capacity(RANK);
    for c in t.to_coords() {
        let v = c * two.clone();
        if !v.is_integer() {
            return None;
        }
        out.push(i64::try_from(v.to_integer()).ok()?);
    }
    Some(IntAlbert::from_coords(&out))
}

/// Lattice coordinates from doubled reference coordinates.
pub fn coords_of_doubled(d: &IntAlbert) -> Option<LatticeVector> {
    let order = CoxeterOrder::get();
    let mut out = [0i64; RANK];
    for (i, v) in [d.a, d.b, d.c].iter().enumerate() {
        if v % 2 != 0 {
            return None;
        }
        out[i] = v / 2;
    }
    for (slot, o) in [&d.x, &d.y, &d.z].iter().enumerate() {
        let c = order.coords_of_doubled(&o.coords)?;
        out[3 + 8 * slot..11 + 8 * slot].copy_from_slice(&c);
    }
    Some(out)
}

/// Standalone form of [`AlbertLattice::adjoint`].
pub fn lattice_adjoint<S: Scalar + From<Rational>>(l: &AlbertLattice, t: &AlbertElement<S>) -> AlbertElement<S> {
    l.adjoint(t)
}

/// Standalone form of [`AlbertLattice::trace_and_form`].
pub fn lattice_trace_and_form<S: Scalar + From<Rational>>(
    l: &AlbertLattice,
    a: &AlbertElement<S>,
    b: &AlbertElement<S>,
) -> (S, S) {
    l.trace_and_form(a, b)
}

pub fn content(l: &AlbertLattice, t: &RatAlbert) -> Result<u64> {
    l.content(t)
}

impl AlbertLattice {
    /// Reference element `T` whose doubled coordinates are `d`.
    pub fn from_doubled_element(d: &IntAlbert) -> RatAlbert {
        d.map(|v| rat(*v, 2))
    }

    pub fn is_zero_vector(v: &[i64]) -> bool {
        v.iter().all(Zero::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::QuadExt;

    fn jz() -> &'static AlbertLattice {
        make_lattice(LatticeName::JZ)
    }

    fn je() -> &'static AlbertLattice {
        make_lattice(LatticeName::JE)
    }

    fn sample(seed: u64, l: &AlbertLattice) -> RatAlbert {
        let mut s = seed;
        let v: Vec<i64> = (0..RANK)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) % 5) as i64 - 2
            })
            .collect();
        l.element(&v)
    }

    #[test]
    fn units() {
        assert_eq!(jz().unit, RatAlbert::identity());
        let beta_bar = Octonion::new(std::array::from_fn(|_| rat(-1, 2)));
        let two = rat_int(2);
        let expect = AlbertElement::new(two.clone(), two.clone(), two, beta_bar.clone(), beta_bar.clone(), beta_bar);
        assert_eq!(je().unit, expect);
        for l in [jz(), je()] {
            assert_eq!(l.adjoint(&l.unit), l.unit);
            assert_eq!(l.unit.det(), rat_int(1));
            let (tr, _) = l.trace_and_form(&l.unit, &l.unit);
            assert_eq!(tr, rat_int(3));
            assert!(l.contains(&l.unit));
        }
        let iso = je().isotope().unwrap();
        assert_eq!(iso.e.det(), rat_int(1));
        assert_eq!(iso.e_sharp, iso.e.adjoint());
    }

    #[test]
    fn adjoint_of_idempotent() {
        assert!(jz().adjoint(&RatAlbert::e(1)).is_zero());
    }

    #[test]
    fn isotope_freudenthal() {
        for seed in 0..40 {
            let t = sample(seed, je());
            let tt = je().adjoint(&je().adjoint(&t));
            assert_eq!(tt, t.scale(&t.det()), "seed {seed}");
        }
    }

    #[test]
    fn forms_agree_across_routes() {
        for l in [jz(), je()] {
            for seed in 0..15 {
                let a = sample(seed, l);
                let b = sample(seed + 100, l);
                let (tr, f) = l.trace_and_form(&a, &b);
                assert_eq!(f, l.form_explicit(&a, &b));
                assert_eq!(tr, l.trace_explicit(&a));
                if l.name == LatticeName::JZ {
                    assert_eq!(f, a.form(&b));
                }
            }
        }
    }

    #[test]
    fn grams_are_unimodular_and_definite() {
        for l in [jz(), je()] {
            assert_eq!(l.gram_det(), 1, "{}", l.name);
            // Leading principal minors positive.
            for k in 1..=RANK {
                let m: Vec<Vec<i64>> = l.gram[..k].iter().map(|r| r[..k].to_vec()).collect();
                assert!(det_integer(&m) > 0.into(), "{} minor {k}", l.name);
            }
        }
        // JZ: <1>^3 plus three copies of the octonion Gram.
        let g = &jz().gram;
        let order = CoxeterOrder::get();
        for i in 0..RANK {
            for j in 0..RANK {
                let expect = if i < 3 || j < 3 {
                    i64::from(i == j)
                } else if (i - 3) / 8 == (j - 3) / 8 {
                    order.gram[(i - 3) % 8][(j - 3) % 8]
                } else {
                    0
                };
                assert_eq!(g[i][j], expect);
            }
        }
    }

    #[test]
    fn closure_on_basis() {
        for l in [jz(), je()] {
            for (i, v) in l.basis.iter().enumerate() {
                let adj = l.adjoint(v);
                assert!(l.contains(&adj), "{} basis {i}", l.name);
                assert!(v.det().is_integer());
            }
        }
    }

    #[test]
    fn content_examples() {
        let l = jz();
        assert_eq!(l.content(&RatAlbert::e(1).scale(&rat_int(2))).unwrap(), 2);
        let mut t = &RatAlbert::e(1) + &RatAlbert::e(2);
        t.z = Octonion::unit(1);
        assert_eq!(l.content(&t).unwrap(), 1);
        for seed in 0..20 {
            let t = sample(seed, l);
            if t.is_zero() {
                continue;
            }
            let c = l.content(&t).unwrap();
            assert_eq!(l.content(&t.scale(&rat_int(6))).unwrap(), 6 * c);
        }
        assert!(matches!(l.content(&RatAlbert::zero()), Err(Error::InvalidArgument(_))));
        assert!(matches!(l.content(&RatAlbert::diag(rat(1, 2), rat_int(0), rat_int(0))), Err(Error::NotInLattice)));
    }

    #[test]
    fn integer_kernel_matches_exact() {
        for l in [jz(), je()] {
            for seed in 0..20 {
                let t = sample(seed, l);
                let v = l.coordinates(&t).unwrap();
                let d = l.doubled_element(&v);
                let adj16 = l.adjoint_doubled_x16(&d).map(|x| rat(*x, 16));
                assert_eq!(adj16, l.adjoint(&t));
                assert_eq!(rat_int(l.trace_doubled(&d)), l.trace_explicit(&t));
                assert_eq!(rat_int(l.norm_coords(&v)), l.form_explicit(&t, &t));
            }
        }
    }

    #[test]
    fn quad_scalars_flow_through() {
        let w = QuadExt::sqrt(-2).unwrap();
        let t: AlbertElement<QuadExt> = RatAlbert::e(2).map(|v| QuadExt::from(v.clone())).scale(&w);
        let (tr, _) = je().trace_and_form(&t, &t);
        assert_eq!(tr, je().trace_explicit(&t));
    }

    #[test]
    fn descriptor_json() {
        let d = je().descriptor();
        assert_eq!(d["name"], "je");
        assert_eq!(d["gram_det"], 1);
        assert_eq!(d["basis"].as_array().unwrap().len(), RANK);
        let name: LatticeName = "JZ".parse().unwrap();
        assert_eq!(name, LatticeName::JZ);
        assert!("jq".parse::<LatticeName>().is_err());
    }
}
