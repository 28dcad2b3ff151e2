//! Weight polynomials `P(X) = ((X, A)_L)^n` for rank-one, trace-zero `A`
//! over an imaginary quadratic field, the theta series they weight, and the
//! tensor recursion `P_k` with its leading-term identity.

use std::collections::HashMap;

use log::debug;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{rat_int, squarefree_decompose, QuadExt};
use crate::enumerate::{sigma3, ShellSource};
use crate::error::{Error, Result};
use crate::lattice::{make_lattice, AlbertLattice, LatticeName, LatticeVector, RANK};
use crate::modforms::QSeries;
use crate::scalar::{pow, FieldScalar};
use crate::{AlbertElement, IntAlbert, Octonion, QuadAlbert, RatAlbert, RatOctonion, Rational};

/// How an [`XElement`] was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Builtin,
    /// Three integral points on one line (lattice coordinates).
    CollinearTriple { points: Vec<Vec<i64>> },
    /// Two integral points and the rational point where their line meets the
    /// line through two auxiliary points.
    ThirdPoint { t1: Vec<i64>, t2: Vec<i64>, u1: Vec<i64>, u2: Vec<i64> },
    /// Supplied directly.
    Given,
}

/// A nonzero `A` with vanishing lattice adjoint and `TrL(A) = 0`, over
/// `Q(sqrt(-d))`.
#[derive(Clone, Debug, Serialize)]
pub struct XElement {
    pub lattice: LatticeName,
    pub d: i64,
    #[serde(rename = "A")]
    pub a: QuadAlbert,
    pub provenance: Provenance,
}

impl XElement {
    /// Verifies the defining conditions exactly.
    pub fn new(lattice: LatticeName, a: QuadAlbert, provenance: Provenance) -> Result<Self> {
        let mut field = None;
        for c in a.to_coords() {
            if let Some(f) = c.field().filter(|_| !c.is_rational()) {
                if field.is_some_and(|g| g != f) {
                    return Err(Error::FieldMismatch(field.unwrap_or(0), f));
                }
                field = Some(f);
            }
        }
        let f = field.ok_or_else(|| Error::Construction("a rational element cannot be rank one with trace zero".into()))?;
        if f >= 0 {
            return Err(Error::Construction(format!("field Q(sqrt {f}) is real")));
        }
        let l = make_lattice(lattice);
        if a.is_zero() {
            return Err(Error::Construction("zero element".into()));
        }
        if !l.adjoint(&a).is_zero() {
            return Err(Error::Verification("lattice adjoint does not vanish".into()));
        }
        if !l.trace_explicit(&a).is_zero() {
            return Err(Error::Verification("trace does not vanish".into()));
        }
        Ok(XElement { lattice, d: -f, a, provenance })
    }
}

/// `X -> ((X, A)_L)^n`.
#[derive(Clone, Debug)]
pub struct WeightPolynomial {
    pub degree: u32,
    pub generator: XElement,
}

impl WeightPolynomial {
    pub fn new(degree: u32, generator: XElement) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidArgument("weight polynomials have degree >= 1".into()));
        }
        Ok(WeightPolynomial { degree, generator })
    }

    pub fn lattice(&self) -> LatticeName {
        self.generator.lattice
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lattice": self.generator.lattice,
            "n": self.degree,
            "d": self.generator.d,
            "A": serde_json::to_value(&self.generator.a).expect("serializable"),
            "provenance": serde_json::to_value(&self.generator.provenance).expect("serializable"),
        })
    }
}

fn lift(t: &RatAlbert) -> QuadAlbert {
    t.map(|v| QuadExt::from(v.clone()))
}

/// `[2, -1, -1; e_1, w e_2, w e_4]` with `w = sqrt(-2)`, for `JZ`.
pub fn builtin_b() -> Result<XElement> {
    let w = QuadExt::sqrt(-2)?;
    let q = |n: i64| QuadExt::from(rat_int(n));
    let unit = |i: usize| Octonion::<QuadExt>::unit(i);
    let a = AlbertElement::new(q(2), q(-1), q(-1), unit(1), unit(2).scale(&w), unit(4).scale(&w));
    XElement::new(LatticeName::JZ, a, Provenance::Builtin)
}

/// `[a, N(z)/a, N(y)/a; conj(yz)/a, y, z]` with `a^2 = -(N(y) + N(z))`:
/// rank one and trace zero for the standard structure.
pub fn rank_one_trace_zero(y: &RatOctonion, z: &RatOctonion) -> Result<QuadAlbert> {
    let s = y.norm() + z.norm();
    if s.is_zero() {
        return Err(Error::InvalidArgument("y and z vanish".into()));
    }
    // -s = sq^2 * free / den^2
    let num = -s.numer() * s.denom();
    let (sq, free) = squarefree_decompose(&num);
    let free = free.to_i64().ok_or(Error::Overflow("squarefree part"))?;
    let a = QuadExt::new(Rational::zero(), Rational::new(sq, s.denom().clone()), free)?;
    let ainv = a.try_inv()?;
    let yq = y.map(|v| QuadExt::from(v.clone()));
    let zq = z.map(|v| QuadExt::from(v.clone()));
    let x = yq.mul(&zq).conj().scale(&ainv);
    Ok(AlbertElement::new(
        a.clone(),
        QuadExt::from(z.norm()) * ainv.clone(),
        QuadExt::from(y.norm()) * ainv,
        x,
        yq,
        zq,
    ))
}

/// `((T, A)_L)^n`.
pub fn evaluate(p: &WeightPolynomial, t: &RatAlbert) -> QuadExt {
    let l = make_lattice(p.lattice());
    pow(&l.form_explicit(&lift(t), &p.generator.a), p.degree)
}

// ---------------------------------------------------------------------------
// Projective constructions.

/// `(T1 x T2) x (U1 x U2)`: the point where the line through `T1, T2` meets
/// the line through `U1, U2`.
pub fn third_point_on_line(l: &AlbertLattice, t1: &RatAlbert, t2: &RatAlbert, u1: &RatAlbert, u2: &RatAlbert) -> Result<RatAlbert> {
    let line = l.cross(t1, t2);
    let aux = l.cross(u1, u2);
    if line.is_zero() || aux.is_zero() {
        return Err(Error::Construction("degenerate line".into()));
    }
    let p = l.cross(&line, &aux);
    if p.is_zero() {
        return Err(Error::Construction("the two lines coincide".into()));
    }
    Ok(p)
}

/// `c` with `x = c * line`, if `x` is a multiple of `line`.
fn ratio(x: &RatAlbert, line: &RatAlbert) -> Option<Rational> {
    let xs = x.to_coords();
    let ls = line.to_coords();
    let j = ls.iter().position(|v| !v.is_zero())?;
    let c = &xs[j] / &ls[j];
    (line.scale(&c) == *x).then_some(c)
}

/// A rank-one, trace-zero `alpha T1 + beta T2 + T3` for three points on a line.
pub fn solve_collinear(l: &AlbertLattice, pts: [&RatAlbert; 3], provenance: Provenance) -> Result<XElement> {
    let tr: Vec<Rational> = pts.iter().map(|p| l.trace_explicit(*p)).collect();
    // Eliminate a point with nonzero trace: it takes the role of T2.
    let order = if !tr[1].is_zero() {
        [0, 1, 2]
    } else if !tr[0].is_zero() {
        [1, 0, 2]
    } else {
        return Err(Error::Construction("two points with trace zero".into()));
    };
    let (p1, p2, p3) = (pts[order[0]], pts[order[1]], pts[order[2]]);
    let (t1, t2, t3) = (&tr[order[0]], &tr[order[1]], &tr[order[2]]);
    let x12 = l.cross(p1, p2);
    let x23 = l.cross(p2, p3);
    let x31 = l.cross(p3, p1);
    let line = [&x12, &x23, &x31]
        .into_iter()
        .find(|x| !x.is_zero())
        .ok_or_else(|| Error::Construction("points are proportional".into()))?
        .clone();
    let c: Vec<Rational> = [&x12, &x23, &x31]
        .iter()
        .map(|x| ratio(x, &line).ok_or_else(|| Error::Construction("points are not collinear".into())))
        .collect::<Result<_>>()?;
    if c.iter().filter(|v| !v.is_zero()).count() < 2 {
        return Err(Error::Construction("fewer than two independent crosses".into()));
    }
    let (c12, c23, c31) = (&c[0], &c[1], &c[2]);
    // With gamma = 1 and beta = -(alpha t1 + t3)/t2:
    let qa = t1 * c12;
    let qb = t1 * c23 + t3 * c12 - t2 * c31;
    let qc = t3 * c23;
    if qa.is_zero() {
        return Err(Error::Construction("degenerate quadratic".into()));
    }
    let disc = &qb * &qb - rat_int(4) * &qa * &qc;
    if !disc.is_negative() {
        return Err(Error::Construction("nonnegative discriminant".into()));
    }
    let (sq, free) = squarefree_decompose(&(disc.numer() * disc.denom()));
    let free = free.to_i64().ok_or(Error::Overflow("squarefree part"))?;
    let root = QuadExt::new(Rational::zero(), Rational::new(sq, disc.denom().clone()), free)?;
    let two_qa = QuadExt::from(rat_int(2) * &qa);
    let alpha = (QuadExt::from(-qb) + root) / two_qa;
    let beta = -(alpha.clone() * QuadExt::from(t1.clone()) + QuadExt::from(t3.clone())) / QuadExt::from(t2.clone());
    let a = &(&lift(p1).scale(&alpha) + &lift(p2).scale(&beta)) + &lift(p3);
    XElement::new(l.name, a, provenance)
}

/// `16 (T_i x_L T_j)` from doubled coordinates.
fn cross_x16(l: &AlbertLattice, a: &IntAlbert, b: &IntAlbert) -> IntAlbert {
    let s = a + b;
    &(&l.adjoint_doubled_x16(&s) - &l.adjoint_doubled_x16(a)) - &l.adjoint_doubled_x16(b)
}

fn projective_key(v: &IntAlbert) -> Option<Vec<i64>> {
    let mut c = v.to_coords();
    let g = c.iter().fold(0i64, |g, x| g.gcd(x));
    if g == 0 {
        return None;
    }
    let first = *c.iter().find(|x| **x != 0)?;
    let g = if first < 0 { -g } else { g };
    for x in c.iter_mut() {
        *x /= g;
    }
    Some(c)
}

/// Index triples of collinear points, found by bucketing pairs on the
/// projective class of their cross. Stops after `want` triples.
pub fn collinear_triples(l: &AlbertLattice, points: &[LatticeVector], want: usize) -> Vec<[usize; 3]> {
    let doubled: Vec<IntAlbert> = points.iter().map(|v| l.doubled_element(v)).collect();
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut out = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let Some(key) = projective_key(&cross_x16(l, &doubled[i], &doubled[j])) else { continue };
            let members = buckets.entry(key).or_default();
            let before = members.len();
            for k in [i, j] {
                if !members.contains(&k) {
                    members.push(k);
                }
            }
            if before < 3 && members.len() >= 3 {
                let mut t = [members[0], members[1], members[2]];
                t.sort_unstable();
                out.push(t);
                if out.len() >= want {
                    return out;
                }
            }
        }
    }
    out
}

/// Up to `want` elements from collinear integral triples, then from the
/// third-point construction, in a deterministic order.
pub fn construct_xelements(l: &AlbertLattice, points: &[LatticeVector], want: usize) -> Vec<XElement> {
    let mut out = collinear_xelements(l, points, want);
    if out.len() < want {
        out.extend(third_point_xelements(l, points, want - out.len()));
    }
    out
}

/// Elements solved from collinear triples of `points`.
pub fn collinear_xelements(l: &AlbertLattice, points: &[LatticeVector], want: usize) -> Vec<XElement> {
    let mut out = Vec::new();
    for t in collinear_triples(l, points, want) {
        let prov = Provenance::CollinearTriple { points: t.iter().map(|&i| points[i].to_vec()).collect() };
        match solve_collinear(l, [&l.element(&points[t[0]]), &l.element(&points[t[1]]), &l.element(&points[t[2]])], prov) {
            Ok(x) => {
                debug!("x-element from collinear triple {t:?}");
                out.push(x);
            }
            Err(e) => debug!("collinear triple {t:?} rejected: {e}"),
        }
    }
    out
}

/// Elements solved from two points of `points` and a constructed third
/// point on their line.
pub fn third_point_xelements(l: &AlbertLattice, points: &[LatticeVector], want: usize) -> Vec<XElement> {
    let elems: Vec<RatAlbert> = points.iter().map(|v| l.element(v)).collect();
    let mut out = Vec::new();
    let n = points.len();
    'pairs: for i in 0..n {
        for j in i + 1..n {
            if out.len() >= want {
                break 'pairs;
            }
            if let Some(x) = third_point_xelement(l, points, &elems, i, j) {
                out.push(x);
            }
        }
    }
    out
}

fn third_point_xelement(l: &AlbertLattice, points: &[LatticeVector], elems: &[RatAlbert], i: usize, j: usize) -> Option<XElement> {
    // Auxiliary points spread over the list; neighbours of T1 and T2 tend to
    // share their lines.
    let n = points.len();
    let others: Vec<usize> = (1..=8).map(|s| (i + j + s * n / 9) % n).filter(|&k| k != i && k != j).collect();
    for (a, &k) in others.iter().enumerate() {
        for &m in &others[a + 1..] {
            let Ok(p0) = third_point_on_line(l, &elems[i], &elems[j], &elems[k], &elems[m]) else { continue };
            if !l.adjoint(&p0).is_zero() || l.cross(&p0, &elems[i]).is_zero() || l.cross(&p0, &elems[j]).is_zero() {
                continue;
            }
            let prov = Provenance::ThirdPoint {
                t1: points[i].to_vec(),
                t2: points[j].to_vec(),
                u1: points[k].to_vec(),
                u2: points[m].to_vec(),
            };
            match solve_collinear(l, [&elems[i], &elems[j], &p0], prov) {
                Ok(x) => {
                    debug!("x-element from third point on ({i}, {j}) via ({k}, {m})");
                    return Some(x);
                }
                Err(e) => debug!("third point on ({i}, {j}) rejected: {e}"),
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Theta series.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Plain,
    ElkiesGross,
}

/// The two rational components of a theta series with values in `Q(sqrt(-d))`.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaSeries {
    pub lattice: LatticeName,
    pub degree: u32,
    pub d: Option<i64>,
    pub normalization: Normalization,
    /// The rational part.
    pub rational: QSeries,
    /// The coefficient of `sqrt(-d)`.
    pub surd: QSeries,
}

/// The pairing `X -> (X, A)_L` on doubled reference coordinates, scaled to
/// integers: `(T, A)_L = (sum D_k p_k + sqrt(-d) sum D_k q_k) / den`.
struct PairingKernel {
    p: [i64; RANK],
    q: [i64; RANK],
    den: BigInt,
    d: i64,
    degree: u32,
}

impl PairingKernel {
    fn new(l: &AlbertLattice, poly: &WeightPolynomial) -> Result<Self> {
        let half = Rational::new(1.into(), 2.into());
        let w: Vec<QuadExt> = (0..RANK)
            .map(|k| l.form_explicit(&lift(&RatAlbert::basis(k)), &poly.generator.a).scale(&half))
            .collect();
        let den = w.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.base().denom()).lcm(v.surd().denom()));
        let to_i64 = |r: &Rational| -> Result<i64> {
            (r * Rational::from_integer(den.clone())).to_integer().to_i64().ok_or(Error::Overflow("pairing weight"))
        };
        let mut p = [0i64; RANK];
        let mut q = [0i64; RANK];
        for k in 0..RANK {
            p[k] = to_i64(w[k].base())?;
            q[k] = to_i64(w[k].surd())?;
        }
        Ok(PairingKernel { p, q, den, d: poly.generator.d, degree: poly.degree })
    }

    /// `den^n (T, A)_L^n` as `(re, im)`.
    fn eval(&self, t: &IntAlbert) -> Option<(i128, i128)> {
        let (mut u, mut v) = (0i128, 0i128);
        let coords = [t.a, t.b, t.c];
        let octs = [&t.x.coords, &t.y.coords, &t.z.coords];
        let mut k = 0;
        for c in coords {
            u += i128::from(c) * i128::from(self.p[k]);
            v += i128::from(c) * i128::from(self.q[k]);
            k += 1;
        }
        for o in octs {
            for c in o {
                u += i128::from(*c) * i128::from(self.p[k]);
                v += i128::from(*c) * i128::from(self.q[k]);
                k += 1;
            }
        }
        let d = i128::from(self.d);
        let (mut re, mut im) = (1i128, 0i128);
        for _ in 0..self.degree {
            let r = re.checked_mul(u)?.checked_sub(d.checked_mul(im)?.checked_mul(v)?)?;
            let i = re.checked_mul(v)?.checked_add(im.checked_mul(u)?)?;
            re = r;
            im = i;
        }
        Some((re, im))
    }
}

type Sums = (Vec<(i128, i128)>, bool);

fn add_sums(mut a: Sums, b: Sums) -> Sums {
    for (x, y) in a.0.iter_mut().zip(b.0) {
        match (x.0.checked_add(y.0), x.1.checked_add(y.1)) {
            (Some(r), Some(i)) => *x = (r, i),
            _ => a.1 = true,
        }
    }
    (a.0, a.1 || b.1)
}

/// Theta series of `lattice` weighted by each entry of `polys` (`None` is
/// the constant 1), in one pass per shell.
pub fn theta_series_multi(
    lattice: LatticeName,
    polys: &[Option<&WeightPolynomial>],
    prec: usize,
    normalization: Normalization,
    source: &ShellSource,
) -> Result<Vec<ThetaSeries>> {
    if prec < 1 {
        return Err(Error::InvalidArgument("precision must be >= 1".into()));
    }
    let l = make_lattice(lattice);
    let kernels: Vec<Option<PairingKernel>> = polys
        .iter()
        .map(|p| match p {
            None => Ok(None),
            Some(p) if p.lattice() != lattice => {
                Err(Error::InvalidArgument(format!("polynomial is for {}, not {lattice}", p.lattice())))
            }
            Some(p) => PairingKernel::new(l, p).map(Some),
        })
        .collect::<Result<_>>()?;
    let m = kernels.len();
    let mut coeffs: Vec<Vec<(i128, i128)>> = vec![vec![(0, 0); prec + 1]; m];
    for n in 1..=prec {
        let (sums, overflow) = source.fold(
            lattice,
            n as u32,
            || (vec![(0i128, 0i128); m], false),
            |mut acc: Sums, t, content| {
                let w = i128::from(sigma3(content).expect("content >= 1"));
                for (slot, k) in acc.0.iter_mut().zip(&kernels) {
                    let (re, im) = match k {
                        None => (1, 0),
                        Some(k) => match k.eval(t) {
                            Some(v) => v,
                            None => {
                                acc.1 = true;
                                continue;
                            }
                        },
                    };
                    match (re.checked_mul(w).and_then(|r| slot.0.checked_add(r)), im.checked_mul(w).and_then(|i| slot.1.checked_add(i))) {
                        (Some(r), Some(i)) => *slot = (r, i),
                        _ => acc.1 = true,
                    }
                }
                acc
            },
            add_sums,
        )?;
        if overflow {
            return Err(Error::Overflow("theta coefficient exceeds i128"));
        }
        for (c, s) in coeffs.iter_mut().zip(sums) {
            c[n] = s;
        }
    }
    Ok(kernels
        .iter()
        .zip(polys)
        .zip(coeffs)
        .map(|((k, p), c)| {
            let scale = match k {
                None => Rational::one(),
                Some(k) => Rational::new(BigInt::one(), pow(&k.den, k.degree)),
            };
            let factor = match normalization {
                Normalization::Plain => scale,
                Normalization::ElkiesGross => scale * rat_int(240),
            };
            let mut re: Vec<Rational> = c.iter().map(|(r, _)| Rational::from_integer(BigInt::from(*r)) * &factor).collect();
            let im: Vec<Rational> = c.iter().map(|(_, i)| Rational::from_integer(BigInt::from(*i)) * &factor).collect();
            let degree = p.map_or(0, |p| p.degree);
            if degree == 0 && normalization == Normalization::ElkiesGross {
                re[0] = Rational::one();
            }
            let weight = 12 + 2 * i64::from(degree);
            ThetaSeries {
                lattice,
                degree,
                d: p.map(|p| p.generator.d),
                normalization,
                rational: QSeries::new(weight, re),
                surd: QSeries::new(weight, im),
            }
        })
        .collect())
}

/// `sum sigma_3(content(T)) P(T) q^TrL(T)` over the positive rank-one cone.
pub fn theta_series(
    lattice: LatticeName,
    poly: Option<&WeightPolynomial>,
    prec: usize,
    normalization: Normalization,
    source: &ShellSource,
) -> Result<ThetaSeries> {
    Ok(theta_series_multi(lattice, &[poly], prec, normalization, source)?.remove(0))
}

// ---------------------------------------------------------------------------
// Tensors and the recursion P_k.

/// A formal sum of elementary tensors `c * X_1 (x) ... (x) X_k`; terms of
/// different degrees may coexist.
#[derive(Clone, Debug)]
pub struct SymTensor<S> {
    pub terms: Vec<(S, Vec<AlbertElement<S>>)>,
}

impl<S: FieldScalar> SymTensor<S> {
    pub fn zero() -> Self {
        SymTensor { terms: Vec::new() }
    }

    pub fn scalar(c: S) -> Self {
        SymTensor { terms: vec![(c, Vec::new())] }
    }

    pub fn elementary(factors: Vec<AlbertElement<S>>) -> Self {
        SymTensor { terms: vec![(S::one(), factors)] }
    }

    pub fn plus(mut self, other: Self) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn scale(&self, c: &S) -> Self {
        SymTensor { terms: self.terms.iter().map(|(k, f)| (k.clone() * c.clone(), f.clone())).collect() }
    }

    /// Each term followed by `(x) a`.
    pub fn tensor_right(&self, a: &AlbertElement<S>) -> Self {
        SymTensor {
            terms: self
                .terms
                .iter()
                .map(|(k, f)| {
                    let mut f = f.clone();
                    f.push(a.clone());
                    (k.clone(), f)
                })
                .collect(),
        }
    }

    /// `a o (X_1 (x) ... (x) X_r) = sum_j X_1 (x) ... (a o X_j) ... (x) X_r`;
    /// scalars go to zero.
    pub fn jordan_act(&self, a: &AlbertElement<S>) -> Self {
        let mut terms = Vec::new();
        for (k, f) in &self.terms {
            for j in 0..f.len() {
                let mut g = f.clone();
                g[j] = a.jordan_product(&f[j]);
                terms.push((k.clone(), g));
            }
        }
        SymTensor { terms }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|(_, f)| f.len()).max().unwrap_or(0)
    }

    /// The degree-`k` part as a dense array over reference coordinates,
    /// indexed `i_1 * 27^(k-1) + ... + i_k`.
    pub fn dense(&self, k: usize) -> Vec<S> {
        let mut out = vec![S::zero(); RANK.pow(k as u32)];
        for (c, f) in self.terms.iter().filter(|(_, f)| f.len() == k) {
            let coords: Vec<Vec<(usize, S)>> = f
                .iter()
                .map(|x| x.to_coords().into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect())
                .collect();
            let mut partial: Vec<(usize, S)> = vec![(0, c.clone())];
            for cs in &coords {
                let mut next = Vec::with_capacity(partial.len() * cs.len());
                for (idx, v) in &partial {
                    for (i, w) in cs {
                        next.push((idx * RANK + i, v.clone() * w.clone()));
                    }
                }
                partial = next;
            }
            for (idx, v) in partial {
                out[idx] = out[idx].clone() + v;
            }
        }
        out
    }
}

/// `P_k(A_1 (x) ... (x) A_k)` by the recursion
/// `P_{k+1} = P_k (x) A + 4 Tr(A) P_k + A o P_k + P_k(A o (A_1 (x) ... (x) A_k))`
/// with `P_0 = 1`.
pub fn script_p<S: FieldScalar>(factors: &[AlbertElement<S>]) -> SymTensor<S> {
    let Some((a, rest)) = factors.split_last() else {
        return SymTensor::scalar(S::one());
    };
    let prev = script_p(rest);
    let four_tr = S::from_i64(4) * a.trace();
    let inner = SymTensor::elementary(rest.to_vec()).jordan_act(a);
    let mut out = prev.tensor_right(a).plus(prev.scale(&four_tr)).plus(prev.jordan_act(a));
    for (c, f) in inner.terms {
        out = out.plus(script_p(&f).scale(&c));
    }
    out
}

/// `{t, P}`: each degree-`n` term paired as `c * prod (X_i, A)_L`. The
/// product is already symmetric, so no averaging is needed.
pub fn sym_pairing(t: &SymTensor<QuadExt>, p: &WeightPolynomial) -> Result<QuadExt> {
    let l = make_lattice(p.lattice());
    let mut acc = QuadExt::zero();
    for (c, f) in &t.terms {
        if f.len() != p.degree as usize {
            return Err(Error::DegreeMismatch(f.len(), p.degree as usize));
        }
        let v = f.iter().fold(c.clone(), |acc, x| acc * l.form_explicit(x, &p.generator.a));
        acc = acc + v;
    }
    Ok(acc)
}

/// The degree-`n` part of `t`.
pub fn homogeneous_part<S: FieldScalar>(t: &SymTensor<S>, n: usize) -> SymTensor<S> {
    SymTensor { terms: t.terms.iter().filter(|(_, f)| f.len() == n).cloned().collect() }
}

/// Compares `sum_i kappa(i) P_n(e_{i_1} (x) ... (x) e_{i_n})`, with
/// `kappa(i)` the product of the coordinates of `A` in the basis `e_i`,
/// against `A^(x)n` in every degree, and the two contractions against `P`.
/// Returns the first mismatch as an error. Only `JZ` generators qualify.
pub fn leading_term_check(p: &WeightPolynomial) -> Result<()> {
    // The recursion uses the standard trace and Jordan product.
    if p.lattice() != LatticeName::JZ {
        return Err(Error::InvalidArgument("the recursion is defined for the standard structure".into()));
    }
    let n = p.degree as usize;
    let a = &p.generator.a;
    let coords = a.to_coords();
    let support: Vec<usize> = (0..RANK).filter(|&i| !coords[i].is_zero()).collect();
    let mut lhs: Vec<Vec<QuadExt>> = (0..=n).map(|k| vec![QuadExt::zero(); RANK.pow(k as u32)]).collect();
    let mut rhs = SymTensor::<QuadExt>::zero();
    let mut idx = vec![0usize; n];
    loop {
        let kappa = idx.iter().fold(QuadExt::one(), |acc, &i| acc * coords[support[i]].clone());
        let basis: Vec<RatAlbert> = idx.iter().map(|&i| RatAlbert::basis(support[i])).collect();
        let image = script_p(&basis);
        for (k, slot) in lhs.iter_mut().enumerate() {
            for (s, v) in slot.iter_mut().zip(image.dense(k)) {
                if !v.is_zero() {
                    *s = s.clone() + kappa.clone() * QuadExt::from(v);
                }
            }
        }
        rhs = rhs.plus(SymTensor::elementary(basis.iter().map(lift).collect()).scale(&kappa));
        let mut j = 0;
        while j < n {
            idx[j] += 1;
            if idx[j] < support.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    let want = SymTensor::elementary(vec![a.clone(); n]);
    for (k, got) in lhs.iter().enumerate() {
        let expect = if k == n { want.dense(k) } else { vec![QuadExt::zero(); RANK.pow(k as u32)] };
        if let Some(i) = (0..got.len()).find(|&i| got[i] != expect[i]) {
            return Err(Error::Verification(format!("degree {k} entry {i}: {} != {}", got[i], expect[i])));
        }
    }
    // Contractions against P: the image's top-degree part and the bare tensors.
    let dense_top = &lhs[n];
    let image_top = dense_to_tensor(dense_top, n);
    let left = sym_pairing(&image_top, p)?;
    let right = sym_pairing(&rhs, p)?;
    if left != right {
        return Err(Error::Verification(format!("contractions differ: {left} != {right}")));
    }
    Ok(())
}

fn dense_to_tensor(v: &[QuadExt], n: usize) -> SymTensor<QuadExt> {
    let mut terms = Vec::new();
    for (idx, c) in v.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut f = Vec::with_capacity(n);
        let mut r = idx;
        for _ in 0..n {
            f.push(QuadAlbert::basis(r % RANK));
            r /= RANK;
        }
        f.reverse();
        terms.push((c.clone(), f));
    }
    SymTensor { terms }
}

/// Lattice coordinates of the low-trace points of `lattice` (traces 1 and 2).
pub fn low_points(lattice: LatticeName, source: &ShellSource) -> Result<Vec<LatticeVector>> {
    let mut out = Vec::new();
    for n in 1..=2 {
        let s = crate::enumerate::shell(lattice, n, source.cache.as_ref(), source.force)?;
        out.extend(s.iter());
    }
    Ok(out)
}

/// Weight polynomials of the given degree whose `JE` theta series has a
/// nonzero `q^2` coefficient in some component; tries up to `budget`
/// constructed generators.
pub fn je_generators_with_nonzero_a2(degree: u32, budget: usize, source: &ShellSource) -> Result<Vec<(WeightPolynomial, ThetaSeries)>> {
    let l = make_lattice(LatticeName::JE);
    let pts = low_points(LatticeName::JE, source)?;
    let xs = construct_xelements(l, &pts, budget);
    let polys: Vec<WeightPolynomial> = xs.into_iter().map(|x| WeightPolynomial::new(degree, x)).collect::<Result<_>>()?;
    let refs: Vec<Option<&WeightPolynomial>> = polys.iter().map(Some).collect();
    let thetas = theta_series_multi(LatticeName::JE, &refs, 2, Normalization::Plain, source)?;
    Ok(polys
        .into_iter()
        .zip(thetas)
        .filter(|(_, t)| !t.rational.coeffs[2].is_zero() || !t.surd.coeffs[2].is_zero())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::octonion::CoxeterOrder;
    use proptest::prelude::*;

    fn jz() -> &'static AlbertLattice {
        make_lattice(LatticeName::JZ)
    }

    fn q2() -> WeightPolynomial {
        WeightPolynomial::new(2, builtin_b().unwrap()).unwrap()
    }

    fn special_t() -> RatAlbert {
        let mut t = RatAlbert::diag(rat_int(0), rat_int(1), rat_int(1));
        t.x = RatOctonion::unit(3);
        t
    }

    #[test]
    fn builtin_b_is_an_x_element() {
        let b = builtin_b().unwrap();
        assert_eq!(b.d, 2);
        assert!(b.a.trace().is_zero());
        assert!(b.a.adjoint().is_zero());
        assert_eq!(b.a.y.norm(), QuadExt::from(rat_int(-2)));
        assert_eq!(b.provenance, Provenance::Builtin);
    }

    #[test]
    fn q2_values() {
        let p = q2();
        assert_eq!(evaluate(&p, &RatAlbert::e(1)), QuadExt::from(rat_int(4)));
        assert_eq!(evaluate(&p, &RatAlbert::e(2)), QuadExt::from(rat_int(1)));
        assert!(evaluate(&p, &RatAlbert::identity()).is_zero());
    }

    #[test]
    fn third_point_example() {
        let l = jz();
        let p = third_point_on_line(l, &RatAlbert::e(2), &RatAlbert::e(3), &RatAlbert::e(1), &special_t()).unwrap();
        assert!(p.adjoint().is_zero());
        assert!(p.form(&RatAlbert::e(1)).is_zero());
        let line = l.cross(&RatAlbert::e(2), &RatAlbert::e(3));
        assert!(l.form_explicit(&p, &line).is_zero());
        let t = special_t();
        assert!(third_point_on_line(l, &RatAlbert::e(2), &RatAlbert::e(3), &t, &t.scale(&rat_int(2))).is_err());
    }

    #[test]
    fn collinear_example() {
        let l = jz();
        let (e2, e3, t) = (RatAlbert::e(2), RatAlbert::e(3), special_t());
        let x = solve_collinear(l, [&e2, &e3, &t], Provenance::Given).unwrap();
        assert_eq!(x.d, 1);
        let i = QuadExt::sqrt(-1).unwrap();
        let mut want = QuadAlbert::diag(QuadExt::zero(), i.clone(), -i);
        want.x = t.x.map(|v| QuadExt::from(v.clone()));
        assert_eq!(x.a, want);
        let e1 = RatAlbert::e(1);
        let mut generic = special_t();
        generic.y = RatOctonion::unit(5);
        assert!(solve_collinear(l, [&e1, &e2, &generic], Provenance::Given).is_err());
    }

    #[test]
    fn constructors_find_elements_in_both_lattices() {
        let source = ShellSource::default();
        for name in [LatticeName::JZ, LatticeName::JE] {
            let l = make_lattice(name);
            let pts = low_points(name, &source).unwrap();
            let mut xs = collinear_xelements(l, &pts, 2);
            assert_eq!(xs.len(), 2, "{name}");
            let third = third_point_xelements(l, &pts, 1);
            assert_eq!(third.len(), 1, "{name}");
            assert!(matches!(third[0].provenance, Provenance::ThirdPoint { .. }));
            xs.extend(third);
            for x in &xs {
                assert!(l.adjoint(&x.a).is_zero());
                assert!(l.trace_explicit(&x.a).is_zero());
                assert!(x.d > 0);
            }
        }
    }

    #[test]
    fn pairing_examples() {
        let p = q2();
        let e1 = QuadAlbert::e(1);
        let e2 = QuadAlbert::e(2);
        let t = SymTensor::elementary(vec![e1.clone(), e2.clone()]);
        assert_eq!(sym_pairing(&t, &p).unwrap(), QuadExt::from(rat_int(-2)));
        let anti = t.clone().plus(SymTensor::elementary(vec![e2, e1.clone()]).scale(&QuadExt::from(rat_int(-1))));
        assert!(sym_pairing(&anti, &p).unwrap().is_zero());
        let sq = SymTensor::elementary(vec![e1.clone(), e1]);
        assert_eq!(sym_pairing(&sq, &p).unwrap(), evaluate(&p, &RatAlbert::e(1)));
        assert!(matches!(sym_pairing(&SymTensor::scalar(QuadExt::one()), &p), Err(Error::DegreeMismatch(0, 2))));
    }

    #[test]
    fn script_p_low_degrees() {
        let p0 = script_p::<Rational>(&[]);
        assert_eq!(p0.terms.len(), 1);
        assert_eq!(p0.dense(0), vec![Rational::one()]);
        let a = RatAlbert::diag(rat_int(2), rat_int(3), rat_int(-1));
        let p1 = script_p(std::slice::from_ref(&a));
        assert_eq!(p1.dense(0), vec![rat_int(16)]);
        assert_eq!(p1.dense(1), a.to_coords());
    }

    #[test]
    fn leading_terms_for_q1_and_q2() {
        for n in 1..=2 {
            let p = WeightPolynomial::new(n, builtin_b().unwrap()).unwrap();
            leading_term_check(&p).unwrap();
        }
    }

    #[test]
    fn theta_low_precision() {
        let source = ShellSource::default();
        let t = theta_series(LatticeName::JZ, None, 2, Normalization::ElkiesGross, &source).unwrap();
        assert_eq!(t.rational, QSeries::from_integers(12, &[1, 720, 179280]));
        let p = q2();
        let t = theta_series(LatticeName::JZ, Some(&p), 2, Normalization::Plain, &source).unwrap();
        assert_eq!(t.rational, QSeries::from_integers(16, &[0, 6, 1296]));
        assert!(t.surd.is_zero());
        let p1 = WeightPolynomial::new(1, builtin_b().unwrap()).unwrap();
        let t = theta_series(LatticeName::JZ, Some(&p1), 2, Normalization::Plain, &source).unwrap();
        assert!(t.rational.is_zero() && t.surd.is_zero());
    }

    #[test]
    fn theta_homogeneity_and_first_coefficient() {
        let source = ShellSource::default();
        let b = builtin_b().unwrap();
        let lam = rat(3, 2);
        let scaled = XElement::new(LatticeName::JZ, b.a.map(|v| v.scale(&lam)), Provenance::Given).unwrap();
        for n in [2u32, 3] {
            let p = WeightPolynomial::new(n, b.clone()).unwrap();
            let ps = WeightPolynomial::new(n, scaled.clone()).unwrap();
            let t = theta_series(LatticeName::JZ, Some(&p), 2, Normalization::Plain, &source).unwrap();
            let ts = theta_series(LatticeName::JZ, Some(&ps), 2, Normalization::Plain, &source).unwrap();
            let f = pow(&lam, n);
            assert_eq!(ts.rational, t.rational.scale(&f));
            assert_eq!(ts.surd, t.surd.scale(&f));
            let a1: QuadExt = (1..=3).map(|i| evaluate(&p, &RatAlbert::e(i))).fold(QuadExt::zero(), |a, b| a + b);
            assert_eq!(QuadExt::from(t.rational.coeffs[1].clone()), a1);
        }
    }

    #[test]
    fn evaluation_matches_kernel() {
        let source = ShellSource::default();
        let l = jz();
        let pts = low_points(LatticeName::JZ, &source).unwrap();
        let x = construct_xelements(l, &pts, 1).remove(0);
        let p = WeightPolynomial::new(3, x).unwrap();
        let t = theta_series(LatticeName::JZ, Some(&p), 2, Normalization::Plain, &source).unwrap();
        let shell2 = crate::enumerate::shell(LatticeName::JZ, 2, None, false).unwrap();
        let mut sum = QuadExt::zero();
        for v in shell2.iter() {
            let w = sigma3(crate::linalg::content_of(&v) as u64).unwrap() as i64;
            sum = sum + evaluate(&p, &l.element(&v)).scale(&rat_int(w));
        }
        assert_eq!(*sum.base(), t.rational.coeffs[2]);
        assert_eq!(*sum.surd(), t.surd.coeffs[2]);
    }

    fn order_element() -> impl Strategy<Value = RatOctonion> {
        prop::array::uniform8(-2i64..=2)
            .prop_map(|c| RatOctonion::from_doubled(&CoxeterOrder::get().doubled_from_coords(&c)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn recursion_fixes_rank_one_trace_zero(y in order_element(), z in order_element()) {
            prop_assume!(!(y.is_zero() && z.is_zero()));
            let a = rank_one_trace_zero(&y, &z).unwrap();
            prop_assert!(a.adjoint().is_zero());
            prop_assert!(a.trace().is_zero());
            for n in 1..=2usize {
                let image = script_p(&vec![a.clone(); n]);
                let want = SymTensor::elementary(vec![a.clone(); n]);
                for k in 0..=n {
                    let expect = if k == n { want.dense(k) } else { vec![QuadExt::zero(); RANK.pow(k as u32)] };
                    prop_assert_eq!(image.dense(k), expect);
                }
            }
        }
    }
}
