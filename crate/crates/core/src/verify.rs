//! Named verification suites. Each returns a report of independent checks;
//! a suite passes when every check does.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::albert::det_line;
use crate::arith::{rat, rat_int};
use crate::enumerate::{shell, ShellSource};
use crate::error::{Error, Result};
use crate::lattice::{make_lattice, LatticeName};
use crate::localzeta::{compare, inner_integral, SatakeParam};
use crate::modforms::{delta, eisenstein, hecke, identify_named, span_rank, QSeries, Space};
use crate::octonion::{order_contains, CoxeterOrder};
use crate::weightpoly::{
    builtin_b, collinear_xelements, je_generators_with_nonzero_a2, leading_term_check, low_points,
    rank_one_trace_zero, script_p, theta_series, theta_series_multi, third_point_xelements, Normalization, SymTensor,
    WeightPolynomial,
};
use crate::{QuadExt, RatAlbert, RatOctonion, Rational};

pub const REPORT_SCHEMA: &str = "albert-theta/verify/v1";

/// Cases per fuzzed law.
pub const FUZZ_CASES: usize = 1000;
const FUZZ_SEED: u64 = 0x5eed_a1be;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Weight12,
    Weight14,
    Weight16,
    Span24,
    LocalZeta,
    AlgebraLaws,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Weight12, Suite::Weight14, Suite::Weight16, Suite::Span24, Suite::LocalZeta, Suite::AlgebraLaws];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Weight12 => "weight12",
            Suite::Weight14 => "weight14",
            Suite::Weight16 => "weight16",
            Suite::Span24 => "span24",
            Suite::LocalZeta => "local-zeta",
            Suite::AlgebraLaws => "algebra-laws",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_outcome(name: &str, outcome: std::result::Result<String, String>) -> Self {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Check { name: name.to_string(), passed, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": REPORT_SCHEMA,
            "suite": self.suite,
            "passed": self.passed(),
            "checks": self.checks,
        })
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "{}: {}", self.suite, if self.passed() { "ok" } else { "FAILED" })
    }
}

pub fn run(suite: Suite, source: &ShellSource) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Weight12 => weight12(source)?,
        Suite::Weight14 => weight14(source)?,
        Suite::Weight16 => weight16(source)?,
        Suite::Span24 => span24(source)?,
        Suite::LocalZeta => local_zeta()?,
        Suite::AlgebraLaws => algebra_laws(source)?,
    };
    Ok(SuiteReport { suite, checks })
}

/// Exact coefficientwise comparison; the error lists every mismatch.
pub fn compare_series(got: &QSeries, want: &QSeries) -> std::result::Result<String, String> {
    if got.weight != want.weight {
        return Err(format!("weight {} != {}", got.weight, want.weight));
    }
    let prec = got.prec.min(want.prec);
    let diffs: Vec<String> = (0..=prec)
        .filter(|&n| got.coeffs[n] != want.coeffs[n])
        .map(|n| format!("q^{n}: got {}, expected {}", got.coeffs[n], want.coeffs[n]))
        .collect();
    if diffs.is_empty() {
        Ok(format!("{got}"))
    } else {
        Err(diffs.join("; "))
    }
}

fn zero_check(s: &QSeries) -> std::result::Result<String, String> {
    compare_series(s, &QSeries::zero(s.weight, s.prec))
}

/// `E12 + c * Delta` to precision `prec`.
pub fn genus_form(c: &Rational, prec: usize) -> Result<QSeries> {
    eisenstein(12, prec)?.try_add(&delta(prec).scale(c))
}

fn weight12(source: &ShellSource) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let jz = theta_series(LatticeName::JZ, None, 4, Normalization::ElkiesGross, source)?;
    checks.push(Check::from_outcome("jz theta = E12 + 432000/691 Delta", compare_series(&jz.rational, &genus_form(&rat(432000, 691), 4)?)));
    let named = identify_named(&jz.rational, Space::Modular).map(|i| i.to_string());
    checks.push(Check::from_outcome(
        "jz identify",
        match named {
            Ok(s) if s == "E12 + 432000/691 * Delta" => Ok(s),
            Ok(s) => Err(s),
            Err(e) => Err(e.to_string()),
        },
    ));
    let je = theta_series(LatticeName::JE, None, 2, Normalization::ElkiesGross, source)?;
    checks.push(Check::from_outcome("je theta = E12 - 65520/691 Delta", compare_series(&je.rational, &genus_form(&rat(-65520, 691), 2)?)));
    for (name, want) in [(LatticeName::JZ, [3u64, 747]), (LatticeName::JE, [0, 819])] {
        let got = [1, 2]
            .into_iter()
            .map(|n| shell(name, n, source.cache.as_ref(), source.force).map(|s| s.weighted_count))
            .collect::<Result<Vec<u64>>>()?;
        checks.push(Check::from_outcome(
            &format!("{name} weighted counts traces 1-2"),
            if got == want { Ok(format!("{got:?}")) } else { Err(format!("got {got:?}, expected {want:?}")) },
        ));
    }
    Ok(checks)
}

fn weight14(source: &ShellSource) -> Result<Vec<Check>> {
    let l = make_lattice(LatticeName::JZ);
    let pts = low_points(LatticeName::JZ, source)?;
    let mut gens = vec![builtin_b()?];
    gens.extend(collinear_xelements(l, &pts, 1));
    gens.extend(third_point_xelements(l, &pts, 1));
    if gens.len() < 3 {
        return Err(Error::Construction(format!("only {} degree-1 generators", gens.len())));
    }
    let polys: Vec<WeightPolynomial> = gens.into_iter().map(|x| WeightPolynomial::new(1, x)).collect::<Result<_>>()?;
    let refs: Vec<Option<&WeightPolynomial>> = polys.iter().map(Some).collect();
    let thetas = theta_series_multi(LatticeName::JZ, &refs, 4, Normalization::Plain, source)?;
    let mut checks = Vec::new();
    for (p, t) in polys.iter().zip(&thetas) {
        let label = serde_json::to_value(&p.generator.provenance)?["kind"].as_str().unwrap_or("?").to_string();
        checks.push(Check::from_outcome(&format!("{label} d={} 1-component", p.generator.d), zero_check(&t.rational)));
        checks.push(Check::from_outcome(&format!("{label} d={} surd component", p.generator.d), zero_check(&t.surd)));
    }
    Ok(checks)
}

fn weight16(source: &ShellSource) -> Result<Vec<Check>> {
    let q2 = WeightPolynomial::new(2, builtin_b()?)?;
    let t = theta_series(LatticeName::JZ, Some(&q2), 5, Normalization::Plain, source)?;
    let mut e4d = eisenstein(4, 5)?.mul(&delta(5));
    e4d.weight = 16;
    let mut checks = vec![
        Check::from_outcome("1-component = 6 E4 Delta", compare_series(&t.rational, &e4d.scale(&rat_int(6)))),
        Check::from_outcome("sqrt(-2) component", zero_check(&t.surd)),
    ];
    checks.push(Check::from_outcome(
        "identify in S16",
        match identify_named(&t.rational, Space::Cusp) {
            Ok(i) if i.to_string() == "6 * E4*Delta" => Ok(i.to_string()),
            Ok(i) => Err(i.to_string()),
            Err(e) => Err(e.to_string()),
        },
    ));
    let t2 = hecke(2, &t.rational)?;
    checks.push(Check::from_outcome("T2 eigenvalue 216", compare_series(&t2, &t.rational.truncate(t2.prec).scale(&rat_int(216)))));
    Ok(checks)
}

fn span24(source: &ShellSource) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let p = WeightPolynomial::new(6, builtin_b()?)?;
    let jz = theta_series(LatticeName::JZ, Some(&p), 2, Normalization::Plain, source)?;
    let a1 = jz.rational.coeffs[1].clone();
    checks.push(Check::from_outcome(
        "jz a1 != 0",
        if a1.is_zero() { Err("a1 = 0".into()) } else { Ok(format!("a1 = {a1}")) },
    ));
    let je = je_generators_with_nonzero_a2(6, 8, source)?;
    let Some((jp, jt)) = je.first() else {
        checks.push(Check::from_outcome("je a2 != 0", Err("every constructed je generator has a2 = 0".into())));
        return Ok(checks);
    };
    let comp = if jt.rational.coeffs[2].is_zero() { &jt.surd } else { &jt.rational };
    checks.push(Check::from_outcome("je a2 != 0", Ok(format!("a2 = {} (d = {})", comp.coeffs[2], jp.generator.d))));
    let rank = span_rank(&[jz.rational.clone(), comp.clone()], 24, 2)?;
    checks.push(Check::from_outcome("rank = dim S24 = 2", if rank == 2 { Ok("2".into()) } else { Err(format!("rank {rank}")) }));
    Ok(checks)
}

fn local_zeta() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for alpha in [rat_int(1), rat(1, 2), rat_int(3)] {
        for p in [2u64, 3, 5] {
            let row = compare(&SatakeParam::new(alpha.clone(), p)?, 60)?;
            let text = format!("|diff| = {:.4e}, bound = {:.4e}", row.abs_difference, row.bound);
            checks.push(Check::from_outcome(
                &format!("alpha={} p={p} N=60", row.alpha),
                if row.within_bound { Ok(text) } else { Err(text) },
            ));
        }
    }
    for p in [2u64, 3, 5] {
        let r = (0..=20).try_for_each(|n| inner_integral(n, p).map(|_| ()));
        checks.push(Check::from_outcome(&format!("inner integral p={p} n<=20"), r.map(|_| "forms agree".into()).map_err(|e| e.to_string())));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Algebra laws.

fn random_octonion(rng: &mut ChaCha8Rng) -> RatOctonion {
    let c: Vec<i64> = (0..8).map(|_| rng.gen_range(-3..=3)).collect();
    RatOctonion::from_doubled(&CoxeterOrder::get().doubled_from_coords(&c))
}

fn random_albert(rng: &mut ChaCha8Rng) -> RatAlbert {
    let mut d = || rat_int(rng.gen_range(-4..=4));
    let (a, b, c) = (d(), d(), d());
    RatAlbert::new(a, b, c, random_octonion(rng), random_octonion(rng), random_octonion(rng))
}

fn fuzz(name: &str, rng: &mut ChaCha8Rng, mut case: impl FnMut(&mut ChaCha8Rng) -> std::result::Result<(), String>) -> Check {
    for i in 0..FUZZ_CASES {
        if let Err(e) = case(rng) {
            return Check::from_outcome(name, Err(format!("case {i}: {e}")));
        }
    }
    Check::from_outcome(name, Ok(format!("{FUZZ_CASES} cases")))
}

fn law(ok: bool, what: impl Fn() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn algebra_laws(source: &ShellSource) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
    let mut checks = Vec::new();
    checks.push(fuzz("composition N(xy) = N(x)N(y)", &mut rng, |r| {
        let (x, y) = (random_octonion(r), random_octonion(r));
        law(x.mul(&y).norm() == x.norm() * y.norm(), || format!("x={x:?} y={y:?}"))
    }));
    checks.push(fuzz("alternativity", &mut rng, |r| {
        let (x, y) = (random_octonion(r), random_octonion(r));
        let left = x.mul(&x.mul(&y)) == x.mul(&x).mul(&y);
        let right = y.mul(&x).mul(&x) == y.mul(&x.mul(&x));
        law(left && right, || format!("x={x:?} y={y:?}"))
    }));
    checks.push(fuzz("trace associativity", &mut rng, |r| {
        let (x, y, z) = (random_octonion(r), random_octonion(r), random_octonion(r));
        law(x.mul(&y).mul(&z).trace() == x.mul(&y.mul(&z)).trace(), || format!("x={x:?} y={y:?} z={z:?}"))
    }));
    checks.push(fuzz("order closure", &mut rng, |r| {
        let (x, y) = (random_octonion(r), random_octonion(r));
        law(order_contains(&x.mul(&y)), || format!("x={x:?} y={y:?}"))
    }));
    checks.push(fuzz("Freudenthal (A#)# = det(A) A", &mut rng, |r| {
        let a = random_albert(r);
        law(a.adjoint().adjoint() == a.scale(&a.det()), || format!("A={a:?}"))
    }));
    checks.push(fuzz("cubic expansion det(A+tB)", &mut rng, |r| {
        let (a, b) = (random_albert(r), random_albert(r));
        let want = [a.det(), a.adjoint().form(&b), a.form(&b.adjoint()), b.det()];
        let got = det_line(&a, &b);
        let direct = (-2i64..=2).all(|t| {
            let tr = rat_int(t);
            let lhs = (&a + &b.scale(&tr)).det();
            let rhs = want.iter().rev().fold(Rational::zero(), |acc, c| acc * &tr + c);
            lhs == rhs
        });
        law(got == want && direct, || format!("A={a:?} B={b:?}"))
    }));
    let je = make_lattice(LatticeName::JE);
    let u = je.unit.clone();
    checks.push(fuzz("isotope unit", &mut rng, |r| {
        let x = random_albert(r);
        let fixed = je.adjoint(&u) == u && je.trace_explicit(&u) == rat_int(3);
        // U x X = Tr(X) U - X
        let cross = je.cross(&u, &x) == &u.scale(&je.trace_explicit(&x)) - &x;
        law(fixed && cross, || format!("X={x:?}"))
    }));
    checks.push(fuzz("isotope Freudenthal", &mut rng, |r| {
        let x = random_albert(r);
        let xs = je.adjoint(&x);
        let n = je.form_explicit(&xs, &x) / rat_int(3);
        law(je.adjoint(&xs) == x.scale(&n), || format!("X={x:?}"))
    }));
    checks.push(rank_one_norms(source)?);
    checks.push(fuzz("leading-term identity n<=2", &mut rng, |r| {
        let (y, z) = (random_octonion(r), random_octonion(r));
        if y.is_zero() && z.is_zero() {
            return Ok(());
        }
        let a = rank_one_trace_zero(&y, &z).map_err(|e| e.to_string())?;
        for n in 1..=2usize {
            let image = script_p(&vec![a.clone(); n]);
            let top = SymTensor::elementary(vec![a.clone(); n]).dense(n);
            for k in 0..=n {
                let got = image.dense(k);
                let ok = if k == n { got == top } else { got.iter().all(QuadExt::is_zero) };
                if !ok {
                    return Err(format!("n={n} degree {k} y={y:?} z={z:?}"));
                }
            }
        }
        Ok(())
    }));
    let jz = make_lattice(LatticeName::JZ);
    let pts = low_points(LatticeName::JZ, source)?;
    let mut gens = vec![builtin_b()?];
    gens.extend(collinear_xelements(jz, &pts, 1));
    gens.extend(third_point_xelements(jz, &pts, 1));
    let outcome = gens.iter().try_for_each(|g| {
        (1..=2).try_for_each(|n| leading_term_check(&WeightPolynomial::new(n, g.clone())?))
    });
    checks.push(Check::from_outcome(
        "leading-term contraction, jz generators",
        outcome.map(|_| format!("{} generators, n = 1, 2", gens.len())).map_err(|e| e.to_string()),
    ));
    Ok(checks)
}

/// `(T, T)_L = TrL(T)^2` for every element of the low shells.
fn rank_one_norms(source: &ShellSource) -> Result<Check> {
    let mut total = 0usize;
    for (name, top) in [(LatticeName::JZ, 3u32), (LatticeName::JE, 2)] {
        let l = make_lattice(name);
        for n in 1..=top {
            let s = shell(name, n, source.cache.as_ref(), source.force)?;
            for v in s.iter() {
                let tr = l.trace_doubled(&l.doubled_element(&v));
                if l.norm_coords(&v) != tr * tr || tr != i64::from(n) {
                    return Ok(Check::from_outcome("rank-one norm identity", Err(format!("{name} {v:?}"))));
                }
            }
            total += s.len();
        }
    }
    Ok(Check::from_outcome("rank-one norm identity", Ok(format!("{total} elements"))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("weight13".parse::<Suite>().is_err());
    }

    #[test]
    fn series_diff_lists_mismatches() {
        let a = QSeries::from_integers(12, &[1, 2, 3]);
        let b = QSeries::from_integers(12, &[1, 5, 3]);
        assert!(compare_series(&a, &a).is_ok());
        let e = compare_series(&a, &b).unwrap_err();
        assert!(e.contains("q^1"));
        assert!(!e.contains("q^2"));
    }

    #[test]
    fn local_zeta_report_shape() {
        let r = run(Suite::LocalZeta, &ShellSource::default()).unwrap();
        assert_eq!(r.checks.len(), 12);
        assert_eq!(r.to_json()["schema"], REPORT_SCHEMA);
        assert!(r.checks[9..].iter().all(|c| c.passed));
    }
}
