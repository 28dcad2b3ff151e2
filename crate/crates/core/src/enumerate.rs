//! Rank-one positive elements of an Albert lattice, shell by shell in the
//! trace.
//!
//! Two independent algorithms: a parametric solve specific to `JZ`, and a
//! short-vector search on the Gram matrix that works for either lattice.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::{debug, info, warn};
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{coords_of_doubled, AlbertLattice, LatticeName, LatticeVector, RANK};
use crate::linalg::content_of;
use crate::octonion::{conj_doubled, mul_int, norm_shell_doubled, CoxeterOrder, Octonion};
use crate::IntAlbert;

pub use crate::shortvec::{short_vectors, ShortVectorSearch};

/// Compact storage for one lattice vector.
pub type ShellVector = [i16; RANK];

/// Environment variable overriding the shell cache directory.
pub const CACHE_ENV: &str = "ALBERT_THETA_CACHE";

const CACHE_MAGIC: &[u8; 8] = b"ATSHELL1";
const CACHE_SCHEMA: &str = "albert-theta/shell/v1";

/// `sum_{d | n} d^3`.
pub fn sigma3(n: u64) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidArgument("sigma3 needs n >= 1".into()));
    }
    let mut s = 0u64;
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += d.pow(3);
            let e = n / d;
            if e != d {
                s += e.pow(3);
            }
        }
        d += 1;
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank1Shell {
    pub lattice: LatticeName,
    pub trace: u32,
    /// Lattice coordinates, sorted lexicographically.
    pub elements: Vec<ShellVector>,
    pub weighted_count: u64,
}

impl Rank1Shell {
    /// Sorts, deduplicates and weighs raw coordinate vectors.
    pub fn from_vectors(lattice: LatticeName, trace: u32, vectors: Vec<LatticeVector>) -> Result<Self> {
        let mut elements: Vec<ShellVector> = vectors.iter().map(compress).collect::<Result<_>>()?;
        elements.par_sort_unstable();
        elements.dedup();
        let weighted_count = elements
            .iter()
            .map(|v| sigma3(content_of(&expand(v)) as u64))
            .sum::<Result<u64>>()?;
        Ok(Rank1Shell { lattice, trace, elements, weighted_count })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> LatticeVector {
        expand(&self.elements[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = LatticeVector> + '_ {
        self.elements.iter().map(expand)
    }

    /// Re-checks every invariant in exact integer arithmetic: vanishing
    /// lattice adjoint, trace, the rank-one norm identity, and the count.
    pub fn verify(&self) -> Result<()> {
        let l = crate::lattice::make_lattice(self.lattice);
        let n = i64::from(self.trace);
        let bad = self.elements.par_iter().find_any(|v| {
            let v = expand(v);
            let d = l.doubled_element(&v);
            !l.is_rank_one_doubled(&d) || l.trace_doubled(&d) != n || l.norm_coords(&v) != n * n
        });
        if let Some(v) = bad {
            return Err(Error::Verification(format!("{} trace {}: bad element {:?}", self.lattice, self.trace, v)));
        }
        if self.elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Verification("shell is not in canonical order".into()));
        }
        let w = self.elements.iter().map(|v| sigma3(content_of(&expand(v)) as u64)).sum::<Result<u64>>()?;
        if w != self.weighted_count {
            return Err(Error::Verification(format!("weighted count {} != {}", self.weighted_count, w)));
        }
        Ok(())
    }
}

fn compress(v: &LatticeVector) -> Result<ShellVector> {
    let mut out = [0i16; RANK];
    for (o, x) in out.iter_mut().zip(v) {
        *o = i16::try_from(*x).map_err(|_| Error::Overflow("lattice coordinate exceeds i16"))?;
    }
    Ok(out)
}

pub fn expand(v: &ShellVector) -> LatticeVector {
    std::array::from_fn(|i| i64::from(v[i]))
}

/// Content from doubled reference coordinates. The diagonal entries are
/// lattice coordinates themselves, so a coprime diagonal settles it.
pub fn content_doubled(d: &IntAlbert) -> Result<u64> {
    let g = (d.a / 2).gcd(&(d.b / 2)).gcd(&(d.c / 2));
    if g == 1 {
        return Ok(1);
    }
    let v = coords_of_doubled(d).ok_or(Error::NotInLattice)?;
    let c = content_of(&v);
    if c == 0 {
        return Err(Error::InvalidArgument("content of the zero element".into()));
    }
    Ok(c as u64)
}

// ---------------------------------------------------------------------------
// Parametric enumeration of JZ.

/// Rotates `(a,b,c;x,y,z)` to `(b,c,a;y,z,x)`, which commutes with the adjoint.
fn rotate(d: &IntAlbert) -> IntAlbert {
    IntAlbert::new(d.b, d.c, d.a, d.y.clone(), d.z.clone(), d.x.clone())
}

fn doubled(a: i64, b: i64, c: i64, x: [i64; 8], y: [i64; 8], z: [i64; 8]) -> IntAlbert {
    IntAlbert::new(2 * a, 2 * b, 2 * c, Octonion::new(x), Octonion::new(y), Octonion::new(z))
}

/// The compositions `(a, b, c)` of `n` into nonnegative parts, in lexicographic order.
fn compositions(n: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            out.push((a, b, n - a - b));
        }
    }
    out
}

/// Folds over all rank-one `T = [a,b,c;x,y,z]` in `JZ` with `a+b+c = n`,
/// `a,b,c >= 0`. `f` receives `2T` in reference coordinates.
pub fn fold_rank1_parametric<A, I, F, R>(n: u32, init: I, f: F, reduce: R) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, &IntAlbert) -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    let n = i64::from(n);
    let order = CoxeterOrder::get();
    let mut shells: HashMap<i64, Vec<[i64; 8]>> = HashMap::new();
    let mut shell = |m: i64| -> Vec<[i64; 8]> { shells.entry(m).or_insert_with(|| norm_shell_doubled(m as u64)).clone() };
    let zero = [0i64; 8];
    let mut acc = init();
    for (a, b, c) in compositions(n) {
        let zeros = [a, b, c].iter().filter(|&&v| v == 0).count();
        match zeros {
            3 => {}
            2 => acc = f(acc, &doubled(a, b, c, zero, zero, zero)),
            1 => {
                // Rotate the zero into the third slot: [p, q, 0; 0, 0, z] with N(z) = pq.
                let k = [a, b, c].iter().position(|&v| v == 0).expect("one zero");
                let (p, q) = match k {
                    2 => (a, b),
                    0 => (b, c),
                    _ => (c, a),
                };
                for z in shell(p * q) {
                    let mut t = doubled(p, q, 0, zero, zero, z);
                    for _ in 0..[2, 1, 0][k] {
                        t = rotate(&t);
                    }
                    debug_assert_eq!((t.a / 2, t.b / 2, t.c / 2), (a, b, c));
                    acc = f(acc, &t);
                }
            }
            _ => {
                // Pivot on the smallest diagonal entry, rotated into the first slot.
                let k = if a <= b && a <= c { 0 } else if b <= c { 1 } else { 2 };
                let (p, q, r) = match k {
                    0 => (a, b, c),
                    1 => (b, c, a),
                    _ => (c, a, b),
                };
                let ys = shell(r * p);
                let zs = shell(p * q);
                let part = ys
                    .par_iter()
                    .fold(&init, |mut acc, y| {
                        for z in &zs {
                            // 2x = conj((2y)(2z)) / (2p)
                            let prod = mul_int(y, z);
                            let mut x = conj_doubled(&prod);
                            if x.iter().any(|v| v % (2 * p) != 0) {
                                continue;
                            }
                            for v in x.iter_mut() {
                                *v /= 2 * p;
                            }
                            if !order.contains_doubled(&x) {
                                continue;
                            }
                            let mut t = doubled(p, q, r, x, *y, *z);
                            if !t.adjoint().is_zero() {
                                continue;
                            }
                            for _ in 0..(3 - k) % 3 {
                                t = rotate(&t);
                            }
                            acc = f(acc, &t);
                        }
                        acc
                    })
                    .reduce(&init, &reduce);
                acc = reduce(acc, part);
            }
        }
    }
    acc
}

/// All rank-one elements of `JZ` of trace `n`, by the parametric solve.
pub fn enumerate_rank1_parametric(n: u32) -> Result<Rank1Shell> {
    if n < 1 {
        return Err(Error::InvalidArgument("trace must be positive".into()));
    }
    let vectors = fold_rank1_parametric(
        n,
        Vec::new,
        |mut acc: Vec<LatticeVector>, d| {
            acc.push(coords_of_doubled(d).expect("rank-one solution lies in the lattice"));
            acc
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    let shell = Rank1Shell::from_vectors(LatticeName::JZ, n, vectors)?;
    info!("jz trace {n}: {} elements, weighted {}", shell.len(), shell.weighted_count);
    Ok(shell)
}

// ---------------------------------------------------------------------------
// General enumeration through short vectors.

#[derive(Clone, Debug, Default)]
pub struct GeneralOptions {
    /// Allow traces whose candidate count is beyond desk scale.
    pub force: bool,
    /// Functionals `p` (lattice coordinates) with `p . v >= 0` on every
    /// positive rank-one element.
    pub pruning: Vec<Vec<i64>>,
}

/// Largest trace the general search runs without `force`.
pub const GENERAL_TRACE_LIMIT: u32 = 2;

/// Rough number of lattice vectors of norm at most `n^2` in a unimodular
/// lattice of rank 27 (ball volume).
pub fn estimate_candidates(n: u32) -> f64 {
    let r2 = f64::from(n).powi(2);
    let half = RANK as f64 / 2.0;
    let ln = half * std::f64::consts::PI.ln() + half * r2.ln() - ln_gamma(half + 1.0);
    ln.exp()
}

fn ln_gamma(x: f64) -> f64 {
    // x is a positive half-integer here.
    let mut v = 0.0;
    let mut t = x;
    while t > 1.0 {
        t -= 1.0;
        v += t.ln();
    }
    if (t - 0.5).abs() < 1e-9 {
        v + std::f64::consts::PI.sqrt().ln()
    } else {
        v
    }
}

/// `enumerate_rank1_general_with` with default options.
pub fn enumerate_rank1_general(l: &AlbertLattice, n: u32) -> Result<Rank1Shell> {
    enumerate_rank1_general_with(l, n, &GeneralOptions::default())
}

/// Vectors of norm `n^2` in the lattice Gram, filtered by vanishing lattice
/// adjoint and `TrL = n`.
pub fn enumerate_rank1_general_with(l: &AlbertLattice, n: u32, opts: &GeneralOptions) -> Result<Rank1Shell> {
    if n < 1 {
        return Err(Error::InvalidArgument("trace must be positive".into()));
    }
    if n > GENERAL_TRACE_LIMIT && !opts.force {
        return Err(Error::Budget(format!(
            "{} trace {n} needs about {:.1e} candidate vectors; pass force to run it",
            l.name,
            estimate_candidates(n)
        )));
    }
    let search = ShortVectorSearch::new(&l.gram, &opts.pruning)?;
    let target = i64::from(n);
    let found = Mutex::new(Vec::new());
    search.visit(target * target, |v| {
        let d = l.doubled_element(v);
        if l.trace_doubled(&d) == target && l.is_rank_one_doubled(&d) {
            found.lock().expect("poisoned").push(std::array::from_fn(|i| v[i]));
        }
    });
    let shell = Rank1Shell::from_vectors(l.name, n, found.into_inner().expect("poisoned"))?;
    info!("{} trace {n} (general): {} elements, weighted {}", l.name, shell.len(), shell.weighted_count);
    Ok(shell)
}

/// Pruning functionals `v -> (T, S)_L` for the given positive rank-one `S`.
pub fn positivity_functionals(l: &AlbertLattice, points: &[LatticeVector]) -> Vec<Vec<i64>> {
    points.iter().map(|s| (0..RANK).map(|i| (0..RANK).map(|j| l.gram[i][j] * s[j]).sum()).collect()).collect()
}

// ---------------------------------------------------------------------------
// Disk cache.

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    schema: String,
    lattice: LatticeName,
    trace: u32,
    count: usize,
    weighted_count: u64,
    sha256: String,
}

/// One file per (lattice, trace): a magic line, a JSON header with the body
/// checksum, then the coordinates as little-endian `i16`.
#[derive(Clone, Debug)]
pub struct ShellCache {
    dir: PathBuf,
}

impl ShellCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ShellCache { dir: dir.into() }
    }

    /// `$ALBERT_THETA_CACHE`, else a directory under the system temp dir.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(std::env::temp_dir().join("albert-theta-cache")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, lattice: LatticeName, trace: u32) -> PathBuf {
        self.dir.join(format!("{lattice}-trace{trace}.shell"))
    }

    /// The cached shell, or `None` when absent. A corrupt file is reported
    /// and treated as absent.
    pub fn load(&self, lattice: LatticeName, trace: u32) -> Result<Option<Rank1Shell>> {
        let path = self.path(lattice, trace);
        if !path.exists() {
            return Ok(None);
        }
        match read_shell(&path) {
            Ok(s) if s.lattice == lattice && s.trace == trace => Ok(Some(s)),
            Ok(_) => {
                warn!("cache file {} describes another shell; ignoring it", path.display());
                Ok(None)
            }
            Err(e) => {
                warn!("cache file {} is unusable ({e}); recomputing", path.display());
                Ok(None)
            }
        }
    }

    pub fn store(&self, shell: &Rank1Shell) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(shell.lattice, shell.trace);
        let mut body = Vec::with_capacity(shell.len() * RANK * 2);
        for v in &shell.elements {
            for x in v {
                body.extend_from_slice(&x.to_le_bytes());
            }
        }
        let header = CacheHeader {
            schema: CACHE_SCHEMA.into(),
            lattice: shell.lattice,
            trace: shell.trace,
            count: shell.len(),
            weighted_count: shell.weighted_count,
            sha256: hex::encode(Sha256::digest(&body)),
        };
        let tmp = self.dir.join(format!(".{}.{}.tmp", path.file_name().and_then(|s| s.to_str()).unwrap_or("shell"), std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(CACHE_MAGIC)?;
            f.write_all(b"\n")?;
            serde_json::to_writer(&mut f, &header)?;
            f.write_all(b"\n")?;
            f.write_all(&body)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        debug!("cached {}", path.display());
        Ok(path)
    }
}

fn read_shell(path: &Path) -> Result<Rank1Shell> {
    let mut r = BufReader::new(fs::File::open(path)?);
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.strip_suffix(b"\n") != Some(&CACHE_MAGIC[..]) {
        return Err(Error::Cache("bad magic".into()));
    }
    line.clear();
    r.read_until(b'\n', &mut line)?;
    let header: CacheHeader = serde_json::from_slice(&line)?;
    if header.schema != CACHE_SCHEMA {
        return Err(Error::Cache(format!("unknown schema {}", header.schema)));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != header.count * RANK * 2 {
        return Err(Error::Cache("truncated body".into()));
    }
    if hex::encode(Sha256::digest(&body)) != header.sha256 {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    let elements: Vec<ShellVector> = body
        .chunks_exact(RANK * 2)
        .map(|c| std::array::from_fn(|i| i16::from_le_bytes([c[2 * i], c[2 * i + 1]])))
        .collect();
    let shell = Rank1Shell { lattice: header.lattice, trace: header.trace, elements, weighted_count: header.weighted_count };
    if shell.elements.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Cache("body out of order".into()));
    }
    Ok(shell)
}

/// The shell of `(lattice, n)`, from the cache when possible. `JZ` uses the
/// parametric solve and `JE` the general search.
pub fn shell(lattice: LatticeName, n: u32, cache: Option<&ShellCache>, force: bool) -> Result<Rank1Shell> {
    if let Some(c) = cache {
        if let Some(s) = c.load(lattice, n)? {
            debug!("{lattice} trace {n} from cache");
            return Ok(s);
        }
    }
    let s = match lattice {
        LatticeName::JZ => enumerate_rank1_parametric(n)?,
        LatticeName::JE => {
            let l = crate::lattice::make_lattice(LatticeName::JE);
            let mut opts = GeneralOptions { force, pruning: Vec::new() };
            if n > GENERAL_TRACE_LIMIT && force {
                opts.pruning = je_pruning()?;
            }
            enumerate_rank1_general_with(l, n, &opts)?
        }
    };
    if let Some(c) = cache {
        c.store(&s)?;
    }
    Ok(s)
}

/// Sign constraints for large `JE` searches: the unit and a spread of
/// trace-2 points.
fn je_pruning() -> Result<Vec<Vec<i64>>> {
    let l = crate::lattice::make_lattice(LatticeName::JE);
    let two = enumerate_rank1_general(l, 2)?;
    let step = (two.len() / 12).max(1);
    let mut pts: Vec<LatticeVector> = two.iter().step_by(step).take(12).collect();
    pts.push(l.coordinates(&l.unit)?);
    Ok(positivity_functionals(l, &pts))
}

/// Where theta code gets its shells: the disk cache, a fresh enumeration
/// that is then cached, or (for large `JZ` traces) a streaming pass that is
/// never stored.
#[derive(Clone, Debug)]
pub struct ShellSource {
    pub cache: Option<ShellCache>,
    pub force: bool,
    /// `JZ` traces from this one on are streamed unless already cached.
    pub stream_from: u32,
}

impl Default for ShellSource {
    fn default() -> Self {
        ShellSource { cache: None, force: false, stream_from: 5 }
    }
}

impl ShellSource {
    pub fn with_cache(cache: ShellCache) -> Self {
        ShellSource { cache: Some(cache), ..Self::default() }
    }

    /// Folds over the shell; `f` gets `2T` in reference coordinates and the
    /// content of `T`.
    pub fn fold<A, I, F, R>(&self, lattice: LatticeName, n: u32, init: I, f: F, reduce: R) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, &IntAlbert, u64) -> A + Sync + Send,
        R: Fn(A, A) -> A + Sync + Send,
    {
        let cached = match &self.cache {
            Some(c) => c.load(lattice, n)?,
            None => None,
        };
        let stored = match cached {
            Some(s) => Some(s),
            None if lattice == LatticeName::JZ && n >= self.stream_from => None,
            None => Some(shell(lattice, n, self.cache.as_ref(), self.force)?),
        };
        match stored {
            Some(s) => {
                let l = crate::lattice::make_lattice(lattice);
                Ok(s
                    .elements
                    .par_iter()
                    .fold(&init, |acc, v| {
                        let v = expand(v);
                        f(acc, &l.doubled_element(&v), content_of(&v) as u64)
                    })
                    .reduce(&init, &reduce))
            }
            None => {
                debug!("streaming jz trace {n}");
                Ok(fold_rank1_parametric(
                    n,
                    &init,
                    |acc, d| {
                        let c = content_doubled(d).expect("rank-one solution lies in the lattice");
                        f(acc, d, c)
                    },
                    &reduce,
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;

    #[test]
    fn sigma3_values() {
        assert_eq!(sigma3(1).unwrap(), 1);
        assert_eq!(sigma3(2).unwrap(), 9);
        assert_eq!(sigma3(6).unwrap(), 252);
        assert_eq!(sigma3(9).unwrap(), 1 + 27 + 729);
        assert!(sigma3(0).is_err());
    }

    #[test]
    fn trace_one_is_the_idempotents() {
        let s = enumerate_rank1_parametric(1).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.weighted_count, 3);
        let l = make_lattice(LatticeName::JZ);
        let mut got: Vec<_> = s.iter().map(|v| l.element(&v)).collect();
        got.sort_by_key(|t| format!("{t:?}"));
        let mut want = vec![crate::RatAlbert::e(1), crate::RatAlbert::e(2), crate::RatAlbert::e(3)];
        want.sort_by_key(|t| format!("{t:?}"));
        assert_eq!(got, want);
        s.verify().unwrap();
    }

    #[test]
    fn trace_two_counts_and_psd() {
        let s = enumerate_rank1_parametric(2).unwrap();
        assert_eq!(s.len(), 723);
        assert_eq!(s.weighted_count, 747);
        s.verify().unwrap();
        let l = make_lattice(LatticeName::JZ);
        for v in s.iter() {
            assert!(l.element(&v).is_psd());
        }
    }

    #[test]
    fn general_matches_parametric_on_jz() {
        let l = make_lattice(LatticeName::JZ);
        for n in 1..=2 {
            assert_eq!(enumerate_rank1_general(l, n).unwrap(), enumerate_rank1_parametric(n).unwrap());
        }
    }

    #[test]
    fn je_low_shells() {
        let l = make_lattice(LatticeName::JE);
        assert!(enumerate_rank1_general(l, 1).unwrap().is_empty());
        let s = enumerate_rank1_general(l, 2).unwrap();
        assert_eq!(s.weighted_count, 819);
        s.verify().unwrap();
    }

    #[test]
    fn budget_gate() {
        let l = make_lattice(LatticeName::JE);
        assert!(matches!(enumerate_rank1_general(l, 3), Err(Error::Budget(_))));
        assert!(estimate_candidates(3) > 1e8);
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ShellCache::new(dir.path());
        let s = enumerate_rank1_parametric(2).unwrap();
        let path = cache.store(&s).unwrap();
        assert_eq!(cache.load(LatticeName::JZ, 2).unwrap().unwrap(), s);
        assert!(cache.load(LatticeName::JZ, 3).unwrap().is_none());
        let mut bytes = fs::read(&path).unwrap();
        let k = bytes.len() - 5;
        bytes[k] ^= 1;
        fs::write(&path, &bytes).unwrap();
        assert!(cache.load(LatticeName::JZ, 2).unwrap().is_none());
        let again = shell(LatticeName::JZ, 2, Some(&cache), false).unwrap();
        assert_eq!(again, s);
        assert_eq!(cache.load(LatticeName::JZ, 2).unwrap().unwrap(), s);
    }

    #[test]
    fn fold_counts_without_materializing() {
        let (count, weighted) = fold_rank1_parametric(
            2,
            || (0u64, 0u64),
            |(c, w), d| (c + 1, w + sigma3(content_doubled(d).unwrap()).unwrap()),
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
        assert_eq!((count, weighted), (723, 747));
    }
}
