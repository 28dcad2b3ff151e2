//! Fincke-Pohst enumeration of lattice vectors of a fixed norm.
//!
//! The Gram matrix is LLL-reduced first, the search runs in reduced
//! coordinates with a floating-point Cholesky form, and every reported vector
//! is re-checked in exact integer arithmetic before it is mapped back.
//!
//! Optional pruning functionals `p` restrict the output to `p . v >= 0`. A
//! subtree is cut as soon as the maximum of `p . v` over the ellipsoid of its
//! completions is negative.

use rayon::prelude::*;

use crate::error::{Error, Result};

const EPS: f64 = 1e-7;

/// A prepared search over one positive-definite Gram matrix.
pub struct ShortVectorSearch {
    n: usize,
    /// Reduced Gram `U G U^T`.
    reduced: Vec<Vec<i64>>,
    /// Unimodular transform; original = reduced_coords * U.
    transform: Vec<Vec<i64>>,
    /// `q[i][i]` are the squared Gram-Schmidt lengths, `q[i][j]` (j > i) the
    /// Cholesky ratios.
    q: Vec<Vec<f64>>,
    prune: Vec<Pruner>,
}

/// One functional `p`, transported to reduced coordinates, with per-level
/// data for the ellipsoid bound.
struct Pruner {
    p: Vec<i64>,
    /// `lin[i]`: coefficients on the fixed coordinates `i..n` of the
    /// maximizing affine part when `0..i` are free.
    lin: Vec<Vec<f64>>,
    /// `spread[i] = p_f^T G_ff^{-1} p_f` for the free block `0..i`.
    spread: Vec<f64>,
}

impl ShortVectorSearch {
    pub fn new(gram: &[Vec<i64>], pruning: &[Vec<i64>]) -> Result<Self> {
        let n = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n || (0..n).any(|j| gram[j][i] != row[j]) {
                return Err(Error::InvalidArgument("Gram matrix must be square and symmetric".into()));
            }
        }
        if pruning.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidArgument("pruning functional has the wrong length".into()));
        }
        cholesky_form(gram).ok_or(Error::NotPositiveDefinite)?;
        let (reduced, transform) = lll_gram(gram);
        let q = cholesky_form(&reduced).ok_or(Error::NotPositiveDefinite)?;
        let prune = pruning
            .iter()
            .map(|p| {
                // p . (w U) = (U p) . w
                let pr: Vec<i64> = (0..n).map(|i| (0..n).map(|j| transform[i][j] * p[j]).sum()).collect();
                Pruner::new(&reduced, pr)
            })
            .collect();
        Ok(ShortVectorSearch { n, reduced, transform, q, prune })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Calls `f` on every `v` with `v^T G v = m` satisfying the pruning
    /// constraints, in original coordinates. Order is unspecified.
    pub fn visit<F>(&self, m: i64, f: F)
    where
        F: Fn(&[i64]) + Sync + Send,
    {
        if m < 0 {
            return;
        }
        if m == 0 {
            let z = vec![0i64; self.n];
            if self.accepts(&z) {
                f(&z);
            }
            return;
        }
        if self.n == 0 {
            return;
        }
        let halve = self.prune.is_empty();
        let prefixes = self.prefixes(m as f64, halve);
        prefixes.par_iter().for_each(|(w, rem, depth)| {
            let mut w = w.clone();
            let mut orig = vec![0i64; self.n];
            self.dfs(*depth, *rem, halve, &mut w, m, &mut |w: &[i64]| {
                self.to_original(w, &mut orig);
                f(&orig);
                if halve {
                    let neg: Vec<i64> = orig.iter().map(|x| -x).collect();
                    f(&neg);
                }
            });
        });
    }

    /// All solutions, sorted lexicographically.
    pub fn collect(&self, m: i64) -> Vec<Vec<i64>> {
        let out = std::sync::Mutex::new(Vec::new());
        self.visit(m, |v| out.lock().expect("poisoned").push(v.to_vec()));
        let mut out = out.into_inner().expect("poisoned");
        out.par_sort_unstable();
        out
    }

    fn accepts(&self, w: &[i64]) -> bool {
        self.prune.iter().all(|p| p.p.iter().zip(w).map(|(a, b)| a * b).sum::<i64>() >= 0)
    }

    fn to_original(&self, w: &[i64], out: &mut [i64]) {
        out.iter_mut().for_each(|x| *x = 0);
        for (wi, row) in w.iter().zip(&self.transform) {
            if *wi != 0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += wi * r;
                }
            }
        }
    }

    /// Level `i` range given the coordinates above it.
    fn range(&self, i: usize, w: &[i64], rem: f64) -> (f64, f64) {
        let c: f64 = -(i + 1..self.n).map(|j| self.q[i][j] * w[j] as f64).sum::<f64>();
        let r = (rem.max(0.0) / self.q[i][i]).sqrt();
        (c, r)
    }

    /// True when `w` is still all zero above level `i` (used for sign halving).
    fn leading_zero(&self, i: usize, w: &[i64]) -> bool {
        w[i + 1..].iter().all(|&x| x == 0)
    }

    /// Whether any completion of levels `i..n` can satisfy every pruning
    /// functional. `rem` is the budget left for levels `0..i`.
    fn feasible(&self, i: usize, w: &[i64], rem: f64) -> bool {
        self.prune.iter().all(|p| {
            let fixed: f64 = (i..self.n).map(|j| p.lin[i][j - i] * w[j] as f64).sum();
            fixed + (rem.max(0.0) * p.spread[i]).sqrt() >= -EPS * (1.0 + fixed.abs())
        })
    }

    /// Expands the top two levels so the parallel split has enough pieces.
    fn prefixes(&self, m: f64, halve: bool) -> Vec<(Vec<i64>, f64, usize)> {
        let mut frontier = vec![(vec![0i64; self.n], m, self.n)];
        for _ in 0..2.min(self.n) {
            let mut next = Vec::new();
            for (w, rem, depth) in frontier {
                let i = depth - 1;
                let (c, r) = self.range(i, &w, rem);
                let (mut lo, hi) = ((c - r - EPS).ceil() as i64, (c + r + EPS).floor() as i64);
                if halve && self.leading_zero(i, &w) {
                    lo = lo.max(0);
                }
                for x in lo..=hi {
                    let mut w2 = w.clone();
                    w2[i] = x;
                    let t = x as f64 - c;
                    let rem2 = rem - self.q[i][i] * t * t;
                    if rem2 < -EPS * (1.0 + m) {
                        continue;
                    }
                    if !self.feasible(i, &w2, rem2) {
                        continue;
                    }
                    next.push((w2, rem2, i));
                }
            }
            frontier = next;
        }
        frontier
    }

    fn dfs(&self, depth: usize, rem: f64, halve: bool, w: &mut Vec<i64>, m: i64, emit: &mut dyn FnMut(&[i64])) {
        if depth == 0 {
            if halve && w.iter().all(|&x| x == 0) {
                return;
            }
            if self.exact_norm(w) == m as i128 && self.accepts(w) {
                emit(w);
            }
            return;
        }
        let i = depth - 1;
        let (c, r) = self.range(i, w, rem);
        let (mut lo, hi) = ((c - r - EPS).ceil() as i64, (c + r + EPS).floor() as i64);
        if halve && self.leading_zero(i, w) {
            lo = lo.max(0);
        }
        for x in lo..=hi {
            w[i] = x;
            let t = x as f64 - c;
            let rem2 = rem - self.q[i][i] * t * t;
            if rem2 < -EPS * (1.0 + m as f64) {
                continue;
            }
            if !self.prune.is_empty() && !self.feasible(i, w, rem2) {
                continue;
            }
            self.dfs(i, rem2, halve, w, m, emit);
        }
        w[i] = 0;
    }

    fn exact_norm(&self, w: &[i64]) -> i128 {
        let mut s = 0i128;
        for i in 0..self.n {
            if w[i] == 0 {
                continue;
            }
            let row: i128 = (0..self.n).map(|j| self.reduced[i][j] as i128 * w[j] as i128).sum();
            s += w[i] as i128 * row;
        }
        s
    }
}

impl Pruner {
    fn new(gram: &[Vec<i64>], p: Vec<i64>) -> Self {
        let n = gram.len();
        let g: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let pf: Vec<f64> = p.iter().map(|&x| x as f64).collect();
        let mut lin = Vec::with_capacity(n + 1);
        let mut spread = Vec::with_capacity(n + 1);
        for i in 0..=n {
            // Free block 0..i, fixed block i..n.
            if i == 0 {
                lin.push(pf.clone());
                spread.push(0.0);
                continue;
            }
            let gff: Vec<Vec<f64>> = (0..i).map(|a| g[a][..i].to_vec()).collect();
            let inv = invert_f64(&gff);
            // y = G_ff^{-1} p_f
            let y: Vec<f64> = (0..i).map(|a| (0..i).map(|b| inv[a][b] * pf[b]).sum()).collect();
            spread.push(pf[..i].iter().zip(&y).map(|(a, b)| a * b).sum());
            // lin = p_x - G_xf y
            let l: Vec<f64> = (i..n).map(|x| pf[x] - (0..i).map(|a| g[x][a] * y[a]).sum::<f64>()).collect();
            lin.push(l);
        }
        Pruner { p, lin, spread }
    }
}

fn invert_f64(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty");
        a.swap(col, p);
        let d = a[col][col];
        for x in a[col].iter_mut() {
            *x /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Cholesky in the Fincke-Pohst layout: `Q(w) = sum_i q_ii (w_i + sum_{j>i} q_ij w_j)^2`.
fn cholesky_form(gram: &[Vec<i64>]) -> Option<Vec<Vec<f64>>> {
    let n = gram.len();
    let mut q: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    for i in 0..n {
        if q[i][i] <= 1e-9 {
            return None;
        }
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    Some(q)
}

/// LLL on a Gram matrix. Returns `(U G U^T, U)`.
fn lll_gram(gram: &[Vec<i64>]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let n = gram.len();
    let mut g: Vec<Vec<i64>> = gram.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    if n < 2 {
        return (g, u);
    }
    let delta = 0.99;
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 1_000_000, "LLL did not terminate");
        for j in (0..k).rev() {
            let (mu, _) = gso(&g);
            let r = mu[k][j].round() as i64;
            if r != 0 {
                // b_k -= r b_j
                for c in 0..n {
                    g[k][c] -= r * g[j][c];
                }
                for c in 0..n {
                    g[c][k] -= r * g[c][j];
                }
                for c in 0..n {
                    u[k][c] -= r * u[j][c];
                }
            }
        }
        let (mu, b) = gso(&g);
        if b[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1] {
            k += 1;
        } else {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    (g, u)
}

/// Gram-Schmidt coefficients and squared lengths from a Gram matrix.
fn gso(g: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j] as f64;
            for k in 0..j {
                s -= mu[j][k] * mu[i][k] * b[k];
            }
            mu[i][j] = s / b[j];
        }
        let mut s = g[i][i] as f64;
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * b[k];
        }
        b[i] = s;
    }
    (mu, b)
}

/// All `v` with `v^T G v = m` (and `p . v >= 0` for each pruning functional),
/// sorted lexicographically.
pub fn short_vectors(gram: &[Vec<i64>], m: i64, pruning: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    Ok(ShortVectorSearch::new(gram, pruning)?.collect(m))
}
