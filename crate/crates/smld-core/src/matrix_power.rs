//! Real Jordan decomposition for matrices with positive real spectrum, and
//! the real-variable interpolation `real_power(g, x)` of integer matrix
//! powers: the unique continuous family with `E(0) = I` and
//! `E(x+1) = g * E(x)` built blockwise from the Jordan data.
//!
//! Eigenvalues are found by exact root isolation on the exact characteristic
//! polynomial of the (rational) entries, never by a general complex
//! eigensolver. When all eigenvalues are rational with small denominators an
//! exact-rational Jordan basis is computed, which makes integer powers of
//! golden matrices bit-stable. Otherwise a small ladder of clustering radii
//! resolves nearly-defective spectra, with a reconstruction-defect check as
//! the final arbiter.

use crate::exact::{rat_from_f64, rat_int, rat_to_f64, RatMat};
use crate::ratpoly::{isolate_real_roots, IsolatedRoot, RatPoly};
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("spectrum not positive real: {0}")]
    Spectrum(String),
    #[error("no transform with acceptable reconstruction defect: {0}")]
    Conditioning(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Dense square real matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Dimension("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::Dimension(format!(
                    "row {} has length {}, expected {}",
                    i,
                    r.len(),
                    n
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != n * n {
            return Err(MatrixError::Dimension(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SquareMatrix {
            n,
            data: vec![0.0; n * n],
        };
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Integer power by repeated multiplication (the brute-force oracle).
    pub fn powi(&self, e: u32) -> SquareMatrix {
        let mut acc = SquareMatrix::identity(self.n);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn invert(&self) -> Option<SquareMatrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = SquareMatrix::identity(n);
        for col in 0..n {
            let mut p = col;
            for r in col + 1..n {
                if a[(r, col)].abs() > a[(p, col)].abs() {
                    p = r;
                }
            }
            if a[(p, col)].abs() < 1e-300 {
                return None;
            }
            for j in 0..n {
                a.data.swap(col * n + j, p * n + j);
                inv.data.swap(col * n + j, p * n + j);
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col && a[(r, col)] != 0.0 {
                    let f = a[(r, col)];
                    for j in 0..n {
                        a[(r, j)] -= f * a[(col, j)];
                        inv[(r, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
        Some(inv)
    }

    fn to_rat_exact(&self) -> Option<RatMat> {
        RatMat::from_f64_exact(self.n, self.n, &self.data)
    }

    /// Kernel basis with rank decisions at `pivot_tol` (absolute), by
    /// Gaussian elimination with full pivoting.
    fn kernel_with_tol(&self, pivot_tol: f64) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut a = self.clone();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut row = 0;
        let mut pivots: Vec<usize> = Vec::new(); // permuted column index per pivot row
        for step in 0..n {
            // full pivot search in the remaining block
            let (mut bi, mut bj, mut bv) = (row, step, 0.0f64);
            for i in row..n {
                for j in step..n {
                    if a[(i, j)].abs() > bv {
                        bv = a[(i, j)].abs();
                        bi = i;
                        bj = j;
                    }
                }
            }
            if bv <= pivot_tol {
                break;
            }
            for j in 0..n {
                a.data.swap(row * n + j, bi * n + j);
            }
            if bj != step {
                for i in 0..n {
                    a.data.swap(i * n + step, i * n + bj);
                }
                col_perm.swap(step, bj);
            }
            let d = a[(row, step)];
            for j in 0..n {
                a[(row, j)] /= d;
            }
            for r in 0..n {
                if r != row && a[(r, step)] != 0.0 {
                    let f = a[(r, step)];
                    for j in 0..n {
                        a[(r, j)] -= f * a[(row, j)];
                    }
                }
            }
            pivots.push(step);
            row += 1;
        }
        let rank = pivots.len();
        let mut basis = Vec::new();
        for free in rank..n {
            let mut v = vec![0.0; n];
            v[col_perm[free]] = 1.0;
            for r in 0..rank {
                v[col_perm[r]] = -a[(r, free)];
            }
            basis.push(v);
        }
        basis
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SquareMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Generalized binomial coefficient C(x, j) = x(x-1)...(x-j+1)/j!.
pub fn gen_binomial(x: f64, j: u32) -> f64 {
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..j {
        num *= x - i as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// Exact-rational generalized binomial coefficient.
pub fn gen_binomial_exact(x: &BigRational, j: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..j {
        acc *= x - rat_int(i as i64);
        acc /= rat_int((i + 1) as i64);
    }
    acc
}

/// Exact-rational Jordan data, present when every eigenvalue is a small
/// rational. `p` holds the chain vectors as columns: p^-1 g p = J.
#[derive(Debug, Clone)]
pub struct ExactJordan {
    pub eigenvalues: Vec<BigRational>,
    pub p: RatMat,
    pub p_inv: RatMat,
}

/// Real Jordan decomposition of g: `transform * g * transform_inverse`
/// equals the direct sum of blocks `lambda_i I + J` with non-increasing
/// block sizes, ties broken by non-increasing eigenvalue.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub partition: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub transform: SquareMatrix,
    pub transform_inverse: SquareMatrix,
    exact: Option<ExactJordan>,
}

impl JordanDecomposition {
    pub fn dim(&self) -> usize {
        self.transform.dim()
    }

    pub fn exact(&self) -> Option<&ExactJordan> {
        self.exact.as_ref()
    }

    /// The block-diagonal Jordan matrix this decomposition normalizes to.
    pub fn jordan_matrix(&self) -> SquareMatrix {
        let n = self.dim();
        let mut j = SquareMatrix::zeros(n);
        let mut off = 0;
        for (b, &size) in self.partition.iter().enumerate() {
            for r in 0..size {
                j[(off + r, off + r)] = self.eigenvalues[b];
                if r + 1 < size {
                    j[(off + r, off + r + 1)] = 1.0;
                }
            }
            off += size;
        }
        j
    }
}

/// Exact characteristic polynomial (monic) by Faddeev-LeVerrier over the
/// exact rational images of the entries.
fn char_poly_exact(g: &RatMat) -> RatPoly {
    let n = g.n;
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m = g.clone();
    let mut c = -m.trace();
    coeffs[n - 1] = c.clone();
    for k in 2..=n {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += &c;
        }
        m = g.mul(&shifted);
        c = -m.trace() / rat_int(k as i64);
        coeffs[n - k] = c.clone();
    }
    RatPoly::new(coeffs)
}

/// Durand-Kerner simultaneous root iteration for a monic polynomial
/// given by its full coefficient list (`coeffs[k]` the coefficient of x^k).
fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let radius = 1.0
        + coeffs[..deg]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs() / coeffs[deg].abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| seed.powu(k as u32 + 1) * radius)
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(coeffs[deg], 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 * radius {
            break;
        }
    }
    roots
}

/// One eigenvalue candidate before clustering.
#[derive(Debug, Clone)]
struct RootCandidate {
    value: Complex64,
    multiplicity: usize,
    exact: Option<BigRational>,
}

/// Roots of the exact characteristic polynomial, with multiplicities from
/// the square-free decomposition. Complex roots come from Durand-Kerner on
/// the (exact) square-free factors that have them.
fn spectrum_candidates(g: &RatMat) -> Vec<RootCandidate> {
    let cp = char_poly_exact(g);
    let mut out = Vec::new();
    for (factor, mult) in cp.square_free_decomposition() {
        let real = isolate_real_roots(&factor, 90);
        for r in &real {
            out.push(RootCandidate {
                value: Complex64::new(r.approx_f64(), 0.0),
                multiplicity: mult,
                exact: match r {
                    IsolatedRoot::Exact(q) => Some(q.clone()),
                    IsolatedRoot::Bracket(_, _) => None,
                },
            });
        }
        let missing = factor.degree() - real.len();
        if missing > 0 {
            let coeffs: Vec<f64> = factor.coeffs().iter().map(rat_to_f64).collect();
            let mut dk = durand_kerner(&coeffs);
            // keep the roots farthest from the real axis; the real ones are
            // already accounted for exactly
            dk.sort_by(|a, b| b.im.abs().partial_cmp(&a.im.abs()).unwrap());
            for z in dk.into_iter().take(missing) {
                out.push(RootCandidate {
                    value: z,
                    multiplicity: mult,
                    exact: None,
                });
            }
        }
    }
    out.sort_by(|a, b| a.value.re.partial_cmp(&b.value.re).unwrap());
    out
}

/// True iff every eigenvalue of g has |imaginary part| <= tol and real
/// part > tol.
pub fn is_glnplus(g: &SquareMatrix, tol: f64) -> bool {
    let Some(exact) = g.to_rat_exact() else {
        return false;
    };
    spectrum_candidates(&exact)
        .iter()
        .all(|c| c.value.im.abs() <= tol && c.value.re > tol)
}

/// A cluster of candidate roots treated as one eigenvalue.
#[derive(Debug, Clone)]
struct EigenCluster {
    value: f64,
    multiplicity: usize,
}

fn cluster_roots(cands: &[RootCandidate], radius: f64) -> Vec<EigenCluster> {
    let mut clusters: Vec<Vec<&RootCandidate>> = Vec::new();
    for c in cands {
        match clusters.last_mut() {
            Some(group)
                if (c.value - group.last().unwrap().value).norm() <= radius =>
            {
                group.push(c);
            }
            _ => clusters.push(vec![c]),
        }
    }
    clusters
        .into_iter()
        .map(|group| {
            let mult: usize = group.iter().map(|c| c.multiplicity).sum();
            let mean = group
                .iter()
                .map(|c| c.value.re * c.multiplicity as f64)
                .sum::<f64>()
                / mult as f64;
            EigenCluster {
                value: mean,
                multiplicity: mult,
            }
        })
        .collect()
}

/// Orthonormal accumulator for independence decisions over f64.
struct OrthoSpan {
    basis: Vec<Vec<f64>>,
}

impl OrthoSpan {
    fn new() -> Self {
        OrthoSpan { basis: Vec::new() }
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for b in &self.basis {
            let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in r.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        r
    }

    /// Adds v to the span; returns false when v is (numerically) dependent.
    fn try_add(&mut self, v: &[f64], rel_tol: f64) -> bool {
        let norm_v = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm_v == 0.0 {
            return false;
        }
        // re-orthogonalize once for stability
        let r = self.residual(&self.residual(v));
        let norm_r = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm_r <= rel_tol * norm_v {
            return false;
        }
        self.basis.push(r.iter().map(|x| x / norm_r).collect());
        true
    }
}

/// Jordan chains for one numeric eigenvalue cluster. Each chain is returned
/// bottom-up: chain[0] is the eigenvector, chain.len() the block size.
fn numeric_chains(
    g: &SquareMatrix,
    lambda: f64,
    mult: usize,
    rank_tol: f64,
) -> Option<Vec<Vec<Vec<f64>>>> {
    let n = g.dim();
    let mut nmat = g.clone();
    for i in 0..n {
        nmat[(i, i)] -= lambda;
    }
    // kernels of N^k until the algebraic multiplicity is exhausted
    let mut kernels: Vec<Vec<Vec<f64>>> = vec![Vec::new()]; // index 0: trivial
    let mut power = SquareMatrix::identity(n);
    let mut kmax = 0;
    for k in 1..=mult {
        power = power.mul(&nmat);
        let tol = rank_tol * power.max_abs().max(1.0);
        let ker = power.kernel_with_tol(tol);
        if ker.len() < kernels.last().unwrap().len() {
            return None;
        }
        let dim = ker.len();
        kernels.push(ker);
        kmax = k;
        if dim == mult {
            break;
        }
        if dim > mult || k == mult {
            return None;
        }
    }
    if kernels[kmax].len() != mult {
        return None;
    }
    // block counts: b[k] = #blocks of size >= k
    let mut b = vec![0usize; kmax + 2];
    for k in 1..=kmax {
        b[k] = kernels[k].len() - kernels[k - 1].len();
    }
    for k in 1..kmax {
        if b[k] < b[k + 1] {
            return None;
        }
    }
    let mut chains: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut tops: Vec<(usize, Vec<f64>)> = Vec::new();
    for k in (1..=kmax).rev() {
        let need = b[k] - b[k + 1];
        if need == 0 {
            continue;
        }
        let mut span = OrthoSpan::new();
        for v in &kernels[k - 1] {
            span.try_add(v, 1e-9);
        }
        for (h, top) in &tops {
            // level-k representative of a taller chain
            let mut v = top.clone();
            for _ in 0..(h - k) {
                v = nmat.mul_vec(&v);
            }
            span.try_add(&v, 1e-9);
        }
        let mut found = 0;
        for cand in &kernels[k] {
            if found == need {
                break;
            }
            if span.try_add(cand, 1e-6) {
                tops.push((k, cand.clone()));
                found += 1;
            }
        }
        if found < need {
            return None;
        }
    }
    for (h, top) in tops {
        let mut chain = vec![top];
        for _ in 1..h {
            let next = nmat.mul_vec(chain.last().unwrap());
            chain.push(next);
        }
        chain.reverse(); // eigenvector first
        let scale = chain[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        if scale == 0.0 {
            return None;
        }
        for w in chain.iter_mut() {
            for x in w.iter_mut() {
                *x /= scale;
            }
        }
        chains.push(chain);
    }
    Some(chains)
}

/// Incremental exact rank accumulator (rows kept in echelon form).
struct ExactSpan {
    rows: Vec<Vec<BigRational>>,
}

impl ExactSpan {
    fn new() -> Self {
        ExactSpan { rows: Vec::new() }
    }

    fn try_add(&mut self, v: &[BigRational]) -> bool {
        let mut v = v.to_vec();
        for row in &self.rows {
            let pivot = row.iter().position(|x| !x.is_zero()).unwrap();
            if !v[pivot].is_zero() {
                let f = &v[pivot] / &row[pivot];
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= &f * b;
                }
            }
        }
        if v.iter().all(|x| x.is_zero()) {
            return false;
        }
        self.rows.push(v);
        true
    }
}

fn exact_chains(
    g: &RatMat,
    lambda: &BigRational,
    mult: usize,
) -> Option<Vec<Vec<Vec<BigRational>>>> {
    let n = g.n;
    let mut nmat = g.clone();
    for i in 0..n {
        nmat[(i, i)] -= lambda;
    }
    let mut kernels: Vec<Vec<Vec<BigRational>>> = vec![Vec::new()];
    let mut power = RatMat::identity(n);
    let mut kmax = 0;
    for k in 1..=mult {
        power = power.mul(&nmat);
        let ker = power.kernel();
        let dim = ker.len();
        kernels.push(ker);
        kmax = k;
        if dim == mult {
            break;
        }
        if dim > mult || k == mult {
            return None;
        }
    }
    let mut b = vec![0usize; kmax + 2];
    for k in 1..=kmax {
        b[k] = kernels[k].len() - kernels[k - 1].len();
    }
    let mut chains = Vec::new();
    let mut tops: Vec<(usize, Vec<BigRational>)> = Vec::new();
    for k in (1..=kmax).rev() {
        let need = b[k] - b[k + 1];
        if need == 0 {
            continue;
        }
        let mut span = ExactSpan::new();
        for v in &kernels[k - 1] {
            span.try_add(v);
        }
        for (h, top) in &tops {
            let mut v = top.clone();
            for _ in 0..(h - k) {
                v = nmat.mul_vec(&v);
            }
            span.try_add(&v);
        }
        let mut found = 0;
        for cand in &kernels[k] {
            if found == need {
                break;
            }
            if span.try_add(cand) {
                tops.push((k, cand.clone()));
                found += 1;
            }
        }
        if found < need {
            return None;
        }
    }
    for (h, top) in tops {
        let mut chain = vec![top];
        for _ in 1..h {
            let next = nmat.mul_vec(chain.last().unwrap());
            chain.push(next);
        }
        chain.reverse();
        chains.push(chain);
    }
    Some(chains)
}

/// Assembled (size, eigenvalue, chain) list sorted per the normalization:
/// sizes non-increasing, then eigenvalues non-increasing within equal size.
fn sort_blocks<T>(blocks: &mut Vec<(usize, f64, Vec<Vec<T>>)>) {
    blocks.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal))
    });
}

const CLUSTER_LADDER: [f64; 5] = [1e-12, 1e-9, 1e-7, 1e-5, 1e-3];

/// Real Jordan decomposition of a matrix in GL+ (all eigenvalues real and
/// positive within `tol`).
pub fn jordan_real(g: &SquareMatrix, tol: f64) -> Result<JordanDecomposition, MatrixError> {
    let n = g.dim();
    let exact_entries = g
        .to_rat_exact()
        .ok_or_else(|| MatrixError::Dimension("non-finite entries".into()))?;
    let cands = spectrum_candidates(&exact_entries);
    let scale = cands
        .iter()
        .fold(1.0f64, |m, c| m.max(c.value.norm()));

    for c in &cands {
        if c.value.re <= tol {
            return Err(MatrixError::Spectrum(format!(
                "eigenvalue near {:.6e} is not positive",
                c.value.re
            )));
        }
    }

    // Exact path: all roots rational with small denominators.
    let all_exact = cands.iter().all(|c| {
        c.exact
            .as_ref()
            .map_or(false, |q| crate::exact::is_small_rat(q, 48))
    });
    if all_exact {
        if let Some(dec) = exact_jordan_path(&exact_entries, &cands) {
            return Ok(dec);
        }
    }

    // Numeric path: escalate cluster radii until a candidate structure
    // reconstructs g within tolerance.
    let defect_budget = tol.max(1e-12) * g.max_abs().max(1.0);
    let mut best: Option<(f64, JordanDecomposition)> = None;
    for &radius in &CLUSTER_LADDER {
        let r = radius * scale;
        let clusters = cluster_roots(&cands, r);
        if clusters
            .iter()
            .any(|c| c.value <= tol || clusters_imag_excess(&cands, c, r, tol))
        {
            return Err(MatrixError::Spectrum(
                "complex eigenvalue beyond tolerance".into(),
            ));
        }
        if clusters.iter().map(|c| c.multiplicity).sum::<usize>() != n {
            continue;
        }
        let Some(dec) = numeric_jordan_path(g, &clusters, tol) else {
            continue;
        };
        let defect = reconstruction_defect(g, &dec);
        if defect <= defect_budget {
            return Ok(dec);
        }
        if best.as_ref().map_or(true, |(d, _)| defect < *d) {
            best = Some((defect, dec));
        }
    }
    match best {
        Some((d, _)) => Err(MatrixError::Conditioning(format!(
            "best reconstruction defect {:.3e} exceeds budget {:.3e}",
            d, defect_budget
        ))),
        None => Err(MatrixError::Conditioning(
            "no consistent Jordan structure found at any clustering radius".into(),
        )),
    }
}

/// A cluster is rejected when it absorbs roots whose imaginary parts exceed
/// both the caller's tolerance and the clustering radius.
fn clusters_imag_excess(
    cands: &[RootCandidate],
    cluster: &EigenCluster,
    radius: f64,
    tol: f64,
) -> bool {
    cands.iter().any(|c| {
        (c.value.re - cluster.value).abs() <= radius && c.value.im.abs() > tol.max(radius)
    })
}

fn exact_jordan_path(g: &RatMat, cands: &[RootCandidate]) -> Option<JordanDecomposition> {
    let n = g.n;
    let mut tagged: Vec<(usize, f64, Vec<Vec<BigRational>>, BigRational)> = Vec::new();
    for c in cands {
        let q = c.exact.clone()?;
        let chains = exact_chains(g, &q, c.multiplicity)?;
        for chain in chains {
            tagged.push((chain.len(), rat_to_f64(&q), chain, q.clone()));
        }
    }
    tagged.sort_by(|a, b| b.0.cmp(&a.0).then(b.3.cmp(&a.3)));
    let mut p = RatMat::zeros(n, n);
    let mut col = 0;
    for (_, _, chain, _) in &tagged {
        for w in chain {
            for i in 0..n {
                p[(i, col)] = w[i].clone();
            }
            col += 1;
        }
    }
    if col != n {
        return None;
    }
    let p_inv = p.inverse()?;
    let partition: Vec<usize> = tagged.iter().map(|t| t.0).collect();
    let eigenvalues: Vec<f64> = tagged.iter().map(|t| t.1).collect();
    let eig_exact: Vec<BigRational> = tagged.iter().map(|t| t.3.clone()).collect();
    let transform = SquareMatrix::from_flat(n, p_inv.to_f64_vec()).ok()?;
    let transform_inverse = SquareMatrix::from_flat(n, p.to_f64_vec()).ok()?;
    Some(JordanDecomposition {
        partition,
        eigenvalues,
        transform,
        transform_inverse,
        exact: Some(ExactJordan {
            eigenvalues: eig_exact,
            p,
            p_inv,
        }),
    })
}

fn numeric_jordan_path(
    g: &SquareMatrix,
    clusters: &[EigenCluster],
    rank_tol: f64,
) -> Option<JordanDecomposition> {
    let n = g.dim();
    let mut blocks: Vec<(usize, f64, Vec<Vec<f64>>)> = Vec::new();
    for c in clusters {
        let chains = numeric_chains(g, c.value, c.multiplicity, rank_tol)?;
        for chain in chains {
            blocks.push((chain.len(), c.value, chain));
        }
    }
    sort_blocks(&mut blocks);
    let mut p = SquareMatrix::zeros(n);
    let mut col = 0;
    for (_, _, chain) in &blocks {
        for w in chain {
            for i in 0..n {
                p[(i, col)] = w[i];
            }
            col += 1;
        }
    }
    if col != n {
        return None;
    }
    let p_inv = p.invert()?;
    Some(JordanDecomposition {
        partition: blocks.iter().map(|b| b.0).collect(),
        eigenvalues: blocks.iter().map(|b| b.1).collect(),
        transform: p_inv,
        transform_inverse: p,
        exact: None,
    })
}

fn reconstruction_defect(g: &SquareMatrix, dec: &JordanDecomposition) -> f64 {
    let j = dec.transform.mul(g).mul(&dec.transform_inverse);
    j.sub(&dec.jordan_matrix()).max_abs()
}

/// The interpolated power E(x, g) evaluated from a precomputed
/// decomposition: h^-1 (blockwise exp(x ln l) sum C(x,j) l^-j J^j) h.
pub fn real_power_with(dec: &JordanDecomposition, x: f64) -> SquareMatrix {
    if let Some(exact) = dec.exact() {
        if x.fract() == 0.0 && x.abs() < 2_147_483_000.0 {
            return exact_integer_power(dec, exact, x as i64);
        }
    }
    let n = dec.dim();
    let mut block = SquareMatrix::zeros(n);
    let mut off = 0;
    for (b, &size) in dec.partition.iter().enumerate() {
        let lambda = dec.eigenvalues[b];
        let s = (x * lambda.ln()).exp();
        for j in 0..size {
            let v = s * gen_binomial(x, j as u32) * lambda.powi(-(j as i32));
            for r in 0..size - j {
                block[(off + r, off + r + j)] = v;
            }
        }
        off += size;
    }
    dec.transform_inverse.mul(&block).mul(&dec.transform)
}

fn exact_integer_power(
    dec: &JordanDecomposition,
    exact: &ExactJordan,
    m: i64,
) -> SquareMatrix {
    let n = dec.dim();
    let xq = rat_int(m);
    let mut block = RatMat::zeros(n, n);
    let mut off = 0;
    for (b, &size) in dec.partition.iter().enumerate() {
        let lambda = &exact.eigenvalues[b];
        for j in 0..size {
            let pw = lambda.pow((m - j as i64) as i32);
            let v = gen_binomial_exact(&xq, j as u32) * pw;
            for r in 0..size - j {
                block[(off + r, off + r + j)] = v.clone();
            }
        }
        off += size;
    }
    let result = exact.p.mul(&block).mul(&exact.p_inv);
    SquareMatrix::from_flat(n, result.to_f64_vec()).expect("dimension preserved")
}

/// E(x, g): the real-variable interpolation of integer powers of g.
pub fn real_power(g: &SquareMatrix, x: f64, tol: f64) -> Result<SquareMatrix, MatrixError> {
    let dec = jordan_real(g, tol)?;
    Ok(real_power_with(&dec, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn glnplus_identity_true() {
        assert!(is_glnplus(&SquareMatrix::identity(3), 1e-9));
    }

    #[test]
    fn glnplus_rotation_false() {
        // characteristic polynomial x^2 + 1, roots +-i
        let g = mat(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(!is_glnplus(&g, 1e-9));
    }

    #[test]
    fn glnplus_negative_false() {
        assert!(!is_glnplus(&mat(&[&[-1.0]]), 1e-9));
    }

    #[test]
    fn jordan_diagonal() {
        let g = mat(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let dec = jordan_real(&g, 1e-9).unwrap();
        assert_eq!(dec.partition, vec![1, 1]);
        assert_eq!(dec.eigenvalues, vec![3.0, 1.0]);
        assert!(dec.exact().is_some());
    }

    #[test]
    fn jordan_block_already_normal() {
        let g = mat(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let dec = jordan_real(&g, 1e-9).unwrap();
        assert_eq!(dec.partition, vec![2]);
        assert_eq!(dec.eigenvalues, vec![2.0]);
        let recon = dec.transform.mul(&g).mul(&dec.transform_inverse);
        assert!(recon.sub(&dec.jordan_matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn jordan_companion_style() {
        // roots of x^2 - 3x + 2: eigenvalues 2 and 1
        let g = mat(&[&[0.0, 1.0], &[-2.0, 3.0]]);
        let dec = jordan_real(&g, 1e-9).unwrap();
        assert_eq!(dec.partition, vec![1, 1]);
        assert_eq!(dec.eigenvalues, vec![2.0, 1.0]);
    }

    #[test]
    fn jordan_rejects_complex_spectrum() {
        let g = mat(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(matches!(
            jordan_real(&g, 1e-9),
            Err(MatrixError::Spectrum(_))
        ));
    }

    #[test]
    fn gen_binomial_examples() {
        assert_eq!(gen_binomial(3.0, 2), 3.0);
        assert_eq!(gen_binomial(7.5, 0), 1.0);
        assert_eq!(gen_binomial(0.5, 2), -0.125);
    }

    #[test]
    fn real_power_scalar_sqrt() {
        let g = mat(&[&[4.0]]);
        let r = real_power(&g, 0.5, 1e-9).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn real_power_golden_cube_exact() {
        let g = mat(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let r = real_power(&g, 3.0, 1e-9).unwrap();
        assert_eq!(r.rows(), vec![vec![8.0, 12.0], vec![0.0, 8.0]]);
    }

    #[test]
    fn real_power_identity_fixed() {
        let g = SquareMatrix::identity(4);
        for &x in &[0.0, 0.25, 1.0, 7.5, 19.0] {
            let r = real_power(&g, x, 1e-9).unwrap();
            assert!(r.sub(&g).max_abs() < 1e-12);
        }
    }

    #[test]
    fn real_power_matches_repeated_multiplication() {
        // conjugate of a defective Jordan matrix by an integer matrix
        let h = mat(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0]]);
        let hinv = h.invert().unwrap();
        let d = mat(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let g = h.mul(&d).mul(&hinv);
        let dec = jordan_real(&g, 1e-8).unwrap();
        for m in 0..8u32 {
            let direct = g.powi(m);
            let interp = real_power_with(&dec, m as f64);
            let denom = 1.0 + direct.max_abs();
            assert!(
                interp.sub(&direct).max_abs() / denom < 1e-8,
                "mismatch at power {}",
                m
            );
        }
    }

    #[test]
    fn real_power_cocycle_noninteger() {
        let g = mat(&[&[0.0, 1.0], &[-2.0, 3.0]]);
        let dec = jordan_real(&g, 1e-9).unwrap();
        for &x in &[0.3, 1.7, 4.9] {
            let lhs = real_power_with(&dec, x + 1.0);
            let rhs = g.mul(&real_power_with(&dec, x));
            assert!(lhs.sub(&rhs).max_abs() < 1e-9 * (1.0 + lhs.max_abs()));
        }
    }

    #[test]
    fn serde_round_trip() {
        let g = mat(&[&[1.5, 2.0], &[0.0, 0.25]]);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "[[1.5,2.0],[0.0,0.25]]");
        let back: SquareMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
