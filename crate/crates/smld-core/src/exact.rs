//! Exact rational scalars and dense rational matrices.
//!
//! Everything in this module is exact: no tolerances, no rounding. It backs
//! the bit-stable paths of the eigenvalue and Jordan machinery, where matrix
//! entries are (small) rationals and golden outputs must be reproducible.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

/// Exact conversion of a finite `f64` into a rational.
pub fn rat_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// True when the reduced denominator fits in `bits` bits. Used to decide
/// whether an exact path is worth running on data that came in as floats.
pub fn is_small_rat(r: &BigRational, bits: u64) -> bool {
    r.denom().bits() <= bits && r.numer().bits() <= 4 * bits
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued fractions. Returns `None` for non-finite input.
pub fn rationalize(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut x = x.abs();
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let bound = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > bound {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1.is_zero() {
        return None;
    }
    let r = BigRational::new(p1, q1);
    Some(if neg { -r } else { r })
}

/// Dense rational matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    pub n: usize,
    pub m: usize,
    data: Vec<BigRational>,
}

impl RatMat {
    pub fn zeros(n: usize, m: usize) -> Self {
        RatMat {
            n,
            m,
            data: vec![BigRational::zero(); n * m],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = BigRational::one();
        }
        a
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let n = rows.len();
        let m = if n == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            assert_eq!(r.len(), m, "ragged rows");
            data.extend(r);
        }
        RatMat { n, m, data }
    }

    pub fn from_f64_exact(n: usize, m: usize, entries: &[f64]) -> Option<Self> {
        let mut data = Vec::with_capacity(n * m);
        for &x in entries {
            data.push(rat_from_f64(x)?);
        }
        Some(RatMat { n, m, data })
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.data.iter().map(rat_to_f64).collect()
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.m, other.n);
        let mut out = RatMat::zeros(self.n, other.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.m {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.m, v.len());
        (0..self.n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for j in 0..self.m {
                    acc += &self[(i, j)] * &v[j];
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, other: &RatMat) -> RatMat {
        assert_eq!((self.n, self.m), (other.n, other.m));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> RatMat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn trace(&self) -> BigRational {
        (0..self.n.min(self.m)).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.m {
            if row == self.n {
                break;
            }
            let Some(p) = (row..self.n).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self[(row, col)].recip();
            for j in col..self.m {
                let v = &self[(row, j)] * &inv;
                self[(row, j)] = v;
            }
            for r in 0..self.n {
                if r != row && !self[(r, col)].is_zero() {
                    let f = self[(r, col)].clone();
                    for j in col..self.m {
                        let v = &self[(r, j)] - &f * &self[(row, j)];
                        self[(r, j)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.m {
            self.data.swap(a * self.m + j, b * self.m + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut c = self.clone();
        c.rref().len()
    }

    /// Basis of the kernel (columns as vectors).
    pub fn kernel(&self) -> Vec<Vec<BigRational>> {
        let mut c = self.clone();
        let pivots = c.rref();
        let free: Vec<usize> = (0..self.m).filter(|j| !pivots.contains(j)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut v = vec![BigRational::zero(); self.m];
            v[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -c[(r, f)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Inverse by Gauss-Jordan; `None` when singular.
    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.n, self.m);
        let n = self.n;
        let mut aug = RatMat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = BigRational::one();
        }
        let pivots = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        let mut out = RatMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Some(out)
    }

    pub fn determinant(&self) -> BigRational {
        assert_eq!(self.n, self.m);
        let n = self.n;
        let mut a = self.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return BigRational::zero();
            };
            if p != col {
                a.swap_rows(col, p);
                det = -det;
            }
            det *= a[(col, col)].clone();
            let inv = a[(col, col)].recip();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] * &inv;
                for j in col..n {
                    let v = &a[(r, j)] - &f * &a[(col, j)];
                    a[(r, j)] = v;
                }
            }
        }
        det
    }

    pub fn pow(&self, mut e: u64) -> RatMat {
        assert_eq!(self.n, self.m);
        let mut base = self.clone();
        let mut acc = RatMat::identity(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn max_abs(&self) -> BigRational {
        let mut m = BigRational::zero();
        for x in &self.data {
            let a = x.abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.m + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.m + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(rationalize(0.5, 1 << 20).unwrap(), r(1, 2));
        assert_eq!(rationalize(-8.0, 1 << 20).unwrap(), r(-8, 1));
        assert_eq!(rationalize(1.0 / 3.0, 1 << 20).unwrap(), r(1, 3));
    }

    #[test]
    fn rat_from_f64_is_exact() {
        let q = rat_from_f64(0.1).unwrap();
        assert_eq!(rat_to_f64(&q), 0.1);
        assert_ne!(q, r(1, 10));
    }

    #[test]
    fn inverse_and_kernel() {
        let m = RatMat::from_rows(vec![vec![r(2, 1), r(1, 1)], vec![r(0, 1), r(2, 1)]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMat::identity(2));

        let s = RatMat::from_rows(vec![vec![r(1, 1), r(2, 1)], vec![r(2, 1), r(4, 1)]]);
        assert!(s.inverse().is_none());
        let k = s.kernel();
        assert_eq!(k.len(), 1);
        assert!(s.mul_vec(&k[0]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = RatMat::from_rows(vec![
            vec![r(1, 1), r(2, 1), r(3, 1)],
            vec![r(0, 1), r(1, 1), r(4, 1)],
            vec![r(5, 1), r(6, 1), r(0, 1)],
        ]);
        assert_eq!(m.determinant(), r(1, 1));
    }
}
