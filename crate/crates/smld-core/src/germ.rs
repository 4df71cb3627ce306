//! Univariate analytic germs fixing the origin, as truncated power series,
//! with the conjugacies that normalize them: Koenigs linearization at a
//! hyperbolic fixed point and the Boettcher coordinate at a superattracting
//! one. The parabolic (indifferent) case lives in [`crate::abel`].
//!
//! Series arithmetic is generic over the coefficient field so that the same
//! recursions run in f64 and in exact rationals; the rational instantiation
//! makes conjugacy defects vanish identically on golden inputs.

use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GermError {
    #[error("germ is not invertible: linear coefficient is zero")]
    NotInvertible,
    #[error("scale root unavailable: {0}")]
    NoExactRoot(String),
    #[error("expected a hyperbolic germ, got {0}")]
    NotHyperbolic(String),
    #[error("expected a superattracting germ, got {0}")]
    NotSuperattracting(String),
}

/// Coefficient field for truncated series arithmetic.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn is_negative(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Exact positive n-th root, when one exists in the field.
    fn nth_root(&self, n: u32) -> Option<Self>;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        if *self < 0.0 {
            return None;
        }
        Some(self.powf(1.0 / n as f64))
    }
}

impl Coeff for BigRational {
    fn zero() -> Self {
        num::traits::Zero::zero()
    }
    fn one() -> Self {
        num::traits::One::one()
    }
    fn from_i64(v: i64) -> Self {
        crate::exact::rat_int(v)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        use num::integer::Roots;
        if Signed::is_negative(self) || Zero::is_zero(self) {
            return None;
        }
        let num_root = self.numer().nth_root(n);
        let den_root = self.denom().nth_root(n);
        let cand = BigRational::new(num_root, den_root);
        let mut pw = <BigRational as Coeff>::one();
        for _ in 0..n {
            pw *= &cand;
        }
        (pw == *self).then_some(cand)
    }
}

/// Default truncation order for germs.
pub const DEFAULT_ORDER: usize = 16;

/// A truncated power series c_1 x + c_2 x^2 + ... + c_K x^K with zero
/// constant term (the germ fixes the origin).
#[derive(Debug, Clone, PartialEq)]
pub struct Germ<T: Coeff = f64> {
    coeffs: Vec<T>, // coeffs[k] is the coefficient of x^{k+1}
}

/// Classification of the fixed point at the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedPointClass {
    IdenticallyZero,
    /// First nonzero coefficient sits at degree N >= 2.
    Superattracting(usize),
    /// Multiplier c_1 with |c_1| not in {0, 1}.
    Hyperbolic(f64),
    /// Multiplier +1 or -1.
    Indifferent(i8),
}

impl<T: Coeff> Germ<T> {
    /// Builds a germ from coefficients `[c_1, c_2, ...]`, truncated or
    /// zero-padded to `order`.
    pub fn from_coeffs(coeffs: Vec<T>, order: usize) -> Self {
        let mut c = coeffs;
        c.truncate(order);
        while c.len() < order {
            c.push(T::zero());
        }
        Germ { coeffs: c }
    }

    pub fn zero(order: usize) -> Self {
        Germ {
            coeffs: vec![T::zero(); order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut g = Self::zero(order);
        g.coeffs[0] = T::one();
        g
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of x^k (k >= 1).
    pub fn coeff(&self, k: usize) -> T {
        if k == 0 || k > self.coeffs.len() {
            T::zero()
        } else {
            self.coeffs[k - 1].clone()
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, v: T) {
        assert!(k >= 1 && k <= self.coeffs.len());
        self.coeffs[k - 1] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs[0] == T::one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// Index of the first nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|k| k + 1)
    }

    pub fn scale(&self, s: &T) -> Self {
        Germ {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        Germ {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        Germ {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// Product truncated to the common order.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.order();
        let mut out = vec![T::zero(); k];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let deg = i + j + 2; // degrees are (i+1) + (j+1)
                if deg > k {
                    break;
                }
                out[deg - 1] = out[deg - 1].add(&a.mul(b));
            }
        }
        Germ { coeffs: out }
    }

    /// Composition self(other(x)), truncated; both series have zero constant
    /// term so the result does too. Horner over series.
    pub fn compose(&self, inner: &Self) -> Self {
        let k = self.order();
        let mut acc = Germ::zero(k);
        for c in self.coeffs.iter().rev() {
            // acc = (acc + c) * inner, where "+ c" adds c * x^0 before the
            // multiplication by inner shifts everything up by one valuation.
            let mut shifted = acc.mul(inner);
            if !c.is_zero() {
                let scaled = inner.scale(c);
                shifted = shifted.add(&scaled);
            }
            acc = shifted;
        }
        acc
    }

    /// Compositional square f(f(x)).
    pub fn square(&self) -> Self {
        self.compose(self)
    }

    /// Compositional inverse to the truncation order, solved order by order
    /// by substitution: requires c_1 != 0.
    pub fn invert(&self) -> Result<Self, GermError> {
        let c1 = self.coeff(1);
        if c1.is_zero() {
            return Err(GermError::NotInvertible);
        }
        let k = self.order();
        let mut inv = Germ::zero(k);
        inv.set_coeff(1, T::one().div(&c1));
        for m in 2..=k {
            // defect of f(inv(x)) - x at degree m is linear in the new
            // coefficient with slope c_1
            let defect = self.compose(&inv).coeff(m);
            inv.set_coeff(m, defect.neg().div(&c1));
        }
        Ok(inv)
    }

    /// Evaluation at a point (the germ is the polynomial it stores).
    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = (acc + c.to_f64()) * x;
        }
        acc
    }

    /// Derivative value at a point.
    pub fn derivative_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + (i as f64 + 1.0) * c.to_f64();
        }
        acc
    }

    pub fn to_f64_germ(&self) -> Germ<f64> {
        Germ {
            coeffs: self.coeffs.iter().map(|c| c.to_f64()).collect(),
        }
    }

    /// Conjugation by the reflection x -> -x: returns r o f o r.
    pub fn reflect(&self) -> Self {
        Germ {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    // degree i+1 term of -f(-x): sign (-1)^{i+2}
                    if i % 2 == 1 {
                        c.neg()
                    } else {
                        c.clone()
                    }
                })
                .collect(),
        }
    }
}

/// Classifies the fixed point at the origin by the leading data.
pub fn classify_germ<T: Coeff>(f: &Germ<T>) -> FixedPointClass {
    match f.valuation() {
        None => FixedPointClass::IdenticallyZero,
        Some(v) if v >= 2 => FixedPointClass::Superattracting(v),
        _ => {
            let c1 = f.coeff(1);
            let a = c1.abs();
            if a == T::one() {
                FixedPointClass::Indifferent(if c1.is_negative() { -1 } else { 1 })
            } else {
                FixedPointClass::Hyperbolic(c1.to_f64())
            }
        }
    }
}

/// Koenigs linearization of a hyperbolic germ: the unique alpha with
/// alpha(0) = 0, alpha'(0) = 1 and alpha o f = lambda alpha to the
/// truncation order. The coefficient recursion divides by lambda - lambda^c,
/// never zero since |lambda| is not 0 or 1.
pub fn koenigs<T: Coeff>(f: &Germ<T>) -> Result<Germ<T>, GermError> {
    let lambda = f.coeff(1);
    let a = lambda.abs();
    if lambda.is_zero() || a == T::one() {
        return Err(GermError::NotHyperbolic(format!(
            "multiplier {:?}",
            lambda.to_f64()
        )));
    }
    let k = f.order();
    let mut alpha = Germ::identity(k);
    let mut lambda_pow = lambda.clone();
    for c in 2..=k {
        lambda_pow = lambda_pow.mul(&lambda); // lambda^c
        let defect = alpha.compose(f).sub(&alpha.scale(&lambda)).coeff(c);
        // adding e x^c changes the defect at degree c by e (lambda^c - lambda)
        let denom = lambda.sub(&lambda_pow);
        alpha.set_coeff(c, defect.div(&denom));
    }
    Ok(alpha)
}

/// Boettcher coordinate of a superattracting germ with leading term
/// c_N x^N: returns (alpha, sigma) with alpha o f o alpha^{-1} = sigma x^N
/// to the truncation order, sigma = sign(c_N). The linear scale solves
/// |c_N| rho^{N-1} = 1; over the rationals it must exist exactly.
pub fn boettcher<T: Coeff>(f: &Germ<T>) -> Result<(Germ<T>, i8), GermError> {
    let n = match classify_germ(f) {
        FixedPointClass::Superattracting(n) => n,
        other => {
            return Err(GermError::NotSuperattracting(format!("{:?}", other)));
        }
    };
    let k = f.order();
    let cn = f.coeff(n);
    let sigma: i8 = if cn.is_negative() { -1 } else { 1 };
    let lead = cn
        .abs()
        .nth_root((n - 1) as u32)
        .ok_or_else(|| GermError::NoExactRoot(format!("|c_{}|^(1/{})", n, n - 1)))?;
    let sigma_c = T::from_i64(sigma as i64);
    let mut alpha = Germ::zero(k);
    alpha.set_coeff(1, lead.clone());

    // lead^{N-1} |c_N| = 1, so the conjugacy normalizes the leading term.
    // Solve alpha o f = sigma alpha^N degree by degree: the coefficient
    // a_m first appears on the right at degree N + m - 1 with slope
    // sigma N lead^{N-1}.
    let mut slope = sigma_c.clone();
    for _ in 0..(n - 1) {
        slope = slope.mul(&lead);
    }
    slope = slope.mul(&T::from_i64(n as i64));
    for m in 2..=k.saturating_sub(n - 1) {
        let deg = n + m - 1;
        let lhs = alpha.compose(f);
        let rhs = germ_pow(&alpha, n).scale(&sigma_c);
        let defect = lhs.sub(&rhs).coeff(deg);
        // adding e x^m changes rhs at degree deg by slope * e
        alpha.set_coeff(m, defect.div(&slope));
    }
    Ok((alpha, sigma))
}

/// alpha^n as a series product (n >= 1), truncated.
pub fn germ_pow<T: Coeff>(g: &Germ<T>, n: usize) -> Germ<T> {
    let mut acc = g.clone();
    for _ in 1..n {
        acc = acc.mul(g);
    }
    acc
}

/// Defect of the Koenigs equation alpha o f - lambda alpha, as a germ.
pub fn koenigs_defect<T: Coeff>(f: &Germ<T>, alpha: &Germ<T>) -> Germ<T> {
    let lambda = f.coeff(1);
    alpha.compose(f).sub(&alpha.scale(&lambda))
}

/// Defect of the Boettcher equation alpha o f o alpha^{-1} - sigma x^N.
pub fn boettcher_defect<T: Coeff>(
    f: &Germ<T>,
    alpha: &Germ<T>,
    sigma: i8,
) -> Result<Germ<T>, GermError> {
    let n = match classify_germ(f) {
        FixedPointClass::Superattracting(n) => n,
        other => return Err(GermError::NotSuperattracting(format!("{:?}", other))),
    };
    let inv = alpha.invert()?;
    let conj = alpha.compose(f).compose(&inv);
    let mut target = Germ::zero(f.order());
    if n <= f.order() {
        target.set_coeff(n, T::from_i64(sigma as i64));
    }
    Ok(conj.sub(&target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int;

    fn g64(cs: &[f64]) -> Germ<f64> {
        Germ::from_coeffs(cs.to_vec(), DEFAULT_ORDER)
    }

    fn gq(cs: &[(i64, i64)]) -> Germ<BigRational> {
        Germ::from_coeffs(
            cs.iter()
                .map(|&(n, d)| BigRational::new(n.into(), d.into()))
                .collect(),
            DEFAULT_ORDER,
        )
    }

    #[test]
    fn compose_monomials() {
        // x^2 o x^3 = x^6
        let f = g64(&[0.0, 1.0]);
        let g = g64(&[0.0, 0.0, 1.0]);
        let c = f.compose(&g);
        assert_eq!(c.coeff(6), 1.0);
        assert!((1..=16).filter(|&k| k != 6).all(|k| c.coeff(k) == 0.0));
    }

    #[test]
    fn invert_identity() {
        let id = Germ::<f64>::identity(8);
        assert_eq!(id.invert().unwrap(), id);
    }

    #[test]
    fn invert_x_plus_x2_series() {
        // inverse of x + x^2 starts x - x^2 + 2x^3 - 5x^4 (Catalan signs)
        let f = gq(&[(1, 1), (1, 1)]);
        let inv = f.invert().unwrap();
        assert_eq!(inv.coeff(1), rat_int(1));
        assert_eq!(inv.coeff(2), rat_int(-1));
        assert_eq!(inv.coeff(3), rat_int(2));
        assert_eq!(inv.coeff(4), rat_int(-5));
        // round trip is the identity to the truncation order
        let round = f.compose(&inv);
        assert_eq!(round.coeff(1), rat_int(1));
        assert!((2..=16).all(|k| round.coeff(k).is_zero()));
    }

    #[test]
    fn classify_cases() {
        assert_eq!(
            classify_germ(&g64(&[])),
            FixedPointClass::IdenticallyZero
        );
        assert_eq!(
            classify_germ(&g64(&[0.5, 1.0])),
            FixedPointClass::Hyperbolic(0.5)
        );
        assert_eq!(
            classify_germ(&g64(&[0.0, 2.0])),
            FixedPointClass::Superattracting(2)
        );
        assert_eq!(
            classify_germ(&g64(&[-1.0, 3.0])),
            FixedPointClass::Indifferent(-1)
        );
    }

    #[test]
    fn koenigs_linear_is_identity() {
        let f = g64(&[0.5]);
        let alpha = koenigs(&f).unwrap();
        assert!(alpha.is_identity());
    }

    #[test]
    fn koenigs_golden_coefficients() {
        // f = x/2 + x^2: the degree-2 recursion gives alpha_2 = 4
        let f = gq(&[(1, 2), (1, 1)]);
        let alpha = koenigs(&f).unwrap();
        assert_eq!(alpha.coeff(2), rat_int(4));
        assert!(koenigs_defect(&f, &alpha).is_zero());

        // f = 2x + x^2: 1 + 4 c2 = 2 c2 forces c2 = -1/2
        let f2 = gq(&[(2, 1), (1, 1)]);
        let alpha2 = koenigs(&f2).unwrap();
        assert_eq!(alpha2.coeff(2), BigRational::new((-1).into(), 2.into()));
        assert!(koenigs_defect(&f2, &alpha2).is_zero());
    }

    #[test]
    fn boettcher_normal_forms() {
        // f = x^2 is already normal
        let f = gq(&[(0, 1), (1, 1)]);
        let (alpha, sigma) = boettcher(&f).unwrap();
        assert_eq!(sigma, 1);
        assert!(alpha.is_identity());

        // f = -8x^2: alpha = 8x, sigma = -1
        let f2 = gq(&[(0, 1), (-8, 1)]);
        let (alpha2, sigma2) = boettcher(&f2).unwrap();
        assert_eq!(sigma2, -1);
        assert_eq!(alpha2.coeff(1), rat_int(8));
        assert!(boettcher_defect(&f2, &alpha2, sigma2).unwrap().is_zero());

        // f = 2x^3: alpha = sqrt(2) x, sigma = +1 (float mode)
        let f3 = g64(&[0.0, 0.0, 2.0]);
        let (alpha3, sigma3) = boettcher(&f3).unwrap();
        assert_eq!(sigma3, 1);
        assert!((alpha3.coeff(1) - 2.0f64.sqrt()).abs() < 1e-15);
        let defect = boettcher_defect(&f3, &alpha3, sigma3).unwrap();
        assert!(defect.coeffs().iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn square_of_x_minus_x2() {
        let f = gq(&[(1, 1), (-1, 1)]);
        let sq = f.square();
        assert_eq!(sq.coeff(1), rat_int(1));
        assert_eq!(sq.coeff(2), rat_int(-2));
        assert_eq!(sq.coeff(3), rat_int(2));
        assert_eq!(sq.coeff(4), rat_int(-1));
    }

    #[test]
    fn square_of_negation_is_identity() {
        let f = g64(&[-1.0]);
        assert!(f.square().is_identity());
    }

    #[test]
    fn indifferent_square_has_positive_multiplier() {
        for f in [g64(&[-1.0, 0.5]), g64(&[1.0, -1.0]), g64(&[-1.0, 0.0, 2.0])] {
            let sq = f.square();
            assert_eq!(sq.coeff(1), 1.0);
        }
    }

    #[test]
    fn nth_root_exact_rational() {
        let q = BigRational::new(1.into(), 8.into());
        assert_eq!(
            Coeff::nth_root(&q, 3).unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        let q2 = BigRational::new(1.into(), 2.into());
        assert!(Coeff::nth_root(&q2, 2).is_none());
    }
}
