//! Univariate polynomials over the rationals: exact arithmetic, square-free
//! decomposition, and Sturm-chain real root isolation.
//!
//! This is the root-finding core behind the eigenvalue machinery. Working
//! over exact rationals sidesteps the usual reliability questions: real root
//! counts and isolating intervals are exact statements about the input
//! polynomial, and clustering decisions happen downstream in float land.

use crate::exact::{rat_int, rat_to_f64, rationalize};
use num::rational::BigRational;
use num::traits::{Signed, Zero};

/// Polynomial with rational coefficients, `coeffs[k]` the coefficient of x^k.
/// Always normalized so the leading coefficient is nonzero (empty = zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() <= 1 {
            return RatPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * rat_int(k as i64))
            .collect();
        RatPoly::new(coeffs)
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        RatPoly::new(out)
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] -= c;
        }
        RatPoly::new(out)
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }

    /// Euclidean division: returns (quotient, remainder).
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let d = divisor.degree();
        let lead_inv = divisor.leading().recip();
        if rem.len() < divisor.coeffs.len() {
            return (RatPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - d];
        for k in (d..rem.len()).rev() {
            let q = &rem[k] * &lead_inv;
            if q.is_zero() {
                continue;
            }
            quot[k - d] = q.clone();
            for (j, c) in divisor.coeffs.iter().enumerate() {
                let v = &rem[k - d + j] - &q * c;
                rem[k - d + j] = v;
            }
        }
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    /// Monic scaling (positive scaling would also do for Sturm purposes).
    pub fn monic(&self) -> RatPoly {
        if self.is_zero() {
            return RatPoly::zero();
        }
        let inv = self.leading().recip();
        RatPoly::new(self.coeffs.iter().map(|c| c * &inv).collect())
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Yun square-free decomposition: returns pairs (factor, multiplicity)
    /// with distinct square-free factors, skipping trivial (constant) ones.
    pub fn square_free_decomposition(&self) -> Vec<(RatPoly, usize)> {
        let mut out = Vec::new();
        if self.degree() == 0 || self.is_zero() {
            return out;
        }
        let p = self.monic();
        let dp = p.derivative();
        let a0 = p.gcd(&dp);
        let mut b = p.div_rem(&a0).0;
        let mut c = dp.div_rem(&a0).0;
        let mut i = 1usize;
        loop {
            let d = c.sub(&b.derivative());
            if b.degree() == 0 {
                break;
            }
            let g = b.gcd(&d);
            if g.degree() > 0 {
                out.push((g.clone(), i));
            }
            b = b.div_rem(&g).0;
            c = d.div_rem(&g).0;
            i += 1;
        }
        out
    }

    /// Cauchy root bound: all real roots lie in [-bound, bound].
    pub fn root_bound(&self) -> BigRational {
        let lead = self.leading().abs();
        let mut m = BigRational::zero();
        for c in &self.coeffs[..self.coeffs.len().saturating_sub(1)] {
            let v = c.abs() / &lead;
            if v > m {
                m = v;
            }
        }
        m + rat_int(1)
    }
}

/// Sign of a rational: -1, 0, +1.
fn sgn(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Sturm chain of a square-free polynomial.
pub struct SturmChain {
    chain: Vec<RatPoly>,
}

impl SturmChain {
    pub fn new(p: &RatPoly) -> Self {
        let mut chain = vec![p.monic(), p.derivative().monic()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            if chain[n - 1].degree() == 0 {
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            // Positive scaling only: the sign pattern must be preserved.
            let lead = r.leading().abs().recip();
            let neg = RatPoly::new(r.coeffs().iter().map(|c| -(c * &lead)).collect());
            chain.push(neg);
        }
        SturmChain { chain }
    }

    fn variations_at(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let s = sgn(&p.eval(x));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of distinct real roots in the half-open interval (a, b].
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }
}

/// An isolated real root of a square-free polynomial: either an exact
/// rational value, or an open bracket containing exactly one root.
#[derive(Debug, Clone)]
pub enum IsolatedRoot {
    Exact(BigRational),
    Bracket(BigRational, BigRational),
}

impl IsolatedRoot {
    pub fn approx_f64(&self) -> f64 {
        match self {
            IsolatedRoot::Exact(r) => rat_to_f64(r),
            IsolatedRoot::Bracket(a, b) => rat_to_f64(&((a + b) / rat_int(2))),
        }
    }

    pub fn lower(&self) -> BigRational {
        match self {
            IsolatedRoot::Exact(r) => r.clone(),
            IsolatedRoot::Bracket(a, _) => a.clone(),
        }
    }
}

/// Isolate all real roots of a square-free polynomial, refined until the
/// bracket width is below 2^-prec_bits relative to the root bound, then
/// snapped to exact rationals when a small rational root is detected.
///
/// Exact roots encountered during bisection are peeled off by deflation so
/// that remaining roots are isolated against the correct chain.
pub fn isolate_real_roots(p: &RatPoly, prec_bits: u32) -> Vec<IsolatedRoot> {
    let mut q = p.monic();
    let mut out: Vec<IsolatedRoot> = Vec::new();
    'deflate: loop {
        if q.degree() == 0 || q.is_zero() {
            break;
        }
        let chain = SturmChain::new(&q);
        let bound = q.root_bound();
        let mut stack = vec![(-bound.clone(), bound.clone())];
        let mut intervals: Vec<(BigRational, BigRational)> = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let k = chain.count_roots(&a, &b);
            if k == 0 {
                continue;
            }
            let mid = (&a + &b) / rat_int(2);
            if q.eval(&mid).is_zero() {
                out.push(IsolatedRoot::Exact(mid.clone()));
                let lin = RatPoly::new(vec![-mid, rat_int(1)]);
                q = q.div_rem(&lin).0;
                continue 'deflate;
            }
            if k == 1 {
                intervals.push((a, b));
                continue;
            }
            stack.push((a, mid.clone()));
            stack.push((mid, b));
        }

        let width_goal = {
            let mut w = bound.clone();
            for _ in 0..prec_bits {
                w = w / rat_int(2);
            }
            w
        };
        'roots: for (mut a, mut b) in intervals {
            // Bisect on the sign of q itself; each interval holds one root.
            let mut sa = sgn(&q.eval(&a));
            if sa == 0 {
                out.push(IsolatedRoot::Exact(a));
                continue;
            }
            while &b - &a > width_goal {
                let mid = (&a + &b) / rat_int(2);
                let sm = sgn(&q.eval(&mid));
                if sm == 0 {
                    out.push(IsolatedRoot::Exact(mid));
                    continue 'roots;
                }
                if sm == sa {
                    a = mid;
                    sa = sm;
                } else {
                    b = mid;
                }
            }
            // Try to recognize a small rational root inside the bracket.
            let approx = rat_to_f64(&((&a + &b) / rat_int(2)));
            if let Some(cand) = rationalize(approx, 1 << 30) {
                if cand > a && cand < b && q.eval(&cand).is_zero() {
                    out.push(IsolatedRoot::Exact(cand));
                    continue;
                }
            }
            out.push(IsolatedRoot::Bracket(a, b));
        }
        break;
    }
    out.sort_by(|x, y| x.lower().cmp(&y.lower()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_int as ri;

    fn poly(cs: &[i64]) -> RatPoly {
        RatPoly::new(cs.iter().map(|&c| ri(c)).collect())
    }

    #[test]
    fn div_rem_roundtrip() {
        let p = poly(&[2, 0, -3, 1]); // x^3 - 3x^2 + 2
        let d = poly(&[-1, 1]); // x - 1
        let (q, r) = p.div_rem(&d);
        assert_eq!(q.mul(&d).add(&r), p);
        assert!(r.is_zero()); // 1 is a root
    }

    #[test]
    fn square_free_decomposition_recovers_multiplicities() {
        // (x-1)^2 (x-2)
        let p = poly(&[-1, 1]).mul(&poly(&[-1, 1])).mul(&poly(&[-2, 1]));
        let dec = p.square_free_decomposition();
        assert_eq!(dec.len(), 2);
        let mult_of = |root: i64| {
            dec.iter()
                .find(|(f, _)| f.eval(&ri(root)).is_zero())
                .map(|(_, m)| *m)
                .unwrap()
        };
        assert_eq!(mult_of(1), 2);
        assert_eq!(mult_of(2), 1);
    }

    #[test]
    fn isolates_roots_of_quadratic() {
        // x^2 - 3x + 2 = (x-1)(x-2)
        let p = poly(&[2, -3, 1]);
        let roots = isolate_real_roots(&p, 60);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].approx_f64(), 1.0);
        assert_eq!(roots[1].approx_f64(), 2.0);
        assert!(matches!(roots[0], IsolatedRoot::Exact(_)));
    }

    #[test]
    fn no_real_roots_for_x2_plus_1() {
        let p = poly(&[1, 0, 1]);
        assert!(isolate_real_roots(&p, 60).is_empty());
    }

    #[test]
    fn irrational_roots_isolated() {
        // x^2 - 2
        let p = poly(&[-2, 0, 1]);
        let roots = isolate_real_roots(&p, 80);
        assert_eq!(roots.len(), 2);
        let r = roots[1].approx_f64();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(matches!(roots[1], IsolatedRoot::Bracket(_, _)));
    }
}
