//! Numeric Abel coordinate at a parabolic fixed point: a strictly monotone
//! continuous psi on one attracting side of the origin with
//! psi(f(x)) = psi(x) + 1 up to roundoff, plus its inverse.
//!
//! Construction: pick a validity edge x0 where the germ is monotone and
//! strictly attracting, take the fundamental domain D = [f(x0), x0], and
//! seed psi on D with an affine rescale of the leading model
//! psi0(x) = -1/(p a x^p) chosen so the two ends of D differ by exactly 1.
//! Extending by the Abel relation along orbits then costs nothing: psi at x
//! is (number of inverse steps back into D) plus the seed value there, and
//! psi^{-1} walks forward, which is the contracting and therefore accurate
//! direction. The functional-equation defect is roundoff-level by
//! construction, and the interpolation F(x) = psi^{-1}(psi(b) + x) matches
//! forward iteration at integers for the same reason.

use crate::germ::{classify_germ, FixedPointClass, Germ};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbelError {
    #[error("germ is not parabolic: {0}")]
    NotParabolic(String),
    #[error("side {0:+} is not attracting for this germ")]
    SideNotAttracting(i8),
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

/// Which side of the origin the coordinate lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Numeric Abel coordinate for a parabolic germ on one attracting side.
#[derive(Debug, Clone)]
pub struct AbelCoordinate {
    /// Germ in reflected coordinates when side is Minus: g(x) = -f(-x),
    /// so that internally the orbit lives on (0, x0].
    germ: Germ<f64>,
    side: Side,
    /// Contact order: f(x) - x = a x^{p+1} + ...
    pub p: usize,
    /// Leading coefficient of f(x) - x (in original coordinates).
    pub a: f64,
    /// Validity edge in internal (positive) coordinates.
    x0: f64,
    /// Seed normalization: psi_hat = psi0(x0) + (psi0(x) - psi0(x0)) / (1 + d0).
    d0: f64,
    /// Internal leading coefficient (of the reflected germ when side Minus).
    a_int: f64,
    /// Precomputed orbit boundaries b_k = g^k(x0), decreasing toward 0.
    boundaries: Vec<f64>,
    /// Budget for extending the boundary table.
    max_depth: usize,
}

const DEFAULT_MAX_DEPTH: usize = 200_000;

impl AbelCoordinate {
    /// Builds the coordinate. The germ must have multiplier exactly +1 and a
    /// nonzero higher-order part, and the requested side must be attracting.
    pub fn new(f: &Germ<f64>, side: Side, tol: f64) -> Result<Self, AbelError> {
        match classify_germ(f) {
            FixedPointClass::Indifferent(1) => {}
            other => {
                return Err(AbelError::NotParabolic(format!("{:?}", other)));
            }
        }
        // leading term of f(x) - x
        let mut shifted = f.clone();
        shifted.set_coeff(1, f.coeff(1) - 1.0);
        let Some(v) = shifted.valuation() else {
            return Err(AbelError::NotParabolic(
                "germ is the identity to the truncation order".into(),
            ));
        };
        let p = v - 1;
        let a = shifted.coeff(v);

        // Work on the positive side internally; reflect for side Minus.
        let germ = match side {
            Side::Plus => f.clone(),
            Side::Minus => f.reflect(),
        };
        let a_int = match side {
            Side::Plus => a,
            Side::Minus => a * if v % 2 == 0 { -1.0 } else { 1.0 },
        };
        // Attracting on the internal positive side means g(x) < x near 0+.
        if a_int >= 0.0 {
            return Err(AbelError::SideNotAttracting(match side {
                Side::Plus => 1,
                Side::Minus => -1,
            }));
        }

        // Shrink the edge until the germ is monotone increasing, strictly
        // attracting and positive on a grid over (0, x0].
        let mut x0 = 0.5f64;
        let mut ok = false;
        for _ in 0..60 {
            ok = (1..=64).all(|i| {
                let x = x0 * i as f64 / 64.0;
                let fx = germ.eval_f64(x);
                germ.derivative_f64(x) > 0.0 && fx > 0.0 && fx < x
            });
            if ok {
                break;
            }
            x0 *= 0.5;
        }
        if !ok || x0 < 1e-12 {
            return Err(AbelError::NoConvergence(
                "no validity edge with monotone attraction found".into(),
            ));
        }

        let psi0 = |x: f64| -1.0 / (p as f64 * a_int * x.powi(p as i32));
        let fx0 = germ.eval_f64(x0);
        let d0 = psi0(fx0) - psi0(x0) - 1.0;
        if d0 <= -1.0 {
            return Err(AbelError::NoConvergence(
                "seed model degenerate on the validity interval".into(),
            ));
        }

        let mut coord = AbelCoordinate {
            germ,
            side,
            p,
            a,
            x0,
            d0,
            a_int,
            boundaries: vec![x0, fx0],
            max_depth: DEFAULT_MAX_DEPTH,
        };
        // Defect self-check at a few interior points.
        let probe = [x0 * 0.9, x0 * 0.5, x0 * 0.17];
        for &x in &probe {
            let d = coord.psi(coord.side.sign() * x).map(|px| {
                coord
                    .psi(coord.side.sign() * coord.germ.eval_f64(x))
                    .map(|pfx| (pfx - px - 1.0).abs())
            });
            match d {
                Ok(Ok(defect)) if defect <= tol.max(1e-9) => {}
                _ => {
                    return Err(AbelError::NoConvergence(
                        "functional equation defect exceeds tolerance".into(),
                    ));
                }
            }
        }
        Ok(coord)
    }

    /// The validity interval in original coordinates: psi is defined for
    /// points x with 0 < sign(x) and |x| <= x_max().
    pub fn x_max(&self) -> f64 {
        self.side.sign() * self.x0
    }

    fn seed(&self, x: f64) -> f64 {
        let psi0 =
            |t: f64| -1.0 / (self.p as f64 * self.a_int * t.powi(self.p as i32));
        psi0(self.x0) + (psi0(x) - psi0(self.x0)) / (1.0 + self.d0)
    }

    /// Solves seed(y) = v for y in the fundamental domain by bisection.
    fn seed_inverse(&self, v: f64) -> f64 {
        let mut lo = self.boundaries[1]; // f(x0)
        let mut hi = self.x0;
        // seed is decreasing on [f(x0), x0]
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.seed(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn extend_boundaries(&mut self, x: f64) -> Result<usize, AbelError> {
        while *self.boundaries.last().unwrap() > x {
            if self.boundaries.len() >= self.max_depth {
                return Err(AbelError::NoConvergence(format!(
                    "point {:e} deeper than the {}-step orbit budget",
                    x, self.max_depth
                )));
            }
            let next = self.germ.eval_f64(*self.boundaries.last().unwrap());
            if !(next > 0.0) {
                return Err(AbelError::NoConvergence(
                    "orbit left the positive axis".into(),
                ));
            }
            self.boundaries.push(next);
        }
        // annulus index k with b_{k+1} <= x < b_k (x <= b_0 guaranteed)
        let k = match self
            .boundaries
            .binary_search_by(|b| x.partial_cmp(b).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(k.min(self.boundaries.len() - 2))
    }

    /// One inverse step of the germ, bracketed in [lo, hi].
    fn inverse_step(&self, y: f64, lo: f64, hi: f64) -> f64 {
        let mut lo = lo;
        let mut hi = hi;
        // Newton from the midpoint with bisection fallback
        let mut x = 0.5 * (lo + hi);
        for _ in 0..60 {
            let fx = self.germ.eval_f64(x) - y;
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.germ.derivative_f64(x);
            let mut next = if d != 0.0 { x - fx / d } else { x };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() < 1e-17 * x.abs() {
                x = next;
                break;
            }
            x = next;
        }
        x
    }

    /// The Abel coordinate of a point on the validity interval. Requires a
    /// mutable handle because the boundary table grows lazily with depth.
    pub fn psi(&mut self, x: f64) -> Result<f64, AbelError> {
        let xi = self.side.sign() * x;
        if !(xi > 0.0) || xi > self.x0 * (1.0 + 1e-12) {
            return Err(AbelError::NoConvergence(format!(
                "point {:e} outside the validity interval",
                x
            )));
        }
        let xi = xi.min(self.x0);
        let k = self.extend_boundaries(xi)?;
        // walk k inverse steps back into the fundamental domain
        let mut y = xi;
        for j in (1..=k).rev() {
            // the preimage of a point in [b_{j+1}, b_j] lies in [b_j, b_{j-1}]
            let lo = self.boundaries[j];
            let hi = self.boundaries[j - 1];
            y = self.inverse_step(y, lo, hi);
        }
        Ok(self.seed(y) + k as f64)
    }

    /// Inverse Abel coordinate: the point with psi value v, computed by a
    /// seed solve plus forward iteration (the stable direction). Defined for
    /// all v >= psi(x0); depth is only limited by the iteration budget.
    pub fn psi_inv(&self, v: f64) -> Result<f64, AbelError> {
        let base = self.seed(self.x0); // smallest seed value on D
        let k = (v - base).floor();
        if k < 0.0 {
            return Err(AbelError::NoConvergence(format!(
                "value {:e} below the coordinate range",
                v
            )));
        }
        if k > 1e9 {
            return Err(AbelError::NoConvergence(format!(
                "value {:e} beyond the forward iteration budget",
                v
            )));
        }
        let frac = v - k; // in [base, base + 1)
        let mut y = self.seed_inverse(frac);
        for _ in 0..k as u64 {
            y = self.germ.eval_f64(y);
        }
        Ok(self.side.sign() * y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::DEFAULT_ORDER;

    fn g(cs: &[f64]) -> Germ<f64> {
        Germ::from_coeffs(cs.to_vec(), DEFAULT_ORDER)
    }

    #[test]
    fn rejects_identity_and_hyperbolic() {
        let id = Germ::<f64>::identity(DEFAULT_ORDER);
        assert!(matches!(
            AbelCoordinate::new(&id, Side::Plus, 1e-9),
            Err(AbelError::NotParabolic(_))
        ));
        let hyp = g(&[0.5, 1.0]);
        assert!(matches!(
            AbelCoordinate::new(&hyp, Side::Plus, 1e-9),
            Err(AbelError::NotParabolic(_))
        ));
    }

    #[test]
    fn rejects_repelling_side() {
        // f = x + x^2 repels on the positive side
        let f = g(&[1.0, 1.0]);
        assert!(matches!(
            AbelCoordinate::new(&f, Side::Plus, 1e-9),
            Err(AbelError::SideNotAttracting(_))
        ));
        // but attracts on the negative side
        assert!(AbelCoordinate::new(&f, Side::Minus, 1e-9).is_ok());
    }

    #[test]
    fn abel_relation_for_x_minus_x2() {
        let f = g(&[1.0, -1.0]);
        let mut psi = AbelCoordinate::new(&f, Side::Plus, 1e-9).unwrap();
        assert_eq!(psi.p, 1);
        assert_eq!(psi.a, -1.0);
        for &x in &[0.1, 0.05, 0.21, 0.002] {
            let lhs = psi.psi(f.eval_f64(x)).unwrap();
            let rhs = psi.psi(x).unwrap() + 1.0;
            assert!(
                (lhs - rhs).abs() < 1e-9,
                "defect {:e} at x={}",
                (lhs - rhs).abs(),
                x
            );
        }
    }

    #[test]
    fn abel_relation_for_x_minus_x3() {
        let f = g(&[1.0, 0.0, -1.0]);
        let mut psi = AbelCoordinate::new(&f, Side::Plus, 1e-9).unwrap();
        assert_eq!(psi.p, 2);
        for &x in &[0.1, 0.3, 0.02] {
            let lhs = psi.psi(f.eval_f64(x)).unwrap();
            let rhs = psi.psi(x).unwrap() + 1.0;
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trip_and_interpolation() {
        let f = g(&[1.0, -1.0]);
        let mut psi = AbelCoordinate::new(&f, Side::Plus, 1e-9).unwrap();
        let b = 0.2;
        let pb = psi.psi(b).unwrap();
        // round trip
        let back = psi.psi_inv(pb).unwrap();
        assert!((back - b).abs() < 1e-12);
        // interpolation at integers matches forward iteration
        let mut orbit = b;
        for m in 0..40 {
            let interp = psi.psi_inv(pb + m as f64).unwrap();
            assert!(
                (interp - orbit).abs() < 1e-12,
                "m={} interp={} orbit={}",
                m,
                interp,
                orbit
            );
            orbit = f.eval_f64(orbit);
        }
    }

    #[test]
    fn negative_side_via_reflection() {
        // f = x - x^2 repels on the negative side; f = x + x^2 attracts there
        let f = g(&[1.0, 1.0]);
        let mut psi = AbelCoordinate::new(&f, Side::Minus, 1e-9).unwrap();
        let x = -0.1;
        let lhs = psi.psi(f.eval_f64(x)).unwrap();
        let rhs = psi.psi(x).unwrap() + 1.0;
        assert!((lhs - rhs).abs() < 1e-9);
        let pb = psi.psi(x).unwrap();
        let mut orbit = x;
        for m in 0..10 {
            let interp = psi.psi_inv(pb + m as f64).unwrap();
            assert!((interp - orbit).abs() < 1e-12);
            orbit = f.eval_f64(orbit);
        }
    }
}
