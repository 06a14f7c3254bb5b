//! Exact polynomials in the aspect ratio `alpha` with arbitrary-precision
//! integer coefficients.
//!
//! Both the enumeration counts and the generating-series coefficients are
//! integer polynomials in `alpha`; keeping them exact lets the two routes be
//! compared with `==` instead of a float tolerance.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Integer polynomial `sum_i coeffs[i] * alpha^i`, trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0)
    }

    /// `coeff * alpha^degree`.
    pub fn monomial(coeff: impl Into<BigInt>, degree: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[degree] = coeff.into();
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `alpha^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// Multiply by `alpha^shift`.
    pub fn shift(&self, shift: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); shift];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// Exact value at an integer point.
    pub fn eval_exact(&self, alpha: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * alpha + c)
    }

    /// Floating-point value (Horner).
    pub fn eval(&self, alpha: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| {
            acc * alpha + c.to_f64().unwrap_or(f64::NAN)
        })
    }
}

impl Add<&IntPoly> for &IntPoly {
    type Output = IntPoly;

    fn add(self, rhs: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&IntPoly> for IntPoly {
    fn add_assign(&mut self, rhs: &IntPoly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), BigInt::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self.trim();
    }
}

impl Mul<&IntPoly> for &IntPoly {
    type Output = IntPoly;

    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "a")?,
                (1, false) => write!(f, "{mag}a")?,
                (_, true) => write!(f, "a^{i}")?,
                (_, false) => write!(f, "{mag}a^{i}")?,
            }
        }
        Ok(())
    }
}

/// Truncated power series in `z` whose coefficients are polynomials in `alpha`.
pub(crate) type PolySeries = Vec<IntPoly>;

/// Coefficient of `z^n` in the product of two truncated series.
pub(crate) fn series_product_coeff(lhs: &[IntPoly], rhs: &[IntPoly], n: usize) -> IntPoly {
    let mut acc = IntPoly::zero();
    for p in 0..=n {
        if let (Some(a), Some(b)) = (lhs.get(p), rhs.get(n - p)) {
            if !a.is_zero() && !b.is_zero() {
                acc += &(a * b);
            }
        }
    }
    acc
}

/// Full product truncated at `z^max_order`.
pub(crate) fn series_product(lhs: &[IntPoly], rhs: &[IntPoly], max_order: usize) -> PolySeries {
    (0..=max_order)
        .map(|n| series_product_coeff(lhs, rhs, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_coeffs(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]); // 1 + alpha
        let sq = &a * &a;
        assert_eq!(sq, p(&[1, 2, 1]));
        assert_eq!(&sq + &p(&[-1, -2, -1]), IntPoly::zero());
        assert_eq!(sq.eval(2.0), 9.0);
        assert_eq!(sq.eval_exact(&BigInt::from(3)), BigInt::from(16));
        assert_eq!(a.shift(2), p(&[0, 0, 1, 1]));
        assert_eq!(sq.degree(), Some(2));
        assert_eq!(IntPoly::zero().degree(), None);
    }

    #[test]
    fn display() {
        assert_eq!(p(&[0, 1, 3, 1]).to_string(), "a^3 + 3a^2 + a");
        assert_eq!(p(&[-2, 0, 1]).to_string(), "a^2 - 2");
        assert_eq!(IntPoly::zero().to_string(), "0");
    }

    #[test]
    fn series_products() {
        // (1 + z)(1 + z) = 1 + 2z + z^2
        let s = vec![IntPoly::one(), IntPoly::one()];
        let prod = series_product(&s, &s, 3);
        assert_eq!(prod[1], p(&[2]));
        assert_eq!(prod[2], p(&[1]));
        assert!(prod[3].is_zero());
    }
}
