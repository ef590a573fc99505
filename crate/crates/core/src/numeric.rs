//! Exact univariate polynomials and real root isolation, used to turn the
//! solver's algebraic-number answers into close rational approximations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense polynomial, coefficient `i` multiplies `x^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn constant(c: BigRational) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn x() -> Self {
        UniPoly::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        UniPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::new(vec![]);
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        let mut acc = UniPoly::constant(BigRational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    fn rem(&self, divisor: &UniPoly) -> UniPoly {
        let mut r = self.clone();
        let d = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.lead();
        while let Some(rd) = r.degree() {
            if rd < d {
                break;
            }
            let factor = r.lead() / &lead;
            let shift = rd - d;
            let mut coeffs = r.coeffs.clone();
            for (i, c) in divisor.coeffs.iter().enumerate() {
                coeffs[i + shift] -= &factor * c;
            }
            coeffs.pop();
            r = UniPoly::new(coeffs);
        }
        r
    }

    fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            seq.push(r);
        }
        seq.pop();
        seq
    }

    /// Upper bound on the absolute value of every real root.
    fn root_bound(&self) -> BigRational {
        let lead = self.lead().abs();
        let max = self.coeffs.iter().map(|c| c.abs() / &lead).fold(BigRational::zero(), |a, b| if b > a { b } else { a });
        max + BigRational::one()
    }

    /// The `index`-th smallest distinct real root (1-based), approximated
    /// to within `2^-precision_bits`.
    pub fn nth_root(&self, index: usize, precision_bits: u32) -> Option<BigRational> {
        if index == 0 || self.degree().unwrap_or(0) == 0 {
            return None;
        }
        let seq = self.sturm_sequence();
        let bound = self.root_bound();
        let below = |x: &BigRational| sign_changes(&seq, x);
        let at_lo = below(&-bound.clone());
        let total = at_lo - below(&bound);
        if index > total {
            return None;
        }
        // Roots in (lo, x] = V(lo) - V(x); find the smallest x with count >= index.
        let mut lo = -bound.clone();
        let mut hi = bound;
        let two = BigRational::from_integer(BigInt::from(2));
        let target = BigRational::new(BigInt::one(), BigInt::one() << precision_bits as usize);
        while &hi - &lo > target {
            let mid = (&lo + &hi) / &two;
            if at_lo - below(&mid) >= index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some((lo + hi) / two)
    }
}

fn sign_changes(seq: &[UniPoly], x: &BigRational) -> usize {
    let mut changes = 0;
    let mut last: Option<bool> = None;
    for p in seq {
        let v = p.eval(x);
        if v.is_zero() {
            continue;
        }
        let pos = v.is_positive();
        if last.is_some_and(|l| l != pos) {
            changes += 1;
        }
        last = Some(pos);
    }
    changes
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Decimal rendering with `digits` significant digits.
pub fn format_significant(value: &BigRational, digits: usize) -> String {
    let v = to_f64(value);
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn square_root_of_two() {
        // x^2 - 2
        let p = UniPoly::new(vec![q(-2), q(0), q(1)]);
        let r2 = to_f64(&p.nth_root(2, 100).unwrap());
        assert!((r2 - 2f64.sqrt()).abs() < 1e-12);
        let r1 = to_f64(&p.nth_root(1, 100).unwrap());
        assert!((r1 + 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.nth_root(3, 100), None);
    }

    #[test]
    fn cubic_roots_in_order() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let p = UniPoly::new(vec![q(6), q(-7), q(0), q(1)]);
        let roots: Vec<f64> = (1..=3).map(|k| to_f64(&p.nth_root(k, 80).unwrap())).collect();
        assert!((roots[0] + 3.0).abs() < 1e-9 && (roots[1] - 1.0).abs() < 1e-9 && (roots[2] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(&BigRational::new(1.into(), 3.into()), 6), "0.333333");
        assert_eq!(format_significant(&q(1234567), 6), "1234567");
        assert_eq!(format_significant(&BigRational::new(5.into(), 2.into()), 6), "2.5");
    }
}
