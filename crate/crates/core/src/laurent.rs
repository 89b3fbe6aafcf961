//! Laurent polynomials in one variable `q` with coefficients in Z[1/2].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::ring::Dyadic;

/// Sparse Laurent polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Laurent {
    coeffs: BTreeMap<i64, Dyadic>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }

    pub fn one() -> Self {
        Laurent::monomial(0, Dyadic::one())
    }

    /// The variable `q` itself.
    pub fn q() -> Self {
        Laurent::monomial(1, Dyadic::one())
    }

    pub fn monomial(exp: i64, coeff: Dyadic) -> Self {
        let mut p = Laurent::zero();
        p.add_term(exp, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(terms: I) -> Self {
        let mut p = Laurent::zero();
        for (e, c) in terms {
            p.add_term(e, Dyadic::from_int(c));
        }
        p
    }

    pub fn add_term(&mut self, exp: i64, coeff: Dyadic) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(exp).or_insert_with(Dyadic::zero);
        *entry += &coeff;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> Dyadic {
        self.coeffs.get(&exp).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Dyadic)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, c: &Dyadic) -> Laurent {
        let mut p = Laurent::zero();
        for (e, v) in self.terms() {
            p.add_term(e, v * c);
        }
        p
    }

    /// Multiply by `q^k`.
    pub fn shifted(&self, k: i64) -> Laurent {
        Laurent { coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// Substitute `q -> q^-1`.
    pub fn mirrored(&self) -> Laurent {
        Laurent { coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Laurent {
        let mut acc = Laurent::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at a dyadic point (used by tests for spot checks).
    pub fn eval(&self, x: &Dyadic) -> Dyadic {
        let mut acc = Dyadic::zero();
        for (e, c) in self.terms() {
            assert!(e >= 0, "evaluation of negative exponents is not supported");
            let mut t = c.clone();
            for _ in 0..e {
                t = &t * x;
            }
            acc += &t;
        }
        acc
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        let mut p = self.clone();
        for (e, c) in rhs.terms() {
            p.add_term(e, c.clone());
        }
        p
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        let mut p = self.clone();
        for (e, c) in rhs.terms() {
            p.add_term(e, -c);
        }
        p
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        let mut p = Laurent::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                p.add_term(e1 + e2, c1 * c2);
            }
        }
        p
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent { coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Terms print in descending exponent with explicit `q^k` tokens,
/// e.g. `q^2 + 1 + q^-2` and `q + q^-1`.
impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            let neg = c.numerator().sign() == num_bigint::Sign::Minus;
            let mag = if neg { -c } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_is_one = mag.is_one();
            match (*e, coeff_is_one) {
                (0, _) => write!(f, "{}", mag)?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{}*q", mag)?,
                (_, true) => write!(f, "q^{}", e)?,
                (_, false) => write!(f, "{}*q^{}", mag, e)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_descending_with_explicit_tokens() {
        let p = Laurent::from_terms([(1, 1), (-1, 1)]);
        assert_eq!(p.to_string(), "q + q^-1");
        let p = Laurent::from_terms([(2, 1), (0, 1), (-2, 1)]);
        assert_eq!(p.to_string(), "q^2 + 1 + q^-2");
        let p = Laurent::from_terms([(9, -1), (5, 1), (3, 1), (1, 1)]);
        assert_eq!(p.to_string(), "-q^9 + q^5 + q^3 + q");
        let p = Laurent::from_terms([(0, -3), (2, 2)]);
        assert_eq!(p.to_string(), "2*q^2 - 3");
        assert_eq!(Laurent::zero().to_string(), "0");
    }

    #[test]
    fn ring_ops() {
        let unknot = Laurent::from_terms([(1, 1), (-1, 1)]);
        let sq = &unknot * &unknot;
        assert_eq!(sq, Laurent::from_terms([(2, 1), (0, 2), (-2, 1)]));
        assert_eq!(&sq - &sq, Laurent::zero());
        assert_eq!(unknot.mirrored(), unknot);
        let cube = unknot.pow(3);
        assert_eq!(cube.coeff(1), crate::ring::Dyadic::from_int(3));
    }
}
