//! The constants ring Q[P, P^-1, Xi]/(Xi^2).
//!
//! P stands for 2*pi*i (invertible) and Xi for zeta(3)/(2*pi*i)^3. No
//! formula in scope ever produces Xi^2, so the quotient by Xi^2 keeps all
//! basis changes exact while the ring stays a plain finite Q-module.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Sanity cap on |P-exponent|; anything beyond signals a runaway computation.
const MAX_P_EXP: i32 = 100;

/// Monomial key: (P-exponent, Xi-exponent). Xi-exponent is 0 or 1.
pub type Key = (i32, u8);

/// Element of Q[P, P^-1, Xi]/(Xi^2). Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Constant {
    terms: BTreeMap<Key, BigRational>,
}

impl Constant {
    pub fn zero() -> Self {
        Constant { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Constant::from_rational(BigRational::one())
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut t = BTreeMap::new();
        if !q.is_zero() {
            t.insert((0, 0), q);
        }
        Constant { terms: t }
    }

    pub fn from_i64(n: i64) -> Self {
        Constant::from_rational(BigRational::from_integer(n.into()))
    }

    /// q/r as a rational constant.
    pub fn ratio(q: i64, r: i64) -> Self {
        Constant::from_rational(BigRational::new(q.into(), r.into()))
    }

    /// c * P^k * Xi^x.
    pub fn monomial(c: BigRational, p_exp: i32, xi_exp: u8) -> Self {
        assert!(xi_exp <= 1, "Xi-exponent must be 0 or 1");
        assert!(p_exp.abs() <= MAX_P_EXP, "P-exponent {p_exp} out of range");
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert((p_exp, xi_exp), c);
        }
        Constant { terms: t }
    }

    /// The symbol P = 2*pi*i.
    pub fn p_pow(k: i32) -> Self {
        Constant::monomial(BigRational::one(), k, 0)
    }

    /// The symbol Xi = zeta(3)/(2*pi*i)^3.
    pub fn xi() -> Self {
        Constant::monomial(BigRational::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the element is a plain rational (no P or Xi monomial).
    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&k| k == (0, 0))
    }

    /// The rational part; errors if any non-trivial monomial is present.
    pub fn to_rational(&self) -> Result<BigRational> {
        if !self.is_rational() {
            return Err(Error::MixedConstants);
        }
        Ok(self.terms.get(&(0, 0)).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: Key) -> BigRational {
        self.terms.get(&key).cloned().unwrap_or_else(BigRational::zero)
    }

    fn insert_add(&mut self, key: Key, val: BigRational) {
        if val.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(val);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += val;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Constant::zero();
        }
        Constant {
            terms: self.terms.iter().map(|(k, v)| (*k, v * q)).collect(),
        }
    }

    /// Multiply by P^k (shift every P-exponent).
    pub fn mul_p_pow(&self, k: i32) -> Self {
        Constant {
            terms: self
                .terms
                .iter()
                .map(|(&(p, x), v)| {
                    assert!((p + k).abs() <= MAX_P_EXP, "P-exponent overflow");
                    ((p + k, x), v.clone())
                })
                .collect(),
        }
    }

    /// A unit is c*P^a plus an arbitrary Xi-part: the Xi-free part must be a
    /// single monomial. Returns the inverse or an error.
    pub fn inverse(&self) -> Result<Constant> {
        let free: Vec<(Key, &BigRational)> = self
            .terms
            .iter()
            .filter(|((_, x), _)| *x == 0)
            .map(|(k, v)| (*k, v))
            .collect();
        if free.len() != 1 {
            return Err(Error::NonUnitConstant(self.to_string()));
        }
        let ((a, _), c) = free[0];
        // (c P^a + Xi R)^-1 = c^-1 P^-a - Xi R c^-2 P^-2a
        let cinv = c.recip();
        let mut out = Constant::monomial(cinv.clone(), -a, 0);
        for (&(p, x), v) in &self.terms {
            if x == 1 {
                out.insert_add((p - 2 * a, 1), -(v * &cinv * &cinv));
            }
        }
        Ok(out)
    }

    /// Square root of a monomial c*P^(2k) with c a rational square; the sign
    /// of the result's coefficient follows `sign`.
    pub fn sqrt_monomial(&self, sign: i32) -> Result<Constant> {
        if self.terms.len() != 1 {
            return Err(Error::NonSquareLeadingCoefficient(self.to_string()));
        }
        let (&(p, x), c) = self.terms.iter().next().unwrap();
        if x != 0 || p % 2 != 0 || c.is_negative() {
            return Err(Error::NonSquareLeadingCoefficient(self.to_string()));
        }
        let num = c.numer().sqrt();
        let den = c.denom().sqrt();
        let root = BigRational::new(num.clone(), den.clone());
        if &root * &root != *c {
            return Err(Error::NonSquareLeadingCoefficient(self.to_string()));
        }
        let root = if sign < 0 { -root } else { root };
        Ok(Constant::monomial(root, p / 2, 0))
    }

    /// Largest |P-exponent| present (0 for rationals); used by validators.
    pub fn max_p_abs(&self) -> i32 {
        self.terms.keys().map(|&(p, _)| p.abs()).max().unwrap_or(0)
    }
}

impl Add for &Constant {
    type Output = Constant;
    fn add(self, rhs: &Constant) -> Constant {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.insert_add(*k, v.clone());
        }
        out
    }
}

impl Sub for &Constant {
    type Output = Constant;
    fn sub(self, rhs: &Constant) -> Constant {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.insert_add(*k, -v.clone());
        }
        out
    }
}

impl Neg for &Constant {
    type Output = Constant;
    fn neg(self) -> Constant {
        Constant {
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }
}

impl Mul for &Constant {
    type Output = Constant;
    fn mul(self, rhs: &Constant) -> Constant {
        let mut out = Constant::zero();
        for (&(pa, xa), va) in &self.terms {
            for (&(pb, xb), vb) in &rhs.terms {
                let x = xa + xb;
                if x >= 2 {
                    // Xi^2 = 0 in the quotient.
                    continue;
                }
                out.insert_add((pa + pb, x), va * vb);
            }
        }
        out
    }
}

impl AddAssign<&Constant> for Constant {
    fn add_assign(&mut self, rhs: &Constant) {
        for (k, v) in &rhs.terms {
            self.insert_add(*k, v.clone());
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(p, x), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if p == 0 && x == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}")?;
                if p != 0 {
                    write!(f, "*P^{p}")?;
                }
                if x == 1 {
                    write!(f, "*Xi")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn xi_squared_vanishes() {
        let xi = Constant::xi();
        assert!((&xi * &xi).is_zero());
    }

    #[test]
    fn unit_inverse() {
        // (3 P^2 + 5 Xi)^-1 = (1/3) P^-2 - (5/9) P^-4 Xi
        let u = &Constant::monomial(q(3, 1), 2, 0) + &Constant::monomial(q(5, 1), 0, 1);
        let inv = u.inverse().unwrap();
        assert_eq!(&u * &inv, Constant::one());
    }

    #[test]
    fn non_unit_rejected() {
        let u = &Constant::one() + &Constant::p_pow(1);
        assert!(u.inverse().is_err());
        assert!(Constant::zero().inverse().is_err());
    }

    #[test]
    fn sqrt_of_even_monomial() {
        let m = Constant::monomial(q(9, 4), -2, 0);
        let r = m.sqrt_monomial(1).unwrap();
        assert_eq!(&r * &r, m);
        assert_eq!(r, Constant::monomial(q(3, 2), -1, 0));
        assert!(Constant::monomial(q(2, 1), 0, 0).sqrt_monomial(1).is_err());
        assert!(Constant::monomial(q(1, 1), 1, 0).sqrt_monomial(1).is_err());
    }
}
