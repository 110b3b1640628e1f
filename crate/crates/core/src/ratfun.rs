//! Rational functions over Q and rational reconstruction from series.

use std::fmt;

use num::BigRational;
use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::series::Series;
use crate::{Error, Result};

/// num/den with den monic and gcd(num, den) = 1.
#[derive(Clone, PartialEq, Eq)]
pub struct RatFun {
    pub num: Poly,
    pub den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFun { num, den };
        r.reduce();
        r
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun { num: p, den: Poly::one() }
    }

    pub fn zero() -> Self {
        RatFun::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        RatFun::from_poly(Poly::one())
    }

    pub fn constant(q: BigRational) -> Self {
        RatFun::from_poly(Poly::constant(q))
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree() > 0 {
            self.num = self.num.div_rem(&g).0;
            self.den = self.den.div_rem(&g).0;
        }
        let lead = self.den.leading().recip();
        self.num = self.num.scale(&lead);
        self.den = self.den.scale(&lead);
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, rhs: &RatFun) -> RatFun {
        RatFun::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &RatFun) -> RatFun {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, rhs: &RatFun) -> RatFun {
        RatFun::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn scale(&self, q: &BigRational) -> RatFun {
        RatFun { num: self.num.scale(q), den: self.den.clone() }
    }

    pub fn div(&self, rhs: &RatFun) -> Result<RatFun> {
        if rhs.is_zero() {
            return Err(Error::Invalid("division by zero rational function".into()));
        }
        Ok(RatFun::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num)))
    }

    pub fn recip(&self) -> Result<RatFun> {
        RatFun::one().div(self)
    }

    /// theta = z d/dz.
    pub fn theta(&self) -> RatFun {
        // theta(n/d) = (theta(n) d - n theta(d)) / d^2
        RatFun::new(
            self.num.theta().mul(&self.den).sub(&self.num.mul(&self.den.theta())),
            self.den.mul(&self.den),
        )
    }

    pub fn pow(&self, k: usize) -> RatFun {
        let mut out = RatFun::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    /// Laurent expansion at z = 0 to order `trunc` (handles a z^k factor in
    /// the denominator).
    pub fn expand(&self, trunc: i64) -> Series {
        if self.num.is_zero() {
            return Series::zero(trunc);
        }
        let dlow = self.den.low_degree();
        let den_unit = Poly::new(self.den.coeffs()[dlow..].to_vec());
        let nlow = self.num.low_degree();
        let num_shift = Poly::new(self.num.coeffs()[nlow..].to_vec());
        let val = nlow as i64 - dlow as i64;
        // Expand num_shift / den_unit as a power series, then shift by val.
        let n = (trunc - val).max(0) as usize;
        let d0inv = den_unit.coeff(0).recip();
        let mut out = vec![BigRational::zero(); n];
        for k in 0..n {
            let mut acc = num_shift.coeff(k);
            for j in 1..=k.min(den_unit.degree().max(0) as usize) {
                acc -= den_unit.coeff(j) * &out[k - j];
            }
            out[k] = acc * &d0inv;
        }
        Series::from_rationals(val, &out, trunc)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Reconstruct a rational function from a series with plain rational
/// coefficients. Sweeps (num_deg, den_deg) by total degree and verifies the
/// fit on `guard` extra coefficients beyond the linear-algebra window; all
/// known coefficients of the input must match.
pub fn rational_reconstruct(
    s: &Series,
    max_num_deg: usize,
    max_den_deg: usize,
    guard: usize,
) -> Result<RatFun> {
    if !s.is_rational() {
        return Err(Error::MixedConstants);
    }
    if s.valuation() < 0 {
        return Err(Error::Invalid(
            "rational reconstruction expects a power series (valuation >= 0)".into(),
        ));
    }
    let n_avail = s.truncation_order();
    for total in 0..=(max_num_deg + max_den_deg) {
        for dn in 0..=total.min(max_num_deg) {
            let dd = total - dn;
            if dd > max_den_deg {
                continue;
            }
            let need = (dn + dd + 1 + guard) as i64;
            if n_avail < need {
                return Err(Error::Invalid(format!(
                    "need {need} series coefficients for degrees ({dn},{dd}) + guard, have {n_avail}"
                )));
            }
            if let Some(rf) = try_fit(s, dn, dd)? {
                return Ok(rf);
            }
        }
    }
    Err(Error::NoMatch(max_num_deg, max_den_deg))
}

/// Try num/den with deg(num) <= dn, deg(den) <= dd, den(0) = 1, matching all
/// available coefficients of s.
fn try_fit(s: &Series, dn: usize, dd: usize) -> Result<Option<RatFun>> {
    let n_avail = s.truncation_order();
    let coeffs = s.rational_coeffs(0, n_avail)?;
    // Solve for q_1..q_dd from rows dn+1 .. dn+dd of s*q = p.
    let mut m = Vec::with_capacity(dd);
    let mut rhs = Vec::with_capacity(dd);
    for row in 0..dd {
        let k = dn + 1 + row;
        let mut r = Vec::with_capacity(dd);
        for j in 1..=dd {
            r.push(if k >= j { coeffs[k - j].clone() } else { BigRational::zero() });
        }
        m.push(r);
        rhs.push(-coeffs.get(k).cloned().unwrap_or_else(BigRational::zero));
    }
    let q = match solve_dense(m, rhs) {
        Some(q) => q,
        None => return Ok(None),
    };
    let mut den = vec![BigRational::one()];
    den.extend(q);
    let den = Poly::new(den);
    // p = (s * den) truncated to degree dn; verify every remaining coefficient
    // of the product is zero.
    let prod = s.mul(&RatFun::from_poly(den.clone()).expand(n_avail));
    let mut num = vec![BigRational::zero(); dn + 1];
    for (k, item) in num.iter_mut().enumerate() {
        *item = prod.coeff(k as i64).to_rational()?;
    }
    for k in (dn as i64 + 1)..prod.truncation_order() {
        if !prod.coeff(k).is_zero() {
            return Ok(None);
        }
    }
    Ok(Some(RatFun::new(Poly::new(num), den)))
}

/// Exact dense linear solve over Q; None when the system is singular or
/// inconsistent.
fn solve_dense(
    mut m: Vec<Vec<BigRational>>,
    mut rhs: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let rows = m.len();
    if rows == 0 {
        return Some(vec![]);
    }
    let cols = m[0].len();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let piv = (r..rows).find(|&i| !m[i][c].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => continue,
        };
        m.swap(r, piv);
        rhs.swap(r, piv);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        rhs[r] *= &inv;
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
                let t = &rhs[r] * &f;
                rhs[i] -= t;
            }
        }
        piv_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    // Inconsistent rows?
    for i in r..rows {
        if !rhs[i].is_zero() {
            return None;
        }
    }
    let mut out = vec![BigRational::zero(); cols];
    for (row, &c) in piv_cols.iter().enumerate() {
        out[c] = rhs[row].clone();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn expand_geometric() {
        // 1/(1-z) = 1 + z + z^2 + ...
        let rf = RatFun::new(Poly::one(), Poly::from_i64(&[1, -1]));
        let s = rf.expand(5);
        for k in 0..5 {
            assert_eq!(s.coeff(k).to_rational().unwrap(), q(1, 1));
        }
    }

    #[test]
    fn reconstruct_p1_quintic() {
        // p1 = (1 - 6250 z) / (2 (1 - 3125 z)); expansion derived from the
        // geometric series (independent oracle).
        let target = RatFun::new(
            Poly::from_i64(&[1, -6250]),
            Poly::from_i64(&[2, -6250]),
        );
        let s = target.expand(20);
        // First coefficients: 1/2, then (1/2)(3125^k * (3125 - 6250) ... ) --
        // check the first two directly against hand expansion:
        // (1 - 6250 z) * (1/2) * sum 3125^k z^k
        assert_eq!(s.coeff(0).to_rational().unwrap(), q(1, 2));
        assert_eq!(s.coeff(1).to_rational().unwrap(), q(-3125, 2));
        assert_eq!(s.coeff(2).to_rational().unwrap(), q(-9765625, 2));
        let rec = rational_reconstruct(&s, 6, 6, 5).unwrap();
        assert_eq!(rec, target);
    }

    #[test]
    fn reconstruct_p1_hypergeometric_case() {
        // -256 z / (1 - 1024 z): series -256 z (1 + 1024 z + 1024^2 z^2 + ...)
        let target = RatFun::new(Poly::from_i64(&[0, -256]), Poly::from_i64(&[1, -1024]));
        let mut cs = vec![q(0, 1)];
        let mut p = q(-256, 1);
        for _ in 0..16 {
            cs.push(p.clone());
            p *= q(1024, 1);
        }
        let s = Series::from_rationals(0, &cs, 17);
        let rec = rational_reconstruct(&s, 5, 5, 5).unwrap();
        assert_eq!(rec, target);
    }

    #[test]
    fn reconstruct_constant() {
        let s = Series::from_rationals(0, &[q(7, 1)], 12);
        let rec = rational_reconstruct(&s, 3, 3, 5).unwrap();
        assert_eq!(rec, RatFun::constant(q(7, 1)));
    }

    #[test]
    fn reject_mixed_constants() {
        use crate::constant::Constant;
        let s = Series::monomial(Constant::p_pow(1), 0, 12);
        assert!(matches!(
            rational_reconstruct(&s, 2, 2, 3),
            Err(Error::MixedConstants)
        ));
    }

    #[test]
    fn no_match_within_bounds() {
        // exp-like series is not rational of low degree
        let mut cs = vec![];
        let mut f = q(1, 1);
        for k in 0..14i64 {
            if k > 0 {
                f = f / q(k, 1);
            }
            cs.push(f.clone());
        }
        let s = Series::from_rationals(0, &cs, 14);
        assert!(matches!(
            rational_reconstruct(&s, 3, 3, 5),
            Err(Error::NoMatch(3, 3))
        ));
    }
}
