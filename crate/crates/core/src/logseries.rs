//! Series extended polynomially by l = log(z)/(2*pi*i).
//!
//! theta acts by theta(l) = P^-1 (theta log z = 1 and l = log z / P). The
//! l-degree of genuine solution data never exceeds 4 (order-5 equations);
//! intermediate products in wronskian identities go higher, so the internal
//! cap is generous and only guards against runaway recursion.

use std::fmt;

use num::BigRational;

use crate::constant::Constant;
use crate::series::Series;
use crate::{Error, Result};

/// Hard internal cap on the l-degree; solution data stays at <= 4.
const MAX_ELL: usize = 12;

#[derive(Clone, PartialEq, Eq)]
pub struct LogSeries {
    /// ell[k] is the coefficient series of l^k. All share one truncation.
    ell: Vec<Series>,
}

impl LogSeries {
    pub fn new(mut ell: Vec<Series>) -> Self {
        assert!(!ell.is_empty(), "need at least the l^0 part");
        assert!(ell.len() <= MAX_ELL + 1, "l-degree cap exceeded");
        let trunc = ell.iter().map(|s| s.truncation_order()).min().unwrap();
        for s in ell.iter_mut() {
            *s = s.truncate_to(trunc);
        }
        while ell.len() > 1 && ell.last().unwrap().is_zero() {
            ell.pop();
        }
        LogSeries { ell }
    }

    pub fn from_series(s: Series) -> Self {
        LogSeries { ell: vec![s] }
    }

    pub fn zero(trunc: i64) -> Self {
        LogSeries::from_series(Series::zero(trunc))
    }

    pub fn one(trunc: i64) -> Self {
        LogSeries::from_series(Series::one(trunc))
    }

    /// The variable l itself.
    pub fn ell(trunc: i64) -> Self {
        LogSeries::new(vec![Series::zero(trunc), Series::one(trunc)])
    }

    pub fn monomial(c: Constant, zpow: i64, ellpow: usize, trunc: i64) -> Self {
        let mut ell = vec![Series::zero(trunc); ellpow + 1];
        ell[ellpow] = Series::monomial(c, zpow, trunc);
        LogSeries::new(ell)
    }

    pub fn ell_degree(&self) -> usize {
        self.ell.len() - 1
    }

    pub fn is_ell_free(&self) -> bool {
        self.ell.len() == 1
    }

    pub fn ell_coeff(&self, k: usize) -> Series {
        self.ell
            .get(k)
            .cloned()
            .unwrap_or_else(|| Series::zero(self.truncation_order()))
    }

    pub fn ell_coeffs(&self) -> &[Series] {
        &self.ell
    }

    pub fn truncation_order(&self) -> i64 {
        self.ell.iter().map(|s| s.truncation_order()).min().unwrap()
    }

    pub fn valuation(&self) -> i64 {
        self.ell.iter().map(|s| s.valuation()).min().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.ell.iter().all(|s| s.is_zero())
    }

    pub fn truncate_to(&self, trunc: i64) -> LogSeries {
        LogSeries::new(self.ell.iter().map(|s| s.truncate_to(trunc)).collect())
    }

    pub fn add(&self, rhs: &LogSeries) -> LogSeries {
        let deg = self.ell.len().max(rhs.ell.len());
        let trunc = self.truncation_order().min(rhs.truncation_order());
        let mut out = Vec::with_capacity(deg);
        for k in 0..deg {
            let a = self.ell.get(k).cloned().unwrap_or_else(|| Series::zero(trunc));
            let b = rhs.ell.get(k).cloned().unwrap_or_else(|| Series::zero(trunc));
            out.push(a.add(&b));
        }
        LogSeries::new(out)
    }

    pub fn sub(&self, rhs: &LogSeries) -> LogSeries {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> LogSeries {
        LogSeries { ell: self.ell.iter().map(|s| s.neg()).collect() }
    }

    pub fn scale(&self, c: &Constant) -> LogSeries {
        LogSeries::new(self.ell.iter().map(|s| s.scale(c)).collect())
    }

    pub fn scale_rat(&self, q: &BigRational) -> LogSeries {
        LogSeries::new(self.ell.iter().map(|s| s.scale_rat(q)).collect())
    }

    pub fn mul_zpow(&self, k: i64) -> LogSeries {
        LogSeries { ell: self.ell.iter().map(|s| s.mul_zpow(k)).collect() }
    }

    pub fn mul_series(&self, s: &Series) -> LogSeries {
        LogSeries::new(self.ell.iter().map(|a| a.mul(s)).collect())
    }

    pub fn mul(&self, rhs: &LogSeries) -> LogSeries {
        let deg = self.ell.len() + rhs.ell.len() - 2;
        assert!(deg <= MAX_ELL, "l-degree cap exceeded in product");
        // Product truncation: the min over contributing pairs.
        let trunc = self
            .ell
            .iter()
            .flat_map(|a| {
                rhs.ell.iter().map(move |b| {
                    (a.valuation() + b.truncation_order())
                        .min(b.valuation() + a.truncation_order())
                })
            })
            .min()
            .unwrap();
        let mut out = vec![Series::zero(trunc); deg + 1];
        for (i, a) in self.ell.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.ell.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        LogSeries::new(out)
    }

    /// z d/dz, using theta(l) = P^-1.
    pub fn theta(&self) -> LogSeries {
        let trunc = self.truncation_order();
        let mut out = vec![Series::zero(trunc); self.ell.len()];
        let eta = Constant::p_pow(-1);
        for (k, s) in self.ell.iter().enumerate() {
            out[k] = out[k].add(&s.theta());
            if k >= 1 {
                let down = s.scale(&eta).scale_rat(&BigRational::from_integer((k as i64).into()));
                out[k - 1] = out[k - 1].add(&down);
            }
        }
        LogSeries::new(out)
    }

    /// d/dz.
    pub fn ddz(&self) -> LogSeries {
        self.theta().mul_zpow(-1)
    }

    /// Division by an l-free series.
    pub fn div_series(&self, s: &Series) -> Result<LogSeries> {
        let inv = s.reciprocal()?;
        Ok(self.mul_series(&inv))
    }

    /// General division: the divisor must be l-free (every quotient in scope
    /// has an l-free denominator).
    pub fn div(&self, rhs: &LogSeries) -> Result<LogSeries> {
        if !rhs.is_ell_free() {
            return Err(Error::LogDivision);
        }
        self.div_series(&rhs.ell[0])
    }

    pub fn reciprocal(&self) -> Result<LogSeries> {
        if !self.is_ell_free() {
            return Err(Error::LogDivision);
        }
        Ok(LogSeries::from_series(self.ell[0].reciprocal()?))
    }

    /// Substitute l -> l + a for a rational a (monodromy around z = 0 is
    /// a = 1 for a counterclockwise loop).
    pub fn shift_ell(&self, a: &BigRational) -> LogSeries {
        let trunc = self.truncation_order();
        let deg = self.ell.len();
        let mut out = vec![Series::zero(trunc); deg];
        // l^k -> sum_j C(k,j) a^(k-j) l^j
        for (k, s) in self.ell.iter().enumerate() {
            let mut binom = BigRational::from_integer(1.into());
            let mut apow = BigRational::from_integer(1.into());
            // j runs downward collecting a^(k-j)
            for j in (0..=k).rev() {
                // coefficient C(k, j) * a^(k-j)
                let c = &binom * &apow;
                out[j] = out[j].add(&s.scale_rat(&c));
                if j > 0 {
                    // update binom: C(k, j-1) = C(k,j) * j / (k-j+1)
                    binom = binom
                        * BigRational::from_integer((j as i64).into())
                        / BigRational::from_integer(((k - j + 1) as i64).into());
                    apow *= a;
                }
            }
        }
        LogSeries::new(out)
    }

    /// Wronskian u v' - u' v.
    pub fn wronskian(u: &LogSeries, v: &LogSeries) -> LogSeries {
        u.mul(&v.ddz()).sub(&u.ddz().mul(v))
    }

    /// 3x3 wronskian det(u, v, w; u', v', w'; u'', v'', w'').
    pub fn wronskian3(u: &LogSeries, v: &LogSeries, w: &LogSeries) -> LogSeries {
        let (u1, v1, w1) = (u.ddz(), v.ddz(), w.ddz());
        let (u2, v2, w2) = (u1.ddz(), v1.ddz(), w1.ddz());
        let m = |a: &LogSeries, b: &LogSeries, c: &LogSeries, d: &LogSeries| {
            a.mul(d).sub(&b.mul(c))
        };
        u.mul(&m(&v1, &w1, &v2, &w2))
            .sub(&v.mul(&m(&u1, &w1, &u2, &w2)))
            .add(&w.mul(&m(&u1, &v1, &u2, &v2)))
    }

    /// Check the series vanishes identically to its truncation order.
    pub fn assert_zero_to_truncation(&self) -> Result<()> {
        if self.is_zero() {
            Ok(())
        } else {
            Err(Error::Invalid(format!("expected zero series, got {self}")))
        }
    }
}

impl fmt::Display for LogSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, s) in self.ell.iter().enumerate() {
            if s.is_zero() && !(k == 0 && self.ell.len() == 1) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "{s}")?;
            } else {
                write!(f, "[{s}]*l^{k}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LogSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn theta_of_ell_is_eta() {
        let l = LogSeries::ell(8);
        let t = l.theta();
        assert!(t.is_ell_free());
        assert_eq!(t.ell_coeff(0), Series::monomial(Constant::p_pow(-1), 0, 8));
    }

    #[test]
    fn shift_ell_binomial() {
        // (l+1)^2 = l^2 + 2l + 1
        let l = LogSeries::ell(6);
        let l2 = l.mul(&l);
        let shifted = l2.shift_ell(&BigRational::one());
        let expect = l2.add(&l.scale_rat(&BigRational::from_integer(2.into())))
            .add(&LogSeries::one(6));
        assert_eq!(shifted, expect);
    }

    #[test]
    fn wronskian_of_one_and_ell() {
        // W(1, l) = l' = P^-1 / z
        let one = LogSeries::one(8);
        let l = LogSeries::ell(8);
        let w = LogSeries::wronskian(&one, &l);
        assert!(w.is_ell_free());
        assert_eq!(w.ell_coeff(0), Series::monomial(Constant::p_pow(-1), -1, 7));
    }
}
