//! Truncated Laurent series in z with coefficients in the constants ring.
//!
//! A series stores a coefficient window [valuation, truncation_order): the
//! coefficient of z^k is known exactly for k < truncation_order and zero for
//! k < valuation. Binary operations propagate the tightest truncation that
//! is actually justified (min of the operands' orders, shifted for products).

use std::fmt;
use std::ops::Mul;

use num::BigRational;
use num_traits::Zero;

use crate::constant::Constant;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    /// Exponent of the first stored coefficient.
    val: i64,
    /// Coefficient of z^(val + i) at index i; len = trunc - val.
    coeffs: Vec<Constant>,
    /// Exclusive upper degree: coefficients of z^k for k >= trunc are unknown.
    trunc: i64,
}

impl Series {
    pub fn new(val: i64, coeffs: Vec<Constant>, trunc: i64) -> Self {
        assert_eq!(coeffs.len() as i64, trunc - val, "window size mismatch");
        let mut s = Series { val, coeffs, trunc };
        s.normalize();
        s
    }

    /// Zero series known to order `trunc`.
    pub fn zero(trunc: i64) -> Self {
        Series { val: trunc, coeffs: vec![], trunc }
    }

    pub fn one(trunc: i64) -> Self {
        Series::monomial(Constant::one(), 0, trunc)
    }

    /// c * z^k.
    pub fn monomial(c: Constant, k: i64, trunc: i64) -> Self {
        if k >= trunc || c.is_zero() {
            return Series::zero(trunc);
        }
        let mut coeffs = vec![Constant::zero(); (trunc - k) as usize];
        coeffs[0] = c;
        Series { val: k, coeffs, trunc }
    }

    /// Series with rational coefficients c_i z^(val+i).
    pub fn from_rationals(val: i64, cs: &[BigRational], trunc: i64) -> Self {
        let mut coeffs: Vec<Constant> =
            cs.iter().map(|q| Constant::from_rational(q.clone())).collect();
        coeffs.resize((trunc - val).max(0) as usize, Constant::zero());
        Series::new(val, coeffs, trunc)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.val += lead as i64;
        }
    }

    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn truncation_order(&self) -> i64 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficient of z^k; zero outside the stored window. Callers must not
    /// ask beyond the truncation order.
    pub fn coeff(&self, k: i64) -> Constant {
        debug_assert!(k < self.trunc, "coefficient beyond truncation order");
        if k < self.val || k >= self.trunc {
            return Constant::zero();
        }
        self.coeffs[(k - self.val) as usize].clone()
    }

    pub fn coeff_ref(&self, k: i64) -> Option<&Constant> {
        if k < self.val || k >= self.trunc {
            None
        } else {
            Some(&self.coeffs[(k - self.val) as usize])
        }
    }

    /// Leading (lowest-degree) nonzero coefficient with its exponent.
    pub fn leading(&self) -> Option<(i64, &Constant)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.val + i as i64, c))
    }

    pub fn truncate_to(&self, trunc: i64) -> Series {
        if trunc >= self.trunc {
            return self.clone();
        }
        let keep = ((trunc - self.val).max(0)) as usize;
        Series {
            val: self.val.min(trunc),
            coeffs: self.coeffs[..keep.min(self.coeffs.len())].to_vec(),
            trunc,
        }
    }

    pub fn add(&self, rhs: &Series) -> Series {
        let trunc = self.trunc.min(rhs.trunc);
        let val = self.val.min(rhs.val).min(trunc);
        let mut coeffs = vec![Constant::zero(); (trunc - val) as usize];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let k = val + i as i64;
            if let Some(a) = self.coeff_ref(k) {
                *c += a;
            }
            if let Some(b) = rhs.coeff_ref(k) {
                *c += b;
            }
        }
        Series::new(val, coeffs, trunc)
    }

    pub fn sub(&self, rhs: &Series) -> Series {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Series {
        Series {
            val: self.val,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, c: &Constant) -> Series {
        if c.is_zero() {
            return Series::zero(self.trunc);
        }
        Series::new(
            self.val,
            self.coeffs.iter().map(|a| a * c).collect(),
            self.trunc,
        )
    }

    pub fn scale_rat(&self, q: &BigRational) -> Series {
        self.scale(&Constant::from_rational(q.clone()))
    }

    pub fn mul_zpow(&self, k: i64) -> Series {
        Series {
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    pub fn mul(&self, rhs: &Series) -> Series {
        if self.is_zero() || rhs.is_zero() {
            // Product window: everything below min(va+Tb, vb+Ta) is zero.
            return Series::zero(
                (self.val + rhs.trunc).min(rhs.val + self.trunc),
            );
        }
        let trunc = (self.val + rhs.trunc).min(rhs.val + self.trunc);
        let val = self.val + rhs.val;
        let mut coeffs = vec![Constant::zero(); (trunc - val).max(0) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ka = self.val + i as i64;
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let k = ka + rhs.val + j as i64;
                if k >= trunc {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                coeffs[(k - val) as usize] += &(a * b);
            }
        }
        Series::new(val, coeffs, trunc)
    }

    /// z d/dz.
    pub fn theta(&self) -> Series {
        Series::new(
            self.val,
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c.scale(&BigRational::from_integer((self.val + i as i64).into())))
                .collect(),
            self.trunc,
        )
    }

    /// d/dz.
    pub fn ddz(&self) -> Series {
        self.theta().mul_zpow(-1)
    }

    /// Termwise antiderivative with zero constant term; the integrand must
    /// have no z^-1 coefficient.
    pub fn integrate(&self) -> Result<Series> {
        if let Some(c) = self.coeff_ref(-1) {
            if !c.is_zero() {
                return Err(Error::Invalid(
                    "integrand has a z^-1 term; logarithm would appear".into(),
                ));
            }
        }
        let val = self.val;
        let trunc = self.trunc + 1;
        let mut coeffs = vec![Constant::zero(); (trunc - (val + 1)).max(0) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = val + i as i64;
            if k == -1 {
                continue;
            }
            let e = k + 1;
            coeffs[(e - (val + 1)) as usize] =
                c.scale(&BigRational::new(1.into(), e.into()));
        }
        Ok(Series::new(val + 1, coeffs, trunc))
    }

    /// Multiplicative inverse. The result satisfies
    /// self * result = 1 + O(z^(trunc - 2*valuation)).
    pub fn reciprocal(&self) -> Result<Series> {
        let (v, lead) = self.leading().ok_or(Error::ZeroLeadingCoefficient)?;
        let lead_inv = lead.inverse()?;
        // Unit part u with u_0 = 1: self = lead * z^v * u.
        let n_terms = (self.trunc - v) as usize;
        let mut u = vec![Constant::zero(); n_terms];
        for (i, item) in u.iter_mut().enumerate() {
            *item = &self.coeff(v + i as i64) * &lead_inv;
        }
        // w = u^-1 by the standard recurrence.
        let mut w = vec![Constant::zero(); n_terms];
        w[0] = Constant::one();
        for n in 1..n_terms {
            let mut acc = Constant::zero();
            for k in 1..=n {
                acc += &(&u[k] * &w[n - k]);
            }
            w[n] = -&acc;
        }
        let coeffs: Vec<Constant> = w.iter().map(|c| c * &lead_inv).collect();
        Ok(Series::new(-v, coeffs, self.trunc - 2 * v))
    }

    /// Square root with result^2 = self to truncation; requires even
    /// valuation and a leading coefficient that is a rational square times an
    /// even power of P. `sign` selects the branch.
    pub fn sqrt(&self, sign: i32) -> Result<Series> {
        let (v, lead) = self.leading().ok_or(Error::ZeroLeadingCoefficient)?;
        if v % 2 != 0 {
            return Err(Error::OddValuation(v));
        }
        let r0 = lead.sqrt_monomial(sign)?;
        let two_r0_inv = r0.scale(&BigRational::from_integer(2.into())).inverse()?;
        let n_terms = (self.trunc - v) as usize;
        let mut r = vec![Constant::zero(); n_terms];
        r[0] = r0;
        for n in 1..n_terms {
            // s_n = sum_{k=0..n} r_k r_{n-k}  =>  r_n = (s_n - sum_{0<k<n}) / (2 r_0)
            let mut acc = self.coeff(v + n as i64);
            for k in 1..n {
                acc = &acc - &(&r[k] * &r[n - k]);
            }
            r[n] = &acc * &two_r0_inv;
        }
        Ok(Series::new(v / 2, r, self.trunc - v / 2))
    }

    /// exp of a series with strictly positive valuation.
    pub fn exp(&self) -> Result<Series> {
        if let Some((v, _)) = self.leading() {
            if v <= 0 {
                return Err(Error::Invalid(format!(
                    "exp needs positive valuation, got {v}"
                )));
            }
        }
        let trunc = self.trunc;
        if trunc <= 0 {
            return Ok(Series::zero(trunc));
        }
        let n_terms = trunc as usize;
        let mut g = vec![Constant::zero(); n_terms];
        g[0] = Constant::one();
        // g' = f' g  =>  n g_n = sum_{k>=1} k f_k g_{n-k}
        for n in 1..n_terms {
            let mut acc = Constant::zero();
            for k in 1..=n {
                let fk = self.coeff(k as i64);
                if fk.is_zero() {
                    continue;
                }
                acc += &fk
                    .scale(&BigRational::from_integer((k as i64).into()))
                    .mul(&g[n - k]);
            }
            g[n] = acc.scale(&BigRational::new(1.into(), (n as i64).into()));
        }
        Ok(Series::new(0, g, trunc))
    }

    /// All coefficients plain rationals?
    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_rational())
    }

    /// Extract rational coefficients over the window [from, to).
    pub fn rational_coeffs(&self, from: i64, to: i64) -> Result<Vec<BigRational>> {
        let mut out = Vec::with_capacity((to - from).max(0) as usize);
        for k in from..to {
            if k >= self.trunc {
                return Err(Error::Invalid(format!(
                    "coefficient z^{k} beyond truncation {}",
                    self.trunc
                )));
            }
            out.push(match self.coeff_ref(k) {
                Some(c) => c.to_rational()?,
                None => BigRational::zero(),
            });
        }
        Ok(out)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.val + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if k != 0 {
                write!(f, "*z^{k}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.trunc)
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
