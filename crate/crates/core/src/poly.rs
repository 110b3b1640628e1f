//! Dense univariate polynomials over Q.

use std::fmt;

use num::{BigInt, BigRational};
use num_traits::{One, Signed, Zero};

/// Coefficients in ascending degree; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    c: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: vec![] }
    }

    pub fn one() -> Self {
        Poly { c: vec![BigRational::one()] }
    }

    pub fn constant(q: BigRational) -> Self {
        Poly::new(vec![q])
    }

    pub fn from_i64(cs: &[i64]) -> Self {
        Poly::new(cs.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    /// z^k.
    pub fn zpow(k: usize) -> Self {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = BigRational::one();
        Poly { c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.c.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    /// Lowest nonzero degree (0 for the zero polynomial).
    pub fn low_degree(&self) -> usize {
        self.c.iter().position(|x| !x.is_zero()).unwrap_or(0)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_at_zero(&self) -> BigRational {
        self.coeff(0)
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let mut c = vec![BigRational::zero(); n];
        for (i, item) in c.iter_mut().enumerate() {
            if i < self.c.len() {
                *item += &self.c[i];
            }
            if i < rhs.c.len() {
                *item += &rhs.c[i];
            }
        }
        Poly::new(c)
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|x| -x.clone()).collect() }
    }

    pub fn scale(&self, q: &BigRational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|x| x * q).collect() }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn mul_zpow(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, rhs: &Poly) -> (Poly, Poly) {
        assert!(!rhs.is_zero(), "division by zero polynomial");
        let mut rem = self.c.clone();
        let dd = rhs.c.len() - 1;
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quo = vec![BigRational::zero(); rem.len() - dd];
        let lead_inv = rhs.leading().recip();
        for i in (dd..rem.len()).rev() {
            let q = &rem[i] * &lead_inv;
            if q.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                let idx = i - dd + j;
                let t = &q * b;
                rem[idx] -= t;
            }
            quo[i - dd] = q;
        }
        (Poly::new(quo), Poly::new(rem))
    }

    /// Monic gcd.
    pub fn gcd(&self, rhs: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            // Strip rational content each round to keep numbers small.
            let lead = b.leading();
            b = b.scale(&lead.recip());
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&lead.recip())
    }

    /// d/dz.
    pub fn derivative(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, x)| x * BigRational::from_integer(((i + 1) as i64).into()))
                .collect(),
        )
    }

    /// theta = z d/dz.
    pub fn theta(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .map(|(i, x)| x * BigRational::from_integer((i as i64).into()))
                .collect(),
        )
    }

    /// Taylor shift: p(z + a) for rational a.
    pub fn shift(&self, a: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for c in self.c.iter().rev() {
            // out = out * (z + a) + c
            out = out.mul_zpow(1).add(&out.scale(a)).add(&Poly::constant(c.clone()));
        }
        out
    }

    /// Clear denominators: returns (integer-coefficient polynomial, lcm) with
    /// self * lcm having integer coefficients.
    pub fn denominator_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for c in &self.c {
            l = num::Integer::lcm(&l, c.denom());
        }
        l
    }

    /// Integer content of an integer-coefficient polynomial given as Q-poly.
    pub fn integer_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.c {
            debug_assert!(c.denom().is_one());
            g = num::Integer::gcd(&g, c.numer());
        }
        g
    }

    /// Rational roots with multiplicity, plus the non-linear残 part degree.
    /// Uses the rational root theorem on the primitive integer form.
    pub fn rational_roots(&self) -> (Vec<(BigRational, usize)>, usize) {
        let mut p = self.clone();
        let mut roots = Vec::new();
        if p.is_zero() {
            return (roots, 0);
        }
        // Factor out z^k first.
        let low = p.low_degree();
        if low > 0 {
            roots.push((BigRational::zero(), low));
            p = Poly::new(p.c[low..].to_vec());
        }
        'outer: while p.degree() >= 1 {
            let l = p.denominator_lcm();
            let ip = p.scale(&BigRational::from_integer(l));
            let content = ip.integer_content();
            let ip = if content.is_zero() || content.is_one() {
                ip
            } else {
                ip.scale(&BigRational::new(BigInt::one(), content))
            };
            let a0 = ip.c[0].numer().clone();
            let an = ip.leading().numer().clone();
            debug_assert!(!a0.is_zero());
            for pnum in divisors(&a0.abs()) {
                for pden in divisors(&an.abs()) {
                    for sign in [1i64, -1] {
                        let cand = BigRational::new(
                            &pnum * BigInt::from(sign),
                            pden.clone(),
                        );
                        if p.eval(&cand).is_zero() {
                            let mut mult = 0;
                            loop {
                                let lin = Poly::new(vec![-cand.clone(), BigRational::one()]);
                                let (q, r) = p.div_rem(&lin);
                                if r.is_zero() {
                                    p = q;
                                    mult += 1;
                                } else {
                                    break;
                                }
                            }
                            roots.push((cand, mult));
                            continue 'outer;
                        }
                    }
                }
            }
            break;
        }
        let residual = p.degree().max(0) as usize;
        (roots, residual)
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    // Small search: trial division up to 10^4 plus the cofactor chain; the
    // indicial polynomials in scope have tiny coefficients.
    let mut out = vec![BigInt::one()];
    let mut m = n.clone();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut d = BigInt::from(2);
    while &d * &d <= m && d < BigInt::from(100000) {
        let mut e = 0;
        while (&m % &d).is_zero() {
            m /= &d;
            e += 1;
        }
        if e > 0 {
            primes.push((d.clone(), e));
        }
        d += 1;
    }
    if m > BigInt::one() {
        primes.push((m, 1));
    }
    for (p, e) in primes {
        let mut next = Vec::new();
        for x in &out {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(x * &pk);
                pk *= &p;
            }
        }
        out = next;
    }
    out.sort();
    out.dedup();
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*z")?,
                _ => write!(f, "{c}*z^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
