//! Fixed-point arbitrary-precision real and complex arithmetic.
//!
//! A value is mant * 2^-prec with a BigInt mantissa; all operands of a
//! binary operation must carry the same precision (mixing is a bug in the
//! caller and debug-asserted, then resolved by lifting to the max). The
//! rounding model is floor-of-shift, which keeps every operation within one
//! ulp; computations that need clean tails run with guard bits.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use num::{BigInt, BigRational};
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct HpReal {
    mant: BigInt,
    prec: u32,
}

impl HpReal {
    pub fn zero(prec: u32) -> Self {
        HpReal { mant: BigInt::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        HpReal { mant: BigInt::one() << prec, prec }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        HpReal { mant: BigInt::from(n) << prec, prec }
    }

    pub fn from_mant(mant: BigInt, prec: u32) -> Self {
        HpReal { mant, prec }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let num = q.numer() << prec;
        HpReal { mant: num / q.denom(), prec }
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        // Exact binary expansion of the double.
        let r = BigRational::from_float(x).expect("finite float");
        HpReal::from_rational(&r, prec)
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn to_precision(&self, prec: u32) -> HpReal {
        if prec >= self.prec {
            HpReal { mant: &self.mant << (prec - self.prec), prec }
        } else {
            HpReal { mant: &self.mant >> (self.prec - prec), prec }
        }
    }

    fn align(&self, rhs: &HpReal) -> (HpReal, HpReal) {
        debug_assert_eq!(self.prec, rhs.prec, "mixed precisions");
        let p = self.prec.max(rhs.prec);
        (self.to_precision(p), rhs.to_precision(p))
    }

    pub fn add(&self, rhs: &HpReal) -> HpReal {
        let (a, b) = self.align(rhs);
        HpReal { mant: a.mant + b.mant, prec: a.prec }
    }

    pub fn sub(&self, rhs: &HpReal) -> HpReal {
        let (a, b) = self.align(rhs);
        HpReal { mant: a.mant - b.mant, prec: a.prec }
    }

    pub fn neg(&self) -> HpReal {
        HpReal { mant: -self.mant.clone(), prec: self.prec }
    }

    pub fn abs(&self) -> HpReal {
        HpReal { mant: self.mant.abs(), prec: self.prec }
    }

    pub fn mul(&self, rhs: &HpReal) -> HpReal {
        let (a, b) = self.align(rhs);
        HpReal { mant: (a.mant * b.mant) >> a.prec, prec: a.prec }
    }

    pub fn mul_i64(&self, n: i64) -> HpReal {
        HpReal { mant: &self.mant * BigInt::from(n), prec: self.prec }
    }

    pub fn div(&self, rhs: &HpReal) -> HpReal {
        let (a, b) = self.align(rhs);
        assert!(!b.mant.is_zero(), "division by zero");
        HpReal { mant: (a.mant << a.prec) / b.mant, prec: a.prec }
    }

    pub fn div_i64(&self, n: i64) -> HpReal {
        HpReal { mant: &self.mant / BigInt::from(n), prec: self.prec }
    }

    pub fn shl(&self, k: u32) -> HpReal {
        HpReal { mant: &self.mant << k, prec: self.prec }
    }

    pub fn shr(&self, k: u32) -> HpReal {
        HpReal { mant: &self.mant >> k, prec: self.prec }
    }

    pub fn cmp_abs(&self, rhs: &HpReal) -> std::cmp::Ordering {
        let (a, b) = self.align(rhs);
        a.mant.abs().cmp(&b.mant.abs())
    }

    pub fn lt(&self, rhs: &HpReal) -> bool {
        let (a, b) = self.align(rhs);
        a.mant < b.mant
    }

    /// 2^-k at this precision.
    pub fn epsilon(k: u32, prec: u32) -> HpReal {
        if k > prec {
            return HpReal::zero(prec);
        }
        HpReal { mant: BigInt::one() << (prec - k), prec }
    }

    /// Magnitude estimate: floor(log2 |x|), or None for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.mant.is_zero() {
            return None;
        }
        Some(self.mant.bits() as i64 - 1 - self.prec as i64)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        // Keep ~60 bits to stay in range.
        let shift = (bits - 60).max(0);
        let top = (&self.mant >> shift as u64).to_f64().unwrap_or(0.0);
        top * 2f64.powi((shift - self.prec as i64) as i32)
    }

    pub fn sqrt(&self) -> HpReal {
        assert!(!self.mant.is_negative(), "sqrt of negative number");
        let big = self.mant.to_biguint().unwrap() << self.prec;
        HpReal { mant: BigInt::from(big.sqrt()), prec: self.prec }
    }

    /// Natural logarithm for strictly positive values.
    pub fn ln(&self) -> HpReal {
        assert!(self.mant.is_positive(), "ln of non-positive number");
        let prec = self.prec;
        let guard = prec + 32;
        let x = self.to_precision(guard);
        // Normalize to m in [1, 2): x = m * 2^e.
        let e = x.log2_floor().unwrap();
        let m = if e >= 0 { x.shr(e as u32) } else { x.shl((-e) as u32) };
        // ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3].
        let t = m.sub(&HpReal::one(guard)).div(&m.add(&HpReal::one(guard)));
        let t2 = t.mul(&t);
        let mut term = t.clone();
        let mut acc = HpReal::zero(guard);
        let mut k: i64 = 0;
        loop {
            let contrib = term.div_i64(2 * k + 1);
            if contrib.mant.is_zero() {
                break;
            }
            acc = acc.add(&contrib);
            term = term.mul(&t2);
            k += 1;
            if k > 4 * guard as i64 {
                break;
            }
        }
        let ln_m = acc.shl(1);
        let result = ln_m.add(&ln2(guard).mul_i64(e));
        result.to_precision(prec)
    }

    /// arctangent, any argument.
    pub fn atan(&self) -> HpReal {
        let prec = self.prec;
        let guard = prec + 32;
        let x = self.to_precision(guard);
        if x.mant.is_negative() {
            return x.neg().atan().neg().to_precision(prec);
        }
        // For x > 1 use atan(x) = pi/2 - atan(1/x).
        if x.mant > (BigInt::one() << guard) {
            let inv = HpReal::one(guard).div(&x);
            return pi(guard)
                .shr(1)
                .sub(&inv.atan())
                .to_precision(prec);
        }
        // Halve until small: atan(x) = 2 atan(x / (1 + sqrt(1 + x^2))).
        let mut halvings = 0u32;
        let mut t = x;
        let small = HpReal::epsilon(6, guard);
        while small.cmp_abs(&t) == std::cmp::Ordering::Less {
            let s = HpReal::one(guard).add(&t.mul(&t)).sqrt();
            t = t.div(&HpReal::one(guard).add(&s));
            halvings += 1;
        }
        let t2 = t.mul(&t);
        let mut term = t.clone();
        let mut acc = HpReal::zero(guard);
        let mut k: i64 = 0;
        loop {
            let contrib = term.div_i64(2 * k + 1);
            if contrib.mant.is_zero() {
                break;
            }
            if k % 2 == 0 {
                acc = acc.add(&contrib);
            } else {
                acc = acc.sub(&contrib);
            }
            term = term.mul(&t2);
            k += 1;
            if k > 4 * guard as i64 {
                break;
            }
        }
        acc.shl(halvings).to_precision(prec)
    }

    /// Decimal rendering with the given number of fractional digits.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = (&self.mant * &scale) >> self.prec;
        let neg = scaled.is_negative();
        let s = scaled.abs().to_string();
        let s = if s.len() <= digits as usize {
            format!("0.{}{}", "0".repeat(digits as usize - s.len()), s)
        } else {
            let split = s.len() - digits as usize;
            format!("{}.{}", &s[..split], &s[split..])
        };
        if neg {
            format!("-{s}")
        } else {
            s
        }
    }

    /// Best rational approximation with denominator at most `max_den`,
    /// via continued fractions.
    pub fn rationalize(&self, max_den: u64) -> BigRational {
        let den = BigInt::one() << self.prec;
        let mut p_prev = BigInt::zero();
        let mut p = BigInt::one();
        let mut q_prev = BigInt::one();
        let mut q = BigInt::zero();
        let mut a = self.mant.clone();
        let mut b = den;
        // Continued fraction of a/b.
        loop {
            if b.is_zero() {
                break;
            }
            let (quo, rem) = num::Integer::div_mod_floor(&a, &b);
            let p_next = &quo * &p + &p_prev;
            let q_next = &quo * &q + &q_prev;
            if q_next > BigInt::from(max_den) {
                break;
            }
            p_prev = p;
            q_prev = q;
            p = p_next;
            q = q_next;
            a = b;
            b = rem;
        }
        if q.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(p, q)
    }
}

impl std::fmt::Debug for HpReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}", self.to_f64(), self.prec)
    }
}

// ---------------------------------------------------------------------------
// Cached constants
// ---------------------------------------------------------------------------

fn cache() -> &'static Mutex<HashMap<(&'static str, u32), HpReal>> {
    static CACHE: OnceLock<Mutex<HashMap<(&'static str, u32), HpReal>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: &'static str, prec: u32, compute: impl FnOnce(u32) -> HpReal) -> HpReal {
    if let Some(v) = cache().lock().unwrap().get(&(key, prec)) {
        return v.clone();
    }
    let v = compute(prec);
    cache().lock().unwrap().insert((key, prec), v.clone());
    v
}

/// Integer-series arctangent of 1/m at scale 2^prec.
fn atan_recip(m: u64, prec: u32) -> HpReal {
    let m2 = BigInt::from(m) * BigInt::from(m);
    let mut term = (BigInt::one() << prec) / BigInt::from(m);
    let mut acc = BigInt::zero();
    let mut k: i64 = 0;
    while !term.is_zero() {
        let contrib = &term / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            acc += contrib;
        } else {
            acc -= contrib;
        }
        term /= &m2;
        k += 1;
    }
    HpReal::from_mant(acc, prec)
}

/// pi by Machin's formula 16 atan(1/5) - 4 atan(1/239).
pub fn pi(prec: u32) -> HpReal {
    cached("pi", prec, |prec| {
        let guard = prec + 32;
        let a = atan_recip(5, guard).mul_i64(16);
        let b = atan_recip(239, guard).mul_i64(4);
        a.sub(&b).to_precision(prec)
    })
}

/// ln 2 = 2 atanh(1/3).
pub fn ln2(prec: u32) -> HpReal {
    cached("ln2", prec, |prec| {
        let guard = prec + 32;
        let nine = BigInt::from(9);
        let mut term = (BigInt::one() << guard) / BigInt::from(3);
        let mut acc = BigInt::zero();
        let mut k: i64 = 0;
        while !term.is_zero() {
            acc += &term / BigInt::from(2 * k + 1);
            term /= &nine;
            k += 1;
        }
        HpReal::from_mant(acc << 1, guard).to_precision(prec)
    })
}

/// zeta(3) by the central-binomial series
/// zeta(3) = (5/2) sum_{n>=1} (-1)^(n-1) / (n^3 C(2n,n)).
pub fn zeta3(prec: u32) -> HpReal {
    cached("zeta3", prec, |prec| {
        let guard = prec + 32;
        let mut acc = HpReal::zero(guard);
        // term_n = (-1)^(n-1) / (n^3 C(2n,n)); exact rational recurrence:
        // t_{n+1} = -t_n * n^3 / ((n+1)^2 * 2 (2n+1))
        let mut num = BigInt::one();
        let mut den = BigInt::from(2); // n = 1: 1/(1 * C(2,1)) = 1/2
        let mut n: i64 = 1;
        loop {
            let term = HpReal::from_mant((&num << guard) / &den, guard);
            if term.mant.is_zero() {
                break;
            }
            acc = acc.add(&term);
            num *= BigInt::from(n * n * n);
            den *= BigInt::from((n + 1) * (n + 1) * 2 * (2 * n + 1));
            if n % 2 == 1 {
                num = -num;
            } else {
                num = -num;
            }
            let g = num::Integer::gcd(&num, &den);
            if !g.is_one() {
                num /= &g;
                den /= &g;
            }
            n += 1;
            if n > 8 * guard as i64 {
                break;
            }
        }
        acc.mul_i64(5).shr(1).to_precision(prec)
    })
}

/// sqrt of a small integer at the given precision.
pub fn sqrt_i64(n: i64, prec: u32) -> HpReal {
    HpReal::from_i64(n, prec).sqrt()
}

// ---------------------------------------------------------------------------
// Complex numbers
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq)]
pub struct HpComplex {
    pub re: HpReal,
    pub im: HpReal,
}

/// Branch selection for the complex logarithm: `Principal` takes
/// Im(log) in (-pi, pi], `Upper` forces Im(log) = +pi on the negative real
/// axis (where the two agree; they differ only for points approached from
/// below, which do not arise for on-axis input).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LogBranch {
    Principal,
    Upper,
}

impl HpComplex {
    pub fn new(re: HpReal, im: HpReal) -> Self {
        debug_assert_eq!(re.precision_bits(), im.precision_bits());
        HpComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        HpComplex::new(HpReal::zero(prec), HpReal::zero(prec))
    }

    pub fn one(prec: u32) -> Self {
        HpComplex::new(HpReal::one(prec), HpReal::zero(prec))
    }

    pub fn from_i64(re: i64, im: i64, prec: u32) -> Self {
        HpComplex::new(HpReal::from_i64(re, prec), HpReal::from_i64(im, prec))
    }

    pub fn from_real(re: HpReal) -> Self {
        let prec = re.precision_bits();
        HpComplex::new(re, HpReal::zero(prec))
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        HpComplex::from_real(HpReal::from_rational(q, prec))
    }

    pub fn precision_bits(&self) -> u32 {
        self.re.precision_bits()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_precision(&self, prec: u32) -> HpComplex {
        HpComplex::new(self.re.to_precision(prec), self.im.to_precision(prec))
    }

    pub fn add(&self, rhs: &HpComplex) -> HpComplex {
        HpComplex::new(self.re.add(&rhs.re), self.im.add(&rhs.im))
    }

    pub fn sub(&self, rhs: &HpComplex) -> HpComplex {
        HpComplex::new(self.re.sub(&rhs.re), self.im.sub(&rhs.im))
    }

    pub fn neg(&self) -> HpComplex {
        HpComplex::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, rhs: &HpComplex) -> HpComplex {
        HpComplex::new(
            self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        )
    }

    pub fn mul_real(&self, rhs: &HpReal) -> HpComplex {
        HpComplex::new(self.re.mul(rhs), self.im.mul(rhs))
    }

    pub fn mul_i64(&self, n: i64) -> HpComplex {
        HpComplex::new(self.re.mul_i64(n), self.im.mul_i64(n))
    }

    pub fn conj(&self) -> HpComplex {
        HpComplex::new(self.re.clone(), self.im.neg())
    }

    pub fn abs2(&self) -> HpReal {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> HpReal {
        self.abs2().sqrt()
    }

    pub fn div(&self, rhs: &HpComplex) -> HpComplex {
        let d = rhs.abs2();
        assert!(!d.is_zero(), "complex division by zero");
        let num = self.mul(&rhs.conj());
        HpComplex::new(num.re.div(&d), num.im.div(&d))
    }

    pub fn recip(&self) -> HpComplex {
        HpComplex::one(self.precision_bits()).div(self)
    }

    /// Integer power by repeated multiplication (small exponents).
    pub fn powi(&self, k: u32) -> HpComplex {
        let mut acc = HpComplex::one(self.precision_bits());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Complex logarithm: ln|z| + i arg(z) under the chosen branch.
    pub fn ln(&self, branch: LogBranch) -> HpComplex {
        assert!(!self.is_zero(), "log of zero");
        let r = self.abs2();
        let half_ln_r2 = r.ln().shr(1);
        let arg = self.arg(branch);
        HpComplex::new(half_ln_r2, arg)
    }

    /// Argument under the chosen branch.
    pub fn arg(&self, branch: LogBranch) -> HpReal {
        let prec = self.precision_bits();
        let pi_v = pi(prec);
        if self.im.is_zero() {
            if self.re.is_negative() {
                // Both branches use +pi on the negative real axis.
                let _ = branch;
                return pi_v;
            }
            return HpReal::zero(prec);
        }
        if self.re.is_zero() {
            return if self.im.is_negative() {
                pi_v.shr(1).neg()
            } else {
                pi_v.shr(1)
            };
        }
        let base = self.im.abs().div(&self.re.abs()).atan();
        match (self.re.is_negative(), self.im.is_negative()) {
            (false, false) => base,
            (false, true) => base.neg(),
            (true, false) => pi_v.sub(&base),
            (true, true) => base.sub(&pi_v),
        }
    }
}

impl std::fmt::Debug for HpComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?} + {:?} i)", self.re, self.im)
    }
}

/// x = 10 zeta(3) / (2 pi i)^3 = (5 zeta(3) / (4 pi^3)) i, the constant in
/// which the reference monodromy entries live.
pub fn x_constant(prec: u32) -> HpComplex {
    let p = pi(prec);
    let p3 = p.mul(&p).mul(&p);
    let im = zeta3(prec).mul_i64(5).div(&p3.mul_i64(4));
    HpComplex::new(HpReal::zero(prec), im)
}

/// Numeric value of the symbol P = 2 pi i.
pub fn p_constant(prec: u32) -> HpComplex {
    HpComplex::new(HpReal::zero(prec), pi(prec).shl(1))
}

/// Numeric value of Xi = zeta(3)/(2 pi i)^3 = zeta(3) i / (8 pi^3).
pub fn xi_constant(prec: u32) -> HpComplex {
    let p = pi(prec);
    let p3 = p.mul(&p).mul(&p);
    HpComplex::new(HpReal::zero(prec), zeta3(prec).div(&p3.shl(3)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits() {
        let p = pi(200);
        assert_eq!(
            p.to_decimal_string(50),
            "3.14159265358979323846264338327950288419716939937510"
        );
        // Independent cross-check: pi/4 = atan(1/2) + atan(1/3).
        let guard = 200;
        let alt = atan_recip(2, guard).add(&atan_recip(3, guard)).mul_i64(4);
        let diff = p.sub(&alt).abs();
        assert!(diff.lt(&HpReal::epsilon(190, 200)));
    }

    #[test]
    fn ln2_digits() {
        assert_eq!(
            ln2(200).to_decimal_string(50),
            "0.69314718055994530941723212145817656807550013436025"
        );
        // ln(4) = 2 ln 2 through the general ln path.
        let four = HpReal::from_i64(4, 200);
        let diff = four.ln().sub(&ln2(200).shl(1)).abs();
        assert!(diff.lt(&HpReal::epsilon(190, 200)));
    }

    #[test]
    fn zeta3_digits() {
        assert_eq!(
            zeta3(200).to_decimal_string(50),
            "1.20205690315959428539973816151144999076498629234049"
        );
    }

    #[test]
    fn sqrt_and_atan() {
        let two = HpReal::from_i64(2, 128);
        let r = two.sqrt();
        let diff = r.mul(&r).sub(&two).abs();
        assert!(diff.lt(&HpReal::epsilon(120, 128)));
        // atan(1) = pi/4.
        let one = HpReal::one(160);
        let diff = one.atan().sub(&pi(160).shr(2)).abs();
        assert!(diff.lt(&HpReal::epsilon(150, 160)));
    }

    #[test]
    fn complex_log_branches() {
        // log(-1) = i pi on both branches.
        let prec = 128;
        let minus1 = HpComplex::from_i64(-1, 0, prec);
        for b in [LogBranch::Principal, LogBranch::Upper] {
            let l = minus1.ln(b);
            assert!(l.re.abs().lt(&HpReal::epsilon(120, prec)));
            assert!(l.im.sub(&pi(prec)).abs().lt(&HpReal::epsilon(120, prec)));
        }
        // log(2i): re = ln 2, im = pi/2.
        let z = HpComplex::from_i64(0, 2, prec);
        let l = z.ln(LogBranch::Principal);
        assert!(l.re.sub(&ln2(prec)).abs().lt(&HpReal::epsilon(120, prec)));
        assert!(l.im.sub(&pi(prec).shr(1)).abs().lt(&HpReal::epsilon(120, prec)));
    }

    #[test]
    fn rationalize_continued_fraction() {
        let prec = 128;
        let q = BigRational::new(355.into(), 113.into());
        let x = HpReal::from_rational(&q, prec);
        assert_eq!(x.rationalize(1000), q);
        // pi is close to 355/113 but not rational: with small denominator
        // cap we recover the convergent.
        assert_eq!(pi(prec).rationalize(150), BigRational::new(355.into(), 113.into()));
    }
}
