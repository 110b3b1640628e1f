//! Frobenius solutions at a maximally unipotent point and exact basis
//! changes; Taylor bases at ordinary points.

use num::BigRational;
use num_traits::{One, Zero};

use crate::constant::Constant;
use crate::diffop::ThetaOp;
use crate::logseries::LogSeries;
use crate::series::Series;
use crate::{Error, Result};

/// An ordered list of solutions of one operator.
#[derive(Clone)]
pub struct SolutionBasis {
    pub op: ThetaOp,
    solutions: Vec<LogSeries>,
    pub label: String,
}

impl SolutionBasis {
    pub fn new(op: ThetaOp, solutions: Vec<LogSeries>, label: impl Into<String>) -> Self {
        SolutionBasis { op, solutions, label: label.into() }
    }

    pub fn solutions(&self) -> &[LogSeries] {
        &self.solutions
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn solution(&self, j: usize) -> &LogSeries {
        &self.solutions[j]
    }
}

/// Truncated polynomial in rho (jet mod rho^len); used to differentiate the
/// Frobenius recurrence with respect to the local exponent.
#[derive(Clone, Debug, PartialEq)]
struct Jet(Vec<BigRational>);

impl Jet {
    fn zero(len: usize) -> Self {
        Jet(vec![BigRational::zero(); len])
    }

    fn constant(q: BigRational, len: usize) -> Self {
        let mut v = vec![BigRational::zero(); len];
        v[0] = q;
        Jet(v)
    }

    /// n + rho.
    fn linear(n: i64, len: usize) -> Self {
        let mut v = vec![BigRational::zero(); len];
        v[0] = BigRational::from_integer(n.into());
        if len > 1 {
            v[1] = BigRational::one();
        }
        Jet(v)
    }

    fn mul(&self, rhs: &Jet) -> Jet {
        let len = self.0.len();
        let mut out = vec![BigRational::zero(); len];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        Jet(out)
    }

    fn add_assign_scaled(&mut self, rhs: &Jet, c: &BigRational) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b * c;
        }
    }

    /// Inverse of a jet with nonzero constant term.
    fn inv(&self) -> Jet {
        let len = self.0.len();
        let c0 = self.0[0].recip();
        let mut out = vec![BigRational::zero(); len];
        out[0] = c0.clone();
        for n in 1..len {
            let mut acc = BigRational::zero();
            for k in 1..=n {
                acc += &self.0[k] * &out[n - k];
            }
            out[n] = -acc * &c0;
        }
        Jet(out)
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }
}

/// Normalized Frobenius basis at the MUM point z = 0, to series order `n`:
/// y_j = sum_{k<=j} g_k(z) P^-k l^(j-k)/(j-k)! with g_0 in 1 + z Q[[z]] and
/// g_k(0) = 0 for k >= 1. Solutions are ordered by ascending l-degree.
pub fn frobenius_basis(op: &ThetaOp, n: i64) -> Result<SolutionBasis> {
    if !op.is_mum() {
        return Err(Error::NotMUM);
    }
    let m = op.order();
    let n = n.max(1);
    let max_d = op
        .coeffs()
        .iter()
        .map(|p| p.degree().max(0) as usize)
        .max()
        .unwrap();
    // a_0 = 1; P_0(mm+rho) a_mm = -sum_{d>=1} P_d(mm-d+rho) a_{mm-d},
    // where P_d(x) = sum_k r_{k,d} x^k and P_0(x) = r_m(0) x^m (MUM).
    let mut a: Vec<Jet> = Vec::with_capacity(n as usize);
    a.push(Jet::constant(BigRational::one(), m));
    for mm in 1..n {
        let mut rhs = Jet::zero(m);
        for d in 1..=max_d.min(mm as usize) {
            let prev = &a[(mm - d as i64) as usize];
            if prev.is_zero() {
                continue;
            }
            let x = Jet::linear(mm - d as i64, m);
            let mut xpow = Jet::constant(BigRational::one(), m);
            let mut pd = Jet::zero(m);
            for k in 0..=op.order() {
                let c = op.coeff(k).coeff(d);
                if !c.is_zero() {
                    pd.add_assign_scaled(&xpow, &c);
                }
                if k < op.order() {
                    xpow = xpow.mul(&x);
                }
            }
            let term = pd.mul(prev);
            rhs.add_assign_scaled(&term, &BigRational::from_integer((-1i64).into()));
        }
        let rm0 = op.coeff(m).coeff(0);
        let mut p0 = Jet::constant(rm0, m);
        let x = Jet::linear(mm, m);
        for _ in 0..m {
            p0 = p0.mul(&x);
        }
        a.push(rhs.mul(&p0.inv()));
    }
    // g_k(z) = sum_mm [rho^k] a_mm z^mm.
    let mut g: Vec<Series> = Vec::with_capacity(m);
    for k in 0..m {
        let coeffs: Vec<BigRational> = a.iter().map(|j| j.0[k].clone()).collect();
        g.push(Series::from_rationals(0, &coeffs, n));
    }
    // y_j = sum_{k=0..j} g_k P^-k l^(j-k) / (j-k)!
    let mut sols = Vec::with_capacity(m);
    for j in 0..m {
        let mut ell = vec![Series::zero(n); j + 1];
        let mut fact = BigRational::one();
        for (l, item) in ell.iter_mut().enumerate() {
            if l > 0 {
                fact = fact * BigRational::from_integer((l as i64).into());
            }
            let k = j - l;
            *item = g[k]
                .scale(&Constant::p_pow(-(k as i32)))
                .scale_rat(&fact.recip());
        }
        sols.push(LogSeries::new(ell));
    }
    Ok(SolutionBasis::new(op.clone(), sols, "frobenius"))
}

/// New basis with rows new_i = sum_j m[i][j] old_j; the matrix must be
/// invertible over the constants ring.
pub fn change_basis(basis: &SolutionBasis, m: &[Vec<Constant>]) -> Result<SolutionBasis> {
    let n = basis.len();
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::Invalid(format!("basis change must be {n}x{n}")));
    }
    if det_constant(m).inverse().is_err() {
        return Err(Error::SingularMatrix);
    }
    let trunc = basis.solutions()[0].truncation_order();
    let mut sols = Vec::with_capacity(n);
    for row in m {
        let mut acc = LogSeries::zero(trunc);
        for (j, c) in row.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&basis.solution(j).scale(c));
            }
        }
        sols.push(acc);
    }
    Ok(SolutionBasis::new(basis.op.clone(), sols, format!("{}*M", basis.label)))
}

/// Determinant over the constants ring by Leibniz expansion (sizes <= 5).
pub fn det_constant(m: &[Vec<Constant>]) -> Constant {
    let n = m.len();
    let mut det = Constant::zero();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |p, sign| {
        let mut prod = Constant::one();
        for (i, &j) in p.iter().enumerate() {
            prod = &prod * &m[i][j];
            if prod.is_zero() {
                break;
            }
        }
        if sign < 0 {
            prod = -&prod;
        }
        det += &prod;
    });
    det
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], i32)) {
    let n = p.len();
    if k == n {
        let mut inv = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if p[i] > p[j] {
                    inv += 1;
                }
            }
        }
        f(p, if inv % 2 == 0 { 1 } else { -1 });
        return;
    }
    for i in k..n {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Exact Taylor basis at an ordinary rational point c: solutions expanded in
/// the shifted variable w = z - c with initial conditions t_k = e_j. Used for
/// wronskian-relation checks away from the singular locus and as an oracle
/// for numeric continuation.
pub fn taylor_basis_at(op: &ThetaOp, c: &BigRational, n: i64) -> Result<Vec<Series>> {
    let m = op.order();
    let ddz = op.to_ddz_coeffs();
    let shifted: Vec<crate::poly::Poly> = ddz.iter().map(|p| p.shift(c)).collect();
    let lead0 = shifted[m].coeff(0);
    if lead0.is_zero() {
        return Err(Error::Invalid(format!("z = {c} is a singular point")));
    }
    let len = (n.max(m as i64)) as usize;
    let mut basis = Vec::with_capacity(m);
    for j in 0..m {
        let mut t: Vec<BigRational> = vec![BigRational::zero(); len];
        t[j] = BigRational::one();
        // Coefficient of w^M: sum_{i,d} p_{i,d} [M-d+i]_i t_{M-d+i} = 0;
        // the (i=m, d=0) term carries the top unknown t_{M+m}.
        for big_m in 0..(len as i64 - m as i64) {
            let mut acc = BigRational::zero();
            for (i, p) in shifted.iter().enumerate() {
                for (d, pc) in p.coeffs().iter().enumerate() {
                    if (i == m && d == 0) || pc.is_zero() {
                        continue;
                    }
                    let idx = big_m - d as i64 + i as i64;
                    if idx < 0 || idx >= len as i64 {
                        continue;
                    }
                    if t[idx as usize].is_zero() {
                        continue;
                    }
                    acc += pc * falling(idx, i) * &t[idx as usize];
                }
            }
            let denom = &lead0 * falling(big_m + m as i64, m);
            t[(big_m + m as i64) as usize] = -acc / denom;
        }
        t.truncate(n as usize);
        basis.push(Series::from_rationals(0, &t, n));
    }
    Ok(basis)
}

fn falling(n: i64, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k as i64 {
        acc *= BigRational::from_integer((n - i).into());
    }
    acc
}
