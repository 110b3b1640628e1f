//! Linear differential operators in theta = z d/dz form.
//!
//! An operator is sum r_k(z) theta^k with polynomial coefficients over Q,
//! normalized so the coefficients are integral, primitive, share no z-power,
//! and the leading polynomial starts with a positive coefficient. Operator
//! composition respects theta * q(z) = q(z) * theta + theta(q).

use num::{BigInt, BigRational};
use num_traits::{One, Signed, Zero};

use crate::logseries::LogSeries;
use crate::poly::Poly;
use crate::ratfun::RatFun;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct ThetaOp {
    /// coeffs[k] = r_k(z); leading entry nonzero.
    coeffs: Vec<Poly>,
}

/// Local exponents at z = 0: rational roots of the indicial polynomial with
/// multiplicity, plus the degree of any unfactored (irrational) part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicialData {
    pub exponents: Vec<(BigRational, usize)>,
    pub irrational_residual: usize,
}

impl ThetaOp {
    pub fn new(coeffs: Vec<Poly>) -> Self {
        let mut op = ThetaOp { coeffs };
        op.trim();
        assert!(!op.coeffs.is_empty(), "zero operator");
        op.normalize();
        op
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |p| p.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn normalize(&mut self) {
        // Clear denominators.
        let mut l = BigInt::one();
        for p in &self.coeffs {
            l = num::Integer::lcm(&l, &p.denominator_lcm());
        }
        let lq = BigRational::from_integer(l);
        for p in self.coeffs.iter_mut() {
            *p = p.scale(&lq);
        }
        // Integer content.
        let mut g = BigInt::zero();
        for p in &self.coeffs {
            g = num::Integer::gcd(&g, &p.integer_content());
        }
        if !g.is_zero() && !g.is_one() {
            let gq = BigRational::new(BigInt::one(), g);
            for p in self.coeffs.iter_mut() {
                *p = p.scale(&gq);
            }
        }
        // Common z-power.
        let v = self
            .coeffs
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| p.low_degree())
            .min()
            .unwrap_or(0);
        if v > 0 {
            for p in self.coeffs.iter_mut() {
                if !p.is_zero() {
                    *p = Poly::new(p.coeffs()[v..].to_vec());
                }
            }
        }
        // Sign: leading polynomial starts positive.
        let lead = self.coeffs.last().unwrap();
        let first = lead.coeff(lead.low_degree());
        if first.is_negative() {
            for p in self.coeffs.iter_mut() {
                *p = p.neg();
            }
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Poly {
        self.coeffs.get(k).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    /// r_k / r_m as a rational function.
    pub fn monic_ratio(&self, k: usize) -> RatFun {
        RatFun::new(self.coeff(k), self.coeff(self.order()))
    }

    /// Apply the operator to a log-extended series.
    pub fn apply(&self, s: &LogSeries) -> LogSeries {
        let mut acc: Option<LogSeries> = None;
        let mut pow = s.clone();
        for (k, p) in self.coeffs.iter().enumerate() {
            if k > 0 {
                pow = pow.theta();
            }
            if p.is_zero() {
                continue;
            }
            let term = mul_logseries_poly(&pow, p);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc.unwrap_or_else(|| LogSeries::zero(s.truncation_order()))
    }

    /// Indicial polynomial sum r_k(0) x^k and its rational roots.
    pub fn local_exponents(&self) -> IndicialData {
        let ind = Poly::new(self.coeffs.iter().map(|p| p.eval_at_zero()).collect());
        let (mut exponents, irrational_residual) = ind.rational_roots();
        exponents.sort_by(|a, b| a.0.cmp(&b.0));
        IndicialData { exponents, irrational_residual }
    }

    /// Maximally unipotent at z = 0: indicial polynomial is c x^order.
    pub fn is_mum(&self) -> bool {
        let m = self.order();
        self.coeffs[..m].iter().all(|p| p.eval_at_zero().is_zero())
            && !self.coeffs[m].eval_at_zero().is_zero()
    }

    /// Conjugate so that solutions pick up a factor z^k: theta -> theta - k.
    pub fn gauge_transform(&self, k: i64) -> ThetaOp {
        self.gauge_rat(&BigRational::from_integer(k.into()))
    }

    /// Rational gauge; used internally where a z^s prefactor with rational s
    /// must be absorbed.
    pub fn gauge_rat(&self, k: &BigRational) -> ThetaOp {
        let m = self.order();
        let mut out = vec![Poly::zero(); m + 1];
        // (theta - k)^j = sum_i C(j,i) (-k)^(j-i) theta^i
        let neg_k = -k.clone();
        for (j, r) in self.coeffs.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            let mut binom = BigRational::one();
            let mut kpow = BigRational::one();
            // i from j downward; coefficient C(j,i) * (-k)^(j-i)
            let mut per_i = vec![BigRational::zero(); j + 1];
            for i in (0..=j).rev() {
                per_i[i] = &binom * &kpow;
                if i > 0 {
                    binom = binom * BigRational::from_integer((i as i64).into())
                        / BigRational::from_integer(((j - i + 1) as i64).into());
                    kpow *= &neg_k;
                }
            }
            for (i, c) in per_i.iter().enumerate() {
                if !c.is_zero() {
                    out[i] = out[i].add(&r.scale(c));
                }
            }
        }
        ThetaOp::new(out)
    }

    /// Coefficients of the d/dz form: sum c_i(z) (d/dz)^i with
    /// c_i = z^i sum_k S(k,i) r_k for i >= 1 and c_0 = r_0.
    pub fn to_ddz_coeffs(&self) -> Vec<Poly> {
        let m = self.order();
        let s2 = stirling2_table(m);
        let mut out = vec![Poly::zero(); m + 1];
        out[0] = self.coeff(0);
        for i in 1..=m {
            let mut acc = Poly::zero();
            for k in i..=m {
                let c = &s2[k][i];
                if !c.is_zero() {
                    acc = acc.add(&self.coeff(k).scale(c));
                }
            }
            out[i] = acc.mul_zpow(i);
        }
        out
    }

    /// Minimal operator annihilating all wronskians W(u, v) of pairs of
    /// solutions. Order 5 (degenerate symplectic case) or 6 for order-4
    /// input; accepts order-5 input as well (needed for the double
    /// antisymmetric square identity).
    pub fn exterior_square(&self) -> Result<ThetaOp> {
        let m = self.order();
        if !(2..=5).contains(&m) {
            return Err(Error::Invalid(format!(
                "exterior square implemented for orders 2..=5, got {m}"
            )));
        }
        let (ann, order) = minimal_annihilator(self, SquareKind::Exterior)?;
        if m == 4 && order < 5 {
            return Err(Error::DegenerateCase(order));
        }
        // ann annihilates z*W; shift to W.
        Ok(ann.gauge_transform(-1))
    }

    /// Minimal operator annihilating all products u*v of solutions.
    pub fn symmetric_square(&self) -> Result<ThetaOp> {
        let m = self.order();
        if !(1..=5).contains(&m) {
            return Err(Error::Invalid(format!(
                "symmetric square implemented for orders 1..=5, got {m}"
            )));
        }
        let (ann, _) = minimal_annihilator(self, SquareKind::Symmetric)?;
        Ok(ann)
    }
}

fn mul_logseries_poly(s: &LogSeries, p: &Poly) -> LogSeries {
    let mut acc: Option<LogSeries> = None;
    for (i, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let term = s.mul_zpow(i as i64).scale_rat(c);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    acc.unwrap_or_else(|| LogSeries::zero(s.truncation_order()))
}

fn stirling2_table(n: usize) -> Vec<Vec<BigRational>> {
    let mut t = vec![vec![BigRational::zero(); n + 1]; n + 1];
    t[0][0] = BigRational::one();
    for r in 1..=n {
        for c in 1..=r {
            let v = &t[r - 1][c - 1]
                + &t[r - 1][c] * BigRational::from_integer((c as i64).into());
            t[r][c] = v;
        }
    }
    t
}

// ---------------------------------------------------------------------------
// Exterior / symmetric squares via exact linear algebra over Q(z)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum SquareKind {
    Exterior,
    Symmetric,
}

struct SquareModule {
    m: usize,
    kind: SquareKind,
    /// theta f_i as an m-vector over Q(z).
    theta_rows: Vec<Vec<RatFun>>,
    /// basis index pairs.
    pairs: Vec<(usize, usize)>,
}

impl SquareModule {
    fn new(op: &ThetaOp, kind: SquareKind) -> Self {
        let m = op.order();
        let mut theta_rows = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = vec![RatFun::zero(); m];
            if i + 1 < m {
                row[i + 1] = RatFun::one();
            } else {
                for (j, item) in row.iter_mut().enumerate() {
                    *item = op.monic_ratio(j).neg();
                }
            }
            theta_rows.push(row);
        }
        let mut pairs = Vec::new();
        for i in 0..m {
            for j in i..m {
                match kind {
                    SquareKind::Exterior if i < j => pairs.push((i, j)),
                    SquareKind::Symmetric => pairs.push((i, j)),
                    _ => {}
                }
            }
        }
        SquareModule { m, kind, theta_rows, pairs }
    }

    fn dim(&self) -> usize {
        self.pairs.len()
    }

    fn index(&self, i: usize, j: usize) -> usize {
        self.pairs.iter().position(|&p| p == (i, j)).unwrap()
    }

    fn accumulate(&self, out: &mut [RatFun], a: usize, b: usize, val: &RatFun) {
        match self.kind {
            SquareKind::Exterior => {
                if a == b {
                    return;
                }
                if a < b {
                    let k = self.index(a, b);
                    out[k] = out[k].add(val);
                } else {
                    let k = self.index(b, a);
                    out[k] = out[k].sub(val);
                }
            }
            SquareKind::Symmetric => {
                let k = self.index(a.min(b), a.max(b));
                out[k] = out[k].add(val);
            }
        }
    }

    fn theta(&self, v: &[RatFun]) -> Vec<RatFun> {
        let mut out = vec![RatFun::zero(); self.dim()];
        for (idx, &(i, j)) in self.pairs.iter().enumerate() {
            let c = &v[idx];
            if c.is_zero() {
                continue;
            }
            // derivative of the coefficient
            out[idx] = out[idx].add(&c.theta());
            // theta f_i wedge f_j
            for (a, t) in self.theta_rows[i].iter().enumerate() {
                if !t.is_zero() {
                    self.accumulate(&mut out, a, j, &c.mul(t));
                }
            }
            // f_i wedge theta f_j
            for (b, t) in self.theta_rows[j].iter().enumerate() {
                if !t.is_zero() {
                    self.accumulate(&mut out, i, b, &c.mul(t));
                }
            }
        }
        out
    }

    fn cyclic_vector(&self) -> Vec<RatFun> {
        let mut v = vec![RatFun::zero(); self.dim()];
        let idx = match self.kind {
            SquareKind::Exterior => self.index(0, 1.min(self.m - 1)),
            SquareKind::Symmetric => self.index(0, 0),
        };
        v[idx] = RatFun::one();
        v
    }
}

/// Minimal monic annihilator of the cyclic vector (f0 wedge f1 resp. f0*f0).
/// Returns the normalized operator and its order.
fn minimal_annihilator(op: &ThetaOp, kind: SquareKind) -> Result<(ThetaOp, usize)> {
    let module = SquareModule::new(op, kind);
    let dim = module.dim();
    let mut vs: Vec<Vec<RatFun>> = vec![module.cyclic_vector()];
    for _ in 0..=dim {
        let next = module.theta(vs.last().unwrap());
        if let Some(c) = express_in_span(&vs, &next) {
            let order = vs.len();
            // theta^order - sum c_j theta^j
            let mut rat_coeffs: Vec<RatFun> = c.into_iter().map(|x| x.neg()).collect();
            rat_coeffs.push(RatFun::one());
            return Ok((ratfun_op(rat_coeffs), order));
        }
        vs.push(next);
    }
    Err(Error::Invalid(
        "no linear dependence found in square module (internal error)".into(),
    ))
}

/// Solve sum_j c_j vs[j] = target over Q(z); None if target is independent.
fn express_in_span(vs: &[Vec<RatFun>], target: &[RatFun]) -> Option<Vec<RatFun>> {
    let rows = target.len();
    let cols = vs.len();
    // Augmented matrix [vs^T | target], eliminate.
    let mut m: Vec<Vec<RatFun>> = (0..rows)
        .map(|r| {
            let mut row: Vec<RatFun> = (0..cols).map(|c| vs[c][r].clone()).collect();
            row.push(target[r].clone());
            row
        })
        .collect();
    let mut piv_rows = Vec::new();
    let mut r0 = 0;
    for c in 0..cols {
        let piv = (r0..rows).find(|&r| !m[r][c].is_zero());
        let piv = match piv {
            Some(p) => p,
            None => continue,
        };
        m.swap(r0, piv);
        let inv = m[r0][c].recip().ok()?;
        for x in m[r0].iter_mut() {
            *x = x.mul(&inv);
        }
        for r in 0..rows {
            if r != r0 && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in 0..=cols {
                    let t = m[r0][j].mul(&f);
                    m[r][j] = m[r][j].sub(&t);
                }
            }
        }
        piv_rows.push((r0, c));
        r0 += 1;
        if r0 == rows {
            break;
        }
    }
    // Consistency: all-zero rows must have zero rhs.
    for row in m.iter().take(rows).skip(r0) {
        if !row[cols].is_zero() {
            return None;
        }
    }
    let mut out = vec![RatFun::zero(); cols];
    for &(r, c) in &piv_rows {
        out[c] = m[r][cols].clone();
    }
    Some(out)
}

/// Clear denominators of a theta-polynomial with Q(z) coefficients and
/// normalize the result.
pub fn op_from_ratfuns(coeffs: Vec<RatFun>) -> ThetaOp {
    ratfun_op(coeffs)
}

/// Clear denominators of a theta-polynomial with Q(z) coefficients.
fn ratfun_op(coeffs: Vec<RatFun>) -> ThetaOp {
    let mut den = Poly::one();
    for c in &coeffs {
        let g = den.gcd(&c.den);
        den = den.mul(&c.den.div_rem(&g).0);
    }
    let polys: Vec<Poly> = coeffs
        .iter()
        .map(|c| {
            let (q, r) = den.div_rem(&c.den);
            debug_assert!(r.is_zero());
            c.num.mul(&q)
        })
        .collect();
    ThetaOp::new(polys)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Z,
    Theta,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().unwrap();
                toks.push((Tok::Num(n), start));
            }
            _ if b.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                match &text[start..i] {
                    "z" => toks.push((Tok::Z, start)),
                    "theta" => toks.push((Tok::Theta, start)),
                    other => {
                        return Err(Error::Syntax {
                            pos: start,
                            msg: format!("unknown identifier '{other}'"),
                        })
                    }
                }
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character '{}'", b as char),
                })
            }
        }
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> usize {
        self.toks.last().map(|&(_, p)| p + 1).unwrap_or(0)
    }
}

/// Raw (un-normalized) operator used during parsing.
#[derive(Clone)]
struct Raw(Vec<Poly>);

impl Raw {
    fn zero() -> Self {
        Raw(vec![])
    }

    fn constant(q: BigRational) -> Self {
        Raw(vec![Poly::constant(q)])
    }

    fn z() -> Self {
        Raw(vec![Poly::zpow(1)])
    }

    fn theta() -> Self {
        Raw(vec![Poly::zero(), Poly::one()])
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|p| p.is_zero())
    }

    /// Constant operator (degree 0, order 0)?
    fn as_rational(&self) -> Option<BigRational> {
        if self.0.len() > 1 && self.0[1..].iter().any(|p| !p.is_zero()) {
            return None;
        }
        let p = self.0.first().cloned().unwrap_or_else(Poly::zero);
        if p.degree() > 0 {
            return None;
        }
        Some(p.coeff(0))
    }

    fn add(&self, rhs: &Raw) -> Raw {
        let n = self.0.len().max(rhs.0.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.0.get(k).cloned().unwrap_or_else(Poly::zero);
            let b = rhs.0.get(k).cloned().unwrap_or_else(Poly::zero);
            out.push(a.add(&b));
        }
        Raw(out)
    }

    fn neg(&self) -> Raw {
        Raw(self.0.iter().map(|p| p.neg()).collect())
    }

    fn sub(&self, rhs: &Raw) -> Raw {
        self.add(&rhs.neg())
    }

    /// theta composed with self: theta*(sum q_k theta^k)
    /// = sum (theta q_k) theta^k + q_k theta^(k+1).
    fn theta_compose(&self) -> Raw {
        let mut out = vec![Poly::zero(); self.0.len() + 1];
        for (k, q) in self.0.iter().enumerate() {
            out[k] = out[k].add(&q.theta());
            out[k + 1] = out[k + 1].add(q);
        }
        Raw(out)
    }

    fn mul(&self, rhs: &Raw) -> Raw {
        let mut acc = Raw::zero();
        let mut t = rhs.clone(); // theta^j applied to rhs
        for (j, p) in self.0.iter().enumerate() {
            if j > 0 {
                t = t.theta_compose();
            }
            if p.is_zero() {
                continue;
            }
            let term = Raw(t.0.iter().map(|q| q.mul(p)).collect());
            acc = acc.add(&term);
        }
        acc
    }

    fn pow(&self, e: usize) -> Raw {
        let mut out = Raw::constant(BigRational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }
}

/// Parse an operator expression over integers, z, theta, + - * / ^ ( ).
/// Division is only defined by rational constants.
pub fn parse_operator(text: &str) -> Result<ThetaOp> {
    let mut lx = lex(text)?;
    let raw = parse_expr(&mut lx)?;
    if let Some((_, p)) = lx.peek() {
        return Err(Error::Syntax { pos: *p, msg: "trailing input".into() });
    }
    if raw.is_zero() {
        return Err(Error::Invalid("expression is the zero operator".into()));
    }
    Ok(ThetaOp::new(raw.0))
}

fn parse_expr(lx: &mut Lexer) -> Result<Raw> {
    let mut acc = parse_term(lx)?;
    while let Some((t, _)) = lx.peek() {
        match t {
            Tok::Plus => {
                lx.next();
                let rhs = parse_term(lx)?;
                acc = acc.add(&rhs);
            }
            Tok::Minus => {
                lx.next();
                let rhs = parse_term(lx)?;
                acc = acc.sub(&rhs);
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn parse_term(lx: &mut Lexer) -> Result<Raw> {
    let mut acc = parse_unary(lx)?;
    while let Some((t, pos)) = lx.peek().cloned() {
        match t {
            Tok::Star => {
                lx.next();
                let rhs = parse_unary(lx)?;
                acc = acc.mul(&rhs);
            }
            Tok::Slash => {
                lx.next();
                let rhs = parse_unary(lx)?;
                match rhs.as_rational() {
                    Some(q) if !q.is_zero() => {
                        acc = acc.mul(&Raw::constant(q.recip()));
                    }
                    Some(_) => {
                        return Err(Error::Syntax { pos, msg: "division by zero".into() })
                    }
                    None => {
                        return Err(Error::NonPolynomialCoefficient(
                            "division by a non-constant expression".into(),
                        ))
                    }
                }
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn parse_unary(lx: &mut Lexer) -> Result<Raw> {
    match lx.peek() {
        Some((Tok::Minus, _)) => {
            lx.next();
            Ok(parse_unary(lx)?.neg())
        }
        Some((Tok::Plus, _)) => {
            lx.next();
            parse_unary(lx)
        }
        _ => parse_power(lx),
    }
}

fn parse_power(lx: &mut Lexer) -> Result<Raw> {
    let base = parse_atom(lx)?;
    if let Some((Tok::Caret, _)) = lx.peek() {
        lx.next();
        match lx.next() {
            Some((Tok::Num(n), _)) => {
                let e: usize = n
                    .try_into()
                    .map_err(|_| Error::Invalid("exponent too large".into()))?;
                Ok(base.pow(e))
            }
            Some((_, p)) => Err(Error::Syntax {
                pos: p,
                msg: "exponent must be a nonnegative integer literal".into(),
            }),
            None => Err(Error::Syntax {
                pos: lx.end_pos(),
                msg: "missing exponent".into(),
            }),
        }
    } else {
        Ok(base)
    }
}

fn parse_atom(lx: &mut Lexer) -> Result<Raw> {
    match lx.next() {
        Some((Tok::Num(n), _)) => Ok(Raw::constant(BigRational::from_integer(n))),
        Some((Tok::Z, _)) => Ok(Raw::z()),
        Some((Tok::Theta, _)) => Ok(Raw::theta()),
        Some((Tok::LParen, open)) => {
            let inner = parse_expr(lx)?;
            match lx.next() {
                Some((Tok::RParen, _)) => Ok(inner),
                _ => Err(Error::Syntax { pos: open, msg: "unclosed parenthesis".into() }),
            }
        }
        Some((t, p)) => Err(Error::Syntax { pos: p, msg: format!("unexpected token {t:?}") }),
        None => Err(Error::Syntax { pos: lx.end_pos(), msg: "unexpected end of input".into() }),
    }
}

impl std::fmt::Display for ThetaOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for k in (0..=self.order()).rev() {
            let p = &self.coeffs[k];
            if p.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let is_one = *p == Poly::one();
            match (k, is_one) {
                (0, _) => write!(f, "({p})")?,
                (1, true) => write!(f, "theta")?,
                (1, false) => write!(f, "({p})*theta")?,
                (_, true) => write!(f, "theta^{k}")?,
                (_, false) => write!(f, "({p})*theta^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for ThetaOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constant::Constant;
    use crate::logseries::LogSeries;
    use crate::series::Series;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Independent expansion oracle for (a_1 theta + b_1)...(a_n theta + b_n):
    /// plain commutative convolution, valid because the linear factors have
    /// constant coefficients.
    fn convolve_linear_factors(factors: &[(i64, i64)]) -> Vec<BigRational> {
        let mut acc = vec![BigRational::one()];
        for &(a, b) in factors {
            let mut next = vec![BigRational::zero(); acc.len() + 1];
            for (i, c) in acc.iter().enumerate() {
                next[i] += c * q(b, 1);
                next[i + 1] += c * q(a, 1);
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn parse_quintic_matches_convolution_oracle() {
        let op = parse_operator(
            "theta^4 - 5*z*(5*theta+1)*(5*theta+2)*(5*theta+3)*(5*theta+4)",
        )
        .unwrap();
        assert_eq!(op.order(), 4);
        let f = convolve_linear_factors(&[(5, 1), (5, 2), (5, 3), (5, 4)]);
        // r_k = [k == 4] - 5 z f_k
        for k in 0..=4 {
            let mut expect = Poly::new(vec![BigRational::zero(), -q(5, 1) * &f[k]]);
            if k == 4 {
                expect = expect.add(&Poly::one());
            }
            assert_eq!(op.coeff(k), expect, "theta^{k} coefficient");
        }
        assert_eq!(op.coeff(4), Poly::from_i64(&[1, -3125]));
    }

    #[test]
    fn parse_ex3_hypergeometric() {
        let op = parse_operator("theta^5 - 32*z*(2*theta+1)^5").unwrap();
        assert_eq!(op.order(), 5);
        let f = convolve_linear_factors(&[(2, 1); 5]);
        for k in 0..=5 {
            let mut expect = Poly::new(vec![BigRational::zero(), -q(32, 1) * &f[k]]);
            if k == 5 {
                expect = expect.add(&Poly::one());
            }
            assert_eq!(op.coeff(k), expect);
        }
        assert_eq!(op.coeff(5), Poly::from_i64(&[1, -1024]));
    }

    #[test]
    fn parse_plain_theta() {
        let op = parse_operator("theta").unwrap();
        assert_eq!(op.order(), 1);
        assert_eq!(op.coeff(0), Poly::zero());
        assert_eq!(op.coeff(1), Poly::one());
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_operator("theta^4 - 5*w") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_operator("theta/z"),
            Err(Error::NonPolynomialCoefficient(_))
        ));
    }

    #[test]
    fn noncommutativity_theta_z() {
        // theta*z = z*(theta+1)
        let a = parse_operator("theta*z").unwrap();
        let b = parse_operator("z*(theta+1)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn print_parse_roundtrip() {
        for text in [
            "theta^4 - 5*z*(5*theta+1)*(5*theta+2)*(5*theta+3)*(5*theta+4)",
            "theta^2*(theta-1/3)*(theta+1/3) - z*(theta+1/2)^2*(theta+5/6)*(theta+7/6)",
            "theta^5 - 32*z*(2*theta+1)^5",
            "theta - 1",
        ] {
            let op = parse_operator(text).unwrap();
            let reparsed = parse_operator(&op.to_string()).unwrap();
            assert_eq!(op, reparsed, "roundtrip of {text}");
        }
    }

    #[test]
    fn apply_theta_to_powers_and_ell() {
        let op = parse_operator("theta").unwrap();
        for k in [-2i64, 0, 3] {
            let s = LogSeries::from_series(Series::monomial(Constant::one(), k, 10));
            let out = op.apply(&s);
            let expect = LogSeries::from_series(Series::monomial(
                Constant::from_i64(k),
                k,
                10,
            ));
            assert_eq!(out, expect, "theta z^{k}");
        }
        let l = LogSeries::ell(10);
        let out = op.apply(&l);
        assert!(out.is_ell_free());
        assert_eq!(out.ell_coeff(0), Series::monomial(Constant::p_pow(-1), 0, 10));
    }

    #[test]
    fn local_exponents_quintic_and_r3prime() {
        let quintic = parse_operator(
            "theta^4 - 5*z*(5*theta+1)*(5*theta+2)*(5*theta+3)*(5*theta+4)",
        )
        .unwrap();
        let ind = quintic.local_exponents();
        assert_eq!(ind.exponents, vec![(q(0, 1), 4)]);
        assert_eq!(ind.irrational_residual, 0);
        assert!(quintic.is_mum());

        let r3p = parse_operator(
            "theta^2*(theta-1/3)*(theta+1/3) - z*(theta+1/2)^2*(theta+5/6)*(theta+7/6)",
        )
        .unwrap();
        let ind = r3p.local_exponents();
        assert_eq!(
            ind.exponents,
            vec![(q(-1, 3), 1), (q(0, 1), 2), (q(1, 3), 1)]
        );
        assert!(!r3p.is_mum());

        let ex3 = parse_operator("theta^5 - 32*z*(2*theta+1)^5").unwrap();
        assert_eq!(ex3.local_exponents().exponents, vec![(q(0, 1), 5)]);
        assert!(ex3.is_mum());

        assert!(!parse_operator("theta - 1").unwrap().is_mum());
    }

    #[test]
    fn gauge_roundtrip_and_examples() {
        let theta = parse_operator("theta").unwrap();
        assert_eq!(theta.gauge_transform(1), parse_operator("theta - 1").unwrap());
        let quintic = parse_operator(
            "theta^4 - 5*z*(5*theta+1)*(5*theta+2)*(5*theta+3)*(5*theta+4)",
        )
        .unwrap();
        assert_eq!(quintic.gauge_transform(0), quintic);
        assert_eq!(quintic.gauge_transform(3).gauge_transform(-3), quintic);
    }

    #[test]
    fn exterior_square_of_pure_theta4() {
        // Solutions of theta^4 are l-polynomials of degree <= 3; their
        // wronskians span z^-1 * (l-polynomials of degree <= 4), annihilated
        // by (theta+1)^5. Brute-force check below confirms annihilation.
        let t4 = parse_operator("theta^4").unwrap();
        let ext = t4.exterior_square().unwrap();
        assert_eq!(ext, parse_operator("(theta+1)^5").unwrap());

        // Brute force: the six wronskians of {1, l, l^2/2, l^3/6}.
        let basis: Vec<LogSeries> = (0..4usize)
            .map(|j| {
                let mut fac = BigRational::one();
                for i in 1..=j {
                    fac = fac * q(i as i64, 1);
                }
                LogSeries::monomial(Constant::from_rational(fac.recip()), 0, j, 8)
            })
            .collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let w = LogSeries::wronskian(&basis[i], &basis[j]);
                assert!(ext.apply(&w).is_zero(), "W(u{i},u{j}) not annihilated");
            }
        }
    }

    #[test]
    fn exterior_square_r3prime_has_order_6() {
        let r3p = parse_operator(
            "theta^2*(theta-1/3)*(theta+1/3) - z*(theta+1/2)^2*(theta+5/6)*(theta+7/6)",
        )
        .unwrap();
        let ext = r3p.exterior_square().unwrap();
        assert_eq!(ext.order(), 6);
    }

    #[test]
    fn symmetric_square_of_theta2() {
        let t2 = parse_operator("theta^2").unwrap();
        let sym = t2.symmetric_square().unwrap();
        assert_eq!(sym, parse_operator("theta^3").unwrap());
    }

    #[test]
    fn ddz_conversion_matches_on_theta4() {
        // theta^4 = z^4 D^4 + 6 z^3 D^3 + 7 z^2 D^2 + z D
        let t4 = parse_operator("theta^4").unwrap();
        let c = t4.to_ddz_coeffs();
        assert_eq!(c[0], Poly::zero());
        assert_eq!(c[1], Poly::from_i64(&[0, 1]));
        assert_eq!(c[2], Poly::from_i64(&[0, 0, 7]));
        assert_eq!(c[3], Poly::from_i64(&[0, 0, 0, 6]));
        assert_eq!(c[4], Poly::from_i64(&[0, 0, 0, 0, 1]));
    }
}
