//! Wronskians, the tau-matrix, mirror map, Yukawa coupling, the invariants
//! p1, p2, p3, and the order-5 / order-4 operators they determine.
//!
//! Two pipelines share this machinery. For an order-4 operator with a
//! symplectic solution basis (w02 + w13 = 0) the tau's are wronskian ratios;
//! for an order-5 operator the tau's are solution ratios w_j/w_0 directly.
//! The printed reference data use slightly different normalizations in the
//! two cases (the tau-coordinate scale and the sign of t); the constructors
//! bake those in, and the p-invariants are insensitive to either choice.

use std::collections::BTreeMap;

use num::BigRational;
use num_traits::{One, Zero};

use crate::constant::Constant;
use crate::diffop::ThetaOp;
use crate::frobenius::{frobenius_basis, SolutionBasis};
use crate::logseries::LogSeries;
use crate::ratfun::{rational_reconstruct, RatFun};
use crate::series::Series;
use crate::{Error, Result};

/// Pairwise wronskians w_jl = C W(u_j, u_l) of a solution basis.
pub struct WronskianSet {
    pub c: Constant,
    pub size: usize,
    w: BTreeMap<(usize, usize), LogSeries>,
}

impl WronskianSet {
    pub fn get(&self, j: usize, l: usize) -> LogSeries {
        assert!(j != l, "w_jj = 0");
        if j < l {
            self.w[&(j, l)].clone()
        } else {
            self.w[&(l, j)].neg()
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(usize, usize), &LogSeries)> {
        self.w.iter()
    }

    /// The cyclic quadratic relation w01 w23 + w02 w31 + w03 w12, which is
    /// tautologically zero for wronskians of any four functions.
    pub fn quadratic_residual(&self) -> LogSeries {
        self.get(0, 1)
            .mul(&self.get(2, 3))
            .add(&self.get(0, 2).mul(&self.get(3, 1)))
            .add(&self.get(0, 3).mul(&self.get(1, 2)))
    }
}

/// All pairwise wronskians, scaled by the normalization constant `c`
/// (default P = 2 pi i; pass `None` for that default).
pub fn wronskians(basis: &SolutionBasis, c: Option<Constant>) -> WronskianSet {
    let c = c.unwrap_or_else(|| Constant::p_pow(1));
    let n = basis.len();
    let mut w = BTreeMap::new();
    for j in 0..n {
        for l in (j + 1)..n {
            let wjl = LogSeries::wronskian(basis.solution(j), basis.solution(l)).scale(&c);
            w.insert((j, l), wjl);
        }
    }
    WronskianSet { c, size: n, w }
}

/// Exact kernel of the span of the given series, as rational coefficient
/// vectors: each result v satisfies sum_i v_i s_i = 0 to truncation.
pub fn find_linear_relations(series: &[LogSeries]) -> Vec<Vec<BigRational>> {
    let n = series.len();
    if n == 0 {
        return vec![];
    }
    let trunc = series.iter().map(|s| s.truncation_order()).min().unwrap();
    let val = series.iter().map(|s| s.valuation()).min().unwrap();
    let maxell = series.iter().map(|s| s.ell_degree()).max().unwrap();
    // Row-reduce the transposed system: pivots over the coefficient slots.
    let mut pivot_rows: Vec<(Vec<BigRational>, usize)> = Vec::new();
    for k in 0..=maxell {
        for e in val..trunc {
            // Collect all constants-ring monomial keys appearing in slot (k, e).
            let mut keys = std::collections::BTreeSet::new();
            for s in series {
                if k <= s.ell_degree() {
                    if let Some(c) = s.ell_coeff(k).coeff_ref(e) {
                        for (key, _) in c.terms() {
                            keys.insert(*key);
                        }
                    }
                }
            }
            for key in keys {
                let mut row: Vec<BigRational> = series
                    .iter()
                    .map(|s| {
                        if k <= s.ell_degree() {
                            s.ell_coeff(k)
                                .coeff_ref(e)
                                .map(|c| c.coeff(key))
                                .unwrap_or_else(BigRational::zero)
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect();
                for (prow, pcol) in &pivot_rows {
                    if !row[*pcol].is_zero() {
                        let f = row[*pcol].clone();
                        for (a, b) in row.iter_mut().zip(prow) {
                            *a -= &f * b;
                        }
                    }
                }
                if let Some(pcol) = row.iter().position(|x| !x.is_zero()) {
                    let inv = row[pcol].recip();
                    for x in row.iter_mut() {
                        *x *= &inv;
                    }
                    pivot_rows.push((row, pcol));
                    if pivot_rows.len() == n {
                        return vec![];
                    }
                }
            }
        }
    }
    // Back-substitute to reduced echelon form.
    let rows = pivot_rows.clone();
    let mut reduced: Vec<(Vec<BigRational>, usize)> = Vec::new();
    for (row, pcol) in rows.into_iter().rev() {
        let mut r = row;
        for (prow, ppcol) in &reduced {
            if !r[*ppcol].is_zero() {
                let f = r[*ppcol].clone();
                for (a, b) in r.iter_mut().zip(prow) {
                    *a -= &f * b;
                }
            }
        }
        reduced.push((r, pcol));
    }
    let pivot_cols: Vec<usize> = reduced.iter().map(|&(_, c)| c).collect();
    let mut kernel = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); n];
        v[free] = BigRational::one();
        for (row, pcol) in &reduced {
            v[*pcol] = -row[free].clone();
        }
        kernel.push(v);
    }
    kernel
}

/// Kernel of the wronskian span, over the standard pair ordering
/// (0,1),(0,2),...; empty when the wronskians are independent.
pub fn find_wronskian_relation(ws: &WronskianSet) -> Vec<Vec<BigRational>> {
    let series: Vec<LogSeries> = ws.pairs().map(|(_, s)| s.clone()).collect();
    find_linear_relations(&series)
}

/// Pair ordering used by `find_wronskian_relation` for a basis of size n.
pub fn pair_order(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..n {
        for l in (j + 1)..n {
            out.push((j, l));
        }
    }
    out
}

/// The tau-matrix data of a pipeline, together with the weight-1 series and
/// the conventions used for tau-derivatives.
pub struct TauData {
    pub tau1: LogSeries,
    pub tau2: LogSeries,
    pub tau3: LogSeries,
    /// Mirror map t = u1/u0 (order-4 pipeline) resp. -d tau2/d tau1 (order-5).
    pub t: LogSeries,
    /// The weight-1 form: w01 resp. the holomorphic solution w0.
    pub w01: LogSeries,
    /// Coordinate used for tau-derivatives.
    coord: LogSeries,
    /// The t-function whose tau-derivative is v (sign convention baked in).
    conv_t: LogSeries,
}

impl TauData {
    /// d/d tau of a series: (dX/dz) / (d coord/dz). The coordinate
    /// derivative must be log-free.
    pub fn tau_deriv(&self, x: &LogSeries) -> Result<LogSeries> {
        let d = self.coord.ddz();
        if !d.is_ell_free() {
            return Err(Error::LogDivision);
        }
        x.ddz().div(&d)
    }

    pub fn coord(&self) -> &LogSeries {
        &self.coord
    }
}

/// Build tau data from an order-4 symplectic wronskian set:
/// tau1 = w03/w01, tau2 = w02/w01, tau3 = -w12/w01, t = u1/u0.
pub fn tau_data(ws: &WronskianSet, basis: &SolutionBasis) -> Result<TauData> {
    if ws.size != 4 {
        return Err(Error::Invalid("tau data needs a 4-element basis".into()));
    }
    let w01 = ws.get(0, 1);
    if !w01.is_ell_free() {
        return Err(Error::NonInvertibleW01);
    }
    let rel = ws.get(0, 2).add(&ws.get(1, 3));
    if !rel.is_zero() {
        return Err(Error::RelationViolated(rel.truncation_order()));
    }
    let tau1 = ws.get(0, 3).div(&w01)?;
    let tau2 = ws.get(0, 2).div(&w01)?;
    let tau3 = ws.get(1, 2).div(&w01)?.neg();
    let t = basis.solution(1).div(basis.solution(0))?;
    // Convention matching the reference expansions: derivatives along tau1,
    // v = d(d tau2/d tau1)/d tau1.
    let d1 = tau1.ddz();
    if !d1.is_ell_free() {
        return Err(Error::LogDivision);
    }
    let conv_t = tau2.ddz().div(&d1)?;
    Ok(TauData {
        tau1: tau1.clone(),
        tau2,
        tau3,
        t,
        w01,
        coord: tau1,
        conv_t,
    })
}

/// Build tau data from an order-5 basis (w0..w4): tau_j = w_j/w_0. The
/// derivative coordinate is tau1 rescaled to unit mirror normalization and
/// t = -d tau2/d tau1.
pub fn tau_data_from_order5(basis: &SolutionBasis) -> Result<TauData> {
    if basis.len() != 5 {
        return Err(Error::Invalid("order-5 tau data needs 5 solutions".into()));
    }
    let w0 = basis.solution(0).clone();
    if !w0.is_ell_free() {
        return Err(Error::NonInvertibleW01);
    }
    let tau1 = basis.solution(1).div(&w0)?;
    let tau2 = basis.solution(2).div(&w0)?;
    let tau3 = basis.solution(3).div(&w0)?;
    // Scale of tau1 against the mirror coordinate: its l^1 z^0 coefficient.
    if tau1.ell_degree() != 1 {
        return Err(Error::Invalid("tau1 must have l-degree 1".into()));
    }
    let top = tau1.ell_coeff(1);
    let scale = match top.coeff_ref(0) {
        Some(c) if !c.is_zero() => c.clone(),
        _ => return Err(Error::NonInvertibleW01),
    };
    let coord = tau1.scale(&scale.inverse()?);
    let d1 = tau1.ddz();
    if !d1.is_ell_free() {
        return Err(Error::LogDivision);
    }
    let t = tau2.ddz().div(&d1)?.neg();
    Ok(TauData {
        tau1,
        tau2,
        tau3,
        t: t.clone(),
        w01: w0,
        coord,
        conv_t: t,
    })
}

/// The structure series of a pipeline: v = dt/dtau, the logarithmic
/// tau-derivatives G1, G2, G3, and the Yukawa normalization K = -1/v.
pub struct StructureSeries {
    pub v: LogSeries,
    pub g1: LogSeries,
    pub g2: LogSeries,
    pub g3: LogSeries,
    pub k: LogSeries,
    /// Derivative coordinate, kept for the p-invariant formulas.
    coord: LogSeries,
}

impl StructureSeries {
    pub fn tau_deriv(&self, x: &LogSeries) -> Result<LogSeries> {
        let d = self.coord.ddz();
        if !d.is_ell_free() {
            return Err(Error::LogDivision);
        }
        x.ddz().div(&d)
    }
}

pub fn structure_series(td: &TauData) -> Result<StructureSeries> {
    let trunc = td.w01.truncation_order();
    let v = td.tau_deriv(&td.conv_t)?;
    if !v.is_ell_free() {
        return Err(Error::NotScalar(format!("v has l-degree {}", v.ell_degree())));
    }
    let dcoord = td.coord.ddz();
    // G1 = (dz/dtau)/z.
    let z = LogSeries::from_series(Series::monomial(Constant::one(), 1, trunc));
    let g1 = dcoord.reciprocal()?.div(&z)?;
    let g2 = td.tau_deriv(&td.w01)?.div(&td.w01)?;
    let g3 = td.tau_deriv(&v)?.div(&v)?;
    let k = v.reciprocal()?.neg();
    Ok(StructureSeries { v, g1, g2, g3, k, coord: td.coord.clone() })
}

/// Yukawa coupling K = -1/v, cross-checked against the wronskian formula
/// K ~ u0^3 W(u0,u1,u3) / w01^3 (proportionality constant fixed at z = 0).
pub fn yukawa(basis: &SolutionBasis, ws: &WronskianSet) -> Result<LogSeries> {
    let td = tau_data(ws, basis)?;
    let ss = structure_series(&td)?;
    let k = ss.k.clone();
    // Cross-check.
    let u0 = basis.solution(0);
    let w3 = LogSeries::wronskian3(basis.solution(0), basis.solution(1), basis.solution(3));
    let u0cubed = u0.mul(u0).mul(u0);
    let w01cubed = td.w01.mul(&td.w01).mul(&td.w01);
    let r = u0cubed.mul(&w3).div(&w01cubed)?;
    let k0 = series_value_at_zero(&k)?;
    let r0 = series_value_at_zero(&r)?;
    let ratio = &k0 * &r0.inverse()?;
    let diff = k.sub(&r.scale(&ratio));
    if !diff.is_zero() {
        return Err(Error::Invalid(format!(
            "Yukawa cross-check failed: K - c*u0^3 W(u0,u1,u3)/w01^3 = {diff}"
        )));
    }
    Ok(k)
}

/// Constant term (z^0 coefficient) of a log-free series.
pub fn series_value_at_zero(s: &LogSeries) -> Result<Constant> {
    if !s.is_ell_free() {
        return Err(Error::NotScalar("log term at z=0".into()));
    }
    let ser = s.ell_coeff(0);
    if ser.valuation() < 0 {
        return Err(Error::Invalid("pole at z=0".into()));
    }
    Ok(ser.coeff(0))
}

/// The monodromy-invariant rational functions p1, p2, p3.
pub struct PInvariants {
    pub p1: RatFun,
    pub p2: RatFun,
    pub p3: RatFun,
}

/// p-invariant series from the structure series; they must come out both
/// log-free and P-free, else the basis was not symplectically normalized.
pub fn p_invariant_series(ss: &StructureSeries) -> Result<[Series; 3]> {
    let g1 = &ss.g1;
    let g2 = &ss.g2;
    let g3 = &ss.g3;
    let d = |x: &LogSeries| ss.tau_deriv(x);
    let two = |x: &LogSeries| x.scale_rat(&BigRational::from_integer(2.into()));

    let g1p = d(g1)?;
    let g23 = g2.add(g3);
    let g1sq = g1.mul(g1);
    // p1 = (2 G1' - G1 (G2+G3)) / (2 G1^2)
    let p1 = two(&g1p).sub(&g1.mul(&g23)).div(&two(&g1sq))?;
    // p2 = (24 G3' - 20 (G2+G3)' + 5 (G2+G3)^2 - 8 G3^2) / (20 G1^2)
    let g3p = d(g3)?;
    let g23p = d(&g23)?;
    let p2 = g3p
        .scale_rat(&BigRational::from_integer(24.into()))
        .sub(&g23p.scale_rat(&BigRational::from_integer(20.into())))
        .add(&g23.mul(&g23).scale_rat(&BigRational::from_integer(5.into())))
        .sub(&g3.mul(g3).scale_rat(&BigRational::from_integer(8.into())))
        .div(&g1sq.scale_rat(&BigRational::from_integer(20.into())))?;
    // p3 = (-10 G3''' + 40 G3 G3'' + 21 (G3')^2 - 54 G3^2 G3' + 9 G3^4)
    //      / (50 G1^4)
    let g3pp = d(&g3p)?;
    let g3ppp = d(&g3pp)?;
    let g3sq = g3.mul(g3);
    let p3 = g3ppp
        .scale_rat(&BigRational::from_integer((-10).into()))
        .add(&g3.mul(&g3pp).scale_rat(&BigRational::from_integer(40.into())))
        .add(&g3p.mul(&g3p).scale_rat(&BigRational::from_integer(21.into())))
        .sub(&g3sq.mul(&g3p).scale_rat(&BigRational::from_integer(54.into())))
        .add(&g3sq.mul(&g3sq).scale_rat(&BigRational::from_integer(9.into())))
        .div(&g1sq.mul(&g1sq).scale_rat(&BigRational::from_integer(50.into())))?;

    let mut out = Vec::with_capacity(3);
    for (name, p) in [("p1", p1), ("p2", p2), ("p3", p3)] {
        if !p.is_ell_free() {
            return Err(Error::NotScalar(format!("{name}: l-degree {}", p.ell_degree())));
        }
        let ser = p.ell_coeff(0);
        if !ser.is_rational() {
            return Err(Error::NotScalar(format!("{name}: P or Xi monomial survives")));
        }
        out.push(ser);
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

pub fn p_invariants(ss: &StructureSeries, max_deg: usize, guard: usize) -> Result<PInvariants> {
    let [s1, s2, s3] = p_invariant_series(ss)?;
    let p1 = rational_reconstruct(&s1, max_deg, max_deg, guard)?;
    let p2 = rational_reconstruct(&s2, max_deg, max_deg, guard)?;
    let p3 = rational_reconstruct(&s3, max_deg, max_deg, guard)?;
    Ok(PInvariants { p1, p2, p3 })
}

/// The order-5 operator with the displayed coefficients in p_i and their
/// theta-derivatives.
pub fn build_order5(p: &PInvariants) -> ThetaOp {
    let p1 = &p.p1;
    let p2 = &p.p2;
    let p3 = &p.p3;
    let tp1 = p1.theta();
    let t2p1 = tp1.theta();
    let t3p1 = t2p1.theta();
    let tp2 = p2.theta();
    let t2p2 = tp2.theta();
    let t3p2 = t2p2.theta();
    let tp3 = p3.theta();
    let c = |n: i64, d: i64| BigRational::new(n.into(), d.into());

    let c5 = RatFun::one();
    let c4 = p1.scale(&c(10, 1));
    let c3 = tp1
        .scale(&c(10, 1))
        .add(&p1.mul(p1).scale(&c(35, 1)))
        .add(&p2.scale(&c(5, 1)));
    let c2 = t2p1
        .scale(&c(5, 1))
        .add(&tp2.scale(&c(15, 2)))
        .add(&p1.mul(&tp1).scale(&c(45, 1)))
        .add(&p1.mul(p1).mul(p1).scale(&c(50, 1)))
        .add(&p1.mul(p2).scale(&c(30, 1)));
    let c1 = p1
        .mul(p1)
        .mul(&tp1)
        .scale(&c(46, 1))
        .add(&p2.mul(&tp1).scale(&c(14, 1)))
        .add(&p1.pow(4).scale(&c(24, 1)))
        .add(&p3.scale(&c(2, 1)))
        .add(&p2.mul(p2).scale(&c(4, 1)))
        .add(&p1.mul(&t2p1).scale(&c(11, 1)))
        .add(&t2p2.scale(&c(9, 2)))
        .add(&t3p1)
        .add(&tp1.mul(&tp1).scale(&c(7, 1)))
        .add(&p1.mul(p1).mul(p2).scale(&c(52, 1)))
        .add(&p1.mul(&tp2).scale(&c(30, 1)));
    let c0 = p2
        .mul(&tp2)
        .scale(&c(4, 1))
        .add(&p1.mul(&t2p2).scale(&c(9, 1)))
        .add(&tp1.mul(&tp2).scale(&c(7, 1)))
        .add(&p1.mul(p1).mul(&tp2).scale(&c(26, 1)))
        .add(&p2.mul(&t2p1).scale(&c(2, 1)))
        .add(&p1.mul(p2).mul(&tp1).scale(&c(20, 1)))
        .add(&tp3)
        .add(&t3p2)
        .add(&p1.mul(p3).scale(&c(4, 1)))
        .add(&p1.mul(p1).mul(p1).mul(p2).scale(&c(24, 1)))
        .add(&p1.mul(p2).mul(p2).scale(&c(8, 1)));

    crate::diffop::op_from_ratfuns(vec![c0, c1, c2, c3, c4, c5])
}

/// The order-4 pullback operator, with the algebraic prefactor
/// g = z^s * exp(-2 integral (p1 - p1(0)) dz/z), s = -2 p1(0).
/// Returns (operator, g-series to order n, s).
pub fn build_order4_pullback(
    p: &PInvariants,
    n: i64,
) -> Result<(ThetaOp, Series, BigRational)> {
    let p1 = &p.p1;
    let p2 = &p.p2;
    let p3 = &p.p3;
    let tp1 = p1.theta();
    let t2p1 = tp1.theta();
    let t3p1 = t2p1.theta();
    let tp2 = p2.theta();
    let t2p2 = tp2.theta();
    let c = |num: i64, den: i64| BigRational::new(num.into(), den.into());

    let c4 = RatFun::one();
    let c3 = p1.scale(&c(16, 1));
    let c2 = p1
        .mul(p1)
        .scale(&c(187, 1))
        .add(&p2.scale(&c(5, 1)))
        .add(&tp1.scale(&c(38, 1)))
        .scale(&c(1, 2));
    let c1 = t2p1
        .scale(&c(22, 1))
        .add(&tp2.scale(&c(5, 1)))
        .add(&p1.mul(&tp1).scale(&c(294, 1)))
        .add(&p1.mul(p1).mul(p1).scale(&c(472, 1)))
        .add(&p1.mul(p2).scale(&c(40, 1)))
        .scale(&c(1, 2));
    let c0 = p3
        .scale(&c(-8, 1))
        .add(&p2.mul(p2).scale(&c(9, 1)))
        .add(&t2p2.scale(&c(12, 1)))
        .add(&t3p1.scale(&c(40, 1)))
        .add(&p1.mul(&tp2).scale(&c(160, 1)))
        .add(&p2.mul(&tp1).scale(&c(124, 1)))
        .add(&p1.mul(p1).mul(&tp1).scale(&c(4420, 1)))
        .add(&p1.mul(&t2p1).scale(&c(680, 1)))
        .add(&tp1.mul(&tp1).scale(&c(460, 1)))
        .add(&p1.mul(p1).mul(p2).scale(&c(622, 1)))
        .add(&p1.pow(4).scale(&c(3465, 1)))
        .scale(&c(1, 16));

    let op = crate::diffop::op_from_ratfuns(vec![c0, c1, c2, c3, c4]);

    // g-series: p1(0) must be finite.
    let p10 = p1
        .eval(&BigRational::zero())
        .ok_or_else(|| Error::Invalid("p1 has a pole at z = 0".into()))?;
    let s = -&p10 - &p10;
    let p1_series = p1.expand(n);
    let shifted = p1_series.sub(&Series::monomial(Constant::from_rational(p10), 0, n));
    let integrand = shifted.mul_zpow(-1).scale_rat(&c(-2, 1));
    let g = integrand.integrate()?.exp()?;
    Ok((op, g, s))
}

/// The exterior-cube data of a symplectic order-4 basis:
/// U = |u0 u2; u0''' u2'''| + |u1 u3; u1''' u3'''|, with the checks
/// 2U' + A U = 0 (A the u''' coefficient of the monic d/dz form) and
/// W(u0,u1,u3) + u0 U = 0.
pub struct ExteriorCube {
    pub u: LogSeries,
    pub check_a: bool,
    pub check_w: bool,
}

pub fn exterior_cube_data(basis: &SolutionBasis) -> Result<ExteriorCube> {
    if basis.len() != 4 {
        return Err(Error::Invalid("exterior cube needs a 4-element basis".into()));
    }
    let rel = LogSeries::wronskian(basis.solution(0), basis.solution(2))
        .add(&LogSeries::wronskian(basis.solution(1), basis.solution(3)));
    if !rel.is_zero() {
        return Err(Error::RelationViolated(rel.truncation_order()));
    }
    let d3 = |s: &LogSeries| s.ddz().ddz().ddz();
    let (u0, u1, u2, u3) = (
        basis.solution(0),
        basis.solution(1),
        basis.solution(2),
        basis.solution(3),
    );
    let u = u0
        .mul(&d3(u2))
        .sub(&d3(u0).mul(u2))
        .add(&u1.mul(&d3(u3)))
        .sub(&d3(u1).mul(u3));
    // A(z) = (6 r4 + r3) / (z r4) for the theta-form operator.
    let op = &basis.op;
    let r4 = op.coeff(4);
    let r3 = op.coeff(3);
    let a = RatFun::new(
        r4.scale(&BigRational::from_integer(6.into())).add(&r3),
        r4.mul_zpow(1),
    );
    let trunc_a = u.truncation_order() - u.valuation() + 4;
    let a_series = a.expand(trunc_a);
    let res_a = u
        .ddz()
        .scale_rat(&BigRational::from_integer(2.into()))
        .add(&u.mul_series(&a_series));
    let w3 = LogSeries::wronskian3(u0, u1, u3);
    let res_w = w3.add(&u0.mul(&u));
    Ok(ExteriorCube { u, check_a: res_a.is_zero(), check_w: res_w.is_zero() })
}

/// Verification report for the four square-root functions against the
/// order-4 pullback operator.
pub struct Converse3Report {
    pub annihilated: [bool; 4],
    pub det_identity: bool,
}

impl Converse3Report {
    pub fn all_ok(&self) -> bool {
        self.annihilated.iter().all(|&b| b) && self.det_identity
    }
}

/// Check that the four functions u, tau2' u, (tau1 tau2' - tau2) u,
/// (tau2 tau2' - tau3) u, multiplied by the pullback prefactor g, satisfy
/// the order-4 pullback equation, and that |w0 theta w0; w1 theta w1|
/// equals w0^2 / G1 in the tau1 convention. The global square-root constant
/// is normalized away (the equation is linear).
pub fn verify_converse3(td: &TauData, p: &PInvariants) -> Result<Converse3Report> {
    let n = td.w01.truncation_order();
    let (op4, g, s) = build_order4_pullback(p, n)?;
    let w0 = &td.w01;
    let w1 = td.tau1.mul(w0);
    let det = w0.mul(&w1.theta()).sub(&w1.mul(&w0.theta()));
    if !det.is_ell_free() {
        return Err(Error::NotScalar("wronskian determinant has log terms".into()));
    }
    let det_ser = det.ell_coeff(0);
    // Identity |w0 theta w0; w1 theta w1| = w0^2 / G1 with G1 = (dz/dtau1)/z.
    let dtau1 = td.tau1.ddz();
    let g1_tau1 = dtau1
        .reciprocal()?
        .div(&LogSeries::from_series(Series::monomial(Constant::one(), 1, n)))?;
    let det_identity = det.mul(&g1_tau1).sub(&w0.mul(w0)).is_zero();
    // Normalize the leading constant so the square root stays in the ring.
    let (_, lead) = det_ser.leading().ok_or(Error::ZeroLeadingCoefficient)?;
    let det_norm = det_ser.scale(&lead.inverse()?);
    let u = LogSeries::from_series(det_norm.sqrt(1)?);
    let tau2p = td.tau2.ddz().div(&dtau1)?;
    let f1 = u.clone();
    let f2 = tau2p.mul(&u);
    let f3 = td.tau1.mul(&tau2p).sub(&td.tau2).mul(&u);
    let f4 = td.tau2.mul(&tau2p).sub(&td.tau3).mul(&u);
    // g_full = z^s * g; test annihilation of z^s (g f) via the gauge shift.
    let op_shift = op4.gauge_rat(&(-s.clone()));
    let mut annihilated = [false; 4];
    for (i, f) in [f1, f2, f3, f4].iter().enumerate() {
        let h = f.mul_series(&g);
        annihilated[i] = op_shift.apply(&h).is_zero();
    }
    Ok(Converse3Report { annihilated, det_identity })
}

/// The master invariant of the Yukawa coupling:
/// (175 K1^4 - 280 K2 K1^2 K + 49 (K2 K)^2 + 70 K3 K1 K^2 - 10 K4 K^3)
///   / (K^4 (dz/dt)^4),
/// with Kj the j-th derivative along the mirror coordinate t. Returns the
/// series, which must be log-free and P-free.
pub fn master_invariant(td: &TauData, ss: &StructureSeries) -> Result<Series> {
    let dt = td.t.ddz();
    if !dt.is_ell_free() {
        return Err(Error::LogDivision);
    }
    let d = |x: &LogSeries| -> Result<LogSeries> { x.ddz().div(&dt) };
    let k = &ss.k;
    let k1 = d(k)?;
    let k2 = d(&k1)?;
    let k3 = d(&k2)?;
    let k4 = d(&k3)?;
    let zdot = dt.reciprocal()?;
    let c = |n: i64| BigRational::from_integer(n.into());
    let num = k1
        .mul(&k1)
        .mul(&k1)
        .mul(&k1)
        .scale_rat(&c(175))
        .sub(&k2.mul(&k1).mul(&k1).mul(k).scale_rat(&c(280)))
        .add(&k2.mul(k).mul(&k2.mul(k)).scale_rat(&c(49)))
        .add(&k3.mul(&k1).mul(k).mul(k).scale_rat(&c(70)))
        .sub(&k4.mul(k).mul(k).mul(k).scale_rat(&c(10)));
    let den = k.mul(k).mul(k).mul(k).mul(&zdot.mul(&zdot).mul(&zdot).mul(&zdot));
    let out = num.div(&den)?;
    if !out.is_ell_free() {
        return Err(Error::NotScalar(format!(
            "master invariant has l-degree {}",
            out.ell_degree()
        )));
    }
    let ser = out.ell_coeff(0);
    if !ser.is_rational() {
        return Err(Error::NotScalar("master invariant has P monomials".into()));
    }
    Ok(ser)
}

/// The wronskian relation of a Frobenius basis in weight-normalized form:
/// the basis is rescaled to P^j y_j (which makes every l^c slot carry P^c
/// uniformly), so the relation coefficients become plain rationals. The
/// returned vector refers to the rescaled wronskians; the coefficient for
/// the original pair (i, j) is the rational times P^(i+j).
pub fn find_weighted_wronskian_relation(
    basis: &SolutionBasis,
) -> Result<Vec<Vec<BigRational>>> {
    let n = basis.len();
    let mut m = vec![vec![Constant::zero(); n]; n];
    for (j, row) in m.iter_mut().enumerate() {
        row[j] = Constant::p_pow(j as i32);
    }
    let scaled = crate::frobenius::change_basis(basis, &m)?;
    let ws = wronskians(&scaled, None);
    Ok(find_wronskian_relation(&ws))
}

/// Construct a symplectic basis (u0 = y0, u1 = y1, u2 ~ y3 + ..., u3 ~ y2)
/// for a MUM order-4 operator from the unique wronskian relation of its
/// Frobenius basis. The relation generally carries P-power coefficients,
/// graded by log-weight; the construction de-normalizes them so that
/// W(u0,u2) + W(u1,u3) = 0 holds exactly.
pub fn symplectic_basis(op: &ThetaOp, n: i64) -> Result<SolutionBasis> {
    let y = frobenius_basis(op, n)?;
    let kernel = find_weighted_wronskian_relation(&y)?;
    if kernel.len() != 1 {
        return Err(Error::Invalid(format!(
            "expected a unique wronskian relation, found {}",
            kernel.len()
        )));
    }
    let rel = &kernel[0];
    // Pair order: (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
    let c01 = &rel[0];
    let c02 = &rel[1];
    let c03 = &rel[2];
    let c12 = &rel[3];
    let c13 = &rel[4];
    let c23 = &rel[5];
    if !c13.is_zero() || !c23.is_zero() || c03.is_zero() {
        return Err(Error::Invalid(format!(
            "wronskian relation has unexpected shape: {rel:?}"
        )));
    }
    let alpha = c12 / c03;
    let beta = c02 / c03;
    let gamma = c01 / c03;
    if alpha.is_zero() {
        return Err(Error::Invalid("degenerate relation: no w12 component".into()));
    }
    // In weight-normalized coordinates: u2 = Y3 + beta Y2 + gamma Y1 and
    // u3 = alpha Y2 with Y_j = P^j y_j; undoing the scaling puts P^-1, P^-2
    // on the lower rows and leaves the symplectic condition intact.
    let rq = Constant::from_rational;
    let m = vec![
        vec![Constant::one(), Constant::zero(), Constant::zero(), Constant::zero()],
        vec![Constant::zero(), Constant::one(), Constant::zero(), Constant::zero()],
        vec![
            Constant::zero(),
            &rq(gamma) * &Constant::p_pow(-2),
            &rq(beta) * &Constant::p_pow(-1),
            Constant::one(),
        ],
        vec![Constant::zero(), Constant::zero(), rq(alpha), Constant::zero()],
    ];
    crate::frobenius::change_basis(&y, &m)
}

/// Convenience bundle: basis, tau data, and structure series for one
/// operator.
pub struct Pipeline {
    pub basis: SolutionBasis,
    pub td: TauData,
    pub ss: StructureSeries,
}

pub fn pipeline_order4(
    op: &ThetaOp,
    basis_change: Option<&[Vec<Constant>]>,
    n: i64,
) -> Result<Pipeline> {
    let y = frobenius_basis(op, n)?;
    let basis = match basis_change {
        Some(m) => crate::frobenius::change_basis(&y, m)?,
        None => symplectic_basis(op, n)?,
    };
    let ws = wronskians(&basis, None);
    let td = tau_data(&ws, &basis)?;
    let ss = structure_series(&td)?;
    Ok(Pipeline { basis, td, ss })
}

pub fn pipeline_order5(
    op: &ThetaOp,
    basis_change: &[Vec<Constant>],
    n: i64,
) -> Result<Pipeline> {
    let y = frobenius_basis(op, n)?;
    let basis = crate::frobenius::change_basis(&y, basis_change)?;
    let td = tau_data_from_order5(&basis)?;
    let ss = structure_series(&td)?;
    Ok(Pipeline { basis, td, ss })
}
