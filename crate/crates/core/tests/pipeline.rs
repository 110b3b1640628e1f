//! End-to-end exact pipeline checks on the two reference operators.

use num::BigRational;
use num_traits::Zero;

use pf_core::constant::Constant;
use pf_core::data;
use pf_core::frobenius::{change_basis, frobenius_basis};
use pf_core::geometry::*;
use pf_core::logseries::LogSeries;
use pf_core::poly::Poly;
use pf_core::ratfun::RatFun;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn rational_coeff(s: &LogSeries, ell: usize, zpow: i64) -> BigRational {
    s.ell_coeff(ell)
        .coeff(zpow)
        .to_rational()
        .expect("coefficient should be rational")
}

/// Coefficient of P^p in the z^zpow, l^ell slot.
fn p_coeff(s: &LogSeries, ell: usize, zpow: i64, p: i32) -> BigRational {
    s.ell_coeff(ell).coeff(zpow).coeff((p, 0))
}

#[test]
fn quintic_pipeline_golden_series() {
    let op = data::quintic();
    let y = frobenius_basis(&op, 24).unwrap();
    let u = change_basis(&y, &data::quintic_u_basis_change()).unwrap();
    let ws = wronskians(&u, None);

    // w01 = 1/z + 1010 + 1861650 z + 4119140000 z^2 + 9959217231250 z^3 + ...
    let w01 = ws.get(0, 1);
    assert!(w01.is_ell_free());
    for (k, expect) in [
        (-1, q(1, 1)),
        (0, q(1010, 1)),
        (1, q(1861650, 1)),
        (2, q(4119140000, 1)),
        (3, q(9959217231250, 1)),
    ] {
        assert_eq!(rational_coeff(&w01, 0, k), expect, "w01 z^{k}");
    }

    // Linear relation: exactly w02 + w13 = 0.
    let kernel = find_wronskian_relation(&ws);
    assert_eq!(kernel.len(), 1);
    let rel = &kernel[0];
    // pair order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3); normalized pivot = 1.
    let expect = [q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(1, 1), q(0, 1)];
    let scale = rel[1].clone();
    assert!(!scale.is_zero());
    for (a, b) in rel.iter().zip(expect.iter()) {
        assert_eq!(a, &(&scale * b), "relation vector");
    }

    // Quadratic relation residual vanishes identically.
    assert!(ws.quadratic_residual().is_zero());

    let td = tau_data(&ws, &u).unwrap();

    // tau1 = 5 l + 5/2 + P^-1 (6725 z + 16482625/2 z^2 + 44704818125/3 z^3)
    assert_eq!(p_coeff(&td.tau1, 1, 0, 0), q(5, 1));
    assert_eq!(p_coeff(&td.tau1, 0, 0, 0), q(5, 2));
    assert_eq!(p_coeff(&td.tau1, 0, 1, -1), q(6725, 1));
    assert_eq!(p_coeff(&td.tau1, 0, 2, -1), q(16482625, 2));
    assert_eq!(p_coeff(&td.tau1, 0, 3, -1), q(44704818125, 3));

    // tau2 + tau1^2/10 - tau1/2 = -65/24 + P^-2 (2875 z + 17038125/4 z^2
    //   + 151564765625/18 z^3 + ...)
    let comb = td
        .tau2
        .add(&td.tau1.mul(&td.tau1).scale_rat(&q(1, 10)))
        .sub(&td.tau1.scale_rat(&q(1, 2)));
    assert!(comb.is_ell_free(), "tau2 combination must be log-free");
    assert_eq!(p_coeff(&comb, 0, 0, 0), q(-65, 24));
    assert_eq!(p_coeff(&comb, 0, 1, -2), q(2875, 1));
    assert_eq!(p_coeff(&comb, 0, 2, -2), q(17038125, 4));
    assert_eq!(p_coeff(&comb, 0, 3, -2), q(151564765625, 18));

    // tau-ratio identity (d tau2/dz)^2 = (d tau1/dz)(d tau3/dz).
    let d1 = td.tau1.ddz();
    let d2 = td.tau2.ddz();
    let d3 = td.tau3.ddz();
    assert!(d2.mul(&d2).sub(&d1.mul(&d3)).is_zero());

    let ss = structure_series(&td).unwrap();

    // v = -1/5 + 115 z + 217500 z^2 + 471493250 z^3 + 1103069708750 z^4
    for (k, expect) in [
        (0, q(-1, 5)),
        (1, q(115, 1)),
        (2, q(217500, 1)),
        (3, q(471493250, 1)),
        (4, q(1103069708750, 1)),
    ] {
        assert_eq!(rational_coeff(&ss.v, 0, k), expect, "v z^{k}");
    }

    // K = -1/v = 5 + 2875 z + 7090625 z^2 + 18991003125 z^3
    let k = yukawa(&u, &ws).unwrap();
    for (kk, expect) in [
        (0, q(5, 1)),
        (1, q(2875, 1)),
        (2, q(7090625, 1)),
        (3, q(18991003125, 1)),
    ] {
        assert_eq!(rational_coeff(&k, 0, kk), expect, "K z^{kk}");
    }

    // G1 = P (1/5 - 269 z - 297500 z^2 - 501290000 z^3 - ...)
    for (kk, expect) in [
        (0, q(1, 5)),
        (1, q(-269, 1)),
        (2, q(-297500, 1)),
        (3, q(-501290000, 1)),
    ] {
        assert_eq!(p_coeff(&ss.g1, 0, kk, 1), expect, "G1 z^{kk}");
    }
    // G2 = P (-1/5 + 471 z + 566450 z^2 + 1023038500 z^3 + ...)
    for (kk, expect) in [
        (0, q(-1, 5)),
        (1, q(471, 1)),
        (2, q(566450, 1)),
        (3, q(1023038500, 1)),
    ] {
        assert_eq!(p_coeff(&ss.g2, 0, kk, 1), expect, "G2 z^{kk}");
    }
    // G3 = P (-115 z - 346450 z^2 - 982613500 z^3 - ...)
    for (kk, expect) in [
        (0, q(0, 1)),
        (1, q(-115, 1)),
        (2, q(-346450, 1)),
        (3, q(-982613500, 1)),
    ] {
        assert_eq!(p_coeff(&ss.g3, 0, kk, 1), expect, "G3 z^{kk}");
    }
}

#[test]
fn quintic_p_invariants_exact() {
    let op = data::quintic();
    let pl = pipeline_order4(&op, Some(&data::quintic_u_basis_change()), 40).unwrap();
    let p = p_invariants(&pl.ss, 12, 5).unwrap();
    assert_eq!(
        p.p1,
        RatFun::new(Poly::from_i64(&[1, -6250]), Poly::from_i64(&[2, -6250]))
    );
    // The reference text prints p2 and p3 for this example with stray
    // factors 4 resp. 2 relative to its own coefficient formulas (its
    // order-5 display and the hypergeometric example pin the formulas, see
    // build_operators_from_p_invariants). Assert the exact relation.
    let printed_p2 = RatFun::new(
        Poly::from_i64(&[1, -17000, 37500000]),
        Poly::from_i64(&[1, -3125]).mul(&Poly::from_i64(&[1, -3125])),
    );
    assert_eq!(p.p2.scale(&q(4, 1)), printed_p2);
    // printed p3 = 5z(46 + 509375 z + 156250000 z^2) / (1 - 3125 z)^4
    let den4 = {
        let b = Poly::from_i64(&[1, -3125]);
        b.mul(&b).mul(&b).mul(&b)
    };
    let printed_p3 = RatFun::new(Poly::from_i64(&[0, 230, 2546875, 781250000]), den4);
    assert_eq!(p.p3.scale(&q(2, 1)), printed_p3);
}

#[test]
fn ex3_pipeline_golden_series() {
    let op = data::ex3_operator();
    let pl = pipeline_order5(&op, &data::ex3_w_basis_change(), 24).unwrap();

    // w relation: w0 w4 - w1 w3 + w2^2 = 0.
    let w = pl.basis.solutions();
    let rel = w[0].mul(&w[4]).sub(&w[1].mul(&w[3])).add(&w[2].mul(&w[2]));
    assert!(rel.is_zero(), "w quadratic relation fails");

    // v = 1 + 160 z + 132320 z^2 + 115614720 z^3 + 104797147360 z^4
    for (k, expect) in [
        (0, q(1, 1)),
        (1, q(160, 1)),
        (2, q(132320, 1)),
        (3, q(115614720, 1)),
        (4, q(104797147360, 1)),
    ] {
        assert_eq!(rational_coeff(&pl.ss.v, 0, k), expect, "v z^{k}");
    }
    // K = -1/v.
    let prod = pl.ss.k.mul(&pl.ss.v);
    assert_eq!(rational_coeff(&prod, 0, 0), q(-1, 1));
    for k in 1..10 {
        assert_eq!(rational_coeff(&prod, 0, k), q(0, 1));
    }

    // G1 = P (1 - 160 z - 54880 z^2 - 29946880 z^3 - 19691390560 z^4)
    for (k, expect) in [
        (0, q(1, 1)),
        (1, q(-160, 1)),
        (2, q(-54880, 1)),
        (3, q(-29946880, 1)),
        (4, q(-19691390560, 1)),
    ] {
        assert_eq!(p_coeff(&pl.ss.g1, 0, k, 1), expect, "G1 z^{k}");
    }
    // G2 = P (32 z + 9408 z^2 + 4805632 z^3 + 3045669248 z^4)
    for (k, expect) in [
        (0, q(0, 1)),
        (1, q(32, 1)),
        (2, q(9408, 1)),
        (3, q(4805632, 1)),
        (4, q(3045669248, 1)),
    ] {
        assert_eq!(p_coeff(&pl.ss.g2, 0, k, 1), expect, "G2 z^{k}");
    }
    // G3 = P (160 z + 213440 z^2 + 240399360 z^3 + 259173946240 z^4)
    for (k, expect) in [
        (0, q(0, 1)),
        (1, q(160, 1)),
        (2, q(213440, 1)),
        (3, q(240399360, 1)),
        (4, q(259173946240, 1)),
    ] {
        assert_eq!(p_coeff(&pl.ss.g3, 0, k, 1), expect, "G3 z^{k}");
    }
}

#[test]
fn ex3_p_invariants_exact() {
    let op = data::ex3_operator();
    let pl = pipeline_order5(&op, &data::ex3_w_basis_change(), 40).unwrap();
    let p = p_invariants(&pl.ss, 12, 5).unwrap();
    assert_eq!(
        p.p1,
        RatFun::new(Poly::from_i64(&[0, -256]), Poly::from_i64(&[1, -1024]))
    );
    let den2 = Poly::from_i64(&[1, -1024]).mul(&Poly::from_i64(&[1, -1024]));
    assert_eq!(p.p2, RatFun::new(Poly::from_i64(&[0, 0, 65536]), den2.clone()));
    let den4 = den2.mul(&den2);
    assert_eq!(
        p.p3,
        RatFun::new(Poly::from_i64(&[0, -32, -163840, -33554432]), den4)
    );
}

#[test]
fn build_operators_from_p_invariants() {
    // ex3: order-5 reconstruction is the original hypergeometric operator,
    // order-4 pullback matches the reference display.
    let op = data::ex3_operator();
    let pl = pipeline_order5(&op, &data::ex3_w_basis_change(), 40).unwrap();
    let p = p_invariants(&pl.ss, 12, 5).unwrap();
    assert_eq!(build_order5(&p), op);
    let (pb, g, s) = build_order4_pullback(&p, 20).unwrap();
    assert_eq!(pb, data::ex3_pullback());
    assert!(s.is_zero(), "ex3 prefactor exponent should be 0");
    assert_eq!(g.coeff(0).to_rational().unwrap(), q(1, 1));

    // quintic: order-5 reconstruction equals the exterior square exactly,
    // and after the z-gauge matches the reference order-5 display.
    let qop = data::quintic();
    let pl4 = pipeline_order4(&qop, Some(&data::quintic_u_basis_change()), 40).unwrap();
    let p4 = p_invariants(&pl4.ss, 12, 5).unwrap();
    let o5 = build_order5(&p4);
    let ext = qop.exterior_square().unwrap();
    assert_eq!(o5, ext);
    assert_eq!(o5.gauge_transform(1), data::quintic_extsq_gauged());
}

#[test]
fn exterior_cube_checks() {
    // Quintic u-basis.
    let op = data::quintic();
    let y = frobenius_basis(&op, 20).unwrap();
    let u = change_basis(&y, &data::quintic_u_basis_change()).unwrap();
    let ec = exterior_cube_data(&u).unwrap();
    assert!(ec.check_a, "2U' + AU != 0 for quintic");
    assert!(ec.check_w, "W(u0,u1,u3) + u0 U != 0 for quintic");

    // theta^4 with the e10-satisfying combination (1, l, -l^3/6, l^2/2):
    // U = -P^-3 z^-3 and both identities hold.
    let t4 = pf_core::diffop::parse_operator("theta^4").unwrap();
    let yb = frobenius_basis(&t4, 12).unwrap();
    let m = vec![
        vec![Constant::one(), Constant::zero(), Constant::zero(), Constant::zero()],
        vec![Constant::zero(), Constant::one(), Constant::zero(), Constant::zero()],
        vec![Constant::zero(), Constant::zero(), Constant::zero(), Constant::from_i64(-1)],
        vec![Constant::zero(), Constant::zero(), Constant::one(), Constant::zero()],
    ];
    let ub = change_basis(&yb, &m).unwrap();
    let ec = exterior_cube_data(&ub).unwrap();
    assert!(ec.check_a && ec.check_w);
    assert!(ec.u.is_ell_free());
    assert_eq!(ec.u.ell_coeff(0).coeff(-3).coeff((-3, 0)), q(-1, 1));
}

#[test]
fn converse3_functions_satisfy_pullback() {
    let qop = data::quintic();
    let pl = pipeline_order4(&qop, Some(&data::quintic_u_basis_change()), 40).unwrap();
    let p = p_invariants(&pl.ss, 12, 5).unwrap();
    let rep = verify_converse3(&pl.td, &p).unwrap();
    assert!(rep.det_identity, "det = w0^2/G1 identity fails");
    assert!(rep.annihilated.iter().all(|&b| b), "{:?}", rep.annihilated);
}

#[test]
fn master_invariant_is_scalar_and_rational() {
    let qop = data::quintic();
    let pl = pipeline_order4(&qop, Some(&data::quintic_u_basis_change()), 30).unwrap();
    let inv = master_invariant(&pl.td, &pl.ss).unwrap();
    assert!(inv.is_rational());

    let op5 = data::ex3_operator();
    let pl5 = pipeline_order5(&op5, &data::ex3_w_basis_change(), 30).unwrap();
    let inv5 = master_invariant(&pl5.td, &pl5.ss).unwrap();
    assert!(inv5.is_rational());
}

#[test]
fn remark_r9_wronskian_identity() {
    // W(W(u0,u1), W(u2,u3)) = -u0 W(u1,u2,u3) + u1 W(u0,u2,u3) for the
    // quintic Frobenius basis.
    let op = data::quintic();
    let y = frobenius_basis(&op, 16).unwrap();
    let s = y.solutions();
    let w01 = LogSeries::wronskian(&s[0], &s[1]);
    let w23 = LogSeries::wronskian(&s[2], &s[3]);
    let lhs = LogSeries::wronskian(&w01, &w23);
    let rhs = s[1]
        .mul(&LogSeries::wronskian3(&s[0], &s[2], &s[3]))
        .sub(&s[0].mul(&LogSeries::wronskian3(&s[1], &s[2], &s[3])));
    assert!(lhs.sub(&rhs).is_zero());
}

#[test]
fn remark_r4_double_antisymmetric_square() {
    // The antisymmetric square of the antisymmetric square is the symmetric
    // square up to the algebraic factor of the exterior cube: the 3x3
    // wronskians of a symplectic basis are u_k * U, so the solutions of
    // ext^2 are the products u_i u_j times U. Checked at series level.
    let op = data::quintic();
    let ext = op.exterior_square().unwrap();
    let ext2 = ext.exterior_square().unwrap();
    let y = frobenius_basis(&op, 18).unwrap();
    let u = change_basis(&y, &data::quintic_u_basis_change()).unwrap();
    let cube = exterior_cube_data(&u).unwrap();
    let s = u.solutions();
    for i in 0..4 {
        for j in i..4 {
            let prod = s[i].mul(&s[j]).mul(&cube.u);
            assert!(
                ext2.apply(&prod).is_zero(),
                "ext^2 does not annihilate U u{i} u{j}"
            );
        }
    }
    // The symmetric square annihilates the bare products directly.
    let sym = op.symmetric_square().unwrap();
    for i in 0..4 {
        for j in i..4 {
            let prod = s[i].mul(&s[j]);
            assert!(sym.apply(&prod).is_zero(), "sym^2 misses u{i} u{j}");
        }
    }
}

#[test]
fn r3prime_frobenius_style_basis_has_no_relation() {
    // The non-MUM operator has an order-6 exterior square; its solutions at
    // an ordinary point give six independent wronskians (rank 6, no kernel).
    let op = data::r3prime_operator();
    let c = q(1, 2);
    let basis = pf_core::frobenius::taylor_basis_at(&op, &c, 40).unwrap();
    let logs: Vec<LogSeries> = basis.into_iter().map(LogSeries::from_series).collect();
    let mut wr = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            wr.push(LogSeries::wronskian(&logs[i], &logs[j]));
        }
    }
    let kernel = find_linear_relations(&wr);
    assert!(kernel.is_empty(), "unexpected relation: {kernel:?}");
}

/// Random operators in the symplectic class, generated through the order-4
/// pullback of random p-invariants vanishing at z = 0 (a generic MUM
/// operator is not self-dual and has no wronskian relation at all).
pub fn random_symplectic_mum_ops(seed: u64, count: usize) -> Vec<pf_core::diffop::ThetaOp> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let a1 = rng.gen_range(1..4i64);
        let a2 = rng.gen_range(-3..4i64);
        let a3 = rng.gen_range(-3..4i64);
        let m = rng.gen_range(2..7i64);
        let den = Poly::from_i64(&[1, -m]);
        let p = PInvariants {
            p1: RatFun::new(Poly::from_i64(&[0, a1]), den.clone()),
            p2: RatFun::new(Poly::from_i64(&[0, a2]), den.mul(&den)),
            p3: RatFun::new(
                Poly::from_i64(&[0, a3]),
                den.mul(&den).mul(&den).mul(&den),
            ),
        };
        let (op, _, _) = match build_order4_pullback(&p, 8) {
            Ok(x) => x,
            Err(_) => continue,
        };
        if op.order() == 4 && op.is_mum() {
            out.push(op);
        }
    }
    out
}

#[test]
fn random_mum_operators_satisfy_structure_identities() {
    for op in random_symplectic_mum_ops(0x5eed, 3) {
        let basis = symplectic_basis(&op, 26).unwrap();
        let ws = wronskians(&basis, None);
        assert!(ws.quadratic_residual().is_zero());
        let td = tau_data(&ws, &basis).unwrap();
        // tau-ratio identity.
        let d1 = td.tau1.ddz();
        let d2 = td.tau2.ddz();
        let d3 = td.tau3.ddz();
        assert!(d2.mul(&d2).sub(&d1.mul(&d3)).is_zero(), "ratio identity {op}");
        // exterior cube checks.
        let ec = exterior_cube_data(&basis).unwrap();
        assert!(ec.check_a && ec.check_w, "exterior cube checks for {op}");
        // structure series, master invariant, p-invariants, order-5 match.
        let ss = structure_series(&td).unwrap();
        master_invariant(&td, &ss).unwrap();
        let p = p_invariants(&ss, 8, 4).unwrap();
        let o5 = build_order5(&p);
        let ext = op.exterior_square().unwrap();
        assert_eq!(o5, ext, "order-5 reconstruction for {op}");
        // Remark r9 identity on this basis.
        let s = basis.solutions();
        let w01 = LogSeries::wronskian(&s[0], &s[1]);
        let w23 = LogSeries::wronskian(&s[2], &s[3]);
        let lhs = LogSeries::wronskian(&w01, &w23);
        let rhs = s[1]
            .mul(&LogSeries::wronskian3(&s[0], &s[2], &s[3]))
            .sub(&s[0].mul(&LogSeries::wronskian3(&s[1], &s[2], &s[3])));
        assert!(lhs.sub(&rhs).is_zero(), "r9 identity for {op}");
    }
}
