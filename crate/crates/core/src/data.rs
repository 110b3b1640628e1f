//! Built-in operators, basis changes, and reference monodromy matrices.
//!
//! Everything here is stored exactly (integers, rationals, and the symbol
//! x = 10*zeta(3)/(2*pi*i)^3 = 10*Xi); floats never enter.

use num::BigRational;

use crate::constant::Constant;
use crate::diffop::{parse_operator, ThetaOp};

pub const QUINTIC_TEXT: &str =
    "theta^4 - 5*z*(5*theta+1)*(5*theta+2)*(5*theta+3)*(5*theta+4)";

pub const EX3_TEXT: &str = "theta^5 - 32*z*(2*theta+1)^5";

pub const R3PRIME_TEXT: &str =
    "theta^2*(theta-1/3)*(theta+1/3) - z*(theta+1/2)^2*(theta+5/6)*(theta+7/6)";

/// Order-5 form satisfied by z * (wronskians of the quintic basis).
pub const QUINTIC_EXTSQ_GAUGED_TEXT: &str = "theta^5 \
 - 5*z*(2*theta+1)*(625*theta^4 + 1250*theta^3 + 1500*theta^2 + 875*theta + 202) \
 + 5^5*z^2*(5*theta+3)*(5*theta+4)*(5*theta+5)*(5*theta+6)*(5*theta+7)";

/// Fourth-order pullback of the hypergeometric order-5 example.
pub const EX3_PULLBACK_TEXT: &str = "theta^4 \
 - 16*z*(128*theta^4 + 256*theta^3 + 304*theta^2 + 176*theta + 39) \
 + 2^20*z^2*(theta+1)^4";

pub fn quintic() -> ThetaOp {
    parse_operator(QUINTIC_TEXT).unwrap()
}

pub fn ex3_operator() -> ThetaOp {
    parse_operator(EX3_TEXT).unwrap()
}

pub fn r3prime_operator() -> ThetaOp {
    parse_operator(R3PRIME_TEXT).unwrap()
}

pub fn quintic_extsq_gauged() -> ThetaOp {
    parse_operator(QUINTIC_EXTSQ_GAUGED_TEXT).unwrap()
}

pub fn ex3_pullback() -> ThetaOp {
    parse_operator(EX3_PULLBACK_TEXT).unwrap()
}

fn c_int(n: i64) -> Constant {
    Constant::from_i64(n)
}

fn c_rat(n: i64, d: i64) -> Constant {
    Constant::from_rational(BigRational::new(n.into(), d.into()))
}

/// n * Xi (the symbol x = 10 zeta(3)/(2 pi i)^3 equals 10*Xi).
fn c_xi(n: i64) -> Constant {
    Constant::monomial(BigRational::from_integer(n.into()), 0, 1)
}

/// Basis change from the quintic Frobenius basis (y0..y3, ascending) to the
/// symplectic basis (u0..u3, ascending):
///   u0 = y0, u1 = y1,
///   u2 = -5 y3 - 25/12 y1 + 200 Xi y0,
///   u3 =  5 y2 + 5/2 y1 - 25/12 y0.
pub fn quintic_u_basis_change() -> Vec<Vec<Constant>> {
    vec![
        vec![c_int(1), c_int(0), c_int(0), c_int(0)],
        vec![c_int(0), c_int(1), c_int(0), c_int(0)],
        vec![c_xi(200), c_rat(-25, 12), c_int(0), c_int(-5)],
        vec![c_rat(-25, 12), c_rat(5, 2), c_int(5), c_int(0)],
    ]
}

/// Basis change from the order-5 Frobenius basis (y0..y4, ascending) to the
/// basis (w0..w4, ascending):
///   w0 = y0, w1 = 4 y1, w2 = -4 y2 + 5/6 y0, w3 = 8 y3 - 8 x y0,
///   w4 = 32 y4 + 20/3 y2 - 32 x y1 - 25/36 y0, with x = 10 Xi.
pub fn ex3_w_basis_change() -> Vec<Vec<Constant>> {
    vec![
        vec![c_int(1), c_int(0), c_int(0), c_int(0), c_int(0)],
        vec![c_int(0), c_int(4), c_int(0), c_int(0), c_int(0)],
        vec![c_rat(5, 6), c_int(0), c_int(-4), c_int(0), c_int(0)],
        vec![c_xi(-80), c_int(0), c_int(0), c_int(8), c_int(0)],
        vec![c_rat(-25, 36), c_xi(-320), c_rat(20, 3), c_int(0), c_int(32)],
    ]
}

/// Reference monodromy of the quintic in the u-basis, acting on the column
/// (u3, u2, u1, u0): counterclockwise loop around z = 0.
pub fn quintic_m0() -> Vec<Vec<i64>> {
    vec![
        vec![1, 0, 5, 5],
        vec![-1, 1, 0, -5],
        vec![0, 0, 1, 1],
        vec![0, 0, 0, 1],
    ]
}

/// Same basis, loop around z = 1/3125.
pub fn quintic_m1() -> Vec<Vec<i64>> {
    vec![
        vec![1, 0, 0, 0],
        vec![0, 1, 0, 0],
        vec![0, 0, 1, 0],
        vec![0, 1, 0, 1],
    ]
}

/// The introduction's presentation of the same two matrices, obtained from
/// the u-basis by reordering it as (u1, u0, u3, u2).
pub fn quintic_m0_reordered() -> Vec<Vec<i64>> {
    vec![
        vec![1, 1, 0, 0],
        vec![0, 1, 0, 0],
        vec![5, 5, 1, 0],
        vec![0, -5, -1, 1],
    ]
}

pub fn quintic_m1_reordered() -> Vec<Vec<i64>> {
    vec![
        vec![1, 0, 0, 0],
        vec![0, 1, 0, 1],
        vec![0, 0, 1, 0],
        vec![0, 0, 0, 1],
    ]
}

/// Order-5 example, w-basis, acting on (w4, w3, w2, w1, w0): loop around 0.
pub fn ex3_w_m0() -> Vec<Vec<i64>> {
    vec![
        vec![1, 4, -4, 3, 8],
        vec![0, 1, -2, 1, 3],
        vec![0, 0, 1, -1, -2],
        vec![0, 0, 0, 1, 4],
        vec![0, 0, 0, 0, 1],
    ]
}

/// Same basis, loop around z = 1/1024 (an involution).
pub fn ex3_w_m1() -> Vec<Vec<i64>> {
    vec![
        vec![0, 0, 0, 0, -1],
        vec![0, 1, 0, 0, 0],
        vec![0, 0, 1, 0, 0],
        vec![0, 0, 0, 1, 0],
        vec![-1, 0, 0, 0, 0],
    ]
}

/// Entry of the order-5 y-basis monodromy around 1/1024: value
/// a + b*x + c*x^2 with x = 10 zeta(3)/(2 pi i)^3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QxEntry {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
}

impl QxEntry {
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Self {
        QxEntry { a, b, c }
    }
}

/// y-basis monodromy around z = 1/1024, acting on (y4, y3, y2, y1, y0), with
/// a = 5/6, b = 11/144, c = 8:
///   [ a^2       0  -a b       (1-a^2) x   -b^2/2    ]
///   [ -c^2 x/2  1  -a c x     c^2 x^2/2   -(1-a^2)x ]
///   [ -a c      0  1 - 2a^2   a c x       -a b      ]
///   [ 0         0  0          1           0         ]
///   [ -c^2/2    0  -a c       c^2 x / 2   a^2       ]
pub fn ex3_y_m1() -> Vec<Vec<QxEntry>> {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let z = || q(0, 1);
    let e = QxEntry::new;
    vec![
        vec![
            e(q(25, 36), z(), z()),
            e(z(), z(), z()),
            e(q(-55, 864), z(), z()),
            e(z(), q(11, 36), z()),
            e(q(-121, 41472), z(), z()),
        ],
        vec![
            e(z(), q(-32, 1), z()),
            e(q(1, 1), z(), z()),
            e(z(), q(-20, 3), z()),
            e(z(), z(), q(32, 1)),
            e(z(), q(-11, 36), z()),
        ],
        vec![
            e(q(-20, 3), z(), z()),
            e(z(), z(), z()),
            e(q(-7, 18), z(), z()),
            e(z(), q(20, 3), z()),
            e(q(-55, 864), z(), z()),
        ],
        vec![
            e(z(), z(), z()),
            e(z(), z(), z()),
            e(z(), z(), z()),
            e(q(1, 1), z(), z()),
            e(z(), z(), z()),
        ],
        vec![
            e(q(-32, 1), z(), z()),
            e(z(), z(), z()),
            e(q(-20, 3), z(), z()),
            e(z(), q(32, 1), z()),
            e(q(25, 36), z(), z()),
        ],
    ]
}

/// Generators of the GL4(Z) group used by the vector-reduction argument.
pub fn sp4_gen_a() -> [[i64; 4]; 4] {
    [[1, 0, 0, 0], [-1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
}

pub fn sp4_gen_b() -> [[i64; 4]; 4] {
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]]
}

pub fn sp4_gen_c() -> [[i64; 4]; 4] {
    [[1, 0, 4, -2], [0, 1, 2, 1], [0, 0, 1, 0], [0, 0, 0, 1]]
}

pub fn sp4_gen_gamma1() -> [[i64; 4]; 4] {
    [[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]
}

/// gamma0 = A * C * B.
pub fn sp4_gamma0() -> [[i64; 4]; 4] {
    [[1, 0, 4, 2], [-1, 1, -2, 1], [0, 0, 1, 1], [0, 0, 0, 1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_mul(a: &[[i64; 4]; 4], b: &[[i64; 4]; 4]) -> [[i64; 4]; 4] {
        let mut out = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for (k, row) in b.iter().enumerate() {
                    out[i][j] += a[i][k] * row[j];
                }
            }
        }
        out
    }

    #[test]
    fn acb_equals_gamma0() {
        let acb = mat_mul(&mat_mul(&sp4_gen_a(), &sp4_gen_c()), &sp4_gen_b());
        assert_eq!(acb, sp4_gamma0());
    }

    #[test]
    fn quintic_matrices_are_symplectic() {
        // t(g) J g = J with J = [[0,-E],[E,0]] in the (u3,u2,u1,u0) ordering.
        let j: Vec<Vec<i64>> = vec![
            vec![0, 0, -1, 0],
            vec![0, 0, 0, -1],
            vec![1, 0, 0, 0],
            vec![0, 1, 0, 0],
        ];
        for g in [quintic_m0(), quintic_m1()] {
            let mut tjg = vec![vec![0i64; 4]; 4];
            for (i, row) in tjg.iter_mut().enumerate() {
                for (jj, cell) in row.iter_mut().enumerate() {
                    let mut acc = 0;
                    for k in 0..4 {
                        for l in 0..4 {
                            acc += g[k][i] * j[k][l] * g[l][jj];
                        }
                    }
                    *cell = acc;
                }
            }
            assert_eq!(tjg, j);
        }
    }

    #[test]
    fn reordered_matrices_match_permutation_conjugation() {
        // Reordering (u3,u2,u1,u0) -> (u1,u0,u3,u2) is conjugation by the
        // permutation sending index i to perm[i].
        let perm = [2usize, 3, 0, 1];
        for (m, expect) in [
            (quintic_m0(), quintic_m0_reordered()),
            (quintic_m1(), quintic_m1_reordered()),
        ] {
            let mut conj = vec![vec![0i64; 4]; 4];
            for (i, row) in conj.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = m[perm[i]][perm[j]];
                }
            }
            assert_eq!(conj, expect);
        }
    }
}
