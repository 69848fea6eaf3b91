//! Dense matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005). Degree is picked from the 1-norm; for
//! `‖A‖₁ > θ₁₃` the matrix is scaled by `2^{-s}` and the result squared `s` times.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::linalg::{norm_one, scaled};

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// `exp(a)` for a square matrix with finite entries.
pub fn expm(a: &Mat<f64>) -> Mat<f64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = norm_one(a);
    if norm == 0.0 {
        return Mat::identity(n, n);
    }
    let (u, v, squarings) = if norm <= THETA_3 {
        let (u, v) = pade_low(a, &PADE_3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = pade_low(a, &PADE_5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = pade_low(a, &PADE_7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = pade_low(a, &PADE_9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let a = scaled(a, 0.5f64.powi(s));
        let (u, v) = pade_13(&a);
        (u, v, s)
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Odd part `U` and even part `V` of the degree-`m` numerator, `m ∈ {3,5,7,9}`.
fn pade_low(a: &Mat<f64>, b: &[f64]) -> (Mat<f64>, Mat<f64>) {
    let n = a.nrows();
    let ident = Mat::<f64>::identity(n, n);
    let a2 = a * a;
    let mut even_pow = ident.clone();
    let mut u_inner = scaled(&ident, b[1]);
    let mut v = scaled(&ident, b[0]);
    for k in 1..b.len() / 2 {
        even_pow = &even_pow * &a2;
        u_inner = &u_inner + scaled(&even_pow, b[2 * k + 1]);
        v = &v + scaled(&even_pow, b[2 * k]);
    }
    (a * &u_inner, v)
}

fn pade_13(a: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
    let b = &PADE_13;
    let n = a.nrows();
    let ident = Mat::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u_lo = scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&ident, b[1]);
    let u = a * (&a6 * &u_hi + u_lo);
    let v_hi = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v_lo = scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&ident, b[0]);
    let v = &a6 * &v_hi + v_lo;
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, max_abs};

    fn taylor(a: &Mat<f64>, terms: usize) -> Mat<f64> {
        let n = a.nrows();
        let mut sum = Mat::<f64>::identity(n, n);
        let mut term = Mat::<f64>::identity(n, n);
        for k in 1..terms {
            term = scaled(&(&term * a), 1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        let e = expm(&Mat::zeros(5, 5));
        assert_eq!(e, Mat::<f64>::identity(5, 5));
    }

    #[test]
    fn scalar_exponentials_at_every_degree() {
        for x in [1e-3, 0.1, 0.5, 1.5, 3.0, 20.0, -7.0] {
            let a = Mat::from_fn(1, 1, |_, _| x);
            let e = expm(&a)[(0, 0)];
            assert!(((e - x.exp()) / x.exp()).abs() < 1e-13, "x={x} e={e}");
        }
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, t], [-t, 0]]) = [[cos t, sin t], [-sin t, cos t]]
        for t in [0.01, 0.7, 2.0, 9.0] {
            let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => t,
                (1, 0) => -t,
                _ => 0.0,
            });
            let e = expm(&a);
            let want = Mat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) | (1, 1) => t.cos(),
                (0, 1) => t.sin(),
                _ => -t.sin(),
            });
            assert!(max_abs(&(&e - &want)) < 1e-13, "t={t}");
        }
    }

    #[test]
    fn matches_taylor_on_moderate_matrix() {
        let a = Mat::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.1 - 0.2);
        let e = expm(&a);
        let t = taylor(&a, 40);
        assert!(frobenius(&(&e - &t)) / frobenius(&t) < 1e-13);
    }
}
