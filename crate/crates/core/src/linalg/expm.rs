//! Matrix exponential: scaling and squaring with the degree-13 Padé
//! approximant (Higham, SIAM J. Matrix Anal. Appl. 26, 2005).

use super::lu::Lu;
use super::ComplexMatrix;
use crate::error::{Error, Result};

const THETA_13: f64 = 5.371_920_351_148_152;

const B: [f64; 14] = [
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

fn lin(terms: &[(f64, &ComplexMatrix)]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(terms[0].1.dim());
    for (c, m) in terms {
        out = &out + &m.scale_real(*c);
    }
    out
}

pub fn matrix_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.dim();
    let norm = a.norm_one();
    let s = if norm > THETA_13 {
        libm::ceil(libm::log2(norm / THETA_13)) as i32
    } else {
        0
    };
    let a = a.scale_real(libm::exp2(-s as f64));

    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * &lin(&[(B[13], &a6), (B[11], &a4), (B[9], &a2)]);
    let u_inner = &u_inner + &lin(&[(B[7], &a6), (B[5], &a4), (B[3], &a2), (B[1], &id)]);
    let u = &a * &u_inner;
    let v = &a6 * &lin(&[(B[12], &a6), (B[10], &a4), (B[8], &a2)]);
    let v = &v + &lin(&[(B[6], &a6), (B[4], &a4), (B[2], &a2), (B[0], &id)]);

    let mut r = Lu::new(&(&v - &u))?.solve(&(&v + &u));
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NumericalFailure {
            reason: "matrix exponential overflowed".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(r)
}
