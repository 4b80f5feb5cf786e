use alloc::vec::Vec;

use num_traits::{Float, Zero};

use super::{c64, ComplexMatrix};

/// Householder QR of a square matrix. `R` has a real non-negative diagonal.
#[derive(Debug, Clone)]
pub struct Qr {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

pub fn householder_qr(a: &ComplexMatrix) -> Qr {
    let n = a.dim();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v: Vec<c64> = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        let norm_x = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.is_zero() {
            c64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        v.clear();
        v.extend((k..n).map(|i| r[(i, k)]));
        v[0] += phase * norm_x;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // R <- (I - tau v v^H) R
        for j in k..n {
            let s: c64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum::<c64>() * tau;
            for i in k..n {
                r[(i, j)] -= v[i - k] * s;
            }
        }
        // Q <- Q (I - tau v v^H)
        for i in 0..n {
            let s: c64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum::<c64>() * tau;
            for j in k..n {
                q[(i, j)] -= s * v[j - k].conj();
            }
        }
        for i in k + 1..n {
            r[(i, k)] = c64::zero();
        }
    }
    // make diag(R) real and non-negative
    for k in 0..n {
        let d = r[(k, k)];
        let m = d.norm();
        if m == 0.0 {
            continue;
        }
        let ph = d / m;
        r[(k, k)] = c64::new(m, 0.0);
        for j in k + 1..n {
            r[(k, j)] = r[(k, j)] * ph.conj();
        }
        for i in 0..n {
            q[(i, k)] = q[(i, k)] * ph;
        }
    }
    Qr { q, r }
}
