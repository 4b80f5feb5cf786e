//! Complex Schur form `A = U T U^H` by Hessenberg reduction and shifted QR.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{Float, Zero};

use super::{c64, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Schur {
    /// Upper triangular factor.
    pub t: ComplexMatrix,
    /// Unitary factor.
    pub u: ComplexMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<c64> {
        (0..self.t.dim()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swaps the adjacent diagonal entries `k` and `k + 1` of `T` by a
    /// unitary similarity, updating `U`.
    pub fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.dim();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        if t11 == t22 {
            return;
        }
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        rotate_rows(&mut self.t, k, c, s, k, n);
        rotate_cols(&mut self.t, k, c, s, 0, k + 2);
        rotate_cols(&mut self.u, k, c, s, 0, n);
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        self.t[(k + 1, k)] = c64::zero();
    }

    /// Reorders `T` so that the entries with `select(λ)` come first, keeping
    /// the relative order inside each group. Returns the number selected.
    pub fn reorder<F: Fn(c64) -> bool>(&mut self, select: F) -> usize {
        let n = self.t.dim();
        let mut placed = 0;
        for i in 0..n {
            if select(self.t[(i, i)]) {
                let mut k = i;
                while k > placed {
                    self.swap_adjacent(k - 1);
                    k -= 1;
                }
                placed += 1;
            }
        }
        placed
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with real `c` such that
/// `G (f, g)ᵀ = (r, 0)ᵀ`.
pub(crate) fn givens(f: c64, g: c64) -> (f64, c64) {
    if g.is_zero() {
        return (1.0, c64::zero());
    }
    if f.is_zero() {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let norm = fa.hypot(g.norm());
    (fa / norm, (f / fa) * g.conj() / norm)
}

/// Applies `G` to rows `k, k+1` on columns `c0..c1`.
fn rotate_rows(m: &mut ComplexMatrix, k: usize, c: f64, s: c64, c0: usize, c1: usize) {
    for j in c0..c1 {
        let x = m[(k, j)];
        let y = m[(k + 1, j)];
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = y * c - s.conj() * x;
    }
}

/// Applies `G^H` from the right to columns `k, k+1` on rows `r0..r1`.
fn rotate_cols(m: &mut ComplexMatrix, k: usize, c: f64, s: c64, r0: usize, r1: usize) {
    for i in r0..r1 {
        let x = m[(i, k)];
        let y = m[(i, k + 1)];
        m[(i, k)] = x * c + s.conj() * y;
        m[(i, k + 1)] = y * c - s * x;
    }
}

fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut u = ComplexMatrix::identity(n);
    let mut v: Vec<c64> = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(2) {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>();
        if tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.is_zero() {
            c64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        v.clear();
        v.extend((k + 1..n).map(|i| h[(i, k)]));
        v[0] += phase * norm_x;
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let o = k + 1;
        for j in 0..n {
            let s = (o..n).map(|i| v[i - o].conj() * h[(i, j)]).sum::<c64>() * tau;
            for i in o..n {
                h[(i, j)] -= v[i - o] * s;
            }
        }
        for i in 0..n {
            let s = (o..n).map(|j| h[(i, j)] * v[j - o]).sum::<c64>() * tau;
            for j in o..n {
                h[(i, j)] -= s * v[j - o].conj();
            }
            let s = (o..n).map(|j| u[(i, j)] * v[j - o]).sum::<c64>() * tau;
            for j in o..n {
                u[(i, j)] -= s * v[j - o].conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = c64::zero();
        }
    }
    (h, u)
}

fn wilkinson_shift(a: c64, b: c64, c: c64, d: c64) -> c64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mu1 = (a + d) * 0.5 + disc;
    let mu2 = (a + d) * 0.5 - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

pub fn schur(a: &ComplexMatrix) -> Result<Schur> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.dim();
    let (mut t, mut u) = hessenberg(a);
    let anorm = a.frobenius_norm();
    let eps = f64::EPSILON;
    let small = f64::MIN_POSITIVE * (n as f64) / eps;
    let max_iter = 60 * n.max(1);
    let mut rot: Vec<(f64, c64)> = Vec::with_capacity(n);

    let mut hi = n.saturating_sub(1);
    let mut iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let mut diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if diag == 0.0 {
                diag = anorm;
            }
            if sub <= eps * diag || sub <= small {
                t[(l, l - 1)] = c64::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::NumericalFailure {
                reason: format!("QR iteration did not converge for eigenvalue {}", hi),
                residual: t[(hi, hi - 1)].norm(),
            });
        }
        let shift = if iter % 11 == 0 {
            t[(hi, hi)] + c64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0)
        } else if iter % 17 == 0 {
            t[(hi, hi)] + c64::new(0.0, 0.75 * t[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };

        for k in l..=hi {
            t[(k, k)] -= shift;
        }
        rot.clear();
        for k in l..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            rotate_rows(&mut t, k, c, s, k, n);
            t[(k + 1, k)] = c64::zero();
            rot.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rot[idx];
            rotate_cols(&mut t, k, c, s, 0, (k + 2).min(hi + 1));
            rotate_cols(&mut u, k, c, s, 0, n);
        }
        for k in l..=hi {
            t[(k, k)] += shift;
        }
    }
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = c64::zero();
        }
    }
    Ok(Schur { t, u })
}

/// Total order used for eigenvalue lists: `|λ|` descending, then `arg λ`
/// ascending.
pub fn eigen_order(a: &c64, b: &c64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then_with(|| a.arg().total_cmp(&b.arg()))
}

pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<c64>> {
    let mut ev = schur(a)?.eigenvalues();
    ev.sort_by(eigen_order);
    Ok(ev)
}

pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    Ok(schur(a)?
        .eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}
