use alloc::vec::Vec;

use num_traits::Zero;

use super::schur::{eigen_order, schur};
use super::{c64, ComplexMatrix};
use crate::error::{Error, Result};

/// Relative width of the exclusion band around the contour `|z − c| = r`.
pub const DEFAULT_GAP_MARGIN: f64 = 1e-8;

/// Spectral projector for the eigenvalues inside the disk `|z − center| < radius`.
#[derive(Debug, Clone)]
pub struct SpectralCluster {
    pub center: c64,
    pub radius: f64,
    pub projector: ComplexMatrix,
    pub cluster_dim: usize,
    /// Full spectrum in canonical order.
    pub eigenvalues: Vec<c64>,
}

impl SpectralCluster {
    /// Eigenvalues outside the disk, in canonical order.
    pub fn outside(&self) -> impl Iterator<Item = &c64> {
        self.eigenvalues
            .iter()
            .filter(move |z| (**z - self.center).norm() >= self.radius)
    }
}

pub fn riesz_projector(m: &ComplexMatrix, center: c64, radius: f64) -> Result<SpectralCluster> {
    riesz_projector_with_margin(m, center, radius, DEFAULT_GAP_MARGIN)
}

/// The Riesz projector `−(2πi)⁻¹ ∮ (M − z)⁻¹ dz`, evaluated from an ordered
/// Schur form: with `T = [[T11, T12], [0, T22]]` the projector is
/// `U [[I, R], [0, 0]] U^H` where `T11 R − R T22 = T12`.
pub fn riesz_projector_with_margin(
    m: &ComplexMatrix,
    center: c64,
    radius: f64,
    margin: f64,
) -> Result<SpectralCluster> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(
            "contour radius must be positive and finite".into(),
        ));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::InvalidInput("gap margin must lie in [0, 1)".into()));
    }
    let mut s = schur(m)?;
    let mut eigenvalues = s.eigenvalues();
    eigenvalues.sort_by(eigen_order);

    let (lo, hi) = (radius * (1.0 - margin), radius * (1.0 + margin));
    for z in &eigenvalues {
        let d = (z - center).norm();
        if d >= lo && d <= hi {
            return Err(Error::GapViolation {
                distance: (d - radius).abs(),
                radius,
                margin,
            });
        }
    }

    let k = s.reorder(|z| (z - center).norm() < radius);
    let n = m.dim();
    let t = &s.t;
    let p = n - k;

    // R is k×p, stored column-major by columns of T22
    let mut r = ComplexMatrix::zeros(n);
    for j in 0..p {
        let tjj = t[(k + j, k + j)];
        let mut rhs: Vec<c64> = (0..k).map(|i| t[(i, k + j)]).collect();
        for l in 0..j {
            let c = t[(k + l, k + j)];
            if c.is_zero() {
                continue;
            }
            for (i, x) in rhs.iter_mut().enumerate() {
                *x += r[(i, k + l)] * c;
            }
        }
        for i in (0..k).rev() {
            let mut acc = rhs[i];
            for l in i + 1..k {
                acc -= t[(i, l)] * r[(l, k + j)];
            }
            r[(i, k + j)] = acc / (t[(i, i)] - tjj);
        }
    }
    let mut pt = ComplexMatrix::zeros(n);
    for i in 0..k {
        pt[(i, i)] = c64::new(1.0, 0.0);
        for j in k..n {
            pt[(i, j)] = r[(i, j)];
        }
    }
    let projector = &(&s.u * &pt) * &s.u.adjoint();
    if !projector.is_finite() {
        return Err(Error::NumericalFailure {
            reason: "spectral projector overflowed (clusters too close)".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(SpectralCluster {
        center,
        radius,
        projector,
        cluster_dim: k,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one() -> c64 {
        c64::new(1.0, 0.0)
    }

    #[test]
    fn diagonal_projector() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let c = riesz_projector(&m, one(), 0.2).unwrap();
        assert_eq!(c.cluster_dim, 1);
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!((&c.projector - &want).max_abs() < 1e-15);
    }

    #[test]
    fn jordan_block_whole_spectrum() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let c = riesz_projector(&m, one(), 0.2).unwrap();
        assert_eq!(c.cluster_dim, 2);
        assert!((&c.projector - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn stochastic_rank_one_projector() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.7, 0.3], vec![0.1, 0.9]]).unwrap();
        let c = riesz_projector(&m, one(), 0.1).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![0.25, 0.75], vec![0.25, 0.75]]).unwrap();
        assert!(
            (&c.projector - &want).max_abs() < 1e-14,
            "{:?}",
            c.projector
        );
    }

    #[test]
    fn gap_violation_reports_distance() {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap();
        match riesz_projector(&m, one(), 0.5) {
            Err(Error::GapViolation { distance, .. }) => assert!(distance < 1e-15),
            other => panic!("expected gap violation, got {:?}", other),
        }
    }
}
