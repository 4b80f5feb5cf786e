//! Inhomogeneous Markov chains driven by iid random stochastic matrices.

use alloc::vec::Vec;

use num_traits::Float;

use crate::ensemble::{Generator, MatrixEnsemble, Support};
use crate::error::{Error, Result};
use crate::linalg::{c64, singular_values, ComplexMatrix, ComplexVector};
use crate::products::{eta_infinity, ProductTrajectory};
use crate::rng::RngStream;
use crate::rrdo::{NormDescriptor, NormKind, Rrdo};

/// Default threshold for "strictly positive entries".
pub const DEFAULT_POSITIVE_EPS: f64 = 1e-9;
const ROW_SUM_TOL: f64 = 1e-12;
const ETA_TOL: f64 = 1e-14;

/// Row-stochastic matrix with exactly renormalized rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    /// Rows must be non-negative and sum to 1 within `1e-12`.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty stochastic matrix".into()));
        }
        let mut entries = Vec::with_capacity(d * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::InvalidInput(alloc::format!(
                    "row {} has entry {}",
                    i,
                    x
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidInput(alloc::format!(
                    "row {} sums to {}",
                    i,
                    s
                )));
            }
            entries.extend(row.iter().map(|x| x / s));
        }
        Ok(Self { dim: d, entries })
    }

    /// Real non-negative matrix with rows summing to 1.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let d = m.dim();
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::with_capacity(d);
            for j in 0..d {
                let z = m[(i, j)];
                if z.im.abs() > ROW_SUM_TOL {
                    return Err(Error::InvalidInput("stochastic matrix must be real".into()));
                }
                row.push(z.re);
            }
            rows.push(row);
        }
        Self::new(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let data = self.entries.iter().map(|&x| c64::new(x, 0.0)).collect();
        ComplexMatrix::from_raw(self.dim, data)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `ψ_S = d^{-1/2}(1,…,1)` with the max-row-sum norm.
pub fn as_rrdo(m: &StochasticMatrix) -> Rrdo {
    Rrdo::new(
        m.to_matrix(),
        ComplexVector::uniform(m.dim),
        NormDescriptor::max_row_sum(),
    )
    .expect("stochastic matrices fix the uniform vector and contract the max-row-sum norm")
}

/// True iff every entry is at least `eps`.
pub fn positive_entries(m: &StochasticMatrix, eps: f64) -> bool {
    m.min_entry() >= eps
}

#[derive(Debug, Clone)]
pub struct ChainResult {
    pub n: usize,
    pub phi_n: ComplexMatrix,
    /// Arithmetic mean of the rows of `Φ_n`.
    pub limiting_row: Vec<f64>,
    pub eta_inf: ComplexVector,
    /// Second singular value of `Φ_n`.
    pub rank_one_residual: f64,
    /// Steps taken until `η` settled.
    pub eta_steps: usize,
}

fn check_stochastic_ensemble(e: &MatrixEnsemble) -> Result<()> {
    if e.norm().kind() != NormKind::MaxRowSum {
        return Err(Error::HypothesisViolated(
            "ensemble is not built from stochastic matrices".into(),
        ));
    }
    match e.support() {
        Support::Finite { atoms, .. } => {
            let mut any_positive = false;
            for a in atoms {
                let s = StochasticMatrix::from_matrix(a.rrdo.matrix()).map_err(|_| {
                    Error::HypothesisViolated("ensemble atom is not a stochastic matrix".into())
                })?;
                any_positive |= a.weight > 0.0 && positive_entries(&s, DEFAULT_POSITIVE_EPS);
            }
            if !any_positive {
                return Err(Error::HypothesisViolated(
                    "no atom with strictly positive entries carries positive weight".into(),
                ));
            }
            Ok(())
        }
        Support::Parametric(Generator::StochasticDirichlet { .. }) => Ok(()),
        Support::Parametric(_) => Err(Error::HypothesisViolated(
            "parametric ensemble is not a stochastic family".into(),
        )),
    }
}

/// Runs `Φ_n = M_n ⋯ M_1` for `n` steps, then continues the same
/// trajectory until `η` settles.
pub fn run_chain(e: &MatrixEnsemble, n: usize, rng: RngStream) -> Result<ChainResult> {
    run_chain_with(e, n, rng, |_| {})
}

/// [`run_chain`], calling `observe` after each of the first `n` steps.
pub fn run_chain_with<F>(
    e: &MatrixEnsemble,
    n: usize,
    rng: RngStream,
    mut observe: F,
) -> Result<ChainResult>
where
    F: FnMut(&ProductTrajectory),
{
    if n == 0 {
        return Err(Error::InvalidInput(
            "chain length must be at least 1".into(),
        ));
    }
    check_stochastic_ensemble(e)?;
    let d = e.dim();
    let mut t = ProductTrajectory::new(e, rng);
    for _ in 0..n {
        t.step(e)?;
        observe(&t);
    }
    let phi_n = t.phi_n().clone();
    let rank_one_residual = if d > 1 {
        singular_values(&phi_n)[1]
    } else {
        0.0
    };
    let mut limiting_row = alloc::vec![0.0; d];
    for i in 0..d {
        for (j, p) in limiting_row.iter_mut().enumerate() {
            *p += phi_n[(i, j)].re;
        }
    }
    limiting_row.iter_mut().for_each(|p| *p /= d as f64);
    let eta_inf = eta_infinity(&mut t, e, n + 100 * n.max(100), ETA_TOL)?;
    Ok(ChainResult {
        n,
        phi_n,
        limiting_row,
        eta_inf,
        rank_one_residual,
        eta_steps: t.n_steps(),
    })
}

/// Stationary distribution `η/√d` (real part).
pub fn pi_from_eta(eta: &ComplexVector) -> Vec<f64> {
    let s = (eta.len() as f64).sqrt();
    eta.as_slice().iter().map(|z| z.re / s).collect()
}
