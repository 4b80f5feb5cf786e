//! Reduced dynamics operators and their splitting `M = P + M_Q`.
//!
//! An RRDO is a square matrix `M` together with a unit vector `ψ_S` such that
//!
//! 1. `M` is a contraction for a named norm `|||·|||`, and
//! 2. `M ψ_S = ψ_S`.
//!
//! With `P₁` the spectral projector of `M` at eigenvalue 1, `ψ = P₁* ψ_S`
//! satisfies `⟨ψ_S, ψ⟩ = 1`. Setting `P = |ψ_S⟩⟨ψ|` and `Q = 𝟙 − P` gives
//! `M = P + Q M Q`, and the decaying part `M_Q = Q M Q` has spectral radius
//! below one exactly when 1 is the only eigenvalue of `M` on the unit circle
//! and it is simple (the class `ℳ_E`).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, inverse, operator_norm, riesz_projector, singular_values, spectral_radius, ComplexMatrix,
    ComplexVector, SpectralCluster,
};
use crate::rng::RngStream;

/// Invariance tolerance `‖M ψ_S − ψ_S‖`.
pub const INVARIANCE_TOL: f64 = 1e-10;
/// Relative slack on contraction inequalities.
pub const CONTRACTION_TOL: f64 = 1e-10;
/// Default radius of the eigenvalue-1 cluster.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Highest power inspected by the uniform-boundedness check.
pub const POWER_CHECK_MAX: u32 = 64;
/// Random probes used for reference-induced operator norms.
pub const DEFAULT_PROBES: usize = 64;

const PROBE_SEED: u64 = 0x5eed_0f_9209e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    EuclideanOperator,
    MaxRowSum,
    ReferenceInduced,
}

/// The norm under which condition (1) is certified.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDescriptor {
    kind: NormKind,
    reference: Option<ComplexVector>,
}

impl NormDescriptor {
    pub fn euclidean() -> Self {
        Self {
            kind: NormKind::EuclideanOperator,
            reference: None,
        }
    }

    pub fn max_row_sum() -> Self {
        Self {
            kind: NormKind::MaxRowSum,
            reference: None,
        }
    }

    /// `|||φ||| = ‖A‖` where `φ = (A ⊗ 𝟙) ψ_ref` on `ℂ^d ⊗ ℂ^d`.
    pub fn reference_induced(reference: ComplexVector) -> Result<Self> {
        let n = reference.len();
        let d = (n as f64).sqrt().round() as usize;
        if d == 0 || d * d != n {
            return Err(Error::InvalidInput(format!(
                "reference vector length {} is not a perfect square",
                n
            )));
        }
        Ok(Self {
            kind: NormKind::ReferenceInduced,
            reference: Some(reference),
        })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn reference(&self) -> Option<&ComplexVector> {
        self.reference.as_ref()
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            NormKind::EuclideanOperator => "euclidean-operator",
            NormKind::MaxRowSum => "max-row-sum",
            NormKind::ReferenceInduced => "reference-induced",
        }
    }

    /// `C` with `‖M^k‖₂ ≤ C` whenever `|||M^k||| ≤ 1`.
    fn equivalence_constant(&self, dim: usize) -> Result<f64> {
        Ok(match self.kind {
            NormKind::EuclideanOperator => 1.0,
            NormKind::MaxRowSum => (dim as f64).sqrt(),
            NormKind::ReferenceInduced => {
                let r = reshape(self.reference.as_ref().expect("reference present"));
                let r_inv = inverse(&r).map_err(|_| Error::ReferenceNotSeparating)?;
                (r.dim() as f64).sqrt() * operator_norm(&r) * operator_norm(&r_inv)
            }
        })
    }
}

/// Row-major reshape of a length-`d²` vector into a `d × d` matrix, so that
/// `(A ⊗ 𝟙) ψ` reshapes to `A · mat(ψ)`.
pub fn reshape(v: &ComplexVector) -> ComplexMatrix {
    let d = (v.len() as f64).sqrt().round() as usize;
    ComplexMatrix::from_raw(d, v.as_slice().to_vec())
}

/// Precomputed `mat(ψ_ref)⁻¹` for repeated reference-induced evaluations.
#[derive(Debug, Clone)]
pub struct ReferenceNorm {
    r_inv: ComplexMatrix,
}

impl ReferenceNorm {
    pub fn new(reference: &ComplexVector) -> Result<Self> {
        let r = reshape(reference);
        let smin = *singular_values(&r).last().expect("non-empty");
        if smin <= f64::EPSILON * operator_norm(&r) * r.dim() as f64 {
            return Err(Error::ReferenceNotSeparating);
        }
        let r_inv = inverse(&r).map_err(|_| Error::ReferenceNotSeparating)?;
        Ok(Self { r_inv })
    }

    pub fn eval(&self, phi: &ComplexVector) -> f64 {
        operator_norm(&(&reshape(phi) * &self.r_inv))
    }
}

/// Something `|||·|||` can be evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum Normed<'a> {
    Vector(&'a ComplexVector),
    Matrix(&'a ComplexMatrix),
}

/// Evaluates `|||·|||`. On matrices, the reference-induced norm is the
/// largest ratio `|||Mφ||| / |||φ|||` over the canonical basis plus
/// [`DEFAULT_PROBES`] seeded random probes, a lower bound for the induced norm.
pub fn triple_norm(target: Normed<'_>, norm: &NormDescriptor) -> Result<f64> {
    match (norm.kind, target) {
        (NormKind::EuclideanOperator, Normed::Vector(v)) => Ok(v.norm()),
        (NormKind::EuclideanOperator, Normed::Matrix(m)) => Ok(operator_norm(m)),
        (NormKind::MaxRowSum, Normed::Vector(v)) => Ok(v.norm_inf()),
        (NormKind::MaxRowSum, Normed::Matrix(m)) => Ok(m.norm_inf()),
        (NormKind::ReferenceInduced, t) => {
            let reference = norm.reference.as_ref().expect("reference present");
            let rn = ReferenceNorm::new(reference)?;
            match t {
                Normed::Vector(v) => {
                    check_dim(reference.len(), v.len())?;
                    Ok(rn.eval(v))
                }
                Normed::Matrix(m) => {
                    check_dim(reference.len(), m.dim())?;
                    let mut rng = RngStream::new(PROBE_SEED, 0);
                    Ok(probe_ratio(m, &rn, DEFAULT_PROBES, &mut rng))
                }
            }
        }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn random_unit(dim: usize, rng: &mut RngStream) -> ComplexVector {
    // Box–Muller gives rotation-invariant directions
    let mut data = Vec::with_capacity(dim);
    for _ in 0..dim {
        let u1 = 1.0 - rng.uniform();
        let u2 = rng.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let (s, c) = libm::sincos(2.0 * core::f64::consts::PI * u2);
        data.push(c64::new(r * c, r * s));
    }
    ComplexVector::from_raw(data).normalized()
}

fn probe_ratio(m: &ComplexMatrix, rn: &ReferenceNorm, probes: usize, rng: &mut RngStream) -> f64 {
    let d = m.dim();
    let mut best: f64 = 0.0;
    let candidates = (0..d).map(|k| ComplexVector::basis(d, k));
    let randoms: Vec<ComplexVector> = (0..probes).map(|_| random_unit(d, rng)).collect();
    for phi in candidates.chain(randoms) {
        let den = rn.eval(&phi);
        if den > 0.0 {
            best = best.max(rn.eval(&m.mul_vec(&phi)) / den);
        }
    }
    best
}

/// A candidate reduced dynamics operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Rrdo {
    matrix: ComplexMatrix,
    psi_s: ComplexVector,
    norm: NormDescriptor,
}

impl Rrdo {
    /// Validated constructor: `ψ_S` must be a unit vector fixed by `M`.
    pub fn new(matrix: ComplexMatrix, psi_s: ComplexVector, norm: NormDescriptor) -> Result<Self> {
        let r = Self::candidate(matrix, psi_s, norm)?;
        let res = r.invariance_residual();
        if res > INVARIANCE_TOL {
            return Err(Error::NotAnRrdo(format!("‖Mψ_S − ψ_S‖ = {:e}", res)));
        }
        Ok(r)
    }

    /// Builds the triple with only shape checks, for feeding [`validate_rrdo`].
    pub fn candidate(
        matrix: ComplexMatrix,
        psi_s: ComplexVector,
        norm: NormDescriptor,
    ) -> Result<Self> {
        check_dim(matrix.dim(), psi_s.len())?;
        if (psi_s.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "ψ_S must have unit norm, got {}",
                psi_s.norm()
            )));
        }
        if let Some(r) = norm.reference() {
            check_dim(matrix.dim(), r.len())?;
        }
        Ok(Self {
            matrix,
            psi_s,
            norm,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn psi_s(&self) -> &ComplexVector {
        &self.psi_s
    }

    pub fn norm(&self) -> &NormDescriptor {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn invariance_residual(&self) -> f64 {
        (&self.matrix.mul_vec(&self.psi_s) - &self.psi_s).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub norm: NormKind,
    pub invariance_residual: f64,
    /// `|||M|||`, exact or probe-based.
    pub contraction: f64,
    /// Largest `‖M^k‖₂` for `k ≤ 64`.
    pub max_power_norm: f64,
    /// Bound implied on `‖M^k‖₂` by the contraction property.
    pub power_bound: f64,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            format!(
                "valid ({:?}, |||M||| = {:.12}, invariance {:e})",
                self.norm, self.contraction, self.invariance_residual
            )
        } else {
            self.violations.join("; ")
        }
    }
}

/// Checks both defining conditions. Failures land in the report.
pub fn validate_rrdo(candidate: &Rrdo, probes: usize, rng_seed: u64) -> ValidationReport {
    let m = &candidate.matrix;
    let mut violations = Vec::new();
    let invariance_residual = candidate.invariance_residual();
    if invariance_residual > INVARIANCE_TOL {
        violations.push(format!("M ψ_S ≠ ψ_S (residual {:e})", invariance_residual));
    }

    let contraction = match candidate.norm.kind {
        NormKind::EuclideanOperator => operator_norm(m),
        NormKind::MaxRowSum => m.norm_inf(),
        NormKind::ReferenceInduced => {
            let reference = candidate.norm.reference().expect("reference present");
            match ReferenceNorm::new(reference) {
                Ok(rn) => {
                    let mut rng = RngStream::new(rng_seed, 0);
                    probe_ratio(m, &rn, probes.max(1), &mut rng)
                }
                Err(e) => {
                    violations.push(format!("{}", e));
                    f64::NAN
                }
            }
        }
    };
    if !(contraction <= 1.0 + CONTRACTION_TOL) {
        violations.push(format!(
            "not a contraction for the {} norm (|||M||| ≥ {:.12})",
            candidate.norm.name(),
            contraction
        ));
    }

    let power_bound = candidate
        .norm
        .equivalence_constant(m.dim())
        .unwrap_or(f64::NAN);
    let mut max_power_norm: f64 = 0.0;
    let mut pk = ComplexMatrix::identity(m.dim());
    for _ in 0..POWER_CHECK_MAX {
        pk = &pk * m;
        max_power_norm = max_power_norm.max(operator_norm(&pk));
    }
    if !(max_power_norm <= power_bound * (1.0 + 1e-9)) {
        violations.push(format!(
            "powers unbounded: max ‖M^k‖ = {:e} exceeds {:e} for k ≤ {}",
            max_power_norm, power_bound, POWER_CHECK_MAX
        ));
    }

    ValidationReport {
        norm: candidate.norm.kind,
        invariance_residual,
        contraction,
        max_power_norm,
        power_bound,
        violations,
    }
}

/// `M = P + M_Q` together with the eigenvalue-1 cluster.
#[derive(Debug, Clone)]
pub struct RrdoDecomposition {
    pub p1: SpectralCluster,
    /// `ψ = P₁* ψ_S`, normalized by `⟨ψ_S, ψ⟩ = 1`.
    pub psi: ComplexVector,
    /// `|ψ_S⟩⟨ψ|`
    pub p: ComplexMatrix,
    pub q: ComplexMatrix,
    pub m_q: ComplexMatrix,
    pub in_me: bool,
    pub sr_mq: f64,
}

impl RrdoDecomposition {
    pub fn cluster_dim(&self) -> usize {
        self.p1.cluster_dim
    }
}

pub fn decompose(r: &Rrdo, tol: f64) -> Result<RrdoDecomposition> {
    decompose_matrix(&r.matrix, &r.psi_s, tol)
}

pub(crate) fn decompose_matrix(
    m: &ComplexMatrix,
    psi_s: &ComplexVector,
    tol: f64,
) -> Result<RrdoDecomposition> {
    let p1 = riesz_projector(m, c64::new(1.0, 0.0), tol)?;
    if p1.cluster_dim == 0 {
        return Err(Error::NotAnRrdo(format!(
            "1 is not an eigenvalue within {:e}",
            tol
        )));
    }
    let psi = p1.projector.adjoint_mul_vec(psi_s);
    let p = ComplexMatrix::outer(psi_s, &psi);
    let q = &ComplexMatrix::identity(m.dim()) - &p;
    let m_q = &(&q * m) * &q;
    let sr_mq = spectral_radius(&m_q)?;
    let in_me = p1.cluster_dim == 1 && sr_mq < 1.0 - tol;
    Ok(RrdoDecomposition {
        p1,
        psi,
        p,
        q,
        m_q,
        in_me,
        sr_mq,
    })
}
