//! Product processes driven by an iid ensemble.
//!
//! For draws `M_k = M(ω_k)` with splittings `M_k = |ψ_S⟩⟨ψ_k| + M_{Q,k}`:
//!
//! * forward product `Ψ_n = M_1 ⋯ M_n = |ψ_S⟩⟨θ_n| + M_{Q,1} ⋯ M_{Q,n}`,
//!   where `θ_1 = ψ_1` and `θ_{n+1} = M_{n+1}* θ_n`;
//! * reverse product `Φ_n = M_n ⋯ M_1 = |ψ_S⟩⟨η_n| + M_{Q,n} ⋯ M_{Q,1}`,
//!   where `η_n = Σ_{k<n} (M_{Q,k} ⋯ M_{Q,1})* ψ_{k+1}`.
//!
//! Both products of decaying parts are kept as a normalized matrix times a
//! log-scale so their norms remain measurable far below `e^{−745}`.

use alloc::vec::Vec;

use num_traits::Float;

use crate::ensemble::{Draw, MatrixEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, householder_qr, operator_norm, singular_values, ComplexMatrix, ComplexVector,
};
use crate::rng::RngStream;
use crate::stats::{batch_means_std_error, fit_line, CompensatedArray};

/// Floor used in place of `ln 0`.
pub const LOG_FLOOR: f64 = -745.0;
/// Consecutive small increments required by [`eta_infinity`].
pub const ETA_PATIENCE: usize = 10;
const BATCHES: usize = 50;

/// `G · e^{s}` with `‖G‖_F = 1`, or exactly zero.
#[derive(Debug, Clone)]
pub struct LogScaledMatrix {
    g: ComplexMatrix,
    log_scale: f64,
    zero: bool,
}

impl LogScaledMatrix {
    pub fn identity(d: usize) -> Self {
        let g = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
        Self {
            g,
            log_scale: 0.5 * (d as f64).ln(),
            zero: false,
        }
    }

    fn renormalize(&mut self) {
        let f = self.g.frobenius_norm();
        if f == 0.0 {
            self.zero = true;
        } else {
            self.g = self.g.scale_real(1.0 / f);
            self.log_scale += f.ln();
        }
    }

    pub fn mul_right(&mut self, m: &ComplexMatrix) {
        if !self.zero {
            self.g = &self.g * m;
            self.renormalize();
        }
    }

    pub fn mul_left(&mut self, m: &ComplexMatrix) {
        if !self.zero {
            self.g = m * &self.g;
            self.renormalize();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `ln ‖·‖` in the Euclidean operator norm; `-∞` when exactly zero.
    pub fn log_norm(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.log_scale + operator_norm(&self.g).ln()
        }
    }

    /// The product itself (entries may underflow to zero).
    pub fn value(&self) -> ComplexMatrix {
        if self.zero {
            ComplexMatrix::zeros(self.g.dim())
        } else {
            self.g.scale_real(self.log_scale.exp())
        }
    }

    /// `(G e^s)* v`
    pub fn adjoint_mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        if self.zero {
            return ComplexVector::zeros(v.len());
        }
        self.g
            .adjoint_mul_vec(v)
            .scale(c64::new(self.log_scale.exp(), 0.0))
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub n: usize,
    pub atom: Option<usize>,
    /// `ln ‖M_{Q,1} ⋯ M_{Q,n}‖`, floored at −745.
    pub log_mq_norm: f64,
    pub theta: ComplexVector,
    pub eta: ComplexVector,
    /// `‖η_n − η_{n−1}‖`
    pub eta_increment: f64,
}

/// One realization of the forward and reverse processes.
#[derive(Debug, Clone)]
pub struct ProductTrajectory {
    n_steps: usize,
    psi_s: ComplexVector,
    psi_n: ComplexMatrix,
    phi_n: ComplexMatrix,
    theta_n: Option<ComplexVector>,
    eta_n: ComplexVector,
    mq_forward: LogScaledMatrix,
    mq_reverse: LogScaledMatrix,
    mq_product_norm_log: Vec<f64>,
    c0_observed: f64,
    exact_annihilation: bool,
    last_eta_increment: f64,
    small_increments: usize,
    history: Option<Vec<Draw>>,
    rng: RngStream,
}

impl ProductTrajectory {
    /// `Ψ₀ = Φ₀ = 𝟙`, `η₀ = 0`.
    pub fn new(e: &MatrixEnsemble, rng: RngStream) -> Self {
        let d = e.dim();
        Self {
            n_steps: 0,
            psi_s: e.psi_s().clone(),
            psi_n: ComplexMatrix::identity(d),
            phi_n: ComplexMatrix::identity(d),
            theta_n: None,
            eta_n: ComplexVector::zeros(d),
            mq_forward: LogScaledMatrix::identity(d),
            mq_reverse: LogScaledMatrix::identity(d),
            mq_product_norm_log: Vec::new(),
            c0_observed: 1.0,
            exact_annihilation: false,
            last_eta_increment: f64::INFINITY,
            small_increments: 0,
            history: None,
            rng,
        }
    }

    /// Keeps every draw so products can be recomputed independently.
    pub fn with_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    /// Draws `M(ω_{n+1})` and advances every process by one step.
    pub fn step(&mut self, e: &MatrixEnsemble) -> Result<StepRecord> {
        let draw = e.draw(&mut self.rng)?;
        Ok(self.apply(draw))
    }

    /// Advances with a given draw.
    pub fn apply(&mut self, draw: Draw) -> StepRecord {
        let m = &draw.matrix;
        self.psi_n = &self.psi_n * m;
        self.phi_n = m * &self.phi_n;
        self.theta_n = Some(match &self.theta_n {
            None => draw.psi.clone(),
            Some(t) => m.adjoint_mul_vec(t),
        });
        let inc = self.mq_reverse.adjoint_mul_vec(&draw.psi);
        let eta_increment = inc.norm();
        self.eta_n.add_assign(&inc);
        self.mq_reverse.mul_left(&draw.m_q);
        self.mq_forward.mul_right(&draw.m_q);

        let mut log_mq_norm = self.mq_forward.log_norm();
        if log_mq_norm < LOG_FLOOR && self.mq_forward.is_zero() {
            self.exact_annihilation = true;
            log_mq_norm = LOG_FLOOR;
        }
        self.mq_product_norm_log.push(log_mq_norm);
        // ‖P(ω)‖ = ‖ψ(ω)‖ also bounds C₀ from below
        self.c0_observed = self
            .c0_observed
            .max(operator_norm(&self.psi_n))
            .max(operator_norm(&self.phi_n))
            .max(draw.psi.norm());
        self.last_eta_increment = eta_increment;
        self.n_steps += 1;

        let atom = draw.atom;
        if let Some(h) = self.history.as_mut() {
            h.push(draw);
        }
        StepRecord {
            n: self.n_steps,
            atom,
            log_mq_norm,
            theta: self.theta_n.clone().expect("set above"),
            eta: self.eta_n.clone(),
            eta_increment,
        }
    }

    pub fn run(&mut self, e: &MatrixEnsemble, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step(e)?;
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn psi_s(&self) -> &ComplexVector {
        &self.psi_s
    }

    pub fn psi_n(&self) -> &ComplexMatrix {
        &self.psi_n
    }

    pub fn phi_n(&self) -> &ComplexMatrix {
        &self.phi_n
    }

    pub fn theta_n(&self) -> Option<&ComplexVector> {
        self.theta_n.as_ref()
    }

    pub fn eta_n(&self) -> &ComplexVector {
        &self.eta_n
    }

    pub fn mq_product_norm_log(&self) -> &[f64] {
        &self.mq_product_norm_log
    }

    /// `M_{Q,1} ⋯ M_{Q,n}`
    pub fn mq_forward(&self) -> &LogScaledMatrix {
        &self.mq_forward
    }

    /// `M_{Q,n} ⋯ M_{Q,1}`
    pub fn mq_reverse(&self) -> &LogScaledMatrix {
        &self.mq_reverse
    }

    pub fn c0_observed(&self) -> f64 {
        self.c0_observed
    }

    pub fn exact_annihilation(&self) -> bool {
        self.exact_annihilation
    }

    pub fn last_eta_increment(&self) -> f64 {
        self.last_eta_increment
    }

    pub fn history(&self) -> Option<&[Draw]> {
        self.history.as_deref()
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    /// Singular values of `Φ_n` past the first.
    pub fn phi_trailing_singular_values(&self) -> Vec<f64> {
        singular_values(&self.phi_n)[1..].to_vec()
    }
}

/// `‖Ψ_n − |ψ_S⟩⟨θ_n| − M_{Q,1}⋯M_{Q,n}‖`
pub fn check_decomposition(t: &ProductTrajectory) -> Result<f64> {
    let theta = t
        .theta_n()
        .ok_or_else(|| Error::InvalidInput("trajectory has no steps".into()))?;
    let rhs = &ComplexMatrix::outer(&t.psi_s, theta) + &t.mq_forward.value();
    Ok(operator_norm(&(&t.psi_n - &rhs)))
}

/// `‖Φ_n − |ψ_S⟩⟨η_n| − M_{Q,n}⋯M_{Q,1}‖`
pub fn check_reverse_decomposition(t: &ProductTrajectory) -> Result<f64> {
    if t.n_steps == 0 {
        return Err(Error::InvalidInput("trajectory has no steps".into()));
    }
    let rhs = &ComplexMatrix::outer(&t.psi_s, &t.eta_n) + &t.mq_reverse.value();
    Ok(operator_norm(&(&t.phi_n - &rhs)))
}

/// What a Cesàro mean averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesaroTarget {
    Theta,
    PsiProduct,
}

#[derive(Debug, Clone)]
pub struct CesaroResult {
    pub n: usize,
    /// Entries of the averaged vector or matrix (row-major).
    pub mean: Vec<c64>,
    /// Batch-means standard error of the real part of each entry.
    pub std_error: Vec<f64>,
}

impl CesaroResult {
    pub fn as_vector(&self) -> ComplexVector {
        ComplexVector::from_raw(self.mean.clone())
    }

    pub fn as_matrix(&self) -> ComplexMatrix {
        let d = (self.mean.len() as f64).sqrt().round() as usize;
        ComplexMatrix::from_raw(d, self.mean.clone())
    }
}

/// `N⁻¹ Σ_{n=1}^N θ_n` (or `Ψ_n`) along one trajectory, with compensated
/// summation.
pub fn cesaro(
    e: &MatrixEnsemble,
    n: usize,
    target: CesaroTarget,
    rng: RngStream,
) -> Result<CesaroResult> {
    cesaro_with(e, n, target, rng, |_, _| {})
}

/// [`cesaro`], calling `observe` after every step.
pub fn cesaro_with<F>(
    e: &MatrixEnsemble,
    n: usize,
    target: CesaroTarget,
    rng: RngStream,
    mut observe: F,
) -> Result<CesaroResult>
where
    F: FnMut(&StepRecord, &ProductTrajectory),
{
    if n == 0 {
        return Err(Error::InvalidInput(
            "Cesàro length must be at least 1".into(),
        ));
    }
    let d = e.dim();
    let len = match target {
        CesaroTarget::Theta => d,
        CesaroTarget::PsiProduct => d * d,
    };
    let mut acc = CompensatedArray::new(len);
    let mut series: Vec<Vec<f64>> = (0..len).map(|_| Vec::with_capacity(n)).collect();
    let mut t = ProductTrajectory::new(e, rng);
    for _ in 0..n {
        let rec = t.step(e)?;
        let slice: &[c64] = match target {
            CesaroTarget::Theta => rec.theta.as_slice(),
            CesaroTarget::PsiProduct => t.psi_n.as_slice(),
        };
        acc.add(slice);
        for (s, z) in series.iter_mut().zip(slice) {
            s.push(z.re);
        }
        observe(&rec, &t);
    }
    let std_error = series
        .iter()
        .map(|s| batch_means_std_error(s, BATCHES))
        .collect();
    Ok(CesaroResult {
        n,
        mean: acc.mean(),
        std_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Fitted rate, present only when `r_squared ≥ 0.9`.
    pub alpha_hat: Option<f64>,
    pub slope: f64,
    pub c_hat: f64,
    pub onset_n0: usize,
    pub r_squared: f64,
    pub window: usize,
    pub exact_annihilation: bool,
}

pub const DECAY_R2_MIN: f64 = 0.9;
const FLAT_SPREAD: f64 = 1e-9;

/// Least-squares line through `(k, ln‖M_{Q,1}⋯M_{Q,k}‖)` over the trailing
/// `window` steps (default: the trailing half).
pub fn decay_fit(t: &ProductTrajectory, window: Option<usize>) -> Result<DecayFit> {
    decay_fit_series(&t.mq_product_norm_log, window, t.exact_annihilation)
}

/// [`decay_fit`] on an arbitrary log-norm series indexed from `k = 1`.
pub fn decay_fit_series(
    ys: &[f64],
    window: Option<usize>,
    exact_annihilation: bool,
) -> Result<DecayFit> {
    let n = ys.len();
    let window = window.unwrap_or(n / 2);
    if window < 2 || n < 2 * window {
        return Err(Error::InvalidInput(alloc::format!(
            "decay fit needs n ≥ 2·window with window ≥ 2 (n = {}, window = {})",
            n,
            window
        )));
    }
    let xs: Vec<f64> = (n - window + 1..=n).map(|k| k as f64).collect();
    let tail: Vec<f64> = ys[n - window..].iter().map(|&y| y.max(LOG_FLOOR)).collect();
    let mut fit = fit_line(&xs, &tail).expect("window ≥ 2 with distinct abscissae");
    let spread = tail.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - tail.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if spread <= FLAT_SPREAD {
        // rounding noise on a flat series
        fit.r_squared = 0.0;
    }
    let max_resid = xs
        .iter()
        .zip(&tail)
        .map(|(x, y)| y - (fit.intercept + fit.slope * x))
        .fold(0.0, f64::max);
    let ln_c = fit.intercept + max_resid;
    let above = |k: usize| ys[k - 1].max(LOG_FLOOR) > ln_c + fit.slope * k as f64 + 1e-12;
    let onset_n0 = (1..=n).rev().find(|&k| above(k)).map_or(1, |k| k + 1);
    let alpha_hat = (fit.r_squared >= DECAY_R2_MIN).then_some(-fit.slope);
    Ok(DecayFit {
        alpha_hat,
        slope: fit.slope,
        c_hat: ln_c.exp(),
        onset_n0,
        r_squared: fit.r_squared,
        window,
        exact_annihilation,
    })
}

#[derive(Debug, Clone)]
pub enum ForwardLimit {
    Converged {
        limit: ComplexMatrix,
        /// `|ψ_S⟩⟨ψ|` when `ψ(ω)` does not depend on `ω`.
        rank_one: Option<ComplexMatrix>,
        sup_deviation: f64,
    },
    Fluctuating {
        sup_deviation: f64,
    },
}

impl ForwardLimit {
    pub fn is_converged(&self) -> bool {
        matches!(self, ForwardLimit::Converged { .. })
    }

    pub fn sup_deviation(&self) -> f64 {
        match self {
            ForwardLimit::Converged { sup_deviation, .. }
            | ForwardLimit::Fluctuating { sup_deviation } => *sup_deviation,
        }
    }
}

/// Declares convergence of `Ψ_n` when `sup ‖Ψ_n − Ψ_N‖` over the trailing
/// quarter is at most `tol`.
pub fn forward_limit(
    e: &MatrixEnsemble,
    n: usize,
    tol: f64,
    rng: RngStream,
) -> Result<ForwardLimit> {
    forward_limit_with(e, n, tol, rng, |_, _| {})
}

/// [`forward_limit`], calling `observe` after every step.
pub fn forward_limit_with<F>(
    e: &MatrixEnsemble,
    n: usize,
    tol: f64,
    rng: RngStream,
    mut observe: F,
) -> Result<ForwardLimit>
where
    F: FnMut(&StepRecord, &ProductTrajectory),
{
    if n < 8 {
        return Err(Error::InvalidInput(
            "forward_limit needs at least 8 steps".into(),
        ));
    }
    let mut t = ProductTrajectory::new(e, rng);
    let start = n - n / 4;
    let mut tail = Vec::with_capacity(n / 4 + 1);
    for k in 1..=n {
        let rec = t.step(e)?;
        observe(&rec, &t);
        if k >= start {
            tail.push(t.psi_n.clone());
        }
    }
    let fit = decay_fit(&t, None)?;
    if fit.alpha_hat.map_or(true, |a| a <= 0.0) && !t.exact_annihilation {
        return Err(Error::HypothesisViolated(alloc::format!(
            "M_Q products do not decay (slope {:.3e}, r² {:.3})",
            fit.slope,
            fit.r_squared
        )));
    }
    let last = t.psi_n.clone();
    let sup_deviation = tail
        .iter()
        .map(|p| operator_norm(&(p - &last)))
        .fold(0.0, f64::max);
    if sup_deviation <= tol {
        let rank_one = e
            .constant_psi(1e-12)
            .map(|psi| ComplexMatrix::outer(e.psi_s(), &psi));
        Ok(ForwardLimit::Converged {
            limit: last,
            rank_one,
            sup_deviation,
        })
    } else {
        Ok(ForwardLimit::Fluctuating { sup_deviation })
    }
}

/// Runs `t` until `‖η_{n+1} − η_n‖ ≤ tol` for ten consecutive steps and
/// returns `η_n`.
pub fn eta_infinity(
    t: &mut ProductTrajectory,
    e: &MatrixEnsemble,
    max_steps: usize,
    tol: f64,
) -> Result<ComplexVector> {
    while t.small_increments < ETA_PATIENCE {
        if t.n_steps >= max_steps {
            return Err(Error::NotConverged {
                steps: t.n_steps,
                last_increment: t.last_eta_increment,
            });
        }
        let rec = t.step(e)?;
        if rec.eta_increment <= tol {
            t.small_increments += 1;
        } else {
            t.small_increments = 0;
        }
    }
    Ok(t.eta_n.clone())
}

#[derive(Debug, Clone)]
pub struct LyapunovReport {
    /// Descending; `-∞` for directions lost to rank collapse.
    pub exponents: Vec<f64>,
    /// `γ₁ − γ₂`
    pub top_multiplicity_gap: f64,
    pub n: usize,
}

/// Lyapunov spectrum of `Ψ_n` from the QR-stabilized product of `M_k*`.
pub fn lyapunov(e: &MatrixEnsemble, n: usize, rng: RngStream) -> Result<LyapunovReport> {
    lyapunov_with(e, n, rng, |_, _| {})
}

/// [`lyapunov`], calling `observe(k, γ)` with the running (descending)
/// estimates after every step.
pub fn lyapunov_with<F>(
    e: &MatrixEnsemble,
    n: usize,
    mut rng: RngStream,
    mut observe: F,
) -> Result<LyapunovReport>
where
    F: FnMut(usize, &[f64]),
{
    if n < 100 {
        return Err(Error::InvalidInput(
            "Lyapunov estimation needs n ≥ 100".into(),
        ));
    }
    let d = e.dim();
    let mut q = ComplexMatrix::identity(d);
    let mut sums = alloc::vec![0.0f64; d];
    let mut running = alloc::vec![0.0f64; d];
    for k in 1..=n {
        let draw = e.draw(&mut rng)?;
        let z = &draw.matrix.adjoint() * &q;
        let qr = householder_qr(&z);
        for (i, s) in sums.iter_mut().enumerate() {
            let r = qr.r[(i, i)].re;
            *s += if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
        }
        q = qr.q;
        for (g, s) in running.iter_mut().zip(&sums) {
            *g = s / k as f64;
        }
        running.sort_by(|a, b| b.total_cmp(a));
        observe(k, &running);
    }
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    let top_multiplicity_gap = if d > 1 {
        exponents[0] - exponents[1]
    } else {
        f64::INFINITY
    };
    Ok(LyapunovReport {
        exponents,
        top_multiplicity_gap,
        n,
    })
}
