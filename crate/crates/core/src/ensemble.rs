//! iid distributions over RRDOs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::linalg::{c64, solve, ComplexMatrix, ComplexVector};
use crate::rng::RngStream;
use crate::rrdo::{
    decompose, decompose_matrix, validate_rrdo, NormDescriptor, NormKind, ReferenceNorm, Rrdo,
    RrdoDecomposition, ValidationReport, CONTRACTION_TOL, DEFAULT_CLUSTER_TOL, DEFAULT_PROBES,
    INVARIANCE_TOL,
};
use crate::spin::{self, SpinParams};
use crate::stats::CompensatedArray;

pub const DEFAULT_MC_SAMPLES: usize = 100_000;
const WEIGHT_TOL: f64 = 1e-12;
const ATOM_VALIDATION_SEED: u64 = 0xa70_5eed;
const DRAW_PROBES: usize = 8;

/// One support point of a finite ensemble.
#[derive(Debug, Clone)]
pub struct Atom {
    pub rrdo: Rrdo,
    pub weight: f64,
    pub decomposition: RrdoDecomposition,
    pub label: Option<String>,
}

/// Distribution of one scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamDist {
    Fixed(f64),
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `(value, weight)` pairs, weights summing to one.
    Discrete(Vec<(f64, f64)>),
}

impl ParamDist {
    fn validate(&self, name: &str) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("{}: {}", name, msg)));
        match self {
            ParamDist::Fixed(x) if !x.is_finite() => bad("non-finite value".into()),
            ParamDist::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => bad(
                format!("uniform bounds [{}, {}) are not an interval", lo, hi),
            ),
            ParamDist::Discrete(v) => {
                if v.is_empty() {
                    return bad("empty discrete support".into());
                }
                if v.iter().any(|(x, w)| !x.is_finite() || !(*w >= 0.0)) {
                    return bad("discrete support needs finite values, non-negative weights".into());
                }
                let s: f64 = v.iter().map(|p| p.1).sum();
                if (s - 1.0).abs() > WEIGHT_TOL {
                    return bad(format!("discrete weights sum to {}", s));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ParamDist::Fixed(x) => Some(alloc::vec![(*x, 1.0)]),
            ParamDist::Discrete(v) => Some(v.clone()),
            ParamDist::Uniform { .. } => None,
        }
    }

    fn draw(&self, rng: &mut RngStream) -> f64 {
        match self {
            ParamDist::Fixed(x) => *x,
            ParamDist::Uniform { lo, hi } => rng.uniform_in(*lo, *hi),
            ParamDist::Discrete(v) => {
                let u = rng.uniform();
                let mut acc = 0.0;
                for (x, w) in v {
                    acc += w;
                    if u < acc {
                        return *x;
                    }
                }
                v.iter()
                    .rev()
                    .find(|p| p.1 > 0.0)
                    .map(|p| p.0)
                    .unwrap_or(v[0].0)
            }
        }
    }
}

/// Joint distribution of the spin model parameters (independent marginals).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinParamDist {
    pub e_s: ParamDist,
    pub e_e: ParamDist,
    pub beta: ParamDist,
    pub lambda: ParamDist,
    pub tau: ParamDist,
}

impl SpinParamDist {
    pub fn fixed(p: SpinParams) -> Self {
        Self {
            e_s: ParamDist::Fixed(p.e_s),
            e_e: ParamDist::Fixed(p.e_e),
            beta: ParamDist::Fixed(p.beta),
            lambda: ParamDist::Fixed(p.lambda),
            tau: ParamDist::Fixed(p.tau),
        }
    }

    fn fields(&self) -> [(&'static str, &ParamDist); 5] {
        [
            ("e_s", &self.e_s),
            ("e_e", &self.e_e),
            ("beta", &self.beta),
            ("lambda", &self.lambda),
            ("tau", &self.tau),
        ]
    }

    /// All parameter combinations with their product weights, when every
    /// marginal has finite support.
    pub fn enumerate(&self) -> Option<Vec<(SpinParams, f64)>> {
        let mut out: Vec<([f64; 5], f64)> = alloc::vec![([0.0; 5], 1.0)];
        for (k, (_, d)) in self.fields().iter().enumerate() {
            let sup = d.support()?;
            let mut next = Vec::with_capacity(out.len() * sup.len());
            for (vals, w) in &out {
                for (x, wx) in &sup {
                    let mut v = *vals;
                    v[k] = *x;
                    next.push((v, w * wx));
                }
            }
            out = next;
        }
        Some(
            out.into_iter()
                .map(|(v, w)| {
                    (
                        SpinParams {
                            e_s: v[0],
                            e_e: v[1],
                            beta: v[2],
                            lambda: v[3],
                            tau: v[4],
                        },
                        w,
                    )
                })
                .collect(),
        )
    }

    pub fn draw(&self, rng: &mut RngStream) -> SpinParams {
        SpinParams {
            e_s: self.e_s.draw(rng),
            e_e: self.e_e.draw(rng),
            beta: self.beta.draw(rng),
            lambda: self.lambda.draw(rng),
            tau: self.tau.draw(rng),
        }
    }
}

/// Registered parametric families.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `d × d` stochastic matrices with iid Dirichlet(α, …, α) rows.
    StochasticDirichlet { dim: usize, alpha: f64 },
    /// The two-level repeated-interaction model with random parameters.
    Spin(SpinParamDist),
}

impl Generator {
    pub fn id(&self) -> &'static str {
        match self {
            Generator::StochasticDirichlet { .. } => "stochastic-dirichlet",
            Generator::Spin(_) => "spin",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Support {
    Finite { atoms: Vec<Atom>, cdf: Vec<f64> },
    Parametric(Generator),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    FiniteDiscrete,
    Parametric,
}

/// A probability distribution over RRDOs sharing `ψ_S` and the norm.
#[derive(Debug, Clone)]
pub struct MatrixEnsemble {
    support: Support,
    psi_s: ComplexVector,
    norm: NormDescriptor,
    cluster_tol: f64,
    mc_samples: usize,
}

/// One realization `M(ω)` with its splitting.
#[derive(Debug, Clone)]
pub struct Draw {
    /// Index of the atom for finite ensembles.
    pub atom: Option<usize>,
    pub matrix: ComplexMatrix,
    pub psi: ComplexVector,
    pub m_q: ComplexMatrix,
    pub in_me: bool,
}

impl MatrixEnsemble {
    /// Finite ensemble from `(rrdo, weight)` pairs. Every atom is validated
    /// and decomposed once.
    pub fn finite(atoms: Vec<(Rrdo, f64)>) -> Result<Self> {
        Self::finite_labeled(atoms.into_iter().map(|(r, w)| (r, w, None)).collect())
    }

    pub fn finite_labeled(atoms: Vec<(Rrdo, f64, Option<String>)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput(
                "ensemble needs at least one atom".into(),
            ));
        }
        let psi_s = atoms[0].0.psi_s().clone();
        let norm = atoms[0].0.norm().clone();
        let mut total = 0.0;
        let mut cdf = Vec::with_capacity(atoms.len());
        let mut out = Vec::with_capacity(atoms.len());
        for (k, (r, w, label)) in atoms.into_iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidInput(format!("atom {} has weight {}", k, w)));
            }
            if r.psi_s() != &psi_s {
                return Err(Error::InvalidInput(format!(
                    "atom {} has a different ψ_S",
                    k
                )));
            }
            if r.norm() != &norm {
                return Err(Error::InvalidInput(format!(
                    "atom {} has a different norm",
                    k
                )));
            }
            let report = validate_rrdo(&r, DEFAULT_PROBES, ATOM_VALIDATION_SEED);
            if !report.passed() {
                return Err(Error::NotAnRrdo(format!(
                    "atom {}: {}",
                    k,
                    report.summary()
                )));
            }
            let decomposition = decompose(&r, DEFAULT_CLUSTER_TOL)?;
            total += w;
            cdf.push(total);
            out.push(Atom {
                rrdo: r,
                weight: w,
                decomposition,
                label,
            });
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidInput(format!(
                "weights sum to {}, not 1",
                total
            )));
        }
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(Self {
            support: Support::Finite { atoms: out, cdf },
            psi_s,
            norm,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            mc_samples: DEFAULT_MC_SAMPLES,
        })
    }

    pub fn single(r: Rrdo) -> Result<Self> {
        Self::finite(alloc::vec![(r, 1.0)])
    }

    pub fn dirichlet(dim: usize, alpha: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Dirichlet α must be positive, got {}",
                alpha
            )));
        }
        Ok(Self {
            support: Support::Parametric(Generator::StochasticDirichlet { dim, alpha }),
            psi_s: ComplexVector::uniform(dim),
            norm: NormDescriptor::max_row_sum(),
            cluster_tol: DEFAULT_CLUSTER_TOL,
            mc_samples: DEFAULT_MC_SAMPLES,
        })
    }

    /// Spin ensemble; enumerated into exact atoms when every marginal is
    /// finitely supported.
    pub fn spin(dist: SpinParamDist) -> Result<Self> {
        for (name, d) in dist.fields() {
            d.validate(name)?;
        }
        if let Some(list) = dist.enumerate() {
            let mut atoms = Vec::with_capacity(list.len());
            for (p, w) in list {
                if w > 0.0 {
                    let label = format!(
                        "e_s={} e_e={} beta={} lambda={} tau={}",
                        p.e_s, p.e_e, p.beta, p.lambda, p.tau
                    );
                    atoms.push((spin::build_m(&p)?, w, Some(label)));
                }
            }
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            for a in &mut atoms {
                a.1 /= total;
            }
            return Self::finite_labeled(atoms);
        }
        let psi_s = spin::psi_s();
        Ok(Self {
            norm: NormDescriptor::reference_induced(psi_s.clone())?,
            psi_s,
            support: Support::Parametric(Generator::Spin(dist)),
            cluster_tol: DEFAULT_CLUSTER_TOL,
            mc_samples: DEFAULT_MC_SAMPLES,
        })
    }

    pub fn with_mc_samples(mut self, n: usize) -> Self {
        self.mc_samples = n.max(1);
        self
    }

    pub fn with_cluster_tol(mut self, tol: f64) -> Self {
        self.cluster_tol = tol;
        self
    }

    pub fn support_kind(&self) -> SupportKind {
        match self.support {
            Support::Finite { .. } => SupportKind::FiniteDiscrete,
            Support::Parametric(_) => SupportKind::Parametric,
        }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.support {
            Support::Finite { atoms, .. } => Some(atoms),
            Support::Parametric(_) => None,
        }
    }

    pub fn psi_s(&self) -> &ComplexVector {
        &self.psi_s
    }

    pub fn norm(&self) -> &NormDescriptor {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.psi_s.len()
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// `ψ(ω)` is the same for every atom (finite ensembles only).
    pub fn constant_psi(&self, tol: f64) -> Option<ComplexVector> {
        let atoms = self.atoms()?;
        let first = atoms
            .iter()
            .find(|a| a.weight > 0.0)?
            .decomposition
            .psi
            .clone();
        atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .all(|a| (&a.decomposition.psi - &first).norm() <= tol)
            .then_some(first)
    }

    /// Draws `M(ω)` and wraps it as an [`Rrdo`].
    pub fn sample(&self, rng: &mut RngStream) -> Result<Rrdo> {
        match &self.support {
            Support::Finite { atoms, cdf } => Ok(atoms[pick(cdf, rng)].rrdo.clone()),
            Support::Parametric(g) => self.generate(g, rng),
        }
    }

    /// Draws `M(ω)` together with `ψ(ω)` and `M_Q(ω)`.
    pub fn draw(&self, rng: &mut RngStream) -> Result<Draw> {
        match &self.support {
            Support::Finite { atoms, cdf } => {
                let k = pick(cdf, rng);
                let a = &atoms[k];
                Ok(Draw {
                    atom: Some(k),
                    matrix: a.rrdo.matrix().clone(),
                    psi: a.decomposition.psi.clone(),
                    m_q: a.decomposition.m_q.clone(),
                    in_me: a.decomposition.in_me,
                })
            }
            Support::Parametric(g) => {
                let r = self.generate(g, rng)?;
                let d = decompose_matrix(r.matrix(), &self.psi_s, self.cluster_tol)?;
                Ok(Draw {
                    atom: None,
                    matrix: r.matrix().clone(),
                    psi: d.psi,
                    m_q: d.m_q,
                    in_me: d.in_me,
                })
            }
        }
    }

    fn generate(&self, g: &Generator, rng: &mut RngStream) -> Result<Rrdo> {
        let r = match g {
            Generator::StochasticDirichlet { dim, alpha } => {
                let m = dirichlet_rows(*dim, *alpha, rng)?;
                Rrdo::candidate(m, self.psi_s.clone(), self.norm.clone())?
            }
            Generator::Spin(dist) => {
                let p = dist.draw(rng);
                spin::build_m(&p)?
            }
        };
        let report = light_validation(&r, rng)?;
        if !report.passed() {
            return Err(Error::SampleRejected(report));
        }
        Ok(r)
    }

    /// `E[M]` with its Monte Carlo standard error (zero when exact).
    pub fn mean_matrix(&self) -> Result<MeanMatrix> {
        match &self.support {
            Support::Finite { atoms, .. } => {
                let mut acc = CompensatedArray::new(self.dim() * self.dim());
                let mut scaled = Vec::with_capacity(self.dim() * self.dim());
                for a in atoms {
                    scaled.clear();
                    scaled.extend(a.rrdo.matrix().as_slice().iter().map(|z| z * a.weight));
                    acc.add(&scaled);
                }
                Ok(MeanMatrix {
                    matrix: ComplexMatrix::from_raw(self.dim(), acc.total()),
                    std_error: 0.0,
                    exact: true,
                    samples: 0,
                })
            }
            Support::Parametric(Generator::StochasticDirichlet { dim, .. }) => {
                let v = c64::new(1.0 / *dim as f64, 0.0);
                let data = alloc::vec![v; dim * dim];
                Ok(MeanMatrix {
                    matrix: ComplexMatrix::from_raw(*dim, data),
                    std_error: 0.0,
                    exact: true,
                    samples: 0,
                })
            }
            Support::Parametric(g) => {
                let n = self.mc_samples;
                let len = self.dim() * self.dim();
                let mut acc = CompensatedArray::new(len);
                let mut sq = CompensatedArray::new(len);
                let mut rng = RngStream::new(0x3ea_11, 0);
                for _ in 0..n {
                    let r = self.generate(g, &mut rng)?;
                    acc.add(r.matrix().as_slice());
                    let s: Vec<c64> = r
                        .matrix()
                        .as_slice()
                        .iter()
                        .map(|z| c64::new(z.norm_sqr(), 0.0))
                        .collect();
                    sq.add(&s);
                }
                let mean = acc.mean();
                let m2 = sq.mean();
                let nf = n as f64;
                let se = mean
                    .iter()
                    .zip(&m2)
                    .map(|(m, s)| {
                        let var = (s.re - m.norm_sqr()).max(0.0) * nf / (nf - 1.0).max(1.0);
                        (var / nf).sqrt()
                    })
                    .fold(0.0, f64::max);
                Ok(MeanMatrix {
                    matrix: acc.mean_matrix(),
                    std_error: se,
                    exact: false,
                    samples: n,
                })
            }
        }
    }

    /// The Cesàro limit `θ = P*_{1,E[M]} ψ_S`.
    pub fn theta_limit(&self, tol: f64) -> Result<ThetaLimit> {
        let mean = self.mean_matrix()?;
        let dec = decompose_matrix(&mean.matrix, &self.psi_s, tol)?;
        if dec.p1.cluster_dim != 1 {
            return Err(Error::MeanNotInME {
                cluster_dim: dec.p1.cluster_dim,
            });
        }
        let theta = dec.psi.clone();
        let residual_crosscheck = match self.atoms() {
            Some(atoms) => {
                let d = self.dim();
                let mut emq = ComplexMatrix::zeros(d);
                let mut epsi = ComplexVector::zeros(d);
                for a in atoms {
                    emq = &emq + &a.decomposition.m_q.scale_real(a.weight);
                    epsi = &epsi + &a.decomposition.psi.scale(c64::new(a.weight, 0.0));
                }
                let lhs = &ComplexMatrix::identity(d) - &emq.adjoint();
                let alt = solve(&lhs, &epsi)?;
                Some((&alt - &theta).norm())
            }
            None => None,
        };
        Ok(ThetaLimit {
            theta,
            mean_matrix: mean.matrix,
            mean_in_me: dec.in_me,
            residual_crosscheck,
            mean_std_error: mean.std_error,
        })
    }
}

fn pick(cdf: &[f64], rng: &mut RngStream) -> usize {
    let u = rng.uniform();
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

/// Stochastic matrix with iid Dirichlet(α) rows, drawn as normalized Gamma
/// variates.
pub fn dirichlet_rows(dim: usize, alpha: f64, rng: &mut RngStream) -> Result<ComplexMatrix> {
    let gamma = Gamma::new(alpha, 1.0)
        .map_err(|e| Error::InvalidInput(format!("Dirichlet α = {}: {:?}", alpha, e)))?;
    let mut data = Vec::with_capacity(dim * dim);
    let mut row = alloc::vec![0.0f64; dim];
    for _ in 0..dim {
        let mut s = 0.0;
        loop {
            for x in row.iter_mut() {
                *x = gamma.sample(rng);
                s += *x;
            }
            if s > 0.0 {
                break;
            }
        }
        data.extend(row.iter().map(|x| c64::new(x / s, 0.0)));
    }
    ComplexMatrix::new(dim, data)
}

fn light_validation(r: &Rrdo, rng: &mut RngStream) -> Result<ValidationReport> {
    let m = r.matrix();
    let mut violations = Vec::new();
    let invariance_residual = r.invariance_residual();
    if invariance_residual > INVARIANCE_TOL {
        violations.push(format!("M ψ_S ≠ ψ_S (residual {:e})", invariance_residual));
    }
    let contraction = match r.norm().kind() {
        NormKind::EuclideanOperator => crate::linalg::operator_norm(m),
        NormKind::MaxRowSum => m.norm_inf(),
        NormKind::ReferenceInduced => {
            let rn = ReferenceNorm::new(r.norm().reference().expect("reference present"))?;
            let mut best: f64 = 0.0;
            for _ in 0..DRAW_PROBES {
                let phi: Vec<c64> = (0..m.dim())
                    .map(|_| c64::new(rng.uniform() - 0.5, rng.uniform() - 0.5))
                    .collect();
                let phi = ComplexVector::from_raw(phi);
                best = best.max(rn.eval(&m.mul_vec(&phi)) / rn.eval(&phi));
            }
            best
        }
    };
    if !(contraction <= 1.0 + CONTRACTION_TOL) {
        violations.push(format!("not a contraction (|||M||| ≥ {:.12})", contraction));
    }
    Ok(ValidationReport {
        norm: r.norm().kind(),
        invariance_residual,
        contraction,
        max_power_norm: f64::NAN,
        power_bound: f64::NAN,
        violations,
    })
}

#[derive(Debug, Clone)]
pub struct MeanMatrix {
    pub matrix: ComplexMatrix,
    /// Largest componentwise standard error (0 for exact means).
    pub std_error: f64,
    pub exact: bool,
    /// Monte Carlo sample count (0 for exact means).
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct ThetaLimit {
    pub theta: ComplexVector,
    pub mean_matrix: ComplexMatrix,
    pub mean_in_me: bool,
    /// `‖(𝟙 − E[M_Q]*)⁻¹ E[ψ] − θ‖`, finite ensembles only.
    pub residual_crosscheck: Option<f64>,
    pub mean_std_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn stoch(a: f64, b: f64) -> Rrdo {
        let m = ComplexMatrix::from_real_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap();
        Rrdo::new(m, ComplexVector::uniform(2), NormDescriptor::max_row_sum()).unwrap()
    }

    fn two_atom() -> MatrixEnsemble {
        MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 0.5), (stoch(0.1, 0.3), 0.5)]).unwrap()
    }

    #[test]
    fn degenerate_weights_always_pick_first() {
        let e =
            MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 1.0), (stoch(0.1, 0.3), 0.0)]).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..1000 {
            assert_eq!(e.draw(&mut rng).unwrap().atom, Some(0));
        }
        let m = e.mean_matrix().unwrap();
        assert!((&m.matrix - stoch(0.3, 0.1).matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn fair_coin_frequency() {
        let e = two_atom();
        let mut rng = RngStream::new(2024, 0);
        let hits = (0..10_000)
            .filter(|_| e.draw(&mut rng).unwrap().atom == Some(0))
            .count();
        let f = hits as f64 / 10_000.0;
        assert!((0.485..=0.515).contains(&f), "frequency {}", f);
    }

    #[test]
    fn mean_and_theta_of_two_atom_ensemble() {
        let e = two_atom();
        let m = e.mean_matrix().unwrap();
        assert!(m.exact);
        assert!((&m.matrix - stoch(0.2, 0.2).matrix()).max_abs() < 1e-15);
        let t = e.theta_limit(1e-8).unwrap();
        assert!((&t.theta - e.psi_s()).norm() < 1e-13);
        assert!(t.residual_crosscheck.unwrap() < 1e-8);
        assert!(t.mean_in_me);
    }

    #[test]
    fn single_atom_theta_is_its_psi() {
        let r = stoch(0.3, 0.1);
        let e = MatrixEnsemble::single(r.clone()).unwrap();
        let t = e.theta_limit(1e-8).unwrap();
        let psi = decompose(&r, 1e-8).unwrap().psi;
        assert!((&t.theta - &psi).norm() < 1e-13);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 0.5)]).is_err());
        assert!(
            MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 1.5), (stoch(0.1, 0.3), -0.5)]).is_err()
        );
    }

    #[test]
    fn dirichlet_rows_are_stochastic_and_positive() {
        let mut rng = RngStream::new(9, 0);
        for _ in 0..1000 {
            let m = dirichlet_rows(3, 1.0, &mut rng).unwrap();
            for i in 0..3 {
                let s: f64 = m.row(i).iter().map(|z| z.re).sum();
                assert!((s - 1.0).abs() < 1e-14);
                assert!(m.row(i).iter().all(|z| z.re > 0.0));
            }
        }
    }

    #[test]
    fn identical_degenerate_mean_is_rejected() {
        let id = Rrdo::new(
            ComplexMatrix::identity(2),
            ComplexVector::uniform(2),
            NormDescriptor::max_row_sum(),
        )
        .unwrap();
        let e = MatrixEnsemble::single(id).unwrap();
        assert!(matches!(
            e.theta_limit(1e-8),
            Err(Error::MeanNotInME { cluster_dim: 2 })
        ));
    }
}
