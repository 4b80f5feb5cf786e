//! Two-level system coupled to a chain of two-level probes.
//!
//! Each subsystem `# ∈ {S, E}` has Hamiltonian `h_# = diag(0, E_#)` and is
//! represented in its GNS space `ℂ² ⊗ ℂ²` with reference vector
//! `Ω_ρ = Σ √p_i e_i ⊗ e_i` for the state `ρ = diag(p)`: the tracial state for
//! S and the Gibbs state at inverse temperature `β` for E.
//!
//! Tensor factors are ordered `(S-left, S-right, E-left, E-right)`, so the
//! global index of `e_{sl} ⊗ e_{sr} ⊗ e_{el} ⊗ e_{er}` is
//! `((sl·2 + sr)·2 + el)·2 + er`, equivalently `s·4 + e` with `s = sl·2 + sr`.
//!
//! Modular data per factor: `Δ = ρ ⊗ ρ̄⁻¹` (diagonal) and
//! `J(ξ ⊗ η) = η̄ ⊗ ξ̄`. The generator is
//! `K = τ[L_S + L_E + V − J Δ^{1/2} V Δ^{−1/2} J]` with standard Liouvilleans
//! `L_# = h_# ⊗ 𝟙 − 𝟙 ⊗ h̄_#` and `V = λ(a ⊗ 𝟙 ⊗ a* ⊗ 𝟙 + a* ⊗ 𝟙 ⊗ a ⊗ 𝟙)`.
//! The reduced operator is `M = ⟨· ⊗ ψ_E| e^{iK} |· ⊗ ψ_E⟩`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::linalg::{c64, matrix_exp, operator_norm, ComplexMatrix, ComplexVector};
use crate::rrdo::{NormDescriptor, Rrdo};

/// Largest inverse temperature accepted as is; larger values are clamped.
pub const BETA_CAP: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    pub e_s: f64,
    pub e_e: f64,
    pub beta: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl SpinParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.e_s, self.e_e, self.lambda, self.tau];
        if all.iter().any(|x| !x.is_finite()) || self.beta.is_nan() {
            return Err(Error::InvalidInput(format!(
                "non-finite spin parameters {:?}",
                self
            )));
        }
        if self.beta == f64::INFINITY {
            return Err(Error::UnsupportedParameter(
                "β = ∞ makes the probe reference vector non-separating".into(),
            ));
        }
        if !(self.e_s > 0.0 && self.e_e > 0.0) {
            return Err(Error::InvalidInput(
                "energies E_S, E_E must be positive".into(),
            ));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidInput("β must be non-negative".into()));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidInput(
                "interaction time τ must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `√((E_S − E_E)² + 4λ²)`
    pub fn rabi_frequency(&self) -> f64 {
        let de = self.e_s - self.e_e;
        (de * de + 4.0 * self.lambda * self.lambda).sqrt()
    }

    /// `β′ = (E_E / E_S) β`
    pub fn beta_prime(&self) -> f64 {
        self.e_e / self.e_s * self.beta
    }

    /// Distance from `τ` to the lattice `Tℤ`.
    pub fn resonance_distance(&self) -> Result<f64> {
        let t = resonance_period(self)?;
        let k = (self.tau / t).round();
        Ok((self.tau - k * t).abs())
    }

    fn effective_beta(&self) -> f64 {
        if self.beta > BETA_CAP {
            log::warn!("β = {} clamped to {}", self.beta, BETA_CAP);
            BETA_CAP
        } else {
            self.beta
        }
    }
}

/// `ψ_S = (e₁ ⊗ e₁ + e₂ ⊗ e₂)/√2`
pub fn psi_s() -> ComplexVector {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    ComplexVector::from_raw(alloc::vec![
        c64::new(s, 0.0),
        c64::zero(),
        c64::zero(),
        c64::new(s, 0.0)
    ])
}

/// Diagonal of `ρ` for a Gibbs state of `diag(0, e)`.
fn gibbs_weights(beta: f64, e: f64) -> [f64; 2] {
    let w = (-beta * e).exp();
    let z = 1.0 + w;
    [1.0 / z, w / z]
}

fn gns_vector(p: [f64; 2]) -> ComplexVector {
    ComplexVector::from_raw(alloc::vec![
        c64::new(p[0].sqrt(), 0.0),
        c64::zero(),
        c64::zero(),
        c64::new(p[1].sqrt(), 0.0)
    ])
}

fn real_diag(d: &[f64]) -> ComplexMatrix {
    let v: Vec<c64> = d.iter().map(|&x| c64::new(x, 0.0)).collect();
    ComplexMatrix::diagonal(&v)
}

fn lowering() -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(2);
    a[(0, 1)] = c64::new(1.0, 0.0);
    a
}

fn kron_all(ms: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = ms[0].clone();
    for m in &ms[1..] {
        out = out.kron(m);
    }
    out
}

/// `h ⊗ 𝟙 − 𝟙 ⊗ h̄` on `ℂ² ⊗ ℂ²`.
pub fn liouvillean(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    &h.kron(&id) - &id.kron(&h.conj())
}

/// Antiunitary `J`: index permutation `perm` followed by complex conjugation,
/// `(Jv)[i] = conj(v[perm[i]])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antiunitary {
    pub perm: Vec<usize>,
}

impl Antiunitary {
    /// Swap of left and right factors inside each `ℂ² ⊗ ℂ²` block.
    fn swap_blocks(blocks: usize) -> Self {
        let n = 4usize.pow(blocks as u32);
        let perm = (0..n)
            .map(|idx| {
                let mut out = 0;
                for b in 0..blocks {
                    let shift = 2 * (blocks - 1 - b);
                    let pair = (idx >> shift) & 3;
                    let (l, r) = (pair >> 1, pair & 1);
                    out |= ((r << 1) | l) << shift;
                }
                out
            })
            .collect();
        Self { perm }
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        ComplexVector::from_raw(self.perm.iter().map(|&p| v[p].conj()).collect())
    }

    /// `J X J` for a linear `X`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = x[(self.perm[i], self.perm[j])].conj();
            }
        }
        out
    }
}

/// Which GNS factor a check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    System,
    Probe,
}

#[derive(Debug, Clone)]
pub struct GnsModel {
    pub params: SpinParams,
    pub psi_s: ComplexVector,
    pub psi_e: ComplexVector,
    pub h_s: ComplexMatrix,
    pub h_e: ComplexMatrix,
    pub liouville_s: ComplexMatrix,
    pub liouville_e: ComplexMatrix,
    pub j_s: Antiunitary,
    pub j_e: Antiunitary,
    pub j_op: Antiunitary,
    pub delta_s: Vec<f64>,
    pub delta_e: Vec<f64>,
    /// Diagonal of `Δ_S ⊗ Δ_E`.
    pub delta: Vec<f64>,
    pub v_rep: ComplexMatrix,
    /// `τ(L_S + L_E + V)`
    pub l_gen: ComplexMatrix,
    pub k_gen: ComplexMatrix,
    /// `𝟙₄ ⊗ |ψ_E⟩⟨ψ_E|`
    pub p_proj: ComplexMatrix,
}

impl GnsModel {
    pub fn reference(&self) -> ComplexVector {
        self.psi_s.kron(&self.psi_e)
    }

    pub fn delta_matrix(&self) -> ComplexMatrix {
        real_diag(&self.delta)
    }

    /// `‖K (ψ_S ⊗ ψ_E)‖`
    pub fn kernel_residual(&self) -> f64 {
        self.k_gen.mul_vec(&self.reference()).norm()
    }

    /// `‖J Δ^{1/2} (A ⊗ 𝟙) Ω − (A* ⊗ 𝟙) Ω‖` on one factor.
    pub fn tomita_residual(&self, factor: Factor, a: &ComplexMatrix) -> f64 {
        let (omega, delta, j) = match factor {
            Factor::System => (&self.psi_s, &self.delta_s, &self.j_s),
            Factor::Probe => (&self.psi_e, &self.delta_e, &self.j_e),
        };
        let id = ComplexMatrix::identity(2);
        let lhs = a.kron(&id).mul_vec(omega);
        let scaled: Vec<c64> = lhs
            .as_slice()
            .iter()
            .zip(delta)
            .map(|(z, d)| z * d.sqrt())
            .collect();
        let lhs = j.apply(&ComplexVector::from_raw(scaled));
        let rhs = a.adjoint().kron(&id).mul_vec(omega);
        (&lhs - &rhs).norm()
    }

    /// `‖e^{iL} A e^{−iL} − e^{iK} A e^{−iK}‖` for `A = a_s ⊗ 𝟙 ⊗ a_e ⊗ 𝟙`.
    pub fn intertwining_residual(&self, a_s: &ComplexMatrix, a_e: &ComplexMatrix) -> Result<f64> {
        let id = ComplexMatrix::identity(2);
        let a = kron_all(&[a_s, &id, a_e, &id]);
        let i = c64::new(0.0, 1.0);
        let el = matrix_exp(&self.l_gen.scale(i))?;
        let el_inv = matrix_exp(&self.l_gen.scale(-i))?;
        let ek = matrix_exp(&self.k_gen.scale(i))?;
        let ek_inv = matrix_exp(&self.k_gen.scale(-i))?;
        let lhs = &(&el * &a) * &el_inv;
        let rhs = &(&ek * &a) * &ek_inv;
        Ok(operator_norm(&(&lhs - &rhs)))
    }

    /// The 4×4 block `⟨· ⊗ ψ_E| e^{iK} |· ⊗ ψ_E⟩`.
    pub fn reduced_matrix(&self) -> Result<ComplexMatrix> {
        let u = matrix_exp(&self.k_gen.scale(c64::new(0.0, 1.0)))?;
        Ok(compress(&u, &self.psi_e))
    }
}

fn compress(u: &ComplexMatrix, psi_e: &ComplexVector) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = c64::zero();
            for e in 0..4 {
                let pe = psi_e[e].conj();
                if pe.is_zero() {
                    continue;
                }
                for f in 0..4 {
                    acc += pe * u[(a * 4 + e, b * 4 + f)] * psi_e[f];
                }
            }
            m[(a, b)] = acc;
        }
    }
    m
}

pub fn build_gns(p: &SpinParams) -> Result<GnsModel> {
    p.validate()?;
    let beta = p.effective_beta();
    let id2 = ComplexMatrix::identity(2);
    let id4 = ComplexMatrix::identity(4);

    let h_s = real_diag(&[0.0, p.e_s]);
    let h_e = real_diag(&[0.0, p.e_e]);
    let rho_s = [0.5, 0.5];
    let rho_e = gibbs_weights(beta, p.e_e);
    if rho_e[1] <= 0.0 {
        return Err(Error::UnsupportedParameter(format!(
            "β·E_E = {} underflows the excited probe population",
            beta * p.e_e
        )));
    }
    let psi_s = gns_vector(rho_s);
    let psi_e = gns_vector(rho_e);

    let liouville_s = liouvillean(&h_s);
    let liouville_e = liouvillean(&h_e);

    let modular = |rho: [f64; 2]| -> Vec<f64> {
        let mut d = Vec::with_capacity(4);
        for i in 0..2 {
            for j in 0..2 {
                d.push(rho[i] / rho[j]);
            }
        }
        d
    };
    let delta_s = modular(rho_s);
    let delta_e = modular(rho_e);
    let mut delta = Vec::with_capacity(16);
    for ds in &delta_s {
        for de in &delta_e {
            delta.push(ds * de);
        }
    }

    let a = lowering();
    let ad = a.adjoint();
    let v_rep = (&kron_all(&[&a, &id2, &ad, &id2]) + &kron_all(&[&ad, &id2, &a, &id2]))
        .scale_real(p.lambda);

    let j_op = Antiunitary::swap_blocks(2);
    // Δ^{1/2} V Δ^{−1/2}, entrywise since Δ is diagonal
    let mut x = v_rep.clone();
    for i in 0..16 {
        for j in 0..16 {
            x[(i, j)] = x[(i, j)] * (delta[i].sqrt() / delta[j].sqrt());
        }
    }
    let jxj = j_op.conjugate(&x);

    let free = &liouville_s.kron(&id4) + &id4.kron(&liouville_e);
    let l_gen = (&free + &v_rep).scale_real(p.tau);
    let k_gen = (&(&free + &v_rep) - &jxj).scale_real(p.tau);
    let p_proj = id4.kron(&ComplexMatrix::outer(&psi_e, &psi_e));

    Ok(GnsModel {
        params: *p,
        psi_s,
        psi_e,
        h_s,
        h_e,
        liouville_s,
        liouville_e,
        j_s: Antiunitary::swap_blocks(1),
        j_e: Antiunitary::swap_blocks(1),
        j_op,
        delta_s,
        delta_e,
        delta,
        v_rep,
        l_gen,
        k_gen,
        p_proj,
    })
}

/// `M = P e^{iK} P` restricted to `H_S`, with the reference-induced norm of
/// `ψ_S`.
pub fn build_m(p: &SpinParams) -> Result<Rrdo> {
    let model = build_gns(p)?;
    let m = model.reduced_matrix()?;
    let psi = model.psi_s.clone();
    Rrdo::new(m, psi.clone(), NormDescriptor::reference_induced(psi)?)
}

/// `T = 2π / √((E_S − E_E)² + 4λ²)`
pub fn resonance_period(p: &SpinParams) -> Result<f64> {
    let r = p.rabi_frequency();
    if r == 0.0 {
        return Err(Error::Undefined(
            "E_S = E_E and λ = 0 give no resonance period".into(),
        ));
    }
    Ok(2.0 * PI / r)
}

/// The closed-form `e₀`:
/// `[(ΔE − r)² + 4λ² e^{iτr}] / [(ΔE − r)² + 4λ²]` with `ΔE = E_S − E_E` and
/// `r = √(ΔE² + 4λ²)`.
pub fn e0(p: &SpinParams) -> Result<c64> {
    let de = p.e_s - p.e_e;
    let r = p.rabi_frequency();
    let a = (de - r) * (de - r);
    let b = 4.0 * p.lambda * p.lambda;
    let den = a + b;
    if den == 0.0 {
        return Err(Error::Undefined(
            "e₀ denominator vanishes (λ = 0 with E_S ≥ E_E)".into(),
        ));
    }
    let phase = c64::from_polar(1.0, p.tau * r);
    Ok((c64::new(a, 0.0) + phase * b) / den)
}

/// Spectrum of `M`: `{1, |e₀|², e^{iτE₋} e₀, conj(e^{iτE₋} e₀)}` with
/// `E₋ = (E_S + E_E − r)/2`. `|e₀|²` governs the populations.
pub fn relaxation_spectrum(p: &SpinParams) -> Result<[c64; 4]> {
    let e = e0(p)?;
    let em = 0.5 * (p.e_s + p.e_e - p.rabi_frequency());
    let c = c64::from_polar(1.0, p.tau * em) * e;
    Ok([c64::new(1.0, 0.0), c64::new(e.norm_sqr(), 0.0), c, c.conj()])
}

#[derive(Debug, Clone)]
pub struct LimitState {
    pub beta_prime: f64,
    pub target_vector: ComplexVector,
    pub target_projector: ComplexMatrix,
}

/// `(2/Z) |ψ_S⟩⟨e^{−β′h_S} ⊗ 𝟙 ψ_S|` with `Z = 1 + e^{−β′E_S}`.
pub fn gibbs_limit(p: &SpinParams) -> LimitState {
    let bp = p.beta_prime();
    let w = (-bp * p.e_s).exp();
    let z = 1.0 + w;
    let g = real_diag(&[2.0 / z, 2.0 * w / z]).kron(&ComplexMatrix::identity(2));
    let psi = psi_s();
    let target_vector = g.mul_vec(&psi);
    let target_projector = ComplexMatrix::outer(&psi, &target_vector);
    LimitState {
        beta_prime: bp,
        target_vector,
        target_projector,
    }
}

/// Excited-level population `e^{−βE}/(1 + e^{−βE})` of the Gibbs state.
pub fn gibbs_excited_population(beta: f64, e_s: f64) -> f64 {
    gibbs_weights(beta, e_s)[1]
}

/// `⟨state, (a_s ⊗ 𝟙) ψ_S⟩`
pub fn expectation(state: &ComplexVector, a_s: &ComplexMatrix) -> Result<c64> {
    if state.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state.len(),
        });
    }
    if a_s.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a_s.dim(),
        });
    }
    let v = a_s.kron(&ComplexMatrix::identity(2)).mul_vec(&psi_s());
    Ok(state.dot(&v))
}

#[derive(Debug, Clone)]
pub struct AsymptoticTemperature {
    pub beta_tilde: f64,
    /// Trace-2 diagonal operator whose induced state is `½ Tr(ρ_E ·)`.
    pub rho_e: ComplexMatrix,
    /// `(1 − κ̄)⁻¹ · mean((1 − κ)(1 − 2Z⁻¹))` with `κ = |e₀|²`.
    pub x: f64,
    pub kappa_mean: f64,
    /// Mean of the closed-form `e₀`.
    pub e0_mean: c64,
    /// The same bracket evaluated with the complex `e₀` in place of `κ`.
    pub x_with_e0: c64,
    /// `½ ρ_E[2,2]`, the limiting excited population.
    pub excited_population: f64,
    /// Gibbs populations at `β̃` against the `ρ_E`-induced populations.
    pub gibbs_crosscheck: f64,
}

/// `β̃` and `ρ_E` for a finitely supported parameter ensemble sharing `E_S`.
///
/// The population sector of `M(ω)` relaxes with eigenvalue `κ(ω) = |e₀(ω)|²`
/// towards the Gibbs state at `β′(ω)`. Averaging gives
/// `ρ_E = (1 − X)|φ₁⟩⟨φ₁| + (1 + X)|φ₂⟩⟨φ₂|` and the Gibbs ratio
/// `e^{−β̃E_S} = (1 + X)/(1 − X)`, so `β̃ = E_S⁻¹ log(2(1 + X)⁻¹ − 1)`.
pub fn asymptotic_temperature(atoms: &[(SpinParams, f64)]) -> Result<AsymptoticTemperature> {
    let first = atoms
        .first()
        .ok_or_else(|| Error::InvalidInput("empty parameter ensemble".into()))?
        .0;
    let e_s = first.e_s;
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-12 || atoms.iter().any(|a| !(a.1 >= 0.0)) {
        return Err(Error::InvalidInput(format!(
            "weights must be a probability vector (sum {})",
            total
        )));
    }
    let (mut kappa_mean, mut e0_mean) = (0.0, c64::zero());
    let (mut num, mut num_e0) = (0.0, c64::zero());
    for (p, w) in atoms {
        p.validate()?;
        if p.e_s != e_s {
            return Err(Error::InvalidInput("all atoms must share E_S".into()));
        }
        let e = e0(p)?;
        let kappa = e.norm_sqr();
        let bp = p.beta_prime();
        let z = 1.0 + (-bp * e_s).exp();
        let g = 1.0 - 2.0 / z;
        kappa_mean += w * kappa;
        e0_mean += e * *w;
        num += w * (1.0 - kappa) * g;
        num_e0 += (c64::new(1.0, 0.0) - e) * (w * g);
    }
    if 1.0 - kappa_mean <= f64::EPSILON {
        return Err(Error::HypothesisViolated(
            "every atom is resonant (mean relaxation eigenvalue is 1)".into(),
        ));
    }
    let x = num / (1.0 - kappa_mean);
    let one_minus_e0 = c64::new(1.0, 0.0) - e0_mean;
    let x_with_e0 = if one_minus_e0.norm() > 0.0 {
        num_e0 / one_minus_e0
    } else {
        c64::new(f64::NAN, f64::NAN)
    };
    let ratio = 2.0 / (1.0 + x) - 1.0;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::HypothesisViolated(format!(
            "log argument {} leaves (0, ∞); β̃ undefined",
            ratio
        )));
    }
    let beta_tilde = ratio.ln() / e_s;
    let rho_e = real_diag(&[1.0 - x, 1.0 + x]);
    let excited_population = 0.5 * (1.0 + x);
    let gw = gibbs_weights(beta_tilde, e_s);
    let gibbs_crosscheck = (gw[0] - 0.5 * (1.0 - x)).abs() + (gw[1] - excited_population).abs();
    Ok(AsymptoticTemperature {
        beta_tilde,
        rho_e,
        x,
        kappa_mean,
        e0_mean,
        x_with_e0,
        excited_population,
        gibbs_crosscheck,
    })
}

/// `‖P e^{iK₁} e^{iK₂} P − P e^{iK₁} P e^{iK₂} P‖` on `H_S ⊗ H_{E₁} ⊗ H_{E₂}`,
/// where `P` projects both probe factors onto their reference vectors.
pub fn factorization_check(p1: &SpinParams, p2: &SpinParams) -> Result<f64> {
    let m1 = build_gns(p1)?;
    let m2 = build_gns(p2)?;
    let i = c64::new(0.0, 1.0);
    let u1 = matrix_exp(&m1.k_gen.scale(i))?;
    let u2 = matrix_exp(&m2.k_gen.scale(i))?;

    // index (s, e1, e2) = s·16 + e1·4 + e2
    let mut a = ComplexMatrix::zeros(64);
    let mut b = ComplexMatrix::zeros(64);
    for s in 0..4 {
        for t in 0..4 {
            for e1 in 0..4 {
                for f1 in 0..4 {
                    let v = u1[(s * 4 + e1, t * 4 + f1)];
                    for e2 in 0..4 {
                        a[(s * 16 + e1 * 4 + e2, t * 16 + f1 * 4 + e2)] = v;
                    }
                }
            }
            for e2 in 0..4 {
                for f2 in 0..4 {
                    let v = u2[(s * 4 + e2, t * 4 + f2)];
                    for e1 in 0..4 {
                        b[(s * 16 + e1 * 4 + e2, t * 16 + e1 * 4 + f2)] = v;
                    }
                }
            }
        }
    }
    let pe = ComplexMatrix::outer(&m1.psi_e, &m1.psi_e)
        .kron(&ComplexMatrix::outer(&m2.psi_e, &m2.psi_e));
    let p = ComplexMatrix::identity(4).kron(&pe);
    let lhs = &(&(&p * &a) * &b) * &p;
    let rhs = &(&(&(&p * &a) * &p) * &b) * &p;
    Ok(operator_norm(&(&lhs - &rhs)))
}
