use proptest::prelude::*;
use rrdo_core::linalg::{matrix_exp, operator_norm};
use rrdo_core::rrdo::{
    decompose, triple_norm, validate_rrdo, NormDescriptor, Normed, Rrdo, DEFAULT_CLUSTER_TOL,
};
use rrdo_core::{c64, ComplexMatrix, ComplexVector, Error};

fn real(rows: &[&[f64]]) -> ComplexMatrix {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    ComplexMatrix::from_real_rows(&rows).unwrap()
}

fn stoch(a: f64, b: f64) -> ComplexMatrix {
    real(&[&[1.0 - a, a], &[b, 1.0 - b]])
}

#[test]
fn triple_norm_examples() {
    let m = stoch(0.3, 0.1);
    let n = triple_norm(Normed::Matrix(&m), &NormDescriptor::max_row_sum()).unwrap();
    assert!((n - 1.0).abs() < 1e-15);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let reference = ComplexVector::from_real(&[s, 0.0, 0.0, s]).unwrap();
    let norm = NormDescriptor::reference_induced(reference.clone()).unwrap();
    assert!((triple_norm(Normed::Vector(&reference), &norm).unwrap() - 1.0).abs() < 1e-14);
    // φ = (diag(2,1) ⊗ 𝟙) ψ_ref
    let phi = ComplexVector::from_real(&[2.0 * s, 0.0, 0.0, s]).unwrap();
    assert!((triple_norm(Normed::Vector(&phi), &norm).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn singular_reference_is_rejected() {
    let r = ComplexVector::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    let norm = NormDescriptor::reference_induced(r.clone());
    let err = match norm {
        Err(e) => e,
        Ok(n) => triple_norm(Normed::Vector(&r), &n).unwrap_err(),
    };
    assert!(matches!(err, Error::ReferenceNotSeparating));
    assert!(NormDescriptor::reference_induced(ComplexVector::uniform(3)).is_err());
}

#[test]
fn validation_examples() {
    let psi = ComplexVector::uniform(2);
    let id = Rrdo::candidate(
        ComplexMatrix::identity(2),
        psi.clone(),
        NormDescriptor::euclidean(),
    )
    .unwrap();
    assert!(validate_rrdo(&id, 64, 1).passed());

    let twice = ComplexMatrix::identity(2).scale_real(2.0);
    let c = Rrdo::candidate(twice, psi.clone(), NormDescriptor::euclidean()).unwrap();
    let rep = validate_rrdo(&c, 64, 1);
    assert!(!rep.passed());
    assert!(rep.contraction > 1.0);

    let c = Rrdo::candidate(stoch(0.3, 0.1), psi, NormDescriptor::max_row_sum()).unwrap();
    let rep = validate_rrdo(&c, 64, 1);
    assert!(rep.passed(), "{}", rep.summary());
}

#[test]
fn decomposition_examples() {
    let r = Rrdo::new(
        stoch(0.3, 0.1),
        ComplexVector::uniform(2),
        NormDescriptor::max_row_sum(),
    )
    .unwrap();
    let d = decompose(&r, DEFAULT_CLUSTER_TOL).unwrap();
    // stationary distribution (b, a)/(a + b) scaled by √2
    let want = ComplexVector::from_real(&[0.25, 0.75])
        .unwrap()
        .scale(c64::new(2f64.sqrt(), 0.0));
    assert!((&d.psi - &want).norm() < 1e-14);
    assert!((d.sr_mq - 0.6).abs() < 1e-14);
    assert!(d.in_me);

    let r = Rrdo::new(
        ComplexMatrix::identity(2),
        ComplexVector::uniform(2),
        NormDescriptor::max_row_sum(),
    )
    .unwrap();
    let d = decompose(&r, DEFAULT_CLUSTER_TOL).unwrap();
    assert_eq!(d.cluster_dim(), 2);
    assert!(!d.in_me);
    assert!((&d.p1.projector - &ComplexMatrix::identity(2)).max_abs() < 1e-14);

    let w = c64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    let u = ComplexMatrix::diagonal(&[c64::new(1.0, 0.0), w]);
    let r = Rrdo::new(u, ComplexVector::basis(2, 0), NormDescriptor::euclidean()).unwrap();
    assert!(!decompose(&r, DEFAULT_CLUSTER_TOL).unwrap().in_me);
}

#[test]
fn missing_eigenvalue_one_is_not_an_rrdo() {
    let m = ComplexMatrix::identity(2).scale_real(0.5);
    let r = Rrdo::candidate(m, ComplexVector::basis(2, 0), NormDescriptor::euclidean()).unwrap();
    assert!(matches!(
        decompose(&r, DEFAULT_CLUSTER_TOL),
        Err(Error::NotAnRrdo(_))
    ));
}

/// Stochastic matrix with positive entries.
fn stochastic(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(0.02..1.0f64, d * d).prop_map(move |v| {
        let rows: Vec<Vec<f64>> = v
            .chunks(d)
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            })
            .collect();
        ComplexMatrix::from_real_rows(&rows).unwrap()
    })
}

/// `U diag(1, λ₂, …) U*` with `|λ_k| < 1`, fixing the first column of `U`.
fn normal_contraction(d: usize) -> impl Strategy<Value = (ComplexMatrix, ComplexVector)> {
    (
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d),
        prop::collection::vec((0.0..0.95f64, -3.2..3.2f64), d - 1),
    )
        .prop_map(move |(h, ev)| {
            let data: Vec<c64> = h.into_iter().map(|(a, b)| c64::new(a, b)).collect();
            let a = ComplexMatrix::new(d, data).unwrap();
            let skew = (&a - &a.adjoint()).scale_real(0.5);
            let u = matrix_exp(&skew).unwrap();
            let mut diag = vec![c64::new(1.0, 0.0)];
            diag.extend(ev.into_iter().map(|(r, t)| c64::from_polar(r, t)));
            let m = &(&u * &ComplexMatrix::diagonal(&diag)) * &u.adjoint();
            (m, u.column(0))
        })
}

fn check_invariants(r: &Rrdo) -> Result<(), TestCaseError> {
    let d = decompose(r, DEFAULT_CLUSTER_TOL).unwrap();
    let n = r.dim();
    let id = ComplexMatrix::identity(n);
    prop_assert!((&(&d.p * &d.p) - &d.p).max_abs() < 1e-10);
    prop_assert!((&(&d.q * &d.q) - &d.q).max_abs() < 1e-10);
    prop_assert!((&d.p * &d.q).max_abs() < 1e-10 && (&d.q * &d.p).max_abs() < 1e-10);
    prop_assert!((&(&d.p + &d.q) - &id).max_abs() < 1e-14);
    prop_assert!(d.m_q.mul_vec(r.psi_s()).norm() < 1e-10);
    prop_assert!(d.m_q.adjoint_mul_vec(&d.psi).norm() < 1e-10);
    prop_assert!((r.psi_s().dot(&d.psi) - c64::new(1.0, 0.0)).norm() < 1e-10);
    prop_assert!(d.in_me);
    prop_assert!((&(&d.p + &d.m_q) - r.matrix()).max_abs() < 1e-10);
    // ‖M_Q^64‖ against the spectral radius
    let pow = operator_norm(&d.m_q.pow(64));
    prop_assert!(
        pow <= 1e6 * d.sr_mq.powf(64.0 * 0.9) + 1e-12,
        "‖M_Q^64‖ = {:e}, sr = {}",
        pow,
        d.sr_mq
    );

    // decomposing P + M_Q again reproduces the splitting
    let again = Rrdo::candidate(&d.p + &d.m_q, r.psi_s().clone(), r.norm().clone()).unwrap();
    let d2 = decompose(&again, DEFAULT_CLUSTER_TOL).unwrap();
    prop_assert!((&d2.p - &d.p).max_abs() < 1e-9 && (&d2.m_q - &d.m_q).max_abs() < 1e-9);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stochastic_decomposition_invariants(m in (2usize..7).prop_flat_map(stochastic)) {
        let d = m.dim();
        let r = Rrdo::new(m, ComplexVector::uniform(d), NormDescriptor::max_row_sum()).unwrap();
        prop_assert!(validate_rrdo(&r, 16, 3).passed());
        check_invariants(&r)?;
    }

    #[test]
    fn normal_decomposition_invariants((m, psi) in (2usize..6).prop_flat_map(normal_contraction)) {
        let r = Rrdo::new(m, psi, NormDescriptor::euclidean()).unwrap();
        prop_assert!(validate_rrdo(&r, 16, 3).passed());
        check_invariants(&r)?;
    }
}
