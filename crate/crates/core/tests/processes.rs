use proptest::prelude::*;
use rrdo_core::ensemble::{dirichlet_rows, MatrixEnsemble};
use rrdo_core::linalg::{inverse, operator_norm, singular_values};
use rrdo_core::markov::{as_rrdo, positive_entries, run_chain, StochasticMatrix};
use rrdo_core::products::{
    cesaro, check_decomposition, check_reverse_decomposition, decay_fit, eta_infinity,
    forward_limit, CesaroTarget, ForwardLimit, ProductTrajectory,
};
use rrdo_core::rng::RngStream;
use rrdo_core::rrdo::{NormDescriptor, Rrdo};
use rrdo_core::stats::Welford;
use rrdo_core::{c64, ComplexMatrix, ComplexVector};

fn stoch(a: f64, b: f64) -> Rrdo {
    let m = ComplexMatrix::from_real_rows(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap();
    Rrdo::new(m, ComplexVector::uniform(2), NormDescriptor::max_row_sum()).unwrap()
}

fn two_atoms() -> MatrixEnsemble {
    MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 0.5), (stoch(0.1, 0.3), 0.5)]).unwrap()
}

fn bistochastic() -> MatrixEnsemble {
    let a = StochasticMatrix::new(&[vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap();
    let b = StochasticMatrix::new(&[vec![0.2, 0.8], vec![0.8, 0.2]]).unwrap();
    MatrixEnsemble::finite(vec![(as_rrdo(&a), 0.3), (as_rrdo(&b), 0.7)]).unwrap()
}

fn uniform_outer(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&vec![vec![1.0 / d as f64; d]; d]).unwrap()
}

#[test]
fn sampling_examples() {
    let e = MatrixEnsemble::single(stoch(0.3, 0.1)).unwrap();
    let mut rng = RngStream::new(3, 0);
    for _ in 0..10 {
        assert_eq!(
            e.sample(&mut rng).unwrap().matrix(),
            stoch(0.3, 0.1).matrix()
        );
    }
    let e = MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 1.0), (stoch(0.1, 0.3), 0.0)]).unwrap();
    for _ in 0..100 {
        assert_eq!(e.draw(&mut rng).unwrap().atom, Some(0));
    }
    let e = two_atoms();
    let mut rng = RngStream::new(42, 0);
    let hits = (0..10_000)
        .filter(|_| e.draw(&mut rng).unwrap().atom == Some(0))
        .count();
    let f = hits as f64 / 1e4;
    assert!((0.485..=0.515).contains(&f), "frequency {}", f);
}

#[test]
fn mean_matrix_examples() {
    let m = two_atoms().mean_matrix().unwrap();
    assert!(m.exact);
    assert!((&m.matrix - stoch(0.2, 0.2).matrix()).max_abs() < 1e-15);
    let e = MatrixEnsemble::finite(vec![(stoch(0.3, 0.1), 1.0), (stoch(0.1, 0.3), 0.0)]).unwrap();
    assert!((&e.mean_matrix().unwrap().matrix - stoch(0.3, 0.1).matrix()).max_abs() < 1e-15);
}

#[test]
fn theta_limit_examples() {
    let single = MatrixEnsemble::single(stoch(0.3, 0.1)).unwrap();
    let t = single.theta_limit(1e-8).unwrap();
    let psi = &single.atoms().unwrap()[0].decomposition.psi;
    assert!((&t.theta - psi).norm() < 1e-12);

    let t = two_atoms().theta_limit(1e-8).unwrap();
    assert!((&t.theta - &ComplexVector::uniform(2)).norm() < 1e-12);
    assert!(t.residual_crosscheck.unwrap() < 1e-8);
    assert!((ComplexVector::uniform(2).dot(&t.theta) - c64::new(1.0, 0.0)).norm() < 1e-8);

    let t = bistochastic().theta_limit(1e-8).unwrap();
    assert!((&t.theta - &ComplexVector::uniform(2)).norm() < 1e-12);
}

#[test]
fn identical_seeds_identical_trajectories() {
    let e = MatrixEnsemble::dirichlet(3, 1.0).unwrap();
    let run = || {
        let mut t = ProductTrajectory::new(&e, RngStream::new(9, 4));
        t.run(&e, 50).unwrap();
        (
            t.psi_n().clone(),
            t.eta_n().clone(),
            t.mq_product_norm_log().to_vec(),
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0.as_slice(), b.0.as_slice());
    assert_eq!(a.1.as_slice(), b.1.as_slice());
    assert_eq!(a.2, b.2);
}

#[test]
fn three_steps_match_naive_product() {
    let e = two_atoms();
    let mut t = ProductTrajectory::new(&e, RngStream::new(11, 0)).with_history();
    t.run(&e, 3).unwrap();
    let h = t.history().unwrap();
    let naive = &(&h[0].matrix * &h[1].matrix) * &h[2].matrix;
    assert!((t.psi_n() - &naive).max_abs() < 1e-15);
    let rev = &(&h[2].matrix * &h[1].matrix) * &h[0].matrix;
    assert!((t.phi_n() - &rev).max_abs() < 1e-15);
}

#[test]
fn check_decomposition_examples() {
    let e = two_atoms();
    let mut t = ProductTrajectory::new(&e, RngStream::new(1, 0));
    t.step(&e).unwrap();
    assert!(check_decomposition(&t).unwrap() <= 1e-12);

    let e = bistochastic();
    let mut t = ProductTrajectory::new(&e, RngStream::new(1, 0));
    t.run(&e, 10).unwrap();
    assert!(check_decomposition(&t).unwrap() <= 1e-9);
}

#[test]
fn cesaro_of_constant_atom() {
    let e = MatrixEnsemble::single(stoch(0.3, 0.1)).unwrap();
    let psi = e.atoms().unwrap()[0].decomposition.psi.clone();
    let n = 1000;
    let c = cesaro(&e, n, CesaroTarget::Theta, RngStream::new(0, 0)).unwrap();
    assert!((&c.as_vector() - &psi).norm() <= 1.0 / n as f64);
}

#[test]
fn cesaro_psi_product_is_rank_one() {
    let e = two_atoms();
    let n = 100_000;
    let c = cesaro(&e, n, CesaroTarget::PsiProduct, RngStream::new(5, 0)).unwrap();
    let theta = e.theta_limit(1e-8).unwrap().theta;
    let want = ComplexMatrix::outer(e.psi_s(), &theta);
    assert!(operator_norm(&(&c.as_matrix() - &want)) <= 5.0 / (n as f64).sqrt());
}

#[test]
fn mixed_ensemble_decays() {
    let good = as_rrdo(
        &StochasticMatrix::new(&[
            vec![0.5, 0.3, 0.2],
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
        ])
        .unwrap(),
    );
    let idem = as_rrdo(
        &StochasticMatrix::new(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap(),
    );
    let e = MatrixEnsemble::finite(vec![(good, 0.1), (idem, 0.9)]).unwrap();
    for seed in [1, 2, 3] {
        let mut t = ProductTrajectory::new(&e, RngStream::new(seed, 0));
        t.run(&e, 2000).unwrap();
        let f = decay_fit(&t, Some(1000)).unwrap();
        assert!(f.alpha_hat.unwrap() > 0.0, "seed {}: {:?}", seed, f);
    }
}

#[test]
fn forward_limit_examples() {
    let e = MatrixEnsemble::single(stoch(0.3, 0.1)).unwrap();
    let psi = e.atoms().unwrap()[0].decomposition.psi.clone();
    match forward_limit(&e, 400, 1e-10, RngStream::new(0, 0)).unwrap() {
        ForwardLimit::Converged {
            limit, rank_one, ..
        } => {
            let want = ComplexMatrix::outer(e.psi_s(), &psi);
            assert!((&limit - &want).max_abs() < 1e-10);
            assert!((&rank_one.unwrap() - &want).max_abs() < 1e-12);
        }
        other => panic!("{:?}", other),
    }

    let e = bistochastic();
    match forward_limit(&e, 400, 1e-10, RngStream::new(0, 0)).unwrap() {
        ForwardLimit::Converged { limit, .. } => {
            assert!((&limit - &uniform_outer(2)).max_abs() < 1e-10)
        }
        other => panic!("{:?}", other),
    }

    let f = forward_limit(&two_atoms(), 400, 1e-6, RngStream::new(0, 0)).unwrap();
    assert!(!f.is_converged());
}

#[test]
fn eta_infinity_examples() {
    let e = MatrixEnsemble::single(stoch(0.3, 0.1)).unwrap();
    let d = &e.atoms().unwrap()[0].decomposition;
    // (𝟙 − M_Q*)⁻¹ ψ
    let id = ComplexMatrix::identity(2);
    let geo = inverse(&(&id - &d.m_q.adjoint())).unwrap().mul_vec(&d.psi);
    let mut t = ProductTrajectory::new(&e, RngStream::new(0, 0));
    let eta = eta_infinity(&mut t, &e, 10_000, 1e-15).unwrap();
    assert!((&eta - &geo).norm() < 1e-12);
    assert!((&eta - &d.psi).norm() < 1e-12);

    let e = bistochastic();
    let mut t = ProductTrajectory::new(&e, RngStream::new(0, 0));
    let eta = eta_infinity(&mut t, &e, 10_000, 1e-15).unwrap();
    assert!((&eta - e.psi_s()).norm() < 1e-12);
}

#[test]
fn eta_infinity_mean_is_theta() {
    let e = two_atoms();
    let theta = e.theta_limit(1e-8).unwrap().theta;
    let mut w = [Welford::new(), Welford::new()];
    for k in 0..10_000 {
        let mut t = ProductTrajectory::new(&e, RngStream::new(77, k));
        let eta = eta_infinity(&mut t, &e, 100_000, 1e-13).unwrap();
        for (i, wi) in w.iter_mut().enumerate() {
            wi.add(eta[i].re);
        }
    }
    for (i, wi) in w.iter().enumerate() {
        assert!(
            (wi.mean() - theta[i].re).abs() <= 3.0 * wi.std_error(),
            "component {}",
            i
        );
    }
}

#[test]
fn markov_positivity_of_dirichlet_rows() {
    let mut rng = RngStream::new(8, 0);
    for _ in 0..1000 {
        let m = StochasticMatrix::from_matrix(&dirichlet_rows(3, 1.0, &mut rng).unwrap()).unwrap();
        assert!(positive_entries(&m, 0.0));
    }
}

#[test]
fn bistochastic_products_converge_without_averaging() {
    let e = bistochastic();
    let mut t = ProductTrajectory::new(&e, RngStream::new(4, 0));
    t.run(&e, 200).unwrap();
    assert!((t.phi_n() - &uniform_outer(2)).max_abs() < 1e-10);
    assert!((t.psi_n() - &uniform_outer(2)).max_abs() < 1e-10);
}

#[test]
fn chain_rows_agree() {
    let e = MatrixEnsemble::dirichlet(3, 1.0).unwrap();
    let c = run_chain(&e, 100, RngStream::new(2, 0)).unwrap();
    assert!(c.rank_one_residual <= 1e-10);
    for i in 0..3 {
        for j in 0..3 {
            assert!((c.phi_n[(i, j)].re - c.limiting_row[j]).abs() <= 1e-9);
        }
    }
    let s: f64 = c.limiting_row.iter().sum();
    assert!((s - 1.0).abs() < 1e-12);
}

/// Random stochastic ensemble with 2 to 4 atoms of dimension 2 to 4.
fn stochastic_ensemble() -> impl Strategy<Value = MatrixEnsemble> {
    (2usize..5, 2usize..5).prop_flat_map(|(d, k)| {
        (
            prop::collection::vec(prop::collection::vec(0.01..1.0f64, d * d), k),
            prop::collection::vec(0.1..1.0f64, k),
        )
            .prop_map(move |(ms, ws)| {
                let total: f64 = ws.iter().sum();
                let atoms = ms
                    .into_iter()
                    .zip(ws)
                    .map(|(v, w)| {
                        let rows: Vec<Vec<f64>> = v
                            .chunks(d)
                            .map(|r| {
                                let s: f64 = r.iter().sum();
                                r.iter().map(|x| x / s).collect()
                            })
                            .collect();
                        (as_rrdo(&StochasticMatrix::new(&rows).unwrap()), w / total)
                    })
                    .collect();
                MatrixEnsemble::finite(atoms).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn trajectory_invariants(e in stochastic_ensemble(), seed in any::<u64>()) {
        let mut t = ProductTrajectory::new(&e, RngStream::new(seed, 0)).with_history();
        let one = c64::new(1.0, 0.0);
        let d = e.dim();
        for n in 1..=100usize {
            let rec = t.step(&e).unwrap();
            let tol = 1e-8 * n as f64;
            prop_assert!(check_decomposition(&t).unwrap() <= tol);
            prop_assert!(check_reverse_decomposition(&t).unwrap() <= tol);
            prop_assert!((e.psi_s().dot(&rec.theta) - one).norm() <= tol);
            prop_assert!((e.psi_s().dot(&rec.eta) - one).norm() <= tol);
            prop_assert!(operator_norm(t.psi_n()) <= t.c0_observed());
            prop_assert!(operator_norm(t.phi_n()) <= t.c0_observed());
            prop_assert!(rec.theta.norm() <= t.c0_observed().powi(2) + 1e-12);
            for i in 0..d {
                let s: f64 = t.phi_n().row(i).iter().map(|z| z.re).sum();
                prop_assert!((s - 1.0).abs() <= 1e-9 * n as f64);
                prop_assert!(t.phi_n().row(i).iter().all(|z| z.re >= -1e-12));
            }
        }
        prop_assert!(check_decomposition(&t).unwrap() <= 1e-6);

        // η_n = M_1* ⋯ M_n* ψ_n computed directly from the draws
        let h = t.history().unwrap();
        let mut direct = h.last().unwrap().psi.clone();
        for draw in h.iter().rev().skip(1) {
            direct = draw.matrix.adjoint_mul_vec(&direct);
        }
        prop_assert!((&direct - t.eta_n()).norm() <= 1e-8 * h.len() as f64);

        // θ_n = M_n* ⋯ M_2* ψ_1
        let mut theta = h[0].psi.clone();
        for draw in &h[1..] {
            theta = draw.matrix.adjoint_mul_vec(&theta);
        }
        prop_assert!((&theta - t.theta_n().unwrap()).norm() <= 1e-8 * h.len() as f64);
    }

    /// With `Φ = 𝟙πᵀ + E`, `‖E‖ ≤ √d‖π‖σ₂`, so rows differ by at most
    /// `√(2d)‖π‖σ₂`; the bound is attained for `d = 2`.
    #[test]
    fn rows_agree_within_rank_one_residual(e in stochastic_ensemble(), seed in any::<u64>()) {
        let c = run_chain(&e, 30, RngStream::new(seed, 0)).unwrap();
        let d = e.dim();
        let s2 = singular_values(&c.phi_n)[1];
        prop_assert!((s2 - c.rank_one_residual).abs() < 1e-15);
        let pi_norm = c.limiting_row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let bound = (2.0 * d as f64).sqrt() * pi_norm * c.rank_one_residual;
        for i in 0..d {
            for k in 0..d {
                let diff: f64 = (0..d).map(|j| (c.phi_n[(i, j)] - c.phi_n[(k, j)]).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(diff <= bound * (1.0 + 1e-6) + 1e-15, "diff {:e} bound {:e}", diff, bound);
            }
        }
    }
}
