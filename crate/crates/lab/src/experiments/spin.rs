use rrdo_core::linalg::{eigenvalues, operator_norm};
use rrdo_core::products::{cesaro_with, CesaroTarget, ProductTrajectory};
use rrdo_core::rng::RngStream;
use rrdo_core::rrdo::decompose;
use rrdo_core::spin::{
    asymptotic_temperature, build_gns, build_m, e0, expectation, factorization_check, gibbs_limit,
    resonance_period, Factor, SpinParams,
};
use rrdo_core::stats::fit_line;
use rrdo_core::{c64, ComplexMatrix};

use super::{max_of, min_of, traced, Ctx};
use crate::config::EnsembleSpec;
use crate::report::Verdict;
use crate::LabError;

/// Residuals at or below this are treated as converged to rounding level
/// and left out of the rate fit.
const RESIDUAL_FLOOR: f64 = 1e-13;

fn base_params(ctx: &Ctx<'_>) -> SpinParams {
    match &ctx.cfg.ensemble {
        EnsembleSpec::Spin {
            e_s,
            e_e,
            beta,
            lambda,
            tau,
            ..
        } => SpinParams {
            e_s: e_s.representative(),
            e_e: e_e.representative(),
            beta: beta.representative(),
            lambda: lambda.representative(),
            tau: tau.representative(),
        },
        _ => unreachable!("spin experiments are validated to carry a spin ensemble"),
    }
}

fn excited_projector() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[c64::new(0.0, 0.0), c64::new(1.0, 0.0)])
}

struct TauRun {
    final_residual: f64,
    slope: f64,
    r_squared: f64,
    fitted_points: usize,
}

/// Columns: `atom, gibbs_residual, log_mq_norm` with
/// `gibbs_residual = ‖Ψ_n − (2/Z)|ψ_S⟩⟨e^{−β′h_S}⊗𝟙 ψ_S|‖`.
pub(crate) fn spin_tau(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    ctx.open_trace(&["atom".into(), "gibbs_residual".into(), "log_mq_norm".into()])?;
    let base = base_params(ctx);
    let limit = gibbs_limit(&base);
    let n = ctx.steps();
    let target = &limit.target_projector;
    let runs = traced(ctx, |c, i| {
        let e = &c.ensemble;
        let mut t = ProductTrajectory::new(e, c.rng(i));
        let mut rows = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for _ in 0..n {
            let rec = t.step(e)?;
            let r = operator_norm(&(t.psi_n() - target));
            residuals.push(r);
            rows.push(vec![
                i.into(),
                rec.n.into(),
                rec.atom.into(),
                r.into(),
                rec.log_mq_norm.into(),
            ]);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = (n - n / 2..n)
            .filter(|&k| residuals[k] > RESIDUAL_FLOOR)
            .map(|k| ((k + 1) as f64, residuals[k].ln()))
            .unzip();
        let fit = fit_line(&xs, &ys);
        Ok((
            rows,
            TauRun {
                final_residual: residuals[n - 1],
                slope: fit.as_ref().map_or(f64::NAN, |f| f.slope),
                r_squared: fit.as_ref().map_or(f64::NAN, |f| f.r_squared),
                fitted_points: xs.len(),
            },
        ))
    })?;

    ctx.verdict(
        Verdict::at_most(
            7,
            "gibbs-limit",
            max_of(runs.iter().map(|r| r.final_residual)),
            ctx.tol("gibbs_residual"),
        )
        .with_detail(format!(
            "residual at n = {}, beta' = {}",
            n, limit.beta_prime
        )),
    );
    let r2_min = ctx.tol("r_squared_min");
    let floor_only = runs.iter().all(|r| r.fitted_points < 2);
    let rate_ok = |r: &TauRun| r.fitted_points < 2 || (r.slope < 0.0 && r.r_squared >= r2_min);
    let failing = runs.iter().filter(|r| !rate_ok(r)).count();
    ctx.verdict(
        Verdict::new(
            7,
            "gibbs-rate",
            failing == 0,
            max_of(
                runs.iter()
                    .filter(|r| r.fitted_points >= 2)
                    .map(|r| r.slope),
            ),
            format!("log-residual slope < 0 with r^2 >= {}", r2_min),
        )
        .with_detail(if floor_only {
            "residual at rounding level over the fit window".to_string()
        } else {
            format!(
                "{} of {} trajectories fail, min r^2 = {:e}",
                failing,
                runs.len(),
                min_of(
                    runs.iter()
                        .filter(|r| r.fitted_points >= 2)
                        .map(|r| r.r_squared)
                )
            )
        }),
    );

    let period = resonance_period(&base)?;
    let cluster_tol = ctx.tol("cluster");
    let margin = ctx.tol("resonance_margin");
    let dim_at = |tau: f64| -> rrdo_core::Result<usize> {
        Ok(decompose(&build_m(&SpinParams { tau, ..base })?, cluster_tol)?.cluster_dim())
    };
    let mut resonant = Vec::new();
    for k in 1..=2 {
        resonant.push(dim_at(k as f64 * period)?);
    }
    let mut off = Vec::new();
    for k in 0..3 {
        for f in [margin, 0.25, 0.5, 0.75, 1.0 - margin] {
            off.push(dim_at((k as f64 + f) * period)?);
        }
    }
    let min_res = resonant.iter().copied().min().unwrap_or(0);
    let max_off = off.iter().copied().max().unwrap_or(0);
    ctx.verdict(
        Verdict::at_least(9, "resonance-degenerate", min_res as f64, 2.0).with_detail(format!(
            "eigenvalue-1 cluster dimension at tau = T, 2T (T = {})",
            period
        )),
    );
    ctx.verdict(
        Verdict::at_most(9, "off-resonance-simple", max_off as f64, 1.0).with_detail(format!(
            "max cluster dimension over {} interaction times with d(tau, TZ) >= {} T",
            off.len(),
            margin
        )),
    );

    ctx.metric("beta_prime", limit.beta_prime);
    ctx.metric("resonance_period", period);
    ctx.metric(
        "final_residual",
        runs.iter().map(|r| r.final_residual).collect::<Vec<_>>(),
    );
    ctx.metric(
        "residual_slope",
        runs.iter().map(|r| r.slope).collect::<Vec<_>>(),
    );
    ctx.metric(
        "residual_r_squared",
        runs.iter().map(|r| r.r_squared).collect::<Vec<_>>(),
    );
    ctx.metric("resonant_cluster_dims", resonant);
    ctx.metric("off_resonance_cluster_dims", off);
    Ok(())
}

/// Columns: `atom, excited, running_mean`, where `excited` is the
/// population of the upper level read off `θ_n`.
pub(crate) fn spin_energy(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    ctx.open_trace(&["atom".into(), "excited".into(), "running_mean".into()])?;
    let atoms = ctx
        .cfg
        .ensemble
        .spin_dist()
        .and_then(|d| d.enumerate())
        .expect("spin-energy is validated to have finite support");
    let at = asymptotic_temperature(&atoms)?;
    let a = excited_projector();
    let n = ctx.steps();
    let populations = traced(ctx, |c, i| {
        let mut rows = Vec::with_capacity(n);
        let mut sum = 0.0;
        let res = cesaro_with(&c.ensemble, n, CesaroTarget::Theta, c.rng(i), |rec, _| {
            let x = expectation(&rec.theta, &a).map_or(f64::NAN, |z| z.re);
            sum += x;
            rows.push(vec![
                i.into(),
                rec.n.into(),
                rec.atom.into(),
                x.into(),
                (sum / rec.n as f64).into(),
            ]);
        })?;
        Ok((rows, expectation(&res.as_vector(), &a)?.re))
    })?;

    let bound = ctx.tol("sigma_multiple") / (n as f64).sqrt() + ctx.tol("bias");
    let dev = max_of(
        populations
            .iter()
            .map(|p| (p - at.excited_population).abs()),
    );
    ctx.verdict(
        Verdict::at_most(8, "random-energies", dev, bound).with_detail(format!(
            "Cesaro excited population against the Gibbs value at beta~ = {}",
            at.beta_tilde
        )),
    );
    let mut degenerate = Vec::with_capacity(atoms.len());
    for (p, _) in &atoms {
        let single = asymptotic_temperature(&[(*p, 1.0)])?;
        degenerate.push((single.beta_tilde - p.beta_prime()).abs());
    }
    ctx.verdict(
        Verdict::at_most(
            8,
            "constant-degeneration",
            max_of(degenerate.iter().copied()),
            ctx.tol("beta_degenerate"),
        )
        .with_detail("|beta~ - beta'| for each atom taken alone"),
    );
    ctx.metric("beta_tilde", at.beta_tilde);
    ctx.metric("x", at.x);
    ctx.metric("kappa_mean", at.kappa_mean);
    ctx.metric("excited_population", at.excited_population);
    ctx.metric("gibbs_crosscheck", at.gibbs_crosscheck);
    ctx.metric("cesaro_excited", populations);
    Ok(())
}

fn random_2x2(rng: &mut RngStream) -> ComplexMatrix {
    let data = (0..4)
        .map(|_| c64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)))
        .collect();
    ComplexMatrix::new(2, data).expect("four entries")
}

#[derive(Default)]
struct Checks {
    kernel: f64,
    tomita: f64,
    intertwining: f64,
    factorization: f64,
    e0: f64,
}

/// Columns: `kernel, tomita_system, tomita_probe, intertwining,
/// factorization, e0_distance`; each row is one random draw of parameters
/// and algebra elements.
pub(crate) fn factorization(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    let cols = [
        "kernel",
        "tomita_system",
        "tomita_probe",
        "intertwining",
        "factorization",
        "e0_distance",
    ];
    ctx.open_trace(&cols.map(String::from))?;
    let dist = ctx.cfg.ensemble.spin_dist().expect("spin ensemble");
    let n = ctx.steps();
    let runs = traced(ctx, |c, i| {
        let mut rng = c.rng(i);
        let mut rows = Vec::with_capacity(n);
        let mut worst = Checks::default();
        for k in 1..=n {
            let p1 = dist.draw(&mut rng);
            let p2 = dist.draw(&mut rng);
            let a_s = random_2x2(&mut rng);
            let a_e = random_2x2(&mut rng);
            let g = build_gns(&p1)?;
            let kernel = g.kernel_residual();
            let ts = g.tomita_residual(Factor::System, &a_s);
            let tp = g.tomita_residual(Factor::Probe, &a_e);
            let inter = g.intertwining_residual(&a_s, &a_e)?;
            let fac = factorization_check(&p1, &p2)?;
            let z = e0(&p1)?;
            let e0_dist = min_of(
                eigenvalues(build_m(&p1)?.matrix())?
                    .iter()
                    .map(|w| (w - z).norm()),
            );
            worst.kernel = max_of([worst.kernel, kernel]);
            worst.tomita = max_of([worst.tomita, ts, tp]);
            worst.intertwining = max_of([worst.intertwining, inter]);
            worst.factorization = max_of([worst.factorization, fac]);
            worst.e0 = max_of([worst.e0, e0_dist]);
            rows.push(vec![
                i.into(),
                k.into(),
                kernel.into(),
                ts.into(),
                tp.into(),
                inter.into(),
                fac.into(),
                e0_dist.into(),
            ]);
        }
        Ok((rows, worst))
    })?;

    let samples = n * runs.len();
    let worst = |f: fn(&Checks) -> f64| max_of(runs.iter().map(f));
    ctx.verdict(Verdict::at_most(
        6,
        "kernel",
        worst(|c| c.kernel),
        ctx.tol("kernel"),
    ));
    ctx.verdict(Verdict::at_most(
        6,
        "tomita",
        worst(|c| c.tomita),
        ctx.tol("tomita"),
    ));
    ctx.verdict(
        Verdict::at_most(
            6,
            "intertwining",
            worst(|c| c.intertwining),
            ctx.tol("intertwining"),
        )
        .with_detail(format!("{} random algebra elements", samples)),
    );
    ctx.verdict(
        Verdict::at_most(
            6,
            "factorization",
            worst(|c| c.factorization),
            ctx.tol("factorization"),
        )
        .with_detail(format!("{} random parameter pairs", samples)),
    );
    ctx.verdict(
        Verdict::at_most(6, "e0-in-spectrum", worst(|c| c.e0), ctx.tol("e0_spectrum")).with_detail(
            format!(
                "distance from e0 to spectrum(M) over {} parameter points",
                samples
            ),
        ),
    );
    ctx.metric("samples", samples);
    Ok(())
}
