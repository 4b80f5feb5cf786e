use rrdo_core::linalg::singular_values;
use rrdo_core::markov::{pi_from_eta, run_chain_with, ChainResult};
use rrdo_core::stats::Welford;
use rrdo_core::ComplexVector;

use super::{complex_json, max_of, traced, Ctx};
use crate::report::Verdict;
use crate::LabError;

/// `max_j (max_i Φ_ij − min_i Φ_ij)`
fn row_spread(r: &ChainResult) -> f64 {
    let d = r.phi_n.dim();
    (0..d)
        .map(|j| {
            let col = (0..d).map(|i| r.phi_n[(i, j)].re);
            let hi = col.clone().fold(f64::NEG_INFINITY, f64::max);
            let lo = col.fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Columns: `sigma_2`, the second singular value of `Φ_n`.
pub(crate) fn markov(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    ctx.open_trace(&["sigma_2".into()])?;
    let limit = ctx.ensemble.theta_limit(ctx.tol("cluster"))?;
    let d = ctx.ensemble.dim();
    let n = ctx.steps();
    let chains = traced(ctx, |c, i| {
        let mut rows = Vec::with_capacity(n);
        let res = run_chain_with(&c.ensemble, n, c.rng(i), |t| {
            let s = if d > 1 {
                singular_values(t.phi_n())[1]
            } else {
                0.0
            };
            rows.push(vec![i.into(), t.n_steps().into(), s.into()]);
        })?;
        Ok((rows, res))
    })?;

    let sigma2 = max_of(chains.iter().map(|r| r.rank_one_residual));
    let spread = max_of(chains.iter().map(row_spread));
    let mut eta = vec![Welford::new(); d];
    let mut rows_mean = vec![Welford::new(); d];
    let mut eta_steps = Welford::new();
    for r in &chains {
        for (w, z) in eta.iter_mut().zip(r.eta_inf.as_slice()) {
            w.add(z.re);
        }
        for (w, p) in rows_mean.iter_mut().zip(&r.limiting_row) {
            w.add(*p);
        }
        eta_steps.add(r.eta_steps as f64);
    }

    ctx.verdict(
        Verdict::at_most(4, "rank-one", sigma2, ctx.tol("rank_one"))
            .with_detail(format!("second singular value of Phi_n at n = {}", n)),
    );
    ctx.verdict(Verdict::at_most(
        4,
        "rows-agree",
        spread,
        ctx.tol("row_agreement"),
    ));
    let t = chains.len();
    if t >= 2 {
        let z = max_of(
            eta.iter()
                .zip(limit.theta.as_slice())
                .map(|(w, th)| (w.mean() - th.re).abs() / w.std_error()),
        );
        ctx.verdict(
            Verdict::at_most(4, "eta-mean", z, ctx.tol("std_errors")).with_detail(format!(
                "max componentwise |E[eta_inf] - theta| in standard errors over {} trajectories",
                t
            )),
        );
    }
    let eta_mean: Vec<f64> = eta.iter().map(Welford::mean).collect();
    ctx.metric("theta", complex_json(&limit.theta));
    ctx.metric("eta_mean", eta_mean.clone());
    ctx.metric(
        "eta_std_error",
        eta.iter().map(Welford::std_error).collect::<Vec<_>>(),
    );
    ctx.metric(
        "pi_from_eta_mean",
        pi_from_eta(&ComplexVector::from_real(&eta_mean)?),
    );
    ctx.metric(
        "limiting_row_mean",
        rows_mean.iter().map(Welford::mean).collect::<Vec<_>>(),
    );
    ctx.metric("max_sigma_2", sigma2);
    ctx.metric("max_row_spread", spread);
    ctx.metric("mean_eta_steps", eta_steps.mean());
    Ok(())
}
