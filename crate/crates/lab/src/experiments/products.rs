use rrdo_core::linalg::operator_norm;
use rrdo_core::products::{
    cesaro_with, check_decomposition, decay_fit, forward_limit_with, lyapunov_with, CesaroTarget,
    ForwardLimit, ProductTrajectory,
};
use rrdo_core::{ComplexMatrix, ComplexVector};
use serde_json::json;

use super::{complex_json, indexed, max_of, min_of, traced, Ctx};
use crate::report::Verdict;
use crate::trace::{Cell, Row};
use crate::LabError;

/// `-ln sr(M_Q)` when the ensemble is a single atom in `ℳ_(E)`.
fn constant_rate(ctx: &Ctx<'_>) -> Option<f64> {
    match ctx.ensemble.atoms()? {
        [a] if a.decomposition.in_me && a.decomposition.sr_mq > 0.0 => {
            Some(-a.decomposition.sr_mq.ln())
        }
        _ => None,
    }
}

struct DecayRun {
    max_ratio: f64,
    slope: f64,
    r_squared: f64,
    onset_n0: usize,
    c_hat: f64,
    annihilated: bool,
}

/// Columns: `atom, log_mq_norm, decomposition_residual`.
pub(crate) fn decay(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    ctx.open_trace(&[
        "atom".into(),
        "log_mq_norm".into(),
        "decomposition_residual".into(),
    ])?;
    let n = ctx.steps();
    let runs = traced(ctx, |c, i| {
        let e = &c.ensemble;
        let mut t = ProductTrajectory::new(e, c.rng(i));
        let mut rows = Vec::with_capacity(n);
        let mut max_ratio = 0.0f64;
        for _ in 0..n {
            let rec = t.step(e)?;
            let res = check_decomposition(&t)?;
            max_ratio = max_of([max_ratio, res / rec.n as f64]);
            rows.push(vec![
                i.into(),
                rec.n.into(),
                rec.atom.into(),
                rec.log_mq_norm.into(),
                res.into(),
            ]);
        }
        let fit = decay_fit(&t, None)?;
        Ok((
            rows,
            DecayRun {
                max_ratio,
                slope: fit.slope,
                r_squared: fit.r_squared,
                onset_n0: fit.onset_n0,
                c_hat: fit.c_hat,
                annihilated: fit.exact_annihilation,
            },
        ))
    })?;

    let worst = max_of(runs.iter().map(|r| r.max_ratio));
    ctx.verdict(
        Verdict::at_most(
            1,
            "decomposition-identity",
            worst,
            ctx.tol("decomposition_per_step"),
        )
        .with_detail("max over trajectories and n of residual / n"),
    );

    let r2_min = ctx.tol("r_squared_min");
    let decays = |r: &DecayRun| r.annihilated || (-r.slope > 0.0 && r.r_squared >= r2_min);
    let failing = runs.iter().filter(|r| !decays(r)).count();
    ctx.verdict(
        Verdict::new(
            2,
            "decay-rate",
            failing == 0,
            min_of(runs.iter().map(|r| -r.slope)),
            format!("alpha_hat > 0 with r^2 >= {} on every trajectory", r2_min),
        )
        .with_detail(format!(
            "{} of {} trajectories fail, min r^2 = {:e}",
            failing,
            runs.len(),
            min_of(runs.iter().map(|r| r.r_squared))
        )),
    );
    if let Some(alpha) = constant_rate(ctx) {
        let rel = max_of(runs.iter().map(|r| (-r.slope - alpha).abs() / alpha));
        ctx.verdict(
            Verdict::at_most(2, "decay-rate-oracle", rel, ctx.tol("alpha_rel"))
                .with_detail(format!("relative error against -ln sr(M_Q) = {:e}", alpha)),
        );
        ctx.metric("alpha_oracle", alpha);
    }

    ctx.metric(
        "alpha_hat",
        runs.iter().map(|r| -r.slope).collect::<Vec<_>>(),
    );
    ctx.metric(
        "r_squared",
        runs.iter().map(|r| r.r_squared).collect::<Vec<_>>(),
    );
    ctx.metric("c_hat", runs.iter().map(|r| r.c_hat).collect::<Vec<_>>());
    ctx.metric(
        "onset_n0",
        runs.iter().map(|r| r.onset_n0).collect::<Vec<_>>(),
    );
    ctx.metric(
        "exact_annihilation",
        runs.iter().map(|r| r.annihilated).collect::<Vec<_>>(),
    );
    ctx.metric("max_decomposition_ratio", worst);
    Ok(())
}

fn theta_row(i: usize, n: usize, atom: Option<usize>, theta: &ComplexVector) -> Row {
    let mut row: Row = vec![i.into(), n.into(), atom.into()];
    for z in theta.as_slice() {
        row.push(Cell::Float(z.re));
        row.push(Cell::Float(z.im));
    }
    row
}

/// Columns: `atom, theta_re_k, theta_im_k` for each component `k`.
pub(crate) fn cesaro(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    let d = ctx.ensemble.dim();
    let mut cols = vec!["atom".to_string()];
    for k in 1..=d {
        cols.push(format!("theta_re_{}", k));
        cols.push(format!("theta_im_{}", k));
    }
    ctx.open_trace(&cols)?;
    let limit = ctx.ensemble.theta_limit(ctx.tol("cluster"))?;
    let n = ctx.steps();
    let means = traced(ctx, |c, i| {
        let mut rows = Vec::with_capacity(n);
        let res = cesaro_with(&c.ensemble, n, CesaroTarget::Theta, c.rng(i), |rec, _| {
            rows.push(theta_row(i, rec.n, rec.atom, &rec.theta));
        })?;
        Ok((rows, res))
    })?;

    let dist: Vec<f64> = means
        .iter()
        .map(|m| (&m.as_vector() - &limit.theta).norm())
        .collect();
    let bound = ctx.tol("sigma_multiple") / (n as f64).sqrt();
    ctx.verdict(
        Verdict::at_most(3, "cesaro-limit", max_of(dist.iter().copied()), bound)
            .with_detail("max over trajectories of |mean theta_n - theta|"),
    );
    if let Some(x) = limit.residual_crosscheck {
        ctx.verdict(Verdict::at_most(
            3,
            "closed-form-agreement",
            x,
            ctx.tol("closed_form_agreement"),
        ));
    }
    ctx.metric("theta", complex_json(&limit.theta));
    ctx.metric(
        "cesaro_mean",
        means
            .iter()
            .map(|m| complex_json(&m.as_vector()))
            .collect::<Vec<_>>(),
    );
    ctx.metric(
        "cesaro_std_error",
        means.iter().map(|m| json!(m.std_error)).collect::<Vec<_>>(),
    );
    ctx.metric("cesaro_distance", dist);
    ctx.metric("mean_in_me", limit.mean_in_me);
    Ok(())
}

/// Columns: `atom, psi_step_change, log_mq_norm`.
pub(crate) fn forward_limit(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    ctx.open_trace(&[
        "atom".into(),
        "psi_step_change".into(),
        "log_mq_norm".into(),
    ])?;
    let n = ctx.steps();
    let tol = ctx.tol("convergence");
    let limits = traced(ctx, |c, i| {
        let e = &c.ensemble;
        let mut rows = Vec::with_capacity(n);
        let mut prev = ComplexMatrix::identity(e.dim());
        let lim = forward_limit_with(e, n, tol, c.rng(i), |rec, t| {
            let change = operator_norm(&(t.psi_n() - &prev));
            prev = t.psi_n().clone();
            rows.push(vec![
                i.into(),
                rec.n.into(),
                rec.atom.into(),
                change.into(),
                rec.log_mq_norm.into(),
            ]);
        })?;
        Ok((rows, lim))
    })?;

    let constant = ctx.ensemble.constant_psi(1e-12).is_some();
    let mismatched = limits
        .iter()
        .filter(|l| l.is_converged() != constant)
        .count();
    ctx.verdict(
        Verdict::new(
            3,
            "forward-limit-dichotomy",
            mismatched == 0,
            mismatched as f64,
            if constant {
                "every trajectory converges"
            } else {
                "every trajectory fluctuates"
            },
        )
        .with_detail(format!(
            "{} of {} trajectories disagree",
            mismatched,
            limits.len()
        )),
    );
    let rank_one: Vec<f64> = limits
        .iter()
        .filter_map(|l| match l {
            ForwardLimit::Converged {
                limit,
                rank_one: Some(r),
                ..
            } => Some(operator_norm(&(limit - r))),
            _ => None,
        })
        .collect();
    if !rank_one.is_empty() {
        ctx.verdict(
            Verdict::at_most(
                3,
                "forward-limit-rank-one",
                max_of(rank_one.iter().copied()),
                tol,
            )
            .with_detail("|Psi_N - |psi_S><psi||"),
        );
    }
    ctx.metric("psi_constant", constant);
    ctx.metric(
        "converged",
        limits.iter().map(|l| l.is_converged()).collect::<Vec<_>>(),
    );
    ctx.metric(
        "sup_deviation",
        limits.iter().map(|l| l.sup_deviation()).collect::<Vec<_>>(),
    );
    Ok(())
}

/// Columns: `gamma_1 … gamma_d`, running estimates in descending order.
pub(crate) fn lyapunov(ctx: &mut Ctx<'_>) -> Result<(), LabError> {
    let d = ctx.ensemble.dim();
    ctx.open_trace(&indexed("gamma", d))?;
    let n = ctx.steps();
    let reports = traced(ctx, |c, i| {
        let e = &c.ensemble;
        let mut rows = Vec::with_capacity(n);
        let rep = lyapunov_with(e, n, c.rng(i), |k, g| {
            let mut row: Row = vec![i.into(), k.into()];
            row.extend(g.iter().map(|&x| Cell::Float(x)));
            rows.push(row);
        })?;
        // the same stream replays the same draws
        let mut t = ProductTrajectory::new(e, c.rng(i));
        t.run(e, n)?;
        let fit = decay_fit(&t, None)?;
        Ok((rows, (rep, fit)))
    })?;

    let top = max_of(reports.iter().map(|(r, _)| r.exponents[0].abs()));
    ctx.verdict(Verdict::at_most(
        5,
        "top-exponent",
        top,
        ctx.tol("top_exponent"),
    ));
    let ratio = min_of(reports.iter().map(|(r, f)| match f.alpha_hat {
        Some(a) if a > 0.0 => r.top_multiplicity_gap / a,
        _ if f.exact_annihilation => f64::INFINITY,
        _ => f64::NAN,
    }));
    ctx.verdict(
        Verdict::at_least(5, "exponent-gap", ratio, ctx.tol("gap_fraction"))
            .with_detail("min over trajectories of (gamma_1 - gamma_2) / alpha_hat"),
    );
    ctx.metric(
        "exponents",
        reports
            .iter()
            .map(|(r, _)| json!(r.exponents))
            .collect::<Vec<_>>(),
    );
    ctx.metric(
        "alpha_hat",
        reports
            .iter()
            .map(|(_, f)| json!(f.alpha_hat))
            .collect::<Vec<_>>(),
    );
    ctx.metric(
        "gap",
        reports
            .iter()
            .map(|(r, _)| r.top_multiplicity_gap)
            .collect::<Vec<_>>(),
    );
    Ok(())
}
