//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::time::Instant;

use rrdo_lab::{parse_config, run, RunReport, TRACE_FILE};
use serde_json::{json, Value};

struct Outcome {
    passed: bool,
    summary: String,
    lines: Vec<String>,
}

impl Outcome {
    fn failed(summary: impl Into<String>) -> Self {
        Self {
            passed: false,
            summary: summary.into(),
            lines: Vec::new(),
        }
    }
}

fn run_json(cfg: Value, out: &Path, threads: usize) -> Result<RunReport, String> {
    let mut cfg = cfg;
    cfg["output_dir"] = json!(out);
    let cfg = parse_config(&cfg.to_string()).map_err(|e| e.to_string())?;
    let report = run(&cfg, threads).map_err(|e| e.to_string())?;
    match &report.error {
        Some(e) => Err(format!("numerical failure: {}", e)),
        None => Ok(report),
    }
}

/// All verdicts tagged `criterion` pass (and there is at least one).
fn tagged(report: &RunReport, criterion: u8, prefix: &str) -> Outcome {
    let vs: Vec<_> = report.verdicts_for(criterion).collect();
    let passed = !vs.is_empty() && vs.iter().all(|v| v.passed);
    let lines = vs
        .iter()
        .map(|v| format!("{}{}", prefix, v.line()))
        .collect();
    Outcome {
        passed,
        summary: format!("{} checks", vs.len()),
        lines,
    }
}

fn merge(parts: Vec<Outcome>, summary: String) -> Outcome {
    Outcome {
        passed: parts.iter().all(|p| p.passed),
        summary,
        lines: parts.into_iter().flat_map(|p| p.lines).collect(),
    }
}

fn spin_base() -> Value {
    json!({"kind": "spin", "e_s": 1.0, "e_e": 0.5, "beta": 1.0, "lambda": 0.1, "tau": 1.0})
}

fn dirichlet_decay() -> Value {
    json!({
        "experiment": "decay",
        "ensemble": {"kind": "dirichlet", "dim": 3, "alpha": 1.0},
        "steps": 500,
        "trajectories": 20,
        "seed": 1,
        "tolerances": {"decomposition_per_step": 1e-8}
    })
}

fn c1(dir: &Path) -> Result<Outcome, String> {
    let r = run_json(dirichlet_decay(), &dir.join("c1"), 4)?;
    let mut o = tagged(&r, 1, "    ");
    o.summary = "20 Dirichlet(1) d=3 trajectories, |Psi_n - |psi_S><theta_n| - prod M_Q| <= 1e-8 n for n <= 500".into();
    Ok(o)
}

fn c2(dir: &Path) -> Result<Outcome, String> {
    let mut parts = Vec::new();
    for seed in [1u64, 2, 3] {
        let cfg = json!({
            "experiment": "decay",
            "ensemble": {"kind": "stochastic", "atoms": [
                {"rows": [[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]], "weight": 0.1, "label": "mixing"},
                {"rows": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]], "weight": 0.9, "label": "idempotent"}
            ]},
            "steps": 2000,
            "trajectories": 1,
            "seed": seed,
            "tolerances": {"r_squared_min": 0.9}
        });
        let r = run_json(cfg, &dir.join(format!("c2-{}", seed)), 4)?;
        parts.push(tagged(&r, 2, &format!("    seed {}: ", seed)));
    }
    Ok(merge(parts, "mixed ensemble (0.1 in M_E, 0.9 idempotent), alpha_hat > 0 with r^2 >= 0.9 on 3 seeds, n = 2000".into()))
}

fn c3(dir: &Path) -> Result<Outcome, String> {
    let n = 100_000usize;
    let cfg = json!({
        "experiment": "cesaro",
        "ensemble": {"kind": "stochastic", "atoms": [
            {"rows": [[0.7, 0.3], [0.1, 0.9]], "weight": 0.5},
            {"rows": [[0.9, 0.1], [0.3, 0.7]], "weight": 0.5}
        ]},
        "steps": n,
        "seed": 3,
        "tolerances": {"sigma_multiple": 5.0, "closed_form_agreement": 1e-8}
    });
    let r = run_json(cfg, &dir.join("c3"), 4)?;
    let mut o = tagged(&r, 3, "    ");
    // closed form: sqrt(2) (1/2, 1/2)
    let mean = &r.metrics["cesaro_mean"][0];
    let want = std::f64::consts::SQRT_2 * 0.5;
    let dist = (0..2)
        .map(|k| {
            let re = mean[k][0].as_f64().unwrap_or(f64::NAN) - want;
            let im = mean[k][1].as_f64().unwrap_or(f64::NAN);
            re * re + im * im
        })
        .sum::<f64>()
        .sqrt();
    let bound = 5.0 / (n as f64).sqrt();
    let ok = dist <= bound;
    o.lines.push(format!(
        "    {} oracle |mean theta_n - sqrt2 (1/2, 1/2)| = {:e} <= {:e}",
        if ok { "PASS" } else { "FAIL" },
        dist,
        bound
    ));
    o.passed &= ok;
    o.summary = "two-atom stochastic ensemble, Cesaro mean of theta_n within 5/sqrt(N) of sqrt2 (1/2, 1/2) at N = 1e5, closed forms agree within 1e-8".into();
    Ok(o)
}

fn c4(dir: &Path) -> Result<Outcome, String> {
    let cfg = json!({
        "experiment": "markov",
        "ensemble": {"kind": "dirichlet", "dim": 3, "alpha": 1.0},
        "steps": 100,
        "trajectories": 10_000,
        "seed": 4,
        "tolerances": {"rank_one": 1e-10, "row_agreement": 1e-9, "std_errors": 3.0}
    });
    let r = run_json(cfg, &dir.join("c4"), 8)?;
    let mut o = tagged(&r, 4, "    ");
    o.summary = "Dirichlet(1) d=3, n = 100: sigma_2(Phi_n) <= 1e-10, rows agree within 1e-9, E[eta_inf] within 3 SE of theta over 1e4 trajectories".into();
    Ok(o)
}

fn c5(dir: &Path) -> Result<Outcome, String> {
    let mut ens = spin_base();
    ens["tau"] = json!({"uniform": [0.5, 1.5]});
    let cfg = json!({
        "experiment": "lyapunov",
        "ensemble": ens,
        "steps": 10_000,
        "seed": 5,
        "tolerances": {"top_exponent": 1e-3, "gap_fraction": 0.5}
    });
    let r = run_json(cfg, &dir.join("c5"), 4)?;
    let mut o = tagged(&r, 5, "    ");
    o.summary = "off-resonance spin ensemble, n = 1e4: |gamma_1| <= 1e-3, gamma_1 - gamma_2 >= 0.5 alpha_hat".into();
    Ok(o)
}

fn c6(dir: &Path) -> Result<Outcome, String> {
    let cfg = json!({
        "experiment": "factorization",
        "ensemble": {
            "kind": "spin",
            "e_s": {"uniform": [0.5, 2.0]},
            "e_e": {"uniform": [0.3, 2.0]},
            "beta": {"uniform": [0.1, 3.0]},
            "lambda": {"uniform": [0.05, 0.5]},
            "tau": {"uniform": [0.2, 3.0]}
        },
        "steps": 20,
        "seed": 6,
        "tolerances": {"kernel": 1e-12, "tomita": 1e-12, "intertwining": 1e-10, "factorization": 1e-10, "e0_spectrum": 1e-8}
    });
    let r = run_json(cfg, &dir.join("c6"), 4)?;
    let mut o = tagged(&r, 6, "    ");
    o.summary =
        "spin construction: kernel, Tomita, intertwining, factorization, e0 in spectrum(M)".into();
    Ok(o)
}

fn c7_c9(dir: &Path) -> Result<(Outcome, Outcome), String> {
    let cfg = json!({
        "experiment": "spin-tau",
        "ensemble": spin_base(),
        "steps": 2000,
        "seed": 7,
        "tolerances": {"gibbs_residual": 1e-6, "r_squared_min": 0.95, "resonance_margin": 0.1}
    });
    let r = run_json(cfg, &dir.join("c7"), 4)?;
    let mut o7 = tagged(&r, 7, "    ");
    let bp = r.metric_f64("beta_prime").unwrap_or(f64::NAN);
    let ok = (bp - 0.5).abs() <= 1e-15;
    o7.lines.push(format!(
        "    {} oracle beta' = beta E_E / E_S = {} (expected 0.5)",
        if ok { "PASS" } else { "FAIL" },
        bp
    ));
    o7.passed &= ok;
    o7.summary = "E_S=1, E_E=0.5, beta=1, lambda=0.1, tau=1: |Psi_n - Gibbs(beta'=0.5)| <= 1e-6 at n = 2000, log-residual slope < 0 with r^2 >= 0.95".into();
    let mut o9 = tagged(&r, 9, "    ");
    o9.summary =
        "eigenvalue-1 cluster dimension >= 2 at tau = T, = 1 at d(tau, TZ) >= 0.1 T".into();
    Ok((o7, o9))
}

fn c8(dir: &Path) -> Result<Outcome, String> {
    let mut ens = spin_base();
    ens["e_e"] = json!({"discrete": [[0.4, 0.5], [0.6, 0.5]]});
    let cfg = json!({
        "experiment": "spin-energy",
        "ensemble": ens,
        "steps": 100_000,
        "seed": 8,
        "tolerances": {"sigma_multiple": 5.0, "bias": 1e-3, "beta_degenerate": 1e-10}
    });
    let r = run_json(cfg, &dir.join("c8"), 4)?;
    let mut o = tagged(&r, 8, "    ");
    o.summary = "E_E in {0.4, 0.6}: Cesaro excited population within 5/sqrt(N) + 1e-3 of the Gibbs value at beta~, N = 1e5; constant ensemble gives beta~ = beta' within 1e-10".into();
    Ok(o)
}

fn c10(dir: &Path) -> Result<Outcome, String> {
    let mut traces = Vec::new();
    let mut summaries = Vec::new();
    // same output directory each time, so the echoed config is identical too
    let out = dir.join("c10");
    for threads in [1usize, 4, 8] {
        let r = run_json(dirichlet_decay(), &out, threads)?;
        traces.push(std::fs::read(out.join(TRACE_FILE)).map_err(|e| e.to_string())?);
        let mut s = serde_json::to_value(&r).map_err(|e| e.to_string())?;
        s.as_object_mut().map(|m| m.remove("runtime"));
        summaries.push(s);
    }
    let same_trace = traces.windows(2).all(|w| w[0] == w[1]);
    let same_summary = summaries.windows(2).all(|w| w[0] == w[1]);
    Ok(Outcome {
        passed: same_trace && same_summary,
        summary: "identical config and seed give identical outputs on 1, 4 and 8 threads".into(),
        lines: vec![
            format!(
                "    {} trace.csv bitwise identical ({} bytes)",
                if same_trace { "PASS" } else { "FAIL" },
                traces[0].len()
            ),
            format!(
                "    {} summary.json identical apart from runtime",
                if same_summary { "PASS" } else { "FAIL" }
            ),
        ],
    })
}

fn report(n: u8, outcome: Result<Outcome, String>, seconds: f64) -> bool {
    let o = outcome.unwrap_or_else(Outcome::failed);
    println!(
        "{} criterion {}: {} [{:.1}s]",
        if o.passed { "PASS" } else { "FAIL" },
        n,
        o.summary,
        seconds
    );
    for l in &o.lines {
        println!("{}", l);
    }
    o.passed
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let mut all = true;
    let timed = |f: &dyn Fn(&Path) -> Result<Outcome, String>| {
        let t = Instant::now();
        let o = f(dir);
        (o, t.elapsed().as_secs_f64())
    };

    let (o, s) = timed(&c1);
    all &= report(1, o, s);
    let (o, s) = timed(&c2);
    all &= report(2, o, s);
    let (o, s) = timed(&c3);
    all &= report(3, o, s);
    let (o, s) = timed(&c4);
    all &= report(4, o, s);
    let (o, s) = timed(&c5);
    all &= report(5, o, s);
    let (o, s) = timed(&c6);
    all &= report(6, o, s);

    let t = Instant::now();
    let (o7, o9) = match c7_c9(dir) {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    let s79 = t.elapsed().as_secs_f64();
    all &= report(7, o7, s79);
    let (o, s) = timed(&c8);
    all &= report(8, o, s);
    all &= report(9, o9, s79);
    let (o, s) = timed(&c10);
    all &= report(10, o, s);

    if !all {
        std::process::exit(1);
    }
}
