use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::config::{Experiment, MuRule, RunConfig};
use super::record::{Check, Outcome, Table};
use crate::appel::{appel_norm_identity, appel_residual, appel_transform, AppelParams};
use crate::carleman::{
    annulus_lower_bound_scan, convexity_carleman, hardy_cutoff_pipeline, hardy_threshold_exponent, l110_stability,
    packet_library, prefactor_identity, schrodinger_carleman_l110, sup_threshold_exponent, term_ii_growth,
    test_library, threshold_scan, CarlemanCase, L110Case, PipelineParams, DEFAULT_DELTA_CONSTANT,
};
use crate::error::{Error, Result};
use crate::gaussian_means::{
    amplitude_scan, check_log_convexity, counterexample_demo, linear_weight_interior_bound, misleading_ode_solve,
    smoothing_functional, subexponential_persistence, theorem1_interpolation, trace_h, AmplitudeScanConfig,
};
use crate::grid::{
    lambda_average_identity_check, spectral_derivative, weighted_l2_norm, Grid1D, TimePoly, WaveField, WeightSpec,
};
use crate::propagators::{
    airy_decay_fit, airy_function, airy_propagate, energy_lemma_weight, free_propagate, heat_regularize,
    observed_order, oracle_gaussian, split_step_evolve_strided, CounterexampleSampler, GaussianSampler, PotentialSpec,
    Sampler, Trajectory,
};
use crate::weyl::{verify_identity, IDENTITIES};

const I: Complex64 = Complex64::new(0.0, 1.0);
/// `Γ(2/3)`.
const GAMMA_TWO_THIRDS: f64 = 1.354_117_939_426_400_4;

/// Runs one experiment. The config must already be validated.
pub fn run(c: &RunConfig) -> Result<Outcome> {
    match c.experiment {
        Experiment::Evolve => evolve(c),
        Experiment::Convexity => convexity(c),
        Experiment::Interpolate => interpolate(c),
        Experiment::Smoothing => smoothing(c),
        Experiment::AppelCheck => appel_check(c),
        Experiment::Commutator => commutator(c),
        Experiment::Carleman => carleman(c),
        Experiment::L110 => l110(c),
        Experiment::Annulus => annulus(c),
        Experiment::Threshold => threshold(c),
        Experiment::HardyPipeline => hardy_pipeline(c),
        Experiment::Airy => airy(c),
        Experiment::OdeA => ode_a(c),
        Experiment::Counterexample => counterexample(c),
        Experiment::Suite => Err(Error::Config("the suite is not a single experiment".into())),
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn gaussian_trajectory(c: &RunConfig, k: usize) -> Result<Trajectory> {
    let z = c.physics.z();
    let s = GaussianSampler { kappa: real(c.physics.kappa), z, grid: c.grid()? };
    Trajectory::sample(&s, &Trajectory::uniform_times(k), z, PotentialSpec::zero())
}

fn evolve(c: &RunConfig) -> Result<Outcome> {
    let g = c.grid()?;
    let p = &c.physics;
    let kappa = real(p.kappa);
    let mut out = Outcome::default();

    let u0 = oracle_gaussian(kappa, 0.0, I, &g)?;
    let free = free_propagate(&u0, 1.0);
    let want = oracle_gaussian(kappa, 1.0, I, &g)?;
    let free_err = free.relative_l2_error(&want);
    out.checks.push(Check::le("free flow vs Gaussian oracle", Some(2), free_err, 1e-10));
    let mut profile = Table::new("free_profile", &["x", "re", "im", "oracle_re", "oracle_im"]);
    for ((x, u), w) in g.nodes().into_iter().zip(free.samples()).zip(want.samples()) {
        profile.push(vec![x.into(), u.re.into(), u.im.into(), w.re.into(), w.im.into()]);
    }
    out.tables.push(profile);

    let v = c.potential.build()?;
    let dt = c.time.dt;
    let est = observed_order(&u0, &v, p.z(), 1.0, &[dt, dt / 2.0, dt / 4.0])?;
    out.checks.push(
        Check::near("Strang observed order", Some(2), est.order, 2.0, 0.1).with_detail(format!("potential {}", v.id())),
    );
    let mut strang = Table::new("strang_order", &["dt", "relative_error"]);
    for (d, e) in est.dts.iter().zip(&est.errors) {
        strang.push(vec![(*d).into(), (*e).into()]);
    }
    out.tables.push(strang);

    // e^{−γx²} under e^{−aξ²} stays Gaussian with rate γ/(1 + 4γa)
    let (gamma, a) = (p.gamma, c.time.heat);
    let q = 1.0 + 4.0 * gamma * a;
    let f = WaveField::from_fn(g, 0.0, |x| real((-gamma * x * x).exp()))?;
    let heated = heat_regularize(&f, a)?;
    let exact = WaveField::from_fn(g, 0.0, |x| real(q.powf(-0.5) * (-gamma * x * x / q).exp()))?;
    let field_err = heated.relative_l2_error(&exact);
    let rate = gamma / q;
    let centre = heated.samples()[g.n_points() / 2].norm().ln();
    let rate_err = g
        .nodes()
        .iter()
        .zip(heated.samples())
        .filter(|(x, _)| (0.5..=3.0).contains(&x.abs()))
        .map(|(x, u)| (-(u.norm().ln() - centre) / (x * x) / rate - 1.0).abs())
        .fold(0.0, f64::max);
    let lemma = energy_lemma_weight(gamma, real(a), 1.0);
    let lemma_err = (lemma / rate - 1.0).abs();
    out.checks.push(Check::le("heat flow field vs closed form", Some(6), field_err, 1e-10));
    out.checks.push(Check::le("heat flow Gaussian rate γ/(1+4γa)", Some(6), rate_err.max(lemma_err), 1e-10));

    let d = spectral_derivative(&u0, 1)?;
    let d_err = g
        .nodes()
        .iter()
        .zip(d.field.samples())
        .map(|(&x, v)| (v - real(-2.0 * p.kappa * x * (-p.kappa * x * x).exp())).norm())
        .fold(0.0, f64::max);
    out.checks.push(Check::le("spectral derivative of the Gaussian", None, d_err, 1e-10));
    let gw = 0.5 * p.kappa;
    let wn = weighted_l2_norm(&u0, &WeightSpec::Gaussian { gamma: gw })?;
    let wn_want = (std::f64::consts::PI / (2.0 * (p.kappa - gw))).sqrt().ln();
    out.checks.push(Check::le("weighted norm of the Gaussian", None, (wn.log_sq - wn_want).abs(), 1e-12));

    out.summary = json!({
        "free_relative_error": free_err,
        "strang": est,
        "heat": {"gamma": gamma, "a": a, "rate": rate, "field_error": field_err, "rate_error": rate_err},
    });
    Ok(out)
}

fn convexity(c: &RunConfig) -> Result<Outcome> {
    let p = &c.physics;
    let k = c.time.intervals()?;
    let v = c.potential.build()?;
    let free = v.is_zero();
    let traj = if free {
        gaussian_trajectory(c, k)?
    } else {
        let u0 = oracle_gaussian(real(p.kappa), 0.0, p.z(), &c.grid()?)?;
        let steps = (1.0 / c.time.step).round() as usize;
        if !steps.is_multiple_of(k) {
            return Err(Error::Config(format!("K = {k} must divide the {steps} split steps")));
        }
        split_step_evolve_strided(&u0, &v, p.z(), 1.0, c.time.step, steps / k)?
    };
    let trace = trace_h(&traj, &WeightSpec::Gaussian { gamma: p.gamma })?;
    let slack = 1e-5;
    let chk = check_log_convexity(&trace, slack)?;
    let crit = free.then_some(3);
    let budget = trace.budget.total();
    out_convexity(c, trace, chk, budget, slack, crit)
}

fn out_convexity(
    c: &RunConfig,
    trace: crate::gaussian_means::ConvexityTrace,
    chk: crate::gaussian_means::ConvexityCheck,
    budget: f64,
    slack: f64,
    crit: Option<u8>,
) -> Result<Outcome> {
    let mut out = Outcome::default();
    out.checks.push(
        Check::ge("min second difference of log H", crit, chk.worst_second_diff, -budget - slack)
            .with_detail(format!("at t = {}", chk.worst_second_diff_time)),
    );
    let excess = trace.interpolation_excess().unwrap_or(f64::INFINITY);
    out.checks.push(Check::le("interpolation excess of log H", crit, excess, 1e-6 + budget / 8.0));
    let mut t = Table::new("trace", &["t", "h", "log_h", "frequency", "second_diff"]);
    for i in 0..trace.times.len() {
        t.push(vec![
            trace.times[i].into(),
            trace.h[i].into(),
            trace.log_h[i].into(),
            trace.frequency[i].unwrap_or(f64::NAN).into(),
            trace.second_diff[i].unwrap_or(f64::NAN).into(),
        ]);
    }
    out.tables.push(t);
    let mut summary = json!({"check": chk, "interpolation_excess": excess, "budget": budget});

    if !c.scan.amplitudes.is_empty() {
        let mut amps = c.scan.amplitudes.clone();
        amps.sort_by(|a, b| b.total_cmp(a));
        let cfg = AmplitudeScanConfig { kappa: c.physics.kappa, ..AmplitudeScanConfig::default() };
        let rows = amplitude_scan(&amps, &cfg)?;
        let decreasing = rows.windows(2).all(|w| w[1].excess < w[0].excess);
        out.checks.push(Check::truth(
            "amplitude scan excess strictly decreasing",
            Some(4),
            decreasing,
            rows.iter().map(|r| format!("{}: {:e}", r.amplitude, r.excess)).collect::<Vec<_>>().join(", "),
        ));
        let last = rows.last().map(|r| r.excess).unwrap_or(f64::INFINITY);
        out.checks.push(Check::le("amplitude scan excess at smallest amplitude", Some(4), last, 1e-4));
        let mut t = Table::new("amplitude_scan", &["amplitude", "excess", "excess_over_free", "worst_second_diff", "pass"]);
        for r in &rows {
            t.push(vec![
                r.amplitude.into(),
                r.excess.into(),
                r.excess_over_free.into(),
                r.check.worst_second_diff.into(),
                r.check.pass.into(),
            ]);
        }
        out.tables.push(t);
        summary["amplitude_scan"] = serde_json::to_value(&rows)?;
    }
    out.summary = summary;
    Ok(out)
}

fn interpolate(c: &RunConfig) -> Result<Outcome> {
    let p = &c.physics;
    let z = p.z();
    let s = GaussianSampler { kappa: real(p.kappa), z, grid: c.grid()? };
    let traj = Trajectory::sample(&s, &[0.0, p.s, 1.0], z, PotentialSpec::zero())?;
    let r = theorem1_interpolation(&traj, p.alpha, p.beta, p.s)?;
    let mut out = Outcome::default();
    let name = format!("mixed-weight interpolation excess (α={}, β={}, κ={})", p.alpha, p.beta, p.kappa);
    out.checks.push(match r.log_excess {
        Some(e) => Check::le(&name, Some(3), e, 1e-6),
        None => Check::failed(&name, Some(3), format!("divergent weighted norm at t = {:?}", r.divergent_endpoints())),
    });
    let mut t = Table::new("interpolation", &["t", "log_norm", "divergent"]);
    for (time, n) in [0.0, p.s, 1.0].into_iter().zip(&r.norms) {
        t.push(vec![time.into(), n.log_norm().into(), n.divergent.into()]);
    }
    out.tables.push(t);
    out.summary = serde_json::to_value(&r)?;
    Ok(out)
}

fn smoothing(c: &RunConfig) -> Result<Outcome> {
    let p = &c.physics;
    let k = c.time.intervals()?;
    let w = WeightSpec::Gaussian { gamma: p.gamma };
    let traj = gaussian_trajectory(c, k)?;
    let a = smoothing_functional(&traj, &w)?;
    let b = smoothing_functional(&gaussian_trajectory(c, 2 * k)?, &w)?;
    let lin = linear_weight_interior_bound(&traj, p.lambda)?;
    let pers = subexponential_persistence(&traj, p.decay[0], p.decay[1])?;
    let lam = lambda_average_identity_check(p.gamma, &c.scan.probes)?;

    let mut out = Outcome::default();
    out.checks.push(Check::truth("smoothing functional finite", None, !a.divergent && a.value.is_finite(), format!("{:e}", a.value)));
    out.checks.push(Check::le("smoothing functional K→2K drift", None, (a.value / b.value - 1.0).abs(), 1e-4));
    out.checks.push(Check::truth(
        "linear weight interior constant finite",
        None,
        !lin.divergent && lin.constant.is_finite(),
        format!("{:e} at t = {}", lin.constant, lin.sup_time),
    ));
    out.checks.push(Check::truth(
        "sub-exponential tail finite",
        None,
        !pers.divergent && pers.sup_tail.is_finite(),
        format!("{:e} at t = {}", pers.sup_tail, pers.sup_time),
    ));
    out.checks.push(Check::le("λ-averaging identity", Some(13), lam, 1e-10));
    let mut t = Table::new("smoothing", &["quantity", "value"]);
    t.push(vec!["smoothing_value".into(), a.value.into()]);
    t.push(vec!["smoothing_value_2k".into(), b.value.into()]);
    t.push(vec!["smoothing_ratio".into(), a.ratio.into()]);
    t.push(vec!["linear_weight_constant".into(), lin.constant.into()]);
    t.push(vec!["persistence_sup_tail".into(), pers.sup_tail.into()]);
    t.push(vec!["lambda_identity_error".into(), lam.into()]);
    out.tables.push(t);
    out.summary = json!({"smoothing": a, "smoothing_2k": b, "linear_weight": lin, "persistence": pers, "lambda_identity_error": lam});
    Ok(out)
}

fn appel_check(c: &RunConfig) -> Result<Outcome> {
    let p = &c.physics;
    let grid = c.grid()?;
    let sampler = |z: Complex64| -> Arc<dyn Sampler> { Arc::new(GaussianSampler { kappa: real(p.kappa), z, grid }) };
    let mut out = Outcome::default();
    let mut t = Table::new("norm_identity", &["a", "t", "s", "lhs_log", "rhs_log", "relative_error"]);
    let mut cases = vec![(I, 1e-10)];
    if p.z() != I {
        cases.push((p.z(), if p.z[0] == 0.0 { 1e-10 } else { 1e-8 }));
    }
    for (z, tol) in cases {
        let params = AppelParams::new(p.alpha, p.beta, z)?;
        let worst = c
            .scan
            .probes
            .iter()
            .map(|&time| {
                let r = appel_norm_identity(sampler(z), &params, p.gamma, time)?;
                t.push(vec![
                    z.re.into(),
                    time.into(),
                    r.s.into(),
                    r.lhs.log_norm().into(),
                    r.rhs.log_norm().into(),
                    r.relative_error.into(),
                ]);
                Ok(r.relative_error)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.checks.push(Check::le(&format!("Appel norm identity (a = {})", z.re), Some(5), worst, tol));
    }
    out.tables.push(t);

    let params = AppelParams::new(p.alpha, p.beta, I)?;
    let v = c.potential.build()?;
    let residual = appel_residual(sampler(I), &v, &params, &[0.2, 0.5, 0.8], c.time.dt)?;
    out.checks.push(Check::le("Appel PDE residual of the transformed oracle", Some(5), residual, 1e-5));

    let same = AppelParams::new(p.alpha, p.alpha, I)?;
    let u = sampler(I);
    let mut collapse = true;
    for time in [0.0, 0.3, 0.7, 1.0] {
        collapse &= appel_transform(u.as_ref(), &same, time, &grid)? == u.field_at(time)?;
    }
    out.checks.push(Check::truth("Appel transform with α = β is the identity", Some(5), collapse, "bitwise"));
    out.summary = json!({"residual": residual, "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma});
    Ok(out)
}

fn commutator(c: &RunConfig) -> Result<Outcome> {
    let names: Vec<&str> = if c.identity == "all" { IDENTITIES.to_vec() } else { vec![c.identity.as_str()] };
    let start = Instant::now();
    let reports = names.iter().map(|n| verify_identity(n)).collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut out = Outcome::default();
    let mut t = Table::new("identities", &["name", "pass", "residual_monomials", "first_mismatch"]);
    for r in &reports {
        let s = r.summary();
        out.checks.push(Check::truth(
            &format!("identity {} residual is zero", s.name),
            Some(1),
            s.pass,
            format!("{} residual monomials", s.residual_monomials),
        ));
        t.push(vec![
            s.name.clone().into(),
            s.pass.into(),
            s.residual_monomials.into(),
            s.first_mismatch.clone().unwrap_or_default().into(),
        ]);
    }
    out.checks.push(Check::le("identity verification wall time (s)", Some(1), elapsed, 1.0).timed());
    out.tables.push(t);
    out.summary = json!({"identities": reports.iter().map(|r| r.summary()).collect::<Vec<_>>()});
    Ok(out)
}

fn carleman(c: &RunConfig) -> Result<Outcome> {
    let p = &c.physics;
    let grid = c.grid()?;
    let k = c.time.intervals()?;
    let jobs: Vec<CarlemanCase> = test_library()
        .into_iter()
        .flat_map(|g| c.scan.radii.iter().map(move |&r| (g.clone(), r)))
        .map(|(g, r)| {
            let mut case = CarlemanCase::standard(g, r, p.gamma, p.eps)?;
            case.grid = grid;
            case.intervals = k;
            if let MuRule::Fixed(mu) = p.mu_rule {
                let cpsi = -(1.0 + p.eps) * r.powi(4) / (16.0 * mu);
                case.mu = mu;
                case.psi = TimePoly(vec![0.0, cpsi, -cpsi]);
            }
            Ok(case)
        })
        .collect::<Result<_>>()?;
    let reports = jobs.par_iter().map(convexity_carleman).collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    let mut t = Table::new("carleman", &["name", "r", "mu", "lhs", "rhs", "log_scale", "ratio", "pass"]);
    for r in &reports {
        t.push(vec![
            r.name.clone().into(),
            r.r.into(),
            r.mu.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.log_scale.into(),
            r.ratio.into(),
            r.pass.into(),
        ]);
    }
    out.tables.push(t);
    let failures: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| format!("{}@R={}", r.name, r.r)).collect();
    let worst = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    out.checks.push(
        Check::truth("convexity Carleman lhs ≤ rhs on the library", Some(7), failures.is_empty(), "")
            .with_detail(format!("worst lhs/rhs = {worst:e}; failures: [{}]", failures.join(", "))),
    );
    let pre = prefactor_identity();
    out.checks.push(Check::truth("prefactor εR⁴/(8μ) exact", Some(7), pre.exact, pre.expected.to_string()));
    out.summary = json!({"reports": reports, "prefactor_exact": pre.exact});
    Ok(out)
}

fn l110(c: &RunConfig) -> Result<Outcome> {
    let k = c.time.intervals()?;
    let n = c.grid.n_points;
    let stab = l110_stability(&packet_library(), &c.scan.radii, n, k)?;
    let mut out = Outcome::default();
    out.checks.push(Check::le("L110 constant spread across R", Some(7), stab.max_spread, 0.2));
    let mut bad = packet_library()[0].clone();
    bad.y0 = 0.5;
    let case = L110Case { n_points: n, intervals: k, ..L110Case::standard(bad, c.scan.radii[0]) };
    let rejected = match schrodinger_carleman_l110(&case) {
        Err(Error::SupportViolation { x, t, value }) => Some(format!("witness x = {x}, t = {t}, y = {value}")),
        _ => None,
    };
    out.checks.push(Check::truth(
        "support-violating input rejected",
        Some(7),
        rejected.is_some(),
        rejected.unwrap_or_else(|| "accepted".into()),
    ));
    let mut t = Table::new("l110", &["name", "r", "alpha", "lhs_norm", "rhs_norm", "constant", "min_abs_y"]);
    for r in &stab.rows {
        t.push(vec![
            r.name.clone().into(),
            r.r.into(),
            r.alpha.into(),
            r.lhs_norm.into(),
            r.rhs_norm.into(),
            r.constant.unwrap_or(f64::NAN).into(),
            r.min_abs_y.into(),
        ]);
    }
    out.tables.push(t);
    out.summary = serde_json::to_value(&stab)?;
    Ok(out)
}

fn annulus(c: &RunConfig) -> Result<Outcome> {
    let g = c.grid()?;
    let k = c.time.intervals()?;
    let radii = &c.scan.radii;
    let gauss = |grid: Grid1D| GaussianSampler { kappa: real(c.physics.kappa), z: I, grid };
    let fine_grid = Grid1D::new(2 * g.n_points(), g.half_width())?;
    let subjects: Vec<(&str, Box<dyn Sampler>)> = vec![
        ("gaussian", Box::new(gauss(g))),
        ("gaussian-2n", Box::new(gauss(fine_grid))),
        ("counterexample", Box::new(CounterexampleSampler { grid: g })),
    ];
    let fits = subjects
        .par_iter()
        .map(|(_, s)| annulus_lower_bound_scan(s.as_ref(), radii, k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Outcome::default();
    out.checks.push(Check::near("annulus exponent, free Gaussian", Some(8), fits[0].p, 2.0, 0.1));
    out.checks.push(Check::near("annulus exponent, counterexample", Some(8), fits[2].p, 2.0, 0.1));
    out.checks.push(Check::le("annulus exponent drift under N→2N", Some(8), (fits[1].p - fits[0].p).abs(), 0.05));
    let mut t = Table::new("annulus", &["subject", "r", "log_delta"]);
    for ((name, _), f) in subjects.iter().zip(&fits) {
        for (r, d) in f.radii.iter().zip(&f.log_delta) {
            t.push(vec![(*name).into(), (*r).into(), (*d).into()]);
        }
    }
    out.tables.push(t);
    out.summary = json!({"gaussian": fits[0], "gaussian_2n": fits[1], "counterexample": fits[2]});
    Ok(out)
}

fn threshold(c: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let at_half = hardy_threshold_exponent(0.5, 0.0, 0.0, DEFAULT_DELTA_CONSTANT)?;
    out.checks.push(Check::le("E(1/2, 0, 0) vanishes", Some(9), at_half.abs(), 1e-9));
    let (_, above) = sup_threshold_exponent(0.6)?;
    let (_, below) = sup_threshold_exponent(0.4)?;
    out.checks.push(Check::truth("sup E(0.6) > 0", Some(9), above > 0.0, format!("{above:e}")));
    out.checks.push(Check::truth("sup E(0.4) < 0", Some(9), below < 0.0, format!("{below:e}")));
    let mut t = Table::new("threshold", &["gamma", "eps_star", "sup_e"]);
    let mut summary = json!({"e_at_half": at_half, "sup_e_0_6": above, "sup_e_0_4": below});
    if !c.scan.gammas.is_empty() {
        let scan = threshold_scan(&c.scan.gammas)?;
        out.checks.push(Check::truth(
            "single sign change of sup E, at γ = 1/2",
            Some(9),
            scan.change_at_half,
            format!("{:?}", scan.sign_changes),
        ));
        for r in &scan.rows {
            t.push(vec![r.gamma.into(), r.eps_star.into(), r.sup_e.into()]);
        }
        summary["scan_sign_changes"] = serde_json::to_value(&scan.sign_changes)?;
    }
    let (eps_star, sup) = sup_threshold_exponent(c.physics.gamma)?;
    if c.assert_positive {
        out.checks.push(Check::truth(
            &format!("sup E({}) > 0", c.physics.gamma),
            None,
            sup > 0.0,
            format!("{sup:e} at ε = {eps_star}"),
        ));
    }
    summary["gamma"] = json!(c.physics.gamma);
    summary["sup_e"] = json!(sup);
    summary["eps_star"] = json!(eps_star);
    out.tables.push(t);
    out.summary = summary;
    Ok(out)
}

fn hardy_pipeline(c: &RunConfig) -> Result<Outcome> {
    let p = &c.physics;
    let u = GaussianSampler { kappa: real(p.kappa), z: p.z(), grid: c.grid()? };
    let v = c.potential.build()?;
    let k = c.time.intervals()?;
    let params = |r: f64, m: f64| PipelineParams { intervals: k, ..PipelineParams::new(p.gamma, r, p.eps, p.delta, m) };
    let a = hardy_cutoff_pipeline(&u, &v, &params(p.r, p.m))?;
    let b = hardy_cutoff_pipeline(&u, &v, &params(p.r, 2.0 * p.m))?;
    let (slope, reps) = term_ii_growth(&u, &v, &params(p.r, p.m), &c.scan.radii)?;
    let mut out = Outcome::default();
    let holds = a.carleman_holds && b.carleman_holds && reps.iter().all(|r| r.carleman_holds);
    out.checks.push(Check::truth("Carleman bound holds along the pipeline", None, holds, ""));
    let drop = if b.term_iii > 0.0 { a.term_iii / b.term_iii } else { f64::INFINITY };
    out.checks.push(Check::ge("term III drop from M to 2M", None, drop, 10.0));
    out.checks.push(Check::near("term II bound growth exponent in R", None, slope, 1.0, 0.3));
    let mut t = Table::new(
        "hardy_pipeline",
        &["r", "m", "lhs", "lhs_interior", "lhs_core", "term_i", "term_ii", "term_ii_bound", "term_iii", "rhs"],
    );
    for r in [&a, &b].into_iter().chain(&reps) {
        t.push(vec![
            r.params.r.into(),
            r.params.m.into(),
            r.lhs.into(),
            r.lhs_interior.into(),
            r.lhs_core.into(),
            r.term_i.into(),
            r.term_ii.into(),
            r.term_ii_bound.into(),
            r.term_iii.into(),
            r.rhs.into(),
        ]);
    }
    out.tables.push(t);
    out.summary = json!({"base": a, "doubled_m": b, "term_ii_slope": slope});
    Ok(out)
}

fn airy(c: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let ai0 = airy_function(0.0)?;
    let want = 3f64.powf(-2.0 / 3.0) / GAMMA_TWO_THIRDS;
    out.checks.push(Check::le("Ai(0) = 3^{-2/3}/Γ(2/3)", Some(12), (ai0 / want - 1.0).abs(), 1e-8));
    let coef = airy_decay_fit(5.0, 15.0, 101)?;
    out.checks.push(Check::near("Ai decay exponent coefficient on [5, 15]", Some(12), coef, 2.0 / 3.0, 0.02));

    let g = c.grid()?;
    let u0 = WaveField::from_fn(g, 0.0, |x| real((-c.physics.kappa * x * x).exp()))?;
    let one = airy_propagate(&airy_propagate(&u0, 0.3), 0.4);
    let two = airy_propagate(&u0, 0.7);
    out.checks.push(Check::le("Airy flow group property", None, one.max_pointwise_distance(&two), 1e-12));
    out.checks.push(Check::le("Airy flow preserves L²", None, (two.l2_norm() / u0.l2_norm() - 1.0).abs(), 1e-12));

    let mut t = Table::new("airy", &["x", "ai"]);
    for j in 0..=160 {
        let x = -20.0 + 0.25 * j as f64;
        t.push(vec![x.into(), airy_function(x)?.into()]);
    }
    out.tables.push(t);
    out.summary = json!({"ai0": ai0, "decay_coefficient": coef});
    Ok(out)
}

fn ode_a(c: &RunConfig) -> Result<Outcome> {
    let rep = misleading_ode_solve(c.physics.r)?;
    let mut out = Outcome::default();
    out.checks.push(Check::le("profile ODE residual", Some(11), rep.residual_max, 1e-8));
    out.checks.push(Check::truth("a > 0 on [-1, 1]", Some(11), rep.min_a > 0.0, format!("min a = {:e}", rep.min_a)));
    for &r in &c.scan.radii {
        let name = format!("scaled a_R residual, R = {r}");
        out.checks.push(match rep.scaled.iter().find(|s| (s.r - r).abs() < 1e-12) {
            Some(s) => Check::le(&name, Some(11), s.residual_max, 1e-8),
            None => Check::failed(&name, Some(11), "radius not on the solver's doubling ladder"),
        });
    }
    let mut t = Table::new("profile", &["t", "a", "a_prime"]);
    for i in (0..rep.t.len()).step_by(10) {
        t.push(vec![rep.t[i].into(), rep.a[i].into(), rep.a_prime[i].into()]);
    }
    out.tables.push(t);
    let mut s = Table::new("scaled", &["r", "value_at_one", "residual_max"]);
    for r in &rep.scaled {
        s.push(vec![r.r.into(), r.value_at_one.into(), r.residual_max.into()]);
    }
    out.tables.push(s);
    out.summary = json!({
        "residual_max": rep.residual_max,
        "min_a": rep.min_a,
        "terminal_slope": rep.terminal_slope,
        "shooting": rep.shooting,
        "scaled": rep.scaled,
    });
    Ok(out)
}

fn counterexample(c: &RunConfig) -> Result<Outcome> {
    let rep = counterexample_demo(c.physics.r, &c.scan.half_widths, Some(c.physics.rho))?;
    let mut out = Outcome::default();
    let increasing = rep.rows.windows(2).all(|w| w[1].lhs_log_norm > w[0].lhs_log_norm);
    out.checks.push(Check::truth("truncated ‖e^{Rx²}u(0)‖ strictly increasing", Some(10), increasing, ""));
    out.checks.push(Check::truth(
        "left-side log growth at least the predicted scale",
        Some(10),
        rep.lhs_growth_ok,
        format!("{:?} vs {:?}", rep.lhs_log_growth, rep.predicted_log_growth),
    ));
    out.checks.push(Check::le("right side vs whole-line value", Some(10), rep.rhs_closed_form_error, 1e-8));
    out.checks.push(Check::truth("two-endpoint inequality violated", Some(10), rep.inequality_violated, ""));
    let dev = rep.rows.iter().map(|r| r.modulus_deviation).fold(0.0, f64::max);
    out.checks.push(Check::le("sampled |u(0)|² vs closed form", None, dev, 1e-12));
    let mut t = Table::new("counterexample", &["half_width", "n_points", "lhs_log_norm", "rhs_log_norm_minus", "rhs_log_norm_plus"]);
    for r in &rep.rows {
        t.push(vec![
            r.half_width.into(),
            r.n_points.into(),
            r.lhs_log_norm.into(),
            r.rhs_log_norms.0.into(),
            r.rhs_log_norms.1.into(),
        ]);
    }
    out.tables.push(t);
    out.summary = serde_json::to_value(&rep)?;
    Ok(out)
}
