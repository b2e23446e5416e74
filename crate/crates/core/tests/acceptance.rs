//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fail. Run with `cargo test --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::{Duration, Instant};

use qrd::quantum::{self, KrausChannel};
use qrd::ratedistortion::{self, KrausPair, RateCurve, SourceSpec, DEFAULT_CURVE_POINTS, DEFAULT_TOL};
use qrd::realization::{self, RealizationCircuit};
use qrd::verify::{self, trial_rng, VerificationReport};
use qrd::Result;
use rand::Rng;

const SEED: u64 = 20_240_601;
const DEFAULT_P0: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Binary entropy written out independently of the library.
fn h2(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

fn src(p0: f64) -> SourceSpec {
    SourceSpec::new(p0).expect("valid p0")
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn worst(report: &VerificationReport, check: &str) -> f64 {
    report.params.get(&format!("worst.{check}")).map_or(f64::NEG_INFINITY, |v| v.parse().unwrap())
}

fn summary(reports: &[VerificationReport]) -> (bool, u64, u64) {
    let passed = reports.iter().all(|r| r.passed);
    let trials = reports.iter().map(|r| r.n_trials).sum();
    let violations = reports.iter().map(|r| r.n_violations).sum();
    (passed, trials, violations)
}

fn ac1() -> Result<Outcome> {
    let points = ratedistortion::sweep_curve(&src(0.5), 101)?;
    let err = points
        .iter()
        .map(|p| (p.rate - h2(0.5 + (p.d * (1.0 - p.d)).sqrt())).abs())
        .fold(0.0, f64::max);
    Ok(Outcome::new(points.len() == 101 && err <= 1e-9, format!("points={} max_err={err:.3e}", points.len())))
}

fn ac2() -> Result<Outcome> {
    let s = src(0.5);
    let mut err: f64 = 0.0;
    for i in 1..=50 {
        let delta = i as f64 * FRAC_PI_2 / 51.0;
        err = err.max((ratedistortion::solve_alpha(delta, &s, DEFAULT_TOL)? - (FRAC_PI_4 - delta / 2.0)).abs());
    }
    Ok(Outcome::new(err <= 1e-9, format!("deltas=50 max_err={err:.3e}")))
}

fn ac3() -> Result<Outcome> {
    let mut err: f64 = 0.0;
    for p0 in DEFAULT_P0 {
        let s = src(p0);
        let rho = s.rho();
        for i in 1..=50 {
            let delta = i as f64 * FRAC_PI_2 / 51.0;
            let alpha = ratedistortion::solve_alpha(delta, &s, DEFAULT_TOL)?;
            let d = quantum::distortion(&rho, &KrausPair::diagonal(alpha, delta).channel())?;
            err = err.max((d - 2.0 * p0 * (1.0 - p0) * (1.0 - delta.cos())).abs());
        }
    }
    Ok(Outcome::new(err <= 1e-10, format!("sources=5 deltas=50 max_err={err:.3e}")))
}

fn ac4() -> Result<Outcome> {
    let mut start_err: f64 = 0.0;
    let mut end_rate: f64 = 0.0;
    let mut end_d_err: f64 = 0.0;
    for p0 in DEFAULT_P0 {
        let s = src(p0);
        let rho = s.rho();
        let d_max = 2.0 * p0 * (1.0 - p0);
        let first = ratedistortion::r1_curve_point(0.0, &s)?;
        let last = ratedistortion::r1_curve_point(FRAC_PI_2, &s)?;
        // The same endpoints evaluated through the channel formalism.
        let q0 = quantum::average_entropy(&KrausPair::diagonal(first.alpha, 0.0).channel(), &rho)?;
        let last_pair = KrausPair::diagonal(last.alpha, FRAC_PI_2).channel();
        let q1 = quantum::average_entropy(&last_pair, &rho)?;
        start_err = start_err.max((first.rate - h2(p0)).abs()).max((q0 - h2(p0)).abs());
        end_rate = end_rate.max(last.rate).max(q1);
        end_d_err = end_d_err.max((last.d - d_max).abs()).max((quantum::distortion(&rho, &last_pair)? - d_max).abs());
    }
    Ok(Outcome::new(
        start_err <= 1e-9 && end_rate <= 1e-9 && end_d_err <= 1e-12,
        format!("R(0)_err={start_err:.3e} R(d_max)={end_rate:.3e} d_max_err={end_d_err:.3e}"),
    ))
}

fn ac5() -> Result<Outcome> {
    let mut min_second: f64 = f64::INFINITY;
    let mut slopes_ok = true;
    for p0 in DEFAULT_P0 {
        let points = ratedistortion::sweep_curve_uniform_d(&src(p0), 512)?;
        for w in points.windows(3) {
            min_second = min_second.min(w[0].rate - 2.0 * w[1].rate + w[2].rate);
        }
        let n = points.len();
        let tail = &points[n - n / 10 - 1..];
        let slopes: Vec<f64> = tail.windows(2).map(|w| ((w[1].rate - w[0].rate) / (w[1].d - w[0].d)).abs()).collect();
        slopes_ok &= slopes.windows(2).all(|s| s[1] < s[0]);
    }
    Ok(Outcome::new(
        min_second >= -1e-8 && slopes_ok,
        format!("points=512 min_second_difference={min_second:.3e} final_decile_slope_decreasing={slopes_ok}"),
    ))
}

fn ac6() -> Result<Outcome> {
    let mut reports = Vec::new();
    for dim in [2, 4, 8] {
        reports.push(verify::check_lemma1(10_000, dim, SEED)?);
        reports.push(verify::check_lemma2(10_000, dim, 3, SEED)?);
    }
    let (passed, trials, violations) = summary(&reports);
    let tol_ok = reports.iter().all(|r| r.tolerance <= 1e-9);
    Ok(Outcome::new(passed && tol_ok, format!("trials={trials} violations={violations}")))
}

fn ac7() -> Result<Outcome> {
    let reports: Vec<_> =
        [0.5, 0.7, 0.9].iter().map(|&p0| verify::check_theorem1(10_000, SEED, &src(p0))).collect::<Result<_>>()?;
    let (passed, trials, violations) = summary(&reports);
    let fold = |c: &str| reports.iter().map(|r| worst(r, c)).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome::new(
        passed,
        format!(
            "trials={trials} violations={violations} worst_entropy={:.3e} worst_distortion={:.3e} worst_commutator={:.3e}",
            fold("entropy"),
            fold("distortion"),
            fold("commutator")
        ),
    ))
}

fn curve_reports() -> Result<(Vec<VerificationReport>, Vec<VerificationReport>)> {
    let mut search = Vec::new();
    let mut blocks = Vec::new();
    for p0 in [0.5, 0.7] {
        let curve = RateCurve::build(&src(p0), DEFAULT_CURVE_POINTS)?;
        search.push(verify::random_channel_search_with(&curve, 100_000, SEED)?);
        if p0 == 0.5 {
            blocks.push(verify::check_theorem2_blocks_with(&curve, 10_000, SEED)?);
        }
    }
    Ok((search, blocks))
}

fn ac8(search: &[VerificationReport]) -> Outcome {
    let (passed, trials, violations) = summary(search);
    let margin = search.iter().map(|r| worst(r, "curve")).fold(f64::NEG_INFINITY, f64::max);
    Outcome::new(passed, format!("trials={trials} violations={violations} worst_curve_excess={margin:.3e}"))
}

fn tensor_square_gap() -> Result<f64> {
    let mut gap: f64 = 0.0;
    for p0 in [0.5, 0.7] {
        let s = src(p0);
        let rho = s.rho();
        let rho2 = rho.tensor_power(2)?;
        for delta in verify::interior_delta_grid(10) {
            let point = ratedistortion::r1_curve_point(delta, &s)?;
            let pair = KrausPair::diagonal(point.alpha, delta).channel();
            let square = pair.tensor(&pair)?;
            let rate = quantum::average_entropy(&square, &rho2)? / 2.0;
            let d = quantum::block_distortion(&square, &rho)?;
            gap = gap.max((rate - point.rate).abs()).max((d - point.d).abs());
        }
    }
    Ok(gap)
}

fn ac9(blocks: &[VerificationReport]) -> Result<(Outcome, VerificationReport)> {
    let mut reports = blocks.to_vec();
    let b7 = verify::check_theorem2_blocks(&src(0.7), 10_000, SEED)?;
    reports.push(b7);
    let iso = verify::check_theorem3_isotropic(2, 10_000, SEED)?;
    reports.push(iso.clone());
    let (passed, trials, violations) = summary(&reports);
    let gap = tensor_square_gap()?;
    Ok((
        Outcome::new(
            passed && gap <= 1e-8,
            format!("trials={trials} violations={violations} tensor_square_gap={gap:.3e}"),
        ),
        iso,
    ))
}

fn ac10() -> Result<Outcome> {
    let report = verify::check_perturbation(&verify::interior_delta_grid(10), &[0.01, 0.02], &src(0.7), SEED)?;
    let p = |k: &str| report.params.get(k).cloned().unwrap_or_default();
    Ok(Outcome::new(
        report.passed,
        format!(
            "points={} violations={} worst_entropy_increase={:.3e} entropy_growth_ratio=[{}, {}]",
            report.n_trials,
            report.n_violations,
            worst(&report, "entropy_increase"),
            p("entropy_growth_ratio_min"),
            p("entropy_growth_ratio_max")
        ),
    ))
}

fn ac11() -> Result<Outcome> {
    let mut circuit_err: f64 = 0.0;
    for t in 0..100 {
        let mut rng = trial_rng(SEED, t);
        let p0 = rng.random_range(0.5..0.95);
        let delta = rng.random_range(0.01..FRAC_PI_2 - 0.01);
        let s = src(p0);
        let rho = s.rho();
        let circ = realization::build_circuit(delta, &s)?;
        let joint = circ.joint_state(&rho)?;
        let pair = &circ.kraus_pair;
        for (a, ea) in [&pair.a1, &pair.a2].into_iter().enumerate() {
            for (b, eb) in [&pair.a1, &pair.a2].into_iter().enumerate() {
                let expected = &(ea * rho.matrix()) * &eb.adjoint();
                circuit_err = circuit_err.max(RealizationCircuit::ancilla_block(&joint, a, b).max_abs_diff(&expected));
            }
        }
        let (out, _) = quantum::apply(&pair.channel(), &rho)?;
        circuit_err = circuit_err.max(circ.induced_output(&rho)?.max_abs_diff(&out));
    }

    let mut mc_ok = true;
    let mut worst_sigma: f64 = 0.0;
    for (i, (p0, delta)) in [(0.5, 0.8), (0.7, 0.5), (0.9, 1.2)].into_iter().enumerate() {
        let s = src(p0);
        let r = realization::simulate_stream(&realization::build_circuit(delta, &s)?, &s, 1_000_000, SEED + i as u64)?;
        let sigma = (r.analytic_lambda1 * (1.0 - r.analytic_lambda1) / r.n_samples as f64).sqrt();
        let z = (r.empirical_lambda1 - r.analytic_lambda1).abs() / sigma;
        worst_sigma = worst_sigma.max(z);
        mc_ok &= z <= 3.0;
    }

    let classical_err = ratedistortion::sweep_curve(&src(0.5), 101)?
        .iter()
        .map(|p| (p.classical_rate - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        circuit_err <= 1e-11 && mc_ok && classical_err <= 1e-9,
        format!("circuit_err={circuit_err:.3e} mc_worst_sigma={worst_sigma:.2} classical_err={classical_err:.3e}"),
    ))
}

fn ac12(chains: &[&VerificationReport]) -> Result<Outcome> {
    let mut se: f64 = 0.0;
    for p0 in DEFAULT_P0 {
        let s = src(p0);
        let rho = s.rho();
        for p in ratedistortion::sweep_curve(&s, 101)? {
            let pair = KrausPair::diagonal(p.alpha, p.delta);
            for a in [&pair.a1, &pair.a2] {
                if a.frobenius_norm() > 0.0 {
                    se = se.max(quantum::entropy_exchange(&rho, &KrausChannel::single(a.clone()))?.abs());
                }
            }
        }
    }
    let concavity = chains.iter().map(|r| worst(r, "concavity")).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome::new(
        se <= 1e-12 && concavity <= 1e-9,
        format!("max_single_element_S_e={se:.3e} worst_concavity_excess={concavity:.3e} reports={}", chains.len()),
    ))
}

fn report(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (passed, mut detail) = match outcome {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    if !in_time {
        detail.push_str(&format!(" runtime limit {:?} exceeded", limit.unwrap()));
    }
    let ok = passed && in_time;
    println!("AC{id} {} {name} ({:.2}s) {detail}", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    ok
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report(1, "isotropic closed form", Some(secs(1)), ac1);
    all &= report(2, "symmetric root", Some(secs(1)), ac2);
    all &= report(3, "distortion identity", None, ac3);
    all &= report(4, "endpoints", None, ac4);
    all &= report(5, "convexity and zero-slope approach", None, ac5);
    all &= report(6, "trace inequalities", Some(secs(30)), ac6);
    all &= report(7, "diagonal replacement", Some(secs(30)), ac7);

    let mut search = Vec::new();
    let mut blocks = Vec::new();
    all &= report(8, "curve dominance", Some(secs(300)), || {
        (search, blocks) = curve_reports()?;
        Ok(ac8(&search))
    });
    let mut iso = None;
    all &= report(9, "block dominance", None, || {
        let (o, r) = ac9(&blocks)?;
        iso = Some(r);
        Ok(o)
    });
    all &= report(10, "perturbation local minimum", None, ac10);
    all &= report(11, "realization consistency", None, ac11);
    all &= report(12, "entropy exchange", None, || {
        let mut chains: Vec<&VerificationReport> = search.iter().chain(&blocks).collect();
        chains.extend(iso.as_ref());
        ac12(&chains)
    });
    if !all {
        std::process::exit(1);
    }
}
