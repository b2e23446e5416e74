//! Randomized and constructive checks of the rate-distortion results.
//!
//! Every suite derives the randomness of trial `t` from `(seed, t)`, so
//! reports are identical across runs regardless of thread scheduling.
//! Violating trials are kept in the report with enough context to replay
//! them.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::quantum::{self, DensityMatrix, KrausChannel};
use crate::ratedistortion::{self, RateCurve, SourceSpec, DEFAULT_CURVE_POINTS, DEFAULT_TOL};
use crate::record;

/// Tolerance for algebraic identities and inequalities.
pub const ALGEBRAIC_TOL: f64 = 1e-9;
/// Tolerance for comparisons against the interpolated rate curve.
pub const CURVE_TOL: f64 = 1e-6;
/// Entropy agreement required of the diagonal replacement.
pub const ENTROPY_TOL: f64 = 1e-8;
/// Commutator bound for the constructed diagonal operator.
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Number of phases of `x` probed per magnitude.
pub const PERTURBATION_PHASES: usize = 8;
/// Largest perturbation magnitude accepted.
pub const MAX_PERTURBATION: f64 = 0.05;
/// Accepted window for quadratic growth between two perturbation levels,
/// after rescaling to a doubling of `|x|`.
pub const GROWTH_WINDOW: (f64, f64) = (3.0, 5.0);
/// Number of failing trials kept in a report.
pub const MAX_RECORDED_FAILURES: usize = 32;

/// Suite names accepted by [`run_named`].
pub const SUITES: [&str; 7] = ["lemma1", "lemma2", "theorem1", "perturbation", "search", "blocks", "isotropic"];

/// A violating trial, kept for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: u64,
    pub check: String,
    pub excess: f64,
    pub tolerance: f64,
    pub inputs: String,
}

/// Outcome of one suite.
///
/// `worst_violation` is the largest signed excess `observed - bound` over
/// every check of every trial; negative values are slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite_name: String,
    pub n_trials: u64,
    pub n_violations: u64,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub passed: bool,
    pub failures: Vec<FailureRecord>,
}

impl VerificationReport {
    /// `key: value` lines; params and failures use dotted keys.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            ("suite_name".to_string(), self.suite_name.clone()),
            ("n_trials".to_string(), self.n_trials.to_string()),
            ("n_violations".to_string(), self.n_violations.to_string()),
            ("worst_violation".to_string(), record::fmt_f64(self.worst_violation)),
            ("tolerance".to_string(), record::fmt_f64(self.tolerance)),
            ("seed".to_string(), self.seed.to_string()),
            ("passed".to_string(), self.passed.to_string()),
        ];
        for (k, v) in &self.params {
            lines.push((format!("params.{k}"), v.clone()));
        }
        for (i, f) in self.failures.iter().enumerate() {
            lines.push((
                format!("failures.{i}"),
                format!(
                    "trial={} check={} excess={} tolerance={} inputs={}",
                    f.trial,
                    f.check,
                    record::fmt_f64(f.excess),
                    record::fmt_f64(f.tolerance),
                    f.inputs
                ),
            ));
        }
        record::key_value_text(&lines)
    }
}

/// One inequality evaluated in a trial. The check fails when
/// `excess > tol` (or `excess` is NaN).
#[derive(Debug, Clone, Copy)]
struct Check {
    name: &'static str,
    excess: f64,
    tol: f64,
}

impl Check {
    fn new(name: &'static str, excess: f64, tol: f64) -> Self {
        Self { name, excess, tol }
    }

    fn violated(&self) -> bool {
        !(self.excess <= self.tol)
    }
}

struct Trial {
    checks: Vec<Check>,
    inputs: Option<String>,
}

impl Trial {
    /// `describe` only runs when some check failed.
    fn new(checks: Vec<Check>, describe: impl FnOnce() -> String) -> Self {
        let inputs = checks.iter().any(Check::violated).then(describe);
        Self { checks, inputs }
    }
}

/// Independent random stream for trial `t`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct Tally {
    n_violations: u64,
    worst: f64,
    tolerance: f64,
    worst_by_check: BTreeMap<&'static str, f64>,
    failures: Vec<FailureRecord>,
}

impl Tally {
    fn new(tolerance: f64) -> Self {
        Self { n_violations: 0, worst: f64::NEG_INFINITY, tolerance, worst_by_check: BTreeMap::new(), failures: Vec::new() }
    }

    fn push(&mut self, trial: u64, outcome: Result<Trial>) {
        match outcome {
            Ok(t) => {
                let mut failed = false;
                for c in &t.checks {
                    let excess = if c.excess.is_nan() { f64::INFINITY } else { c.excess };
                    self.worst = self.worst.max(excess);
                    self.tolerance = self.tolerance.max(c.tol);
                    let w = self.worst_by_check.entry(c.name).or_insert(f64::NEG_INFINITY);
                    *w = w.max(excess);
                    if c.violated() {
                        failed = true;
                        if self.failures.len() < MAX_RECORDED_FAILURES {
                            self.failures.push(FailureRecord {
                                trial,
                                check: c.name.to_string(),
                                excess,
                                tolerance: c.tol,
                                inputs: t.inputs.clone().unwrap_or_default(),
                            });
                        }
                    }
                }
                if failed {
                    self.n_violations += 1;
                }
            }
            Err(e) => {
                self.n_violations += 1;
                self.worst = f64::INFINITY;
                if self.failures.len() < MAX_RECORDED_FAILURES {
                    self.failures.push(FailureRecord {
                        trial,
                        check: "error".into(),
                        excess: f64::INFINITY,
                        tolerance: self.tolerance,
                        inputs: e.to_string(),
                    });
                }
            }
        }
    }

    fn into_report(self, name: &str, n_trials: u64, seed: u64, mut params: BTreeMap<String, String>) -> VerificationReport {
        for (check, w) in &self.worst_by_check {
            params.insert(format!("worst.{check}"), record::fmt_f64(*w));
        }
        let worst = if self.worst == f64::NEG_INFINITY { 0.0 } else { self.worst };
        VerificationReport {
            suite_name: name.to_string(),
            n_trials,
            n_violations: self.n_violations,
            worst_violation: worst,
            tolerance: self.tolerance,
            seed,
            params,
            passed: self.n_violations == 0 && worst <= self.tolerance,
            failures: self.failures,
        }
    }
}

fn run_random<F>(
    name: &str,
    n_trials: u64,
    seed: u64,
    tolerance: f64,
    params: BTreeMap<String, String>,
    trial: F,
) -> VerificationReport
where
    F: Fn(&mut ChaCha8Rng) -> Result<Trial> + Sync,
{
    let outcomes: Vec<Result<Trial>> = (0..n_trials)
        .into_par_iter()
        .map(|t| trial(&mut trial_rng(seed, t)))
        .collect();
    let mut tally = Tally::new(tolerance);
    for (t, outcome) in outcomes.into_iter().enumerate() {
        tally.push(t as u64, outcome);
    }
    tally.into_report(name, n_trials, seed, params)
}

fn params<const N: usize>(entries: [(&str, String); N]) -> BTreeMap<String, String> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn check_trials(n_trials: u64) -> Result<()> {
    if n_trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    Ok(())
}

/// Positive diagonal entries in `(0, 1]`, sorted in descending order.
fn descending_positive<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| 1.0 - rng.random::<f64>()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn random_complex_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..dim * dim).map(|_| crate::linalg::complex_gaussian(rng)).collect();
    ComplexMatrix::new(dim, data).expect("square by construction")
}

fn fmt_matrix(m: &ComplexMatrix) -> String {
    let rows: Vec<String> = m
        .rows()
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|z| format!("{}{:+}i", record::fmt_f64(z.re), record::fmt_f64(z.im))).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn fmt_channel(ch: &KrausChannel) -> String {
    let parts: Vec<String> = ch.elements().iter().map(fmt_matrix).collect();
    format!("{{{}}}", parts.join(";"))
}

/// `|tr(U Delta V Lambda)| <= tr(Delta Lambda)` for Haar `U, V` and positive
/// descending diagonals.
pub fn check_lemma1(n_trials: u64, dim: usize, seed: u64) -> Result<VerificationReport> {
    check_trials(n_trials)?;
    if !(2..=8).contains(&dim) {
        return Err(Error::Domain(format!("lemma1 needs 2 <= dim <= 8, got {dim}")));
    }
    let p = params([("dim", dim.to_string())]);
    Ok(run_random("lemma1", n_trials, seed, ALGEBRAIC_TOL, p, |rng| {
        let u = ComplexMatrix::random_unitary_with(dim, rng);
        let v = ComplexMatrix::random_unitary_with(dim, rng);
        let delta = descending_positive(dim, rng);
        let lambda = descending_positive(dim, rng);
        let dm = ComplexMatrix::from_diag(&delta);
        let lm = ComplexMatrix::from_diag(&lambda);
        let lhs = (&(&(&u * &dm) * &v) * &lm).trace().norm();
        let rhs: f64 = delta.iter().zip(&lambda).map(|(a, b)| a * b).sum();
        let checks = vec![Check::new("trace_bound", lhs - rhs, ALGEBRAIC_TOL)];
        Ok(Trial::new(checks, || {
            format!("U={} V={} Delta={delta:?} Lambda={lambda:?}", fmt_matrix(&u), fmt_matrix(&v))
        }))
    }))
}

/// `sum_i |tr(Y_i D)|^2 <= tr(D)^2` for Stinespring-sampled `{Y_i}` and
/// random positive `D`.
pub fn check_lemma2(n_trials: u64, dim: usize, k: usize, seed: u64) -> Result<VerificationReport> {
    check_trials(n_trials)?;
    if !(2..=8).contains(&dim) || !(1..=4).contains(&k) {
        return Err(Error::Domain(format!("lemma2 needs 2 <= dim <= 8 and 1 <= k <= 4, got dim {dim}, k {k}")));
    }
    let p = params([("dim", dim.to_string()), ("k", k.to_string())]);
    Ok(run_random("lemma2", n_trials, seed, ALGEBRAIC_TOL, p, |rng| {
        let ch = KrausChannel::random_stinespring(dim, k, rng);
        let w = ComplexMatrix::random_unitary_with(dim, rng);
        let spectrum = descending_positive(dim, rng);
        let d = w.conjugate(&ComplexMatrix::from_diag(&spectrum))?;
        let lhs: f64 = ch.elements().iter().map(|y| (y * &d).trace().norm_sqr()).sum();
        let rhs = d.trace().re.powi(2);
        let checks = vec![Check::new("trace_bound", lhs - rhs, ALGEBRAIC_TOL)];
        Ok(Trial::new(checks, || format!("Y={} D={}", fmt_channel(&ch), fmt_matrix(&d))))
    }))
}

/// Diagonal operator produced by the polar-decomposition recipe.
#[derive(Debug, Clone)]
pub struct DiagonalReplacement {
    /// `D = Sigma rho^{-1/2}` with `Sigma` the singular values of `A rho^{1/2}`.
    pub d: ComplexMatrix,
    /// Unitary `W V` with `A rho A^† = (W V) D rho D^† (W V)^†`.
    pub rotation: ComplexMatrix,
}

/// Writes `A rho^{1/2} = W P`, diagonalizes `P = V Sigma V^†` and returns
/// `D = Sigma rho^{-1/2}`, a positive operator commuting with `rho`.
pub fn diagonal_replacement(a: &ComplexMatrix, src: &SourceSpec) -> Result<DiagonalReplacement> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch { left: 2, right: a.dim() });
    }
    let (p0, p1) = (src.p0(), src.p1());
    let root = ComplexMatrix::from_diag(&[p0.sqrt(), p1.sqrt()]);
    let (w, pos) = a.multiply(&root)?.polar_decompose()?;
    let eig = pos.hermitian_eigen()?;
    let sigma = &eig.values;
    let d = ComplexMatrix::from_diag(&[sigma[0].max(0.0) / p0.sqrt(), sigma[1].max(0.0) / p1.sqrt()]);
    Ok(DiagonalReplacement { d, rotation: w.multiply(&eig.vectors)? })
}

/// Replaces random 2x2 operations by the diagonal operator of
/// [`diagonal_replacement`] and compares entropy, weight and distortion.
pub fn check_theorem1(n_trials: u64, seed: u64, src: &SourceSpec) -> Result<VerificationReport> {
    check_trials(n_trials)?;
    let rho = src.rho();
    let p = params([("p0", record::fmt_f64(src.p0()))]);
    Ok(run_random("theorem1", n_trials, seed, ALGEBRAIC_TOL, p, |rng| {
        let a = random_complex_matrix(2, rng);
        let rep = diagonal_replacement(&a, src)?;
        let ea = KrausChannel::single(a.clone());
        let ed = KrausChannel::single(rep.d.clone());
        let out_a = a.conjugate(rho.matrix())?;
        let out_d = rep.d.conjugate(rho.matrix())?;
        let (wa, wd) = (out_a.trace().re, out_d.trace().re);
        let sa = quantum::von_neumann_entropy(&quantum::apply_normalized(&ea, &rho)?)?;
        let sd = quantum::von_neumann_entropy(&quantum::apply_normalized(&ed, &rho)?)?;
        let da = quantum::distortion(&rho, &ea)?;
        let dd = quantum::distortion(&rho, &ed)?;
        let commutator = rep.d.commutator(rho.matrix())?.max_abs();
        let rebuilt = rep.rotation.conjugate(&out_d)?;
        let checks = vec![
            Check::new("entropy", (sa - sd).abs(), ENTROPY_TOL),
            Check::new("weight", (wa - wd).abs(), ALGEBRAIC_TOL),
            Check::new("distortion", dd - da, ALGEBRAIC_TOL),
            Check::new("commutator", commutator, COMMUTATOR_TOL),
            Check::new("rotation", rebuilt.max_abs_diff(&out_a), ALGEBRAIC_TOL),
        ];
        Ok(Trial::new(checks, || format!("A={} D={}", fmt_matrix(&a), fmt_matrix(&rep.d))))
    }))
}

/// Off-diagonal deformation of the optimal diagonal pair at fixed
/// distortion:
///
/// ```text
/// A1 = f [[l c / p0,  x s / p1], [x* s / p0, (1 - l) c / p1]]
/// A2 = f [[m s / p0, -x c / p1], [-x* c / p0, (1 - m) s / p1]]
/// ```
///
/// with `c = cos t`, `s = sin t`, `d = 1 - f^2`, and `l`, `m` fixed by
/// completeness as functions of `|x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationFrame {
    pub alpha: f64,
    pub delta: f64,
    pub theta: f64,
    pub f: f64,
    pub lambda0: f64,
    pub mu0: f64,
    src: SourceSpec,
}

impl PerturbationFrame {
    /// Frame around the optimal pair at `delta`.
    pub fn new(delta: f64, src: &SourceSpec) -> Result<Self> {
        let alpha = ratedistortion::solve_alpha(delta, src, DEFAULT_TOL)?;
        Self::at(alpha, delta, src)
    }

    /// Frame around the diagonal pair at an arbitrary `(alpha, delta)`.
    pub fn at(alpha: f64, delta: f64, src: &SourceSpec) -> Result<Self> {
        let (p0, p1) = (src.p0(), src.p1());
        let b = alpha + delta;
        if !(alpha > 0.0 && b < std::f64::consts::FRAC_PI_2 && delta > 0.0) {
            return Err(Error::Domain(format!(
                "perturbation frame needs 0 < alpha and 0 < delta with alpha + delta < pi/2, got ({alpha}, {delta})"
            )));
        }
        let f = (1.0 - src.distortion_at(delta)).sqrt();
        let theta = (p0 * alpha.sin() + p1 * b.sin()).atan2(p0 * alpha.cos() + p1 * b.cos());
        Ok(Self {
            alpha,
            delta,
            theta,
            f,
            lambda0: p0 * alpha.cos() / (f * theta.cos()),
            mu0: p0 * alpha.sin() / (f * theta.sin()),
            src: *src,
        })
    }

    /// `(l, m)` at perturbation magnitude `|x|`.
    ///
    /// Subtracting the two completeness equations gives
    /// `l c^2 + m s^2 = L`; substituting back leaves
    /// `l = L +- tan(t) sqrt(P0 - L^2)`. The branch through `lambda0` is kept.
    pub fn coefficients(&self, magnitude: f64) -> Result<(f64, f64)> {
        let (p0, p1) = (self.src.p0(), self.src.p1());
        let f2 = self.f * self.f;
        let m2 = magnitude * magnitude;
        let big_p0 = p0 * p0 / f2 - m2;
        let big_p1 = p1 * p1 / f2 - m2;
        let l = (big_p0 - big_p1 + 1.0) / 2.0;
        let disc = big_p0 - l * l;
        if disc < 0.0 {
            return Err(Error::Infeasible {
                magnitude,
                reason: format!("completeness equations have no real solution (discriminant {disc:e})"),
            });
        }
        let (s, c) = self.theta.sin_cos();
        let root = disc.sqrt() * s / c;
        let lambda = [l + root, l - root]
            .into_iter()
            .min_by(|a, b| (a - self.lambda0).abs().total_cmp(&(b - self.lambda0).abs()))
            .expect("two candidates");
        let mu = (l - lambda * c * c) / (s * s);
        Ok((lambda, mu))
    }

    /// The deformed pair at complex `x`. Completeness is not enforced here;
    /// see [`KrausChannel::completeness_defect`].
    pub fn pair(&self, x: C64) -> Result<KrausChannel> {
        let (lambda, mu) = self.coefficients(x.norm())?;
        let (p0, p1) = (self.src.p0(), self.src.p1());
        let (s, c) = self.theta.sin_cos();
        let f = C64::new(self.f, 0.0);
        let r = |v: f64| C64::new(v, 0.0);
        let a1 = ComplexMatrix::new(2, vec![r(lambda * c / p0), x * s / p1, x.conj() * s / p0, r((1.0 - lambda) * c / p1)])?;
        let a2 = ComplexMatrix::new(2, vec![r(mu * s / p0), -x * c / p1, -x.conj() * c / p0, r((1.0 - mu) * s / p1)])?;
        KrausChannel::new(vec![a1.scale(f), a2.scale(f)], false)
    }

    /// `sum_i lambda_i S(A_i rho A_i^† / lambda_i)` of the deformed pair.
    pub fn average_entropy(&self, x: C64) -> Result<f64> {
        let ch = self.pair(x)?;
        KrausChannel::new(ch.elements().to_vec(), true)
            .and_then(|tp| quantum::average_entropy(&tp, &self.src.rho()))
    }
}

/// Deforms the optimal pair off the diagonal at fixed distortion and checks
/// that the average conditional entropy does not drop. Consecutive
/// magnitudes are also compared: the shifts of `l` and `m` must grow
/// quadratically, with ratio within [`GROWTH_WINDOW`] after rescaling to a
/// doubling of `|x|`. The observed growth of the entropy itself is
/// reported in the params.
pub fn check_perturbation(
    delta_grid: &[f64],
    x_magnitudes: &[f64],
    src: &SourceSpec,
    seed: u64,
) -> Result<VerificationReport> {
    if delta_grid.is_empty() || x_magnitudes.is_empty() {
        return Err(Error::Domain("perturbation needs a non-empty delta grid and magnitude list".into()));
    }
    if let Some(bad) = x_magnitudes.iter().find(|m| !(**m > 0.0 && **m <= MAX_PERTURBATION)) {
        return Err(Error::Domain(format!("perturbation magnitudes must lie in (0, {MAX_PERTURBATION}], got {bad}")));
    }
    let mut mags = x_magnitudes.to_vec();
    mags.sort_by(f64::total_cmp);
    let frames: Vec<PerturbationFrame> =
        delta_grid.par_iter().map(|&d| PerturbationFrame::new(d, src)).collect::<Result<_>>()?;
    let offset = trial_rng(seed, 0).random::<f64>() * TAU / PERTURBATION_PHASES as f64;
    let rho = src.rho();
    let d_target: Vec<f64> = delta_grid.iter().map(|&d| src.distortion_at(d)).collect();

    // One unit of work per (delta, phase); all magnitudes are evaluated
    // together so their growth can be compared.
    let units: Vec<(usize, usize)> =
        (0..frames.len()).flat_map(|i| (0..PERTURBATION_PHASES).map(move |j| (i, j))).collect();
    let results: Vec<(Result<Trial>, Vec<f64>)> = units
        .par_iter()
        .map(|&(i, j)| {
            let frame = &frames[i];
            let phase = offset + TAU * j as f64 / PERTURBATION_PHASES as f64;
            let mut sbar_ratios = Vec::new();
            let trial = (|| {
                let s0 = frame.average_entropy(C64::new(0.0, 0.0))?;
                let base = frame.pair(C64::new(0.0, 0.0))?;
                let diag = ratedistortion::KrausPair::diagonal(frame.alpha, frame.delta).channel();
                let mut checks = vec![Check::new(
                    "reconstruction",
                    base.elements()
                        .iter()
                        .zip(diag.elements())
                        .map(|(a, b)| a.max_abs_diff(b))
                        .fold(0.0, f64::max),
                    ALGEBRAIC_TOL,
                )];
                let mut shifts = Vec::new();
                for &m in &mags {
                    let x = C64::from_polar(m, phase);
                    let ch = frame.pair(x)?;
                    let (lambda, mu) = frame.coefficients(m)?;
                    checks.push(Check::new("completeness", ch.completeness_defect(), ALGEBRAIC_TOL));
                    let tp = KrausChannel::new(ch.elements().to_vec(), true)?;
                    checks.push(Check::new("distortion", (quantum::distortion(&rho, &tp)? - d_target[i]).abs(), ALGEBRAIC_TOL));
                    let s = quantum::average_entropy(&tp, &rho)?;
                    checks.push(Check::new("entropy_increase", s0 - s, ALGEBRAIC_TOL));
                    shifts.push((m, lambda - frame.lambda0, mu - frame.mu0, s - s0));
                }
                for w in shifts.windows(2) {
                    let (ma, la, ua, sa) = w[0];
                    let (mb, lb, ub, sb) = w[1];
                    let scale = 4.0 * (ma / mb).powi(2);
                    for (name, lo, hi) in [("lambda_growth", la, lb), ("mu_growth", ua, ub)] {
                        let ratio = hi / lo * scale;
                        let excess = (GROWTH_WINDOW.0 - ratio).max(ratio - GROWTH_WINDOW.1);
                        checks.push(Check::new(name, excess, 0.0));
                    }
                    if sa != 0.0 {
                        sbar_ratios.push(sb / sa * scale);
                    }
                }
                Ok(Trial::new(checks, || {
                    format!("p0={} delta={} alpha={} phase={} magnitudes={mags:?}", src.p0(), frame.delta, frame.alpha, phase)
                }))
            })();
            (trial, sbar_ratios)
        })
        .collect();

    let mut tally = Tally::new(ALGEBRAIC_TOL);
    let mut sbar_ratios = Vec::new();
    for (t, (outcome, ratios)) in results.into_iter().enumerate() {
        tally.push(t as u64, outcome);
        sbar_ratios.extend(ratios);
    }
    let mut p = params([
        ("p0", record::fmt_f64(src.p0())),
        ("deltas", delta_grid.len().to_string()),
        ("phases", PERTURBATION_PHASES.to_string()),
        ("magnitudes", format!("{mags:?}")),
        ("phase_offset", record::fmt_f64(offset)),
    ]);
    if !sbar_ratios.is_empty() {
        let lo = sbar_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sbar_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        p.insert("entropy_growth_ratio_min".into(), record::fmt_f64(lo));
        p.insert("entropy_growth_ratio_max".into(), record::fmt_f64(hi));
    }
    let n_points = (frames.len() * PERTURBATION_PHASES * mags.len()) as u64;
    Ok(tally.into_report("perturbation", n_points, seed, p))
}

/// Samples random trace-preserving two-element qubit channels and checks
/// that no `(d, S_bar)` point falls below the rate curve. Also checks
/// `S_bar <= S(E(rho))` on every sample.
pub fn random_channel_search(src: &SourceSpec, n_trials: u64, seed: u64) -> Result<VerificationReport> {
    let curve = RateCurve::build(src, DEFAULT_CURVE_POINTS)?;
    random_channel_search_with(&curve, n_trials, seed)
}

/// [`random_channel_search`] against a prebuilt curve.
pub fn random_channel_search_with(curve: &RateCurve, n_trials: u64, seed: u64) -> Result<VerificationReport> {
    check_trials(n_trials)?;
    let src = *curve.source();
    let rho = src.rho();
    let p = params([
        ("p0", record::fmt_f64(src.p0())),
        ("curve_points", curve.distortions().len().to_string()),
        ("curve_error_bound", record::fmt_f64(curve.max_error_bound())),
    ]);
    Ok(run_random("search", n_trials, seed, CURVE_TOL, p, |rng| {
        let ch = KrausChannel::random_stinespring(2, 2, rng);
        let d = quantum::distortion(&rho, &ch)?;
        let sbar = quantum::average_entropy(&ch, &rho)?;
        let s_out = quantum::von_neumann_entropy(&quantum::apply_normalized(&ch, &rho)?)?;
        let checks = vec![
            Check::new("curve", curve.lower_bound(d) - sbar, CURVE_TOL),
            Check::new("concavity", sbar - s_out, ALGEBRAIC_TOL),
        ];
        Ok(Trial::new(checks, || format!("d={} S_bar={} channel={}", d, sbar, fmt_channel(&ch))))
    }))
}

/// Random diagonal trace-preserving set on two qubits: `k` positive
/// diagonals, right-normalized by `(sum_i A_i^† A_i)^{-1/2}`.
pub fn random_diagonal_channel<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> KrausChannel {
    let raw: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| 1.0 - rng.random::<f64>()).collect()).collect();
    let norm: Vec<f64> = (0..dim).map(|j| raw.iter().map(|a| a[j] * a[j]).sum::<f64>().sqrt()).collect();
    let elements = raw
        .iter()
        .map(|a| ComplexMatrix::from_diag(&a.iter().zip(&norm).map(|(x, n)| x / n).collect::<Vec<_>>()))
        .collect();
    KrausChannel::new(elements, true).expect("normalized by construction")
}

/// Largest entry of the Choi blocks of the first-qubit marginal that lies
/// off the `(i, j)` position of block `(i, j)`.
fn marginal_off_diagonal(ch: &KrausChannel, rho: &DensityMatrix) -> Result<f64> {
    let choi = quantum::marginal_channel(ch, rho, 0)?;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let block = choi.block(i, j);
            for r in 0..2 {
                for c in 0..2 {
                    if (r, c) != (i, j) {
                        worst = worst.max(block[(r, c)].norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Random diagonal two-qubit channels: per-qubit rate against the
/// single-qubit curve at the per-qubit block distortion.
pub fn check_theorem2_blocks(src: &SourceSpec, n_trials: u64, seed: u64) -> Result<VerificationReport> {
    let curve = RateCurve::build(src, DEFAULT_CURVE_POINTS)?;
    check_theorem2_blocks_with(&curve, n_trials, seed)
}

/// [`check_theorem2_blocks`] against a prebuilt curve.
pub fn check_theorem2_blocks_with(curve: &RateCurve, n_trials: u64, seed: u64) -> Result<VerificationReport> {
    check_trials(n_trials)?;
    let src = *curve.source();
    let rho = src.rho();
    let rho2 = rho.tensor_power(2)?;
    let p = params([
        ("p0", record::fmt_f64(src.p0())),
        ("n_qubits", "2".into()),
        ("curve_error_bound", record::fmt_f64(curve.max_error_bound())),
    ]);
    Ok(run_random("blocks", n_trials, seed, CURVE_TOL, p, |rng| {
        let k = rng.random_range(1..=4);
        let ch = random_diagonal_channel(4, k, rng);
        let rate = quantum::average_entropy(&ch, &rho2)? / 2.0;
        let d = quantum::block_distortion(&ch, &rho)?;
        let s_out = quantum::von_neumann_entropy(&quantum::apply_normalized(&ch, &rho2)?)?;
        let checks = vec![
            Check::new("curve", curve.lower_bound(d) - rate, CURVE_TOL),
            Check::new("concavity", 2.0 * rate - s_out, ALGEBRAIC_TOL),
            Check::new("marginal_diagonal", marginal_off_diagonal(&ch, &rho)?, ALGEBRAIC_TOL),
        ];
        Ok(Trial::new(checks, || format!("d={d} rate={rate} channel={}", fmt_channel(&ch))))
    }))
}

/// General random channels on `n_qubits` qubits of the unbiased source:
/// per-qubit average conditional entropy against the closed-form curve
/// `h2(1/2 + sqrt(d (1 - d)))`.
pub fn check_theorem3_isotropic(n_qubits: usize, n_trials: u64, seed: u64) -> Result<VerificationReport> {
    check_trials(n_trials)?;
    if !(2..=3).contains(&n_qubits) {
        return Err(Error::Domain(format!("isotropic suite supports 2 or 3 qubits, got {n_qubits}")));
    }
    let src = SourceSpec::new(0.5)?;
    let rho = src.rho();
    let rhon = rho.tensor_power(n_qubits)?;
    let dim = 1 << n_qubits;
    let n = n_qubits as f64;
    let p = params([("p0", record::fmt_f64(0.5)), ("n_qubits", n_qubits.to_string())]);
    Ok(run_random("isotropic", n_trials, seed, CURVE_TOL, p, |rng| {
        let k = rng.random_range(1..=4);
        let ch = KrausChannel::random_stinespring(dim, k, rng);
        let rate = quantum::average_entropy(&ch, &rhon)? / n;
        let d = quantum::block_distortion(&ch, &rho)?;
        let s_out = quantum::von_neumann_entropy(&quantum::apply_normalized(&ch, &rhon)?)?;
        let checks = vec![
            Check::new("curve", ratedistortion::s1_isotropic(d) - rate, CURVE_TOL),
            Check::new("concavity", n * rate - s_out, ALGEBRAIC_TOL),
        ];
        Ok(Trial::new(checks, || format!("d={d} rate={rate} channel={}", fmt_channel(&ch))))
    }))
}

/// Evenly spaced interior angles `delta_i = (i + 1) * (pi/2) / (n + 1)`.
pub fn interior_delta_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * std::f64::consts::FRAC_PI_2 / (n + 1) as f64).collect()
}

/// Runs a suite by name with its standard parameters. Multi-configuration
/// suites return one report per configuration.
pub fn run_named(suite: &str, src: &SourceSpec, n_trials: u64, seed: u64) -> Result<Vec<VerificationReport>> {
    match suite {
        "lemma1" => [2, 4, 8].iter().map(|&d| check_lemma1(n_trials, d, seed)).collect(),
        "lemma2" => [2, 4, 8].iter().map(|&d| check_lemma2(n_trials, d, 2, seed)).collect(),
        "theorem1" => Ok(vec![check_theorem1(n_trials, seed, src)?]),
        "perturbation" => Ok(vec![check_perturbation(&interior_delta_grid(10), &[0.01, 0.02], src, seed)?]),
        "search" => Ok(vec![random_channel_search(src, n_trials, seed)?]),
        "blocks" => Ok(vec![check_theorem2_blocks(src, n_trials, seed)?]),
        "isotropic" => Ok(vec![check_theorem3_isotropic(2, n_trials, seed)?]),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_named(s, src, n_trials, seed)?);
            }
            Ok(out)
        }
        other => Err(Error::Domain(format!("unknown suite '{other}'; expected one of {SUITES:?} or all"))),
    }
}
