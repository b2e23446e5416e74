//! Single-qubit entropy-distortion and rate-distortion curves.
//!
//! The source is `rho = p0 |0><0| + p1 |1><1|` with `p0 >= p1`. The rate
//! curve `R1(d)` is traced by the diagonal two-element family
//!
//! ```text
//! A1 = diag(cos a, cos(a + D)),  A2 = diag(sin a, sin(a + D)),
//! ```
//!
//! whose distortion `2 p0 p1 (1 - cos D)` does not depend on `a`. For each
//! `D` the angle `a` is the stationary point of the average conditional
//! entropy with the smallest value.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quantum::{self, h2, DensityMatrix, KrausChannel};

/// Inset from the ends of the angle intervals, in radians.
pub const ENDPOINT_INSET: f64 = 1e-6;
/// Number of grid points scanned for sign changes of the residual.
pub const ROOT_SCAN_POINTS: usize = 512;
/// Default bisection bracket width.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Number of sweep points used to build a [`RateCurve`] by default.
pub const DEFAULT_CURVE_POINTS: usize = 512;

const DISTORTION_CHECK_TOL: f64 = 1e-10;

/// A two-level source `diag(p0, 1 - p0)` with `p0` in `[0.5, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    p0: f64,
}

impl SourceSpec {
    pub fn new(p0: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&p0) {
            return Err(Error::Domain(format!("p0 = {p0} must lie in [0.5, 1)")));
        }
        Ok(Self { p0 })
    }

    /// The five source biases used throughout the figures and default sweeps.
    pub fn defaults() -> Vec<SourceSpec> {
        [0.5, 0.6, 0.7, 0.8, 0.9].iter().map(|&p| SourceSpec { p0: p }).collect()
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        1.0 - self.p0
    }

    pub fn rho(&self) -> DensityMatrix {
        DensityMatrix::diagonal_qubit(self.p0).expect("p0 validated at construction")
    }

    /// `S(rho) = h2(p0)`.
    pub fn entropy(&self) -> f64 {
        h2(self.p0)
    }

    /// Largest useful distortion, `2 p0 p1`.
    pub fn d_max(&self) -> f64 {
        2.0 * self.p0 * self.p1()
    }

    /// `2 p0 p1 (1 - cos delta)`.
    pub fn distortion_at(&self, delta: f64) -> f64 {
        self.d_max() * (1.0 - delta.cos())
    }
}

/// The diagonal pair `A1 = diag(cos a, cos(a+D))`, `A2 = diag(sin a, sin(a+D))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausPair {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
}

impl KrausPair {
    pub fn diagonal(alpha: f64, delta: f64) -> Self {
        let b = alpha + delta;
        Self {
            a1: ComplexMatrix::from_diag(&[alpha.cos(), b.cos()]),
            a2: ComplexMatrix::from_diag(&[alpha.sin(), b.sin()]),
        }
    }

    pub fn channel(&self) -> KrausChannel {
        KrausChannel::new(vec![self.a1.clone(), self.a2.clone()], true)
            .expect("cos/sin parametrization is trace preserving")
    }

    /// Probability of the first element, `tr(A1 rho A1^†)`.
    pub fn lambda1(&self, rho: &DensityMatrix) -> f64 {
        self.a1.conjugate(rho.matrix()).expect("qubit dimensions").trace().re
    }
}

/// One sample of the rate-distortion sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub delta: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "r")]
    pub classical_rate: f64,
    pub lambda1: f64,
}

/// A point `(d, S)` on the single-element curve `S1`, using
/// `A = diag(cos theta, sin theta)`.
pub fn s1_curve_point(theta: f64, src: &SourceSpec) -> Result<(f64, f64)> {
    if !(0.0..=FRAC_PI_4 + 1e-15).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, pi/4]")));
    }
    let rho = src.rho();
    let ch = KrausChannel::single(ComplexMatrix::from_diag(&[theta.cos(), theta.sin()]));
    let d = quantum::distortion(&rho, &ch)?;
    let s = quantum::von_neumann_entropy(&quantum::apply_normalized(&ch, &rho)?)?;
    Ok((d, s))
}

/// `n_points` samples `(theta, d, S)` of `S1` on a uniform theta grid from
/// `pi/4` down to 0, so that `d` ascends.
pub fn s1_curve(src: &SourceSpec, n_points: usize) -> Result<Vec<(f64, f64, f64)>> {
    if n_points < 2 {
        return Err(Error::Domain("a curve needs at least 2 points".into()));
    }
    (0..n_points)
        .map(|i| {
            let theta = FRAC_PI_4 * (1.0 - i as f64 / (n_points - 1) as f64);
            let (d, s) = s1_curve_point(theta, src)?;
            Ok((theta, d, s))
        })
        .collect()
}

/// `S1(d) = h2(1/2 + sqrt(d (1 - d)))`, the closed form for `p0 = 1/2`.
pub fn s1_isotropic(d: f64) -> f64 {
    let d = d.clamp(0.0, 0.5);
    h2(0.5 + (d * (1.0 - d)).sqrt())
}

/// Average conditional entropy of the diagonal pair at `(alpha, delta)`,
/// evaluated in closed form.
pub fn diagonal_average_entropy(alpha: f64, delta: f64, src: &SourceSpec) -> f64 {
    let (p0, p1) = (src.p0(), src.p1());
    let b = alpha + delta;
    let x1 = p0 * alpha.cos().powi(2);
    let y1 = p1 * b.cos().powi(2);
    let x2 = p0 * alpha.sin().powi(2);
    let y2 = p1 * b.sin().powi(2);
    let term = |x: f64, y: f64| {
        let l = x + y;
        if l <= quantum::ANNIHILATION_TOL {
            0.0
        } else {
            l * h2(x / l)
        }
    };
    term(x1, y1) + term(x2, y2)
}

fn check_delta_open(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < FRAC_PI_2) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, pi/2)")));
    }
    Ok(())
}

/// Derivative with respect to `alpha` of the average conditional entropy
/// of the diagonal pair. Its zeros are the stationary points of the pair
/// at fixed distortion.
///
/// With `b = alpha + delta`, `lambda1 = p0 cos^2 a + p1 cos^2 b` and
/// `lambda2 = 1 - lambda1`:
///
/// ```text
/// p0 sin 2a log2(cot^2 a) + p1 sin 2b log2(cot^2 b)
///     + (p0 sin 2a + p1 sin 2b) log2(lambda2 / lambda1)
/// ```
pub fn stationarity_residual(alpha: f64, delta: f64, src: &SourceSpec) -> Result<f64> {
    check_delta_open(delta)?;
    let upper = FRAC_PI_2 - delta;
    if alpha.abs() < 1e-15 || (alpha - upper).abs() < 1e-15 {
        return Err(Error::EndpointSingularity { alpha, delta });
    }
    if !(alpha > 0.0 && alpha < upper) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, pi/2 - delta)")));
    }
    Ok(residual_unchecked(alpha, delta, src))
}

fn residual_unchecked(alpha: f64, delta: f64, src: &SourceSpec) -> f64 {
    // Regrouped so that the O(1) pieces cancel analytically:
    //   2 p1 sin 2b log2(tan a / tan b) + K log2(lambda2 cot^2 a / lambda1)
    // with both logarithms written as log2(1 + small).
    let (p0, p1) = (src.p0(), src.p1());
    let b = alpha + delta;
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = b.sin_cos();
    let sd = delta.sin();
    let lambda1 = p0 * ca * ca + p1 * cb * cb;
    let k = p0 * (2.0 * alpha).sin() + p1 * (2.0 * b).sin();
    let tan_ratio = (-sd / (ca * sb)).ln_1p();
    let weight_ratio = (p1 * sd * (alpha + b).sin() / (sa * sa * lambda1)).ln_1p();
    (2.0 * p1 * (2.0 * b).sin() * tan_ratio + k * weight_ratio) / std::f64::consts::LN_2
}

/// The minimizing stationary angle `alpha(delta)`.
///
/// Scans [`ROOT_SCAN_POINTS`] points of `(0, pi/2 - delta)` (inset by
/// [`ENDPOINT_INSET`]) for sign changes of [`stationarity_residual`],
/// bisects each bracket to width `tol`, and keeps the root with the
/// smallest average entropy. `delta` closer than [`ENDPOINT_INSET`] to 0 or
/// `pi/2` is evaluated at that offset.
pub fn solve_alpha(delta: f64, src: &SourceSpec, tol: f64) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::Domain(format!("solver tolerance {tol} below 1e-12")));
    }
    if !(0.0..=FRAC_PI_2).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, pi/2]")));
    }
    let delta = delta.clamp(ENDPOINT_INSET, FRAC_PI_2 - ENDPOINT_INSET);
    let width = FRAC_PI_2 - delta;
    // The minimizing root behaves like p1 delta / (p0 - p1) for small delta,
    // so the inset has to shrink with delta.
    let inset = ENDPOINT_INSET.min(width / 1024.0).min(delta * 1e-6);
    let (lo, hi) = (inset, width - inset);
    let step = (hi - lo) / (ROOT_SCAN_POINTS - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..ROOT_SCAN_POINTS)
        .map(|i| {
            let a = if i + 1 == ROOT_SCAN_POINTS { hi } else { lo + step * i as f64 };
            (a, residual_unchecked(a, delta, src))
        })
        .collect();

    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let ((a0, r0), (a1, r1)) = (w[0], w[1]);
        if r0 == 0.0 {
            roots.push(a0);
        } else if r0.signum() != r1.signum() && r1 != 0.0 {
            roots.push(bisect(a0, r0, a1, delta, src, tol));
        }
    }
    if let Some(&(a, r)) = grid.last() {
        if r == 0.0 {
            roots.push(a);
        }
    }
    roots
        .into_iter()
        .map(|a| (a, diagonal_average_entropy(a, delta, src)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(a, _)| a)
        .ok_or(Error::RootNotFound { delta, grid })
}

fn bisect(mut lo: f64, mut r_lo: f64, mut hi: f64, delta: f64, src: &SourceSpec, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r_mid = residual_unchecked(mid, delta, src);
        if r_mid == 0.0 {
            return mid;
        }
        if r_mid.signum() == r_lo.signum() {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Limit of the optimal angle at the ends of the delta range, `None` inside.
///
/// For `p0 > 1/2` the optimal angle behaves like `p1 delta / (p0 - p1)` as
/// `delta -> 0`, so it tends to 0; for `p0 = 1/2` it is `pi/4 - delta/2`.
/// At `delta = pi/2` it tends to 0 for every source.
pub fn limiting_alpha(delta: f64, src: &SourceSpec) -> Option<f64> {
    if delta == 0.0 {
        Some(if src.p0() == 0.5 { FRAC_PI_4 } else { 0.0 })
    } else if delta == FRAC_PI_2 {
        Some(0.0)
    } else {
        None
    }
}

/// The rate-distortion point at `delta`.
///
/// `delta = 0` and `delta = pi/2` use the analytic limits
/// `R = h2(p0)` and `R = 0`, with [`limiting_alpha`] for the angle.
pub fn r1_curve_point(delta: f64, src: &SourceSpec) -> Result<CurvePoint> {
    r1_curve_point_tol(delta, src, DEFAULT_TOL)
}

/// [`r1_curve_point`] with an explicit solver tolerance.
pub fn r1_curve_point_tol(delta: f64, src: &SourceSpec, tol: f64) -> Result<CurvePoint> {
    if !(0.0..=FRAC_PI_2).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, pi/2]")));
    }
    let rho = src.rho();
    let alpha = match limiting_alpha(delta, src) {
        Some(a) => a,
        None => solve_alpha(delta, src, tol)?,
    };
    let pair = KrausPair::diagonal(alpha, delta);
    let lambda1 = pair.lambda1(&rho);
    let (d, rate) = if delta == 0.0 {
        (0.0, src.entropy())
    } else if delta == FRAC_PI_2 {
        (src.d_max(), 0.0)
    } else {
        let ch = pair.channel();
        let d = quantum::distortion(&rho, &ch)?;
        let expected = src.distortion_at(delta);
        if (d - expected).abs() > DISTORTION_CHECK_TOL {
            return Err(Error::Contract(format!(
                "pair distortion {d} disagrees with 2 p0 p1 (1 - cos delta) = {expected}"
            )));
        }
        (d, quantum::average_entropy(&ch, &rho)?)
    };
    Ok(CurvePoint { delta, alpha, d, rate, classical_rate: h2(lambda1), lambda1 })
}

/// `n_points` curve points on a uniform delta grid over `[0, pi/2]`,
/// ordered by ascending distortion.
pub fn sweep_curve(src: &SourceSpec, n_points: usize) -> Result<Vec<CurvePoint>> {
    sweep_curve_tol(src, n_points, DEFAULT_TOL)
}

/// [`sweep_curve`] with an explicit solver tolerance.
pub fn sweep_curve_tol(src: &SourceSpec, n_points: usize, tol: f64) -> Result<Vec<CurvePoint>> {
    if n_points < 2 {
        return Err(Error::Domain("a curve needs at least 2 points".into()));
    }
    (0..n_points)
        .into_par_iter()
        .map(|i| {
            let delta = if i + 1 == n_points { FRAC_PI_2 } else { FRAC_PI_2 * i as f64 / (n_points - 1) as f64 };
            r1_curve_point_tol(delta, src, tol)
        })
        .collect()
}

/// `n_points` curve points on a uniform distortion grid over `[0, d_max]`,
/// using `delta = acos(1 - d / d_max)`.
pub fn sweep_curve_uniform_d(src: &SourceSpec, n_points: usize) -> Result<Vec<CurvePoint>> {
    if n_points < 2 {
        return Err(Error::Domain("a curve needs at least 2 points".into()));
    }
    (0..n_points)
        .into_par_iter()
        .map(|i| {
            let delta = if i + 1 == n_points {
                FRAC_PI_2
            } else {
                (1.0 - i as f64 / (n_points - 1) as f64).acos()
            };
            r1_curve_point(delta, src)
        })
        .collect()
}

/// Classical Hamming-distortion baseline `max(0, h2(p0) - h2(d))`.
pub fn classical_hamming_baseline(src: &SourceSpec, d: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&d) {
        return Err(Error::Domain(format!("Hamming distortion {d} outside [0, 1/2]")));
    }
    Ok((src.entropy() - h2(d)).max(0.0))
}

/// Monotone cubic interpolant of `R1(d)` with a per-interval error bound.
///
/// The bound for each interval is twice the largest discrepancy between the
/// interpolant and exact solves at the quarter, half and three-quarter
/// delta points of the interval and its two neighbours.
#[derive(Debug, Clone)]
pub struct RateCurve {
    src: SourceSpec,
    d: Vec<f64>,
    rate: Vec<f64>,
    slopes: Vec<f64>,
    bounds: Vec<f64>,
}

impl RateCurve {
    pub fn build(src: &SourceSpec, n_points: usize) -> Result<Self> {
        let points = sweep_curve(src, n_points)?;
        let d: Vec<f64> = points.iter().map(|p| p.d).collect();
        let rate: Vec<f64> = points.iter().map(|p| p.rate).collect();
        let slopes = pchip_slopes(&d, &rate);
        let mut curve = Self { src: *src, d, rate, slopes, bounds: Vec::new() };

        let discrepancy: Vec<f64> = points
            .par_windows(2)
            .map(|w| {
                let mut worst: f64 = 0.0;
                for t in [0.25, 0.5, 0.75] {
                    let exact = r1_curve_point(w[0].delta + t * (w[1].delta - w[0].delta), src)?;
                    worst = worst.max((curve.eval(exact.d) - exact.rate).abs());
                }
                Ok(worst)
            })
            .collect::<Result<_>>()?;
        let m = discrepancy.len();
        curve.bounds = (0..m)
            .map(|k| {
                let lo = k.saturating_sub(1);
                let hi = (k + 1).min(m - 1);
                2.0 * discrepancy[lo..=hi].iter().copied().fold(0.0, f64::max)
            })
            .collect();
        Ok(curve)
    }

    pub fn source(&self) -> &SourceSpec {
        &self.src
    }

    pub fn distortions(&self) -> &[f64] {
        &self.d
    }

    pub fn rates(&self) -> &[f64] {
        &self.rate
    }

    fn interval(&self, d: f64) -> usize {
        match self.d.partition_point(|&x| x <= d) {
            0 => 0,
            k => (k - 1).min(self.d.len() - 2),
        }
    }

    /// Interpolated rate; constant extension outside the sampled range.
    pub fn eval(&self, d: f64) -> f64 {
        let n = self.d.len();
        if d <= self.d[0] {
            return self.rate[0];
        }
        if d >= self.d[n - 1] {
            return self.rate[n - 1];
        }
        let k = self.interval(d);
        let h = self.d[k + 1] - self.d[k];
        let t = (d - self.d[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.rate[k] + h10 * h * self.slopes[k] + h01 * self.rate[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn error_bound(&self, d: f64) -> f64 {
        if self.bounds.is_empty() {
            return 0.0;
        }
        self.bounds[self.interval(d).min(self.bounds.len() - 1)]
    }

    /// `eval(d) - error_bound(d)`.
    pub fn lower_bound(&self, d: f64) -> f64 {
        self.eval(d) - self.error_bound(d)
    }

    pub fn max_error_bound(&self) -> f64 {
        self.bounds.iter().copied().fold(0.0, f64::max)
    }
}

/// Fritsch-Carlson style monotone slopes (weighted harmonic mean).
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let secant: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for k in 1..n - 1 {
        let (s0, s1) = (secant[k - 1], secant[k]);
        if s0 * s1 <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / s0 + w2 / s1);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(p0: f64) -> SourceSpec {
        SourceSpec::new(p0).unwrap()
    }

    #[test]
    fn source_validation() {
        assert!(SourceSpec::new(0.4).is_err());
        assert!(SourceSpec::new(1.0).is_err());
        assert!(SourceSpec::new(f64::NAN).is_err());
        assert!((src(0.7).d_max() - 0.42).abs() < 1e-15);
    }

    #[test]
    fn s1_examples() {
        for p0 in [0.5, 0.7, 0.9] {
            let (d, s) = s1_curve_point(FRAC_PI_4, &src(p0)).unwrap();
            assert!(d.abs() < 1e-15);
            assert!((s - h2(p0)).abs() < 1e-14);
        }
        // A = diag(1, 0): d = 1 - p0^2 / p0 = p1.
        let (d, s) = s1_curve_point(0.0, &src(0.7)).unwrap();
        assert!((d - 0.3).abs() < 1e-15 && s.abs() < 1e-15);
        assert!(s1_curve_point(1.0, &src(0.7)).is_err());
    }

    #[test]
    fn s1_isotropic_matches_closed_form() {
        let s = src(0.5);
        for i in 0..=50 {
            let theta = FRAC_PI_4 * i as f64 / 50.0;
            let (d, entropy) = s1_curve_point(theta, &s).unwrap();
            assert!((entropy - s1_isotropic(d)).abs() < 1e-10, "theta {theta}");
        }
    }

    #[test]
    fn residual_vanishes_at_symmetric_root() {
        let s = src(0.5);
        // Keep a +/- 0.1 bracket inside (0, pi/2 - delta).
        for i in 1..17 {
            let delta = FRAC_PI_2 * i as f64 / 20.0;
            let a = FRAC_PI_4 - delta / 2.0;
            assert!(stationarity_residual(a, delta, &s).unwrap().abs() < 1e-10);
            let left = stationarity_residual(a - 0.1, delta, &s).unwrap();
            let right = stationarity_residual(a + 0.1, delta, &s).unwrap();
            assert!(left * right < 0.0, "delta {delta}: {left} {right}");
        }
    }

    #[test]
    fn residual_endpoint_errors() {
        let s = src(0.7);
        assert!(matches!(stationarity_residual(0.0, 0.5, &s), Err(Error::EndpointSingularity { .. })));
        assert!(matches!(
            stationarity_residual(FRAC_PI_2 - 0.5, 0.5, &s),
            Err(Error::EndpointSingularity { .. })
        ));
        assert!(matches!(stationarity_residual(1.2, 0.5, &s), Err(Error::Domain(_))));
        assert!(matches!(stationarity_residual(0.1, 0.0, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn solve_alpha_symmetric() {
        let a = solve_alpha(0.8, &src(0.5), 1e-12).unwrap();
        assert!((a - (FRAC_PI_4 - 0.4)).abs() < 1e-9);
    }

    #[test]
    fn solve_alpha_tolerance_contract() {
        let s = src(0.7);
        for delta in [0.1, 0.6, 1.3] {
            let coarse = solve_alpha(delta, &s, 1e-8).unwrap();
            let fine = solve_alpha(delta, &s, 1e-12).unwrap();
            assert!((coarse - fine).abs() < 1e-7);
        }
        assert!(solve_alpha(0.5, &s, 1e-13).is_err());
        assert!(solve_alpha(2.0, &s, 1e-12).is_err());
    }

    #[test]
    fn r1_endpoints() {
        let s = src(0.7);
        let start = r1_curve_point(0.0, &s).unwrap();
        assert_eq!(start.d, 0.0);
        assert!((start.rate - h2(0.7)).abs() < 1e-15);
        let end = r1_curve_point(FRAC_PI_2, &s).unwrap();
        assert!((end.d - 0.42).abs() < 1e-15);
        assert_eq!(end.rate, 0.0);
    }

    #[test]
    fn endpoint_angles_are_limits_of_the_solver() {
        for p0 in [0.6, 0.7, 0.9] {
            let s = src(p0);
            // Small-delta asymptote of the minimizing root.
            let delta = 1e-4;
            let a = solve_alpha(delta, &s, 1e-12).unwrap();
            let slope = (1.0 - p0) / (2.0 * p0 - 1.0);
            assert!((a / (slope * delta) - 1.0).abs() < 1e-5, "p0 = {p0}: {a}");
            assert_eq!(limiting_alpha(0.0, &s), Some(0.0));
            let start = r1_curve_point(0.0, &s).unwrap();
            assert_eq!(start.lambda1, 1.0);
            assert_eq!(start.classical_rate, 0.0);
        }
        let half = src(0.5);
        assert_eq!(limiting_alpha(0.0, &half), Some(FRAC_PI_4));
        assert!((r1_curve_point(0.0, &half).unwrap().classical_rate - 1.0).abs() < 1e-15);
        let near_end = solve_alpha(FRAC_PI_2 - 1e-3, &src(0.8), 1e-12).unwrap();
        assert!(near_end < 1e-3);
        assert_eq!(limiting_alpha(FRAC_PI_2, &src(0.8)), Some(0.0));
        assert_eq!(limiting_alpha(0.3, &src(0.8)), None);
    }

    #[test]
    fn r1_isotropic_identities() {
        let s = src(0.5);
        for delta in [0.2, 0.7, 1.1, 1.5] {
            let p = r1_curve_point(delta, &s).unwrap();
            assert!((p.lambda1 - 0.5).abs() < 1e-12);
            assert!((p.classical_rate - 1.0).abs() < 1e-12);
            assert!((p.rate - h2((1.0 + delta.sin()) / 2.0)).abs() < 1e-10);
            assert!((p.rate - s1_isotropic(p.d)).abs() < 1e-10);
        }
    }

    #[test]
    fn hamming_baseline_examples() {
        let s = src(0.7);
        assert!((classical_hamming_baseline(&s, 0.0).unwrap() - h2(0.7)).abs() < 1e-15);
        assert_eq!(classical_hamming_baseline(&src(0.5), 0.5).unwrap(), 0.0);
        assert!((classical_hamming_baseline(&s, 0.1).unwrap() - 0.4122953056414114).abs() < 1e-14);
        assert!(classical_hamming_baseline(&s, 0.6).is_err());
        assert!(classical_hamming_baseline(&s, -0.1).is_err());
    }

    #[test]
    fn pchip_reproduces_linear_data() {
        let x = [0.0, 0.1, 0.3, 0.7, 1.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        let m = pchip_slopes(&x, &y);
        assert!(m.iter().all(|s| (s + 3.0).abs() < 1e-12));
    }

    #[test]
    fn rate_curve_interpolates_sweep() {
        let s = src(0.7);
        let curve = RateCurve::build(&s, 128).unwrap();
        for (&d, &r) in curve.distortions().iter().zip(curve.rates()) {
            assert!((curve.eval(d) - r).abs() < 1e-14);
        }
        let probe = r1_curve_point(0.77, &s).unwrap();
        let err = (curve.eval(probe.d) - probe.rate).abs();
        assert!(err <= curve.error_bound(probe.d) + 1e-12, "err {err} bound {}", curve.error_bound(probe.d));
        assert!(curve.max_error_bound() < 1e-3);
    }
}
