//! Cubic chaotic-transition law and its inversion against measured data.
//!
//! With `x = λ/λ_c` the chaotic measure follows
//!
//! ```text
//! μ(λ) ≈ μ_c · (3/2·x² − 1/2·x³)        for λ ∈ [0, λ_c + ε]
//! ```
//!
//! which vanishes with zero slope at `λ = 0` and has an inflection point at
//! `λ = λ_c`. For small kicks only the quadratic term survives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the validity window beyond `λ_c`, as a fraction of `λ_c`.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.2;
/// Largest admissible window extension, as a fraction of `λ_c`.
pub const MAX_EPSILON_FRACTION: f64 = 0.5;
/// Floor on the confidence half-width used for fit weights.
pub const WEIGHT_FLOOR: f64 = 1e-4;

pub const MIN_CRITICAL_SAMPLES: usize = 5;
pub const MIN_FIT_SAMPLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionCurve {
    pub lambda_c: f64,
    pub mu_c: f64,
}

impl TransitionCurve {
    pub fn new(lambda_c: f64, mu_c: f64) -> Result<Self> {
        if !(lambda_c.is_finite() && lambda_c > 0.0) {
            return Err(Error::param("lambda_c", format!("must be > 0, got {lambda_c}")));
        }
        if !(mu_c.is_finite() && mu_c > 0.0 && mu_c <= 1.0) {
            return Err(Error::param("mu_c", format!("must lie in (0, 1], got {mu_c}")));
        }
        Ok(Self { lambda_c, mu_c })
    }

    /// Upper end of the validity window for `epsilon_fraction · λ_c`.
    pub fn window_end(&self, epsilon_fraction: f64) -> f64 {
        self.lambda_c * (1.0 + epsilon_fraction)
    }
}

/// Shape of the cubic law in the reduced variable `x = λ/λ_c`.
#[inline]
pub fn cubic_shape(x: f64) -> f64 {
    x * x * (1.5 - 0.5 * x)
}

/// Cubic law with the default window `ε = 0.2·λ_c`.
pub fn cubic_transition(lambda: f64, curve: &TransitionCurve) -> Result<f64> {
    cubic_transition_with_window(lambda, curve, DEFAULT_EPSILON_FRACTION)
}

/// Cubic law with an explicit window extension `ε = epsilon_fraction · λ_c`.
pub fn cubic_transition_with_window(
    lambda: f64,
    curve: &TransitionCurve,
    epsilon_fraction: f64,
) -> Result<f64> {
    if !(0.0..=MAX_EPSILON_FRACTION).contains(&epsilon_fraction) {
        return Err(Error::param(
            "epsilon",
            format!("window extension must lie in [0, {MAX_EPSILON_FRACTION}]·λ_c, got {epsilon_fraction}"),
        ));
    }
    let hi = curve.window_end(epsilon_fraction);
    if !(lambda >= 0.0 && lambda <= hi) {
        return Err(Error::OutOfDomain {
            value: lambda,
            lo: 0.0,
            hi,
        });
    }
    Ok(curve.mu_c * cubic_shape(lambda / curve.lambda_c))
}

/// Small-kick limit `μ_c · 3/2 · (λ/λ_c)²`.
pub fn quadratic_small_lambda(lambda: f64, curve: &TransitionCurve) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    let x = lambda / curve.lambda_c;
    Ok(curve.mu_c * 1.5 * x * x)
}

/// Tolerances used by [`check_critical_conditions`]. Slope and curvature
/// tolerances are relative to the natural scales `Δμ/Δλ` and `Δμ/Δλ²` of the
/// sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalTolerances {
    pub zero: f64,
    pub slope: f64,
    pub saturation: f64,
    pub curvature: f64,
}

impl Default for CriticalTolerances {
    fn default() -> Self {
        Self {
            zero: 0.01,
            slope: 0.1,
            saturation: 0.1,
            curvature: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    /// μ vanishes at the smallest sampled λ.
    pub regular_limit: bool,
    /// μ approaches 1 at the largest sampled λ, which lies beyond λ_c.
    pub chaotic_limit: bool,
    /// Second derivative at λ_c vanishes.
    pub inflection: bool,
    /// First derivative at the smallest λ vanishes; reported separately from
    /// the three limit conditions.
    pub zero_slope: bool,
    pub second_derivative: f64,
    pub slope_at_zero: f64,
    /// Sample used as the centre of the second-difference stencil.
    pub stencil_center: f64,
}

impl CriticalReport {
    /// All three limit conditions plus the zero-slope condition.
    pub fn all_pass(&self) -> bool {
        self.regular_limit && self.chaotic_limit && self.inflection && self.zero_slope
    }
}

fn check_sorted(lambdas: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for l in lambdas {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::param("samples", format!("λ must be finite and >= 0, got {l}")));
        }
        if l <= prev {
            return Err(Error::param("samples", "λ values must be strictly increasing"));
        }
        prev = l;
    }
    Ok(())
}

/// Second derivative at `x1` from three unequally spaced samples.
fn second_difference(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> f64 {
    let h1 = p1.0 - p0.0;
    let h2 = p2.0 - p1.0;
    2.0 * (p0.1 / (h1 * (h1 + h2)) - p1.1 / (h1 * h2) + p2.1 / (h2 * (h1 + h2)))
}

/// First derivative at `x0` from the quadratic through three samples.
fn one_sided_slope(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> f64 {
    let (x0, x1, x2) = (p0.0, p1.0, p2.0);
    p0.1 * (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + p1.1 * (x0 - x2) / ((x1 - x0) * (x1 - x2))
        + p2.1 * (x0 - x1) / ((x2 - x0) * (x2 - x1))
}

pub fn check_critical_conditions(samples: &[(f64, f64)], lambda_c: f64) -> Result<CriticalReport> {
    check_critical_conditions_with(samples, lambda_c, CriticalTolerances::default())
}

pub fn check_critical_conditions_with(
    samples: &[(f64, f64)],
    lambda_c: f64,
    tol: CriticalTolerances,
) -> Result<CriticalReport> {
    if samples.len() < MIN_CRITICAL_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_CRITICAL_SAMPLES,
            got: samples.len(),
        });
    }
    if !(lambda_c.is_finite() && lambda_c > 0.0) {
        return Err(Error::param("lambda_c", format!("must be > 0, got {lambda_c}")));
    }
    check_sorted(samples.iter().map(|s| s.0))?;

    let n = samples.len();
    let (first, last) = (samples[0], samples[n - 1]);
    let mu_lo = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let mu_hi = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let mu_span = (mu_hi - mu_lo).max(f64::MIN_POSITIVE);
    let lambda_span = last.0 - first.0;

    let center = samples
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 .0 - lambda_c)
                .abs()
                .total_cmp(&(b.1 .0 - lambda_c).abs())
        })
        .map(|(i, _)| i)
        .unwrap_or(0)
        .clamp(1, n - 2);
    let second_derivative =
        second_difference(samples[center - 1], samples[center], samples[center + 1]);
    let slope_at_zero = one_sided_slope(samples[0], samples[1], samples[2]);

    Ok(CriticalReport {
        regular_limit: first.1.abs() <= tol.zero,
        chaotic_limit: last.0 > lambda_c && last.1 >= 1.0 - tol.saturation,
        inflection: second_derivative.abs() <= tol.curvature * mu_span / (lambda_span * lambda_span),
        zero_slope: slope_at_zero.abs() <= tol.slope * mu_span / lambda_span,
        second_derivative,
        slope_at_zero,
        stencil_center: samples[center].0,
    })
}

/// Sample `(λ, μ, confidence half-width)` fed to [`fit_transition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub lambda: f64,
    pub mu: f64,
    pub ci_halfwidth: f64,
}

impl From<(f64, f64, f64)> for FitSample {
    fn from((lambda, mu, ci_halfwidth): (f64, f64, f64)) -> Self {
        Self {
            lambda,
            mu,
            ci_halfwidth,
        }
    }
}

impl From<&crate::classical::RegionEstimate> for FitSample {
    fn from(r: &crate::classical::RegionEstimate) -> Self {
        Self {
            lambda: r.lambda,
            mu: r.mu_a,
            ci_halfwidth: r.ci_halfwidth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lambda_c: f64,
    pub mu_c: f64,
    /// Unweighted residual sum of squares of the saturated model over all samples.
    pub rss: f64,
    pub n_points: usize,
    pub fit_window: [f64; 2],
}

impl FitResult {
    /// The fitted curve. `mu_c` is not clamped to `(0, 1]`.
    pub fn curve(&self) -> TransitionCurve {
        TransitionCurve {
            lambda_c: self.lambda_c,
            mu_c: self.mu_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub epsilon_fraction: f64,
    pub weight_floor: f64,
    /// Coarse candidates scanned before the golden-section refinement.
    pub scan_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            epsilon_fraction: DEFAULT_EPSILON_FRACTION,
            weight_floor: WEIGHT_FLOOR,
            scan_points: 400,
        }
    }
}

struct Profile {
    score: f64,
    mu_c: f64,
    rss: f64,
    n_points: usize,
}

/// Cubic law continued past its validity window at its window-end value:
/// `μ_c · shape(min(λ/λ_c, 1 + ε/λ_c))`.
pub fn saturated_cubic(lambda: f64, curve: &TransitionCurve, epsilon_fraction: f64) -> f64 {
    curve.mu_c * cubic_shape((lambda / curve.lambda_c).min(1.0 + epsilon_fraction))
}

/// For fixed `λ_c` the model is linear in `μ_c`: solve it in closed form and
/// score the candidate by the reduced weighted χ² over all samples, using the
/// saturated continuation past the window so every candidate sees the same
/// data.
fn profile(samples: &[FitSample], lambda_c: f64, opts: &FitOptions) -> Option<Profile> {
    let hi = lambda_c * (1.0 + opts.epsilon_fraction);
    if samples.iter().filter(|s| s.lambda <= hi).count() < 3 {
        return None;
    }
    let cap = 1.0 + opts.epsilon_fraction;
    let shape = |s: &FitSample| cubic_shape((s.lambda / lambda_c).min(cap));
    let weight = |s: &FitSample| 1.0 / s.ci_halfwidth.max(opts.weight_floor).powi(2);
    let (mut sgg, mut sgy) = (0.0, 0.0);
    for s in samples {
        let g = shape(s);
        let w = weight(s);
        sgg += w * g * g;
        sgy += w * g * s.mu;
    }
    if sgg <= 0.0 {
        return None;
    }
    let mu_c = sgy / sgg;
    let (mut chi2, mut rss) = (0.0, 0.0);
    for s in samples {
        let r = s.mu - mu_c * shape(s);
        chi2 += weight(s) * r * r;
        rss += r * r;
    }
    Some(Profile {
        score: chi2 / (samples.len() - 2) as f64,
        mu_c,
        rss,
        n_points: samples.len(),
    })
}

/// Weighted least-squares fit of the cubic law with `λ_c` and `μ_c` free.
pub fn fit_transition(samples: &[FitSample]) -> Result<FitResult> {
    fit_transition_with(samples, FitOptions::default())
}

pub fn fit_transition_with(samples: &[FitSample], opts: FitOptions) -> Result<FitResult> {
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_SAMPLES,
            got: samples.len(),
        });
    }
    check_sorted(samples.iter().map(|s| s.lambda))?;
    if samples.iter().any(|s| !s.mu.is_finite() || !s.ci_halfwidth.is_finite() || s.ci_halfwidth < 0.0) {
        return Err(Error::param("samples", "μ and confidence widths must be finite, widths >= 0"));
    }
    let lo_l = samples[0].lambda;
    let hi_l = samples[samples.len() - 1].lambda;
    if lo_l > 0.0 || hi_l < 2.0 {
        return Err(Error::param(
            "samples",
            format!("λ must span [0, 2], got [{lo_l}, {hi_l}]"),
        ));
    }
    if !(opts.epsilon_fraction > 0.0 && opts.epsilon_fraction <= MAX_EPSILON_FRACTION) {
        return Err(Error::param("epsilon", "window extension must lie in (0, 0.5]·λ_c"));
    }
    let mu0 = samples[0].mu;
    if samples.iter().all(|s| s.mu == mu0) {
        return Err(Error::SingularFit("all μ values are equal".into()));
    }

    let score = |l: f64| profile(samples, l, &opts).map_or(f64::INFINITY, |p| p.score);

    // Coarse scan over the sampled range, then golden-section refinement
    // between the neighbours of the best candidate.
    let first_pos = samples.iter().map(|s| s.lambda).find(|&l| l > 0.0).unwrap_or(hi_l);
    let m = opts.scan_points.max(8);
    let grid: Vec<f64> = (0..m)
        .map(|i| first_pos + (hi_l - first_pos) * i as f64 / (m - 1) as f64)
        .collect();
    let scores: Vec<f64> = grid.iter().map(|&l| score(l)).collect();
    let best = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    if !scores[best].is_finite() {
        return Err(Error::SingularFit("no candidate λ_c yields a solvable window".into()));
    }

    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(m - 1)]);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = score(d);
        }
    }
    let refined = if fc <= fd { c } else { d };
    let lambda_c = if score(refined) <= scores[best] {
        refined
    } else {
        grid[best]
    };

    let p = profile(samples, lambda_c, &opts)
        .ok_or_else(|| Error::SingularFit("refined λ_c left too few points in the window".into()))?;
    if !(p.mu_c.is_finite() && p.mu_c > 0.0) {
        return Err(Error::SingularFit(format!("non-positive plateau μ_c = {}", p.mu_c)));
    }
    Ok(FitResult {
        lambda_c,
        mu_c: p.mu_c,
        rss: p.rss,
        n_points: p.n_points,
        fit_window: [0.0, lambda_c * (1.0 + opts.epsilon_fraction)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper_curve() -> TransitionCurve {
        TransitionCurve::new(0.9716, 1.0).unwrap()
    }

    #[test]
    fn cubic_endpoints() {
        let c = TransitionCurve::new(0.9716, 0.7).unwrap();
        assert_eq!(cubic_transition(0.0, &c).unwrap(), 0.0);
        assert_abs_diff_eq!(cubic_transition(c.lambda_c, &c).unwrap(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn cubic_rejects_out_of_window() {
        let c = paper_curve();
        let err = cubic_transition(1.3, &c).unwrap_err();
        match err {
            Error::OutOfDomain { hi, .. } => assert_abs_diff_eq!(hi, 1.2 * 0.9716, epsilon = 1e-15),
            e => panic!("unexpected {e}"),
        }
        assert!(cubic_transition(-0.1, &c).is_err());
        assert!(cubic_transition_with_window(1.3, &c, 0.5).is_ok());
        assert!(cubic_transition_with_window(0.3, &c, 0.6).is_err());
    }

    #[test]
    fn quadratic_examples() {
        let c = paper_curve();
        assert_eq!(quadratic_small_lambda(0.0, &c).unwrap(), 0.0);
        assert!(quadratic_small_lambda(-1.0, &c).is_err());
        let q = quadratic_small_lambda(c.lambda_c, &c).unwrap();
        let k = cubic_transition(c.lambda_c, &c).unwrap();
        assert_abs_diff_eq!(q / k, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn curve_validation() {
        assert!(TransitionCurve::new(0.0, 0.5).is_err());
        assert!(TransitionCurve::new(1.0, 0.0).is_err());
        assert!(TransitionCurve::new(1.0, 1.01).is_err());
    }

    #[test]
    fn critical_check_needs_five_samples() {
        let s = [(0.0, 0.0), (0.5, 0.2), (1.0, 0.5), (2.0, 1.0)];
        assert!(matches!(
            check_critical_conditions(&s, 1.0),
            Err(Error::InsufficientData { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn critical_check_rejects_unsorted() {
        let s = [(0.0, 0.0), (0.5, 0.2), (0.4, 0.5), (2.0, 1.0), (3.0, 1.0)];
        assert!(check_critical_conditions(&s, 1.0).is_err());
    }

    #[test]
    fn fit_rejects_flat_data() {
        let s: Vec<FitSample> = (0..=10).map(|i| (i as f64 * 0.2, 0.3, 0.01).into()).collect();
        assert!(matches!(fit_transition(&s), Err(Error::SingularFit(_))));
    }

    #[test]
    fn fit_checks_preconditions() {
        let few: Vec<FitSample> = (0..5).map(|i| (i as f64 * 0.5, 0.1 * i as f64, 0.01).into()).collect();
        assert!(matches!(fit_transition(&few), Err(Error::InsufficientData { .. })));
        let narrow: Vec<FitSample> = (0..8).map(|i| (i as f64 * 0.1, 0.1 * i as f64, 0.01).into()).collect();
        assert!(fit_transition(&narrow).is_err());
    }
}
