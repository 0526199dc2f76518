//! Classical kicked rotator: the Chirikov standard map on the 2π × 2π torus.
//!
//! One kick maps `(θ, p)` to
//!
//! ```text
//! p' = p + λ·sin θ         (mod 2π)
//! θ' = θ + τ·p'            (mod 2π)
//! ```
//!
//! Orbits are classified regular or chaotic by their finite-time largest
//! Lyapunov exponent, and the chaotic fraction of the torus is estimated on a
//! deterministic grid of initial conditions.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Iterations discarded before accumulating the Lyapunov sum.
pub const LYAPUNOV_TRANSIENT: usize = 100;
/// Default chaos cutoff, per kick.
pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const MIN_LYAPUNOV_STEPS: usize = 1000;
pub const MIN_GRID_SIDE: usize = 16;
pub const MIN_CORRELATION_SAMPLES: usize = 10_000;

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

#[inline]
fn wrap(x: f64) -> f64 {
    if (0.0..TAU).contains(&x) {
        return x;
    }
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Minimal-image difference of two angles, in `[-π, π)`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub theta: f64,
    pub p: f64,
}

impl PhasePoint {
    /// Builds a point, reducing both coordinates onto `[0, 2π)`.
    pub fn new(theta: f64, p: f64) -> Self {
        Self {
            theta: wrap(theta),
            p: wrap(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub lambda: f64,
    pub tau: f64,
}

impl MapParams {
    pub fn new(lambda: f64, tau: f64) -> Result<Self> {
        let params = Self { lambda, tau };
        params.validate()?;
        Ok(params)
    }

    /// Kick strength `lambda` with unit kick period.
    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::param("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", format!("must be finite and > 0, got {}", self.tau)));
        }
        Ok(())
    }
}

impl Default for MapParams {
    fn default() -> Self {
        Self { lambda: 0.0, tau: 1.0 }
    }
}

/// One application of the standard map.
///
/// Reducing `p` modulo 2π commutes with the map only for integer `τ`; for
/// other periods the image is still area-preserving but the torus map is not
/// single-valued in `p`, so [`inverse_step_map`] is exact only for integer `τ`.
#[inline]
pub fn step_map(x: PhasePoint, params: MapParams) -> PhasePoint {
    let p = x.p + params.lambda * x.theta.sin();
    let theta = x.theta + params.tau * p;
    PhasePoint::new(theta, p)
}

/// Exact inverse of [`step_map`].
#[inline]
pub fn inverse_step_map(x: PhasePoint, params: MapParams) -> PhasePoint {
    let theta = x.theta - params.tau * x.p;
    let p = x.p - params.lambda * theta.sin();
    PhasePoint::new(theta, p)
}

/// Tangent map at `x`, acting on `(dθ, dp)`.
#[inline]
pub fn jacobian(x: PhasePoint, params: MapParams) -> [[f64; 2]; 2] {
    let kc = params.lambda * x.theta.cos();
    [[1.0 + params.tau * kc, params.tau], [kc, 1.0]]
}

/// Finite-time largest Lyapunov exponent by the tangent-map method.
///
/// The tangent vector starts along `(1, 1)/√2` and is renormalized after
/// every kick. The first [`LYAPUNOV_TRANSIENT`] kicks only align the vector;
/// the following `n_steps` kicks are accumulated.
pub fn lyapunov_exponent(x0: PhasePoint, params: MapParams, n_steps: usize) -> Result<f64> {
    params.validate()?;
    if n_steps < MIN_LYAPUNOV_STEPS {
        return Err(Error::param(
            "n_steps",
            format!("must be >= {MIN_LYAPUNOV_STEPS}, got {n_steps}"),
        ));
    }
    Ok(lyapunov_unchecked(x0, params, n_steps))
}

fn lyapunov_unchecked(x0: PhasePoint, params: MapParams, n_steps: usize) -> f64 {
    let MapParams { lambda, tau } = params;
    let (mut theta, mut p) = (x0.theta, x0.p);
    let mut v = [std::f64::consts::FRAC_1_SQRT_2; 2];
    // Stretch factors are multiplied up and logged only when the product
    // nears the edge of the float range; one ln per kick dominates otherwise.
    let mut sum = 0.0;
    let mut stretch = 1.0f64;
    for i in 0..LYAPUNOV_TRANSIENT + n_steps {
        let (sin, cos) = theta.sin_cos();
        let kc = lambda * cos;
        let w = [(1.0 + tau * kc) * v[0] + tau * v[1], kc * v[0] + v[1]];
        let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
        v = [w[0] / norm, w[1] / norm];
        if i >= LYAPUNOV_TRANSIENT {
            stretch *= norm;
            if !(1e-250..=1e250).contains(&stretch) {
                sum += stretch.ln();
                stretch = 1.0;
            }
        }
        // same order as step_map: θ advances with the unreduced momentum
        let p_next = p + lambda * sin;
        theta = wrap(theta + tau * p_next);
        p = wrap(p_next);
    }
    (sum + stretch.ln()) / n_steps as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitLabel {
    Regular,
    Chaotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    pub label: OrbitLabel,
    pub lyapunov: f64,
    pub n_steps: usize,
    pub threshold: f64,
    pub x0: PhasePoint,
    pub params: MapParams,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::param("threshold", format!("must be finite and > 0, got {threshold}")));
    }
    Ok(())
}

/// Chaotic iff the exponent strictly exceeds `threshold`; ties are regular.
pub fn classify_orbit(
    x0: PhasePoint,
    params: MapParams,
    n_steps: usize,
    threshold: f64,
) -> Result<OrbitClass> {
    check_threshold(threshold)?;
    let lyapunov = lyapunov_exponent(x0, params, n_steps)?;
    let label = if lyapunov > threshold {
        OrbitLabel::Chaotic
    } else {
        OrbitLabel::Regular
    };
    Ok(OrbitClass {
        label,
        lyapunov,
        n_steps,
        threshold,
        x0,
        params,
    })
}

/// Sampled estimate of the normalized chaotic measure at one kick strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionEstimate {
    pub lambda: f64,
    pub mu_a: f64,
    pub mu_e: f64,
    pub n_samples: usize,
    pub threshold: f64,
    pub ci_halfwidth: f64,
}

/// Cell-centred grid point `(i, j)` of a `side × side` grid over the torus.
pub fn grid_point(i: usize, j: usize, side: usize) -> PhasePoint {
    let h = TAU / side as f64;
    PhasePoint::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
}

/// Fraction of a uniform `grid_side²` grid of initial conditions classified
/// chaotic, under the uniform measure on the torus.
pub fn estimate_chaotic_measure(
    params: MapParams,
    grid_side: usize,
    n_steps: usize,
    threshold: f64,
) -> Result<RegionEstimate> {
    params.validate()?;
    check_threshold(threshold)?;
    if grid_side < MIN_GRID_SIDE {
        return Err(Error::param(
            "grid_side",
            format!("must be >= {MIN_GRID_SIDE}, got {grid_side}"),
        ));
    }
    if n_steps < MIN_LYAPUNOV_STEPS {
        return Err(Error::param(
            "n_steps",
            format!("must be >= {MIN_LYAPUNOV_STEPS}, got {n_steps}"),
        ));
    }
    let n = grid_side * grid_side;
    let chaotic = (0..n)
        .into_par_iter()
        .filter(|&idx| {
            let x0 = grid_point(idx % grid_side, idx / grid_side, grid_side);
            lyapunov_unchecked(x0, params, n_steps) > threshold
        })
        .count();
    let mu_a = chaotic as f64 / n as f64;
    let mu_e = 1.0 - mu_a;
    Ok(RegionEstimate {
        lambda: params.lambda,
        mu_a,
        mu_e,
        n_samples: n,
        threshold,
        ci_halfwidth: Z95 * (mu_a * (1.0 - mu_a) / n as f64).sqrt(),
    })
}

/// Axis-aligned rectangle in `(θ, p)`, closed on the left, open on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub theta_min: f64,
    pub theta_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl Cell {
    pub fn new(theta_min: f64, theta_max: f64, p_min: f64, p_max: f64) -> Self {
        Self {
            theta_min,
            theta_max,
            p_min,
            p_max,
        }
    }

    /// The whole torus.
    pub fn torus() -> Self {
        Self::new(0.0, TAU, 0.0, TAU)
    }

    pub fn contains(&self, x: PhasePoint) -> bool {
        x.theta >= self.theta_min
            && x.theta < self.theta_max
            && x.p >= self.p_min
            && x.p < self.p_max
    }

    pub fn area(&self) -> f64 {
        (self.theta_max - self.theta_min).max(0.0) * (self.p_max - self.p_min).max(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.theta_min, self.theta_max, self.p_min, self.p_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("cells", "cell bounds must be finite"));
        }
        if self.theta_max < self.theta_min || self.p_max < self.p_min {
            return Err(Error::param("cells", format!("inverted cell bounds {self:?}")));
        }
        Ok(())
    }
}

/// Membership in a union of cells.
pub fn in_cells(cells: &[Cell], x: PhasePoint) -> bool {
    cells.iter().any(|c| c.contains(x))
}

/// Parses a JSON array of `{theta_min, theta_max, p_min, p_max}` objects.
pub fn parse_cells(json: &str) -> Result<Vec<Cell>> {
    let cells: Vec<Cell> =
        serde_json::from_str(json).map_err(|e| Error::param("cells", e.to_string()))?;
    for c in &cells {
        c.validate()?;
    }
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetCorrelation {
    /// Estimate of `μ(TᵗA ∩ B) − μ(A)μ(B)`.
    pub value: f64,
    /// Monte-Carlo standard error of `value`.
    pub std_error: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub mu_ab: f64,
    /// Set when `A` or `B` has no extent; `value` is then `−μ(A)μ(B)`.
    pub empty_warning: bool,
}

/// Monte-Carlo estimate of the set correlation `C(TᵗA, B)`.
///
/// Sample `i` is drawn from the stream `(seed, i)`. The intersection is
/// counted through the forward orbit: `x ∈ A` and `Tᵗx ∈ B`, which has the
/// same measure as `TᵗA ∩ B` because the map preserves area.
pub fn set_correlation(
    a: &[Cell],
    b: &[Cell],
    params: MapParams,
    t: usize,
    n_samples: usize,
    seed: u64,
) -> Result<SetCorrelation> {
    use rand::Rng;

    params.validate()?;
    for c in a.iter().chain(b) {
        c.validate()?;
    }
    if n_samples < MIN_CORRELATION_SAMPLES {
        return Err(Error::param(
            "n_samples",
            format!("must be >= {MIN_CORRELATION_SAMPLES}, got {n_samples}"),
        ));
    }

    // Outcome counts keyed by (x ∈ A, x ∈ B, Tᵗx ∈ B).
    let counts = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let x = PhasePoint::new(r.random::<f64>() * TAU, r.random::<f64>() * TAU);
            let mut y = x;
            for _ in 0..t {
                y = step_map(y, params);
            }
            let key = in_cells(a, x) as usize * 4 + in_cells(b, x) as usize * 2 + in_cells(b, y) as usize;
            let mut hist = [0usize; 8];
            hist[key] = 1;
            hist
        })
        .reduce(
            || [0usize; 8],
            |mut l, r| {
                l.iter_mut().zip(r).for_each(|(x, y)| *x += y);
                l
            },
        );

    let n = n_samples as f64;
    let outcome = |key: usize| ((key >> 2) & 1, (key >> 1) & 1, key & 1);
    let total = |pred: &dyn Fn(usize, usize, usize) -> bool| -> usize {
        (0..8)
            .filter(|&k| {
                let (ia, ib, ic) = outcome(k);
                pred(ia, ib, ic)
            })
            .map(|k| counts[k])
            .sum()
    };
    let mu_a = total(&|ia, _, _| ia == 1) as f64 / n;
    let mu_b = total(&|_, ib, _| ib == 1) as f64 / n;
    let mu_ab = total(&|ia, _, ic| ia == 1 && ic == 1) as f64 / n;

    let empty = |cells: &[Cell]| cells.iter().all(|c| c.area() == 0.0);
    if empty(a) || empty(b) {
        return Ok(SetCorrelation {
            value: -(mu_a * mu_b),
            std_error: 0.0,
            mu_a,
            mu_b,
            mu_ab,
            empty_warning: true,
        });
    }

    // Delta-method variance through the influence function
    // ψ = 1[A]·1[TᵗB] − μ_B·1[A] − μ_A·1[B].
    let (mut s1, mut s2) = (0.0, 0.0);
    for (k, &cnt) in counts.iter().enumerate() {
        let (ia, ib, ic) = outcome(k);
        let psi = (ia & ic) as f64 - mu_b * ia as f64 - mu_a * ib as f64;
        s1 += psi * cnt as f64;
        s2 += psi * psi * cnt as f64;
    }
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);

    Ok(SetCorrelation {
        value: mu_ab - mu_a * mu_b,
        std_error: (var / n).sqrt(),
        mu_a,
        mu_b,
        mu_ab,
        empty_warning: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_angle_kick_is_free_rotation() {
        for lambda in [0.0, 0.7, 10.0] {
            let y = step_map(PhasePoint::new(0.0, 1.0), MapParams::with_lambda(lambda).unwrap());
            assert_abs_diff_eq!(y.theta, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(y.p, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn quarter_turn_kick() {
        let y = step_map(PhasePoint::new(PI / 2.0, 0.0), MapParams::with_lambda(1.0).unwrap());
        assert_abs_diff_eq!(y.p, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y.theta, PI / 2.0 + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coordinates_stay_on_torus() {
        let params = MapParams::with_lambda(25.0).unwrap();
        let mut x = PhasePoint::new(-3.0, 100.0);
        for _ in 0..1000 {
            x = step_map(x, params);
            assert!((0.0..TAU).contains(&x.theta) && (0.0..TAU).contains(&x.p));
        }
    }

    #[test]
    fn bad_params_rejected() {
        assert!(MapParams::new(-1.0, 1.0).is_err());
        assert!(MapParams::new(1.0, 0.0).is_err());
        assert!(MapParams::new(f64::NAN, 1.0).is_err());
        let p = MapParams::with_lambda(1.0).unwrap();
        assert!(lyapunov_exponent(PhasePoint::new(0.0, 0.0), p, 999).is_err());
        assert!(classify_orbit(PhasePoint::new(0.0, 0.0), p, 1000, 0.0).is_err());
        assert!(estimate_chaotic_measure(p, 15, 1000, 0.05).is_err());
        assert!(set_correlation(&[Cell::torus()], &[Cell::torus()], p, 1, 9_999, 0).is_err());
    }

    #[test]
    fn integrable_exponent_vanishes() {
        let p = MapParams::with_lambda(0.0).unwrap();
        for x0 in [PhasePoint::new(0.3, 0.1), PhasePoint::new(5.0, 2.5)] {
            let l = lyapunov_exponent(x0, p, 1000).unwrap();
            assert!(l.abs() < 0.01, "{l}");
        }
    }

    #[test]
    fn tie_at_threshold_is_regular() {
        let p = MapParams::with_lambda(0.0).unwrap();
        let x0 = PhasePoint::new(1.0, 2.0);
        let l = lyapunov_exponent(x0, p, 1000).unwrap();
        let c = classify_orbit(x0, p, 1000, l).unwrap();
        assert_eq!(c.label, OrbitLabel::Regular);
    }

    #[test]
    fn huge_threshold_is_always_regular() {
        let p = MapParams::with_lambda(10.0).unwrap();
        let c = classify_orbit(PhasePoint::new(1.0, 1.0), p, 2000, 1e6).unwrap();
        assert_eq!(c.label, OrbitLabel::Regular);
    }

    #[test]
    fn whole_torus_correlation_is_exactly_zero() {
        let p = MapParams::with_lambda(3.0).unwrap();
        let c = set_correlation(&[Cell::torus()], &[Cell::torus()], p, 7, 10_000, 1).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(!c.empty_warning);
    }

    #[test]
    fn empty_set_correlation_flags() {
        let p = MapParams::with_lambda(3.0).unwrap();
        let c = set_correlation(&[], &[Cell::torus()], p, 3, 10_000, 1).unwrap();
        assert!(c.empty_warning);
        assert_eq!(c.value, -(c.mu_a * c.mu_b));
        let degenerate = Cell::new(1.0, 1.0, 0.0, TAU);
        let c = set_correlation(&[Cell::torus()], &[degenerate], p, 3, 10_000, 1).unwrap();
        assert!(c.empty_warning);
    }

    #[test]
    fn cells_parse_from_json() {
        let cells =
            parse_cells(r#"[{"theta_min":0,"theta_max":3.14,"p_min":0,"p_max":1.5}]"#).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].contains(PhasePoint::new(0.0, 0.0)));
        assert!(!cells[0].contains(PhasePoint::new(1.0, 1.5)));
        assert!(parse_cells(r#"[{"theta_min":1,"theta_max":0,"p_min":0,"p_max":1}]"#).is_err());
        assert!(parse_cells("{").is_err());
    }

    #[test]
    fn angle_difference_is_minimal_image() {
        assert_abs_diff_eq!(angle_diff(0.1, TAU - 0.1), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_diff(TAU - 0.1, 0.1), -0.2, epsilon = 1e-12);
    }
}
