//! Reference computations for the test suites.
//!
//! Every routine here is written independently of `ehlab-core`: different
//! algorithms, no shared helpers, plain nested `Vec`s instead of matrix
//! types. Agreement between the two is the point of the tests.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Bessel functions `J_0(x), …, J_nmax(x)` for `x ≥ 0` by Miller's backward
/// recurrence, normalized with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_table(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = {
        let base = nmax.max(x.ceil() as usize) + 40 + (12.0 * x.sqrt()) as usize;
        base + base % 2
    };
    let mut j_next = 0.0f64; // J_{k+1}
    let mut j_cur = 1e-300f64; // J_k, arbitrary seed
    let mut norm = 0.0f64;
    let mut scale_log = 0.0f64;
    // Values stored as (mantissa, accumulated log-rescale) to survive the
    // huge dynamic range of the recurrence.
    let mut stored = vec![(0.0f64, 0.0f64); nmax + 1];
    for k in (1..=start).rev() {
        if k <= nmax {
            stored[k] = (j_cur, scale_log);
        }
        if k % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            scale_log += 250.0;
        }
    }
    // j_cur is now J_0 (unnormalized) at scale `scale_log`.
    norm += j_cur;
    stored[0] = (j_cur, scale_log);
    for (k, &(m, s)) in stored.iter().enumerate() {
        // true_k = m · 10^{s_final − s} / norm
        let shift = scale_log - s;
        out[k] = if shift > 600.0 { 0.0 } else { m * 10f64.powf(-shift) / norm };
    }
    out
}

/// `J_n(x)` for any integer order and real argument.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let value = bessel_j_table(order, x.abs())[order];
    // J_{−n} = (−1)^n J_n and J_n(−x) = (−1)^n J_n(x)
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    sign * value
}

fn minus_i_pow(d: i64) -> Complex64 {
    match d.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `⟨m|e^{−ix cos θ}|n⟩ = (−i)^{m−n} J_{m−n}(x)` on the infinite ladder.
pub fn kick_element(delta: i64, x: f64) -> Complex64 {
    minus_i_pow(delta) * bessel_j(delta, x)
}

/// Kick element on an `N`-point angle grid: the infinite-ladder element
/// folded over all aliases `Δ + lN`.
pub fn aliased_kick_element(delta: i64, dim: usize, x: f64) -> Complex64 {
    let n = dim as i64;
    let reach = (x.abs() + 60.0) as i64 / n + 2;
    (-reach..=reach).map(|l| kick_element(delta + l * n, x)).sum()
}

/// `Σ_j |a_ij|²`-style brute-force Frobenius distance.
pub fn hs_distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    let mut s = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            s += (x - y).norm_sqr();
        }
    }
    s.sqrt()
}

/// `Tr(A B)` by a double loop.
pub fn trace_product(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[i][j] * b[j][i];
        }
    }
    s
}

/// Largest Lyapunov exponent of the standard map from the divergence of two
/// nearby orbits, renormalized to separation `d0` after every kick.
pub fn two_orbit_lyapunov(theta: f64, p: f64, lambda: f64, tau: f64, n_steps: usize) -> f64 {
    let d0 = 1e-8;
    let step = |(th, pp): (f64, f64)| {
        let p1 = pp + lambda * th.sin();
        (th + tau * p1, p1)
    };
    // periodic difference in (−π, π]
    let wrap = |d: f64| d - 2.0 * PI * (d / (2.0 * PI)).round();
    let mut a = (theta, p);
    let mut b = (theta + d0 / 2f64.sqrt(), p + d0 / 2f64.sqrt());
    let mut sum = 0.0;
    for _ in 0..n_steps {
        a = step(a);
        b = step(b);
        let dt = wrap(b.0 - a.0);
        let dp = wrap(b.1 - a.1);
        let d = (dt * dt + dp * dp).sqrt();
        sum += (d / d0).ln();
        b = (a.0 + dt * d0 / d, a.1 + dp * d0 / d);
        // keep both orbits near the fundamental domain
        let shift_t = 2.0 * PI * (a.0 / (2.0 * PI)).floor();
        let shift_p = 2.0 * PI * (a.1 / (2.0 * PI)).floor();
        a = (a.0 - shift_t, a.1 - shift_p);
        b = (b.0 - shift_t, b.1 - shift_p);
    }
    sum / n_steps as f64
}

/// Coefficients `[c0, c1, c2, c3]` of the cubic with `f(0) = 0`, `f'(0) = 0`,
/// `f(λc) = μc`, `f''(λc) = 0`, solved by Gaussian elimination on the
/// Hermite interpolation system.
pub fn hermite_cubic(lambda_c: f64, mu_c: f64) -> [f64; 4] {
    let l = lambda_c;
    let mut a = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, l, l * l, l * l * l, mu_c],
        [0.0, 0.0, 2.0, 6.0 * l, 0.0],
    ];
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for row in 0..4 {
            if row != col {
                let pivot = a[col];
                let f = a[row][col] / pivot[col];
                for (x, p) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    [a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]]
}

pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().map(|(k, ck)| ck * x.powi(k as i32)).sum()
}

/// `2 / |1 − e^{−iΔ}|`, the bound on `|Σ_{j<n} e^{−ijΔ}|` for every `n`.
pub fn geometric_sum_bound(delta: f64) -> f64 {
    2.0 / (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -delta)).norm()
}

/// Brute-force geometric sum `|Σ_{j<n} e^{−ijΔ}|`.
pub fn geometric_sum(delta: f64, n: usize) -> f64 {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, -(j as f64) * delta))
        .sum::<Complex64>()
        .norm()
}

/// Chaotic share of a `side × side` cell-centred grid, classified by
/// [`two_orbit_lyapunov`].
pub fn grid_chaotic_fraction(lambda: f64, side: usize, n_steps: usize, threshold: f64) -> f64 {
    let h = 2.0 * PI / side as f64;
    let mut chaotic = 0usize;
    for i in 0..side {
        for j in 0..side {
            let (th, p) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if two_orbit_lyapunov(th, p, lambda, 1.0, n_steps) > threshold {
                chaotic += 1;
            }
        }
    }
    chaotic as f64 / (side * side) as f64
}
