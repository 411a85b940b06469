//! Quadrature primitives shared by the other modules.
//!
//! * [`gauss_kronrod`]: globally adaptive 7/15-point Gauss–Kronrod on a finite
//!   interval, bisecting the interval with the largest error estimate.
//! * [`periodic_trapezoid`]: trapezoid rule on a periodic interval with grid
//!   doubling, optionally refined in a window around a kernel peak.
//! * [`log_abs_linear`]: exact integral of `log|a + (b - a)s|` over `s ∈ [0, 1]`,
//!   used to integrate log-singular integrands against piecewise-linear data.
//! * [`disc_fraction`]: length of `{s ∈ [0,1] : |a + (b - a)s| ≤ rho}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
/// Returns [`Error::NonConvergence`] if `max_intervals` is reached first.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, intervals: 0 });
    }
    let (v, e) = gk15(&f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut previous = v;
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Integral { value: total, error: err, intervals: pieces.len() });
        }
        if pieces.len() >= max_intervals {
            return Err(Error::NonConvergence { last: total, previous });
        }
        previous = total;
        let worst = pieces.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Node clustering for [`periodic_trapezoid`].
///
/// The circle is reparametrized by the Möbius map
/// `θ(s) = center + 2·atan(ε·tan(s/2))`, which keeps the integrand periodic and
/// smooth while packing nodes into a neighbourhood of width about `ε` around
/// `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakWindow {
    pub center: f64,
    pub epsilon: f64,
}

impl PeakWindow {
    /// Clustering adapted to a kernel peak at radius `r`.
    pub fn for_radius(center: f64, r: f64) -> Self {
        PeakWindow { center, epsilon: ((1.0 - r) / (1.0 + r)).sqrt() }
    }
}

/// Normalized integral `(1/2π) ∫₀^{2π} g(θ) dθ` of a periodic integrand by the
/// trapezoid rule, doubling the grid from 64 nodes until successive estimates
/// agree to `rel_tol` (relative to the larger estimate) or `max_nodes` is hit.
pub fn periodic_trapezoid<G: Fn(f64) -> Complex64>(
    g: G,
    rel_tol: f64,
    max_nodes: usize,
    window: Option<PeakWindow>,
) -> Result<Complex64> {
    let mut n = 64usize;
    let mut prev = trapezoid_on_grid(&g, n, window);
    loop {
        n *= 2;
        let cur = trapezoid_on_grid(&g, n, window);
        let scale = cur.norm().max(prev.norm()).max(1e-300);
        if (cur - prev).norm() <= rel_tol * scale || (cur - prev).norm() == 0.0 {
            return Ok(cur);
        }
        if n >= max_nodes {
            return Err(Error::NonConvergence { last: cur.norm(), previous: prev.norm() });
        }
        prev = cur;
    }
}

fn trapezoid_on_grid<G: Fn(f64) -> Complex64>(g: &G, n: usize, window: Option<PeakWindow>) -> Complex64 {
    let h = 2.0 * PI / n as f64;
    let s: Complex64 = match window {
        None => (0..n).map(|j| g(j as f64 * h)).sum(),
        Some(w) => (0..n)
            .map(|j| {
                let (sn, cs) = (0.5 * j as f64 * h).sin_cos();
                let theta = w.center + 2.0 * (w.epsilon * sn).atan2(cs);
                let jac = w.epsilon / (cs * cs + w.epsilon * w.epsilon * sn * sn);
                g(theta) * jac
            })
            .sum(),
    };
    s / n as f64
}

/// `∫₀¹ log|a + (b − a)s| ds`, exact for the linear interpolant.
///
/// Returns `-∞` only when both endpoints vanish.
pub fn log_abs_linear(a: Complex64, b: Complex64) -> f64 {
    let beta = b - a;
    let na = a.norm();
    let nb = b.norm();
    if beta.norm() <= 1e-15 * na.max(nb) || na == 0.0 && nb == 0.0 {
        return (0.5 * (a + b)).norm().ln();
    }
    // Expand around the larger endpoint when the relative change is small.
    let (base, q) = if na >= nb { (a, beta / a) } else { (b, -beta / b) };
    if q.norm() < 0.1 {
        // ∫₀¹ Re log(1 + q s) ds = Re Σ (-1)^{n+1} qⁿ / (n(n+1))
        let mut term = q;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..40 {
            let kf = k as f64;
            let c = if k % 2 == 1 { 1.0 } else { -1.0 };
            acc += term * (c / (kf * (kf + 1.0)));
            term *= q;
            if term.norm() < 1e-18 {
                break;
            }
        }
        return base.norm().ln() + acc.re;
    }
    let ratio = a / beta;
    let s0 = -ratio.re;
    let d = ratio.im.abs();
    let g = |x: f64| -> f64 {
        if d > 0.0 {
            x * (x * x + d * d).ln() - 2.0 * x + 2.0 * d * (x / d).atan()
        } else if x == 0.0 {
            0.0
        } else {
            x * (x * x).ln() - 2.0 * x
        }
    };
    beta.norm().ln() + 0.5 * (g(1.0 - s0) - g(-s0))
}

/// Length of `{s ∈ [0, 1] : |a + (b − a)s| ≤ rho}`.
pub fn disc_fraction(a: Complex64, b: Complex64, rho: f64) -> f64 {
    let beta = b - a;
    let bb = beta.norm_sqr();
    if bb == 0.0 || !bb.is_finite() {
        return if a.norm() <= rho { 1.0 } else { 0.0 };
    }
    // |a + βs|² = bb s² + 2 Re(a β̄) s + |a|² ≤ ρ²
    let p = (a * beta.conj()).re / bb;
    let q = (a.norm_sqr() - rho * rho) / bb;
    let disc = p * p - q;
    if disc < 0.0 {
        return 0.0;
    }
    let r = disc.sqrt();
    let lo = (-p - r).max(0.0);
    let hi = (-p + r).min(1.0);
    (hi - lo).max(0.0)
}

/// Composite Simpson rule on uniformly spaced samples (odd length ≥ 3).
/// Falls back to the trapezoid rule for an even number of samples.
pub fn simpson_uniform(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n.is_multiple_of(2) {
        let inner: f64 = values[1..n - 1].iter().sum();
        return step * (inner + 0.5 * (values[0] + values[n - 1]));
    }
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * step / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_polynomial_and_smooth() {
        let r = gauss_kronrod(|x| x * x, 0.0, 3.0, 1e-13, 1e-13, 100).unwrap();
        assert!((r.value - 9.0).abs() < 1e-12);
        let r = gauss_kronrod(|x: f64| x.sin(), 0.0, PI, 1e-13, 1e-13, 100).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gk_endpoint_log_singularity() {
        let r = gauss_kronrod(|x: f64| x.ln(), 0.0, 1.0, 1e-11, 1e-11, 2000).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn gk_reports_nonconvergence() {
        let r = gauss_kronrod(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12, 1e-12, 20);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn trapezoid_is_spectral_for_trig() {
        let v = periodic_trapezoid(|t| Complex64::new(t.cos().powi(2), 0.0), 1e-12, 1 << 12, None).unwrap();
        assert!((v.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_window_resolves_peak() {
        // Poisson kernel at radius 1 - 1e-5, which a 2^12 uniform grid cannot resolve.
        let r: f64 = 1.0 - 1e-5;
        let kernel = move |t: f64| {
            let s = (0.5 * t).sin();
            Complex64::new((1.0 - r * r) / ((1.0 - r).powi(2) + 4.0 * r * s * s), 0.0)
        };
        let w = PeakWindow::for_radius(0.0, r);
        let v = periodic_trapezoid(kernel, 1e-10, 1 << 20, Some(w)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-8, "{}", v.re);
    }

    fn log_abs_linear_oracle(a: Complex64, b: Complex64) -> f64 {
        // Midpoint rule on a very fine grid; the integrand is log-singular at
        // most at one point, so convergence is O(h log h).
        let n = 2_000_000;
        let h = 1.0 / n as f64;
        (0..n).map(|k| (a + (b - a) * ((k as f64 + 0.5) * h)).norm().ln()).sum::<f64>() * h
    }

    #[test]
    fn log_abs_linear_matches_oracle() {
        let cases = [
            (Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.3)),
            (Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)),
            (Complex64::new(3.0, 1.0), Complex64::new(3.1, 1.05)),
            (Complex64::new(0.0, 1.0), Complex64::new(0.0, -3.0)),
            (Complex64::new(1e-3, 2.0), Complex64::new(2.0, -1.0)),
        ];
        for (a, b) in cases {
            let got = log_abs_linear(a, b);
            let want = log_abs_linear_oracle(a, b);
            assert!((got - want).abs() < 1e-5, "{a} {b}: {got} vs {want}");
        }
    }

    #[test]
    fn disc_fraction_cases() {
        let a = Complex64::new(-1.0, 0.0);
        let b = Complex64::new(1.0, 0.0);
        assert!((disc_fraction(a, b, 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(disc_fraction(a, b, 2.0), 1.0);
        assert_eq!(disc_fraction(Complex64::new(2.0, 2.0), Complex64::new(3.0, 2.0), 1.0), 0.0);
        let c = Complex64::new(0.3, 0.1);
        assert_eq!(disc_fraction(c, c, 1.0), 1.0);
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x).collect();
        assert!((simpson_uniform(&ys, 0.1) - 0.25).abs() < 1e-14);
    }
}
