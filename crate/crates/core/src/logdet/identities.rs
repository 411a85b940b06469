use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{axis_integral, AxisOptions, LogDet};
use crate::boundary::{hp_power_mean, BoundarySamples};
use crate::error::{Error, Result};
use crate::quad::gauss_kronrod;

/// Two sides of an identity and whether they agree to a relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl IdentityCheck {
    /// Relative error against `rhs`, or absolute error when `rhs = 0`.
    pub fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = if rhs == 0.0 { abs_err } else { abs_err / rhs.abs() };
        IdentityCheck { lhs, rhs, abs_err, rel_err, pass: rel_err <= tol }
    }
}

/// `∫_{−π/2}^{π/2} cos²θ dθ / |re^{iθ} − it|²` against `(π/2) min(1/t², 1/r²)`.
pub fn angular_kernel_identity(r: f64, t: f64, tol: f64) -> Result<IdentityCheck> {
    if r < 0.0 || t < 0.0 || (r == 0.0 && t == 0.0) {
        return Err(Error::InvalidArgument(format!("need r, t ≥ 0 not both zero, got r = {r}, t = {t}")));
    }
    // |re^{iθ} − it|² = (r − t)² + 4rt sin²(π/4 − θ/2)
    let integrand = |th: f64| {
        let c = th.cos();
        let s = (0.25 * PI - 0.5 * th).sin();
        c * c / ((r - t).powi(2) + 4.0 * r * t * s * s)
    };
    let lhs = gauss_kronrod(integrand, -0.5 * PI, 0.5 * PI, 0.0, 1e-13, 4000)?.value;
    let rhs = 0.5 * PI * (1.0 / (t * t)).min(1.0 / (r * r));
    Ok(IdentityCheck::new(lhs, rhs, tol))
}

/// `½ log(1 + 2βx + x²)` given `x` and an accurate `x − 1`, without
/// cancellation near the root at `x = 1, β = −1` and without overflow for
/// large `x`.
fn half_log_quadratic(beta: f64, x: f64, x_minus_1: f64) -> f64 {
    if x > 2.0 {
        let y = 1.0 / x;
        x.ln() + 0.5 * (2.0 * beta * y + y * y).ln_1p()
    } else if x < 0.5 {
        0.5 * (x * (2.0 * beta + x)).ln_1p()
    } else {
        let lin = (1.0 + beta) * x - x_minus_1;
        0.5 * (lin * lin + (1.0 - beta * beta) * x * x).ln()
    }
}

/// `∫₀^∞ ½ log(1 + 2βx + x²) x^{−1−p} dx`, split at `x = 1` and mapped so
/// that both pieces have integrable endpoint behaviour only.
fn half_line(beta: f64, p: f64, tol: f64) -> Result<f64> {
    // x = u^{1/(1−p)} on [0, 1]: x^{−1−p} dx = du / ((1 − p) x).
    let inner = gauss_kronrod(
        |u: f64| {
            if u == 0.0 {
                return beta / (1.0 - p);
            }
            let lx = u.ln() / (1.0 - p);
            let x = lx.exp();
            if x < 1e-8 {
                return (beta + 0.5 * (1.0 - 2.0 * beta * beta) * x) / (1.0 - p);
            }
            half_log_quadratic(beta, x, lx.exp_m1()) / ((1.0 - p) * x)
        },
        0.0,
        1.0,
        1e-12,
        tol,
        20_000,
    )?;
    // x = u^{−1/p} on [1, ∞): x^{−1−p} dx = du / p.
    let outer = gauss_kronrod(
        |u: f64| {
            let lx = -u.ln() / p;
            if lx > 1.0 {
                let y = (-lx).exp();
                (lx + 0.5 * (2.0 * beta * y + y * y).ln_1p()) / p
            } else {
                half_log_quadratic(beta, lx.exp(), lx.exp_m1()) / p
            }
        },
        0.0,
        1.0,
        1e-12,
        tol,
        20_000,
    )?;
    Ok(inner.value + outer.value)
}

/// `∫_ℝ log|1 − itλ| dt / |t|^{1+p}` by quadrature.
pub fn p_power_lhs(lambda: Complex64, p: f64) -> Result<f64> {
    check_p(p)?;
    let m = lambda.norm();
    if m == 0.0 {
        return Ok(0.0);
    }
    // |1 − itλ|² = 1 + 2βx + x² with x = |λ|t and β = Im λ / |λ|.
    let beta = (lambda.im / m).clamp(-1.0, 1.0);
    let tol = if p > 0.95 { 1e-11 } else { 1e-10 };
    Ok(m.powf(p) * (half_line(beta, p, tol)? + half_line(-beta, p, tol)?))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(π/p) cot(πp/2)`.
fn cot_factor(p: f64) -> f64 {
    PI / p / (0.5 * PI * p).tan()
}

/// Quadrature of `∫_ℝ log|1 − itλ| dt/|t|^{1+p}` against `|λ|^p (π/p) cot(πp/2)`.
///
/// The closed form holds for purely imaginary `λ`; for other `λ` see
/// [`p_power_closed_form`].
pub fn p_power_identity(lambda: Complex64, p: f64, tol: f64) -> Result<IdentityCheck> {
    let lhs = p_power_lhs(lambda, p)?;
    Ok(IdentityCheck::new(lhs, lambda.norm().powf(p) * cot_factor(p), tol))
}

/// Closed form of the integral for every `λ`:
/// `|λ|^p (π/p) cos(pψ) / sin(πp/2)` with `sin ψ = |Im λ|/|λ|`.
pub fn p_power_closed_form(lambda: Complex64, p: f64) -> Result<f64> {
    check_p(p)?;
    let m = lambda.norm();
    if m == 0.0 {
        return Ok(0.0);
    }
    let psi = (lambda.im.abs() / m).min(1.0).asin();
    Ok(m.powf(p) * PI / p * (p * psi).cos() / (0.5 * PI * p).sin())
}

/// `∫_ℝ u_f(it) dt/|t|^{1+p}` against `(π/p) cot(πp/2) ∫ |f|^p dm`, valid when
/// the boundary values are purely imaginary.
pub fn companion_identity(s: &BoundarySamples, p: f64, opts: AxisOptions, tol: f64) -> Result<IdentityCheck> {
    check_p(p)?;
    let ld = LogDet::new(s)?;
    let lhs = axis_integral(&ld, 1.0 + p, opts)?.value;
    let rhs = cot_factor(p) * hp_power_mean(s, p)?.value;
    Ok(IdentityCheck::new(lhs, rhs, tol))
}
