use std::f64::consts::PI;

use serde::Serialize;

use super::{BoundarySamples, SampleFlag, MAX_BAD_FRACTION};
use crate::error::{Error, Result};

/// A boundary integral with the share of the circle that was modelled rather
/// than sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryIntegral {
    pub value: f64,
    /// Normalized length of the blow-up cells, handled by a local pole model.
    pub excluded_mass: f64,
}

/// `ζ(s)` for real `s ≠ 1` by Euler–Maclaurin summation.
pub(crate) fn zeta(s: f64) -> f64 {
    const K: usize = 12;
    // B₂/2!, B₄/4!, B₆/6!, B₈/8!
    const B: [f64; 4] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0];
    let k = K as f64;
    let mut acc: f64 = (1..K).map(|j| (j as f64).powf(-s)).sum();
    acc += k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s);
    let mut rising = s;
    for (j, b) in B.iter().enumerate() {
        let e = 2 * j as i32 + 1;
        acc += b * rising * k.powf(-s - e as f64);
        rising *= (s + e as f64) * (s + e as f64 + 1.0);
    }
    acc
}

/// Midpoint rule over sampled angles. A run of `k` consecutive blow-up
/// angles owns an interval of half-width `a = k·h/2` around its centre and
/// contributes `(1/π)·pole(c, a)`, where `c/|θ − θ₀|` is the pole fitted to
/// the two samples flanking the run. For a single blow-up angle the midpoint
/// samples next to the pole are corrected by `(1/π)·near(c, h)`.
fn boundary_mean<G, P, C>(s: &BoundarySamples, g: G, pole: P, near: C) -> Result<BoundaryIntegral>
where
    G: Fn(f64) -> f64,
    P: Fn(f64, f64) -> f64,
    C: Fn(f64, f64) -> f64,
{
    let blow = s.fraction(SampleFlag::BlowUp);
    if blow > MAX_BAD_FRACTION {
        return Err(Error::Resolution(format!("{:.2}% of angles blow up", 100.0 * blow)));
    }
    let n = s.n();
    let h = 2.0 * PI / n as f64;
    let vals = s.boundary();
    let mut sum = 0.0;
    let mut poles = 0.0;
    // Start scanning just after a sampled angle so that runs never wrap.
    let Some(start) = (0..n).find(|&j| !s.is_blowup(j)) else {
        return Err(Error::Resolution("every angle blows up".into()));
    };
    let mut i = 0;
    while i < n {
        let j = (start + i) % n;
        if !s.is_blowup(j) {
            sum += g(vals[j].norm());
            i += 1;
            continue;
        }
        let mut k = 0;
        while s.is_blowup((j + k) % n) {
            k += 1;
        }
        let before = vals[(j + n - 1) % n].norm();
        let after = vals[(j + k) % n].norm();
        let c = 0.5 * (before + after) * (k + 1) as f64 * 0.5 * h;
        poles += pole(c, k as f64 * 0.5 * h) / PI;
        if k == 1 {
            poles += near(c, h) / PI;
        }
        i += k;
    }
    Ok(BoundaryIntegral { value: sum / n as f64 + poles, excluded_mass: blow })
}

/// `N(f) = ∫ log⁺|f| dm`.
pub fn smirnov_norm(s: &BoundarySamples) -> Result<BoundaryIntegral> {
    boundary_mean(
        s,
        |x| x.ln().max(0.0),
        |c, a| {
            let m = c.min(a);
            if m > 0.0 {
                m * (c.ln() - m.ln() + 1.0)
            } else {
                0.0
            }
        },
        // Σ_{k≥1} log(1/k) − ∫_{1/2}^∞ log(1/x) dx = ½ − ½ log π per side.
        |c, h| if c > h { (0.5 * PI.ln() - 0.5) * h } else { 0.0 },
    )
}

/// `∫ |f|^p dm`.
pub fn hp_power_mean(s: &BoundarySamples, p: f64) -> Result<BoundaryIntegral> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p} must lie in (0, 1)")));
    }
    // Σ_{k≥1} k^{−p} − ∫_{1/2}^∞ x^{−p} dx = ζ(p) + 2^{p−1}/(1 − p) per side.
    let excess = zeta(p) + 2f64.powf(p - 1.0) / (1.0 - p);
    boundary_mean(
        s,
        |x| x.powf(p),
        |c, a| c.powf(p) * a.powf(1.0 - p) / (1.0 - p),
        |c, h| -excess * c.powf(p) * h.powf(1.0 - p),
    )
}

/// `‖f‖_{Hᵖ} = (∫ |f|^p dm)^{1/p}`.
pub fn hp_quasinorm(s: &BoundarySamples, p: f64) -> Result<BoundaryIntegral> {
    let m = hp_power_mean(s, p)?;
    Ok(BoundaryIntegral { value: m.value.powf(1.0 / p), ..m })
}
