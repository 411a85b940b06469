use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Image of `z0` in the unit disc after mapping the complement of the slit
/// `[i a, i b]` onto the exterior of the circle and reflecting.
fn disc_image(z0: Complex64, a: f64, b: f64) -> Result<Complex64> {
    if !(a < b) {
        return Err(Error::InvalidDomain(format!("slit ({a}, {b}) is empty")));
    }
    if z0.re == 0.0 && z0.im >= a && z0.im <= b {
        return Err(Error::InvalidArgument(format!("start point {z0} lies on the slit")));
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let zeta = (z0 - Complex64::new(0.0, mid)) / Complex64::new(0.0, half);
    let w = zeta + (zeta - 1.0).sqrt() * (zeta + 1.0).sqrt();
    Ok(1.0 / w.conj())
}

/// Boundary angles of the two arcs covering the heights `[c, d]`.
fn arcs(a: f64, b: f64, c: f64, d: f64) -> [(f64, f64); 2] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let lo = ((d - mid) / half).clamp(-1.0, 1.0).acos();
    let hi = ((c - mid) / half).clamp(-1.0, 1.0).acos();
    [(lo, hi), (-hi, -lo)]
}

/// `(1/2π) ∫_α^β (1 − |q|²)/|e^{iφ} − q|² dφ` in closed form.
fn poisson_arc(q: Complex64, alpha: f64, beta: f64) -> f64 {
    let ea = Complex64::from_polar(1.0, alpha);
    let eb = Complex64::from_polar(1.0, beta);
    let angle = ((eb - q) / (ea - q)).arg().rem_euclid(2.0 * PI);
    angle / PI - (beta - alpha) / (2.0 * PI)
}

fn check_sub(a: f64, b: f64, c: f64, d: f64) -> Result<()> {
    if c < a || d > b {
        return Err(Error::InvalidArgument(format!("[{c}, {d}] is not inside the slit [{a}, {b}]")));
    }
    Ok(())
}

/// Harmonic measure at `z0` of the sub-segment `[i c, i d]` of the single
/// slit `[i a, i b]`, seen from both sides.
pub fn single_slit_oracle(z0: Complex64, slit: (f64, f64), sub: (f64, f64)) -> Result<f64> {
    let (a, b) = slit;
    let (c, d) = sub;
    let q = disc_image(z0, a, b)?;
    if c >= d {
        return Ok(0.0);
    }
    check_sub(a, b, c, d)?;
    Ok(arcs(a, b, c, d).iter().map(|&(lo, hi)| poisson_arc(q, lo, hi)).sum::<f64>().clamp(0.0, 1.0))
}

/// The same harmonic measure with the Poisson kernel integrated numerically.
pub fn single_slit_quadrature(z0: Complex64, slit: (f64, f64), sub: (f64, f64)) -> Result<f64> {
    let (a, b) = slit;
    let (c, d) = sub;
    let q = disc_image(z0, a, b)?;
    if c >= d {
        return Ok(0.0);
    }
    check_sub(a, b, c, d)?;
    let r2 = q.norm_sqr();
    let kernel = |phi: f64| (1.0 - r2) / (Complex64::from_polar(1.0, phi) - q).norm_sqr() / (2.0 * PI);
    let mut total = 0.0;
    for (lo, hi) in arcs(a, b, c, d) {
        total += crate::quad::gauss_kronrod(kernel, lo, hi, 1e-14, 1e-12, 2000)?.value;
    }
    Ok(total)
}
