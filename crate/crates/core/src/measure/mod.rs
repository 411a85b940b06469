//! Measures on the unit circle and the integrals they generate.
//!
//! A [`CircleMeasure`] is the sum of an absolutely continuous part (a
//! [`Density`] with respect to normalized arclength `m`, `m(T) = 1`), finitely
//! many atoms, and optionally a finite-generation approximation of the
//! middle-thirds Cantor measure carried by an arc. Integrals against the
//! Schwarz kernel `(ζ + z)/(ζ − z)`, its real part (the Poisson kernel) and the
//! Cauchy kernel `1/(ζ − z)` are evaluated
//!
//! * exactly for atoms,
//! * exactly for trigonometric-polynomial densities (via their power series),
//! * by periodic trapezoid quadrature with grid doubling for arbitrary
//!   density functions, refining a window around `arg z` when `|z| > 0.99`.

mod file;
mod trig;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{periodic_trapezoid, PeakWindow};

pub use file::{parse_measure, render_measure};
pub use trig::{parse_expression, Density, TrigPoly, MAX_DEGREE};

/// Points with modulus at or above this are rejected as boundary evaluations.
pub const DISC_LIMIT: f64 = 1.0 - 1e-12;
/// Two atoms closer than this (in radians) are the same atom.
pub const ATOM_COLLISION: f64 = 1e-14;
/// Relative tolerance of the density quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Node cap of the density quadrature.
pub const QUAD_MAX_NODES: usize = 1 << 20;

/// Reduce an angle to `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// A point of the open unit disc, stored in polar form so that kernels can be
/// evaluated without cancellation close to the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscPoint {
    r: f64,
    theta: f64,
}

impl DiscPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        Self::polar(z.norm(), z.arg())
    }

    pub fn polar(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..DISC_LIMIT).contains(&r) || !theta.is_finite() {
            let z = Complex64::from_polar(r, theta);
            return Err(Error::OutsideDisc { re: z.re, im: z.im });
        }
        Ok(DiscPoint { r, theta: normalize_angle(theta) })
    }

    pub fn origin() -> Self {
        DiscPoint { r: 0.0, theta: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Radians in `(-π, π]`.
    pub angle: f64,
    pub mass: Complex64,
}

/// Generation-`depth` approximation of the middle-thirds Cantor measure
/// carried by the arc `[arc.0, arc.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorPart {
    pub depth: u32,
    pub mass: f64,
    pub arc: (f64, f64),
}

/// Maximum Cantor generation (2^30 atoms).
pub const MAX_CANTOR_DEPTH: u32 = 30;

/// Equal-mass atoms at the midpoints of the `2^depth` Cantor pieces.
pub fn cantor_part_as_atoms(singular: &CantorPart) -> Result<Vec<Atom>> {
    if singular.depth == 0 {
        return Err(Error::InvalidMeasure("Cantor depth must be at least 1".into()));
    }
    if singular.depth > MAX_CANTOR_DEPTH {
        return Err(Error::InvalidMeasure(format!("Cantor depth {} exceeds {MAX_CANTOR_DEPTH}", singular.depth)));
    }
    let (a, b) = singular.arc;
    if !(b > a) || b - a > 2.0 * PI {
        return Err(Error::InvalidMeasure("Cantor arc must satisfy a < b ≤ a + 2π".into()));
    }
    let mut pieces = vec![(a, b)];
    for _ in 0..singular.depth {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for (lo, hi) in pieces {
            let third = (hi - lo) / 3.0;
            next.push((lo, lo + third));
            next.push((hi - third, hi));
        }
        pieces = next;
    }
    let mass = singular.mass / (1u64 << singular.depth) as f64;
    Ok(pieces
        .into_iter()
        .map(|(lo, hi)| Atom { angle: normalize_angle(0.5 * (lo + hi)), mass: Complex64::new(mass, 0.0) })
        .collect())
}

/// Which integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `(ζ + z)/(ζ − z)`
    Schwarz,
    /// `Re (ζ + z)/(ζ − z)`
    Poisson,
    /// `1/(ζ − z)`
    Cauchy,
    /// `ζ/(ζ − z)`
    CauchyZeta,
}

/// Kernel value for `ζ = e^{iα}` and `z = r e^{iθ}`, written in terms of
/// `δ = θ − α` so that `1 − r e^{iδ}` keeps full relative accuracy.
pub(crate) fn kernel_value(kernel: Kernel, alpha: f64, r: f64, theta: f64) -> Option<Complex64> {
    let delta = normalize_angle(theta - alpha);
    let (s, c) = delta.sin_cos();
    let half = (0.5 * delta).sin();
    let denom = Complex64::new((1.0 - r) + 2.0 * r * half * half, -r * s);
    if denom.norm_sqr() == 0.0 {
        return None;
    }
    Some(match kernel {
        Kernel::Schwarz => Complex64::new(1.0 + r * c, r * s) / denom,
        Kernel::Poisson => Complex64::new((1.0 - r) * (1.0 + r) / denom.norm_sqr(), 0.0),
        Kernel::Cauchy => Complex64::from_polar(1.0, -alpha) / denom,
        Kernel::CauchyZeta => denom.inv(),
    })
}

/// A real or complex measure on the unit circle.
#[derive(Debug, Clone, Default)]
pub struct CircleMeasure {
    density: Option<Density>,
    atoms: Vec<Atom>,
    singular: Option<CantorPart>,
}

impl CircleMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single real atom.
    pub fn atom(angle: f64, mass: f64) -> Self {
        CircleMeasure::new().with_atom(angle, Complex64::new(mass, 0.0)).expect("single atom")
    }

    pub fn from_density(d: Density) -> Self {
        CircleMeasure::new().with_density(d)
    }

    pub fn with_density(mut self, d: Density) -> Self {
        self.density = Some(match self.density.take() {
            Some(old) => old.add(&d),
            None => d,
        });
        self
    }

    pub fn with_atom(mut self, angle: f64, mass: Complex64) -> Result<Self> {
        if !angle.is_finite() || !mass.re.is_finite() || !mass.im.is_finite() {
            return Err(Error::InvalidMeasure("atom angle and mass must be finite".into()));
        }
        let angle = normalize_angle(angle);
        if let Some(a) = self.atoms.iter().find(|a| normalize_angle(a.angle - angle).abs() < ATOM_COLLISION) {
            return Err(Error::InvalidMeasure(format!("atom at {angle} collides with atom at {}", a.angle)));
        }
        self.atoms.push(Atom { angle, mass });
        Ok(self)
    }

    pub fn with_cantor(mut self, c: CantorPart) -> Result<Self> {
        cantor_part_as_atoms(&c)?;
        if self.singular.is_some() {
            return Err(Error::InvalidMeasure("only one Cantor part is supported".into()));
        }
        self.singular = Some(c);
        Ok(self)
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn singular(&self) -> Option<&CantorPart> {
        self.singular.as_ref()
    }

    /// True when every atom mass is real (densities are always real).
    pub fn is_real(&self) -> bool {
        self.atoms.iter().all(|a| a.mass.im == 0.0)
    }

    /// All point masses: explicit atoms plus the discretized Cantor part.
    pub fn point_masses(&self) -> Result<Vec<Atom>> {
        let mut out = self.atoms.clone();
        if let Some(c) = &self.singular {
            out.extend(cantor_part_as_atoms(c)?);
        }
        Ok(out)
    }

    /// Total mass of the singular part (atoms and Cantor), as a variation.
    pub fn singular_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass.norm()).sum::<f64>() + self.singular.map(|c| c.mass.abs()).unwrap_or(0.0)
    }

    /// `α·self`.
    pub fn scaled(&self, alpha: f64) -> Self {
        CircleMeasure {
            density: self.density.as_ref().map(|d| d.scale(alpha)),
            atoms: self.atoms.iter().map(|a| Atom { angle: a.angle, mass: a.mass * alpha }).collect(),
            singular: self.singular.map(|c| CantorPart { mass: c.mass * alpha, ..c }),
        }
    }

    /// `self + other`; atoms at the same angle are merged.
    pub fn plus(&self, other: &CircleMeasure) -> Result<Self> {
        let mut out = self.clone();
        if let Some(d) = &other.density {
            out = out.with_density(d.clone());
        }
        for a in &other.atoms {
            if let Some(x) = out.atoms.iter_mut().find(|x| normalize_angle(x.angle - a.angle).abs() < ATOM_COLLISION) {
                x.mass += a.mass;
            } else {
                out.atoms.push(*a);
            }
        }
        match (&out.singular, &other.singular) {
            (Some(a), Some(b)) if a.depth == b.depth && a.arc == b.arc => {
                out.singular = Some(CantorPart { mass: a.mass + b.mass, ..*a });
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidMeasure("cannot add Cantor parts on different arcs".into()))
            }
            (None, Some(b)) => out.singular = Some(*b),
            _ => {}
        }
        Ok(out)
    }

    /// Signed total mass `∫ dμ`.
    pub fn total_mass(&self) -> Result<Complex64> {
        let mut m: Complex64 = self.atoms.iter().map(|a| a.mass).sum();
        if let Some(c) = &self.singular {
            m += c.mass;
        }
        if let Some(d) = &self.density {
            m += match d {
                Density::Trig { poly, .. } => poly.coeff(0),
                Density::Function(f) => {
                    periodic_trapezoid(|t| Complex64::new(f(t), 0.0), QUAD_REL_TOL, QUAD_MAX_NODES, None)?
                }
            };
        }
        Ok(m)
    }

    /// `Σ_k c_k·K_k(z)` for a trigonometric density.
    fn trig_integral(poly: &TrigPoly, kernel: Kernel, z: Complex64) -> Complex64 {
        match kernel {
            Kernel::Schwarz => poly.analytic_series(z, 0) * 2.0 - poly.coeff(0),
            Kernel::CauchyZeta => poly.analytic_series(z, 0),
            Kernel::Cauchy => poly.analytic_series(z, 1),
            Kernel::Poisson => {
                let zb = z.conj();
                let mut neg = Complex64::new(0.0, 0.0);
                for k in (1..=poly.degree() as i64).rev() {
                    neg = (neg + poly.coeff(-k)) * zb;
                }
                Complex64::new((poly.analytic_series(z, 0) + neg).re, 0.0)
            }
        }
    }

    /// Evaluate `∫ K(ζ, z) dμ(ζ)`.
    pub fn integrate(&self, kernel: Kernel, z: DiscPoint) -> Result<Complex64> {
        let (r, theta) = (z.r(), z.theta());
        let mut acc = Complex64::new(0.0, 0.0);
        for a in self.point_masses()? {
            let k = kernel_value(kernel, a.angle, r, theta).ok_or(Error::BoundaryEvaluation { angle: a.angle })?;
            acc += k * a.mass;
        }
        if let Some(d) = &self.density {
            acc += match d {
                Density::Trig { poly, .. } => Self::trig_integral(poly, kernel, z.z()),
                Density::Function(f) => {
                    let window = (r > 0.99).then(|| PeakWindow::for_radius(theta, r));
                    periodic_trapezoid(
                        |alpha| kernel_value(kernel, alpha, r, theta).unwrap_or_default() * f(alpha),
                        QUAD_REL_TOL,
                        QUAD_MAX_NODES,
                        window,
                    )?
                }
            };
        }
        Ok(acc)
    }
}

/// `‖μ‖ = ∫|density| dm + Σ|atom masses| + |Cantor mass|`.
pub fn total_variation(mu: &CircleMeasure) -> Result<f64> {
    let mut tv = mu.singular_variation();
    if let Some(d) = mu.density() {
        let d = d.clone();
        tv += periodic_trapezoid(|t| Complex64::new(d.eval(t).abs(), 0.0), QUAD_REL_TOL, QUAD_MAX_NODES, None)?.re;
    }
    Ok(tv)
}

/// Schwarz integral `∫ (ζ + z)/(ζ − z) dμ(ζ)`.
pub fn eval_schwarz(mu: &CircleMeasure, z: DiscPoint) -> Result<Complex64> {
    mu.integrate(Kernel::Schwarz, z)
}

/// Poisson integral `∫ Re((ζ + z)/(ζ − z)) dμ(ζ)`; complex for complex measures.
pub fn eval_poisson(mu: &CircleMeasure, z: DiscPoint) -> Result<Complex64> {
    if mu.is_real() {
        return mu.integrate(Kernel::Poisson, z);
    }
    // Complex atoms: the real kernel integrates real and imaginary parts separately.
    let re = CircleMeasure {
        density: mu.density.clone(),
        atoms: mu.atoms.iter().map(|a| Atom { angle: a.angle, mass: Complex64::new(a.mass.re, 0.0) }).collect(),
        singular: mu.singular,
    };
    let im = CircleMeasure {
        density: None,
        atoms: mu.atoms.iter().map(|a| Atom { angle: a.angle, mass: Complex64::new(a.mass.im, 0.0) }).collect(),
        singular: None,
    };
    let p = re.integrate(Kernel::Poisson, z)?.re;
    let q = im.integrate(Kernel::Poisson, z)?.re;
    Ok(Complex64::new(p, q))
}

/// Cauchy-type integral `∫ dμ(ζ)/(ζ − z)`.
pub fn eval_cauchy(mu: &CircleMeasure, z: DiscPoint) -> Result<Complex64> {
    mu.integrate(Kernel::Cauchy, z)
}
