//! Radial boundary sampling and distribution-function functionals.
//!
//! Boundary values are approximated along a ladder of radii `r₁ < … < r_L`
//! on a uniform angle grid `θ_j = 2πj/N`. Each angle is flagged as converged,
//! blow-up or undecided from the last two rungs.
//!
//! Between grid angles the boundary function is modelled cell by cell: on the
//! cell `[θ_j, θ_{j+1}]` either `f` or `1/f` is interpolated linearly,
//! whichever is smaller in modulus at the endpoints. Distribution functions
//! and logarithmic integrals are then computed exactly for that model, which
//! keeps poles at blow-up angles and logarithmic singularities under control.

mod distribution;
mod function;
mod norms;

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use distribution::{
    distribution_function, liminf_probe, log_grid, tail_functional, weak_l1_norm, DistributionFunction, Probe,
    TailEstimate, WeakL1,
};
pub use function::{AnalyticFunction, FunctionTag};
pub use norms::{hp_power_mean, hp_quasinorm, smirnov_norm, BoundaryIntegral};

pub(crate) use function::grid_angle;

/// Default radius ladder.
pub const DEFAULT_LADDER: [f64; 5] = [1.0 - 1e-4, 1.0 - 1e-6, 1.0 - 1e-8, 1.0 - 1e-10, 1.0 - 1e-11];
/// Smallest admissible angle grid.
pub const MIN_ANGLES: usize = 1 << 10;
/// Relative tolerance of the convergence flag.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Largest tolerated fraction of undecided (or, for norms, blow-up) angles.
pub const MAX_BAD_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleFlag {
    Converged,
    BlowUp,
    Undecided,
}

impl SampleFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleFlag::Converged => "converged",
            SampleFlag::BlowUp => "blow-up",
            SampleFlag::Undecided => "undecided",
        }
    }
}

/// Values of a function on a radius ladder over a uniform angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    n: usize,
    ladder: Vec<f64>,
    /// `values[l][j] = f(r_l e^{iθ_j})`
    values: Vec<Vec<Complex64>>,
    flags: Vec<SampleFlag>,
}

/// One cell of the piecewise-linear boundary model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Cell {
    /// `f` interpolated between the endpoint values.
    Direct(Complex64, Complex64),
    /// `1/f` interpolated; a zero endpoint is a pole of `f`.
    Reciprocal(Complex64, Complex64),
}

fn check_grid(n: usize) -> Result<()> {
    if n < MIN_ANGLES || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("angle count {n} must be a power of two ≥ {MIN_ANGLES}")));
    }
    Ok(())
}

fn classify(column: &[Complex64]) -> SampleFlag {
    let last = column[column.len() - 1];
    if !last.re.is_finite() || !last.im.is_finite() {
        return SampleFlag::BlowUp;
    }
    if column.len() >= 2 {
        let prev = column[column.len() - 2];
        if (last - prev).norm() < CONVERGENCE_TOL * (1.0 + last.norm()) {
            return SampleFlag::Converged;
        }
        let tail = &column[column.len().saturating_sub(3)..];
        if tail.windows(2).all(|w| w[1].norm() > w[0].norm()) {
            return SampleFlag::BlowUp;
        }
    }
    SampleFlag::Undecided
}

/// Sample `f` on `N` angles and the given ladder.
pub fn sample_boundary(f: &AnalyticFunction, n: usize, ladder: &[f64]) -> Result<BoundarySamples> {
    check_grid(n)?;
    if ladder.is_empty()
        || ladder.windows(2).any(|w| w[1] <= w[0])
        || ladder[0] <= 0.0
        || ladder[ladder.len() - 1] >= 1.0
    {
        return Err(Error::InvalidArgument("ladder must increase inside (0, 1)".into()));
    }
    let values = ladder.iter().map(|&r| f.eval_circle(r, n)).collect::<Result<Vec<_>>>()?;
    let flags =
        (0..n).into_par_iter().map(|j| classify(&values.iter().map(|row| row[j]).collect::<Vec<_>>())).collect();
    Ok(BoundarySamples { n, ladder: ladder.to_vec(), values, flags })
}

impl BoundarySamples {
    /// Samples from known boundary values; non-finite values are blow-ups.
    pub fn from_boundary(values: Vec<Complex64>) -> Result<Self> {
        check_grid(values.len())?;
        let flags = values
            .iter()
            .map(|v| if v.re.is_finite() && v.im.is_finite() { SampleFlag::Converged } else { SampleFlag::BlowUp })
            .collect();
        Ok(BoundarySamples { n: values.len(), ladder: vec![1.0], values: vec![values], flags })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ladder(&self) -> &[f64] {
        &self.ladder
    }

    pub fn theta(&self, j: usize) -> f64 {
        grid_angle(j, self.n)
    }

    /// Values on rung `l`.
    pub fn rung(&self, l: usize) -> &[Complex64] {
        &self.values[l]
    }

    /// Values on the outermost rung.
    pub fn boundary(&self) -> &[Complex64] {
        &self.values[self.values.len() - 1]
    }

    pub fn flags(&self) -> &[SampleFlag] {
        &self.flags
    }

    pub fn fraction(&self, flag: SampleFlag) -> f64 {
        self.flags.iter().filter(|&&f| f == flag).count() as f64 / self.n as f64
    }

    pub(crate) fn is_blowup(&self, j: usize) -> bool {
        self.flags[j] == SampleFlag::BlowUp
    }

    pub(crate) fn require_decided(&self) -> Result<()> {
        let u = self.fraction(SampleFlag::Undecided);
        if u > MAX_BAD_FRACTION {
            return Err(Error::Resolution(format!("{:.2}% of angles undecided", 100.0 * u)));
        }
        Ok(())
    }

    /// Reciprocal boundary value, zero where the sample is not finite.
    pub(crate) fn reciprocal(&self, j: usize) -> Complex64 {
        let v = self.boundary()[j];
        if v.re.is_finite() && v.im.is_finite() {
            v.inv()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Cell `j` spans `[θ_j, θ_{j+1}]` (periodically).
    pub(crate) fn cell(&self, j: usize) -> Cell {
        let k = (j + 1) % self.n;
        let (a, b) = (self.boundary()[j], self.boundary()[k]);
        if !(a.norm() * b.norm() <= 1.0) {
            Cell::Reciprocal(self.reciprocal(j), self.reciprocal(k))
        } else {
            Cell::Direct(a, b)
        }
    }

    /// CSV with columns `theta,re,im,flag` for the outermost rung.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,re,im,flag\n");
        for (j, (v, flag)) in self.boundary().iter().zip(&self.flags).enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{}", self.theta(j), v.re, v.im, flag.as_str()).unwrap();
        }
        out
    }
}
