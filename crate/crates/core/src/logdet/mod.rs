//! The logarithmic determinant `u_f(w) = ∫ log|1 − w f(ζ)| dm(ζ)`.
//!
//! `u_f` is subharmonic in `w`, vanishes at the origin and its Riesz measure
//! is the pushforward of arclength under `1/f`. This module evaluates it on
//! the cell model of the boundary samples, integrates it along the imaginary
//! axis and checks the inequalities linking it to the distribution function.

mod identities;

use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{
    distribution_function, liminf_probe, log_grid, tail_functional, weak_l1_norm, BoundarySamples, Cell,
    DistributionFunction,
};
use crate::error::{Error, Result};
use crate::quad::{log_abs_linear, simpson_uniform};

pub use identities::{
    angular_kernel_identity, companion_identity, p_power_closed_form, p_power_identity, IdentityCheck,
};

/// `∫₀¹ log|a + (b − a)s| ds`; Simpson's rule when the segment stays far from
/// the origin relative to its length, the exact formula otherwise.
fn log_abs_segment(a: Complex64, b: Complex64) -> f64 {
    let d = (b - a).norm_sqr();
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    if d < 2.5e-3 * na.min(nb) {
        let m = (0.5 * (a + b)).norm_sqr();
        (na.ln() + 4.0 * m.ln() + nb.ln()) / 12.0
    } else {
        log_abs_linear(a, b)
    }
}

/// `u_f` on the cell model of a set of boundary samples.
#[derive(Debug, Clone)]
pub struct LogDet {
    cells: Vec<Cell>,
    /// `∫ log|1/f|` over each reciprocal cell, zero for direct cells.
    reciprocal_log: Vec<f64>,
}

impl LogDet {
    pub fn new(s: &BoundarySamples) -> Result<Self> {
        s.require_decided()?;
        let cells: Vec<Cell> = (0..s.n()).map(|j| s.cell(j)).collect();
        let reciprocal_log = cells
            .iter()
            .map(|c| match *c {
                Cell::Reciprocal(a, b) => log_abs_linear(a, b),
                Cell::Direct(..) => 0.0,
            })
            .collect();
        Ok(LogDet { cells, reciprocal_log })
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    /// `u_f(w)`; exactly zero at `w = 0`.
    pub fn u(&self, w: Complex64) -> f64 {
        if w == Complex64::new(0.0, 0.0) {
            return 0.0;
        }
        let one = Complex64::new(1.0, 0.0);
        let sum: f64 = self
            .cells
            .iter()
            .zip(&self.reciprocal_log)
            .map(|(c, &lr)| match *c {
                Cell::Direct(a, b) => log_abs_segment(one - w * a, one - w * b),
                Cell::Reciprocal(a, b) => log_abs_segment(a - w, b - w) - lr,
            })
            .sum();
        sum / self.n() as f64
    }

    /// `max_θ u_f(r e^{iθ})` over 1024 angles.
    pub fn max_on_circle(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        (0..1024)
            .into_par_iter()
            .map(|j| self.u(Complex64::from_polar(r, 2.0 * PI * j as f64 / 1024.0)))
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

/// `u_f(w)` from boundary samples.
pub fn u_f(s: &BoundarySamples, w: Complex64) -> Result<f64> {
    Ok(LogDet::new(s)?.u(w))
}

/// `u_f` tabulated at a set of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogDetProfile {
    pub points: Vec<Complex64>,
    pub values: Vec<f64>,
}

impl LogDetProfile {
    pub fn evaluate(ld: &LogDet, points: Vec<Complex64>) -> Self {
        let values = points.par_iter().map(|&w| ld.u(w)).collect();
        LogDetProfile { points, values }
    }

    /// Imaginary-axis points `±it` and circles `r e^{iθ}` with `m` angles each.
    pub fn standard_points(axis: &[f64], radii: &[f64], m: usize) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> =
            axis.iter().flat_map(|&t| [Complex64::new(0.0, t), Complex64::new(0.0, -t)]).collect();
        for &r in radii {
            pts.extend((0..m).map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64)));
        }
        pts
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `w_re,w_im,u`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w_re,w_im,u\n");
        for (w, u) in self.points.iter().zip(&self.values) {
            writeln!(out, "{:.16e},{:.16e},{u:.16e}", w.re, w.im).unwrap();
        }
        out
    }
}

/// Truncation of the imaginary-axis integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
}

impl Default for AxisOptions {
    fn default() -> Self {
        AxisOptions { t_min: 1e-3, t_max: 1e6, per_decade: 32 }
    }
}

/// An imaginary-axis integral with its two truncation remainders, both
/// already included in `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisIntegral {
    pub value: f64,
    /// Contribution of `|t| < t_min` from `u_f(it) ≈ C t²`.
    pub near_zero: f64,
    /// Contribution of `|t| > t_max` from `u_f(it) ≈ a log|t| + b`.
    pub tail: f64,
    /// Fitted `a` on each half-axis.
    pub tail_slopes: (f64, f64),
}

/// Largest admissible logarithmic growth rate of `u_f` along the axis.
pub const MAX_LOG_GROWTH: f64 = 1.05;

fn fit_log(ts: &[f64], us: &[f64]) -> (f64, f64) {
    let k = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = us.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(us).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// `∫_ℝ u_f(it) |t|^{−q} dt` for `1 < q < 3`.
pub fn axis_integral(ld: &LogDet, q: f64, opts: AxisOptions) -> Result<AxisIntegral> {
    if !(1.0 < q && q < 3.0) {
        return Err(Error::InvalidArgument(format!("weight exponent {q} outside (1, 3)")));
    }
    let mut ts = log_grid(opts.t_min, opts.t_max, opts.per_decade);
    if ts.len().is_multiple_of(2) {
        ts = log_grid(opts.t_min, opts.t_max, opts.per_decade + 1);
    }
    let ds = (opts.t_max / opts.t_min).ln() / (ts.len() - 1) as f64;
    let sides: Vec<Vec<f64>> = [1.0, -1.0]
        .par_iter()
        .map(|&sign| ts.par_iter().map(|&t| ld.u(Complex64::new(0.0, sign * t))).collect())
        .collect();
    let k = q - 1.0;
    let cut = ts.partition_point(|&t| t < opts.t_max / 10.0);
    let mut body = 0.0;
    let mut near_zero = 0.0;
    let mut tail = 0.0;
    let mut slopes = [0.0; 2];
    for (side, us) in sides.iter().enumerate() {
        // ∫ u(it) t^{−q} dt = ∫ u(i e^s) e^{(1−q)s} ds
        let g: Vec<f64> = ts.iter().zip(us).map(|(t, u)| u * t.powf(1.0 - q)).collect();
        body += simpson_uniform(&g, ds);
        let c = us[0] / (opts.t_min * opts.t_min);
        near_zero += c * opts.t_min.powf(3.0 - q) / (3.0 - q);
        let (a, b) = fit_log(&ts[cut..], &us[cut..]);
        if a > MAX_LOG_GROWTH {
            return Err(Error::Divergent(format!("u_f grows like {a:.3}·log|t| along the axis")));
        }
        slopes[side] = a;
        let lt = opts.t_max.ln();
        tail += opts.t_max.powf(-k) * ((a * lt + b) / k + a / (k * k));
    }
    Ok(AxisIntegral { value: body + near_zero + tail, near_zero, tail, tail_slopes: (slopes[0], slopes[1]) })
}

/// `I_f = (1/π) ∫_ℝ u_f(it)/t² dt`.
pub fn i_f(ld: &LogDet, opts: AxisOptions) -> Result<AxisIntegral> {
    let a = axis_integral(ld, 2.0, opts)?;
    Ok(AxisIntegral { value: a.value / PI, near_zero: a.near_zero / PI, tail: a.tail / PI, ..a })
}

/// The Riesz counting function `μ_f(r)` of `u_f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RieszCounting {
    pub r: Vec<f64>,
    pub mu: Vec<f64>,
}

/// The `τ = 1/r` grid, increasing, on which `μ_f(r) = m_f(1/r)` is evaluated.
pub fn reciprocal_grid(r_grid: &[f64]) -> Vec<f64> {
    r_grid.iter().rev().map(|r| 1.0 / r).collect()
}

/// `μ_f(r) = m{ζ : |1/f(ζ)| ≤ r}` for an increasing `r` grid.
pub fn riesz_counting(s: &BoundarySamples, r_grid: &[f64]) -> Result<RieszCounting> {
    let d = distribution_function(s, &reciprocal_grid(r_grid))?;
    let mu = d.m().iter().rev().copied().collect();
    Ok(RieszCounting { r: r_grid.to_vec(), mu })
}

/// Independent count of the zeros `w = 1/f(ζ_j)` of `1 − w f(ζ_j)` inside
/// `|w| ≤ r`, each found by the winding number of `φ ↦ 1 − r e^{iφ} f(ζ_j)`
/// sampled at 4096 angles.
pub fn argument_count(s: &BoundarySamples, r: f64) -> f64 {
    const M: usize = 4096;
    let circle: Vec<Complex64> = (0..=M).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / M as f64)).collect();
    let hits: usize = s
        .boundary()
        .par_iter()
        .map(|&f| {
            if !(f.re.is_finite() && f.im.is_finite()) {
                return 1;
            }
            let one = Complex64::new(1.0, 0.0);
            let mut turn = 0.0;
            let mut prev = one - circle[0] * f;
            for w in &circle[1..] {
                let cur = one - w * f;
                turn += (cur / prev).arg();
                prev = cur;
            }
            (turn / (2.0 * PI)).round().abs() as usize
        })
        .sum();
    hits as f64 / s.n() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenRow {
    pub r: f64,
    pub mu: f64,
    pub max_at_er: f64,
    pub max_at_r: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JensenReport {
    pub rows: Vec<JensenRow>,
    pub pass: bool,
    pub witness: Option<f64>,
}

/// `μ_f(r) ≤ M(er, u_f)` and `M(r, u_f) ≤ 2 I_f r` on a radius grid, each
/// with relative slack and an absolute floor of `10⁻⁶`.
pub fn jensen_check(s: &BoundarySamples, ld: &LogDet, i_f: f64, r_grid: &[f64], slack: f64) -> Result<JensenReport> {
    let mu = riesz_counting(s, r_grid)?;
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut witness = None;
    for (&r, &m) in r_grid.iter().zip(&mu.mu) {
        let row = JensenRow {
            r,
            mu: m,
            max_at_er: ld.max_on_circle(E * r),
            max_at_r: ld.max_on_circle(r),
            bound: 2.0 * i_f * r,
        };
        let ok = row.mu <= row.max_at_er * (1.0 + slack) + 1e-6 && row.max_at_r <= row.bound * (1.0 + slack) + 1e-6;
        if !ok && witness.is_none() {
            witness = Some(r);
        }
        rows.push(row);
    }
    Ok(JensenReport { rows, pass: witness.is_none(), witness })
}

/// The two inequalities linking the weak-L¹ norm, `I_f` and the tail functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub weak_l1: f64,
    pub i_f: AxisIntegral,
    /// Smallest tail functional over the probe radii.
    pub tail_proxy: f64,
    pub tail_probe: f64,
    /// `‖f‖₁,∞ ≤ 2e·I_f`
    pub first: bool,
    /// `I_f ≤ 4π·liminf R∫_R^∞ m_f(t)/t dt`
    pub second: bool,
}

/// Probe radii for the tail liminf proxy.
pub const TAIL_PROBES: [f64; 5] = [1e1, 1e2, 1e3, 1e4, 1e5];

pub fn inequality_chain(
    s: &BoundarySamples,
    d: &DistributionFunction,
    opts: AxisOptions,
    slack: f64,
) -> Result<ChainReport> {
    let ld = LogDet::new(s)?;
    let i = i_f(&ld, opts)?;
    let weak = weak_l1_norm(d).value;
    let probe = liminf_probe(|r| tail_functional(d, r).map(|t| t.value), &TAIL_PROBES)?;
    Ok(ChainReport {
        weak_l1: weak,
        i_f: i,
        tail_proxy: probe.value,
        tail_probe: probe.at,
        first: weak <= 2.0 * E * i.value * (1.0 + slack),
        second: i.value <= 4.0 * PI * probe.value * (1.0 + slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{grid_angle, sample_boundary, AnalyticFunction, DEFAULT_LADDER};
    use crate::measure::CircleMeasure;

    fn atom(n: usize, mass: f64) -> BoundarySamples {
        sample_boundary(&AnalyticFunction::schwarz(CircleMeasure::atom(0.0, mass)), n, &DEFAULT_LADDER).unwrap()
    }

    fn constant(c: Complex64) -> BoundarySamples {
        BoundarySamples::from_boundary(vec![c; 1024]).unwrap()
    }

    #[test]
    fn origin_and_constants() {
        let ld = LogDet::new(&atom(1024, 1.0)).unwrap();
        assert_eq!(ld.u(Complex64::new(0.0, 0.0)), 0.0);
        let ld = LogDet::new(&constant(Complex64::new(0.0, 1.0))).unwrap();
        let u = ld.u(Complex64::new(0.0, E - 1.0));
        assert!((u - 1.0).abs() < 1e-14);
        assert!((ld.max_on_circle(1.0) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn atom_matches_dense_oracle() {
        let w = Complex64::new(2.0, 0.0);
        let got = u_f(&atom(1 << 12, 1.0), w).unwrap();
        // (1/2π)∫ log|1 − 2i cot(θ/2)| dθ on 2²⁰ midpoints.
        let n = 1 << 20;
        let oracle = (0..n)
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                (Complex64::new(1.0, 0.0) - w * Complex64::new(0.0, 1.0 / (0.5 * th).tan())).norm().ln()
            })
            .sum::<f64>()
            / n as f64;
        assert!((got - oracle).abs() < 1e-5, "{got} vs {oracle}");
        assert!((got - 3f64.ln()).abs() < 1e-5);
    }

    #[test]
    fn atom_axis_integral_is_one() {
        let ld = LogDet::new(&atom(1 << 12, 1.0)).unwrap();
        let i = i_f(&ld, AxisOptions::default()).unwrap();
        assert!((i.value - 1.0).abs() < 1e-4, "{i:?}");
        let zero = LogDet::new(&constant(Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(i_f(&zero, AxisOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn axis_integral_scales() {
        let one = i_f(&LogDet::new(&atom(1 << 12, 1.0)).unwrap(), AxisOptions::default()).unwrap().value;
        let two = i_f(&LogDet::new(&atom(1 << 12, 2.0)).unwrap(), AxisOptions::default()).unwrap().value;
        assert!((two - 2.0 * one).abs() < 1e-3 * two);
    }

    #[test]
    fn riesz_is_distribution_reversed() {
        let s = atom(1 << 12, 1.0);
        let r = log_grid(1e-3, 1e3, 32);
        let mu = riesz_counting(&s, &r).unwrap();
        let d = distribution_function(&s, &reciprocal_grid(&r)).unwrap();
        for (i, m) in mu.mu.iter().enumerate() {
            assert_eq!(*m, d.m()[r.len() - 1 - i]);
        }
        for (r, m) in mu.r.iter().zip(&mu.mu) {
            assert!((m - 2.0 / PI * r.atan()).abs() <= 2.0 / 4096.0);
        }
        assert!(mu.mu.windows(2).all(|w| w[0] <= w[1]));
        let c = riesz_counting(&constant(Complex64::new(5.0, 0.0)), &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(c.mu, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn winding_count_agrees() {
        let s = atom(1 << 10, 1.0);
        for r in [0.05, 0.5, 1.0, 3.0, 40.0] {
            let direct = riesz_counting(&s, &[r]).unwrap().mu[0];
            let wound = argument_count(&s, r);
            assert!((direct - wound).abs() <= 2.0 / 1024.0, "{r}: {direct} vs {wound}");
        }
    }

    #[test]
    fn jensen_on_atom() {
        let s = atom(1 << 11, 1.0);
        let ld = LogDet::new(&s).unwrap();
        let i = i_f(&ld, AxisOptions::default()).unwrap().value;
        let rep = jensen_check(&s, &ld, i, &[0.1, 1.0, 10.0], 0.05).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.rows.windows(2).all(|w| w[0].max_at_r <= w[1].max_at_r));
    }

    #[test]
    fn profile_csv() {
        let ld = LogDet::new(&atom(1024, 1.0)).unwrap();
        let p = LogDetProfile::evaluate(&ld, LogDetProfile::standard_points(&[1.0], &[0.5], 8));
        assert_eq!(p.points.len(), 10);
        assert!(p.min() > -1e-6);
        assert!(p.to_csv().starts_with("w_re,w_im,u\n"));
    }

    #[test]
    fn positivity_off_grid() {
        let values = (0..2048)
            .map(|j| {
                let th = grid_angle(j, 2048) + 1e-3;
                Complex64::new(0.0, 1.0 / (0.5 * th).tan())
            })
            .collect();
        let ld = LogDet::new(&BoundarySamples::from_boundary(values).unwrap()).unwrap();
        for w in LogDetProfile::standard_points(&[0.01, 1.0, 100.0], &[0.3, 3.0], 64) {
            assert!(ld.u(w) > -1e-6, "{w}");
        }
    }
}
