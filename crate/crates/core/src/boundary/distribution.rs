use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::{BoundarySamples, Cell, SampleFlag};
use crate::error::{Error, Result};
use crate::quad::disc_fraction;

/// `per_decade` log-spaced points per decade on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let steps = ((hi / lo).log10() * per_decade as f64).round().max(1.0) as usize;
    let (a, b) = (lo.ln(), hi.ln());
    (0..=steps).map(|i| (a + (b - a) * i as f64 / steps as f64).exp()).collect()
}

/// `m_f(t) = m{ζ : |f(ζ)| ≥ t}` on a log-spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionFunction {
    t: Vec<f64>,
    m: Vec<f64>,
    blowup_fraction: f64,
}

fn segment_distance(a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return a.norm();
    }
    let s = (-(a * d.conj()).re / dd).clamp(0.0, 1.0);
    (a + d * s).norm()
}

impl Cell {
    /// `(lo, hi)`: the superlevel fraction is 1 for `t ≤ lo` and 0 for `t > hi`.
    fn superlevel_bounds(&self) -> (f64, f64) {
        match *self {
            Cell::Direct(a, b) => (segment_distance(a, b), a.norm().max(b.norm())),
            Cell::Reciprocal(a, b) => (1.0 / a.norm().max(b.norm()), 1.0 / segment_distance(a, b)),
        }
    }

    fn superlevel(&self, t: f64) -> f64 {
        match *self {
            Cell::Direct(a, b) if a == b => f64::from(a.norm() >= t),
            Cell::Direct(a, b) => 1.0 - disc_fraction(a, b, t),
            Cell::Reciprocal(a, b) => disc_fraction(a, b, 1.0 / t),
        }
    }
}

/// Distribution function of the cell model of `s` on `t_grid` (increasing).
pub fn distribution_function(s: &BoundarySamples, t_grid: &[f64]) -> Result<DistributionFunction> {
    s.require_decided()?;
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("t grid must be positive and increasing".into()));
    }
    let k = t_grid.len();
    let mut full = vec![0i64; k + 1];
    let mut partial = vec![0.0; k];
    for j in 0..s.n() {
        let cell = s.cell(j);
        let (lo, hi) = cell.superlevel_bounds();
        let i_full = t_grid.partition_point(|&t| t <= lo);
        let i_zero = t_grid.partition_point(|&t| t <= hi).max(i_full);
        full[0] += 1;
        full[i_full] -= 1;
        for i in i_full..i_zero {
            partial[i] += cell.superlevel(t_grid[i]);
        }
    }
    let n = s.n() as f64;
    let mut count = 0i64;
    let mut m = Vec::with_capacity(k);
    let mut running = 1.0f64;
    for i in 0..k {
        count += full[i];
        running = running.min(((count as f64 + partial[i]) / n).clamp(0.0, 1.0));
        m.push(running);
    }
    Ok(DistributionFunction { t: t_grid.to_vec(), m, blowup_fraction: s.fraction(SampleFlag::BlowUp) })
}

impl DistributionFunction {
    /// Build from explicit values, checking the invariants.
    pub fn new(t: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if t.len() != m.len() || t.is_empty() {
            return Err(Error::InvalidArgument("t and m must have equal nonzero length".into()));
        }
        if t[0] <= 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("t grid must be positive and increasing".into()));
        }
        if m.iter().any(|v| !(0.0..=1.0).contains(v)) || m.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("m must be nonincreasing with values in [0, 1]".into()));
        }
        Ok(DistributionFunction { t, m, blowup_fraction: 0.0 })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(t: Vec<f64>, f: F) -> Result<Self> {
        let m = t.iter().map(|&x| f(x)).collect();
        Self::new(t, m)
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    /// Fraction of angles that were blow-ups in the source samples.
    pub fn blowup_fraction(&self) -> f64 {
        self.blowup_fraction
    }

    /// Linear interpolation of `m` in `log t`, clamped to the grid ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.t.partition_point(|&x| x <= t);
        if i == 0 {
            return self.m[0];
        }
        if i == self.t.len() {
            return self.m[i - 1];
        }
        let (u0, u1) = (self.t[i - 1].ln(), self.t[i].ln());
        let w = (t.ln() - u0) / (u1 - u0);
        self.m[i - 1] + w * (self.m[i] - self.m[i - 1])
    }

    fn last_decade(&self) -> std::ops::Range<usize> {
        let cut = self.t[self.t.len() - 1] / 10.0;
        self.t.partition_point(|&x| x < cut)..self.t.len()
    }

    /// Mean of `t·m(t)` over the last decade of the grid.
    pub fn tail_constant(&self) -> f64 {
        let r = self.last_decade();
        let len = r.len() as f64;
        r.map(|i| self.t[i] * self.m[i]).sum::<f64>() / len
    }

    /// Least-squares slope of `log m` against `log t` on the last decade.
    pub fn tail_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> =
            self.last_decade().filter(|&i| self.m[i] > 0.0).map(|i| (self.t[i].ln(), self.m[i].ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    /// `p ∫₀^∞ t^{p−1} m(t) dt`, with `m` held at `m(t_min)` below the grid and
    /// continued as `c/t` above it.
    pub fn layer_cake(&self, p: f64) -> f64 {
        let head = self.m[0] * self.t[0].powf(p);
        let mut body = 0.0;
        for i in 1..self.t.len() {
            let g0 = p * self.t[i - 1].powf(p) * self.m[i - 1];
            let g1 = p * self.t[i].powf(p) * self.m[i];
            body += 0.5 * (g0 + g1) * (self.t[i].ln() - self.t[i - 1].ln());
        }
        let t_max = self.t[self.t.len() - 1];
        let tail = if self.m[self.m.len() - 1] > 0.0 {
            p * self.tail_constant() * t_max.powf(p - 1.0) / (1.0 - p)
        } else {
            0.0
        };
        head + body + tail
    }

    /// CSV with columns `t,m_f`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,m_f\n");
        for (t, m) in self.t.iter().zip(&self.m) {
            writeln!(out, "{t:.16e},{m:.16e}").unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakL1 {
    /// `max t·m(t)` over the grid.
    pub value: f64,
    /// Maximizing `t`.
    pub t: f64,
    /// The maximum sits on the first or last grid point.
    pub at_edge: bool,
}

/// Grid maximum of `t·m_f(t)`.
pub fn weak_l1_norm(d: &DistributionFunction) -> WeakL1 {
    let (i, value) = d
        .t
        .iter()
        .zip(&d.m)
        .map(|(t, m)| t * m)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    WeakL1 { value, t: d.t[i], at_edge: i == 0 || i == d.t.len() - 1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    /// `R ∫_R^∞ m(t)/t dt`.
    pub value: f64,
    /// The part of `value` coming from beyond the grid.
    pub extrapolated: f64,
    /// Fitted log-log slope on the last decade, if `m` does not vanish there.
    pub slope: Option<f64>,
}

/// Fitted slopes above this value count as decay slower than `1/t`.
pub const DIVERGENT_SLOPE: f64 = -0.9;

/// `R ∫_R^∞ m_f(t)/t dt`, continued past the grid by a `c/t` fit.
pub fn tail_functional(d: &DistributionFunction, r: f64) -> Result<TailEstimate> {
    let (t0, t_max) = (d.t[0], d.t[d.t.len() - 1]);
    if !(t0..=t_max).contains(&r) {
        return Err(Error::InvalidArgument(format!("R = {r} outside the grid [{t0}, {t_max}]")));
    }
    let last = d.m[d.m.len() - 1];
    let slope = if last > 0.0 { d.tail_slope() } else { None };
    if let Some(s) = slope {
        if s > DIVERGENT_SLOPE {
            return Err(Error::Divergent(format!("distribution decays like t^{s:.3}, slower than 1/t")));
        }
    }
    let i = d.t.partition_point(|&x| x <= r);
    let mut integral = 0.0;
    let mut prev = (r.ln(), d.value_at(r));
    for k in i..d.t.len() {
        let cur = (d.t[k].ln(), d.m[k]);
        integral += 0.5 * (prev.1 + cur.1) * (cur.0 - prev.0);
        prev = cur;
    }
    let beyond = if last > 0.0 { d.tail_constant() / t_max } else { 0.0 };
    Ok(TailEstimate { value: r * (integral + beyond), extrapolated: r * beyond, slope })
}

/// Minimum of a functional over a probe grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub value: f64,
    pub at: f64,
}

/// Finite proxy for `liminf_{R→∞}`: the smallest value over `probes`.
///
/// Probes where the functional reports divergence are skipped; if every probe
/// diverges the divergence is returned.
pub fn liminf_probe<F: Fn(f64) -> Result<f64>>(functional: F, probes: &[f64]) -> Result<Probe> {
    let mut best: Option<Probe> = None;
    let mut divergence = None;
    for &r in probes {
        match functional(r) {
            Ok(v) => {
                if best.is_none_or(|b| v < b.value) {
                    best = Some(Probe { value: v, at: r });
                }
            }
            Err(e @ Error::Divergent(_)) => divergence = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| divergence.unwrap_or_else(|| Error::InvalidArgument("empty probe grid".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{grid_angle, sample_boundary, AnalyticFunction, DEFAULT_LADDER};
    use crate::measure::CircleMeasure;
    use std::f64::consts::PI;

    fn atom_oracle(t: f64) -> f64 {
        2.0 / PI * (1.0 / t).atan()
    }

    #[test]
    fn log_grid_density() {
        let g = log_grid(1e-2, 1e6, 512);
        assert_eq!(g.len(), 8 * 512 + 1);
        assert!((g[0] - 1e-2).abs() < 1e-16 && (g[g.len() - 1] - 1e6).abs() < 1e-6);
    }

    #[test]
    fn constant_modulus_is_a_step() {
        let s = BoundarySamples::from_boundary(vec![Complex64::new(0.0, 5.0); 1024]).unwrap();
        let t = vec![1.0, 4.999, 5.0, 5.001, 10.0];
        let d = distribution_function(&s, &t).unwrap();
        assert_eq!(d.m(), &[1.0, 1.0, 1.0, 0.0, 0.0]);
        let w = weak_l1_norm(&d);
        assert_eq!((w.value, w.t), (5.0, 5.0));
    }

    #[test]
    fn atom_distribution_matches_arctan() {
        let n = 1 << 12;
        let f = AnalyticFunction::schwarz(CircleMeasure::atom(0.0, 1.0));
        let s = sample_boundary(&f, n, &DEFAULT_LADDER).unwrap();
        let t = log_grid(1e-1, 1e4, 64);
        let d = distribution_function(&s, &t).unwrap();
        for (t, m) in d.t().iter().zip(d.m()) {
            assert!((m - atom_oracle(*t)).abs() <= 2.0 / n as f64 + 1e-6, "{t}: {m}");
        }
    }

    #[test]
    fn closed_form_samples_match_arctan() {
        let n = 1 << 10;
        let values = (0..n)
            .map(|j| {
                let th = grid_angle(j, n);
                if j == 0 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    Complex64::new(0.0, 1.0 / (0.5 * th).tan())
                }
            })
            .collect();
        let s = BoundarySamples::from_boundary(values).unwrap();
        let d = distribution_function(&s, &log_grid(1e-3, 1e6, 16)).unwrap();
        for (t, m) in d.t().iter().zip(d.m()) {
            assert!((m - atom_oracle(*t)).abs() <= 2.0 / n as f64, "{t}: {m}");
        }
        assert!((d.m()[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn weak_norm_profiles() {
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 64), |t: f64| (1.0 / t).min(1.0)).unwrap();
        assert!((weak_l1_norm(&d).value - 1.0).abs() < 1e-12);
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 64), atom_oracle).unwrap();
        let w = weak_l1_norm(&d);
        assert!((w.value - 2.0 / PI).abs() < 1e-10 && w.at_edge);
    }

    #[test]
    fn tail_profiles() {
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 512), |t: f64| (1.0 / t).min(1.0)).unwrap();
        for r in [1.0, 10.0, 1e3] {
            let v = tail_functional(&d, r).unwrap();
            assert!((v.value - 1.0).abs() < 1e-5, "{r}: {v:?}");
        }
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 512), atom_oracle).unwrap();
        let v = tail_functional(&d, 1e5).unwrap();
        assert!((v.value - 2.0 / PI).abs() < 1e-4, "{v:?}");
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 512), |t| if t < 3.0 { 0.5 } else { 0.0 }).unwrap();
        assert_eq!(tail_functional(&d, 3.5).unwrap().value, 0.0);
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 512), |t: f64| t.powf(-0.5).min(1.0)).unwrap();
        assert!(matches!(tail_functional(&d, 10.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn tail_dominates_monotone_bound() {
        let d = DistributionFunction::from_fn(log_grid(1e-2, 1e6, 128), atom_oracle).unwrap();
        for r in [0.1, 1.0, 100.0] {
            let v = tail_functional(&d, r).unwrap().value;
            for &t in d.t().iter().filter(|&&t| t > r) {
                assert!(v >= d.value_at(t) * r * (t / r).ln() - 1e-9);
            }
        }
    }

    #[test]
    fn probes() {
        let p = liminf_probe(|_| Ok(1.0), &[1.0, 10.0]).unwrap();
        assert_eq!((p.value, p.at), (1.0, 1.0));
        let p = liminf_probe(|r| Ok(1.0 / r), &[1.0, 10.0, 100.0]).unwrap();
        assert_eq!((p.value, p.at), (0.01, 100.0));
        let e = liminf_probe(|_| Err(Error::Divergent("x".into())), &[1.0]).unwrap_err();
        assert!(matches!(e, Error::Divergent(_)));
    }

    #[test]
    fn layer_cake_of_atom() {
        let d = DistributionFunction::from_fn(log_grid(1e-4, 1e6, 512), atom_oracle).unwrap();
        for p in [0.3f64, 0.5, 0.7] {
            let want = 1.0 / (PI * p / 2.0).cos();
            assert!((d.layer_cake(p) - want).abs() < 1e-3 * want, "{p}");
        }
    }
}
