//! Representability conditions, certificates and the catalog pipeline.
//!
//! Every check returns a three-valued [`Verdict`]. Limit statements are only
//! ever probed on finite grids, so each report carries the grid or probe
//! schedule it was computed on.

mod catalog;
mod counterexample;
mod recover;

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::{
    distribution_function, hp_quasinorm, liminf_probe, log_grid, sample_boundary, tail_functional, weak_l1_norm,
    AnalyticFunction, BoundarySamples, DistributionFunction, SampleFlag, DEFAULT_LADDER, MAX_BAD_FRACTION,
};
use crate::error::{Error, Result};
use crate::logdet::TAIL_PROBES;
use crate::measure::{total_variation, DiscPoint};

pub use catalog::{catalog, catalog_entry, CatalogEntry, Condition};
pub use counterexample::{construct_tail_counterexample, StepLevel, TailCounterexample, MAX_COUNTEREXAMPLE_DEPTH};
pub use recover::{decompose, recover_measure, Decomposition, RecoveredAtom, Recovery, RecoveryRung, RECOVERY_LADDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine<I: IntoIterator<Item = Verdict>>(vs: I) -> Verdict {
        vs.into_iter().fold(Verdict::Pass, |acc, v| match (acc, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        })
    }
}

/// Largest admissible Smirnov defect.
pub const SMIRNOV_TOL: f64 = 1e-3;
/// Moduli below this count as boundary zeros.
pub const ZERO_MODULUS: f64 = 1e-300;
/// `C = 8πe`, from chaining `‖f‖₁,∞ ≤ 2e·I_f` and `I_f ≤ 4π·liminf`.
pub const C_CHAIN: f64 = 8.0 * PI * E;
/// Recovered total mass must match `∫dμ` to this fraction of `‖μ‖`.
pub const RECOVERY_MASS_TOL: f64 = 0.02;
/// Exponents at which `(1 − p)‖f‖_{Hᵖ}` is probed.
pub const HP_SCALING_PROBES: [f64; 4] = [0.9, 0.95, 0.99, 0.995];

/// The default Smirnov probe points: four radii times five angles.
pub fn smirnov_probe_points() -> Vec<DiscPoint> {
    let mut out = Vec::with_capacity(20);
    for r in [0.2, 0.5, 0.8, 0.9] {
        for k in 0..5 {
            out.push(DiscPoint::polar(r, 0.37 + 2.0 * PI * k as f64 / 5.0).expect("inside the disc"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmirnovPoint {
    pub z: Complex64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmirnovCheck {
    /// `max (log|f(z)| − P[log|f|](z))` over the probes.
    pub defect: f64,
    pub points: Vec<SmirnovPoint>,
    pub n: usize,
    pub verdict: Verdict,
    pub note: Option<String>,
}

fn poisson(z: Complex64, theta: f64) -> f64 {
    (1.0 - z.norm_sqr()) / (Complex64::from_polar(1.0, theta) - z).norm_sqr()
}

/// Cell average of `log|f|` around node `j`. A sharp local minimum is taken
/// to be a simple zero `c|θ − δ|` fitted through the neighbours.
fn cell_log(s: &BoundarySamples, j: usize, h: f64) -> f64 {
    let n = s.n();
    let vals = s.boundary();
    let m = vals[j].norm();
    let (jl, jr) = ((j + n - 1) % n, (j + 1) % n);
    if s.is_blowup(jl) || s.is_blowup(jr) {
        return m.ln();
    }
    let (a, b) = (vals[jl].norm(), vals[jr].norm());
    if m >= 0.5 * a.min(b) {
        return m.ln();
    }
    let c = 0.5 * (a + b) / h;
    let delta = (0.5 * (a - b) / c).clamp(-0.49 * h, 0.49 * h);
    let prim = |u: f64| u * u.ln() - u;
    c.ln() + (prim(0.5 * h - delta) + prim(0.5 * h + delta)) / h
}

/// `lhs − ∫ log|f| P_z dm` from the samples, arranged so that a constant
/// gives exactly zero. Blow-up runs use the same local pole model as the
/// boundary norms.
fn smirnov_gap(s: &BoundarySamples, z: Complex64, lhs: f64) -> f64 {
    let n = s.n();
    let h = 2.0 * PI / n as f64;
    let vals = s.boundary();
    let start = (0..n).find(|&j| !s.is_blowup(j)).unwrap_or(0);
    let mut acc = 0.0;
    let mut weight = 0.0;
    let mut i = 0;
    while i < n {
        let j = (start + i) % n;
        if !s.is_blowup(j) {
            let m = vals[j].norm();
            if m >= ZERO_MODULUS {
                let w = poisson(z, s.theta(j));
                acc += w * (lhs - cell_log(s, j, h));
                weight += w;
            }
            i += 1;
            continue;
        }
        let mut k = 0;
        while k < n && s.is_blowup((j + k) % n) {
            k += 1;
        }
        let before = vals[(j + n - 1) % n].norm();
        let after = vals[(j + k) % n].norm();
        let c = 0.5 * (before + after) * (k + 1) as f64 * 0.5 * h;
        let a = k as f64 * 0.5 * h;
        let centre = s.theta(j) + 0.5 * (k - 1) as f64 * h;
        let w = poisson(z, centre);
        acc += w * k as f64 * (lhs - ((c / a).ln() + 1.0));
        if k == 1 && c > h {
            acc -= w * n as f64 * (0.5 * PI.ln() - 0.5) * h / PI;
        }
        weight += w * k as f64;
        i += k;
    }
    acc / weight
}

/// `log|f(z)| ≤ ∫ log|f(ζ)| P(z, ζ) dm(ζ)` at each probe point.
pub fn check_smirnov(f: &AnalyticFunction, probes: &[DiscPoint], s: &BoundarySamples) -> Result<SmirnovCheck> {
    let blow = s.fraction(SampleFlag::BlowUp);
    let zeros = s.boundary().iter().filter(|v| v.norm() < ZERO_MODULUS).count() as f64 / s.n() as f64;
    if blow > MAX_BAD_FRACTION || zeros > MAX_BAD_FRACTION || s.fraction(SampleFlag::Undecided) > MAX_BAD_FRACTION {
        return Ok(SmirnovCheck {
            defect: f64::NAN,
            points: Vec::new(),
            n: s.n(),
            verdict: Verdict::Inconclusive,
            note: Some(format!("blow-up fraction {blow:.3e}, zero fraction {zeros:.3e}: log|f| not resolved")),
        });
    }
    let mut points = Vec::with_capacity(probes.len());
    let mut defect = f64::NEG_INFINITY;
    for &p in probes {
        let lhs = f.eval(p)?.norm().ln();
        let gap = if lhs.is_finite() { smirnov_gap(s, p.z(), lhs) } else { f64::NEG_INFINITY };
        defect = defect.max(gap);
        points.push(SmirnovPoint { z: p.z(), lhs, rhs: lhs - gap });
    }
    let verdict = if defect <= SMIRNOV_TOL { Verdict::Pass } else { Verdict::Fail };
    Ok(SmirnovCheck { defect, points, n: s.n(), verdict, note: None })
}

/// Grid metadata attached to distribution-based checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl GridInfo {
    pub fn of(d: &DistributionFunction) -> Self {
        GridInfo { t_min: d.t()[0], t_max: d.t()[d.t().len() - 1], points: d.t().len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovCheck {
    /// `sup t·m_f(t)/‖μ‖`, or `sup t·m_f(t)` when `‖μ‖` is unknown.
    pub constant: f64,
    pub sup: f64,
    pub at: f64,
    pub mu_norm: Option<f64>,
    pub at_edge: bool,
    pub grid: GridInfo,
    pub verdict: Verdict,
}

/// Relative spread of `t·m_f(t)` over the last grid decade below which a
/// supremum at the upper edge counts as reached.
pub const FLAT_TAIL: f64 = 1e-2;

fn last_decade(d: &DistributionFunction) -> Vec<(f64, f64)> {
    let t_max = d.t()[d.t().len() - 1];
    d.t().iter().zip(d.m()).filter(|(t, _)| **t >= t_max / 10.0).map(|(t, m)| (*t, t * m)).collect()
}

/// `sup_t t·m_f(t)` over the grid, normalized by `‖μ‖` when known.
pub fn check_kolmogorov(d: &DistributionFunction, mu_norm: Option<f64>) -> KolmogorovCheck {
    let w = weak_l1_norm(d);
    let grid = GridInfo::of(d);
    let lower_edge = w.at_edge && w.t == grid.t_min;
    let verdict = if !w.value.is_finite() || lower_edge {
        Verdict::Inconclusive
    } else if w.at_edge {
        let tail = last_decade(d);
        let lo = tail.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        if w.value - lo <= FLAT_TAIL * w.value {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    } else {
        Verdict::Pass
    };
    let constant = match mu_norm {
        Some(m) if m > 0.0 => w.value / m,
        _ => w.value,
    };
    KolmogorovCheck { constant, sup: w.value, at: w.t, mu_norm, at_edge: w.at_edge, grid, verdict }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HvLimit {
    /// Mean of `t·m_f(t)` over the last grid decade.
    pub estimate: f64,
    /// Largest deviation from the mean on that decade.
    pub band: f64,
    pub t_from: f64,
    pub t_to: f64,
    /// `(2/π)‖μ_sing‖` when the source measure is known.
    pub predicted: Option<f64>,
    /// `‖μ_sing‖/π`, recorded but not enforced.
    pub stated: Option<f64>,
    pub verdict: Verdict,
}

/// Constant fit of `t·m_f(t)` on the last decade of the grid.
pub fn hv_limit(d: &DistributionFunction, singular_mass: Option<f64>) -> HvLimit {
    let tail = last_decade(d);
    let mean = tail.iter().map(|x| x.1).sum::<f64>() / tail.len() as f64;
    let band = tail.iter().map(|x| (x.1 - mean).abs()).fold(0.0, f64::max);
    let predicted = singular_mass.map(|m| 2.0 / PI * m);
    let verdict = if band > 0.2 * mean {
        Verdict::Inconclusive
    } else {
        match predicted {
            Some(p) if (mean - p).abs() > band + 0.02 * p + 1e-3 => Verdict::Fail,
            _ => Verdict::Pass,
        }
    };
    HvLimit {
        estimate: mean,
        band,
        t_from: tail[0].0,
        t_to: tail[tail.len() - 1].0,
        predicted,
        stated: singular_mass.map(|m| m / PI),
        verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealPartCheck {
    /// `∫ |Re f| dm` over the sampled angles.
    pub re_l1: f64,
    pub f0: Complex64,
    pub verdict: Verdict,
}

/// `Re f ∈ L¹` and `f(0) ∈ ℝ`.
pub fn check_real_part(f: &AnalyticFunction, s: &BoundarySamples) -> Result<RealPartCheck> {
    let f0 = f.eval(DiscPoint::origin())?;
    let re_l1 = (0..s.n()).filter(|&j| !s.is_blowup(j)).map(|j| s.boundary()[j].re.abs()).sum::<f64>() / s.n() as f64;
    let verdict = if re_l1.is_finite() && f0.im.abs() <= 1e-8 { Verdict::Pass } else { Verdict::Fail };
    Ok(RealPartCheck { re_l1, f0, verdict })
}

/// Finite proxy for `liminf_R R∫_R^∞ m_f(t)/t dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProxy {
    pub value: Option<f64>,
    pub at: Option<f64>,
    pub probes: Vec<f64>,
    pub note: Option<String>,
}

pub fn tail_proxy(d: &DistributionFunction) -> Result<TailProxy> {
    let g = GridInfo::of(d);
    let probes: Vec<f64> = TAIL_PROBES.iter().copied().filter(|r| (g.t_min..=g.t_max).contains(r)).collect();
    match liminf_probe(|r| tail_functional(d, r).map(|t| t.value), &probes) {
        Ok(p) => Ok(TailProxy { value: Some(p.value), at: Some(p.at), probes, note: None }),
        Err(Error::Divergent(m)) => Ok(TailProxy { value: None, at: None, probes, note: Some(m) }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpScalingReport {
    /// `(p, (1 − p)‖f‖_{Hᵖ})`
    pub probes: Vec<(f64, f64)>,
    pub proxy: f64,
    /// The tail functional diverges on the grid.
    pub tail_diverges: bool,
    /// The probe values increase towards `p = 1`.
    pub increasing: bool,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// `min_p (1 − p)‖f‖_{Hᵖ}` over `p_probes`.
pub fn hp_scaling(s: &BoundarySamples, p_probes: &[f64], tail_diverges: bool) -> HpScalingReport {
    let mut probes = Vec::with_capacity(p_probes.len());
    for &p in p_probes {
        match hp_quasinorm(s, p) {
            Ok(v) => probes.push((p, (1.0 - p) * v.value)),
            Err(e) => {
                return HpScalingReport {
                    probes,
                    proxy: f64::NAN,
                    tail_diverges,
                    increasing: false,
                    verdict: Verdict::Inconclusive,
                    note: Some(e.to_string()),
                }
            }
        }
    }
    let proxy = probes.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let increasing = probes.windows(2).all(|w| w[1].1 > w[0].1);
    let verdict = if proxy.is_finite() { Verdict::Pass } else { Verdict::Fail };
    HpScalingReport { probes, proxy, tail_diverges, increasing, verdict, note: None }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCertificate {
    pub smirnov: SmirnovCheck,
    pub real_part: RealPartCheck,
    pub tail: TailProxy,
    pub weak_l1: f64,
    pub mu_norm: Option<f64>,
    pub c_chain: f64,
    /// `‖Re f‖₁ + C_impl·(tail proxy)`.
    pub bound: Option<f64>,
    /// `(‖μ‖ − ‖Re f‖₁)/‖f‖₁,∞`, an empirical lower bound for the unknown
    /// constant relating total variation to the weak-L¹ norm.
    pub weak_ratio: Option<f64>,
    pub verdict: Verdict,
}

/// `‖μ‖ ≤ ‖Re f‖₁ + C·liminf R∫_R^∞ m_f(t)/t dt` together with the Smirnov
/// and real-part conditions.
pub fn mass_certificate(
    f: &AnalyticFunction,
    s: &BoundarySamples,
    d: &DistributionFunction,
) -> Result<MassCertificate> {
    let smirnov = check_smirnov(f, &smirnov_probe_points(), s)?;
    let real_part = check_real_part(f, s)?;
    let tail = tail_proxy(d)?;
    let weak_l1 = weak_l1_norm(d).value;
    let mu_norm = f.measure().map(total_variation).transpose()?;
    let bound = tail.value.map(|t| real_part.re_l1 + C_CHAIN * t);
    let weak_ratio = mu_norm.filter(|_| weak_l1 > 0.0).map(|m| (m - real_part.re_l1) / weak_l1);
    let inequality = match (mu_norm, bound) {
        (_, None) => Verdict::Inconclusive,
        (Some(m), Some(b)) if m > b * (1.0 + 1e-6) + 1e-9 => Verdict::Fail,
        _ => Verdict::Pass,
    };
    let verdict = Verdict::combine([smirnov.verdict, real_part.verdict, inequality]);
    Ok(MassCertificate { smirnov, real_part, tail, weak_l1, mu_norm, c_chain: C_CHAIN, bound, weak_ratio, verdict })
}

/// Sampling resolution for the condition report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOptions {
    pub n: usize,
    pub ladder: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub recovery_n: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            n: 1 << 16,
            ladder: DEFAULT_LADDER.to_vec(),
            t_min: 1e-4,
            t_max: 1e6,
            per_decade: 32,
            recovery_n: 1 << 15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdicts {
    pub smirnov: Verdict,
    pub kolmogorov: Verdict,
    pub hv_limit: Verdict,
    pub real_part: Verdict,
    pub mass_bound: Verdict,
    pub hp_scaling: Verdict,
    pub recovery: Verdict,
}

impl Verdicts {
    pub fn condition(&self, c: Condition) -> Verdict {
        match c {
            Condition::Smirnov => self.smirnov,
            Condition::Kolmogorov => self.kolmogorov,
            Condition::HvLimit => self.hv_limit,
            Condition::RealPart => self.real_part,
        }
    }
}

/// Everything known about one function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub function: String,
    pub options: ReportOptions,
    pub grid: GridInfo,
    pub blowup_fraction: f64,
    pub smirnov_defect: f64,
    pub kolmogorov: KolmogorovCheck,
    pub hv_limit: HvLimit,
    pub re_f_l1_norm: f64,
    pub f0: Complex64,
    pub tail_liminf_proxy: TailProxy,
    pub hp_scaling: HpScalingReport,
    pub mass_bound: MassCertificate,
    pub recovery: Option<Recovery>,
    pub verdicts: Verdicts,
    /// Combined verdict over the four conditions and the mass bound.
    pub overall: Verdict,
}

impl ConditionReport {
    /// `(condition, verdict, value)` rows for the summary table.
    pub fn summary_rows(&self) -> Vec<(&'static str, Verdict, f64)> {
        let v = &self.verdicts;
        vec![
            ("smirnov", v.smirnov, self.smirnov_defect),
            ("kolmogorov", v.kolmogorov, self.kolmogorov.constant),
            ("hv-limit", v.hv_limit, self.hv_limit.estimate),
            ("real-part", v.real_part, self.re_f_l1_norm),
            ("mass-bound", v.mass_bound, self.mass_bound.bound.unwrap_or(f64::NAN)),
            ("hp-scaling", v.hp_scaling, self.hp_scaling.proxy),
            ("recovery", v.recovery, self.recovery.as_ref().map_or(f64::NAN, |r| r.total_mass)),
            ("overall", self.overall, f64::NAN),
        ]
    }
}

/// Run every check on `f`.
pub fn condition_report(f: &AnalyticFunction, opts: &ReportOptions) -> Result<ConditionReport> {
    let s = sample_boundary(f, opts.n, &opts.ladder)?;
    let d = distribution_function(&s, &log_grid(opts.t_min, opts.t_max, opts.per_decade))?;
    let mu = f.measure();
    let mu_norm = mu.map(total_variation).transpose()?;
    let kolmogorov = check_kolmogorov(&d, mu_norm);
    let hv = hv_limit(&d, mu.map(|m| m.singular_variation()));
    let mass_bound = mass_certificate(f, &s, &d)?;
    let hp_scaling = hp_scaling(&s, &HP_SCALING_PROBES, mass_bound.tail.value.is_none());
    let recovery = match mu {
        Some(_) => Some(recover_measure(f, &RECOVERY_LADDER, opts.recovery_n)?),
        None => None,
    };
    let recovery_verdict = match (&recovery, mu, mu_norm) {
        (Some(r), Some(m), Some(norm)) => {
            let err = (r.total_mass - m.total_mass()?.re).abs();
            let mass = if err <= RECOVERY_MASS_TOL * norm { Verdict::Pass } else { Verdict::Fail };
            Verdict::combine([r.verdict, mass])
        }
        _ => Verdict::Inconclusive,
    };
    let verdicts = Verdicts {
        smirnov: mass_bound.smirnov.verdict,
        kolmogorov: kolmogorov.verdict,
        hv_limit: hv.verdict,
        real_part: mass_bound.real_part.verdict,
        mass_bound: mass_bound.verdict,
        hp_scaling: hp_scaling.verdict,
        recovery: recovery_verdict,
    };
    let overall = Verdict::combine([
        verdicts.smirnov,
        verdicts.kolmogorov,
        verdicts.hv_limit,
        verdicts.real_part,
        verdicts.mass_bound,
    ]);
    Ok(ConditionReport {
        function: f.name().to_string(),
        options: opts.clone(),
        grid: GridInfo::of(&d),
        blowup_fraction: s.fraction(SampleFlag::BlowUp),
        smirnov_defect: mass_bound.smirnov.defect,
        kolmogorov,
        hv_limit: hv,
        re_f_l1_norm: mass_bound.real_part.re_l1,
        f0: mass_bound.real_part.f0,
        tail_liminf_proxy: mass_bound.tail.clone(),
        hp_scaling,
        mass_bound,
        recovery,
        verdicts,
        overall,
    })
}

/// CSV with columns `function,condition,verdict,value`.
pub fn summary_csv(reports: &[ConditionReport]) -> String {
    let mut out = String::from("function,condition,verdict,value\n");
    for r in reports {
        for (c, v, x) in r.summary_rows() {
            out.push_str(&format!("{},{c},{},{x:.10e}\n", r.function, v.as_str()));
        }
    }
    out
}
