//! Harmonic measure of unions of vertical slits by walk on spheres.
//!
//! A domain is the complement of a finite union of segments `[i a_k, i b_k]`
//! on the positive imaginary axis, optionally ending in a half-line
//! `[i a, i∞)`. Walks jump to a uniform point on the largest circle that
//! avoids the slits and stop once within `ε` of one; the hit point is the
//! nearest slit point.

mod oracle;
mod radii;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_f64, Document};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, walk_stream};

pub use oracle::{single_slit_oracle, single_slit_quadrature};
pub use radii::{
    choose_radii, h_n_value, liminf_t_omega, wiener_series_terms, Candidate, Generation, ProbePoint, RadiiCertificate,
    RadiiOptions, WienerTerm,
};

/// One vertical slit `[i a, i b]`; `b = ∞` for a half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub a: f64,
    pub b: f64,
}

impl Slit {
    pub fn is_halfline(&self) -> bool {
        self.b.is_infinite()
    }

    /// Distance from `z` and the height of the nearest slit point. A point
    /// above a finite slit is assigned the height just below the tip, since
    /// exit points near the tip lie on the slit.
    fn nearest(&self, z: Complex64) -> (f64, f64) {
        let y = z.im.clamp(self.a, self.b);
        let d = (z.re * z.re + (z.im - y) * (z.im - y)).sqrt();
        if z.im > self.b {
            (d, self.b.next_down())
        } else {
            (d, y)
        }
    }
}

/// Complement of a union of disjoint vertical slits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitDomain {
    slits: Vec<Slit>,
}

impl SlitDomain {
    /// Finite slits `(a_k, b_k)` with `0 < a_k < b_k`, increasing and disjoint
    /// apart from shared endpoints, followed by an optional half-line starting above all of them.
    pub fn new(slits: &[(f64, f64)], halfline: Option<f64>) -> Result<Self> {
        let mut out: Vec<Slit> = Vec::with_capacity(slits.len() + 1);
        for &(a, b) in slits {
            if !(a > 0.0 && b > a && b.is_finite()) {
                return Err(Error::InvalidDomain(format!("slit ({a}, {b}) needs 0 < a < b < ∞")));
            }
            out.push(Slit { a, b });
        }
        if let Some(a) = halfline {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidDomain(format!("half-line start {a} must be positive")));
            }
            out.push(Slit { a, b: f64::INFINITY });
        }
        if out.is_empty() {
            return Err(Error::InvalidDomain("no slits".into()));
        }
        for w in out.windows(2) {
            if w[1].a < w[0].b {
                return Err(Error::InvalidDomain(format!(
                    "slits [{}, {}] and [{}, {}] overlap or are out of order",
                    w[0].a, w[0].b, w[1].a, w[1].b
                )));
            }
        }
        Ok(SlitDomain { slits: out })
    }

    pub fn slits(&self) -> &[Slit] {
        &self.slits
    }

    /// Parse lines `slit a b` and `halfline a`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let mut slits = Vec::new();
        let mut halfline = None;
        let mut last_line = 0;
        for s in &doc.sections {
            if !s.name.is_empty() || !s.entries.is_empty() {
                let line = s.entries.first().map(|e| e.0).unwrap_or(0);
                return Err(Error::Parse {
                    line,
                    message: "domain files contain only `slit` and `halfline` lines".into(),
                });
            }
            for (line, text) in &s.lines {
                last_line = *line;
                let cols: Vec<&str> = text.split_whitespace().collect();
                if halfline.is_some() {
                    return Err(Error::Parse { line: *line, message: "the half-line must come last".into() });
                }
                match cols.as_slice() {
                    ["slit", a, b] => slits.push((parse_f64(*line, a)?, parse_f64(*line, b)?)),
                    ["halfline", a] => halfline = Some(parse_f64(*line, a)?),
                    _ => {
                        return Err(Error::Parse {
                            line: *line,
                            message: format!("expected `slit a b` or `halfline a`, found `{text}`"),
                        })
                    }
                }
            }
        }
        SlitDomain::new(&slits, halfline).map_err(|e| Error::Parse { line: last_line, message: e.to_string() })
    }

    /// Render in the file format read by [`SlitDomain::parse`].
    pub fn render(&self) -> String {
        self.slits
            .iter()
            .map(
                |s| {
                    if s.is_halfline() {
                        format!("halfline {:e}\n", s.a)
                    } else {
                        format!("slit {:e} {:e}\n", s.a, s.b)
                    }
                },
            )
            .collect()
    }

    /// Exact distance to the union of slits, the nearest slit and the height
    /// of the nearest point on it.
    pub fn nearest(&self, z: Complex64) -> (f64, usize, f64) {
        let mut best = (f64::INFINITY, 0, 0.0);
        for (k, s) in self.slits.iter().enumerate() {
            let (d, y) = s.nearest(z);
            if d < best.0 {
                best = (d, k, y);
            }
        }
        best
    }
}

/// Distance from `z` to the slits.
pub fn distance_to_domain_boundary(z: Complex64, d: &SlitDomain) -> f64 {
    d.nearest(z).0
}

/// Walk parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Absorption shell radius.
    pub epsilon: f64,
    pub max_steps: u64,
    pub n_walks: u64,
    pub seed: u64,
    /// Walks that leave this radius are counted as far excursions; they are
    /// never stopped because of it.
    pub far_field_radius: f64,
}

impl WalkConfig {
    pub fn new(seed: u64) -> Self {
        WalkConfig { epsilon: 1e-4, max_steps: 100_000, n_walks: 100_000, seed, far_field_radius: 1e6 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon {} must be positive", self.epsilon)));
        }
        if self.n_walks < 1000 {
            return Err(Error::InvalidArgument(format!("n_walks {} below 1000", self.n_walks)));
        }
        Ok(())
    }
}

/// Outcome of a single walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WalkOutcome {
    Hit { height: f64, slit: usize, steps: u64, far: bool },
    Timeout { far: bool },
}

/// Shells thinner than this relative to `|z|` cannot be resolved in double
/// precision; the absorption radius never drops below it.
const RELATIVE_SHELL: f64 = 1e-14;

/// Run one walk from `z0`.
pub fn walk_on_spheres<R: Rng>(z0: Complex64, d: &SlitDomain, cfg: &WalkConfig, rng: &mut R) -> WalkOutcome {
    let mut z = z0;
    let mut far = false;
    for step in 0..cfg.max_steps {
        let (dist, slit, height) = d.nearest(z);
        if dist < cfg.epsilon.max(RELATIVE_SHELL * z.norm()) {
            return WalkOutcome::Hit { height, slit, steps: step, far };
        }
        let phi = rng.gen::<f64>() * 2.0 * PI;
        z += Complex64::from_polar(dist, phi);
        far |= z.norm() > cfg.far_field_radius;
    }
    WalkOutcome::Timeout { far }
}

/// Walk outcomes in walk order; walk `k` uses stream `k` of the seed derived
/// from `(cfg.seed, label, index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HitSample {
    pub outcomes: Vec<WalkOutcome>,
    pub seed: u64,
}

/// Run walks `range` from `z0`.
pub fn run_walks(
    z0: Complex64,
    d: &SlitDomain,
    cfg: &WalkConfig,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Vec<WalkOutcome> {
    range.into_par_iter().map(|k| walk_on_spheres(z0, d, cfg, &mut walk_stream(seed, k))).collect()
}

impl HitSample {
    pub fn run(z0: Complex64, d: &SlitDomain, cfg: &WalkConfig, label: &str, index: u64) -> Result<Self> {
        cfg.validate()?;
        let seed = derive_seed(cfg.seed, label, index);
        Ok(HitSample { outcomes: run_walks(z0, d, cfg, seed, 0..cfg.n_walks), seed })
    }

    pub fn absorbed(&self) -> u64 {
        self.outcomes.iter().filter(|o| matches!(o, WalkOutcome::Hit { .. })).count() as u64
    }

    pub fn timeouts(&self) -> u64 {
        self.outcomes.len() as u64 - self.absorbed()
    }

    pub fn far_excursions(&self) -> u64 {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, WalkOutcome::Hit { far: true, .. } | WalkOutcome::Timeout { far: true }))
            .count() as u64
    }

    /// Hits per slit.
    pub fn slit_counts(&self, n_slits: usize) -> Vec<u64> {
        let mut c = vec![0; n_slits];
        for o in &self.outcomes {
            if let WalkOutcome::Hit { slit, .. } = o {
                c[*slit] += 1;
            }
        }
        c
    }

    /// Fraction of absorbed walks whose hit point satisfies `pred(height, slit)`.
    pub fn fraction<P: Fn(f64, usize) -> bool>(&self, pred: P) -> Result<MonteCarloEstimate> {
        let n = self.absorbed();
        if n < MIN_ABSORBED {
            return Err(Error::InsufficientSamples { absorbed: n, required: MIN_ABSORBED });
        }
        let k = self
            .outcomes
            .iter()
            .filter(|o| matches!(o, WalkOutcome::Hit { height, slit, .. } if pred(*height, *slit)))
            .count() as u64;
        Ok(MonteCarloEstimate::from_counts(k, n, self.timeouts(), self.seed))
    }
}

/// Fewest absorbed walks an estimate may rest on.
pub const MIN_ABSORBED: u64 = 100;

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub standard_error: f64,
    /// Absorbed walks (the denominator).
    pub n_walks: u64,
    pub n_timeouts: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_counts(hits: u64, absorbed: u64, timeouts: u64, seed: u64) -> Self {
        let p = hits as f64 / absorbed as f64;
        MonteCarloEstimate {
            value: p,
            standard_error: (p * (1.0 - p) / absorbed as f64).sqrt(),
            n_walks: absorbed,
            n_timeouts: timeouts,
            seed,
        }
    }

    /// `value + k·max(σ, 1/n)`; the floor keeps a zero count from certifying
    /// more than the sample size allows.
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.standard_error.max(1.0 / self.n_walks as f64)
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.standard_error.max(1.0 / self.n_walks as f64)
    }
}

/// `ω(z0, E ∩ {|z| ≥ t}, ℂ \ E)`.
pub fn omega_tail(t: f64, d: &SlitDomain, z0: Complex64, cfg: &WalkConfig) -> Result<MonteCarloEstimate> {
    let sample = HitSample::run(z0, d, cfg, "omega", 0)?;
    sample.fraction(|h, _| h >= t)
}

/// CSV with columns `t,omega,stderr`.
pub fn omega_curve_csv(points: &[(f64, MonteCarloEstimate)]) -> String {
    let mut out = String::from("t,omega,stderr\n");
    for (t, e) in points {
        out.push_str(&format!("{t:.16e},{:.16e},{:.16e}\n", e.value, e.standard_error));
    }
    out
}
