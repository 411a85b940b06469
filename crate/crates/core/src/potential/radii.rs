use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{run_walks, HitSample, MonteCarloEstimate, SlitDomain, WalkConfig, WalkOutcome, MIN_ABSORBED};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// The slit `[i, 2i]` together with the half-line `[i r, i∞)`.
fn two_slit(r: f64) -> Result<SlitDomain> {
    SlitDomain::new(&[(1.0, 2.0)], Some(r))
}

fn half_line_estimate(outcomes: &[WalkOutcome], seed: u64) -> Result<MonteCarloEstimate> {
    HitSample { outcomes: outcomes.to_vec(), seed }.fraction(|_, slit| slit == 1)
}

/// `h(0)` for the half-line starting at `r`: the fraction of walks from 0
/// absorbed on `[i r, i∞)` rather than on `[i, 2i]`.
pub fn h_n_value(r: f64, cfg: &WalkConfig) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    let d = two_slit(r)?;
    let sample = HitSample::run(Complex64::new(0.0, 0.0), &d, cfg, "h_n", r.to_bits())?;
    sample.fraction(|_, slit| slit == 1)
}

/// Search settings for [`choose_radii`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiiOptions {
    /// Largest candidate radius tried before giving up.
    pub cap: f64,
    /// Walks per batch; a candidate is dropped as soon as its lower
    /// confidence bound clears the threshold.
    pub batch: u64,
    /// Width of the confidence bounds in standard errors.
    pub sigmas: f64,
}

impl Default for RadiiOptions {
    fn default() -> Self {
        RadiiOptions { cap: 1e200, batch: 10_000, sigmas: 3.0 }
    }
}

/// One tried radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub r: f64,
    /// `None` when too few walks were absorbed.
    pub estimate: Option<MonteCarloEstimate>,
    pub walks: u64,
    pub upper: f64,
    pub accepted: bool,
}

/// Certificate for `r_{n+1}`: `h_{n+1}(0) + 3σ ≤ r_n^{−2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub n: usize,
    pub threshold: f64,
    pub radius: f64,
    pub estimate: MonteCarloEstimate,
    pub upper: f64,
    pub history: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiCertificate {
    pub radii: Vec<f64>,
    pub generations: Vec<Generation>,
    pub options: RadiiOptions,
    pub config: WalkConfig,
}

impl RadiiCertificate {
    /// `E = ⋃ [i r_n, 2 i r_n]`.
    pub fn domain(&self) -> Result<SlitDomain> {
        let slits: Vec<(f64, f64)> = self.radii.iter().map(|&r| (r, 2.0 * r)).collect();
        SlitDomain::new(&slits, None)
    }
}

fn test_candidate(
    r: f64,
    threshold: f64,
    cfg: &WalkConfig,
    opts: &RadiiOptions,
    seed: u64,
) -> Result<(Candidate, Option<MonteCarloEstimate>)> {
    let d = two_slit(r)?;
    let z0 = Complex64::new(0.0, 0.0);
    let mut outcomes = Vec::with_capacity(cfg.n_walks as usize);
    while (outcomes.len() as u64) < cfg.n_walks {
        let start = outcomes.len() as u64;
        let end = (start + opts.batch).min(cfg.n_walks);
        outcomes.extend(run_walks(z0, &d, cfg, seed, start..end));
        let done = end == cfg.n_walks;
        match half_line_estimate(&outcomes, seed) {
            Ok(e) if e.lower(opts.sigmas) > threshold || done => {
                let upper = e.upper(opts.sigmas);
                let accepted = done && upper <= threshold;
                let c = Candidate { r, estimate: Some(e), walks: end, upper, accepted };
                return Ok((c, accepted.then_some(e)));
            }
            Err(Error::InsufficientSamples { .. }) if done => {
                return Ok((Candidate { r, estimate: None, walks: end, upper: f64::INFINITY, accepted: false }, None));
            }
            Ok(_) | Err(Error::InsufficientSamples { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    unreachable!("n_walks is positive")
}

fn failure(n: usize, threshold: f64, history: &[Candidate], why: &str) -> Error {
    let best = history.iter().map(|c| c.upper).fold(f64::INFINITY, f64::min);
    let tried: Vec<String> = history
        .iter()
        .map(|c| match c.estimate {
            Some(e) => format!("{:e}:{:.3e}±{:.1e}", c.r, e.value, e.standard_error),
            None => format!("{:e}:insufficient", c.r),
        })
        .collect();
    Error::SearchFailed(format!(
        "generation {n}: {why}; threshold {threshold:e}, {} candidates, best upper bound {best:e}; history [{}]",
        history.len(),
        tried.join(", ")
    ))
}

/// Radii `r₁ = 1 < r₂ < … < r_N` where each `r_{n+1}` is the first of
/// `10 r_n, 20 r_n, 40 r_n, …` whose estimate of `h_{n+1}(0)` has an upper
/// confidence bound at most `r_n^{−2}`.
pub fn choose_radii(generations: usize, cfg: &WalkConfig, opts: &RadiiOptions) -> Result<RadiiCertificate> {
    if generations == 0 {
        return Err(Error::InvalidArgument("need at least one generation".into()));
    }
    if !(cfg.epsilon > 0.0) || cfg.n_walks == 0 || opts.batch == 0 {
        return Err(Error::InvalidArgument("epsilon, n_walks and batch must be positive".into()));
    }
    let mut radii: Vec<f64> = vec![1.0];
    let mut gens = Vec::new();
    for n in 1..generations {
        let rn = radii[n - 1];
        let threshold = rn.powi(-2);
        let mut history = Vec::new();
        if opts.sigmas / cfg.n_walks as f64 > threshold {
            return Err(failure(
                n,
                threshold,
                &history,
                &format!("{} walks cannot resolve the threshold", cfg.n_walks),
            ));
        }
        let mut r = 10.0 * rn;
        let mut k: u64 = 0;
        let found = loop {
            if r > opts.cap {
                break None;
            }
            let seed = derive_seed(cfg.seed, "h_n", ((n as u64) << 32) | k);
            let (c, accepted) = test_candidate(r, threshold, cfg, opts, seed)?;
            history.push(c);
            if let Some(e) = accepted {
                break Some(e);
            }
            r *= 2.0;
            k += 1;
        };
        let Some(estimate) = found else {
            return Err(failure(n, threshold, &history, &format!("candidate exceeded {:e}", opts.cap)));
        };
        let upper = estimate.upper(opts.sigmas);
        radii.push(r);
        gens.push(Generation { n, threshold, radius: r, estimate, upper, history });
    }
    Ok(RadiiCertificate { radii, generations: gens, options: *opts, config: *cfg })
}

/// `t·ω(t)` at one probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub t: f64,
    pub omega: MonteCarloEstimate,
    pub t_omega: f64,
    /// `t·(ω + 3σ)`.
    pub t_omega_upper: f64,
}

/// `t·ω(t)` at each probe, all probes sharing one set of walks from 0.
pub fn liminf_t_omega(d: &SlitDomain, probes: &[f64], cfg: &WalkConfig) -> Result<Vec<ProbePoint>> {
    let sample = HitSample::run(Complex64::new(0.0, 0.0), d, cfg, "omega", 0)?;
    if sample.absorbed() < MIN_ABSORBED {
        return Err(Error::InsufficientSamples { absorbed: sample.absorbed(), required: MIN_ABSORBED });
    }
    probes
        .iter()
        .map(|&t| {
            let omega = sample.fraction(|h, _| h >= t)?;
            Ok(ProbePoint {
                t,
                omega,
                t_omega: t * omega.value,
                t_omega_upper: t * (omega.value + 3.0 * omega.standard_error),
            })
        })
        .collect()
}

/// One dyadic block `2ⁿ ≤ |z| < 2^{n+1}` of the Wiener series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WienerTerm {
    pub n: u32,
    pub pieces: usize,
    /// Length of the largest slit piece in the block.
    pub length: f64,
    /// `length/4`; a lower bound for the capacity when `pieces > 1`.
    pub capacity: f64,
    /// `n / log(2/capacity)`, 0 for an empty block.
    pub term: f64,
    pub lower_bound: bool,
}

/// Terms `n/log(2/c(E_n))` for blocks `n = 0, …, blocks − 1`.
pub fn wiener_series_terms(d: &SlitDomain, blocks: u32) -> Vec<WienerTerm> {
    (0..blocks)
        .map(|n| {
            let lo = 2f64.powi(n as i32);
            let hi = 2.0 * lo;
            let lens: Vec<f64> = d.slits().iter().map(|s| s.b.min(hi) - s.a.max(lo)).filter(|&l| l > 0.0).collect();
            let length = lens.iter().copied().fold(0.0, f64::max);
            let capacity = length / 4.0;
            let term = if lens.is_empty() { 0.0 } else { n as f64 / (2.0 / capacity).ln() };
            WienerTerm { n, pieces: lens.len(), length, capacity, term, lower_bound: lens.len() > 1 }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u64, seed: u64) -> WalkConfig {
        WalkConfig { epsilon: 1e-3, n_walks: n, ..WalkConfig::new(seed) }
    }

    #[test]
    fn h_decreases() {
        let c = cfg(20_000, 3);
        let h: Vec<MonteCarloEstimate> = [10.0, 1e2, 1e3].iter().map(|&r| h_n_value(r, &c).unwrap()).collect();
        for w in h.windows(2) {
            assert!(w[1].value < w[0].value + 3.0 * (w[0].standard_error + w[1].standard_error), "{h:?}");
        }
        let s = (h[0].standard_error.powi(2) + h[2].standard_error.powi(2)).sqrt();
        assert!(h[2].value < h[0].value - 3.0 * s);
        let adjacent = h_n_value(2.0, &c).unwrap();
        assert!(adjacent.value > 0.0 && adjacent.value < 1.0);
    }

    #[test]
    fn two_generations() {
        let c = choose_radii(2, &cfg(2000, 5), &RadiiOptions { batch: 1000, ..Default::default() }).unwrap();
        assert_eq!(c.radii, vec![1.0, 10.0]);
        assert!(c.generations[0].upper <= 1.0);
        assert_eq!(choose_radii(1, &cfg(2000, 5), &RadiiOptions::default()).unwrap().radii, vec![1.0]);
    }

    #[test]
    fn noisy_search_fails_with_history() {
        let c = WalkConfig { n_walks: 100, ..cfg(100, 1) };
        let e = choose_radii(3, &c, &RadiiOptions::default()).unwrap_err();
        assert!(matches!(&e, Error::SearchFailed(m) if m.contains("generation 2")), "{e}");
        let e = choose_radii(3, &cfg(2000, 1), &RadiiOptions { cap: 300.0, batch: 1000, ..Default::default() })
            .unwrap_err();
        assert!(matches!(&e, Error::SearchFailed(m) if m.contains("2 candidates")), "{e}");
    }

    #[test]
    fn batching_does_not_change_walks() {
        let c = cfg(3000, 9);
        let seed = derive_seed(9, "h_n", 1);
        let (a, _) =
            test_candidate(40.0, f64::INFINITY, &c, &RadiiOptions { batch: 3000, ..Default::default() }, seed).unwrap();
        let (b, _) =
            test_candidate(40.0, f64::INFINITY, &c, &RadiiOptions { batch: 700, ..Default::default() }, seed).unwrap();
        assert_eq!(a.walks, 3000);
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn probes_on_single_slit() {
        let d = SlitDomain::new(&[(1.0, 2.0)], None).unwrap();
        let p = liminf_t_omega(&d, &[0.5, 2.0, 3.0], &cfg(2000, 2)).unwrap();
        assert_eq!(p[0].t_omega, 0.5);
        assert_eq!(p[1].t_omega, 0.0);
        assert_eq!(p[2].t_omega, 0.0);
    }

    #[test]
    fn wiener_blocks() {
        let d = SlitDomain::new(&[(16.0, 32.0)], None).unwrap();
        let t = wiener_series_terms(&d, 6);
        assert_eq!(t[3].term, 0.0);
        assert_eq!(t[4].length, 16.0);
        assert!((t[4].term - 4.0 / (8.0f64 / 16.0).ln()).abs() < 1e-15);
        assert!(!t[4].lower_bound);
        let d = SlitDomain::new(&[(1.0, 2.0), (10.0, 20.0), (10240.0, 20480.0)], None).unwrap();
        let t = wiener_series_terms(&d, 16);
        assert_eq!(t[3].length, 6.0);
        assert_eq!(t[4].length, 4.0);
        assert_eq!(t[8].term, 0.0);
        for w in t.iter().filter(|w| w.pieces > 0 && w.n >= 4) {
            assert!(w.term.abs() >= 0.5 / 2f64.ln(), "{w:?}");
        }
        let two = SlitDomain::new(&[(16.0, 17.0), (20.0, 25.0)], None).unwrap();
        let t = wiener_series_terms(&two, 5);
        assert!(t[4].lower_bound && t[4].length == 5.0);
        let eight = SlitDomain::new(&[(16.0, 24.0)], None).unwrap();
        assert!(wiener_series_terms(&eight, 5)[4].term.is_infinite());
    }
}
