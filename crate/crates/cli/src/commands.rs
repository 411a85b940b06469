use std::fmt::Write as _;
use std::path::Path;

use clap::Args;
use num_complex::Complex64;
use serde_json::json;

use schwarzlab::boundary::{distribution_function, sample_boundary, weak_l1_norm, AnalyticFunction};
use schwarzlab::logdet::{
    angular_kernel_identity, inequality_chain, p_power_identity, AxisOptions, LogDet, LogDetProfile,
};
use schwarzlab::measure::parse_measure;
use schwarzlab::potential::{
    choose_radii, liminf_t_omega, omega_curve_csv, single_slit_oracle, wiener_series_terms, HitSample, RadiiOptions,
    SlitDomain,
};
use schwarzlab::verdict::{
    catalog, catalog_entry, condition_report, construct_tail_counterexample, summary_csv, tail_proxy, ReportOptions,
    Verdict,
};

use crate::output::{to_json, write_atomic, write_table};
use crate::settings::RunConfig;
use crate::{CliError, Source};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("{what}: `{}`: {e}", x.trim()))))
        .collect()
}

fn measure_function(path: &Path) -> Result<AnalyticFunction, CliError> {
    let mu = parse_measure(&read(path)?)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("measure");
    Ok(AnalyticFunction::schwarz(mu).named(name))
}

fn catalog_function(name: &str) -> Result<AnalyticFunction, CliError> {
    catalog_entry(name).map(|e| e.function).ok_or_else(|| {
        let names: Vec<&str> = catalog().iter().map(|e| e.name).collect();
        CliError::Usage(format!("unknown catalog entry `{name}`; known: {}", names.join(", ")))
    })
}

fn function(source: &Source) -> Result<AnalyticFunction, CliError> {
    match (&source.measure, &source.catalog) {
        (Some(p), _) => measure_function(p),
        (None, Some(n)) => catalog_function(n),
        (None, None) => Err(CliError::Usage("give --measure or --catalog".into())),
    }
}

pub fn transform(cfg: &RunConfig, measure: &Path, radii: &str, angles: usize) -> Result<Verdict, CliError> {
    let f = measure_function(measure)?;
    let radii = floats(radii, "radii")?;
    if angles == 0 || radii.is_empty() {
        return Err(CliError::Usage("the disc grid is empty".into()));
    }
    let s = sample_boundary(&f, cfg.n, &cfg.ladder)?;
    write_table(cfg, "boundary", &s.to_csv())?;
    let mut disc = String::from("r,theta,re,im\n");
    for r in radii {
        for (j, v) in f.eval_circle(r, angles)?.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
            writeln!(disc, "{r:.16e},{theta:.16e},{:.16e},{:.16e}", v.re, v.im).unwrap();
        }
    }
    write_table(cfg, "disc", &disc)?;
    Ok(Verdict::Pass)
}

pub fn distribution(cfg: &RunConfig, source: &Source) -> Result<Verdict, CliError> {
    let f = function(source)?;
    let s = sample_boundary(&f, cfg.n, &cfg.ladder)?;
    let d = distribution_function(&s, &cfg.t_grid())?;
    write_table(cfg, "distribution", &d.to_csv())?;
    let w = weak_l1_norm(&d);
    let tail = tail_proxy(&d)?;
    let summary = json!({
        "function": f.name(),
        "n": cfg.n,
        "ladder": cfg.ladder,
        "blowup_fraction": d.blowup_fraction(),
        "weak_l1": { "value": w.value, "t": w.t, "at_edge": w.at_edge },
        "tail_constant": d.tail_constant(),
        "tail_liminf_proxy": tail,
    });
    write_atomic(&cfg.path("distribution-summary.json"), &to_json(&summary)?)?;
    Ok(Verdict::Pass)
}

pub fn logdet(cfg: &RunConfig, source: &Source, slack: f64) -> Result<Verdict, CliError> {
    let f = function(source)?;
    let s = sample_boundary(&f, cfg.n, &cfg.ladder)?;
    let d = distribution_function(&s, &cfg.t_grid())?;
    let ld = LogDet::new(&s)?;
    let axis: Vec<f64> = schwarzlab::boundary::log_grid(1e-2, 1e2, 8);
    let profile = LogDetProfile::evaluate(&ld, LogDetProfile::standard_points(&axis, &[0.5, 1.0, 2.0], 64));
    write_table(cfg, "logdet", &profile.to_csv())?;
    let chain = inequality_chain(&s, &d, AxisOptions::default(), slack)?;
    let report = json!({ "function": f.name(), "n": cfg.n, "slack": slack, "u_min": profile.min(), "chain": chain });
    write_atomic(&cfg.path("chain.json"), &to_json(&report)?)?;
    Ok(if chain.first && chain.second { Verdict::Pass } else { Verdict::Fail })
}

#[derive(Debug, Clone, Args)]
pub struct IdentityArgs {
    /// Radius grid `lo,hi,count` (log spaced)
    #[arg(long, default_value = "0.01,100,20")]
    pub r_grid: String,
    /// t grid `lo,hi,count` (log spaced)
    #[arg(long, default_value = "0.01,100,20")]
    pub t_grid: String,
    /// `re:im:p` triples separated by commas; defaults to 12 pairs
    #[arg(long)]
    pub pairs: Option<String>,
    /// Relative tolerance of the sweep
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Skip the p = 0.999 stress row
    #[arg(long)]
    pub no_stress: bool,
}

fn log_points(src: &str) -> Result<Vec<f64>, CliError> {
    let v = floats(src, "grid")?;
    let [lo, hi, count] = v[..] else {
        return Err(CliError::Usage(format!("grid `{src}` must be lo,hi,count")));
    };
    let count = count as usize;
    if count == 0 || !(lo > 0.0 && hi >= lo) {
        return Err(CliError::Usage(format!("grid `{src}` is empty")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count).map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64)).collect())
}

/// The default `(λ, p)` pairs: four imaginary multipliers times three
/// exponents.
fn default_pairs() -> Vec<(Complex64, f64)> {
    let lambdas = [0.5, 1.0, 2.0, -3.0].map(|m| Complex64::new(0.0, m));
    lambdas.iter().flat_map(|&l| [0.2, 0.5, 0.9].map(|p| (l, p))).collect()
}

fn parse_pairs(src: &str) -> Result<Vec<(Complex64, f64)>, CliError> {
    src.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|t| {
            let v = floats(&t.replace(':', ","), "pairs")?;
            match v[..] {
                [re, im, p] => Ok((Complex64::new(re, im), p)),
                _ => Err(CliError::Usage(format!("pair `{t}` must be re:im:p"))),
            }
        })
        .collect()
}

pub fn identities(cfg: &RunConfig, a: &IdentityArgs) -> Result<Verdict, CliError> {
    let rs = log_points(&a.r_grid)?;
    let ts = log_points(&a.t_grid)?;
    let pairs = match &a.pairs {
        Some(p) => parse_pairs(p)?,
        None => default_pairs(),
    };
    if pairs.is_empty() {
        return Err(CliError::Usage("no (λ, p) pairs".into()));
    }
    let mut csv = String::from("identity,a,b,c,lhs,rhs,rel_err,tol,pass,note\n");
    let mut all = true;
    for &r in &rs {
        for &t in &ts {
            let c = angular_kernel_identity(r, t, a.tol)?;
            all &= c.pass;
            writeln!(
                csv,
                "angular,{r:e},{t:e},,{:.16e},{:.16e},{:.3e},{:e},{},",
                c.lhs, c.rhs, c.rel_err, a.tol, c.pass
            )
            .unwrap();
        }
    }
    let mut rows: Vec<(Complex64, f64, f64, &str)> = pairs.into_iter().map(|(l, p)| (l, p, a.tol, "")).collect();
    if !a.no_stress {
        rows.push((Complex64::new(0.0, 1.0), 0.999, 1e-2, "stress row: cot(πp/2) is nearly zero"));
    }
    for (l, p, tol, note) in rows {
        let c = p_power_identity(l, p, tol)?;
        all &= c.pass;
        writeln!(
            csv,
            "p-power,{:e},{:e},{p},{:.16e},{:.16e},{:.3e},{tol:e},{},{note}",
            l.re, l.im, c.lhs, c.rhs, c.rel_err, c.pass
        )
        .unwrap();
    }
    write_table(cfg, "identities", &csv)?;
    Ok(if all { Verdict::Pass } else { Verdict::Fail })
}

fn point(s: &str) -> Result<Complex64, CliError> {
    match floats(s, "z0")?[..] {
        [x, y] => Ok(Complex64::new(x, y)),
        _ => Err(CliError::Usage(format!("start point `{s}` must be x,y"))),
    }
}

pub fn wos(cfg: &RunConfig, domain: &Path, t: &str, z0: &str, segment: Option<&str>) -> Result<Verdict, CliError> {
    let wc = cfg.walk_config()?;
    let d = SlitDomain::parse(&read(domain)?)?;
    let ts = floats(t, "t")?;
    if ts.is_empty() {
        return Err(CliError::Usage("no thresholds t".into()));
    }
    let z0 = point(z0)?;
    let sample = HitSample::run(z0, &d, &wc, "omega", 0)?;
    let mut curve = Vec::with_capacity(ts.len());
    for &t in &ts {
        curve.push((t, sample.fraction(|h, _| h >= t)?));
    }
    write_atomic(&cfg.path("omega.csv"), &omega_curve_csv(&curve))?;
    let segment = match segment {
        None => serde_json::Value::Null,
        Some(s) => {
            let [c, dd] = floats(s, "segment")?[..] else {
                return Err(CliError::Usage(format!("segment `{s}` must be c,d")));
            };
            let e = sample.fraction(|h, k| k == 0 && h >= c && h <= dd)?;
            let first = d.slits()[0];
            let oracle = if d.slits().len() == 1 && !first.is_halfline() {
                Some(single_slit_oracle(z0, (first.a, first.b), (c, dd))?)
            } else {
                None
            };
            json!({ "c": c, "d": dd, "estimate": e.value, "stderr": e.standard_error, "oracle": oracle })
        }
    };
    let points: Vec<_> = curve
        .iter()
        .map(|(t, e)| json!({ "t": t, "estimate": e.value, "stderr": e.standard_error, "n": e.n_walks, "timeouts": e.n_timeouts }))
        .collect();
    let meta = json!({
        "estimate": curve[0].1.value,
        "stderr": curve[0].1.standard_error,
        "n": sample.absorbed(),
        "timeouts": sample.timeouts(),
        "far_excursions": sample.far_excursions(),
        "seed": wc.seed,
        "stream_seed": sample.seed,
        "config": wc,
        "z0": [z0.re, z0.im],
        "domain": d.render(),
        "points": points,
        "segment": segment,
    });
    write_atomic(&cfg.path("omega.json"), &to_json(&meta)?)?;
    Ok(Verdict::Pass)
}

pub fn construct(
    cfg: &RunConfig,
    generations: usize,
    cap: Option<f64>,
    batch: Option<u64>,
    sigmas: Option<f64>,
) -> Result<Verdict, CliError> {
    let wc = cfg.walk_config()?;
    let mut opts = RadiiOptions::default();
    if let Some(c) = cap {
        opts.cap = c;
    }
    if let Some(b) = batch {
        opts.batch = b;
    }
    if let Some(s) = sigmas {
        opts.sigmas = s;
    }
    let cert = choose_radii(generations, &wc, &opts)?;
    write_atomic(&cfg.path("radii.json"), &to_json(&cert)?)?;
    let domain = cert.domain()?;
    write_atomic(&cfg.path("domain.txt"), &domain.render())?;
    let probes: Vec<f64> = cert.radii.iter().map(|r| 2.0 * r).collect();
    let mut probe = String::from("t,omega,stderr,t_omega,t_omega_upper\n");
    for p in liminf_t_omega(&domain, &probes, &wc)? {
        writeln!(
            probe,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.t, p.omega.value, p.omega.standard_error, p.t_omega, p.t_omega_upper
        )
        .unwrap();
    }
    write_atomic(&cfg.path("probe.csv"), &probe)?;
    let top = cert.radii.iter().copied().fold(1.0, f64::max);
    let blocks = (2.0 * top).log2().ceil() as u32 + 1;
    let mut wiener = String::from("n,pieces,length,capacity,term,lower_bound\n");
    for w in wiener_series_terms(&domain, blocks) {
        writeln!(
            wiener,
            "{},{},{:.16e},{:.16e},{:.16e},{}",
            w.n, w.pieces, w.length, w.capacity, w.term, w.lower_bound
        )
        .unwrap();
    }
    write_atomic(&cfg.path("wiener.csv"), &wiener)?;
    Ok(Verdict::Pass)
}

pub fn verify(cfg: &RunConfig, name: Option<&str>, measure: Option<&Path>, all: bool) -> Result<Verdict, CliError> {
    let functions = match (name, measure, all) {
        (_, _, true) => catalog().into_iter().map(|e| e.function).collect(),
        (Some(n), None, false) => vec![catalog_function(n)?],
        (None, Some(p), false) => vec![measure_function(p)?],
        _ => return Err(CliError::Usage("give one of --catalog, --measure or --all".into())),
    };
    let opts = ReportOptions {
        n: cfg.n,
        ladder: cfg.ladder.clone(),
        t_min: cfg.t_min,
        t_max: cfg.t_max,
        per_decade: cfg.per_decade,
        ..ReportOptions::default()
    };
    let mut reports = Vec::with_capacity(functions.len());
    for f in &functions {
        let r = condition_report(f, &opts)?;
        write_atomic(&cfg.path(&format!("report-{}.json", f.name())), &to_json(&r)?)?;
        reports.push(r);
    }
    write_atomic(&cfg.path("summary.csv"), &summary_csv(&reports))?;
    for r in &reports {
        eprintln!("{}: {}", r.function, r.overall.as_str());
    }
    Ok(Verdict::combine(reports.iter().map(|r| r.overall)))
}

pub fn counterexample(cfg: &RunConfig, depth: usize, p: &str) -> Result<Verdict, CliError> {
    let ps = floats(p, "p")?;
    let h = construct_tail_counterexample(depth)?;
    write_table(cfg, "counterexample", &h.to_csv())?;
    let gaps: Vec<_> = h
        .gap_tail_values()
        .into_iter()
        .map(|(j, v)| {
            let bound = 0.5f64.powi(j as i32);
            json!({ "j": j, "ln_t": h.gaps[j - 1], "tail": v, "bound": bound, "ok": v <= bound })
        })
        .collect();
    let sums: Vec<_> = ps
        .iter()
        .map(|&p| {
            let s = h.lp_partial_sums_ln(p);
            let doubling = s.windows(2).all(|w| w[1] - w[0] >= std::f64::consts::LN_2);
            json!({ "p": p, "ln_partial_sums": s, "doubling": doubling })
        })
        .collect();
    let ok = gaps.iter().all(|g| g["ok"] == true) && sums.iter().all(|s| s["doubling"] == true);
    let report = json!({ "depth": h.depth, "truncated": h.truncated, "gaps": gaps, "partial_sums": sums });
    write_atomic(&cfg.path("counterexample.json"), &to_json(&report)?)?;
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}
