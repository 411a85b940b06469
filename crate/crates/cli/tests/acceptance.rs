//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_1_PI, LN_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use schwarzlab::boundary::{distribution_function, log_grid, sample_boundary, AnalyticFunction, DEFAULT_LADDER};
use schwarzlab::logdet::{
    angular_kernel_identity, argument_count, inequality_chain, p_power_identity, reciprocal_grid, riesz_counting,
    AxisOptions,
};
use schwarzlab::measure::{total_variation, CircleMeasure};
use schwarzlab::potential::{
    choose_radii, liminf_t_omega, single_slit_oracle, wiener_series_terms, HitSample, RadiiCertificate, RadiiOptions,
    SlitDomain, WalkConfig,
};
use schwarzlab::rng::derive_seed;
use schwarzlab::verdict::{
    catalog, catalog_entry, condition_report, construct_tail_counterexample, hv_limit, Condition, ReportOptions,
    Verdict,
};
use schwarzlab::Complex64;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn entry(name: &str) -> AnalyticFunction {
    catalog_entry(name).expect("catalog entry").function
}

fn kernel_identities() -> Check {
    let grid = log_grid(1e-2, 1e2, 4);
    let grid: Vec<f64> = (0..20).map(|i| grid[0] * 1e4f64.powf(i as f64 / 19.0)).collect();
    let mut worst = 0.0f64;
    for &r in &grid {
        for &t in &grid {
            let c = angular_kernel_identity(r, t, 1e-6).map_err(err)?;
            worst = worst.max(c.rel_err);
        }
    }
    let mut worst_p = 0.0f64;
    for m in [0.5, 1.0, 2.0, 3.0] {
        for p in [0.2, 0.55, 0.9] {
            let c = p_power_identity(Complex64::new(0.0, m), p, 1e-4).map_err(err)?;
            worst_p = worst_p.max(c.rel_err);
        }
    }
    ensure(
        worst <= 1e-6 && worst_p <= 1e-4,
        format!("angular max rel err {worst:.2e} (400 points), p-power {worst_p:.2e} (12 pairs)"),
    )
}

fn distribution_oracle() -> Check {
    let n = 1 << 16;
    let f = AnalyticFunction::schwarz(CircleMeasure::atom(0.0, 1.0));
    let s = sample_boundary(&f, n, &DEFAULT_LADDER).map_err(err)?;
    let d = distribution_function(&s, &log_grid(1e-1, 1e4, 32)).map_err(err)?;
    let dist = d.t().iter().zip(d.m()).map(|(t, m)| (m - 2.0 / PI * (1.0 / t).atan()).abs()).fold(0.0, f64::max);
    let bound = 2.0 / n as f64 + 1e-6;
    ensure(dist <= bound, format!("sup |m_f − (2/π)arctan(1/t)| = {dist:.3e}, bound {bound:.3e}"))
}

fn riesz_identity() -> Check {
    let r = log_grid(1e-5, 1e3, 16);
    let t = reciprocal_grid(&r);
    for e in catalog() {
        let s = sample_boundary(&e.function, 1 << 12, &DEFAULT_LADDER).map_err(err)?;
        let d = distribution_function(&s, &t).map_err(err)?;
        let mu = riesz_counting(&s, &r).map_err(err)?;
        let m_rev: Vec<f64> = d.m().iter().rev().copied().collect();
        if mu.mu != m_rev {
            return Err(format!("{}: μ_f(1/τ) differs from m_f(τ)", e.name));
        }
    }
    let n = 1 << 10;
    let s = sample_boundary(&entry("atom"), n, &DEFAULT_LADDER).map_err(err)?;
    let radii = [0.1, 0.5, 1.0, 2.0, 10.0];
    let mu = riesz_counting(&s, &radii).map_err(err)?;
    let worst = radii.iter().zip(&mu.mu).map(|(&r, m)| (argument_count(&s, r) - m).abs()).fold(0.0, f64::max);
    ensure(
        worst <= 2.0 / n as f64,
        format!(
            "exact on {} catalog entries; root count off by {worst:.2e} (bound {:.2e})",
            catalog().len(),
            2.0 / n as f64
        ),
    )
}

fn inequality_chain_check() -> Check {
    let mut parts = Vec::new();
    for name in ["atom", "atom-0.5", "cantor8", "atom-pair"] {
        let s = sample_boundary(&entry(name), 1 << 14, &DEFAULT_LADDER).map_err(err)?;
        let d = distribution_function(&s, &log_grid(1e-4, 1e6, 32)).map_err(err)?;
        let c = inequality_chain(&s, &d, AxisOptions::default(), 0.05).map_err(err)?;
        if !(c.first && c.second) {
            return Err(format!("{name}: weak L1 {:.4}, I_f {:.4}, tail {:.4}", c.weak_l1, c.i_f.value, c.tail_proxy));
        }
        parts.push(format!(
            "{name} {:.3}≤{:.3}≤{:.3}",
            c.weak_l1 / (2.0 * std::f64::consts::E),
            c.i_f.value,
            4.0 * PI * c.tail_proxy
        ));
    }
    Ok(parts.join("; "))
}

fn hv_behaviour() -> Check {
    let grid = log_grid(1e-4, 1e6, 32);
    let mut pts = Vec::new();
    for (name, a) in [("atom-0.25", 0.25), ("atom-0.5", 0.5), ("atom", 1.0)] {
        let f = entry(name);
        let s = sample_boundary(&f, 1 << 16, &DEFAULT_LADDER).map_err(err)?;
        let h = hv_limit(&distribution_function(&s, &grid).map_err(err)?, Some(a));
        pts.push((a, h.estimate));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    let unit = 2.0 * FRAC_1_PI;
    let mut dens = Vec::new();
    for name in ["density-const", "density-cos"] {
        let s = sample_boundary(&entry(name), 1 << 14, &DEFAULT_LADDER).map_err(err)?;
        dens.push(hv_limit(&distribution_function(&s, &grid).map_err(err)?, Some(0.0)).estimate);
    }
    let dmax = dens.iter().copied().fold(0.0, f64::max);
    ensure(
        r2 >= 0.999 && (slope - unit).abs() <= 0.02 * unit && dmax <= 1e-2,
        format!("slope {slope:.5} vs 2/π = {unit:.5}, R² = {r2:.6}, densities ≤ {dmax:.2e}"),
    )
}

fn segments(seed: u64) -> Vec<(f64, f64)> {
    let u = |k: u64| derive_seed(seed, "segment", k) as f64 / u64::MAX as f64;
    (0..10)
        .map(|i| {
            let (a, b) = (1.0 + u(2 * i), 1.0 + u(2 * i + 1));
            (a.min(b), a.max(b))
        })
        .collect()
}

fn wos_validation() -> Check {
    let d = SlitDomain::new(&[(1.0, 2.0)], None).map_err(err)?;
    let z0 = Complex64::new(0.0, 0.0);
    let cfg = WalkConfig::new(2024);
    let half = WalkConfig { epsilon: 0.5 * cfg.epsilon, ..cfg };
    let a = HitSample::run(z0, &d, &cfg, "segments", 0).map_err(err)?;
    let b = HitSample::run(z0, &d, &half, "segments", 0).map_err(err)?;
    let (mut z_max, mut shift_max) = (0.0f64, 0.0f64);
    for (c, dd) in segments(7) {
        let o = single_slit_oracle(z0, (1.0, 2.0), (c, dd)).map_err(err)?;
        let e = a.fraction(|h, _| h >= c && h <= dd).map_err(err)?;
        let e2 = b.fraction(|h, _| h >= c && h <= dd).map_err(err)?;
        let sigma = e.standard_error.max(1.0 / e.n_walks as f64);
        z_max = z_max.max((e.value - o).abs() / sigma);
        shift_max = shift_max.max((e2.value - e.value).abs() / sigma);
    }
    ensure(
        z_max <= 3.0 && shift_max < 2.0,
        format!("max |WoS − oracle| = {z_max:.2}σ, max ε-halving shift = {shift_max:.2}σ"),
    )
}

fn construction(cert: &Result<RadiiCertificate, String>, cfg: &WalkConfig) -> Check {
    let cert = cert.as_ref().map_err(Clone::clone)?;
    if cert.radii.len() != 3 || cert.generations.iter().any(|g| g.upper > g.threshold) {
        return Err(format!("radii {:?}", cert.radii));
    }
    let probes: Vec<f64> = cert.radii.iter().map(|r| 2.0 * r).collect();
    let pts = liminf_t_omega(&cert.domain().map_err(err)?, &probes, cfg).map_err(err)?;
    let mut ok = pts.windows(2).all(|w| w[1].t_omega < w[0].t_omega);
    for (p, prev) in pts.iter().skip(1).zip(&cert.radii) {
        ok &= p.t_omega <= 2.0 / prev + 3.0 * p.t * p.omega.standard_error;
    }
    let curve: Vec<String> = pts.iter().map(|p| format!("{:.3e}", p.t_omega)).collect();
    ensure(ok, format!("radii {:?}, t·ω(2r_n) = [{}]", cert.radii, curve.join(", ")))
}

fn wiener(cert: &Result<RadiiCertificate, String>) -> Check {
    let cert = cert.as_ref().map_err(Clone::clone)?;
    let top = cert.radii.iter().copied().fold(1.0, f64::max);
    let terms = wiener_series_terms(&cert.domain().map_err(err)?, (2.0 * top).log2().ceil() as u32 + 1);
    let bound = 1.0 / (2.0 * LN_2);
    let checked: Vec<_> = terms.iter().filter(|w| w.pieces > 0 && 2f64.powi(w.n as i32) >= 16.0).collect();
    let min = checked.iter().map(|w| w.term.abs()).fold(f64::INFINITY, f64::min);
    ensure(
        !checked.is_empty() && min >= bound,
        format!("{} nonempty blocks beyond 16, min |term| {min:.3} ≥ {bound:.3}", checked.len()),
    )
}

fn counterexample() -> Check {
    let mut msg = Vec::new();
    for depth in [6, 12, 25] {
        let h = construct_tail_counterexample(depth).map_err(err)?;
        let worst = h.gap_tail_values().iter().map(|&(j, v)| v * 2f64.powi(j as i32)).fold(0.0, f64::max);
        let mut ratio = f64::INFINITY;
        for p in [0.1, 0.3, 0.5] {
            let s = h.lp_partial_sums_ln(p);
            ratio = s.windows(2).map(|w| w[1] - w[0]).fold(ratio, f64::min);
        }
        if worst > 1.0 || ratio < LN_2 {
            return Err(format!("depth {depth}: max 2^j·tail {worst:.3}, min log ratio {ratio:.3}"));
        }
        msg.push(format!("K = {depth}: max 2^j·tail {worst:.3}, min ratio e^{ratio:.3e}"));
    }
    Ok(msg.join("; "))
}

fn discrimination() -> Check {
    let conditions = [Condition::Smirnov, Condition::Kolmogorov, Condition::HvLimit, Condition::RealPart];
    let opts = ReportOptions::default();
    for e in catalog() {
        let r = condition_report(&e.function, &opts).map_err(err)?;
        for c in conditions {
            let want = if e.designed_failure == Some(c) { Verdict::Fail } else { Verdict::Pass };
            if r.verdicts.condition(c) != want {
                return Err(format!("{}: {} is {}", e.name, c.as_str(), r.verdicts.condition(c).as_str()));
            }
        }
        if let Some(mu) = e.function.measure() {
            let rec = r.recovery.as_ref().ok_or("missing recovery")?;
            let want = mu.total_mass().map_err(err)?.re;
            let norm = total_variation(mu).map_err(err)?;
            if (rec.total_mass - want).abs() > 0.02 * norm {
                return Err(format!("{}: recovered mass {} vs {want}", e.name, rec.total_mass));
            }
        }
    }
    Ok(format!("{} catalog entries", catalog().len()))
}

fn same_files(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = std::fs::read_dir(a).map_err(err)?.map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for n in &names {
        if std::fs::read(a.join(n)).map_err(err)? != std::fs::read(b.join(n)).map_err(err)? {
            return Err(format!("{} differs", n.to_string_lossy()));
        }
    }
    Ok(names.len())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    std::fs::write(dir.path().join("slits.txt"), "slit 1 2\nslit 3 5\nhalfline 8\n").map_err(err)?;
    let runs: [&[&str]; 2] = [
        &["wos", "--domain", "slits.txt", "--t", "1,2,4,8", "--walks", "5000", "--seed", "99"],
        &["construct", "--generations", "2", "--walks", "2000", "--seed", "99"],
    ];
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        for rep in ["a", "b"] {
            let out = dir.path().join(format!("{i}{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_schwarzlab"))
                .current_dir(dir.path())
                .args(*args)
                .arg("-o")
                .arg(&out)
                .output()
                .map_err(err)?
                .status;
            if !status.success() {
                return Err(format!("{} exited with {status}", args[0]));
            }
        }
        files += same_files(&dir.path().join(format!("{i}a")), &dir.path().join(format!("{i}b")))?;
    }
    Ok(format!("wos and construct re-runs identical ({files} files)"))
}

struct Report {
    index: usize,
    failed: usize,
}

impl Report {
    fn record(&mut self, name: &str, check: impl FnOnce() -> Check) {
        self.index += 1;
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                self.failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} {name} ({:.1} s): {detail}", self.index, start.elapsed().as_secs_f64());
    }
}

fn main() {
    let walk = WalkConfig::new(20_240_611);
    let mut report = Report { index: 0, failed: 0 };
    report.record("kernel identities", kernel_identities);
    report.record("distribution oracle", distribution_oracle);
    report.record("Riesz counting identity", riesz_identity);
    report.record("inequality chain", inequality_chain_check);
    report.record("singular-part limit", hv_behaviour);
    report.record("walk-on-spheres validation", wos_validation);
    let mut cert = Err("construction did not run".to_string());
    report.record("radius construction", || {
        cert = choose_radii(3, &walk, &RadiiOptions::default()).map_err(err);
        construction(&cert, &walk)
    });
    report.record("Wiener blocks", || wiener(&cert));
    report.record("tail counterexample", counterexample);
    report.record("verdict discrimination", discrimination);
    report.record("determinism", determinism);
    if report.failed > 0 {
        println!("{} acceptance criteria failed", report.failed);
        std::process::exit(1);
    }
}
