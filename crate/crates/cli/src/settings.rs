use std::path::PathBuf;

use clap::{Args, ValueEnum};
use schwarzlab::boundary::DEFAULT_LADDER;
use schwarzlab::config::Document;
use schwarzlab::potential::WalkConfig;
use schwarzlab::Error;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Config file with [sampling], [grid], [walks] and [output] sections
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Number of boundary angles
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Comma-separated radius ladder, increasing towards 1
    #[arg(long, global = true)]
    pub ladder: Option<String>,
    /// Smallest t of the distribution grid
    #[arg(long, global = true)]
    pub t_min: Option<f64>,
    /// Largest t of the distribution grid
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Grid points per decade of t
    #[arg(long, global = true)]
    pub per_decade: Option<usize>,
    /// Absorption radius of the walks
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Walks per estimate
    #[arg(long, global = true)]
    pub walks: Option<u64>,
    /// Monte Carlo seed; required by `wos` and `construct`
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Step limit of a single walk
    #[arg(long, global = true)]
    pub max_steps: Option<u64>,
    /// Table format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// Resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub ladder: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    pub epsilon: f64,
    pub walks: u64,
    pub seed: Option<u64>,
    pub max_steps: u64,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let walk = WalkConfig::new(0);
        RunConfig {
            n: 1 << 16,
            ladder: DEFAULT_LADDER.to_vec(),
            t_min: 1e-4,
            t_max: 1e6,
            per_decade: 32,
            epsilon: walk.epsilon,
            walks: walk.n_walks,
            seed: None,
            max_steps: walk.max_steps,
            out: PathBuf::from("."),
            format: Format::Csv,
        }
    }
}

fn parse_ladder(s: &str) -> Result<Vec<f64>, String> {
    let ladder = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("ladder entry `{}`: {e}", x.trim())))
        .collect::<Result<Vec<_>, _>>()?;
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(format!("ladder `{s}` must be increasing inside (0, 1)"));
    }
    Ok(ladder)
}

fn file_value<T: std::str::FromStr>(doc: &Document, section: &str, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    match doc.get(section, key) {
        None => Ok(None),
        Some((line, v)) => v
            .parse()
            .map(Some)
            .map_err(|e| CliError::Lib(Error::Parse { line, message: format!("[{section}] {key}: {e}") })),
    }
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_file(&Document::parse(&text)?)?;
        }
        cfg.apply_args(args)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, doc: &Document) -> Result<(), CliError> {
        for s in &doc.sections {
            if !["", "sampling", "grid", "walks", "output"].contains(&s.name.as_str()) {
                let line = s.entries.first().map_or(0, |e| e.0);
                return Err(Error::Parse { line, message: format!("unknown section [{}]", s.name) }.into());
            }
        }
        if let Some(v) = file_value(doc, "sampling", "n")? {
            self.n = v;
        }
        if let Some((line, v)) = doc.get("sampling", "ladder") {
            self.ladder = parse_ladder(v).map_err(|message| Error::Parse { line, message })?;
        }
        if let Some(v) = file_value(doc, "grid", "t_min")? {
            self.t_min = v;
        }
        if let Some(v) = file_value(doc, "grid", "t_max")? {
            self.t_max = v;
        }
        if let Some(v) = file_value(doc, "grid", "per_decade")? {
            self.per_decade = v;
        }
        if let Some(v) = file_value(doc, "walks", "epsilon")? {
            self.epsilon = v;
        }
        if let Some(v) = file_value(doc, "walks", "walks")? {
            self.walks = v;
        }
        if let Some(v) = file_value(doc, "walks", "seed")? {
            self.seed = Some(v);
        }
        if let Some(v) = file_value(doc, "walks", "max_steps")? {
            self.max_steps = v;
        }
        if let Some((_, v)) = doc.get("output", "dir") {
            self.out = PathBuf::from(v);
        }
        if let Some((line, v)) = doc.get("output", "format") {
            self.format = Format::from_str(v, true).map_err(|message| Error::Parse { line, message })?;
        }
        Ok(())
    }

    fn apply_args(&mut self, a: &CommonArgs) -> Result<(), CliError> {
        if let Some(v) = a.n {
            self.n = v;
        }
        if let Some(v) = &a.ladder {
            self.ladder = parse_ladder(v).map_err(CliError::Usage)?;
        }
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = a.$f { self.$f = v; })*};
        }
        take!(t_min, t_max, per_decade, epsilon, walks, max_steps, format);
        if a.seed.is_some() {
            self.seed = a.seed;
        }
        if let Some(v) = &a.out {
            self.out = v.clone();
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n < 16 {
            return Err(CliError::Usage(format!("n = {} is too small", self.n)));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min) || self.per_decade == 0 {
            return Err(CliError::Usage("t-grid needs 0 < t_min < t_max and per_decade ≥ 1".into()));
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Vec<f64> {
        schwarzlab::boundary::log_grid(self.t_min, self.t_max, self.per_decade)
    }

    /// Walk configuration; fails without a seed. The walk count is checked
    /// by the consumers, since the radius search reports an under-resolved
    /// configuration as a failed search.
    pub fn walk_config(&self) -> Result<WalkConfig, CliError> {
        let seed = self.seed.ok_or_else(|| CliError::Usage("--seed is required for Monte Carlo subcommands".into()))?;
        if !(self.epsilon > 0.0) || self.walks == 0 {
            return Err(CliError::Usage("epsilon and walks must be positive".into()));
        }
        Ok(WalkConfig {
            epsilon: self.epsilon,
            max_steps: self.max_steps,
            n_walks: self.walks,
            seed,
            ..WalkConfig::new(seed)
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}
