//! Experiment configuration: one TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use macrodim::generators::GeneratorSpec;
use macrodim::grammar::{builtin, parse_grammar, Grammar};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Pass/fail thresholds used by the analysis commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Allowed per-event change of a sampled distance.
    pub distortion: u64,
    /// Allowed median slope difference in the invariance experiment.
    pub slope: f64,
    /// Allowed sandwich constant.
    pub sandwich: f64,
    /// Allowed correlation difference between radii, in combined standard errors.
    pub correlation_se: f64,
    /// Normal quantile for the factorization intervals.
    pub factorization_z: f64,
    /// Required fraction of cluster pairs whose covariance interval covers zero.
    pub factorization_coverage: f64,
    /// Smallest count for a cluster-size bucket to enter the tail fit.
    pub min_bucket: u64,
    /// Smallest number of replicas with a cluster of size two or more.
    pub min_tail_events: u64,
    /// Smallest number of co-occurrences for a cluster pair to be tested.
    pub min_pair_samples: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            distortion: 4,
            slope: 0.15,
            sandwich: 3.0,
            correlation_se: 2.0,
            factorization_z: 2.576,
            factorization_coverage: 0.95,
            min_bucket: 5,
            min_tail_events: 20,
            min_pair_samples: 30,
        }
    }
}

/// Settings of the side reports bundled by `experiment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SideConfig {
    /// Horizons for the δ(ε) and δ₁(ε) sequences; empty means `ε/2, ε, 2ε`.
    pub epsilons: Vec<f64>,
    /// Window radius for the cluster, distortion and factorization runs; 0 means the smallest N.
    pub radius: usize,
    /// Replicas for the side runs; 0 means `replicas`.
    pub replicas: u64,
    /// Growth multiples `k` for the δ₁ tail.
    pub k_grid: Vec<f64>,
    /// Attempts per conditional sample.
    pub max_attempts: u64,
    /// Conditional samples per horizon for δ₁; 0 means the side replicas.
    pub growth_samples: u64,
    /// The conditioned cluster is the ball of this radius around the origin.
    pub cluster_radius: usize,
}

impl Default for SideConfig {
    fn default() -> Self {
        SideConfig {
            epsilons: Vec::new(),
            radius: 0,
            replicas: 0,
            k_grid: vec![1.0, 2.0, 3.0, 4.0],
            max_attempts: 10_000,
            growth_samples: 0,
            cluster_radius: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Generator spec string, e.g. `lattice:z2:radius=32`.
    pub generator: String,
    /// Extra specs for `dimension`.
    pub generators: Vec<String>,
    /// `builtin:<name>` or a rule file.
    pub grammar: String,
    /// Horizon ε.
    pub epsilon: f64,
    /// Window radii N, strictly increasing.
    pub radius: Vec<usize>,
    pub replicas: u64,
    pub seed: u64,
    /// Not echoed into reports, so artifacts do not depend on where they go.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub format: Format,
    pub strict_connectivity: bool,
    /// Frozen shell width; defaults to the largest rule radius (at least 1).
    pub margin: Option<usize>,
    pub event_cap: u64,
    /// Write one event log per replica in `simulate`.
    pub event_logs: bool,
    /// Pairs sampled per replica by `distortion`.
    pub pairs: usize,
    /// Largest state in vertices for the reversibility state space.
    pub state_cap: usize,
    /// Longest cycle checked by the reversibility test.
    pub n0: usize,
    /// Radius of the seed ball the reversibility state space is grown from.
    pub seed_radius: usize,
    /// Rate-chain file for `reversibility`; replaces the grammar chain.
    pub chain: Option<PathBuf>,
    /// Worker threads; 0 means all cores.
    pub threads: usize,
    pub thresholds: Thresholds,
    pub side: SideConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: "lattice:z2:radius=16".into(),
            generators: Vec::new(),
            grammar: "builtin:chord".into(),
            epsilon: 0.1,
            radius: vec![16],
            replicas: 100,
            seed: 0,
            out: PathBuf::from("out"),
            format: Format::Json,
            strict_connectivity: false,
            margin: None,
            event_cap: 1_000_000,
            event_logs: true,
            pairs: 32,
            state_cap: 6,
            n0: 4,
            seed_radius: 1,
            chain: None,
            threads: 0,
            thresholds: Thresholds::default(),
            side: SideConfig::default(),
        }
    }
}

/// Flag values that override the file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Experiment configuration file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Grammar: `builtin:<name>` or a rule file.
    #[arg(long, global = true, value_name = "FILE")]
    pub grammar: Option<String>,
    /// Generator spec, e.g. `lattice:z2:radius=32`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub generator: Option<String>,
    /// Horizon ε.
    #[arg(long, global = true, value_name = "T")]
    pub epsilon: Option<f64>,
    /// Window radii.
    #[arg(long, global = true, value_name = "N[,N...]", value_delimiter = ',')]
    pub radius: Option<Vec<usize>>,
    #[arg(long, global = true, value_name = "K")]
    pub replicas: Option<u64>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub strict_connectivity: bool,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Rate-chain file for `reversibility`.
    #[arg(long, global = true, value_name = "FILE")]
    pub chain: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Reads the config file, if any, applies the flags and validates the result.
    /// Relative paths in the file are taken relative to the file.
    pub fn load(flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                let mut cfg: ExperimentConfig =
                    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new(""));
                cfg.rebase(base);
                cfg
            }
            None => ExperimentConfig::default(),
        };
        if let Some(g) = &flags.grammar {
            cfg.grammar = g.clone();
        }
        if let Some(g) = &flags.generator {
            cfg.generator = g.clone();
        }
        if let Some(e) = flags.epsilon {
            cfg.epsilon = e;
        }
        if let Some(r) = &flags.radius {
            cfg.radius = r.clone();
        }
        if let Some(r) = flags.replicas {
            cfg.replicas = r;
        }
        if let Some(s) = flags.seed {
            cfg.seed = s;
        }
        if let Some(o) = &flags.out {
            cfg.out = o.clone();
        }
        if flags.strict_connectivity {
            cfg.strict_connectivity = true;
        }
        if let Some(f) = flags.format {
            cfg.format = f;
        }
        if let Some(c) = &flags.chain {
            cfg.chain = Some(c.clone());
        }
        if let Some(t) = flags.threads {
            cfg.threads = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_path_buf() };
        self.out = join(&self.out);
        if let Some(c) = &self.chain {
            self.chain = Some(join(c));
        }
        if !self.grammar.starts_with("builtin:") {
            self.grammar = join(Path::new(&self.grammar)).to_string_lossy().into_owned();
        }
        for spec in std::iter::once(&mut self.generator).chain(self.generators.iter_mut()) {
            if let Some(rest) = spec.strip_prefix("file:") {
                let (path, opts) = match rest.find(":") {
                    Some(i) if rest[i + 1..].contains('=') => (&rest[..i], &rest[i..]),
                    _ => (rest, ""),
                };
                *spec = format!("file:{}{opts}", join(Path::new(path)).to_string_lossy());
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Validation(m));
        if self.replicas < 1 {
            return fail("replicas must be at least 1".into());
        }
        if self.radius.is_empty() || self.radius.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("radius grid {:?} must be non-empty and strictly increasing", self.radius));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon {} must be a finite non-negative time", self.epsilon));
        }
        if self.event_cap == 0 || self.pairs == 0 || self.state_cap == 0 || self.n0 < 3 {
            return fail("event_cap, pairs and state_cap must be positive and n0 at least 3".into());
        }
        let t = &self.thresholds;
        let positive = [t.slope, t.sandwich, t.correlation_se, t.factorization_z, t.factorization_coverage];
        if positive.iter().any(|&x| !(x > 0.0 && x.is_finite())) || t.min_bucket == 0 || t.min_pair_samples == 0 {
            return fail("thresholds must be positive".into());
        }
        if self.side.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) || self.side.k_grid.iter().any(|&k| !(k > 0.0)) {
            return fail("side epsilons and k grid must be positive".into());
        }
        Ok(())
    }

    pub fn generator_spec(&self) -> Result<GeneratorSpec, CliError> {
        self.generator.parse().map_err(|e| CliError::Validation(format!("{e}")))
    }

    pub fn load_grammar(&self) -> Result<Grammar, CliError> {
        if let Some(name) = self.grammar.strip_prefix("builtin:") {
            return builtin::by_name(name).ok_or_else(|| {
                CliError::Validation(format!("unknown builtin grammar `{name}` (known: {})", builtin::NAMES.join(", ")))
            });
        }
        let text = std::fs::read_to_string(&self.grammar)
            .map_err(|e| CliError::Validation(format!("cannot read grammar {}: {e}", self.grammar)))?;
        parse_grammar(&text).map_err(|e| CliError::Validation(format!("{}: {e}", self.grammar)))
    }

    pub fn n_max(&self) -> usize {
        *self.radius.last().expect("validated")
    }

    pub fn side_epsilons(&self) -> Vec<f64> {
        if self.side.epsilons.is_empty() {
            vec![self.epsilon / 2.0, self.epsilon, self.epsilon * 2.0]
        } else {
            self.side.epsilons.clone()
        }
    }

    pub fn side_radius(&self) -> usize {
        if self.side.radius == 0 {
            self.radius[0]
        } else {
            self.side.radius
        }
    }

    pub fn side_replicas(&self) -> u64 {
        if self.side.replicas == 0 {
            self.replicas
        } else {
            self.side.replicas
        }
    }
}
