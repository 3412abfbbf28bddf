//! Key=value run configuration. Precedence, lowest to highest: built-in
//! defaults, `--config` file lines, trailing `key=value` arguments, then
//! the explicit `--seed` / `--out` flags.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use glauber_lab::RateKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MStarSource {
    /// Closed-form d = 2 spontaneous magnetization (needs beta above critical).
    Exact,
    /// Center-site MCMC estimate.
    Mcmc,
    Fixed(f64),
}

impl fmt::Display for MStarSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MStarSource::Exact => write!(f, "exact"),
            MStarSource::Mcmc => write!(f, "mcmc"),
            MStarSource::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for MStarSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(MStarSource::Exact),
            "mcmc" => Ok(MStarSource::Mcmc),
            other => {
                let v: f64 =
                    other.parse().map_err(|_| format!("m_star must be 'exact', 'mcmc', or a number, got '{other}'"))?;
                if v > 0.0 && v <= 1.0 {
                    Ok(MStarSource::Fixed(v))
                } else {
                    Err(format!("fixed m_star must lie in (0, 1], got {v}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: u32,
    pub side: usize,
    /// Comma-separated box sides for scaling and droplet runs; empty means
    /// the per-command default.
    pub sides: Vec<usize>,
    pub beta: f64,
    pub rate_model: RateKind,
    /// Coarse-graining block side; 0 applies the ceil(2 ln N) rule.
    pub block_side: usize,
    pub lambda: f64,
    pub m_star: MStarSource,
    pub burnin: usize,
    pub samples: usize,
    pub batches: usize,
    /// 0 means the per-command default.
    pub replicas: usize,
    pub equilibration: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub horizon_factor: f64,
    pub grid_points: usize,
    /// Start state for hitting-time runs; 0 means the top of the chain.
    pub start: usize,
    /// Simulated hitting-time replicas; 0 skips simulation.
    pub sim_replicas: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            side: 16,
            sides: Vec::new(),
            beta: 0.6,
            rate_model: RateKind::HeatBath,
            block_side: 0,
            lambda: 1.0,
            m_star: MStarSource::Exact,
            burnin: 200,
            samples: 4000,
            batches: 40,
            replicas: 0,
            equilibration: 20.0,
            t_max: 30.0,
            t_points: 25,
            horizon_factor: 4.0,
            grid_points: 40,
            start: 0,
            sim_replicas: 0,
            seed: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "dim",
    "side",
    "sides",
    "beta",
    "rate_model",
    "block_side",
    "lambda",
    "m_star",
    "burnin",
    "samples",
    "batches",
    "replicas",
    "equilibration",
    "t_max",
    "t_points",
    "horizon_factor",
    "grid_points",
    "start",
    "sim_replicas",
    "seed",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| format!("invalid value '{value}' for {key}: {e}"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "dim" => self.dim = parse(key, value)?,
            "side" => self.side = parse(key, value)?,
            "sides" => {
                self.sides = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<Vec<usize>, _>>()?;
            }
            "beta" => self.beta = parse(key, value)?,
            "rate_model" => self.rate_model = parse(key, value)?,
            "block_side" => self.block_side = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            "m_star" => self.m_star = parse(key, value)?,
            "burnin" => self.burnin = parse(key, value)?,
            "samples" => self.samples = parse(key, value)?,
            "batches" => self.batches = parse(key, value)?,
            "replicas" => self.replicas = parse(key, value)?,
            "equilibration" => self.equilibration = parse(key, value)?,
            "t_max" => self.t_max = parse(key, value)?,
            "t_points" => self.t_points = parse(key, value)?,
            "horizon_factor" => self.horizon_factor = parse(key, value)?,
            "grid_points" => self.grid_points = parse(key, value)?,
            "start" => self.start = parse(key, value)?,
            "sim_replicas" => self.sim_replicas = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => {
                return Err(format!("unknown key '{other}'; valid keys: {}", KEYS.join(", ")));
            }
        }
        Ok(())
    }

    pub fn apply_line(&mut self, line: &str) -> Result<(), String> {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{line}'"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn load(
        config_file: Option<&Path>,
        overrides: &[String],
        seed: Option<u64>,
    ) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            for raw in text.lines() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                cfg.apply_line(line)?;
            }
        }
        for line in overrides {
            cfg.apply_line(line)?;
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if !(2..=3).contains(&self.dim) {
            return Err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.side == 0 {
            return Err("side must be positive".into());
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(format!("beta must be finite and nonnegative, got {}", self.beta));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.samples < 4 || self.batches < 2 {
            return Err("need samples >= 4 and batches >= 2".into());
        }
        if self.grid_points < 2 || self.t_points < 2 {
            return Err("need grid_points >= 2 and t_points >= 2".into());
        }
        if self.horizon_factor <= 0.0 || self.t_max <= 0.0 {
            return Err("horizon_factor and t_max must be positive".into());
        }
        Ok(())
    }

    /// Every key with its resolved value, for the CSV metadata block.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let sides = if self.sides.is_empty() {
            "default".to_string()
        } else {
            self.sides.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        };
        vec![
            ("dim".into(), self.dim.to_string()),
            ("side".into(), self.side.to_string()),
            ("sides".into(), sides),
            ("beta".into(), format!("{}", self.beta)),
            ("rate_model".into(), self.rate_model.name().into()),
            ("block_side".into(), self.block_side.to_string()),
            ("lambda".into(), format!("{}", self.lambda)),
            ("m_star".into(), self.m_star.to_string()),
            ("burnin".into(), self.burnin.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("batches".into(), self.batches.to_string()),
            ("replicas".into(), self.replicas.to_string()),
            ("equilibration".into(), format!("{}", self.equilibration)),
            ("t_max".into(), format!("{}", self.t_max)),
            ("t_points".into(), self.t_points.to_string()),
            ("horizon_factor".into(), format!("{}", self.horizon_factor)),
            ("grid_points".into(), self.grid_points.to_string()),
            ("start".into(), self.start.to_string()),
            ("sim_replicas".into(), self.sim_replicas.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}
