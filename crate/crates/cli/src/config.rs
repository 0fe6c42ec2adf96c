//! Settings shared by all subcommands.
//!
//! Values are resolved in four layers, later ones winning: built-in
//! defaults, the `THEMEALIGN_SEED` environment variable, a `key = value`
//! config file, command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use themealign::align::DEFAULT_TOP_N;
use themealign::model::TrainOptions;

pub const SEED_ENV: &str = "THEMEALIGN_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub train: TrainOptions,
    pub threshold: f64,
    pub top_n: usize,
    pub threads: Option<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            train: TrainOptions::default(),
            threshold: 0.5,
            top_n: DEFAULT_TOP_N,
            threads: None,
        }
    }
}

/// Hyperparameter flags. Every field is optional so that an absent flag
/// leaves the config file value in place.
#[derive(Debug, Clone, Default, Args)]
pub struct HyperFlags {
    /// Number of t-topics
    #[arg(long)]
    pub k: Option<usize>,
    /// Sticky self-transition bonus
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Transition smoothing
    #[arg(long)]
    pub alpha: Option<f64>,
    /// t-topic word smoothing [default: W/100000]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Document mixture smoothing [default: 50/K]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// w-topic word smoothing [default: W/100000]
    #[arg(long)]
    pub eta: Option<f64>,
    /// w-topic paragraph smoothing [default: W/P]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Gibbs sweeps per sampler
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the concept relatedness boost
    #[arg(long, overrides_with = "no_boost")]
    pub boost: bool,
    #[arg(long)]
    pub no_boost: bool,
    #[arg(long)]
    pub boost_exponent: Option<f64>,
    /// Include the document mixture in Viterbi emissions
    #[arg(long, overrides_with = "no_decode_mixture")]
    pub decode_mixture: bool,
    #[arg(long)]
    pub no_decode_mixture: bool,
}

impl Settings {
    /// Resolves defaults, environment and config file. Flags are applied
    /// separately by each subcommand.
    pub fn resolve(config: Option<&Path>) -> Result<Settings> {
        let mut s = Settings::default();
        if let Ok(raw) = std::env::var(SEED_ENV) {
            s.train.seed = raw
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={raw:?} is not an unsigned integer"))?;
        }
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            s.apply_file(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        Ok(s)
    }

    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value", n + 1);
            };
            self.set(&key.trim().replace('-', "_"), value.trim())
                .with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| anyhow::anyhow!("bad value {value:?} for {key}"))
        }
        let t = &mut self.train;
        match key {
            "k" => t.k = num(key, value)?,
            "kappa" => t.kappa = num(key, value)?,
            "alpha" => t.alpha = num(key, value)?,
            "beta" => t.beta = Some(num(key, value)?),
            "lambda" => t.lambda = Some(num(key, value)?),
            "eta" => t.eta = Some(num(key, value)?),
            "gamma" => t.gamma = Some(num(key, value)?),
            "iters" | "iterations" => t.iterations = num(key, value)?,
            "burnin" | "burn_in" => t.burn_in = num(key, value)?,
            "seed" => t.seed = num(key, value)?,
            "boost" => t.use_concept_boost = num(key, value)?,
            "boost_exponent" => t.boost_exponent = num(key, value)?,
            "decode_mixture" => t.decode_with_mixture = num(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            "top_n" => self.top_n = num(key, value)?,
            "threads" => self.threads = Some(num(key, value)?),
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    pub fn apply_flags(&mut self, f: &HyperFlags) {
        let t = &mut self.train;
        if let Some(v) = f.k {
            t.k = v;
        }
        if let Some(v) = f.kappa {
            t.kappa = v;
        }
        if let Some(v) = f.alpha {
            t.alpha = v;
        }
        if f.beta.is_some() {
            t.beta = f.beta;
        }
        if f.lambda.is_some() {
            t.lambda = f.lambda;
        }
        if f.eta.is_some() {
            t.eta = f.eta;
        }
        if f.gamma.is_some() {
            t.gamma = f.gamma;
        }
        if let Some(v) = f.iters {
            t.iterations = v;
        }
        if let Some(v) = f.burnin {
            t.burn_in = v;
        }
        if let Some(v) = f.seed {
            t.seed = v;
        }
        if f.boost {
            t.use_concept_boost = true;
        }
        if f.no_boost {
            t.use_concept_boost = false;
        }
        if let Some(v) = f.boost_exponent {
            t.boost_exponent = v;
        }
        if f.decode_mixture {
            t.decode_with_mixture = true;
        }
        if f.no_decode_mixture {
            t.decode_with_mixture = false;
        }
    }
}
