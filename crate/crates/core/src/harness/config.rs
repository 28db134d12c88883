//! Flat `key = value` configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::chains::MAX_CHAIN_DEPTH;
use crate::duhamel::MAX_FUNCTIONAL_K;
use crate::error::{LabError, Result};
use crate::inequalities::required_index;
use crate::models::dicke::{CutoffPolicy, DickeSpec};
use crate::models::heisenberg::HeisenbergSpec;
use crate::models::Representation;

/// Every key the parser accepts.
pub const CONFIG_KEYS: [&str; 19] = [
    "model",
    "n_spins_min",
    "n_spins_max",
    "n_spins_step",
    "g_x",
    "g_y",
    "h_x",
    "h_y",
    "h_z",
    "beta",
    "epsilon",
    "omega",
    "lambda",
    "volume_override",
    "fock_cutoff",
    "n_max",
    "k_max",
    "representation",
    "seed",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Heisenberg,
    Dicke,
    /// Random Hermitian `H` and random `J`; the size is the Hilbert dimension.
    Random,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Heisenberg => "heisenberg",
            ModelKind::Dicke => "dicke",
            ModelKind::Random => "random",
        }
    }
}

impl FromStr for ModelKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heisenberg" => Ok(ModelKind::Heisenberg),
            "dicke" => Ok(ModelKind::Dicke),
            "random" => Ok(ModelKind::Random),
            other => Err(LabError::Config(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub size_grid: Vec<usize>,
    pub g_x: f64,
    pub g_y: f64,
    pub h: [f64; 3],
    /// Ignored for the Heisenberg model, whose couplings already include β.
    pub beta: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub lambda: f64,
    pub volume_override: Option<f64>,
    /// `None` selects the adaptive cutoff schedule.
    pub fock_cutoff: Option<usize>,
    pub n_max: usize,
    pub k_max: usize,
    pub representation: Representation,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            model: ModelKind::Heisenberg,
            size_grid: (4..=12).collect(),
            g_x: 1.0,
            g_y: 0.3,
            h: [0.1, 0.2, 0.3],
            beta: 1.0,
            epsilon: 1.0,
            omega: 1.0,
            lambda: 0.5,
            volume_override: None,
            fock_cutoff: None,
            n_max: 2,
            k_max: 3,
            representation: Representation::Blocked,
            seed: 0,
            output_path: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| LabError::Config(format!("`{key}`: cannot parse `{raw}`")))
}

/// `key = value` pairs in file order. Rejects unknown and repeated keys.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(LabError::Config(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(LabError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(LabError::Config(format!("line {}: `{key}` given twice", lineno + 1)));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

impl SweepConfig {
    /// Defaults overlaid with the keys present in `text`, then validated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = SweepConfig::default();
        let (mut lo, mut hi, mut step) = (4usize, 12usize, 1usize);
        for (key, raw) in parse_pairs(text)? {
            let raw = raw.as_str();
            match key.as_str() {
                "model" => c.model = raw.parse()?,
                "n_spins_min" => lo = parse_value(&key, raw)?,
                "n_spins_max" => hi = parse_value(&key, raw)?,
                "n_spins_step" => step = parse_value(&key, raw)?,
                "g_x" => c.g_x = parse_value(&key, raw)?,
                "g_y" => c.g_y = parse_value(&key, raw)?,
                "h_x" => c.h[0] = parse_value(&key, raw)?,
                "h_y" => c.h[1] = parse_value(&key, raw)?,
                "h_z" => c.h[2] = parse_value(&key, raw)?,
                "beta" => c.beta = parse_value(&key, raw)?,
                "epsilon" => c.epsilon = parse_value(&key, raw)?,
                "omega" => c.omega = parse_value(&key, raw)?,
                "lambda" => c.lambda = parse_value(&key, raw)?,
                "volume_override" => c.volume_override = Some(parse_value(&key, raw)?),
                "fock_cutoff" => c.fock_cutoff = if raw == "auto" { None } else { Some(parse_value(&key, raw)?) },
                "n_max" => c.n_max = parse_value(&key, raw)?,
                "k_max" => c.k_max = parse_value(&key, raw)?,
                "representation" => c.representation = raw.parse()?,
                "seed" => c.seed = parse_value(&key, raw)?,
                _ => unreachable!("key list checked by parse_pairs"),
            }
        }
        if step == 0 {
            return Err(LabError::Config("n_spins_step must be positive".into()));
        }
        c.size_grid = (lo..=hi).step_by(step).collect();
        c.validate()?;
        Ok(c)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks that need no computation.
    pub fn validate(&self) -> Result<()> {
        if self.size_grid.is_empty() {
            return Err(LabError::Config("size grid is empty".into()));
        }
        if self.size_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Config("size grid must be strictly ascending".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(LabError::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if self.n_max + 1 > MAX_CHAIN_DEPTH {
            return Err(LabError::Config(format!("n_max = {} exceeds the chain depth cap", self.n_max)));
        }
        if self.k_max == 0 {
            return Err(LabError::Config("k_max must be at least 1".into()));
        }
        let top = required_index(self.n_max, self.k_max);
        if top > MAX_FUNCTIONAL_K {
            return Err(LabError::Config(format!("n_max = {}, k_max = {} need F_{top}", self.n_max, self.k_max)));
        }
        for &n in &self.size_grid {
            match self.model {
                ModelKind::Heisenberg => {
                    self.heisenberg(n).map_err(as_config)?;
                }
                ModelKind::Dicke => {
                    self.dicke(n).map_err(as_config)?;
                }
                ModelKind::Random if n < 2 => {
                    return Err(LabError::Config("random instances need dimension at least 2".into()));
                }
                ModelKind::Random => {}
            }
        }
        Ok(())
    }

    pub fn heisenberg(&self, n: usize) -> Result<HeisenbergSpec> {
        HeisenbergSpec::new(n, self.g_x, self.g_y, self.h, self.representation)
    }

    /// Spec at the starting cutoff of the active policy.
    pub fn dicke(&self, n: usize) -> Result<DickeSpec> {
        let d = self.fock_cutoff.unwrap_or(crate::models::dicke::CUTOFF_START);
        DickeSpec::new(n, self.volume_override, self.epsilon, self.omega, self.lambda, d)
    }

    pub fn cutoff_policy(&self) -> CutoffPolicy {
        self.fock_cutoff.map_or(CutoffPolicy::Adaptive, CutoffPolicy::Fixed)
    }

    pub fn smallest_size(&self) -> usize {
        self.size_grid[0]
    }
}

/// Invalid model parameters are configuration errors; capacity is checked at compute time.
fn as_config(e: LabError) -> LabError {
    match e {
        LabError::Capacity { .. } | LabError::Config(_) => e,
        other => LabError::Config(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = SweepConfig::parse("# comment\nmodel = dicke\nlambda = 1.0 # trailing\nn_spins_min=2\nn_spins_max=8\nn_spins_step=2\n").unwrap();
        assert_eq!(c.model, ModelKind::Dicke);
        assert_eq!(c.size_grid, vec![2, 4, 6, 8]);
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.cutoff_policy(), CutoffPolicy::Adaptive);
        assert_eq!(SweepConfig::parse("").unwrap(), SweepConfig::default());
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let e = SweepConfig::parse("n_spins_min = 5\nn_spins_max = 4").unwrap_err();
        assert!(matches!(e, LabError::Config(_)));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn rejects_malformed_input() {
        for text in ["colour = red", "beta = fast", "beta 1", "beta = 1\nbeta = 2", "model = ising", "representation = sparse", "g_x = -1", "beta = 0", "k_max = 0", "n_spins_step = 0"] {
            assert!(matches!(SweepConfig::parse(text), Err(LabError::Config(_))), "{text}");
        }
    }

    #[test]
    fn fixed_cutoff() {
        let c = SweepConfig::parse("model = dicke\nfock_cutoff = 24").unwrap();
        assert_eq!(c.cutoff_policy(), CutoffPolicy::Fixed(24));
        assert_eq!(c.dicke(4).unwrap().fock_cutoff, 24);
    }
}
