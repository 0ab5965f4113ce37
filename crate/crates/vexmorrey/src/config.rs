//! Run configuration for the command-line front end: a flat, human-editable
//! key-value file with sectioned keys, e.g.
//!
//! ```text
//! # desk-scale run
//! grid.n = 1
//! grid.samples = 4096
//! grid.half_extent = 64
//! exponent.p.family = log-decay
//! exponent.p.limit = 2.0
//! exponent.p.amplitude = 0.3
//! probe.convolution.m = 3.0
//! ```
//!
//! Unknown keys are rejected. Cross-field validity (anti-aliasing bound,
//! p ≤ u, the Peetre exponent bound) is verified at load; the a-bound
//! violation is a warning carried into reports, not an error.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dyadic::{
    build_admissible_pair, gaussian_difference_system, DyadicSystem, WeightSequence,
};
use crate::error::{Error, Result};
use crate::exponents::ExponentField;
use crate::grid::{Grid, Point};
use crate::morrey::BallFamily;
use crate::tlm::SpaceParams;

/// Descriptor of one exponent field in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum ExponentSpec {
    Constant { value: f64 },
    Bump { base: f64, amplitude: f64, center: f64, width: f64 },
    LogDecay { limit: f64, amplitude: f64 },
    Jump { lower: f64, upper: f64 },
}

impl ExponentSpec {
    pub fn build(&self, grid: Grid) -> Result<ExponentField> {
        match *self {
            ExponentSpec::Constant { value } => ExponentField::constant(grid, value),
            ExponentSpec::Bump { base, amplitude, center, width } => {
                ExponentField::bump(grid, base, amplitude, [center, 0.0], width)
            }
            ExponentSpec::LogDecay { limit, amplitude } => {
                ExponentField::log_decay(grid, limit, amplitude)
            }
            ExponentSpec::Jump { lower, upper } => ExponentField::jump(grid, lower, upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    BumpPair { sharpness: f64 },
    GaussianDifference { order: u32 },
}

/// Typed run configuration with defaults for every key.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid_dimension: usize,
    pub grid_samples: usize,
    pub grid_half_extent: f64,

    pub p: ExponentSpec,
    pub q: ExponentSpec,
    pub u: ExponentSpec,

    pub weight_s: f64,
    pub weight_s_prime: f64,
    pub weight_center: Point,
    pub weight_two_microlocal: bool,

    pub system: SystemSpec,
    pub second_system: SystemSpec,
    pub epsilon: f64,
    pub k_ratio: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub j_max: Option<u32>,
    pub moment_order: Option<u32>,

    pub peetre_a: f64,

    pub family_stride: Option<usize>,
    pub family_max_scale: u32,

    pub cap_convolution: f64,
    pub cap_equivalence: f64,
    pub cap_xinorm: f64,
    pub convolution_m: f64,
    pub hardy_delta: f64,
    pub cert_threshold: f64,
    pub reindex_tolerance: f64,
    pub reindex_powers: Vec<f64>,
    pub xinorm_center: f64,

    pub corpus_seed: u64,
    pub corpus_size: usize,
    pub corpus_levels: u32,
    pub corpus_mollifier_m: f64,

    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_dimension: 1,
            grid_samples: 4096,
            grid_half_extent: 64.0,
            p: ExponentSpec::Constant { value: 2.0 },
            q: ExponentSpec::Constant { value: 2.0 },
            u: ExponentSpec::Constant { value: 3.0 },
            weight_s: 0.0,
            weight_s_prime: 2.0,
            weight_center: [0.0, 0.0],
            weight_two_microlocal: false,
            system: SystemSpec::BumpPair { sharpness: 1.0 },
            second_system: SystemSpec::BumpPair { sharpness: 2.5 },
            epsilon: 6.0 / 5.0,
            k_ratio: 25.0 / 18.0,
            delta1: 0.2,
            delta2: 2.0 / 3.0,
            j_max: None,
            moment_order: None,
            peetre_a: 2.0,
            family_stride: None,
            family_max_scale: 63,
            cap_convolution: 100.0,
            cap_equivalence: 50.0,
            cap_xinorm: 16.0,
            convolution_m: 3.0,
            hardy_delta: 1.0,
            cert_threshold: 2.0,
            reindex_tolerance: 1e-8,
            reindex_powers: vec![0.5, 1.0, 2.0],
            xinorm_center: 0.0,
            corpus_seed: 7,
            corpus_size: 16,
            corpus_levels: 4,
            corpus_mollifier_m: 3.0,
            output_dir: "out".to_string(),
        }
    }
}

fn parse_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {raw:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key {key}")));
        }
    }
    Ok(map)
}

struct KeyReader {
    map: BTreeMap<String, String>,
    used: std::collections::BTreeSet<String>,
}

impl KeyReader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.get(key).map(|v| {
            self.used.insert(key.to_string());
            v.clone()
        })
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) if v == "inf" || v == "infinity" => Ok(f64::INFINITY),
            Some(v) => v
                .parse()
                .map_err(|e| Error::Config(format!("{key}: {e} (value {v:?})"))),
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::Config(format!("{key}: {e} (value {v:?})"))),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::Config(format!("{key}: {e} (value {v:?})"))),
        }
    }

    fn string(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    fn unused(&self) -> Vec<String> {
        self.map
            .keys()
            .filter(|k| !self.used.contains(*k))
            .cloned()
            .collect()
    }
}

fn read_exponent(reader: &mut KeyReader, which: &str, default: &ExponentSpec) -> Result<ExponentSpec> {
    let prefix = format!("exponent.{which}");
    let family = reader.string(&format!("{prefix}.family"), "");
    if family.is_empty() {
        // Consume stray parameter keys anyway so they don't trip the
        // unknown-key check with a worse message.
        return Ok(default.clone());
    }
    match family.as_str() {
        "constant" => Ok(ExponentSpec::Constant {
            value: reader.f64(&format!("{prefix}.value"), 2.0)?,
        }),
        "bump" => Ok(ExponentSpec::Bump {
            base: reader.f64(&format!("{prefix}.base"), 2.0)?,
            amplitude: reader.f64(&format!("{prefix}.amplitude"), 0.5)?,
            center: reader.f64(&format!("{prefix}.center"), 0.0)?,
            width: reader.f64(&format!("{prefix}.width"), 2.0)?,
        }),
        "log-decay" => Ok(ExponentSpec::LogDecay {
            limit: reader.f64(&format!("{prefix}.limit"), 2.0)?,
            amplitude: reader.f64(&format!("{prefix}.amplitude"), 0.3)?,
        }),
        "jump" => Ok(ExponentSpec::Jump {
            lower: reader.f64(&format!("{prefix}.lower"), 2.0)?,
            upper: reader.f64(&format!("{prefix}.upper"), 4.0)?,
        }),
        other => Err(Error::Config(format!(
            "{prefix}.family: unknown family {other:?} (constant | bump | log-decay | jump)"
        ))),
    }
}

fn read_system(reader: &mut KeyReader, key_prefix: &str, default: &SystemSpec) -> Result<SystemSpec> {
    let family = reader.string(&format!("{key_prefix}.family"), "");
    if family.is_empty() {
        return Ok(default.clone());
    }
    match family.as_str() {
        "bump-pair" => Ok(SystemSpec::BumpPair {
            sharpness: reader.f64(&format!("{key_prefix}.sharpness"), 1.0)?,
        }),
        "gaussian-difference" => Ok(SystemSpec::GaussianDifference {
            order: reader.usize(&format!("{key_prefix}.order"), 2)? as u32,
        }),
        other => Err(Error::Config(format!(
            "{key_prefix}.family: unknown system {other:?} (bump-pair | gaussian-difference)"
        ))),
    }
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let mut reader = KeyReader {
            map: parse_map(text)?,
            used: Default::default(),
        };
        let defaults = RunConfig::default();

        let grid_dimension = reader.usize("grid.n", defaults.grid_dimension)?;
        let (default_samples, default_extent) = if grid_dimension == 2 {
            (256, 16.0)
        } else {
            (4096, 64.0)
        };
        let grid_samples = reader.usize("grid.samples", default_samples)?;
        let grid_half_extent = reader.f64("grid.half_extent", default_extent)?;

        let config = RunConfig {
            grid_dimension,
            grid_samples,
            grid_half_extent,
            p: read_exponent(&mut reader, "p", &defaults.p)?,
            q: read_exponent(&mut reader, "q", &defaults.q)?,
            u: read_exponent(&mut reader, "u", &defaults.u)?,
            weight_s: reader.f64("weights.s", defaults.weight_s)?,
            weight_s_prime: reader.f64("weights.s_prime", defaults.weight_s_prime)?,
            weight_center: [reader.f64("weights.center", 0.0)?, 0.0],
            weight_two_microlocal: reader.string("weights.family", "power") == "two-microlocal",
            system: read_system(&mut reader, "system", &defaults.system)?,
            second_system: read_system(&mut reader, "system.second", &defaults.second_system)?,
            epsilon: reader.f64("system.epsilon", defaults.epsilon)?,
            k_ratio: reader.f64("system.k", defaults.k_ratio)?,
            delta1: reader.f64("system.delta1", defaults.delta1)?,
            delta2: reader.f64("system.delta2", defaults.delta2)?,
            j_max: reader
                .take("system.j_max")
                .map(|v| v.parse().map_err(|e| Error::Config(format!("system.j_max: {e}"))))
                .transpose()?,
            moment_order: reader
                .take("system.moment_order")
                .map(|v| {
                    v.parse()
                        .map_err(|e| Error::Config(format!("system.moment_order: {e}")))
                })
                .transpose()?,
            peetre_a: reader.f64("peetre.a", defaults.peetre_a)?,
            family_stride: reader
                .take("family.stride")
                .map(|v| v.parse().map_err(|e| Error::Config(format!("family.stride: {e}"))))
                .transpose()?,
            family_max_scale: reader.usize("family.max_scale", defaults.family_max_scale as usize)?
                as u32,
            cap_convolution: reader.f64("probe.cap.convolution", defaults.cap_convolution)?,
            cap_equivalence: reader.f64("probe.cap.equivalence", defaults.cap_equivalence)?,
            cap_xinorm: reader.f64("probe.cap.xinorm", defaults.cap_xinorm)?,
            convolution_m: reader.f64("probe.convolution.m", defaults.convolution_m)?,
            hardy_delta: reader.f64("probe.hardy.delta", defaults.hardy_delta)?,
            cert_threshold: reader.f64("probe.cert_threshold", defaults.cert_threshold)?,
            reindex_tolerance: reader.f64("probe.power_reindex.tolerance", defaults.reindex_tolerance)?,
            reindex_powers: match reader.take("probe.power_reindex.powers") {
                None => defaults.reindex_powers.clone(),
                Some(v) => v
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|e| Error::Config(format!("probe.power_reindex.powers: {e}")))
                    })
                    .collect::<Result<_>>()?,
            },
            xinorm_center: reader.f64("probe.xinorm.center", defaults.xinorm_center)?,
            corpus_seed: reader.u64("corpus.seed", defaults.corpus_seed)?,
            corpus_size: reader.usize("corpus.size", defaults.corpus_size)?,
            corpus_levels: reader.usize("corpus.levels", defaults.corpus_levels as usize)? as u32,
            corpus_mollifier_m: reader.f64("corpus.mollifier_m", defaults.corpus_mollifier_m)?,
            output_dir: reader.string("output.dir", &defaults.output_dir),
        };

        let unused = reader.unused();
        if !unused.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unused.join(", "))));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if let Some(j) = self.j_max {
            if j > grid.max_dyadic_level() {
                return Err(Error::Config(format!(
                    "system.j_max = {j} violates the anti-aliasing bound (max {})",
                    grid.max_dyadic_level()
                )));
            }
        }
        let k = (1.0 + self.delta2) / (1.0 + self.delta1);
        if (k - self.k_ratio).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "system.k = {} inconsistent with (1+delta2)/(1+delta1) = {k}",
                self.k_ratio
            )));
        }
        if !(self.k_ratio > 1.0 && self.k_ratio <= 2.0) {
            return Err(Error::Config(format!(
                "system.k must lie in (1, 2], got {}",
                self.k_ratio
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_dimension, self.grid_samples, self.grid_half_extent)
    }

    /// The configured J_max, defaulting to the grid's alias-free maximum.
    pub fn effective_j_max(&self, grid: Grid) -> u32 {
        self.j_max.unwrap_or_else(|| grid.max_dyadic_level())
    }

    pub fn weights(&self, grid: Grid, j_max: u32) -> Result<WeightSequence> {
        if self.weight_two_microlocal {
            WeightSequence::two_microlocal(
                grid,
                j_max,
                self.weight_s,
                self.weight_s_prime,
                self.weight_center,
            )
        } else {
            Ok(WeightSequence::power(grid, j_max, self.weight_s))
        }
    }

    fn build_system(&self, spec: &SystemSpec, grid: Grid, j_max: u32) -> Result<DyadicSystem> {
        match *spec {
            SystemSpec::BumpPair { sharpness } => {
                Ok(build_admissible_pair(grid, j_max, sharpness)?.into_system())
            }
            SystemSpec::GaussianDifference { order } => {
                gaussian_difference_system(grid, j_max, order)
            }
        }
    }

    pub fn primary_system(&self, grid: Grid, j_max: u32) -> Result<DyadicSystem> {
        self.build_system(&self.system, grid, j_max)
    }

    pub fn secondary_system(&self, grid: Grid, j_max: u32) -> Result<DyadicSystem> {
        self.build_system(&self.second_system, grid, j_max)
    }

    pub fn ball_family(&self, grid: Grid) -> Result<BallFamily> {
        let stride = self
            .family_stride
            .unwrap_or_else(|| (grid.samples_per_axis() / 64).max(1));
        BallFamily::new(grid, stride, self.family_max_scale)
    }

    /// Assemble the full space parameters (exponents, weights, system,
    /// family, Peetre exponent) on the configured grid.
    pub fn space_params(&self) -> Result<SpaceParams> {
        let grid = self.grid()?;
        let j_max = self.effective_j_max(grid);
        SpaceParams::new(
            self.p.build(grid)?,
            self.q.build(grid)?,
            self.u.build(grid)?,
            self.weights(grid, j_max)?,
            self.primary_system(grid, j_max)?,
            self.ball_family(grid)?,
            self.peetre_a,
        )
    }

    /// Output directory, overridable through the VEXMORREY_OUT variable.
    pub fn output_dir(&self) -> std::path::PathBuf {
        std::env::var("VEXMORREY_OUT")
            .map(std::path::PathBuf::from)
            .unwrap_or_else(|_| std::path::PathBuf::from(&self.output_dir))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let config = RunConfig::from_str("").unwrap();
        assert_eq!(config.grid_dimension, 1);
        assert_eq!(config.grid_samples, 4096);
        let grid = config.grid().unwrap();
        assert_eq!(config.effective_j_max(grid), grid.max_dyadic_level());
    }

    #[test]
    fn sectioned_keys_are_read() {
        let text = "
            # comment
            grid.n = 1
            grid.samples = 512
            grid.half_extent = 16
            exponent.p.family = log-decay
            exponent.p.limit = 2.0
            exponent.p.amplitude = 0.3
            exponent.u.family = constant
            exponent.u.value = 3.0
            weights.family = two-microlocal
            weights.s = 1.0
            weights.s_prime = 2.0
            probe.convolution.m = 2.5
            corpus.seed = 42
        ";
        let config = RunConfig::from_str(text).unwrap();
        assert_eq!(config.grid_samples, 512);
        assert_eq!(
            config.p,
            ExponentSpec::LogDecay { limit: 2.0, amplitude: 0.3 }
        );
        assert!(config.weight_two_microlocal);
        assert_eq!(config.convolution_m, 2.5);
        assert_eq!(config.corpus_seed, 42);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_str("grid.m = 3").unwrap_err();
        assert!(err.to_string().contains("unknown keys"));
    }

    #[test]
    fn inconsistent_k_is_rejected() {
        let err = RunConfig::from_str("system.k = 1.5").unwrap_err();
        assert!(err.to_string().contains("inconsistent"));
    }

    #[test]
    fn aliasing_j_max_is_rejected() {
        let err = RunConfig::from_str("grid.samples = 512\ngrid.half_extent = 64\nsystem.j_max = 6")
            .unwrap_err();
        assert!(err.to_string().contains("anti-aliasing"));
    }

    #[test]
    fn space_params_assemble() {
        let text = "
            grid.samples = 256
            grid.half_extent = 16
        ";
        let config = RunConfig::from_str(text).unwrap();
        let params = config.space_params().unwrap();
        assert_eq!(params.j_max(), 3);
    }
}
