//! JSON run configuration.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "coefficients": {"a1": 1.0, "a2": 2.0, "rho1": 1.0, "rho2": 1.0},
//!   "grid": {"T": 1.0, "L": 10.0, "n_t": 64, "n_x": 64},
//!   "seeds": {"count": 4, "base": 100},
//!   "suites": ["kernel-checks", "identity-scan", "mc-variance",
//!              "weak-equivalence", "refinement"]
//! }
//! ```
//!
//! Optional keys: `test_functions`, `tolerances`, `output_dir`, `mc`,
//! `refinement`, `scan`. Type and range errors carry the JSON path of the
//! offending field and its line and column.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::detcheck::DEFAULT_SCAN_SEED;
use crate::kernel::Coefficients;
use crate::stochastic::SpaceTimeGrid;
use crate::tolerances::Tolerances;
use crate::weakform::TestFunction;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SKEWHEAT_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "skewheat-out";

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// JSON path such as `coefficients.a1`; empty for document-level errors.
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            line: None,
            column: None,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid config")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        if !self.field.is_empty() {
            write!(f, ": field '{}'", self.field)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KernelChecks,
    IdentityScan,
    McVariance,
    WeakEquivalence,
    Refinement,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::KernelChecks => "kernel-checks",
            Suite::IdentityScan => "identity-scan",
            Suite::McVariance => "mc-variance",
            Suite::WeakEquivalence => "weak-equivalence",
            Suite::Refinement => "refinement",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub replicates: usize,
    /// `(t, x)` pairs; defaults to `(T, 0)`.
    pub points: Option<Vec<(f64, f64)>>,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            replicates: 10_000,
            points: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefinementConfig {
    /// Number of dyadic levels ending at the configured grid.
    pub levels: usize,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self { levels: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Points for the kernel checks.
    pub samples: usize,
    /// Points for the PDE, semigroup and normalization scans.
    pub identity_samples: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            identity_samples: 100,
            seed: DEFAULT_SCAN_SEED,
        }
    }
}

/// Validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub coefficients: Coefficients,
    pub grid: SpaceTimeGrid,
    pub seeds: Vec<u64>,
    pub test_functions: Vec<TestFunction>,
    pub suites: Vec<Suite>,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub mc: McConfig,
    pub refinement: RefinementConfig,
    pub scan: ScanConfig,
}

struct PositiveReal(f64);

impl<'de> Deserialize<'de> for PositiveReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        if v > 0.0 && v.is_finite() {
            Ok(Self(v))
        } else {
            Err(de::Error::custom(format!(
                "must be a finite number > 0, got {v}"
            )))
        }
    }
}

struct Count(usize);

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match usize::deserialize(d)? {
            0 => Err(de::Error::custom("must be at least 1")),
            n => Ok(Self(n)),
        }
    }
}

struct EvenCount(usize);

impl<'de> Deserialize<'de> for EvenCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match usize::deserialize(d)? {
            n if n > 0 && n % 2 == 0 => Ok(Self(n)),
            n => Err(de::Error::custom(format!(
                "must be even and positive so that no cell centre sits on x = 0, got {n}"
            ))),
        }
    }
}

struct Schema;

impl<'de> Deserialize<'de> for Schema {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match u32::deserialize(d)? {
            1 => Ok(Schema),
            v => Err(de::Error::custom(format!(
                "unsupported schema version {v}, expected 1"
            ))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficients {
    a1: PositiveReal,
    a2: PositiveReal,
    rho1: PositiveReal,
    rho2: PositiveReal,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "T")]
    horizon: PositiveReal,
    #[serde(rename = "L")]
    half_width: PositiveReal,
    n_t: Count,
    n_x: EvenCount,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSeeds {
    List(Vec<u64>),
    Range { count: Count, base: u64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[allow(dead_code)]
    schema: Schema,
    coefficients: RawCoefficients,
    grid: RawGrid,
    #[serde(default)]
    seeds: Option<RawSeeds>,
    #[serde(default)]
    test_functions: Option<Vec<TestFunction>>,
    suites: Vec<Suite>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    mc: McConfig,
    #[serde(default)]
    refinement: RefinementConfig,
    #[serde(default)]
    scan: ScanConfig,
}

impl RunConfig {
    /// Reads and validates `path`. The output directory falls back to
    /// `$SKEWHEAT_OUTPUT_DIR`, then to `skewheat-out`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::field("", format!("cannot read {}: {e}", path.display())))?;
        let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
        Self::from_json(&text, env_dir)
    }

    pub fn from_json(text: &str, default_output_dir: Option<PathBuf>) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ConfigError {
                field: if path == "." { String::new() } else { path },
                message: strip_position(&inner.to_string()),
                line: Some(inner.line()),
                column: Some(inner.column()),
            }
        })?;
        Self::validate(raw, default_output_dir)
    }

    fn validate(raw: RawConfig, default_output_dir: Option<PathBuf>) -> Result<Self, ConfigError> {
        let rc = raw.coefficients;
        let coefficients = Coefficients::new(rc.a1.0, rc.a2.0, rc.rho1.0, rc.rho2.0)
            .map_err(|e| ConfigError::field("coefficients", e.to_string()))?;
        let g = raw.grid;
        let grid = SpaceTimeGrid::new(g.horizon.0, g.half_width.0, g.n_t.0, g.n_x.0)
            .map_err(|e| ConfigError::field("grid", e.to_string()))?;

        let seeds = match raw.seeds {
            None => vec![1],
            Some(RawSeeds::List(v)) => v,
            Some(RawSeeds::Range { count, base }) => {
                (0..count.0 as u64).map(|k| base.wrapping_add(k)).collect()
            }
        };
        if seeds.is_empty() {
            return Err(ConfigError::field("seeds", "must not be empty"));
        }

        let test_functions = raw.test_functions.unwrap_or_else(|| {
            vec![
                TestFunction::straddling(grid.horizon()),
                TestFunction::offset(grid.horizon()),
            ]
        });
        if test_functions.is_empty() {
            return Err(ConfigError::field("test_functions", "must not be empty"));
        }
        for (i, phi) in test_functions.iter().enumerate() {
            phi.validate(grid.horizon())
                .map_err(|e| ConfigError::field(format!("test_functions[{i}]"), e.to_string()))?;
            let (lo, hi) = phi.space_support();
            if !(lo > -grid.half_width() && hi < grid.half_width()) {
                return Err(ConfigError::field(
                    format!("test_functions[{i}]"),
                    format!("space support [{lo}, {hi}] must lie inside (-L, L)"),
                ));
            }
        }

        let mut suites = raw.suites;
        if suites.is_empty() {
            return Err(ConfigError::field("suites", "must list at least one suite"));
        }
        suites.sort();
        suites.dedup();

        raw.tolerances
            .quadrature
            .validate()
            .map_err(|e| ConfigError::field("tolerances.quadrature", e.to_string()))?;

        if let Some(points) = &raw.mc.points {
            if points.is_empty() {
                return Err(ConfigError::field("mc.points", "must not be empty"));
            }
            for (i, &(t, x)) in points.iter().enumerate() {
                if !(t > 0.0 && t <= grid.horizon() && x.is_finite()) {
                    return Err(ConfigError::field(
                        format!("mc.points[{i}]"),
                        format!("({t}, {x}) lies outside (0, T] x R"),
                    ));
                }
            }
        }
        if raw.mc.replicates < 2 {
            return Err(ConfigError::field("mc.replicates", "must be at least 2"));
        }
        let levels = raw.refinement.levels;
        if levels == 0 {
            return Err(ConfigError::field(
                "refinement.levels",
                "must be at least 1",
            ));
        }
        let step = 1usize.checked_shl(levels as u32 - 1).unwrap_or(0);
        if step == 0 || grid.n_t() % step != 0 || grid.n_x() % (2 * step) != 0 {
            return Err(ConfigError::field(
                "refinement.levels",
                format!(
                    "{levels} dyadic levels need n_t divisible by {step} and n_x by {}",
                    2 * step
                ),
            ));
        }
        if raw.scan.samples == 0 || raw.scan.identity_samples == 0 {
            return Err(ConfigError::field("scan", "sample counts must be positive"));
        }

        let output_dir = raw
            .output_dir
            .or(default_output_dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

        Ok(Self {
            coefficients,
            grid,
            seeds,
            test_functions,
            suites,
            tolerances: raw.tolerances,
            output_dir,
            mc: raw.mc,
            refinement: raw.refinement,
            scan: raw.scan,
        })
    }

    /// Refinement ladder, coarsest first, ending at the configured grid.
    pub fn ladder(&self) -> Vec<SpaceTimeGrid> {
        let levels = self.refinement.levels;
        (0..levels)
            .rev()
            .map(|k| {
                let f = 1usize << k;
                self.grid.coarsen(f, f).expect("ladder checked at load")
            })
            .collect()
    }

    pub fn mc_points(&self) -> Vec<(f64, f64)> {
        self.mc
            .points
            .clone()
            .unwrap_or_else(|| vec![(self.grid.horizon(), 0.0)])
    }
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
