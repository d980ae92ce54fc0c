//! TOML manifest schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MANIFEST_VERSION: u32 = 1;

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub charts: Vec<ChartSpec>,
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub name: String,
    pub coords: Vec<String>,
    /// Full symmetric matrix of expressions.
    pub metric: Option<Vec<Vec<String>>>,
    /// Diagonal entries; off-diagonal entries are zero.
    pub diagonal: Option<Vec<String>>,
    /// One open interval `[lo, hi]` per coordinate.
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Sequential,
    Multiply,
    Iterated,
    StandardStatic,
    Grw,
}

impl ConstructionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstructionKind::Sequential => "sequential",
            ConstructionKind::Multiply => "multiply",
            ConstructionKind::Iterated => "iterated",
            ConstructionKind::StandardStatic => "standard_static",
            ConstructionKind::Grw => "grw",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    /// Three chart names, or two for the space-time kinds.
    pub factors: Vec<String>,
    pub f: Option<String>,
    pub fbar: Option<String>,
    pub f1: Option<String>,
    pub f2: Option<String>,
    pub scale: Option<String>,
    pub inner: Option<String>,
    pub time: Option<TimeSpec>,
}

fn default_time_coord() -> String {
    "t".into()
}

fn default_sign() -> f64 {
    -1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default = "default_time_coord")]
    pub coord: String,
    pub interval: [f64; 2],
    #[serde(default = "default_sign")]
    pub sign: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    /// Components per factor, keyed by chart name. Missing factors are zero.
    pub blocks: Option<BTreeMap<String, Vec<String>>>,
    /// Components on the total chart in report order.
    pub total: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LambdaInput {
    Value(f64),
    Mode(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub point: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RunSpec {
    Describe {
        name: Option<String>,
    },
    Curvature {
        name: Option<String>,
        points: Vec<Vec<f64>>,
        tolerance: Option<f64>,
        #[serde(default)]
        expect: Expect,
    },
    VerifyTheorems {
        name: Option<String>,
        samples: Option<usize>,
        seed: Option<u64>,
        tolerance: Option<f64>,
        lambda: Option<LambdaInput>,
        #[serde(default)]
        expect: Expect,
    },
    Geodesic {
        name: Option<String>,
        point: Option<Vec<f64>>,
        velocity: Option<Vec<f64>>,
        /// Prescribed curve in the parameter `s`, one expression per coordinate.
        curve: Option<Vec<String>>,
        t_start: Option<f64>,
        t_end: Option<f64>,
        dt: Option<f64>,
        tolerance: Option<f64>,
        #[serde(default)]
        conserved: Vec<String>,
        #[serde(default)]
        expect: Expect,
    },
    Killing {
        name: Option<String>,
        field: String,
        samples: Option<usize>,
        seed: Option<u64>,
        tolerance: Option<f64>,
        #[serde(default)]
        conformal: bool,
        #[serde(default)]
        decomposition: Vec<DecompositionSpec>,
        #[serde(default)]
        expect: Expect,
    },
    Concircular {
        name: Option<String>,
        field: String,
        samples: Option<usize>,
        seed: Option<u64>,
        tolerance: Option<f64>,
        #[serde(default)]
        expect: Expect,
    },
    SpacetimeSuite {
        name: Option<String>,
        u: String,
        samples: Option<usize>,
        seed: Option<u64>,
        tolerance: Option<f64>,
        #[serde(default)]
        expect: Expect,
    },
}

impl RunSpec {
    pub fn command(&self) -> &'static str {
        match self {
            RunSpec::Describe { .. } => "describe",
            RunSpec::Curvature { .. } => "curvature",
            RunSpec::VerifyTheorems { .. } => "verify-theorems",
            RunSpec::Geodesic { .. } => "geodesic",
            RunSpec::Killing { .. } => "killing",
            RunSpec::Concircular { .. } => "concircular",
            RunSpec::SpacetimeSuite { .. } => "spacetime-suite",
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            RunSpec::Describe { name }
            | RunSpec::Curvature { name, .. }
            | RunSpec::VerifyTheorems { name, .. }
            | RunSpec::Geodesic { name, .. }
            | RunSpec::Killing { name, .. }
            | RunSpec::Concircular { name, .. }
            | RunSpec::SpacetimeSuite { name, .. } => name.as_deref(),
        }
    }

    pub fn expect(&self) -> Expect {
        match self {
            RunSpec::Describe { .. } => Expect::Pass,
            RunSpec::Curvature { expect, .. }
            | RunSpec::VerifyTheorems { expect, .. }
            | RunSpec::Geodesic { expect, .. }
            | RunSpec::Killing { expect, .. }
            | RunSpec::Concircular { expect, .. }
            | RunSpec::SpacetimeSuite { expect, .. } => *expect,
        }
    }
}

pub const COMMANDS: [&str; 7] =
    ["describe", "curvature", "verify-theorems", "geodesic", "killing", "concircular", "spacetime-suite"];

pub fn parse_manifest(src: &str) -> Result<Manifest, CliError> {
    let m: Manifest = toml::from_str(src).map_err(|e| CliError::Syntax(e.to_string()))?;
    if m.version != MANIFEST_VERSION {
        return Err(CliError::Manifest(format!(
            "unsupported manifest version {} (expected {MANIFEST_VERSION})",
            m.version
        )));
    }
    Ok(m)
}
