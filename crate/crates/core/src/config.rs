//! JSON problem configuration and the built-in examples.
//!
//! `f` is declared over `(x, p)` and `g` over `(y, q)`. Infinite box bounds
//! are written as the strings `"inf"` and `"-inf"`.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::analysis::Thresholds;
use crate::expr::Expression;
use crate::geometry::{ConvexSetSpec, GeometryError, Halfspace, LinearOperatorSpec};
use crate::sep::{Grids, SepError, SplitProblem};

/// Window radius given to unbounded sets that do not declare one.
pub const DEFAULT_WINDOW: f64 = 10.0;

pub const DEFAULT_SCHEDULE: [f64; 5] = [0.1, 0.05, 0.01, 0.005, 0.001];

pub const BUILTIN_NAMES: [&str; 3] = ["builtin:example1", "builtin:example2", "builtin:example3"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown builtin `{0}`; expected one of builtin:example1, builtin:example2, builtin:example3")]
    UnknownBuiltin(String),
}

fn invalid(key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.to_string() }
}

/// A box bound that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct BoundVisitor;
        impl Visitor<'_> for BoundVisitor {
            type Value = Bound;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Bound, E> {
                Ok(Bound(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Bound, E> {
                Ok(Bound(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Bound, E> {
                Ok(Bound(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Bound, E> {
                match v {
                    "inf" | "+inf" => Ok(Bound(f64::INFINITY)),
                    "-inf" => Ok(Bound(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(BoundVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Box,
    Ball,
    Halfspaces,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceConfig {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// One convex set. Which fields apply depends on `shape`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    pub shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<Bound>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<Bound>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<HalfspaceConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl SetConfig {
    pub fn interval(lower: f64, upper: f64, window: Option<f64>) -> Self {
        SetConfig {
            shape: ShapeKind::Box,
            lower: Some(vec![Bound(lower)]),
            upper: Some(vec![Bound(upper)]),
            center: None,
            radius: None,
            constraints: None,
            witness: None,
            bounds: None,
            window,
        }
    }

    fn build(&self, key: &str, dim: usize) -> Result<ConvexSetSpec, ConfigError> {
        let need = |field: &str| invalid(&format!("{key}.{field}"), format!("required for shape {:?}", self.shape));
        let geometry = |e: GeometryError| invalid(key, e);
        let check_len = |field: &str, len: usize| {
            if len == dim {
                Ok(())
            } else {
                Err(invalid(&format!("{key}.{field}"), format!("expected {dim} entries, got {len}")))
            }
        };
        let unused: &[(&str, bool)] = match self.shape {
            ShapeKind::Box => &[
                ("center", self.center.is_some()),
                ("radius", self.radius.is_some()),
                ("constraints", self.constraints.is_some()),
                ("witness", self.witness.is_some()),
                ("bounds", self.bounds.is_some()),
            ],
            ShapeKind::Ball => &[
                ("lower", self.lower.is_some()),
                ("upper", self.upper.is_some()),
                ("constraints", self.constraints.is_some()),
                ("witness", self.witness.is_some()),
                ("bounds", self.bounds.is_some()),
            ],
            ShapeKind::Halfspaces => &[
                ("lower", self.lower.is_some()),
                ("upper", self.upper.is_some()),
                ("center", self.center.is_some()),
                ("radius", self.radius.is_some()),
            ],
        };
        if let Some((field, _)) = unused.iter().find(|(_, present)| *present) {
            return Err(invalid(&format!("{key}.{field}"), format!("not valid for shape {:?}", self.shape)));
        }
        let set = match self.shape {
            ShapeKind::Box => {
                let lower = self.lower.as_ref().ok_or_else(|| need("lower"))?;
                let upper = self.upper.as_ref().ok_or_else(|| need("upper"))?;
                check_len("lower", lower.len())?;
                check_len("upper", upper.len())?;
                ConvexSetSpec::new_box(lower.iter().map(|b| b.0).collect(), upper.iter().map(|b| b.0).collect())
                    .map_err(geometry)?
            }
            ShapeKind::Ball => {
                let center = self.center.as_ref().ok_or_else(|| need("center"))?;
                check_len("center", center.len())?;
                ConvexSetSpec::new_ball(center.clone(), self.radius.ok_or_else(|| need("radius"))?).map_err(geometry)?
            }
            ShapeKind::Halfspaces => {
                let constraints = self.constraints.as_ref().ok_or_else(|| need("constraints"))?;
                let witness = self.witness.as_ref().ok_or_else(|| need("witness"))?;
                check_len("witness", witness.len())?;
                let mut hs = Vec::with_capacity(constraints.len());
                for (i, c) in constraints.iter().enumerate() {
                    check_len(&format!("constraints[{i}].normal"), c.normal.len())?;
                    hs.push(Halfspace { normal: c.normal.clone(), offset: c.offset });
                }
                let bounds = match &self.bounds {
                    Some(b) => {
                        check_len("bounds.lower", b.lower.len())?;
                        check_len("bounds.upper", b.upper.len())?;
                        Some((b.lower.clone(), b.upper.clone()))
                    }
                    None => None,
                };
                ConvexSetSpec::new_halfspaces(hs, witness.clone(), bounds).map_err(geometry)?
            }
        };
        match self.window {
            Some(r) => set.with_window(r).map_err(|e| invalid(&format!("{key}.window"), e)),
            None if !set.is_bounded() => set.with_window(DEFAULT_WINDOW).map_err(geometry),
            None => Ok(set),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sets {
    #[serde(rename = "C")]
    pub c: SetConfig,
    #[serde(rename = "Q")]
    pub q: SetConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exprs {
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// Rows of the `m × n` matrix.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsConfig {
    pub h_out: f64,
    pub h_in: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsConfig {
    pub tau_diam: f64,
    pub tau_h: f64,
    pub ratio: f64,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        ThresholdsConfig { tau_diam: t.tau_diam, tau_h: t.tau_h, ratio: t.ratio }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    #[serde(default = "default_budget")]
    pub kuratowski_budget: usize,
}

fn default_budget() -> usize {
    8
}

impl Default for Limits {
    fn default() -> Self {
        Limits { kuratowski_budget: default_budget() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dims: Dims,
    pub sets: Sets,
    pub exprs: Exprs,
    pub operator: OperatorConfig,
    pub grids: GridsConfig,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub limits: Limits,
}

fn default_schedule() -> Vec<f64> {
    DEFAULT_SCHEDULE.to_vec()
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ProblemConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a file, or a compiled-in example for `builtin:exampleN`.
    pub fn load(source: &str) -> Result<Self, ConfigError> {
        if source.starts_with("builtin:") {
            return Self::builtin(source);
        }
        let text = std::fs::read_to_string(Path::new(source))
            .map_err(|e| ConfigError::Io { path: source.to_string(), source: e })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that does not need the sets or expressions built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dims.n == 0 {
            return Err(invalid("dims.n", "must be positive"));
        }
        if self.dims.m == 0 {
            return Err(invalid("dims.m", "must be positive"));
        }
        for (key, h) in [("grids.h_out", self.grids.h_out), ("grids.h_in", self.grids.h_in)] {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid(key, format!("must be positive, got {h}")));
            }
        }
        if self.schedule.len() < 4 {
            return Err(invalid("schedule", "needs at least four values"));
        }
        if self.schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) || self.schedule.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(invalid("schedule", "values must be positive and strictly decreasing"));
        }
        let t = &self.thresholds;
        for (key, v) in [("thresholds.tau_diam", t.tau_diam), ("thresholds.tau_h", t.tau_h)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(key, "must be nonnegative"));
            }
        }
        if !(t.ratio > 0.0 && t.ratio < 1.0) {
            return Err(invalid("thresholds.ratio", "must lie in (0, 1)"));
        }
        if self.limits.kuratowski_budget == 0 {
            return Err(invalid("limits.kuratowski_budget", "must be at least 1"));
        }
        let a = &self.operator.matrix;
        if a.len() != self.dims.m || a.iter().any(|row| row.len() != self.dims.n) {
            return Err(invalid(
                "operator.matrix",
                format!("expected {} rows of {} entries", self.dims.m, self.dims.n),
            ));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<SplitProblem, ConfigError> {
        self.validate()?;
        let Dims { n, m } = self.dims;
        let c = self.sets.c.build("sets.C", n)?;
        let q = self.sets.q.build("sets.Q", m)?;
        let f = Expression::bifunction(&self.exprs.f, "x", "p", n).map_err(|e| invalid("exprs.f", e))?;
        let g = Expression::bifunction(&self.exprs.g, "y", "q", m).map_err(|e| invalid("exprs.g", e))?;
        let a = LinearOperatorSpec::from_rows(&self.operator.matrix).map_err(|e| invalid("operator.matrix", e))?;
        let grids = Grids::new(self.grids.h_out, self.grids.h_in).map_err(|e| invalid("grids", e))?;
        SplitProblem::new(c, q, f, g, a, grids).map_err(|e: SepError| invalid("dims", e))
    }

    pub fn thresholds(&self) -> Thresholds {
        let t = self.thresholds;
        Thresholds { tau_diam: t.tau_diam, tau_h: t.tau_h, ratio: t.ratio }
    }

    /// Overrides the window of every set that is unbounded without one.
    pub fn set_window_radius(&mut self, radius: f64) {
        for set in [&mut self.sets.c, &mut self.sets.q] {
            let unbounded = match set.shape {
                ShapeKind::Box => set.lower.iter().chain(set.upper.iter()).flatten().any(|b| b.0.is_infinite()),
                ShapeKind::Ball => false,
                ShapeKind::Halfspaces => set.bounds.is_none(),
            };
            if unbounded {
                set.window = Some(radius);
            }
        }
    }

    pub fn builtin(name: &str) -> Result<Self, ConfigError> {
        let one = |c: SetConfig, f: &str, g: &str, h_out: f64, h_in: f64| ProblemConfig {
            dims: Dims { n: 1, m: 1 },
            sets: Sets { c: c.clone(), q: c },
            exprs: Exprs { f: f.into(), g: g.into() },
            operator: OperatorConfig { matrix: vec![vec![1.0]] },
            grids: GridsConfig { h_out, h_in },
            schedule: default_schedule(),
            thresholds: ThresholdsConfig::default(),
            seed: 0,
            limits: Limits::default(),
        };
        // dyadic spacings keep 0.5 and the window ends on the lattice
        let config = match name {
            "builtin:example1" => one(
                SetConfig::interval(f64::NEG_INFINITY, f64::INFINITY, Some(2.0)),
                "p^2 - x^2",
                "-y^2*exp(-q^2)",
                1.0 / 4096.0,
                1.0 / 4096.0,
            ),
            "builtin:example2" => one(
                SetConfig::interval(0.0, 1.0, None),
                "if(x < 0.5, x, x^2/2)",
                "if(y == 0.5, 0, 2)",
                1.0 / 4096.0,
                1.0 / 4096.0,
            ),
            "builtin:example3" => one(
                SetConfig::interval(0.0, f64::INFINITY, Some(10.0)),
                "p^2 - x^2",
                "q - y",
                1.0 / 1024.0,
                1.0 / 16384.0,
            ),
            other => return Err(ConfigError::UnknownBuiltin(other.to_string())),
        };
        Ok(config)
    }
}
