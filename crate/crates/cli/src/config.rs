//! Run configuration: JSON on disk, overridable from the command line.

use std::path::{Path, PathBuf};

use isoasym::backlund::MonotoneMap;
use isoasym::fields::{make_grid, Tolerance};
use isoasym::{Error, Grid, Result};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub family: FamilyConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

impl GridConfig {
    pub fn square(x0: f64, n: usize, length: f64) -> Self {
        Self { x0, y0: x0, nx: n, ny: n, h: length / (n - 1) as f64 }
    }

    pub fn to_grid(&self) -> Result<Grid> {
        make_grid(self.x0, self.y0, self.nx, self.ny, self.h)
    }

    /// `nx,ny,h,x0,y0`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("--grid expects nx,ny,h,x0,y0, got {s:?}"));
        if parts.len() != 5 {
            return Err(bad());
        }
        let nx = parts[0].parse().map_err(|_| bad())?;
        let ny = parts[1].parse().map_err(|_| bad())?;
        let f = |k: usize| parts[k].parse::<f64>().map_err(|_| bad());
        Ok(Self { nx, ny, h: f(2)?, x0: f(3)?, y0: f(4)? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Quadric(QuadricParams),
    Rotation(RotationParams),
    Steiner(SteinerParams),
    Kummer(KummerParams),
    ProjApplicable(ProjApplicableParams),
    AffineSphere(AffineSphereParams),
}

impl FamilyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyConfig::Quadric(_) => "quadric",
            FamilyConfig::Rotation(_) => "rotation",
            FamilyConfig::Steiner(_) => "steiner",
            FamilyConfig::Kummer(_) => "kummer",
            FamilyConfig::ProjApplicable(_) => "proj_applicable",
            FamilyConfig::AffineSphere(_) => "affine_sphere",
        }
    }
}

/// `V(x) = Σ v[k] x^k`, `W(y) = Σ w[k] y^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct QuadricParams {
    #[serde(default)]
    pub v: Vec<f64>,
    #[serde(default)]
    pub w: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sech,
}

/// `p(s) = amplitude · profile(frequency · s)` with `s = x + y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RotationParams {
    pub profile: Profile,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub frequency: f64,
    pub c: f64,
}

impl RotationParams {
    pub fn eval(&self, s: f64) -> f64 {
        let t = self.frequency * s;
        self.amplitude
            * match self.profile {
                Profile::Sin => t.sin(),
                Profile::Cos => t.cos(),
                Profile::Exp => t.exp(),
                Profile::Tanh => t.tanh(),
                Profile::Sech => 1.0 / t.cosh(),
            }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SteinerParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub f0: f64,
    pub g0: f64,
}

/// `poly[k]` is the coefficient of `f^k`, at most degree 6.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct KummerParams {
    pub poly: Vec<f64>,
    pub f0: f64,
    pub g0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ProjApplicableParams {
    pub poly: Vec<f64>,
    pub c: f64,
    pub a0: f64,
    pub b0: f64,
    pub f_init: f64,
    pub f0: f64,
    pub g0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AffineSphereParams {
    pub c: f64,
    pub p0: f64,
    pub dp0: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub dual: bool,
    #[serde(default)]
    pub backlund: bool,
    /// Corner state `(r, r_x, r_y, r_xy)` for the Bäcklund seed.
    #[serde(default = "default_r0_init")]
    pub r0_init: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reparam: Option<ReparamConfig>,
    #[serde(default)]
    pub reconstruct: bool,
    /// Also integrate the Lelieuvre surface; implies `reconstruct`.
    #[serde(default)]
    pub lelieuvre: bool,
}

pub fn default_r0_init() -> [f64; 4] {
    [1.0, 0.1, 0.1, 0.01]
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dual: false,
            backlund: false,
            r0_init: default_r0_init(),
            reparam: None,
            reconstruct: false,
            lelieuvre: false,
        }
    }
}

/// New coordinates `X = f(x)`, `Y = g(y)` sampled on `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ReparamConfig {
    pub f: MapConfig,
    pub g: MapConfig,
    pub target: GridConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    /// `scale · x + shift`.
    Affine { scale: f64, shift: f64 },
    /// `scale · exp(rate · x) + shift`.
    Exp { scale: f64, rate: f64, shift: f64 },
}

impl MapConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MapConfig::Affine { scale, shift } => scale > 0.0 && scale.is_finite() && shift.is_finite(),
            MapConfig::Exp { scale, rate, shift } => {
                scale * rate > 0.0 && (scale * rate).is_finite() && shift.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("map {self:?} is not strictly increasing")))
        }
    }
}

impl MonotoneMap<f64> for MapConfig {
    fn jet(&self, x: f64) -> [f64; 4] {
        match *self {
            MapConfig::Affine { scale, shift } => [scale * x + shift, scale, 0.0, 0.0],
            MapConfig::Exp { scale, rate, shift } => {
                let e = scale * (rate * x).exp();
                [e + shift, e * rate, e * rate * rate, e * rate * rate * rate]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ToleranceConfig {
    /// Sup-norm at most `max(1e-8, 50 h⁴ scale)` per equation.
    #[default]
    Default,
    /// Sup-norm at most `sup` per equation.
    Absolute { sup: f64 },
}

impl ToleranceConfig {
    pub fn tolerance(&self) -> Tolerance {
        match *self {
            ToleranceConfig::Default => Tolerance::Default,
            ToleranceConfig::Absolute { sup } => Tolerance::Absolute(sup),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::InvalidParameter(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.to_grid()?;
        if let Some(r) = &self.pipeline.reparam {
            r.f.validate()?;
            r.g.validate()?;
            r.target.to_grid()?;
        }
        if let ToleranceConfig::Absolute { sup } = self.tolerance {
            if !(sup > 0.0 && sup.is_finite()) {
                return Err(Error::InvalidParameter(format!("tolerance sup must be positive, got {sup}")));
            }
        }
        Ok(())
    }

    /// Serialization used for hashing: compact JSON in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// A working configuration for each family on a 129 × 129 grid.
    pub fn example(family: &str) -> Result<Self> {
        let poly = vec![1.0, 0.2, 0.3, 0.1, 0.05, 0.02, 0.01];
        let (grid, family) = match family {
            "quadric" => (
                GridConfig::square(0.0, 129, 1.0),
                FamilyConfig::Quadric(QuadricParams { v: vec![0.0], w: vec![0.0] }),
            ),
            "rotation" => (
                GridConfig::square(0.0, 129, 2.0),
                FamilyConfig::Rotation(RotationParams { profile: Profile::Sin, amplitude: 1.0, frequency: 1.0, c: 1.0 }),
            ),
            "steiner" => (
                GridConfig::square(0.0, 129, 2.0),
                FamilyConfig::Steiner(SteinerParams { a0: 1.0, a1: 0.1, a2: 0.05, f0: 1.0, g0: 1.0 }),
            ),
            "kummer" => (
                GridConfig::square(0.0, 129, 1.0),
                FamilyConfig::Kummer(KummerParams { poly, f0: 0.5, g0: 0.5 }),
            ),
            "proj_applicable" => (
                GridConfig::square(0.0, 129, 1.0),
                FamilyConfig::ProjApplicable(ProjApplicableParams {
                    poly,
                    c: 0.5,
                    a0: 0.1,
                    b0: 0.2,
                    f_init: 0.3,
                    f0: 0.5,
                    g0: 0.5,
                }),
            ),
            "affine_sphere" => (
                GridConfig::square(0.0, 129, 1.0),
                FamilyConfig::AffineSphere(AffineSphereParams { c: -1.0, p0: 0.5, dp0: 0.5 }),
            ),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown family {other:?} (expected quadric, rotation, steiner, kummer, proj_applicable, affine_sphere)"
                )))
            }
        };
        let mut pipeline = PipelineConfig::default();
        if matches!(family, FamilyConfig::Quadric(_)) {
            pipeline.r0_init = [1.0, 0.0, 0.0, 0.0];
        }
        Ok(Self { grid, family, pipeline, tolerance: ToleranceConfig::Default, output: None })
    }
}

pub fn schema_json() -> String {
    let schema = schemars::schema_for!(RunConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}
