//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! temperature = 0.85
//! rho_L = @spinodal_minus
//! snapshot_times = 0.05, 0.1
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::equilibrium::{maxwell_construction, spinodal_bounds};
use crate::error::{Error, Result};
use crate::hydro::BoundaryRule;
use crate::thermo::ThermoParams;

const KEYS: &[&str] = &[
    "temperature",
    "x_min",
    "x_max",
    "interface_x",
    "n_cells",
    "cfl",
    "epsilon",
    "t_end",
    "boundary",
    "rho_L",
    "rho1_L",
    "rho2_L",
    "u_L",
    "rho_R",
    "rho1_R",
    "rho2_R",
    "u_R",
    "snapshot_times",
    "output_prefix",
];

/// A density given literally or by reference to a computed saturation or
/// spinodal value at the scenario temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Value(f64),
    SpinodalMinus,
    SpinodalPlus,
    SaturatedVapor,
    SaturatedLiquid,
}

impl DensitySpec {
    pub fn resolve(&self, params: &ThermoParams) -> Result<f64> {
        Ok(match self {
            DensitySpec::Value(v) => *v,
            DensitySpec::SpinodalMinus => spinodal_bounds(params)?.rho_minus,
            DensitySpec::SpinodalPlus => spinodal_bounds(params)?.rho_plus,
            DensitySpec::SaturatedVapor => maxwell_construction(params)?.rho1_star,
            DensitySpec::SaturatedLiquid => maxwell_construction(params)?.rho2_star,
        })
    }
}

impl FromStr for DensitySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "@spinodal_minus" => Ok(DensitySpec::SpinodalMinus),
            "@spinodal_plus" => Ok(DensitySpec::SpinodalPlus),
            "@saturated_vapor" => Ok(DensitySpec::SaturatedVapor),
            "@saturated_liquid" => Ok(DensitySpec::SaturatedLiquid),
            _ if s.starts_with('@') => Err(format!("unknown density reference {s}")),
            _ => s
                .parse::<f64>()
                .map(DensitySpec::Value)
                .map_err(|e| format!("{s}: {e}")),
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Value(v) => write!(f, "{v}"),
            DensitySpec::SpinodalMinus => f.write_str("@spinodal_minus"),
            DensitySpec::SpinodalPlus => f.write_str("@spinodal_plus"),
            DensitySpec::SaturatedVapor => f.write_str("@saturated_vapor"),
            DensitySpec::SaturatedLiquid => f.write_str("@saturated_liquid"),
        }
    }
}

/// One side of the Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideState {
    pub rho: DensitySpec,
    pub rho1: DensitySpec,
    pub rho2: DensitySpec,
    pub u: f64,
}

/// Resolved primitive state of one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub u: f64,
}

impl SideState {
    /// Resolves references and orders the phase densities.
    pub fn resolve(&self, params: &ThermoParams) -> Result<Primitive> {
        let rho = self.rho.resolve(params)?;
        let a = self.rho1.resolve(params)?;
        let b = self.rho2.resolve(params)?;
        let (rho1, rho2) = if a <= b { (a, b) } else { (b, a) };
        Ok(Primitive {
            rho,
            rho1,
            rho2,
            u: self.u,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub temperature: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub interface_x: f64,
    pub n_cells: usize,
    pub cfl: f64,
    pub epsilon: f64,
    pub t_end: f64,
    pub boundary: BoundaryRule,
    pub left: SideState,
    pub right: SideState,
    pub snapshot_times: Vec<f64>,
    pub output_prefix: String,
}

impl ScenarioConfig {
    pub fn params(&self) -> Result<ThermoParams> {
        ThermoParams::reduced(self.temperature)
    }

    /// Checks every invariant, including the resolved side states.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        let params = self
            .params()
            .map_err(|e| Error::Validation(format!("temperature: {e}")))?;
        if !(self.x_min < self.x_max) {
            return fail(format!(
                "need x_min < x_max, got {} and {}",
                self.x_min, self.x_max
            ));
        }
        if !(self.x_min < self.interface_x && self.interface_x < self.x_max) {
            return fail(format!(
                "interface_x = {} must lie strictly inside ({}, {})",
                self.interface_x, self.x_min, self.x_max
            ));
        }
        if self.n_cells < 3 {
            return fail(format!("n_cells must be at least 3, got {}", self.n_cells));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return fail(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.epsilon > 0.0) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be positive, got {}", self.t_end));
        }
        if self
            .snapshot_times
            .iter()
            .any(|t| !(*t >= 0.0 && *t <= self.t_end))
        {
            return fail("snapshot_times must lie in [0, t_end]".into());
        }
        if self.output_prefix.is_empty() {
            return fail("output_prefix is empty".into());
        }
        for (side, state) in [("left", &self.left), ("right", &self.right)] {
            let s = state
                .resolve(&params)
                .map_err(|e| Error::Validation(format!("{side} state: {e}")))?;
            for (name, v) in [("rho", s.rho), ("rho1", s.rho1), ("rho2", s.rho2)] {
                params
                    .check_density(v)
                    .map_err(|e| Error::Validation(format!("{side} {name}: {e}")))?;
            }
            if !(s.rho1 <= s.rho && s.rho <= s.rho2) {
                return fail(format!(
                    "{side} state needs rho1 <= rho <= rho2, got {}, {}, {}",
                    s.rho1, s.rho, s.rho2
                ));
            }
            if !s.u.is_finite() {
                return fail(format!("{side} velocity is not finite"));
            }
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        load_config(&text)
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Parses and validates a scenario document.
pub fn load_config(source: &str) -> Result<ScenarioConfig> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let Some((key, value)) = text.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected `key = value`, got `{text}`"),
            });
        };
        let key = key.trim();
        let Some(known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        };
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = entries.insert(known, entry) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
        }
    }

    let mut doc = Document { entries };
    let x_min = doc.required("x_min")?;
    let x_max = doc.required("x_max")?;
    let config = ScenarioConfig {
        temperature: doc.required("temperature")?,
        x_min,
        x_max,
        interface_x: doc
            .optional("interface_x")?
            .unwrap_or(0.5 * (x_min + x_max)),
        n_cells: doc.required("n_cells")?,
        cfl: doc
            .optional("cfl")?
            .unwrap_or(crate::hydro::Scheme::DEFAULT_CFL),
        epsilon: doc.required("epsilon")?,
        t_end: doc.required("t_end")?,
        boundary: match doc.take("boundary") {
            None => BoundaryRule::Transmissive,
            Some(e) => match e.value.as_str() {
                "transmissive" => BoundaryRule::Transmissive,
                "periodic" => BoundaryRule::Periodic,
                other => {
                    return Err(Error::Parse {
                        line: e.line,
                        message: format!(
                            "boundary: expected transmissive or periodic, got `{other}`"
                        ),
                    })
                }
            },
        },
        left: SideState {
            rho: doc.required("rho_L")?,
            rho1: doc.required("rho1_L")?,
            rho2: doc.required("rho2_L")?,
            u: doc.required("u_L")?,
        },
        right: SideState {
            rho: doc.required("rho_R")?,
            rho1: doc.required("rho1_R")?,
            rho2: doc.required("rho2_R")?,
            u: doc.required("u_R")?,
        },
        snapshot_times: match doc.take("snapshot_times") {
            None => Vec::new(),
            Some(e) if e.value.is_empty() => Vec::new(),
            Some(e) => e
                .value
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|err| Error::Parse {
                        line: e.line,
                        message: format!("snapshot_times: `{}`: {err}", t.trim()),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        },
        output_prefix: doc
            .take("output_prefix")
            .map(|e| e.value)
            .unwrap_or_else(|| "out".to_string()),
    };
    config.validate()?;
    Ok(config)
}

struct Document<'a> {
    entries: HashMap<&'a str, Entry>,
}

impl Document<'_> {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn optional<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| Error::Parse {
                line: e.line,
                message: format!("{key}: `{}`: {err}", e.value),
            }),
        }
    }

    fn required<T>(&mut self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.optional(key)?
            .ok_or_else(|| Error::Validation(format!("missing required key `{key}`")))
    }
}
