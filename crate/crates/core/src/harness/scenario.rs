//! Scenario configuration (TOML or JSON) and the builtin library.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::data::DataConfig;
use super::HarnessError;
use crate::asymtype::{AsymptoticType, AsymptoticsConfig, EntryConfig, Pair};
use crate::cone_symbols::{build_symmetrizer, ConeOperator, Hyperbolicity, SampleLattice};
use crate::interior::{Grading, SolverConfig, SpaceGrid};
use crate::trace_cascade::{CascadeOptions, FitOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_max: f64,
    pub grading: Grading,
    /// `y`-nodes (1 when `d = 0`).
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_max: 4.0, grading: Grading::default(), ny: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    #[serde(flatten)]
    pub options: FitOptions,
    /// Halve the upper window edge at every refinement level.
    pub refine_window: bool,
}

/// Pass/fail thresholds of the verify subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    /// Largest admissible relative trace error.
    pub trace_tolerance: f64,
    /// Negative controls must exceed this relative error.
    pub negative_control_min: f64,
    /// The scenario is a negative control.
    pub expect_failure: bool,
    /// Largest relative change of `C_fit` under one refinement.
    pub energy_tolerance: f64,
    /// `sup ||u|| / ||u(0)|| <= 1 + growth_tolerance` for conservative scenarios.
    pub growth_tolerance: f64,
    /// Check the growth bound (symmetric, skew `B`, `f = 0`).
    pub conservative: bool,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            trace_tolerance: 5e-2,
            negative_control_min: 3e-1,
            expect_failure: false,
            energy_tolerance: 0.1,
            growth_tolerance: 5e-3,
            conservative: false,
        }
    }
}

/// `[asymptotics]`: explicit entries, or the Taylor type when `taylor = true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsSpec {
    pub delta: f64,
    pub theta: f64,
    #[serde(default)]
    pub taylor: bool,
    #[serde(default)]
    pub entries: Vec<EntryConfig>,
}

impl AsymptoticsSpec {
    pub fn build(&self) -> Result<AsymptoticType, HarnessError> {
        let v = |m: String| HarnessError::Validation(m);
        if self.taylor {
            if !self.entries.is_empty() {
                return Err(v("taylor = true excludes explicit entries".into()));
            }
            return AsymptoticType::taylor(self.delta, self.theta).map_err(|e| v(e.to_string()));
        }
        AsymptoticsConfig { delta: self.delta, theta: self.theta, entries: self.entries.clone() }
            .build()
            .map_err(|e| v(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// How the results of this scenario are checked.
    #[serde(default)]
    pub oracle: String,
    pub operator: ConeOperator,
    pub asymptotics: AsymptoticsSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub cascade: CascadeOptions,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[serde(default)]
    pub threads: Option<usize>,
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "taylor_d0",
    "log_pair_d0",
    "taylor_d1_symmetric",
    "strict_d1",
    "power_d0",
    "negcontrol_log_pair_d0",
    "negcontrol_taylor_d1_symmetric",
];

fn builtin_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "taylor_d0" => include_str!("../../scenarios/taylor_d0.toml"),
        "log_pair_d0" => include_str!("../../scenarios/log_pair_d0.toml"),
        "taylor_d1_symmetric" => include_str!("../../scenarios/taylor_d1_symmetric.toml"),
        "strict_d1" => include_str!("../../scenarios/strict_d1.toml"),
        "power_d0" => include_str!("../../scenarios/power_d0.toml"),
        "negcontrol_log_pair_d0" => include_str!("../../scenarios/negcontrol_log_pair_d0.toml"),
        "negcontrol_taylor_d1_symmetric" => include_str!("../../scenarios/negcontrol_taylor_d1_symmetric.toml"),
        _ => return None,
    })
}

/// A validated scenario with its derived objects.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub ptype: AsymptoticType,
    pub grid: SpaceGrid,
}

impl Scenario {
    pub fn from_toml(src: &str) -> Result<Self, HarnessError> {
        toml::from_str(src).map_err(|e| HarnessError::ConfigParse(e.to_string()))
    }

    pub fn from_json(src: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(src).map_err(|e| HarnessError::ConfigParse(e.to_string()))
    }

    pub fn builtin(name: &str) -> Result<Self, HarnessError> {
        let src = builtin_source(name).ok_or_else(|| HarnessError::ConfigParse(format!("unknown builtin scenario `{name}`")))?;
        Self::from_toml(src)
    }

    /// `builtin:<name>`, a `.json` file, or a TOML file.
    pub fn load(spec: &str) -> Result<Self, HarnessError> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            return Self::builtin(name);
        }
        let path = Path::new(spec);
        let src = std::fs::read_to_string(path).map_err(|e| HarnessError::ConfigParse(format!("{spec}: {e}")))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&src)
        } else {
            Self::from_toml(&src)
        }
    }

    /// Grid and fit window after `level` refinements.
    pub fn refined(&self, level: usize) -> Scenario {
        let mut s = self.clone();
        for _ in 0..level {
            s.grid.grading = s.grid.grading.refined();
            if let Some(dt) = s.solver.dt.as_mut() {
                *dt *= 0.5;
            }
            if s.fit.refine_window {
                if let Some(w) = s.fit.options.window.as_mut() {
                    w.1 *= 0.5;
                }
            }
        }
        s
    }

    pub fn validate(&self) -> Result<Prepared, HarnessError> {
        let v = |m: String| HarnessError::Validation(m);
        let op = &self.operator;
        op.validate().map_err(|e| v(e.to_string()))?;
        let ptype = self.asymptotics.build()?;
        if (ptype.delta() - op.delta).abs() > 1e-12 {
            return Err(v(format!("operator delta {} differs from asymptotics delta {}", op.delta, ptype.delta())));
        }
        if op.d == 0 && self.grid.ny != 1 {
            return Err(v("d = 0 requires ny = 1".into()));
        }
        if op.d == 1 && self.grid.ny < 4 {
            return Err(v("d = 1 requires ny >= 4".into()));
        }
        if !(self.solver.cfl > 0.0 && self.solver.cfl <= 1.0) {
            return Err(v(format!("cfl {} outside (0, 1]", self.solver.cfl)));
        }
        let grid = SpaceGrid::new(self.grid.x_max, self.grid.grading, self.grid.ny).map_err(|e| v(e.to_string()))?;
        self.data.validate(op, &ptype)?;
        match op.hyperbolicity {
            Hyperbolicity::Symmetric => {
                if !op.is_symmetric() {
                    return Err(v("declared symmetric but A or A1 is not Hermitian".into()));
                }
            }
            Hyperbolicity::Strict => {
                let lattice = SampleLattice::for_operator(op, self.grid.x_max);
                build_symmetrizer(op, &lattice).map_err(|e| v(format!("strict hyperbolicity: {e}")))?;
            }
            Hyperbolicity::None => {}
        }
        Ok(Prepared { scenario: self.clone(), ptype, grid })
    }
}

impl Prepared {
    pub fn pairs(&self) -> Vec<Pair> {
        self.ptype.cascade_order()
    }
}
