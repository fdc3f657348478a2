//! TOML configuration: a `[sweep]` section, `[base]` parameters, optional
//! `[montecarlo]` settings and any number of `[[scenario]]` overrides.
//!
//! Resolution order is defaults, then `[base]`, then the scenario, then
//! command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use udncov::analytic::AssociationPolicy;
use udncov::montecarlo::SimRadius;
use udncov::{LosModel, NetworkConfig, PathlossParams, SimSettings};

use crate::error::{usage, Result};
use crate::sweep::{Axis, Engine, Grid, GridScale, Scenario, SweepSpec};

pub const DEFAULT_BS_DENSITY: f64 = 1e-3;
pub const DEFAULT_HEIGHT: f64 = 20.0;
pub const DEFAULT_ALPHA_LOS: f64 = 3.0;
pub const DEFAULT_ALPHA_NLOS: f64 = 4.0;
pub const DEFAULT_THRESHOLD: f64 = 1.0;
pub const DEFAULT_BUILDING_HEIGHT: f64 = 10.0;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub base: Overrides,
    #[serde(default, skip_serializing_if = "McSection::is_empty")]
    pub montecarlo: McSection,
    #[serde(default, rename = "scenario", skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<ScenarioSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: GridScale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engines: Option<Vec<Engine>>,
}

/// Optional network parameters; unset fields fall through to the next layer.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_los: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_nlos: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sir_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<AssociationPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub los: Option<LosModel>,
    /// Replaces the LOS model by buildings of this density (keeping the
    /// building height of an existing buildings model).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub building_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub building_height: Option<f64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    /// Fields set in `top` win over those in `self`.
    pub fn layered(&self, top: &Overrides) -> Overrides {
        Overrides {
            bs_density: top.bs_density.or(self.bs_density),
            height: top.height.or(self.height),
            alpha_los: top.alpha_los.or(self.alpha_los),
            alpha_nlos: top.alpha_nlos.or(self.alpha_nlos),
            sir_threshold: top.sir_threshold.or(self.sir_threshold),
            policy: top.policy.or(self.policy),
            los: top.los.or(self.los),
            building_density: top.building_density.or(self.building_density),
            building_height: top.building_height.or(self.building_height),
        }
    }

    /// Fills unset fields with defaults and validates.
    pub fn resolve(&self) -> Result<(NetworkConfig, AssociationPolicy)> {
        let pathloss = PathlossParams::new(
            self.alpha_los.unwrap_or(DEFAULT_ALPHA_LOS),
            self.alpha_nlos.unwrap_or(DEFAULT_ALPHA_NLOS),
            self.height.unwrap_or(DEFAULT_HEIGHT),
        )?;
        let mut los = self.los.unwrap_or_else(LosModel::all_nlos);
        if self.building_density.is_some() || self.building_height.is_some() {
            let (d, bh) = match los {
                LosModel::Buildings(b) => (b.building_density, b.building_height),
                _ => (0.0, DEFAULT_BUILDING_HEIGHT),
            };
            los = LosModel::buildings(
                self.building_density.unwrap_or(d),
                self.building_height.unwrap_or(bh),
            )?;
        }
        let cfg = NetworkConfig::new(
            self.bs_density.unwrap_or(DEFAULT_BS_DENSITY),
            pathloss,
            los,
            self.sir_threshold.unwrap_or(DEFAULT_THRESHOLD),
        )?;
        Ok((cfg, self.policy.unwrap_or(AssociationPolicy::Closest)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Simulation radius in meters; automatic when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_level: Option<f64>,
}

impl McSection {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn layered(&self, top: &McSection) -> McSection {
        McSection {
            trials: top.trials.or(self.trials),
            seed: top.seed.or(self.seed),
            sim_radius: top.sim_radius.or(self.sim_radius),
            ci_level: top.ci_level.or(self.ci_level),
        }
    }

    pub fn resolve(&self) -> Result<SimSettings> {
        let mut s = SimSettings::new(self.trials.unwrap_or(DEFAULT_TRIALS), self.seed.unwrap_or(DEFAULT_SEED));
        if let Some(r) = self.sim_radius {
            s.sim_radius = SimRadius::Fixed(r);
        }
        if let Some(level) = self.ci_level {
            s.ci_level = level;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: String,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub set: Overrides,
}

/// Settings taken from the command line; they override the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliOverrides {
    pub network: Overrides,
    pub montecarlo: McSection,
    pub engines: Option<Vec<Engine>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Resolved scenarios: one per `[[scenario]]`, or a single `base` one.
    pub fn scenarios(&self, cli: &CliOverrides) -> Result<Vec<Scenario>> {
        let sections = if self.scenarios.is_empty() {
            vec![ScenarioSection {
                id: "base".into(),
                set: Overrides::default(),
            }]
        } else {
            self.scenarios.clone()
        };
        sections
            .iter()
            .map(|s| {
                let merged = self.base.layered(&s.set).layered(&cli.network);
                let (config, policy) = merged
                    .resolve()
                    .map_err(|e| usage(format!("scenario '{}': {e}", s.id)))?;
                Ok(Scenario {
                    id: s.id.clone(),
                    config,
                    policy,
                })
            })
            .collect()
    }

    pub fn sim_settings(&self, cli: &CliOverrides) -> Result<SimSettings> {
        self.montecarlo.layered(&cli.montecarlo).resolve()
    }

    /// The full sweep described by the file, with command-line overrides applied.
    pub fn sweep_spec(&self, cli: &CliOverrides) -> Result<SweepSpec> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| usage("config has no [sweep] section"))?;
        let engines = cli
            .engines
            .clone()
            .or_else(|| sweep.engines.clone())
            .unwrap_or_else(|| vec![Engine::Analytic]);
        let spec = SweepSpec {
            axis: sweep.axis,
            grid: Grid::new(sweep.min, sweep.max, sweep.points, sweep.scale)?,
            scenarios: self.scenarios(cli)?,
            engines,
            mc: self.sim_settings(cli)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}
