//! Parameter sweeps over one axis for a set of scenarios and engines.

use std::collections::HashSet;
use std::fmt;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use udncov::analytic::{coverage, AssociationPolicy};
use udncov::montecarlo::simulate_coverage;
use udncov::{CoveragePoint, LosModel, NetworkConfig, SimSettings};

use crate::config::DEFAULT_BUILDING_HEIGHT;
use crate::error::{usage, Result};

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    BsDensity,
    Height,
    BuildingDensity,
    #[serde(rename = "threshold")]
    SirThreshold,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BsDensity => "bs_density",
            Self::Height => "height",
            Self::BuildingDensity => "building_density",
            Self::SirThreshold => "threshold",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(&self, base: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let mut cfg = *base;
        match self {
            Self::BsDensity => cfg.bs_density = value,
            Self::Height => cfg.pathloss.height = value,
            Self::SirThreshold => cfg.sir_threshold = value,
            Self::BuildingDensity => {
                let bh = match cfg.los_model {
                    LosModel::Buildings(b) => b.building_height,
                    _ => DEFAULT_BUILDING_HEIGHT,
                };
                cfg.los_model = LosModel::buildings(value, bh)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Log,
    Linear,
}

/// Grid of sweep values with both endpoints included exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize, scale: GridScale) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || !(min < max) {
            return Err(usage(format!("grid needs finite min < max, got [{min}, {max}]")));
        }
        if points < 2 {
            return Err(usage(format!("grid needs at least 2 points, got {points}")));
        }
        if scale == GridScale::Log && min <= 0.0 {
            return Err(usage(format!("log grid needs a positive minimum, got {min}")));
        }
        Ok(Self { min, max, points, scale })
    }

    pub fn log(min: f64, max: f64, points: usize) -> Result<Self> {
        Self::new(min, max, points, GridScale::Log)
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let t = i as f64 / last as f64;
                match self.scale {
                    GridScale::Linear => self.min + t * (self.max - self.min),
                    GridScale::Log => (self.min.ln() + t * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Engine {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "mc", alias = "montecarlo")]
    MonteCarlo,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::MonteCarlo => "mc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(Self::Analytic),
            "mc" | "montecarlo" => Ok(Self::MonteCarlo),
            other => Err(usage(format!("unknown engine '{other}' (expected analytic, mc or montecarlo)"))),
        }
    }

    /// Comma-separated list such as `analytic,mc`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let e = Self::parse(part)?;
            if !out.contains(&e) {
                out.push(e);
            }
        }
        if out.is_empty() {
            return Err(usage("no engines given"));
        }
        Ok(out)
    }
}

/// A network configuration with an association policy, labelled for output.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub config: NetworkConfig,
    pub policy: AssociationPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Grid,
    pub scenarios: Vec<Scenario>,
    pub engines: Vec<Engine>,
    pub mc: SimSettings,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(usage("sweep has no scenarios"));
        }
        if self.engines.is_empty() {
            return Err(usage("sweep has no engines"));
        }
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            if !seen.insert(s.id.as_str()) {
                return Err(usage(format!("duplicate scenario id '{}'", s.id)));
            }
        }
        if self.engines.contains(&Engine::MonteCarlo) {
            self.mc.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.scenarios.len() * self.grid.points * self.engines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One evaluated point. Failures are kept in the row so a sweep always
/// yields its full table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario_id: String,
    pub policy: AssociationPolicy,
    pub axis: Axis,
    pub axis_value: f64,
    pub bs_density: f64,
    pub engine: Engine,
    pub outcome: std::result::Result<CoveragePoint, String>,
    pub wall_time_ms: f64,
}

impl Row {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// Seed of the simulation at grid point `point` of scenario `scenario`,
/// independent of evaluation order and thread count.
pub fn point_seed(seed: u64, scenario: usize, point: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((scenario as u64) << 32) | point as u64);
    rng.next_u64()
}

/// Evaluates every (scenario, grid point, engine) triple. Rows come back
/// ordered by scenario, then grid point, then engine.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let values = spec.grid.values();
    let mut tasks = Vec::with_capacity(spec.len());
    for si in 0..spec.scenarios.len() {
        for pi in 0..values.len() {
            for &engine in &spec.engines {
                tasks.push((si, pi, engine));
            }
        }
    }
    Ok(tasks
        .into_par_iter()
        .map(|(si, pi, engine)| evaluate(spec, si, pi, values[pi], engine))
        .collect())
}

fn evaluate(spec: &SweepSpec, si: usize, pi: usize, value: f64, engine: Engine) -> Row {
    let scenario = &spec.scenarios[si];
    let start = Instant::now();
    let cfg = spec.axis.apply(&scenario.config, value);
    let bs_density = cfg.as_ref().map_or(scenario.config.bs_density, |c| c.bs_density);
    let outcome = cfg
        .and_then(|cfg| {
            Ok(match engine {
                Engine::Analytic => coverage(&cfg, scenario.policy)?,
                Engine::MonteCarlo => {
                    let mut settings = spec.mc;
                    settings.seed = point_seed(spec.mc.seed, si, pi);
                    simulate_coverage(&cfg, scenario.policy, &settings)?
                }
            })
        })
        .map_err(|e| e.to_string());
    Row {
        scenario_id: scenario.id.clone(),
        policy: scenario.policy,
        axis: spec.axis,
        axis_value: value,
        bs_density,
        engine,
        outcome,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use udncov::PathlossParams;

    fn scenario(id: &str, h: f64, policy: AssociationPolicy) -> Scenario {
        Scenario {
            id: id.into(),
            config: NetworkConfig::new(1e-3, PathlossParams::new(3.0, 4.0, h).unwrap(), LosModel::all_nlos(), 1.0)
                .unwrap(),
            policy,
        }
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = Grid::log(1e-6, 1e-1, 50).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 50);
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[49], 1e-1);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let lin = Grid::new(0.0, 20.0, 5, GridScale::Linear).unwrap().values();
        assert_eq!(lin, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert!(Grid::log(0.0, 1.0, 3).is_err());
        assert!(Grid::log(1.0, 0.5, 3).is_err());
        assert!(Grid::log(1.0, 2.0, 1).is_err());
        assert!(Grid::log(2.0, 2.0, 2).is_err());
    }

    #[test]
    fn engines_parse() {
        assert_eq!(Engine::parse_list("analytic, mc").unwrap(), vec![Engine::Analytic, Engine::MonteCarlo]);
        assert_eq!(Engine::parse_list("mc,mc").unwrap(), vec![Engine::MonteCarlo]);
        assert!(Engine::parse_list("fast").is_err());
        assert!(Engine::parse_list("").is_err());
    }

    #[test]
    fn axis_apply() {
        let base = scenario("a", 20.0, AssociationPolicy::Closest).config;
        assert_eq!(Axis::Height.apply(&base, 5.0).unwrap().pathloss.height, 5.0);
        assert!(Axis::Height.apply(&base, -1.0).is_err());
        assert_eq!(
            Axis::BuildingDensity.apply(&base, 0.01).unwrap().los_model,
            LosModel::buildings(0.01, DEFAULT_BUILDING_HEIGHT).unwrap()
        );
    }

    #[test]
    fn rows_are_ordered_and_errors_kept() {
        let spec = SweepSpec {
            axis: Axis::SirThreshold,
            grid: Grid::new(0.5, 2.0, 4, GridScale::Linear).unwrap(),
            scenarios: vec![
                scenario("c", 20.0, AssociationPolicy::Closest),
                scenario("s", 20.0, AssociationPolicy::Strongest),
            ],
            engines: vec![Engine::Analytic],
            mc: SimSettings::new(100, 1),
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows[..4].iter().all(|r| r.scenario_id == "c" && r.is_ok()));
        // strongest-BS closed form needs θ ≥ 1
        assert!(!rows[4].is_ok());
        assert!(rows[6].is_ok() && rows[7].is_ok());
        assert!(rows.windows(2).all(|w| w[0].scenario_id != w[1].scenario_id || w[0].axis_value < w[1].axis_value));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let spec = SweepSpec {
            axis: Axis::BsDensity,
            grid: Grid::log(1e-4, 1e-3, 2).unwrap(),
            scenarios: vec![scenario("x", 0.0, AssociationPolicy::Closest), scenario("x", 1.0, AssociationPolicy::Closest)],
            engines: vec![Engine::Analytic],
            mc: SimSettings::new(100, 1),
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn seeds_differ_per_point() {
        let a = point_seed(42, 0, 0);
        assert_eq!(a, point_seed(42, 0, 0));
        assert_ne!(a, point_seed(42, 0, 1));
        assert_ne!(a, point_seed(42, 1, 0));
        assert_ne!(a, point_seed(43, 0, 0));
    }
}
