//! Figure presets: fixed sweeps over BS density for the three result figures.

use udncov::analytic::AssociationPolicy;
use udncov::{LosModel, NetworkConfig, PathlossParams, SimSettings};

use crate::error::{usage, Result};
use crate::plot::Metric;
use crate::sweep::{Axis, Engine, Grid, Scenario, SweepSpec};

pub const LAMBDA_MIN: f64 = 1e-6;
pub const LAMBDA_MAX: f64 = 1e-1;
pub const POINTS: usize = 50;
/// Monte Carlo trials per point unless overridden.
pub const PRESET_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Buildings model at two building densities, h = 20 m.
    Fig2,
    /// Single-slope LOS and NLOS at h ∈ {0, 20} m.
    Fig3,
    /// NLOS at h ∈ {10, 15, 20} m.
    Fig4,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig2, Preset::Fig3, Preset::Fig4];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| usage(format!("unknown preset '{s}'")))
    }

    pub fn title(&self) -> &'static str {
        match self {
            Self::Fig2 => "Buildings model, h = 20 m, building height 10 m",
            Self::Fig3 => "Effect of BS height with LOS and NLOS",
            Self::Fig4 => "Effect of BS height with NLOS",
        }
    }

    /// Charts drawn for this preset, with their file-name suffixes.
    pub fn plots(&self) -> &'static [(Metric, &'static str)] {
        match self {
            Self::Fig2 => &[(Metric::Pcov, "pcov"), (Metric::Ase, "ase")],
            Self::Fig3 => &[(Metric::Pcov, "pcov")],
            Self::Fig4 => &[(Metric::Ase, "ase")],
        }
    }

    /// Labelled network configurations before the policy split.
    fn cases(&self) -> Vec<(String, NetworkConfig)> {
        let net = |h: f64, los: LosModel| {
            NetworkConfig::new(1e-3, PathlossParams::new(3.0, 4.0, h).expect("valid exponents"), los, 1.0)
                .expect("valid preset")
        };
        match self {
            Self::Fig2 => [1e-4, 1e-1]
                .iter()
                .map(|&d| {
                    let los = LosModel::buildings(d, 10.0).expect("valid buildings");
                    (format!("bld{}", short(d)), net(20.0, los))
                })
                .collect(),
            Self::Fig3 => {
                let mut out = Vec::new();
                for (tag, los) in [("los-a3", LosModel::all_los()), ("nlos-a4", LosModel::all_nlos())] {
                    for h in [20.0, 0.0] {
                        out.push((format!("{tag}-h{h}"), net(h, los)));
                    }
                }
                out
            }
            Self::Fig4 => [10.0, 15.0, 20.0]
                .iter()
                .map(|&h| (format!("nlos-h{h}"), net(h, LosModel::all_nlos())))
                .collect(),
        }
    }

    pub fn spec(&self, opts: &PresetOptions) -> Result<SweepSpec> {
        let policies: Vec<AssociationPolicy> = match opts.policy {
            Some(p) => vec![p],
            None => vec![AssociationPolicy::Closest, AssociationPolicy::Strongest],
        };
        let mut scenarios = Vec::new();
        for (tag, config) in self.cases() {
            for &policy in &policies {
                scenarios.push(Scenario {
                    id: format!("{tag}-{}", policy.name()),
                    config,
                    policy,
                });
            }
        }
        let mut mc = SimSettings::new(opts.trials, opts.seed);
        if let Some(r) = opts.sim_radius {
            mc = mc.with_radius(r);
        }
        let spec = SweepSpec {
            axis: Axis::BsDensity,
            grid: Grid::log(LAMBDA_MIN, LAMBDA_MAX, POINTS)?,
            scenarios,
            engines: opts.engines.clone(),
            mc,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn short(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOptions {
    pub engines: Vec<Engine>,
    pub trials: u64,
    pub seed: u64,
    pub sim_radius: Option<f64>,
    pub policy: Option<AssociationPolicy>,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            engines: vec![Engine::Analytic],
            trials: PRESET_TRIALS,
            seed: 1,
            sim_radius: None,
            policy: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinalities() {
        let opts = PresetOptions::default();
        assert_eq!(Preset::Fig2.spec(&opts).unwrap().len(), 200);
        assert_eq!(Preset::Fig3.spec(&opts).unwrap().scenarios.len(), 8);
        assert_eq!(Preset::Fig4.spec(&opts).unwrap().scenarios.len(), 6);
        let both = PresetOptions {
            engines: vec![Engine::Analytic, Engine::MonteCarlo],
            policy: Some(AssociationPolicy::Strongest),
            ..PresetOptions::default()
        };
        assert_eq!(Preset::Fig3.spec(&both).unwrap().len(), 4 * 50 * 2);
    }

    #[test]
    fn ids_and_parameters() {
        let spec = Preset::Fig2.spec(&PresetOptions::default()).unwrap();
        let ids: Vec<&str> = spec.scenarios.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["bld1e-4-closest", "bld1e-4-strongest", "bld1e-1-closest", "bld1e-1-strongest"]);
        assert!(spec.scenarios.iter().all(|s| s.config.pathloss.height == 20.0 && s.config.sir_threshold == 1.0));
        let fig3 = Preset::Fig3.spec(&PresetOptions::default()).unwrap();
        assert_eq!(fig3.scenarios[0].id, "los-a3-h20-closest");
        assert_eq!(fig3.scenarios[2].id, "los-a3-h0-closest");
        assert_eq!(Preset::parse("fig4").unwrap(), Preset::Fig4);
        assert!(Preset::parse("fig5").is_err());
    }
}
