//! Analytic coverage, ASE and interference for the typical downlink UE.
//!
//! BSs form a homogeneous PPP of density λ at common height `h`, fading is
//! Rayleigh (unit-mean exponential power) and noise is neglected, so every
//! quantity is a functional of the interference Laplace transform.

mod coverage;
mod interference;
mod laplace;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::propagation::{LosModel, PathlossParams};
use crate::real::Real;

pub use coverage::{
    ase, coverage, coverage_closest_h0, coverage_closest_height, coverage_general,
    coverage_limits_check, coverage_strongest_h0, coverage_strongest_height, lambda_opt_closest,
    LimitsReport, HIGH_DENSITY, LOW_DENSITY,
};
pub use interference::{
    expected_interference_bound, expected_interference_nearest, expected_interference_total,
    interference_series_term,
};
pub use laplace::{laplace_height_split, laplace_mixed, laplace_single_regime};

/// Deployment and link parameters of one network scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NetworkConfig<T> {
    /// BS density λ in BS/m².
    pub bs_density: T,
    pub pathloss: PathlossParams<T>,
    pub los_model: LosModel<T>,
    /// SIR threshold θ (linear).
    pub sir_threshold: T,
}

impl<T: Real> NetworkConfig<T> {
    pub fn new(
        bs_density: T,
        pathloss: PathlossParams<T>,
        los_model: LosModel<T>,
        sir_threshold: T,
    ) -> Result<Self> {
        let cfg = Self {
            bs_density,
            pathloss,
            los_model,
            sir_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bs_density > T::zero()) || !self.bs_density.is_finite() {
            return Err(domain(format!("BS density must be positive, got {:?}", self.bs_density)));
        }
        if !(self.sir_threshold > T::zero()) || !self.sir_threshold.is_finite() {
            return Err(domain(format!(
                "SIR threshold must be positive, got {:?}",
                self.sir_threshold
            )));
        }
        self.pathloss.validate()?;
        self.los_model.validate()
    }

    pub fn height(&self) -> T {
        self.pathloss.height
    }

    pub fn with_density(mut self, bs_density: T) -> Self {
        self.bs_density = bs_density;
        self
    }
}

/// How the typical UE picks its serving BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssociationPolicy {
    /// Geometrically nearest BS.
    Closest,
    /// BS with the highest instantaneous SIR.
    Strongest,
}

impl AssociationPolicy {
    /// Serving-distance kernel φ(r). A pdf for `Closest` only; for
    /// `Strongest` it is the intensity measure of candidate servers.
    pub fn phi<T: Real>(&self, r: T, lambda: T) -> T {
        let two_pi_lambda = T::TAU() * lambda;
        match self {
            Self::Closest => two_pi_lambda * (-T::PI() * lambda * r * r).exp() * r,
            Self::Strongest => two_pi_lambda * r,
        }
    }

    /// Inner radius of the interference field given serving distance `r`.
    pub fn nu<T: Real>(&self, r: T) -> T {
        match self {
            Self::Closest => r,
            Self::Strongest => T::zero(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Closest => "closest",
            Self::Strongest => "strongest",
        }
    }
}

/// Provenance of a coverage estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GeneralQuadrature,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GeneralQuadrature => "general_quadrature",
            Self::ClosedForm => "closed_form",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

/// Coverage probability and ASE at one BS density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CoveragePoint<T> {
    pub lambda: T,
    pub pcov: T,
    /// bps/Hz/m².
    pub ase: T,
    pub method: Method,
    /// Confidence-interval half-width of `pcov` (Monte Carlo only).
    pub ci_halfwidth: Option<T>,
}

impl<T: Real> CoveragePoint<T> {
    pub fn new(theta: T, lambda: T, pcov: T, method: Method, ci_halfwidth: Option<T>) -> Self {
        Self {
            lambda,
            pcov,
            ase: ase(theta, lambda, pcov),
            method,
            ci_halfwidth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_semi_infinite, Tolerance};

    #[test]
    fn closest_kernel_is_a_pdf() {
        for &lambda in &[1e-6, 1e-3, 0.2] {
            let scale = 1.0 / (std::f64::consts::PI * lambda).sqrt();
            let mass = integrate_semi_infinite(
                |r| AssociationPolicy::Closest.phi(r, lambda),
                0.0,
                scale,
                &[],
                Tolerance::relative(1e-12),
            )
            .unwrap();
            assert!((mass.value - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn kernels() {
        assert_eq!(AssociationPolicy::Strongest.nu(17.0), 0.0);
        assert_eq!(AssociationPolicy::Closest.nu(17.0), 17.0);
        let phi = AssociationPolicy::Strongest.phi(2.0, 0.5);
        assert!((phi - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let pl = PathlossParams::new(3.0, 4.0, 20.0).unwrap();
        assert!(NetworkConfig::new(0.0, pl, LosModel::all_nlos(), 1.0).is_err());
        assert!(NetworkConfig::new(1e-3, pl, LosModel::all_nlos(), 0.0).is_err());
        assert!(NetworkConfig::new(1e-3, pl, LosModel::all_nlos(), 1.0).is_ok());
    }

    #[test]
    fn point_ase_identity() {
        let p = CoveragePoint::new(3.0, 2e-4, 0.25, Method::ClosedForm, None);
        assert_eq!(p.ase, 2e-4 * 0.25 * 2.0);
    }
}
