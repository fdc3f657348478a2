use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_semi_infinite_checked, Tolerance};
use crate::real::Real;
use crate::special::{psi, psi_growth_constant, psi_unchecked};

use super::laplace::mixed_exponent;
use super::{AssociationPolicy, CoveragePoint, Method, NetworkConfig};

const OUTER_REL: f64 = 1e-6;
const OUTER_ABS: f64 = 1e-14;

/// Densities at which the small- and large-λ limits are probed.
pub const LOW_DENSITY: f64 = 1e-12;
pub const HIGH_DENSITY: f64 = 1e-1;

fn outer_tol<T: Real>() -> Tolerance<T> {
    Tolerance::new(OUTER_ABS, OUTER_REL)
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if theta > T::zero() && theta.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("SIR threshold must be positive, got {theta:?}")))
    }
}

fn check_strongest_theta<T: Real>(theta: T) -> Result<()> {
    check_theta(theta)?;
    if theta < T::one() {
        return Err(Error::Validity(format!(
            "strongest-association coverage needs θ ≥ 1, got {theta:?}"
        )));
    }
    Ok(())
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::lit(2.0) && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("pathloss exponent must exceed 2, got {alpha:?}")))
    }
}

fn check_density<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("BS density must be positive, got {lambda:?}")))
    }
}

fn check_height<T: Real>(h: T) -> Result<()> {
    if h >= T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("height must be non-negative, got {h:?}")))
    }
}

/// Area spectral efficiency `λ·P·log₂(1+θ)` in bps/Hz/m².
pub fn ase<T: Real>(theta: T, lambda: T, pcov: T) -> T {
    lambda * pcov * theta.ln_1p() / T::LN_2()
}

/// Coverage probability for an arbitrary LOS model by nested quadrature:
/// an outer integral over the serving distance of the interference
/// Laplace transform seen from each regime.
pub fn coverage_general<T: Real>(cfg: &NetworkConfig<T>, policy: AssociationPolicy) -> Result<T> {
    cfg.validate()?;
    let theta = cfg.sir_threshold;
    if policy == AssociationPolicy::Strongest {
        check_strongest_theta(theta)?;
    }
    let lambda = cfg.bs_density;
    let h = cfg.height();
    let (al, an) = (cfg.pathloss.alpha_los, cfg.pathloss.alpha_nlos);
    let model = cfg.los_model;
    let two_pi_lambda = T::TAU() * lambda;

    let mut failure: Option<Error> = None;
    let mut laplace = |s: T, r: T| -> T {
        match mixed_exponent(s, policy.nu(r), cfg) {
            Ok(e) => (-two_pi_lambda * e).exp(),
            Err(err) => {
                failure.get_or_insert(err);
                T::nan()
            }
        }
    };
    let integrand = |r: T| -> T {
        let phi = policy.phi(r, lambda);
        if phi == T::zero() {
            return T::zero();
        }
        let p = model.p_los(r, h);
        let d2 = r * r + h * h;
        let mut acc = T::zero();
        if p > T::zero() {
            acc = acc + p * laplace(theta * d2.powf(T::lit(0.5) * al), r);
        }
        if p < T::one() {
            acc = acc + (T::one() - p) * laplace(theta * d2.powf(T::lit(0.5) * an), r);
        }
        acc * phi
    };

    let mut breaks = model.breakpoints(h);
    breaks.push(h);
    let scale = (T::PI() * lambda).sqrt().recip().max(h);
    let result = integrate_semi_infinite_checked(integrand, T::zero(), scale, &breaks, outer_tol(), T::lit(OUTER_REL));
    match (result, failure) {
        (_, Some(err)) => Err(err),
        (Ok(est), None) => Ok(est.value),
        (Err(err), None) => Err(err),
    }
}

/// Closest-association coverage with ground-level BSs, `1/(1+ψ(θ))`.
pub fn coverage_closest_h0<T: Real>(theta: T, alpha: T) -> Result<T> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    Ok((T::one() + psi(theta, alpha)?).recip())
}

/// Strongest-association coverage with ground-level BSs,
/// `α·sin(2π/α) / (2π·θ^{2/α})`. Only a probability for `θ ≥ 1`.
pub fn coverage_strongest_h0<T: Real>(theta: T, alpha: T) -> Result<T> {
    check_strongest_theta(theta)?;
    check_alpha(alpha)?;
    Ok((psi_growth_constant(alpha) * theta.powf(T::lit(2.0) / alpha)).recip())
}

/// Closest-association coverage with BSs at height `h`:
/// the ground-level value damped by `exp(−πλh²ψ(θ))`.
pub fn coverage_closest_height<T: Real>(theta: T, lambda: T, h: T, alpha: T) -> Result<T> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    check_density(lambda)?;
    check_height(h)?;
    let psi = psi(theta, alpha)?;
    let base = (T::one() + psi).recip();
    if h == T::zero() {
        return Ok(base);
    }
    Ok(base * (-T::PI() * lambda * h * h * psi).exp())
}

/// Strongest-association coverage with BSs at height `h`, by quadrature of
/// `2c ∫₁^∞ exp(−c·ψ(θx^α)) x dx` with `c = πλh²` (serving distance `r = h·x`).
pub fn coverage_strongest_height<T: Real>(theta: T, lambda: T, h: T, alpha: T) -> Result<T> {
    check_strongest_theta(theta)?;
    check_alpha(alpha)?;
    check_density(lambda)?;
    check_height(h)?;
    if h == T::zero() {
        return coverage_strongest_h0(theta, alpha);
    }
    let c = T::PI() * lambda * h * h;
    let growth = psi_growth_constant(alpha) * theta.powf(T::lit(2.0) / alpha);
    let scale = (c * growth).sqrt().recip().max(T::one());

    let mut failure: Option<Error> = None;
    let integrand = |x: T| -> T {
        match psi_unchecked(theta * x.powf(alpha), alpha) {
            Ok(p) => (-c * p).exp() * x,
            Err(err) => {
                failure.get_or_insert(err);
                T::nan()
            }
        }
    };
    let result = integrate_semi_infinite_checked(integrand, T::one(), scale, &[], outer_tol(), T::lit(OUTER_REL));
    match (result, failure) {
        (_, Some(err)) => Err(err),
        (Ok(est), None) => Ok((c + c) * est.value),
        (Err(err), None) => Err(err),
    }
}

/// ASE-maximizing density for closest association, `1/(πh²ψ(θ))`.
pub fn lambda_opt_closest<T: Real>(theta: T, h: T, alpha: T) -> Result<T> {
    check_theta(theta)?;
    check_alpha(alpha)?;
    check_height(h)?;
    if h == T::zero() {
        return Err(Error::NoFiniteOptimum(
            "coverage does not depend on λ at h = 0, so ASE grows without bound".into(),
        ));
    }
    let psi = psi(theta, alpha)?;
    let opt = (T::PI() * h * h * psi).recip();
    if !opt.is_finite() || psi < T::min_positive_value() {
        return Err(domain(format!("θ = {theta:?} is too small: ψ(θ) underflows")));
    }
    Ok(opt)
}

/// Coverage at one density, by closed form when every link shares a regime
/// and by nested quadrature otherwise.
pub fn coverage<T: Real>(cfg: &NetworkConfig<T>, policy: AssociationPolicy) -> Result<CoveragePoint<T>> {
    cfg.validate()?;
    let theta = cfg.sir_threshold;
    let lambda = cfg.bs_density;
    let h = cfg.height();
    let (pcov, method) = match cfg.los_model.uniform_regime(h) {
        Some(regime) => {
            let alpha = cfg.pathloss.alpha(regime);
            let p = match policy {
                AssociationPolicy::Closest => coverage_closest_height(theta, lambda, h, alpha)?,
                AssociationPolicy::Strongest => coverage_strongest_height(theta, lambda, h, alpha)?,
            };
            (p, Method::ClosedForm)
        }
        None => (coverage_general(cfg, policy)?, Method::GeneralQuadrature),
    };
    Ok(CoveragePoint::new(theta, lambda, pcov, method, None))
}

/// Coverage at the extreme densities compared against the ground-level value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LimitsReport<T> {
    /// Ground-level coverage the small-λ value should approach.
    pub baseline: T,
    /// Coverage at [`LOW_DENSITY`].
    pub low_density_limit: T,
    /// Coverage at [`HIGH_DENSITY`].
    pub high_density_decay: T,
    /// `|low_density_limit − baseline| < 1e−3`.
    pub low_ok: bool,
    /// `high_density_decay < 1e−2`.
    pub high_ok: bool,
}

/// Evaluates coverage of a single-slope network with BS height `h > 0` at a
/// vanishing and at a very high density.
pub fn coverage_limits_check<T: Real>(
    policy: AssociationPolicy,
    theta: T,
    h: T,
    alpha: T,
) -> Result<LimitsReport<T>> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(domain(format!("limits need a positive height, got {h:?}")));
    }
    let (low, high) = (T::lit(LOW_DENSITY), T::lit(HIGH_DENSITY));
    let (baseline, low_density_limit, high_density_decay) = match policy {
        AssociationPolicy::Closest => (
            coverage_closest_h0(theta, alpha)?,
            coverage_closest_height(theta, low, h, alpha)?,
            coverage_closest_height(theta, high, h, alpha)?,
        ),
        AssociationPolicy::Strongest => (
            coverage_strongest_h0(theta, alpha)?,
            coverage_strongest_height(theta, low, h, alpha)?,
            coverage_strongest_height(theta, high, h, alpha)?,
        ),
    };
    Ok(LimitsReport {
        baseline,
        low_density_limit,
        high_density_decay,
        low_ok: (low_density_limit - baseline).abs() < T::lit(1e-3),
        high_ok: high_density_decay < T::lit(1e-2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{LosModel, PathlossParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn cfg(lambda: f64, h: f64, al: f64, an: f64, model: LosModel<f64>, theta: f64) -> NetworkConfig<f64> {
        NetworkConfig::new(lambda, PathlossParams::new(al, an, h).unwrap(), model, theta).unwrap()
    }

    #[test]
    fn ase_examples() {
        assert_eq!(ase(1.0, 1e-3, 0.5), 5e-4);
        assert_relative_eq!(ase(3.0, 2e-4, 0.25), 1e-4, max_relative = 1e-15);
        assert_eq!(ase(7.0, 1e-2, 0.0), 0.0);
    }

    #[test]
    fn ground_closed_forms() {
        assert_relative_eq!(coverage_closest_h0(1.0, 4.0).unwrap(), 1.0 / (1.0 + FRAC_PI_4), max_relative = 1e-14);
        assert_relative_eq!(coverage_closest_h0(1.0, 3.0).unwrap(), 0.374_349_890_429_360_6, max_relative = 1e-12);
        assert_eq!(coverage_closest_h0(1e-300, 4.0).unwrap(), 1.0);
        assert_relative_eq!(coverage_strongest_h0(1.0, 4.0).unwrap(), 2.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(
            coverage_strongest_h0(1.0, 3.0).unwrap(),
            3.0 * 3f64.sqrt() / (4.0 * PI),
            max_relative = 1e-14
        );
        assert_relative_eq!(coverage_strongest_h0(16.0, 4.0).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-14);
    }

    #[test]
    fn strongest_below_unit_threshold_is_refused() {
        assert!(matches!(coverage_strongest_h0(0.5, 4.0), Err(Error::Validity(_))));
        assert!(matches!(coverage_strongest_height(0.99, 1e-3, 20.0, 4.0), Err(Error::Validity(_))));
        let c = cfg(1e-3, 20.0, 3.0, 4.0, LosModel::buildings(0.1, 10.0).unwrap(), 0.5);
        assert!(matches!(coverage_general(&c, AssociationPolicy::Strongest), Err(Error::Validity(_))));
        assert!(coverage_general(&c, AssociationPolicy::Closest).is_ok());
    }

    #[test]
    fn closest_height_examples() {
        assert_eq!(coverage_closest_height(1.0, 5e-3, 0.0, 4.0).unwrap(), coverage_closest_h0(1.0, 4.0).unwrap());
        let lambda = 1.0 / (PI * 400.0 * FRAC_PI_4);
        let v = coverage_closest_height(1.0, lambda, 20.0, 4.0).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp() / (1.0 + FRAC_PI_4), max_relative = 1e-14);
        assert!(coverage_closest_height(1.0, 1.0, 20.0, 4.0).unwrap() < 1e-100);
        assert_relative_eq!(
            coverage_closest_height(1.0, 1e-3, 20.0, 4.0).unwrap(),
            0.208_753_345_048_932_5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn strongest_height_examples() {
        assert_relative_eq!(
            coverage_strongest_height(1.0, 1e-3, 20.0, 4.0).unwrap(),
            0.262_779_090_719_887_6,
            max_relative = 1e-6
        );
        let tiny = coverage_strongest_height(1.0, 1e-12, 20.0, 4.0).unwrap();
        assert!((tiny - 2.0 / PI).abs() < 1e-3);
        let dense = coverage_strongest_height(1.0, 0.1, 20.0, 4.0).unwrap();
        assert!(dense < 0.01);
        assert_relative_eq!(dense, 1.066e-43, max_relative = 1e-3);
        assert!(
            coverage_strongest_height(1.0, 1e-3, 20.0, 4.0).unwrap()
                > coverage_closest_height(1.0, 1e-3, 20.0, 4.0).unwrap()
        );
        assert_eq!(
            coverage_strongest_height(2.0, 1e-3, 0.0, 3.0).unwrap(),
            coverage_strongest_h0(2.0, 3.0).unwrap()
        );
    }

    #[test]
    fn lambda_opt_examples() {
        let v = lambda_opt_closest(1.0, 20.0, 4.0).unwrap();
        assert_relative_eq!(v, 4.0 / (400.0 * PI * PI), max_relative = 1e-14);
        assert_relative_eq!(lambda_opt_closest(1.0, 10.0, 4.0).unwrap(), 4.0 * v, max_relative = 1e-14);
        assert!(matches!(lambda_opt_closest(1.0, 0.0, 4.0), Err(Error::NoFiniteOptimum(_))));
        assert!(matches!(lambda_opt_closest(1e-320, 20.0, 4.0), Err(Error::Domain(_))));
    }

    #[test]
    fn general_reduces_to_ground_closed_forms() {
        for &alpha in &[3.0, 4.0] {
            for &theta in &[1.0, 2.0, 10.0] {
                for &lambda in &[1e-5, 1e-3, 1e-1] {
                    let c = cfg(lambda, 0.0, alpha - 0.5, alpha, LosModel::all_nlos(), theta);
                    let g = coverage_general(&c, AssociationPolicy::Closest).unwrap();
                    assert_relative_eq!(g, coverage_closest_h0(theta, alpha).unwrap(), max_relative = 1e-4);
                    let g = coverage_general(&c, AssociationPolicy::Strongest).unwrap();
                    assert_relative_eq!(g, coverage_strongest_h0(theta, alpha).unwrap(), max_relative = 1e-4);
                }
            }
        }
    }

    #[test]
    fn general_reduces_to_height_closed_forms() {
        for &alpha in &[3.0, 4.0] {
            for &theta in &[1.0, 2.0, 10.0] {
                for &(lambda, h) in &[(1e-4, 20.0), (1e-3, 10.0), (3e-3, 15.0)] {
                    let c = cfg(lambda, h, alpha - 0.5, alpha, LosModel::all_nlos(), theta);
                    let g = coverage_general(&c, AssociationPolicy::Closest).unwrap();
                    let want = coverage_closest_height(theta, lambda, h, alpha).unwrap();
                    assert_relative_eq!(g, want, max_relative = 1e-4);
                    let g = coverage_general(&c, AssociationPolicy::Strongest).unwrap();
                    let want = coverage_strongest_height(theta, lambda, h, alpha).unwrap();
                    assert_relative_eq!(g, want, max_relative = 1e-4);
                }
            }
        }
    }

    #[test]
    fn dispatcher_picks_method() {
        let c = cfg(1e-3, 20.0, 3.0, 4.0, LosModel::all_nlos(), 1.0);
        let p = coverage(&c, AssociationPolicy::Closest).unwrap();
        assert_eq!(p.method, Method::ClosedForm);
        assert_relative_eq!(p.pcov, 0.208_753_345_048_932_5, max_relative = 1e-12);
        let c = cfg(1e-3, 20.0, 3.0, 4.0, LosModel::buildings(0.1, 10.0).unwrap(), 1.0);
        let p = coverage(&c, AssociationPolicy::Strongest).unwrap();
        assert_eq!(p.method, Method::GeneralQuadrature);
        assert_eq!(p.ase, ase(1.0, 1e-3, p.pcov));
    }

    #[test]
    fn buildings_strongest_peaks_near_1e3() {
        let model = LosModel::buildings(0.1, 10.0).unwrap();
        let at = |lambda: f64| {
            coverage_general(&cfg(lambda, 20.0, 3.0, 4.0, model, 1.0), AssociationPolicy::Strongest).unwrap()
        };
        let peak = at(1e-3);
        assert!(peak > at(1e-4) && peak > at(1e-2));
        assert!((at(1e-6) - 0.63).abs() < 0.02);
    }

    #[test]
    fn general_is_density_invariant_at_ground() {
        let model = LosModel::buildings(0.01, 10.0).unwrap();
        let vals: Vec<f64> = [1e-5, 1e-4, 1e-3]
            .iter()
            .map(|&l| coverage_general(&cfg(l, 0.0, 3.0, 4.0, LosModel::all_los(), 1.0), AssociationPolicy::Closest).unwrap())
            .collect();
        assert_relative_eq!(vals[0], vals[1], max_relative = 1e-4);
        assert_relative_eq!(vals[0], vals[2], max_relative = 1e-4);
        // with h = 0 the buildings model blocks at a fixed distance scale, so λ matters
        let a = coverage_general(&cfg(1e-5, 0.0, 3.0, 4.0, model, 1.0), AssociationPolicy::Closest).unwrap();
        let b = coverage_general(&cfg(1e-2, 0.0, 3.0, 4.0, model, 1.0), AssociationPolicy::Closest).unwrap();
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn limits() {
        let r = coverage_limits_check(AssociationPolicy::Closest, 1.0, 20.0, 4.0).unwrap();
        assert_relative_eq!(r.low_density_limit, 1.0 / (1.0 + FRAC_PI_4), max_relative = 1e-6);
        assert!(r.high_density_decay < 1e-10 && r.low_ok && r.high_ok);
        let r = coverage_limits_check(AssociationPolicy::Strongest, 1.0, 20.0, 4.0).unwrap();
        assert!((r.low_density_limit - 2.0 / PI).abs() < 1e-3);
        assert!(r.high_density_decay < 0.01 && r.low_ok && r.high_ok);
        let r = coverage_limits_check(AssociationPolicy::Closest, 1.0, 20.0, 3.0).unwrap();
        assert_relative_eq!(r.baseline, 0.374_349_890_429_360_6, max_relative = 1e-12);
        assert!(coverage_limits_check(AssociationPolicy::Closest, 1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn argmax_of_ase_grid_matches_optimum() {
        for &h in &[10.0, 15.0, 20.0] {
            for &alpha in &[3.0, 4.0] {
                let grid: Vec<f64> = (0..200).map(|i| 10f64.powf(-6.0 + 5.0 * i as f64 / 199.0)).collect();
                let best = grid
                    .iter()
                    .copied()
                    .max_by(|&a, &b| {
                        let fa = a * coverage_closest_height(1.0, a, h, alpha).unwrap();
                        let fb = b * coverage_closest_height(1.0, b, h, alpha).unwrap();
                        fa.partial_cmp(&fb).unwrap()
                    })
                    .unwrap();
                let opt = lambda_opt_closest(1.0, h, alpha).unwrap();
                let step = 10f64.powf(5.0 / 199.0);
                assert!(best / opt < step && opt / best < step);
            }
        }
    }

    proptest! {
        #[test]
        fn closest_height_decreasing(
            theta in 0.05f64..20.0,
            alpha in 2.2f64..6.0,
            log_lambda in -7.0f64..-1.5,
            h in 1.0f64..60.0,
            bump in 1.01f64..3.0,
        ) {
            let lambda = 10f64.powf(log_lambda);
            let base = coverage_closest_height(theta, lambda, h, alpha).unwrap();
            prop_assume!(base > 1e-250);
            prop_assert!(coverage_closest_height(theta, lambda * bump, h, alpha).unwrap() < base);
            prop_assert!(coverage_closest_height(theta, lambda, h * bump, alpha).unwrap() < base);
        }

        #[test]
        fn strongest_height_is_probability_and_dominates(
            theta in 1.0f64..10.0,
            alpha in 2.5f64..5.0,
            log_lambda in -6.0f64..-2.0,
            h in 1.0f64..40.0,
        ) {
            let lambda = 10f64.powf(log_lambda);
            let s = coverage_strongest_height(theta, lambda, h, alpha).unwrap();
            let c = coverage_closest_height(theta, lambda, h, alpha).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            // both can be far below the absolute quadrature floor
            prop_assert!(s >= c * (1.0 - 1e-6) - 1e-13);
        }
    }
}
