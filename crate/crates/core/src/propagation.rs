//! Power-law pathloss and distance-dependent LOS probability models.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::real::Real;

/// Propagation condition of a single link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Los,
    Nlos,
}

/// Dual-slope pathloss exponents and the common BS height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PathlossParams<T> {
    pub alpha_los: T,
    pub alpha_nlos: T,
    /// BS height above the UE in meters.
    pub height: T,
}

impl<T: Real> PathlossParams<T> {
    /// Requires `alpha_nlos > alpha_los > 2` and `height ≥ 0`.
    pub fn new(alpha_los: T, alpha_nlos: T, height: T) -> Result<Self> {
        let params = Self {
            alpha_los,
            alpha_nlos,
            height,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_los > T::lit(2.0)) || !self.alpha_los.is_finite() {
            return Err(domain(format!("alpha_los must exceed 2, got {:?}", self.alpha_los)));
        }
        if !(self.alpha_nlos > self.alpha_los) || !self.alpha_nlos.is_finite() {
            return Err(domain(format!(
                "alpha_nlos must exceed alpha_los, got {:?} <= {:?}",
                self.alpha_nlos, self.alpha_los
            )));
        }
        if !(self.height >= T::zero()) || !self.height.is_finite() {
            return Err(domain(format!("height must be non-negative, got {:?}", self.height)));
        }
        Ok(())
    }

    pub fn alpha(&self, regime: Regime) -> T {
        match regime {
            Regime::Los => self.alpha_los,
            Regime::Nlos => self.alpha_nlos,
        }
    }

    /// Pathloss of a link at horizontal distance `r` in `regime`.
    pub fn gain(&self, r: T, regime: Regime) -> T {
        pathloss_unchecked(r, self.height, self.alpha(regime))
    }
}

/// Random buildings of fixed height dropped as a 1-D PPP along each link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BlockageParams<T> {
    /// Buildings per meter.
    pub building_density: T,
    /// Building height in meters.
    pub building_height: T,
}

impl<T: Real> BlockageParams<T> {
    pub fn new(building_density: T, building_height: T) -> Result<Self> {
        if !(building_density >= T::zero()) || !building_density.is_finite() {
            return Err(domain(format!(
                "building density must be non-negative, got {building_density:?}"
            )));
        }
        if !(building_height >= T::zero()) || !building_height.is_finite() {
            return Err(domain(format!(
                "building height must be non-negative, got {building_height:?}"
            )));
        }
        Ok(Self {
            building_density,
            building_height,
        })
    }

    /// Fraction `τ = min(h̃/h, 1)` of the link on which a building can block it.
    ///
    /// `τ = 0` without buildings height; `τ = 1` for ground-level BSs.
    pub fn tau(&self, h: T) -> T {
        if self.building_height == T::zero() {
            T::zero()
        } else if h == T::zero() {
            T::one()
        } else {
            (self.building_height / h).min(T::one())
        }
    }

    /// Exponential decay rate of the LOS probability in horizontal distance.
    pub fn decay_rate(&self, h: T) -> T {
        self.building_density * self.tau(h)
    }
}

/// Distance-dependent LOS probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", rename_all = "lowercase", tag = "kind")]
pub enum LosModel<T> {
    /// `p(r) = exp(−λ̃ τ r)`.
    Buildings(BlockageParams<T>),
    /// LOS up to a critical distance, NLOS beyond.
    Step { critical_distance: T },
    /// Distance-independent LOS probability.
    Constant { p: T },
}

impl<T: Real> LosModel<T> {
    pub fn buildings(building_density: T, building_height: T) -> Result<Self> {
        Ok(Self::Buildings(BlockageParams::new(building_density, building_height)?))
    }

    pub fn step(critical_distance: T) -> Result<Self> {
        if !(critical_distance >= T::zero()) || !critical_distance.is_finite() {
            return Err(domain(format!(
                "critical distance must be non-negative, got {critical_distance:?}"
            )));
        }
        Ok(Self::Step { critical_distance })
    }

    pub fn constant(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(domain(format!("LOS probability must lie in [0, 1], got {p:?}")));
        }
        Ok(Self::Constant { p })
    }

    /// Every link in LOS.
    pub fn all_los() -> Self {
        Self::Constant { p: T::one() }
    }

    /// Every link in NLOS.
    pub fn all_nlos() -> Self {
        Self::Constant { p: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Buildings(b) => BlockageParams::new(b.building_density, b.building_height).map(|_| ()),
            Self::Step { critical_distance } => Self::step(critical_distance).map(|_| ()),
            Self::Constant { p } => Self::constant(p).map(|_| ()),
        }
    }

    /// LOS probability at horizontal distance `r` for BS height `h`.
    pub fn p_los(&self, r: T, h: T) -> T {
        match *self {
            Self::Buildings(b) => {
                let rate = b.decay_rate(h);
                if rate == T::zero() {
                    T::one()
                } else {
                    (-rate * r.max(T::zero())).exp()
                }
            }
            Self::Step { critical_distance } => {
                if r <= critical_distance {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Constant { p } => p,
        }
    }

    /// The regime shared by every link, if the model is degenerate at height `h`.
    pub fn uniform_regime(&self, h: T) -> Option<Regime> {
        match *self {
            Self::Buildings(b) if b.decay_rate(h) == T::zero() => Some(Regime::Los),
            Self::Constant { p } if p == T::one() => Some(Regime::Los),
            Self::Constant { p } if p == T::zero() => Some(Regime::Nlos),
            _ => None,
        }
    }

    /// Distances where the LOS probability changes character; used as
    /// quadrature breakpoints.
    pub fn breakpoints(&self, h: T) -> Vec<T> {
        match *self {
            Self::Buildings(b) => {
                let rate = b.decay_rate(h);
                if rate > T::zero() {
                    let scale = rate.recip();
                    vec![scale, T::lit(5.0) * scale, T::lit(40.0) * scale]
                } else {
                    Vec::new()
                }
            }
            Self::Step { critical_distance } if critical_distance > T::zero() => vec![critical_distance],
            _ => Vec::new(),
        }
    }
}

/// `(r² + h²)^{−α/2}` without argument checks.
#[inline]
pub(crate) fn pathloss_unchecked<T: Real>(r: T, h: T, alpha: T) -> T {
    (r * r + h * h).powf(-T::lit(0.5) * alpha)
}

/// Power-law pathloss `(r² + h²)^{−α/2}` of a BS at horizontal distance `r` and height `h`.
pub fn pathloss<T: Real>(r: T, h: T, alpha: T) -> Result<T> {
    if !(alpha > T::lit(2.0)) || !alpha.is_finite() {
        return Err(domain(format!("pathloss exponent must exceed 2, got {alpha:?}")));
    }
    if !(r >= T::zero()) || !(h >= T::zero()) || !r.is_finite() || !h.is_finite() {
        return Err(domain(format!("distance and height must be non-negative, got r={r:?}, h={h:?}")));
    }
    if r == T::zero() && h == T::zero() {
        return Err(Error::Singularity);
    }
    Ok(pathloss_unchecked(r, h, alpha))
}

/// LOS probability of a link at horizontal distance `r` for BS height `h`.
pub fn los_probability<T: Real>(model: &LosModel<T>, r: T, h: T) -> T {
    model.p_los(r, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pathloss_examples() {
        assert_eq!(pathloss(0.0, 1.0, 4.0).unwrap(), 1.0);
        assert_relative_eq!(pathloss(3.0, 4.0, 2.5).unwrap(), 5f64.powf(-2.5), max_relative = 1e-15);
        assert_relative_eq!(pathloss(3.0, 4.0, 2.5).unwrap(), 0.017_888_543_819_998_32, max_relative = 1e-12);
        assert_relative_eq!(pathloss(100.0, 20.0, 4.0).unwrap(), 10_400f64.powi(-2), max_relative = 1e-15);
    }

    #[test]
    fn pathloss_rejects_origin_and_bad_exponent() {
        assert_eq!(pathloss(0.0, 0.0, 4.0), Err(Error::Singularity));
        assert!(matches!(pathloss(1.0, 0.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(pathloss(-1.0, 0.0, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn pathloss_bounded_by_height() {
        for &r in &[0.0, 0.5, 3.0, 1e3] {
            assert!(pathloss(r, 7.0, 3.5).unwrap() <= 7f64.powf(-3.5));
        }
    }

    #[test]
    fn buildings_examples() {
        let none = LosModel::buildings(0.0, 25.0).unwrap();
        assert_eq!(los_probability(&none, 500.0, 20.0), 1.0);
        let flat = LosModel::buildings(0.3, 0.0).unwrap();
        assert_eq!(los_probability(&flat, 500.0, 20.0), 1.0);
        let dense = LosModel::buildings(0.1, 10.0).unwrap();
        assert_relative_eq!(los_probability(&dense, 100.0, 20.0), (-5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(los_probability(&dense, 100.0, 20.0), 6.737_946_999_085_467e-3, max_relative = 1e-12);
    }

    #[test]
    fn ground_level_bs_uses_full_link() {
        let m = LosModel::buildings(0.01, 10.0).unwrap();
        assert_relative_eq!(los_probability(&m, 100.0, 0.0), (-1f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn step_examples() {
        let m = LosModel::step(300.0).unwrap();
        assert_eq!(los_probability(&m, 300.0, 0.0), 1.0);
        assert_eq!(los_probability(&m, 300.001, 0.0), 0.0);
    }

    #[test]
    fn constant_models_are_uniform() {
        assert_eq!(LosModel::<f64>::all_los().uniform_regime(20.0), Some(Regime::Los));
        assert_eq!(LosModel::<f64>::all_nlos().uniform_regime(20.0), Some(Regime::Nlos));
        assert_eq!(LosModel::constant(0.3).unwrap().uniform_regime(20.0), None);
        assert!(LosModel::constant(1.2).is_err());
        assert!(PathlossParams::new(4.0, 3.0, 10.0).is_err());
        assert!(PathlossParams::new(3.0, 4.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn p_los_in_unit_interval(rate in 0.0..1.0f64, bh in 0.0..50.0f64, r in 0.0..1e4f64, h in 0.0..100.0f64) {
            let m = LosModel::buildings(rate, bh).unwrap();
            let p = m.p_los(r, h);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn buildings_non_increasing(rate in 0.0..1.0f64, bh in 0.0..50.0f64, r in 0.0..1e3f64, dr in 0.0..1e3f64, h in 0.0..100.0f64) {
            let m = LosModel::buildings(rate, bh).unwrap();
            prop_assert!(m.p_los(r + dr, h) <= m.p_los(r, h));
        }

        #[test]
        fn doubling_height_halves_exponent(rate in 1e-4..0.5f64, bh in 1.0..30.0f64, extra in 0.0..50.0f64, r in 0.0..500.0f64) {
            let h = bh + extra;
            let m = LosModel::buildings(rate, bh).unwrap();
            let expected = (-rate * (bh / (2.0 * h)) * r).exp();
            prop_assert!((m.p_los(r, 2.0 * h) - expected).abs() <= 1e-15);
        }

        #[test]
        fn pathloss_monotone(r in 0.0..1e3f64, dr in 1e-3..1e2f64, h in 0.1..50.0f64, dh in 1e-3..10.0f64, a in 2.1..6.0f64) {
            let base = pathloss(r, h, a).unwrap();
            prop_assert!(pathloss(r + dr, h, a).unwrap() < base);
            prop_assert!(pathloss(r, h + dh, a).unwrap() < base);
            if r * r + h * h > 1.0 {
                prop_assert!(pathloss(r, h, a + 0.1).unwrap() < base);
            }
        }
    }
}
