use crate::error::{domain, numeric, Error, Result};
use crate::real::Real;
use crate::special::{exp_integral_scaled, ln_tricomi_u};

/// Hard cap on the number of series terms summed by [`expected_interference_bound`].
const MAX_TERMS: usize = 5_000_000;

fn check_args<T: Real>(lambda: T, h: T, alpha: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(domain(format!("BS density must be positive, got {lambda:?}")));
    }
    if !(alpha > T::lit(2.0)) || !alpha.is_finite() {
        return Err(domain(format!("pathloss exponent must exceed 2, got {alpha:?}")));
    }
    if !(h >= T::zero()) || !h.is_finite() {
        return Err(domain(format!("height must be non-negative, got {h:?}")));
    }
    if h == T::zero() {
        return Err(Error::Divergence(
            "expected interference is infinite for ground-level BSs".into(),
        ));
    }
    Ok(())
}

/// Mean received power `E[g·ℓ(r₁, h)]` from the nearest BS:
/// `πλh^{2−α}·e^c·E_{α/2}(c)` with `c = πλh²`.
pub fn expected_interference_nearest<T: Real>(lambda: T, h: T, alpha: T) -> Result<T> {
    check_args(lambda, h, alpha)?;
    let c = T::PI() * lambda * h * h;
    let two = T::lit(2.0);
    Ok(T::PI() * lambda * h.powf(two - alpha) * exp_integral_scaled(alpha / two, c)?)
}

/// Term `i ≥ 1` of the series `Σ_i c^i h^{−α} U(i, i+1−α/2, c)`, the mean power
/// received from the i-th nearest BS.
pub fn interference_series_term<T: Real>(i: usize, lambda: T, h: T, alpha: T) -> Result<T> {
    check_args(lambda, h, alpha)?;
    if i == 0 {
        return Err(domain("series terms are indexed from 1"));
    }
    term(i, T::PI() * lambda * h * h, h, alpha)
}

fn term<T: Real>(i: usize, c: T, h: T, alpha: T) -> Result<T> {
    let a = T::lit(i as f64);
    let b = a + T::one() - alpha / T::lit(2.0);
    Ok((a * c.ln() - alpha * h.ln() + ln_tricomi_u(a, b, c)?).exp())
}

/// Upper bound on the mean aggregate interference, summing the per-BS series
/// until the current term drops below `tol` times the partial sum.
///
/// Terms decay only like `i^{−α/2}`, so small `tol` needs many terms.
pub fn expected_interference_bound<T: Real>(lambda: T, h: T, alpha: T, tol: T) -> Result<T> {
    check_args(lambda, h, alpha)?;
    if !(tol > T::zero()) || !tol.is_finite() {
        return Err(domain(format!("series tolerance must be positive, got {tol:?}")));
    }
    let c = T::PI() * lambda * h * h;
    let mut sum = T::zero();
    let mut prev = T::infinity();
    for i in 1..=MAX_TERMS {
        let t = term(i, c, h, alpha)?;
        if !(t < prev) {
            return Err(numeric(format!(
                "interference series term {i} ({t:?}) is not below its predecessor ({prev:?})"
            )));
        }
        sum = sum + t;
        if t < tol * sum {
            return Ok(sum);
        }
        prev = t;
    }
    Err(numeric(format!("interference series needs more than {MAX_TERMS} terms")))
}

/// Mean aggregate power from every BS, `2πλh^{2−α}/(α−2)` by Campbell's theorem;
/// the limit of the series behind [`expected_interference_bound`].
pub fn expected_interference_total<T: Real>(lambda: T, h: T, alpha: T) -> Result<T> {
    check_args(lambda, h, alpha)?;
    let two = T::lit(2.0);
    Ok(T::TAU() * lambda * h.powf(two - alpha) / (alpha - two))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn nearest_examples() {
        let v = expected_interference_nearest(1.0 / PI, 1.0, 4.0).unwrap();
        assert_relative_eq!(v, 0.403_652_637_676_805_9, max_relative = 1e-12);
        assert_relative_eq!(v, E * 0.148_495_506_775_922_05, max_relative = 1e-12);
        let v = expected_interference_nearest(1e-3, 20.0, 4.0).unwrap();
        assert_relative_eq!(v, 2.829_142_090_838_50e-6, max_relative = 1e-10);
        let tiny = expected_interference_nearest(1e-15, 20.0, 4.0).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-17);
    }

    #[test]
    fn ground_level_diverges() {
        assert!(matches!(expected_interference_nearest(1e-3, 0.0, 4.0), Err(Error::Divergence(_))));
        assert!(matches!(expected_interference_bound(1e-3, 0.0, 4.0, 1e-6), Err(Error::Divergence(_))));
        assert!(expected_interference_nearest(1e-3, 1.0, 2.0).is_err());
        assert!(expected_interference_bound(1e-3, 1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn first_term_is_nearest() {
        for &(lambda, h, alpha) in &[(1.0 / PI, 1.0, 4.0), (1e-3, 20.0, 4.0), (1e-4, 10.0, 3.0), (0.02, 5.0, 3.5)] {
            let first = interference_series_term(1, lambda, h, alpha).unwrap();
            let nearest = expected_interference_nearest(lambda, h, alpha).unwrap();
            assert_relative_eq!(first, nearest, max_relative = 1e-6);
        }
    }

    #[test]
    fn terms_strictly_decrease() {
        for &(lambda, h, alpha) in &[(1e-3, 20.0, 4.0), (1.0 / PI, 1.0, 4.0), (1e-4, 10.0, 3.0)] {
            let terms: Vec<f64> = (1..=60).map(|i| interference_series_term(i, lambda, h, alpha).unwrap()).collect();
            assert!(terms.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn bound_approaches_campbell_total() {
        let (lambda, h, alpha) = (1e-3, 20.0, 4.0);
        let bound = expected_interference_bound(lambda, h, alpha, 1e-8).unwrap();
        let total = expected_interference_total(lambda, h, alpha).unwrap();
        assert!(bound < total);
        assert_relative_eq!(bound, total, max_relative = 1e-3);
        assert!(bound > expected_interference_nearest(lambda, h, alpha).unwrap());
    }
}
