use crate::error::{domain, Result};
use crate::propagation::{pathloss_unchecked, LosModel, Regime};
use crate::quadrature::{integrate, integrate_algebraic_tail, integrate_breaks, Tolerance};
use crate::real::Real;
use crate::special::{psi_growth_constant, psi_unchecked};

use super::{AssociationPolicy, NetworkConfig};

/// Relative tolerance of every interference-exponent integral.
pub(crate) const INNER_REL: f64 = 1e-8;

/// `x/(1+x)` that stays exact at `x = 0` and `x = ∞`.
#[inline]
fn saturate<T: Real>(x: T) -> T {
    (T::one() + x.recip()).recip()
}

/// Horizontal distance where `s·ℓ(t) = 1`, or 0 if every BS is past it.
fn crossover<T: Real>(s: T, h: T, alpha: T) -> T {
    let d = s.powf(alpha.recip());
    let t2 = d * d - h * h;
    if t2 > T::zero() {
        t2.sqrt()
    } else {
        T::zero()
    }
}

fn check_s_r<T: Real>(s: T, r: T) -> Result<()> {
    if !(s >= T::zero()) || !s.is_finite() {
        return Err(domain(format!("Laplace argument must be finite and non-negative, got {s:?}")));
    }
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(domain(format!("serving distance must be finite and non-negative, got {r:?}")));
    }
    Ok(())
}

/// Integrates `g` over `[nu, ∞)`: adaptive quadrature up to a cut placed past
/// the crossover distances, the BS height and the LOS features, then an
/// algebraic-tail substitution matched to the smallest pathloss exponent.
fn field_integral<T, F>(mut g: F, nu: T, s: T, cfg: &NetworkConfig<T>, alphas: &[T]) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let h = cfg.height();
    let mut knots = cfg.los_model.breakpoints(h);
    knots.push(h);
    for &alpha in alphas {
        knots.push(crossover(s, h, alpha));
    }
    let far = knots.iter().fold(nu, |m, &k| m.max(k));
    let mut cut = T::lit(4.0) * far;
    if !(cut > nu) {
        cut = nu + T::one();
    }
    let mut points = vec![nu];
    points.extend(knots.into_iter().filter(|&k| k > nu && k < cut));
    points.push(cut);
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite knots"));
    points.dedup();

    let tol = Tolerance::relative(INNER_REL);
    let head = integrate_breaks(&mut g, &points, tol)?.value;
    let alpha_min = alphas.iter().fold(T::infinity(), |m, &a| m.min(a));
    let m = (alpha_min - T::lit(2.0)).recip().max(T::one());
    let tail = integrate_algebraic_tail(&mut g, cut, m, tol)?.value;
    Ok(head + tail)
}

/// `∫_ν^∞ s·ℓ/(1+s·ℓ) t dt` with every interferer in `regime`.
pub(crate) fn single_exponent<T: Real>(
    s: T,
    nu: T,
    cfg: &NetworkConfig<T>,
    regime: Regime,
) -> Result<T> {
    if s == T::zero() {
        return Ok(T::zero());
    }
    let h = cfg.height();
    let alpha = cfg.pathloss.alpha(regime);
    field_integral(
        |t| saturate(s * pathloss_unchecked(t, h, alpha)) * t,
        nu,
        s,
        cfg,
        &[alpha],
    )
}

/// `∫_ν^∞ [p·x_L/(1+x_L) + (1−p)·x_N/(1+x_N)] t dt`, the full exponent of the
/// mixed interference field in a single integral.
pub(crate) fn mixed_exponent<T: Real>(s: T, nu: T, cfg: &NetworkConfig<T>) -> Result<T> {
    if let Some(regime) = cfg.los_model.uniform_regime(cfg.height()) {
        return single_exponent(s, nu, cfg, regime);
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    let h = cfg.height();
    let (al, an) = (cfg.pathloss.alpha_los, cfg.pathloss.alpha_nlos);
    let model = cfg.los_model;
    field_integral(
        |t| {
            let p = model.p_los(t, h);
            let d2 = t * t + h * h;
            let xl = s * d2.powf(-T::lit(0.5) * al);
            let xn = s * d2.powf(-T::lit(0.5) * an);
            (p * saturate(xl) + (T::one() - p) * saturate(xn)) * t
        },
        nu,
        s,
        cfg,
        &[al, an],
    )
}

/// LOS correction `∫_ν^∞ p(t)(1/(1+x_N) − 1/(1+x_L)) t dt`.
fn los_correction<T: Real>(s: T, nu: T, cfg: &NetworkConfig<T>) -> Result<T> {
    if s == T::zero() || matches!(cfg.los_model, LosModel::Constant { p } if p == T::zero()) {
        return Ok(T::zero());
    }
    let h = cfg.height();
    let (al, an) = (cfg.pathloss.alpha_los, cfg.pathloss.alpha_nlos);
    let model = cfg.los_model;
    field_integral(
        |t| {
            let p = model.p_los(t, h);
            if p == T::zero() {
                return T::zero();
            }
            let d2 = t * t + h * h;
            let xl = s * d2.powf(-T::lit(0.5) * al);
            let xn = s * d2.powf(-T::lit(0.5) * an);
            p * (saturate(xl) - saturate(xn)) * t
        },
        nu,
        s,
        cfg,
        &[al, an],
    )
}

/// Laplace transform of the interference when every interferer is in `regime`.
///
/// `r` is the serving distance; for `Closest` interferers lie beyond it.
pub fn laplace_single_regime<T: Real>(
    s: T,
    cfg: &NetworkConfig<T>,
    policy: AssociationPolicy,
    r: T,
    regime: Regime,
) -> Result<T> {
    check_s_r(s, r)?;
    cfg.validate()?;
    let e = single_exponent(s, policy.nu(r), cfg, regime)?;
    Ok((-T::TAU() * cfg.bs_density * e).exp())
}

/// Laplace transform of the interference with LOS and NLOS interferers,
/// written as the NLOS-only transform times a LOS correction factor.
pub fn laplace_mixed<T: Real>(
    s: T,
    cfg: &NetworkConfig<T>,
    policy: AssociationPolicy,
    r: T,
) -> Result<T> {
    check_s_r(s, r)?;
    cfg.validate()?;
    let nu = policy.nu(r);
    let nlos = single_exponent(s, nu, cfg, Regime::Nlos)?;
    let corr = los_correction(s, nu, cfg)?;
    Ok((-T::TAU() * cfg.bs_density * (nlos + corr)).exp())
}

/// Single-slope Laplace transform with elevated BSs, split into the
/// ground-level transform and a positive correction over the height band.
pub fn laplace_height_split<T: Real>(
    s: T,
    lambda: T,
    h: T,
    alpha: T,
    policy: AssociationPolicy,
    r: T,
) -> Result<T> {
    check_s_r(s, r)?;
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(domain(format!("BS density must be positive, got {lambda:?}")));
    }
    if !(h >= T::zero()) || !h.is_finite() {
        return Err(domain(format!("height must be non-negative, got {h:?}")));
    }
    if !(alpha > T::lit(2.0)) || !alpha.is_finite() {
        return Err(domain(format!("pathloss exponent must exceed 2, got {alpha:?}")));
    }
    if s == T::zero() {
        return Ok(T::one());
    }
    let pi_lambda = T::PI() * lambda;
    let (base, lo, hi) = match policy {
        AssociationPolicy::Closest if r > T::zero() => {
            let psi = psi_unchecked(s * r.powf(-alpha), alpha)?;
            (pi_lambda * r * r * psi, r, (r * r + h * h).sqrt())
        }
        _ => {
            let ground = psi_growth_constant(alpha) * s.powf(T::lit(2.0) / alpha);
            let lo = policy.nu(r);
            (pi_lambda * ground, lo, (lo * lo + h * h).sqrt())
        }
    };
    let band = if hi > lo {
        integrate(
            |t: T| saturate(s * t.powf(-alpha)) * t,
            lo,
            hi,
            Tolerance::relative(INNER_REL * 1e-2),
        )?
        .value
    } else {
        T::zero()
    };
    Ok((T::TAU() * lambda * band - base).exp())
}
