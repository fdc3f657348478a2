//! Monte Carlo oracle: a marked PPP of BSs around a UE at the origin.
//!
//! Every trial draws from its own ChaCha8 stream keyed by the master seed
//! and the trial index, so estimates do not depend on thread scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::{AssociationPolicy, CoveragePoint, Method, NetworkConfig};
use crate::error::{domain, numeric, Result};
use crate::propagation::{pathloss_unchecked, LosModel, Regime};
use crate::quadrature::{integrate_algebraic_tail, integrate_breaks, Tolerance};
use crate::real::Real;

/// Trials per rayon work item; fixed so sums are reduced in the same order
/// whatever the thread count.
const BATCH: u64 = 4096;

/// Radius doublings tried in auto mode before giving up.
const MAX_STAGES: u32 = 4;

/// Stream offset between radius stages.
const STAGE_STRIDE: u64 = 1 << 40;

/// Stream offset of the interference estimator.
const INTERFERENCE_STREAMS: u64 = 1 << 62;

/// Disk radius of the simulated plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", rename_all = "lowercase")]
pub enum SimRadius<T> {
    /// Start at `max(10/√(πλ), 10h)` and double until truncation is below noise.
    Auto,
    Fixed(T),
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SimSettings<T> {
    pub trials: u64,
    pub seed: u64,
    pub sim_radius: SimRadius<T>,
    /// Two-sided confidence level of reported intervals.
    pub ci_level: T,
}

impl<T: Real> SimSettings<T> {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            sim_radius: SimRadius::Auto,
            ci_level: T::lit(0.95),
        }
    }

    pub fn with_radius(mut self, radius: T) -> Self {
        self.sim_radius = SimRadius::Fixed(radius);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("at least one trial is required"));
        }
        if let SimRadius::Fixed(r) = self.sim_radius {
            if !(r > T::zero()) || !r.is_finite() {
                return Err(domain(format!("simulation radius must be positive, got {r:?}")));
            }
        }
        if !(self.ci_level > T::zero() && self.ci_level < T::one()) {
            return Err(domain(format!("confidence level must lie in (0, 1), got {:?}", self.ci_level)));
        }
        Ok(())
    }

    /// Normal quantile `z` with `P(|Z| ≤ z) = ci_level`.
    fn z(&self) -> T {
        let level = self.ci_level.to_f64().unwrap_or(0.95);
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        T::lit(normal.inverse_cdf(0.5 + 0.5 * level))
    }
}

/// One realization of the BS point process on a disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PppSample<T> {
    pub radius: T,
    /// `(r, angle)` polar coordinates relative to the UE.
    pub positions: Vec<(T, T)>,
    /// Empty until [`assign_marks`] runs.
    pub los_flags: Vec<bool>,
    /// Fading power gains; empty until [`assign_marks`] runs.
    pub gains: Vec<T>,
}

impl<T> PppSample<T> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// The RNG stream used for `stream` under master `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| numeric(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Radial coordinate uniform on the disk, never exactly zero.
#[inline]
fn disk_radius<T: Real, R: Rng + ?Sized>(r_max: T, rng: &mut R) -> T {
    r_max * (T::one() - T::unit(rng)).sqrt()
}

/// Draws a homogeneous PPP of density `lambda` on the disk of radius `r_max`.
pub fn sample_ppp<T: Real, R: Rng + ?Sized>(lambda: T, r_max: T, rng: &mut R) -> Result<PppSample<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(domain(format!("BS density must be positive, got {lambda:?}")));
    }
    if !(r_max > T::zero()) || !r_max.is_finite() {
        return Err(domain(format!("simulation radius must be positive, got {r_max:?}")));
    }
    let mean = (lambda * T::PI() * r_max * r_max).to_f64().unwrap_or(f64::INFINITY);
    let n = poisson_count(mean, rng)?;
    let positions = (0..n)
        .map(|_| {
            let r = disk_radius(r_max, rng);
            (r, T::TAU() * T::unit(rng))
        })
        .collect();
    Ok(PppSample {
        radius: r_max,
        positions,
        los_flags: Vec::new(),
        gains: Vec::new(),
    })
}

/// Draws an independent LOS flag and unit-mean exponential fading gain per BS.
pub fn assign_marks<T: Real, R: Rng + ?Sized>(
    mut sample: PppSample<T>,
    los_model: &LosModel<T>,
    h: T,
    rng: &mut R,
) -> PppSample<T> {
    sample.los_flags = sample
        .positions
        .iter()
        .map(|&(r, _)| T::unit(rng) < los_model.p_los(r, h))
        .collect();
    sample.gains = sample.positions.iter().map(|_| T::exp1(rng)).collect();
    sample
}

/// Running statistics of one trial restricted to a disk.
#[derive(Debug, Clone, Copy)]
struct Field<T> {
    total: T,
    nearest_r: T,
    nearest_power: T,
    max_power: T,
    any: bool,
}

impl<T: Real> Field<T> {
    fn new() -> Self {
        Self {
            total: T::zero(),
            nearest_r: T::infinity(),
            nearest_power: T::zero(),
            max_power: T::zero(),
            any: false,
        }
    }

    fn push(&mut self, r: T, power: T) {
        self.total = self.total + power;
        if r < self.nearest_r {
            self.nearest_r = r;
            self.nearest_power = power;
        }
        self.max_power = self.max_power.max(power);
        self.any = true;
    }

    /// `SIR > θ` for the serving BS, i.e. `P(1+θ) > θ·(Σ P + far)`.
    fn covered(&self, policy: AssociationPolicy, theta: T, far: T) -> bool {
        if !self.any {
            return false;
        }
        let serving = match policy {
            AssociationPolicy::Closest => self.nearest_power,
            AssociationPolicy::Strongest => self.max_power,
        };
        serving * (T::one() + theta) > theta * (self.total + far)
    }
}

/// `x^{−e}` with the common exponents special-cased; `powf` dominates the trial cost.
#[inline]
fn inv_pow<T: Real>(x: T, e: T) -> T {
    if e == T::lit(2.0) {
        (x * x).recip()
    } else if e == T::lit(1.5) {
        (x * x.sqrt()).recip()
    } else {
        x.powf(-e)
    }
}

/// A simulation disk and the mean interference from BSs outside it.
#[derive(Debug, Clone, Copy)]
struct Disk<T> {
    radius: T,
    far: T,
}

impl<T: Real> Disk<T> {
    fn new(cfg: &NetworkConfig<T>, radius: T) -> Result<Self> {
        Ok(Self {
            radius,
            far: far_field_mean(cfg, radius)?,
        })
    }
}

/// Mean interference from BSs beyond `radius`, by Campbell's theorem.
///
/// Adding it to every trial removes the first-order truncation bias, which
/// for pathloss exponents near 2 decays too slowly in the radius to be
/// simulated away; only its fluctuation is left out.
fn far_field_mean<T: Real>(cfg: &NetworkConfig<T>, radius: T) -> Result<T> {
    let h = cfg.height();
    let (al, an) = (cfg.pathloss.alpha_los, cfg.pathloss.alpha_nlos);
    let model = cfg.los_model;
    let density = |t: T| {
        let p = model.p_los(t, h);
        let mut v = T::zero();
        if p > T::zero() {
            v = v + p * pathloss_unchecked(t, h, al);
        }
        if p < T::one() {
            v = v + (T::one() - p) * pathloss_unchecked(t, h, an);
        }
        v * t
    };
    let tol = Tolerance::relative(1e-10);
    let mut points = vec![radius];
    points.extend(model.breakpoints(h).into_iter().filter(|&b| b > radius));
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let head = if points.len() > 1 {
        integrate_breaks(density, &points, tol)?.value
    } else {
        T::zero()
    };
    let start = *points.last().expect("non-empty");
    let m = (al - T::lit(2.0)).recip().max(T::one());
    let tail = integrate_algebraic_tail(density, start, m, tol)?.value;
    Ok(T::TAU() * cfg.bs_density * (head + tail))
}

/// Simulates one trial on the disk `outer`; returns the coverage outcome
/// on the inner disk and on the whole disk.
fn coverage_trial<T: Real>(
    cfg: &NetworkConfig<T>,
    policy: AssociationPolicy,
    inner: Disk<T>,
    outer: Disk<T>,
    rng: &mut ChaCha8Rng,
) -> Result<(bool, bool)> {
    let lambda = cfg.bs_density;
    let h = cfg.height();
    let half_l = T::lit(0.5) * cfg.pathloss.alpha_los;
    let half_n = T::lit(0.5) * cfg.pathloss.alpha_nlos;
    let model = cfg.los_model;
    let h2 = h * h;
    let mean = (lambda * T::PI() * outer.radius * outer.radius).to_f64().unwrap_or(f64::INFINITY);
    let n = poisson_count(mean, rng)?;

    let mut in_field = Field::new();
    let mut out_field = Field::new();
    let uniform = model.uniform_regime(h);
    for _ in 0..n {
        let r = disk_radius(outer.radius, rng);
        let los = match uniform {
            Some(regime) => regime == Regime::Los,
            None => T::unit(rng) < model.p_los(r, h),
        };
        let g = T::exp1(rng);
        let d2 = r * r + h2;
        let power = g * inv_pow(d2, if los { half_l } else { half_n });
        out_field.push(r, power);
        if r <= inner.radius {
            in_field.push(r, power);
        }
    }
    let theta = cfg.sir_threshold;
    Ok((
        in_field.covered(policy, theta, inner.far),
        out_field.covered(policy, theta, outer.far),
    ))
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    inner: u64,
    outer: u64,
}

fn count_coverage<T: Real>(
    cfg: &NetworkConfig<T>,
    policy: AssociationPolicy,
    settings: &SimSettings<T>,
    inner: Disk<T>,
    outer: Disk<T>,
    stage: u64,
) -> Result<Counts> {
    let trials = settings.trials;
    let batches = trials.div_ceil(BATCH);
    let per_batch: Vec<Result<Counts>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut c = Counts::default();
            for trial in b * BATCH..((b + 1) * BATCH).min(trials) {
                let mut rng = trial_rng(settings.seed, trial + stage * STAGE_STRIDE);
                let (i, o) = coverage_trial(cfg, policy, inner, outer, &mut rng)?;
                c.inner += i as u64;
                c.outer += o as u64;
            }
            Ok(c)
        })
        .collect();
    per_batch.into_iter().try_fold(Counts::default(), |acc, c| {
        let c = c?;
        Ok(Counts {
            inner: acc.inner + c.inner,
            outer: acc.outer + c.outer,
        })
    })
}

fn default_radius<T: Real>(lambda: T, h: T) -> T {
    (T::lit(10.0) / (T::PI() * lambda).sqrt()).max(T::lit(10.0) * h)
}

/// Wald interval half-width of a proportion.
fn binomial_halfwidth<T: Real>(p: T, n: u64, z: T) -> T {
    z * (p * (T::one() - p) / T::lit(n as f64)).sqrt()
}

/// Coverage estimate with the simulation details behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CoverageReport<T> {
    pub point: CoveragePoint<T>,
    pub covered: u64,
    pub trials: u64,
    /// Radius of the disk the estimate was taken on.
    pub radius: T,
}

/// Fraction of trials where the serving BS has SIR above θ.
pub fn simulate_coverage<T: Real>(
    cfg: &NetworkConfig<T>,
    policy: AssociationPolicy,
    settings: &SimSettings<T>,
) -> Result<CoveragePoint<T>> {
    Ok(simulate_coverage_report(cfg, policy, settings)?.point)
}

/// As [`simulate_coverage`], also reporting counts and the radius used.
///
/// In auto mode each stage simulates a disk of radius `2R` and also scores
/// the same trials restricted to radius `R`; it stops once the two
/// estimates differ by no more than the confidence half-width.
pub fn simulate_coverage_report<T: Real>(
    cfg: &NetworkConfig<T>,
    policy: AssociationPolicy,
    settings: &SimSettings<T>,
) -> Result<CoverageReport<T>> {
    cfg.validate()?;
    settings.validate()?;
    let theta = cfg.sir_threshold;
    let lambda = cfg.bs_density;
    let n = settings.trials;
    let z = settings.z();
    let nf = T::lit(n as f64);
    let report = |covered: u64, radius: T| {
        let p = T::lit(covered as f64) / nf;
        CoverageReport {
            point: CoveragePoint::new(theta, lambda, p, Method::MonteCarlo, Some(binomial_halfwidth(p, n, z))),
            covered,
            trials: n,
            radius,
        }
    };

    match settings.sim_radius {
        SimRadius::Fixed(r) => {
            let disk = Disk::new(cfg, r)?;
            let c = count_coverage(cfg, policy, settings, disk, disk, 0)?;
            Ok(report(c.outer, r))
        }
        SimRadius::Auto => {
            let mut r = default_radius(lambda, cfg.height());
            for stage in 0..MAX_STAGES {
                let outer = r + r;
                let (di, dout) = (Disk::new(cfg, r)?, Disk::new(cfg, outer)?);
                let c = count_coverage(cfg, policy, settings, di, dout, stage as u64)?;
                let p_in = T::lit(c.inner as f64) / nf;
                let p_out = T::lit(c.outer as f64) / nf;
                if (p_out - p_in).abs() <= binomial_halfwidth(p_out, n, z) {
                    return Ok(report(c.outer, outer));
                }
                r = outer;
            }
            Err(numeric(format!(
                "simulation radius not sufficient after {MAX_STAGES} doublings (last {r:?} m)"
            )))
        }
    }
}

/// Monte Carlo interference moments of a single-slope network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InterferenceEstimate<T> {
    /// Mean received power from the nearest BS.
    pub nearest_mean: T,
    pub nearest_ci: T,
    /// Mean power summed over every BS except the strongest (the serving
    /// BS under strongest association).
    pub aggregate_mean: T,
    pub aggregate_ci: T,
    pub trials: u64,
    pub radius: T,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n_sum: f64,
    n_sq: f64,
    a_sum: f64,
    a_sq: f64,
}

/// Estimates the nearest-BS and aggregate interference means with BSs at
/// height `h > 0`. Auto radius uses the starting radius of the coverage
/// estimator without doubling; BSs beyond it enter the aggregate through
/// their mean.
pub fn simulate_interference<T: Real>(
    lambda: T,
    h: T,
    alpha: T,
    settings: &SimSettings<T>,
) -> Result<InterferenceEstimate<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(domain(format!("BS density must be positive, got {lambda:?}")));
    }
    if !(h > T::zero()) || !h.is_finite() {
        return Err(domain(format!("interference simulation needs h > 0, got {h:?}")));
    }
    if !(alpha > T::lit(2.0)) || !alpha.is_finite() {
        return Err(domain(format!("pathloss exponent must exceed 2, got {alpha:?}")));
    }
    settings.validate()?;
    let radius = match settings.sim_radius {
        SimRadius::Fixed(r) => r,
        SimRadius::Auto => default_radius(lambda, h),
    };
    let two = T::lit(2.0);
    let far = T::TAU() * lambda * (radius * radius + h * h).powf(T::one() - alpha / two) / (alpha - two);
    let trials = settings.trials;
    let batches = trials.div_ceil(BATCH);
    let per_batch: Vec<Result<Moments>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            for trial in b * BATCH..((b + 1) * BATCH).min(trials) {
                let mut rng = trial_rng(settings.seed, INTERFERENCE_STREAMS + trial);
                let sample = sample_ppp(lambda, radius, &mut rng)?;
                let sample = assign_marks(sample, &LosModel::all_nlos(), h, &mut rng);
                let mut field = Field::new();
                for (&(r, _), &g) in sample.positions.iter().zip(&sample.gains) {
                    field.push(r, g * pathloss_unchecked(r, h, alpha));
                }
                let near = field.nearest_power.to_f64().unwrap_or(f64::NAN);
                let agg = (field.total - field.max_power + far).to_f64().unwrap_or(f64::NAN);
                m.n_sum += near;
                m.n_sq += near * near;
                m.a_sum += agg;
                m.a_sq += agg * agg;
            }
            Ok(m)
        })
        .collect();
    let mut m = Moments::default();
    for b in per_batch {
        let b = b?;
        m.n_sum += b.n_sum;
        m.n_sq += b.n_sq;
        m.a_sum += b.a_sum;
        m.a_sq += b.a_sq;
    }
    let n = trials as f64;
    let z = settings.z().to_f64().unwrap_or(1.96);
    let ci = |sum: f64, sq: f64| {
        let mean = sum / n;
        let var = (sq / n - mean * mean).max(0.0);
        (mean, z * (var / n).sqrt())
    };
    let (nearest_mean, nearest_ci) = ci(m.n_sum, m.n_sq);
    let (aggregate_mean, aggregate_ci) = ci(m.a_sum, m.a_sq);
    Ok(InterferenceEstimate {
        nearest_mean: T::lit(nearest_mean),
        nearest_ci: T::lit(nearest_ci),
        aggregate_mean: T::lit(aggregate_mean),
        aggregate_ci: T::lit(aggregate_ci),
        trials,
        radius,
    })
}
