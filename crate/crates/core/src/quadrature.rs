//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite intervals.
//!
//! The finite rule is the 21-point Kronrod extension of the 10-point Gauss
//! rule with QUADPACK-style error rescaling. Semi-infinite integrals are
//! compactified with `t = a + L·u/(1−u)` and integrated over `u ∈ [0, 1)`;
//! the scale `L` places the bulk of the integrand near `u = 1/2`.

use crate::error::{numeric, Result};
use crate::real::Real;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_715_202_160,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Absolute and relative error targets; the looser of the two governs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs: T::lit(abs),
            rel: T::lit(rel),
        }
    }

    pub fn relative(rel: f64) -> Self {
        Self::new(0.0, rel)
    }

    fn target(&self, value: T) -> T {
        self.abs.max(self.rel * value.abs())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

/// Upper bound on the number of subintervals before giving up.
pub const DEFAULT_LIMIT: usize = 2000;

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let scale = (T::lit(200.0) * scaled / res_asc).powf(T::lit(1.5));
        scaled = if scale < T::one() {
            res_asc * scale
        } else {
            res_asc
        };
    }
    let fifty_eps = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / fifty_eps {
        scaled = scaled.max(fifty_eps * res_abs);
    }
    scaled
}

fn kronrod21<T, F>(f: &mut F, a: T, b: T) -> Result<Segment<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * T::lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let x = half_len * T::lit(XGK[j]);
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_k = res_k + T::lit(WGK[j]) * sum;
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * sum;
        }
        res_abs = res_abs + T::lit(WGK[j]) * (f1.abs() + f2.abs());
    }

    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (f_center - mean).abs();
    for j in 0..10 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half_len;
    if !value.is_finite() {
        return Err(numeric(format!(
            "non-finite integrand on [{a:?}, {b:?}]"
        )));
    }
    let abs_len = half_len.abs();
    let error = rescale_error((res_k - res_g) * half_len, res_abs * abs_len, res_asc * abs_len);
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over the consecutive intervals given by `points`.
///
/// `points` must be sorted ascending and hold at least two entries.
pub fn integrate_breaks<T, F>(mut f: F, points: &[T], tol: Tolerance<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if points.len() < 2 {
        return Err(numeric("need at least two integration limits"));
    }
    let mut segments = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] > w[0] {
            segments.push(kronrod21(&mut f, w[0], w[1])?);
        }
    }
    let mut evaluations = 21 * segments.len();
    if segments.is_empty() {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
            evaluations,
        });
    }

    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        if error <= tol.target(value) {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= DEFAULT_LIMIT {
            return Err(numeric(format!(
                "quadrature limit reached: estimate {value:?}, error {error:?}"
            )));
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        let width = (seg.b - seg.a).abs();
        let floor = T::lit(100.0) * T::epsilon() * (seg.a.abs().max(seg.b.abs())).max(T::min_positive_value());
        if width <= floor {
            return Err(numeric(format!(
                "interval collapsed near {mid:?} with error {:?}",
                seg.error
            )));
        }
        segments.push(kronrod21(&mut f, seg.a, mid)?);
        segments.push(kronrod21(&mut f, mid, seg.b)?);
        evaluations += 42;
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: T, b: T, tol: Tolerance<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if b >= a {
        integrate_breaks(f, &[a, b], tol)
    } else {
        let est = integrate_breaks(f, &[b, a], tol)?;
        Ok(Estimate {
            value: -est.value,
            ..est
        })
    }
}

/// Integrates `f` over `[a, ∞)` with compactification scale `scale`.
///
/// `breaks` are interior points in the original variable (values at or
/// below `a` are ignored) where the integrand changes character.
pub fn integrate_semi_infinite<T, F>(
    mut f: F,
    a: T,
    scale: T,
    breaks: &[T],
    tol: Tolerance<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(numeric(format!("invalid compactification scale {scale:?}")));
    }
    let mut us: Vec<T> = Vec::with_capacity(breaks.len() + 2);
    us.push(T::zero());
    for &t in breaks {
        if t > a && t.is_finite() {
            let d = t - a;
            us.push(d / (d + scale));
        }
    }
    us.push(T::one());
    us.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    us.dedup();

    let g = |u: T| {
        let one_minus = T::one() - u;
        if one_minus <= T::zero() {
            return T::zero();
        }
        let t = a + scale * u / one_minus;
        let jac = scale / (one_minus * one_minus);
        let v = f(t);
        if v == T::zero() {
            T::zero()
        } else {
            v * jac
        }
    };
    integrate_breaks(g, &us, tol)
}

/// Integrates `f` over `[a, ∞)`, `a > 0`, via `t = a·w^{−m}` on `w ∈ (0, 1]`.
///
/// Suited to algebraic tails: if `f(t) ~ t^{−k}` then the transformed
/// integrand behaves like `w^{m(k−1)−1}`, which is bounded for
/// `m ≥ 1/(k−1)`. Nodes mapping beyond the representable range contribute 0.
pub fn integrate_algebraic_tail<T, F>(mut f: F, a: T, m: T, tol: Tolerance<T>) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(a > T::zero()) || !a.is_finite() {
        return Err(numeric(format!("algebraic tail needs a positive start, got {a:?}")));
    }
    if !(m >= T::one()) || !m.is_finite() {
        return Err(numeric(format!("algebraic tail exponent must be at least 1, got {m:?}")));
    }
    let g = |w: T| {
        let t = a * w.powf(-m);
        let jac = m * t / w;
        if !t.is_finite() || !jac.is_finite() {
            return T::zero();
        }
        let v = f(t);
        if v == T::zero() {
            T::zero()
        } else {
            v * jac
        }
    };
    integrate_breaks(g, &[T::zero(), T::one()], tol)
}

/// Semi-infinite integration with a truncation-sensitivity check.
///
/// Integrates with scales `L` and `2L` and accepts when the two results agree
/// to `check_rel` (relative, with `tol.abs` as an absolute floor). Up to four
/// further doublings are attempted before reporting a numeric failure.
pub fn integrate_semi_infinite_checked<T, F>(
    mut f: F,
    a: T,
    scale: T,
    breaks: &[T],
    tol: Tolerance<T>,
    check_rel: T,
) -> Result<Estimate<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let mut prev = integrate_semi_infinite(&mut f, a, scale, breaks, tol)?;
    let mut current_scale = scale;
    for _ in 0..5 {
        current_scale = current_scale + current_scale;
        let next = integrate_semi_infinite(&mut f, a, current_scale, breaks, tol)?;
        let diff = (next.value - prev.value).abs();
        if diff <= check_rel * next.value.abs() + tol.abs {
            return Ok(Estimate {
                value: next.value,
                error: next.error.max(diff),
                evaluations: prev.evaluations + next.evaluations,
            });
        }
        prev = next;
    }
    Err(numeric(format!(
        "semi-infinite integral not stable under scale doubling (last {:?})",
        prev.value
    )))
}
