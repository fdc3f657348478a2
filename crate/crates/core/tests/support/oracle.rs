//! Test-only reference integrator (tanh–sinh / double exponential).
//!
//! Deliberately shares no code with the library's Gauss–Kronrod engine so it
//! can serve as an independent oracle for closed forms and series.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// ∫_a^b f(x) dx by tanh–sinh with level refinement to relative `tol`.
///
/// Endpoint singularities are fine: `f` is never evaluated at `a` or `b`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 3.5;
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // distance from the nearer endpoint, computed without cancellation
        let comp = 1.0 / (u.abs().exp() * cu);
        let x = if t >= 0.0 { b - half * comp } else { a + half * comp };
        if x <= a || x >= b {
            return 0.0;
        }
        let v = f(x);
        if v.is_finite() {
            v * w
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h * half;
        if (next - estimate).abs() <= tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// ∫_a^∞ f(t) dt via t = a + s·u/(1−u) followed by tanh–sinh on [0, 1].
pub fn tanh_sinh_inf<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, tol: f64) -> f64 {
    tanh_sinh(
        |u| {
            let om = 1.0 - u;
            f(a + scale * u / om) * scale / (om * om)
        },
        0.0,
        1.0,
        tol,
    )
}
