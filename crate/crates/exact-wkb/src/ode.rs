//! Adaptive Dormand-Prince 5(4) for complex state vectors with a real
//! independent variable.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-12, h_min: 1e-12, h_max: f64::INFINITY }
    }
}

fn axpy(y: &[C64], h: f64, terms: &[(f64, &[C64])]) -> Vec<C64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, v) in out.iter_mut().zip(k.iter()) {
            *o += v * (h * c);
        }
    }
    out
}

/// One trial step. Returns the 5th-order solution and the scaled error norm
/// (<= 1 means acceptable).
pub fn dopri_step<F>(f: &F, s: f64, y: &[C64], h: f64, tol: &Tolerances) -> (Vec<C64>, f64)
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let k1 = f(s, y);
    let k2 = f(s + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = f(s + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(s + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        s + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        s + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(s + h, &y5);
    let mut err = 0.0f64;
    for i in 0..y.len() {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.atol + tol.rtol * y[i].norm().max(y5[i].norm());
        err = err.max(e.norm() / sc);
    }
    if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
        err = f64::INFINITY;
    }
    (y5, err)
}

/// Step-size update factor from an error norm.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else if !err.is_finite() {
        0.2
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

/// Integrates from s0 to s1 (either direction). Returns accepted (s, y) pairs
/// including both endpoints.
pub fn integrate<F>(f: &F, s0: f64, s1: f64, y0: &[C64], tol: &Tolerances) -> Result<Vec<(f64, Vec<C64>)>>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let dir = if s1 >= s0 { 1.0 } else { -1.0 };
    let span = (s1 - s0).abs();
    let mut out = vec![(s0, y0.to_vec())];
    if span == 0.0 {
        return Ok(out);
    }
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut h = (span / 16.0).min(tol.h_max);
    let mut guard = 0usize;
    while (s1 - s) * dir > 0.0 {
        guard += 1;
        if guard > 5_000_000 {
            return Err(Error::Numerical("ODE step budget exhausted".into()));
        }
        let remaining = (s1 - s).abs();
        let last = h >= remaining;
        let hh = if last { remaining } else { h };
        let (yn, err) = dopri_step(f, s, &y, hh * dir, tol);
        if err <= 1.0 {
            s = if last { s1 } else { s + hh * dir };
            y = yn;
            out.push((s, y.clone()));
            h = (hh * step_factor(err)).min(tol.h_max);
        } else {
            h = hh * step_factor(err);
            if h < tol.h_min * (1.0 + s.abs()) {
                return Err(Error::StepCollapse {
                    s,
                    closest_point: y.first().copied().unwrap_or_default(),
                    closest_distance: f64::NAN,
                });
            }
        }
    }
    Ok(out)
}
