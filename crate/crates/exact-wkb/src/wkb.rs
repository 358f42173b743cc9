//! WKB recursion, coordinate changes, the canonical generator a₀, the formal
//! WKB differential Λ̂ and the Riccati data (w, W, f̂).
//!
//! Conventions: ħ²Ψ'' = QΨ with Ψ = exp(−(1/ħ)∫Y dx), so ħY' = Y² − Q and
//! y_k = (y_{k−1}' − Σ_{i+j=k, i,j≥1} y_i y_j + Q_k) / (2y₀).

use crate::error::{Error, Result};
use crate::hbar_series::HbarSeries;
use crate::jet::Jet;
use crate::poly::{self, RationalFn};
use crate::potential::Potential;
use crate::quad::gauss_legendre_on;
use crate::spectral::{continue_y0, liouville, SigmaPath, SpectralPoint};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Runs the recursion on Taylor jets of the potential coefficients.
/// `qj[k]` is the jet of Q_k; all jets share one length J. The jet of y_k has
/// length J − k.
pub fn recursion_from_jets(qj: &[Jet], root0: C64, n: usize) -> Vec<Jet> {
    let len = qj[0].len();
    let y0 = qj[0].sqrt_with(root0);
    let two_y0 = y0.scale(C64::new(2.0, 0.0));
    let mut ys = vec![y0];
    for k in 1..=n.min(len.saturating_sub(1)) {
        let mut num = ys[k - 1].deriv();
        for i in 1..k {
            num = num.sub(&ys[i].mul(&ys[k - i]));
        }
        if let Some(q) = qj.get(k) {
            num = num.add(q);
        }
        ys.push(num.div(&two_y0));
    }
    ys
}

fn check_regular(p: &Potential, sp: &SpectralPoint) -> Result<C64> {
    let y0 = liouville(p, sp)?;
    if y0.norm() < 1e-12 {
        return Err(Error::Critical(format!("x = {} is a turning point", sp.x)));
    }
    for (z, _) in p.zeros() {
        if (z - sp.x).norm() <= 1e-9 {
            return Err(Error::Critical(format!("x = {} is a turning point", sp.x)));
        }
    }
    Ok(y0)
}

/// Jets of y_0..y_n at x with `extra` spare derivative orders on y_n.
pub fn y_jets_at(p: &Potential, x: C64, y0: C64, n: usize, extra: usize) -> Vec<Jet> {
    let len = n + 1 + extra;
    let xj = Jet::variable(x, len);
    let m = p.hbar_degree();
    let qj: Vec<Jet> = (0..=m.min(n)).map(|k| p.q_jet(k, &xj)).collect();
    recursion_from_jets(&qj, y0, n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbCoefficients {
    pub base: SpectralPoint,
    pub orders: Vec<C64>,
}

pub fn wkb_recursion(p: &Potential, sp: &SpectralPoint, n: usize) -> Result<WkbCoefficients> {
    let y0 = check_regular(p, sp)?;
    let ys = y_jets_at(p, sp.x, y0, n, 0);
    let orders: Vec<C64> = ys.iter().map(|j| j.value()).collect();
    if orders.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite WKB coefficient".into()));
    }
    Ok(WkbCoefficients { base: *sp, orders })
}

/// Λ₀ = y₁ − ¼ ∂ log Q₀ and Λ_k = y_{k+1} for k = 1..n (coefficients of dx).
pub fn formal_wkb_differential(p: &Potential, sp: &SpectralPoint, n: usize) -> Result<Vec<C64>> {
    let y0 = check_regular(p, sp)?;
    let ys = y_jets_at(p, sp.x, y0, n + 1, 0);
    Ok(lambda_from_y(p, sp.x, &ys))
}

fn lambda_from_y(p: &Potential, x: C64, ys: &[Jet]) -> Vec<C64> {
    let dlog = p.q0_prime(x) / p.q0(x);
    let mut out = vec![ys[1].value() - dlog * 0.25];
    out.extend(ys.iter().skip(2).map(|j| j.value()));
    out
}

/// Riccati data of the globalised equation f = ħ(V f − w f − f² − W).
#[derive(Clone, Debug)]
pub struct RiccatiData {
    pub potential: Potential,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiValues {
    pub w: C64,
    /// W_0, W_1, ... (W_k for k ≥ 1 only when Q has ħ-degree ≥ k + 2)
    #[serde(rename = "W")]
    pub big_w: Vec<C64>,
    /// f_1..f_n
    pub f: Vec<C64>,
}

pub fn riccati_data(p: &Potential, n: usize) -> RiccatiData {
    RiccatiData { potential: p.clone(), n }
}

impl RiccatiData {
    /// w = Q₁/(2Q₀); sheet independent.
    pub fn w(&self, x: C64) -> C64 {
        match self.potential.qk(1) {
            Some(q1) => q1.eval(x) / (self.potential.q0(x) * 2.0),
            None => ZERO,
        }
    }

    /// W_k(x) for k ≥ 1: −Q_{k+2}/(4Q₀).
    pub fn big_w_higher(&self, k: usize, x: C64) -> C64 {
        match self.potential.qk(k + 2) {
            Some(q) if k >= 1 => -q.eval(x) / (self.potential.q0(x) * 4.0),
            _ => ZERO,
        }
    }

    pub fn eval(&self, sp: &SpectralPoint) -> Result<RiccatiValues> {
        let y0 = check_regular(&self.potential, sp)?;
        self.eval_with_y0(sp.x, y0, self.n)
    }

    /// Values with y₀ given explicitly (continued along a path).
    pub fn eval_with_y0(&self, x: C64, y0: C64, n: usize) -> Result<RiccatiValues> {
        let ys = y_jets_at(&self.potential, x, y0, n + 1, 0);
        let two_y0 = y0 * 2.0;
        let f: Vec<C64> = (1..=n).map(|k| ys[k + 1].value() / two_y0).collect();
        let mut big_w = vec![-ys[2].value() / two_y0];
        let m = self.potential.hbar_degree();
        for k in 1..=m.saturating_sub(2) {
            big_w.push(self.big_w_higher(k, x));
        }
        let out = RiccatiValues { w: self.w(x), big_w, f };
        if !out.w.is_finite() || out.f.iter().chain(out.big_w.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite Riccati data at {x}")));
        }
        Ok(out)
    }

    /// f₁ = y₂/(2y₀), the order-zero slice of the Borel grid.
    pub fn f1(&self, x: C64, y0: C64) -> C64 {
        let ys = y_jets_at(&self.potential, x, y0, 2, 0);
        ys[2].value() / (y0 * 2.0)
    }

    /// ω(x, t) = Σ_{k≥0} W_{k+1}(x) t^k / k!, a polynomial in t.
    pub fn omega_coeffs(&self, x: C64) -> Vec<C64> {
        let m = self.potential.hbar_degree();
        let mut c = Vec::new();
        let mut fact = 1.0;
        for k in 0..m.saturating_sub(2) {
            if k > 0 {
                fact *= k as f64;
            }
            c.push(self.big_w_higher(k + 1, x) / fact);
        }
        c
    }
}

/// Max deviation of the transformation law ỹ₀ = y₀ẋ, ỹ₁ = y₁ẋ + ẍ/(2ẋ),
/// ỹ_k = y_k ẋ between the recursion run in the chart x = φ(x̃) with the
/// transformed potential and the recursion in x.
pub fn transform_check(p: &Potential, chart: &RationalFn, x_tilde: C64, sheet: i8, n: usize) -> Result<f64> {
    let dphi = chart.deriv();
    for r in dphi.zeros() {
        if (r - x_tilde).norm() < 1e-6 {
            return Err(Error::Critical(format!("chart is critical at {r}")));
        }
    }
    for r in chart.poles() {
        if (r - x_tilde).norm() < 1e-6 {
            return Err(Error::Critical(format!("chart has a pole at {r}")));
        }
    }
    let len = n + 4;
    let xt = Jet::variable(x_tilde, len);
    let xj = chart.eval_jet(&xt);
    let xdot = xj.deriv();
    let xddot = xdot.deriv();
    if xdot.value().norm() < 1e-12 {
        return Err(Error::Critical("chart derivative vanishes".into()));
    }
    let g = xddot.div(&xdot);
    let xdot2 = xdot.mul(&xdot);
    let m = p.hbar_degree().max(2);
    let mut qt: Vec<Jet> = (0..=m).map(|k| xdot2.mul(&p.q_jet(k, &xj))).collect();
    let schw = g.deriv().scale(C64::new(-0.5, 0.0)).add(&g.mul(&g).scale(C64::new(0.25, 0.0)));
    qt[2] = qt[2].add(&schw);
    let min_len = qt.iter().map(|j| j.len()).min().unwrap();
    let qt: Vec<Jet> = qt.iter().map(|j| j.truncate(min_len)).collect();

    let x = xj.value();
    let sp = SpectralPoint::new(x, sheet);
    let base = wkb_recursion(p, &sp, n)?;
    let xd = xdot.value();
    let root0 = base.orders[0] * xd;
    let tilde = recursion_from_jets(&qt, root0, n);
    let mut dev = 0.0f64;
    for k in 0..=n {
        let mut law = base.orders[k] * xd;
        if k == 1 {
            law += xddot.value() / (xd * 2.0);
        }
        dev = dev.max((tilde[k].value() - law).norm());
    }
    Ok(dev)
}

/// −¼ ∫ dlog Q₀ along a polyline; the log of the ratio a₀(end)/a₀(start).
pub fn canonical_generator_log(p: &Potential, xs: &[C64]) -> Result<C64> {
    let crit = p.finite_critical();
    let mut acc = ZERO;
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        for c in &crit {
            if segment_distance(*c, a, b) < 1e-9 {
                return Err(Error::Critical(format!("path passes through critical point {c}")));
            }
        }
        // subdivide so each chord stays well away from the critical points
        let len = (b - a).norm();
        let clearance = crit.iter().map(|c| segment_distance(*c, a, b)).fold(f64::INFINITY, f64::min);
        let pieces = ((len / clearance.min(len).max(1e-12)) * 2.0).ceil().clamp(1.0, 4096.0) as usize;
        for j in 0..pieces {
            let xa = a + (b - a) * (j as f64 / pieces as f64);
            let xb = a + (b - a) * ((j + 1) as f64 / pieces as f64);
            let (t, wt) = gauss_legendre_on(16, 0.0, 1.0);
            for (ti, wi) in t.iter().zip(&wt) {
                let x = xa + (xb - xa) * *ti;
                acc += p.q0_prime(x) / p.q0(x) * (xb - xa) * *wi;
            }
        }
    }
    Ok(acc * -0.25)
}

fn segment_distance(c: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    if d.norm() == 0.0 {
        return (c - a).norm();
    }
    let t = (((c - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (a + d * t - c).norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbSolution {
    pub basepoint: SpectralPoint,
    /// S = ∫ λ along the path.
    #[serde(rename = "S")]
    pub s: C64,
    /// Â = exp(−∫ Λ̂) as an ħ-series.
    pub amplitude_series: HbarSeries,
    pub a0_scale: C64,
}

/// Termwise ∫ Λ_k dx along the samples of a path (k = 0..n), composite
/// Gauss-Legendre on each chord with y₀ continued from the samples.
pub fn integrate_lambda(p: &Potential, path: &SigmaPath, n: usize, nodes: usize) -> Result<Vec<C64>> {
    let mut acc = vec![ZERO; n + 1];
    let (t, w) = gauss_legendre_on(nodes, 0.0, 1.0);
    for i in 1..path.len() {
        let xa = path.samples[i - 1].x;
        let xb = path.samples[i].x;
        let mut y = path.y0[i - 1];
        for (ti, wi) in t.iter().zip(&w) {
            let x = xa + (xb - xa) * *ti;
            y = continue_y0(p, x, y);
            let ys = y_jets_at(p, x, y, n + 1, 0);
            let lam = lambda_from_y(p, x, &ys);
            for k in 0..=n {
                acc[k] += lam[k] * (xb - xa) * *wi;
            }
        }
    }
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite Λ integral".into()));
    }
    Ok(acc)
}

pub fn assemble_solution(p: &Potential, path: &SigmaPath, n: usize) -> Result<WkbSolution> {
    check_regular(p, &path.start())?;
    let s = path.total_z() * 0.5;
    if path.len() < 2 {
        let mut a = vec![ZERO; n + 1];
        a[0] = C64::new(1.0, 0.0);
        return Ok(WkbSolution {
            basepoint: path.start(),
            s,
            amplitude_series: HbarSeries::new(a)?,
            a0_scale: C64::new(1.0, 0.0),
        });
    }
    let lam = integrate_lambda(p, path, n, 16)?;
    let neg = HbarSeries::new(lam.iter().map(|v| -v).collect())?;
    let amp = neg.exp();
    let a0_log = canonical_generator_log(p, &path.xs())?;
    Ok(WkbSolution { basepoint: path.start(), s, amplitude_series: amp, a0_scale: a0_log.exp() })
}

/// Coefficients R_j of Y_N² − ħY_N' − Q, the Schrödinger residual of the
/// truncated WKB solution, j = 0..2N+1.
pub fn schrodinger_residual_coeffs(p: &Potential, sp: &SpectralPoint, n: usize) -> Result<Vec<C64>> {
    let y0 = check_regular(p, sp)?;
    let ys = y_jets_at(p, sp.x, y0, n, 1);
    let vals: Vec<C64> = ys.iter().map(|j| j.value()).collect();
    let ders: Vec<C64> = ys.iter().map(|j| j.0[1]).collect();
    let top = 2 * n + 1;
    let mut r = vec![ZERO; top.max(p.hbar_degree()) + 1];
    for i in 0..=n {
        for j in 0..=n {
            r[i + j] += vals[i] * vals[j];
        }
        r[i + 1] -= ders[i];
    }
    for k in 0..=p.hbar_degree() {
        r[k] -= p.qk(k).map(|q| q.eval(sp.x)).unwrap_or(ZERO);
    }
    Ok(r)
}

/// Coefficients of ħY' − Y² + Q with Ŷ = y₀ + ħy₁ + 2y₀ħ f̂, f̂ truncated at
/// f_n; the Riccati residual of the f-representation.
pub fn riccati_residual_coeffs(p: &Potential, sp: &SpectralPoint, n: usize) -> Result<Vec<C64>> {
    let y0 = check_regular(p, sp)?;
    // y_k = 2 y₀ f_{k−1} for k ≥ 2, built from jets of f
    let len = n + 3;
    let ys = y_jets_at(p, sp.x, y0, n + 1, 1);
    let y0j = ys[0].truncate(len.min(ys[0].len()));
    let two_y0 = y0j.scale(C64::new(2.0, 0.0));
    let mut yj: Vec<Jet> = vec![ys[0].clone(), ys[1].clone()];
    for k in 1..=n {
        let fk = ys[k + 1].div(&two_y0);
        yj.push(two_y0.mul(&fk));
    }
    let deg = yj.len() - 1;
    let mut r = vec![ZERO; 2 * deg + 2];
    for i in 0..=deg {
        r[i + 1] += yj[i].0[1];
        for j in 0..=deg {
            r[i + j] -= yj[i].value() * yj[j].value();
        }
    }
    for k in 0..=p.hbar_degree() {
        if k < r.len() {
            r[k] += p.qk(k).map(|q| q.eval(sp.x)).unwrap_or(ZERO);
        }
    }
    Ok(r)
}

/// Linear least-squares slope of log|Σ_j c_j ħ^j| against log ħ.
pub fn log_slope(coeffs: &[C64], from: usize, hbars: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hbars
        .iter()
        .map(|&h| {
            let v = coeffs
                .iter()
                .enumerate()
                .skip(from)
                .fold(ZERO, |acc, (j, c)| acc + c * h.powi(j as i32));
            (h.ln(), v.norm().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Convenience: the straight chart x = a x̃ + b as a rational function.
pub fn affine_chart(a: C64, b: C64) -> RationalFn {
    RationalFn::poly(poly::trim(&[b, a]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn airy_at_one() -> (Potential, SpectralPoint) {
        (Potential::airy(), SpectralPoint::new(c(1.0), 1))
    }

    #[test]
    fn airy_low_orders() {
        let (p, sp) = airy_at_one();
        let y = wkb_recursion(&p, &sp, 4).unwrap().orders;
        assert!((y[0] - c(1.0)).norm() < 1e-15);
        assert!((y[1] - c(0.25)).norm() < 1e-15);
        assert!((y[2] - c(-5.0 / 32.0)).norm() < 1e-15);
    }

    #[test]
    fn airy_closed_forms_off_the_real_axis() {
        // y1 = 1/(4x), y2 = -5/(32 x^{5/2}) on the principal sheet
        let p = Potential::airy();
        let x = C64::new(0.7, 1.3);
        let y = wkb_recursion(&p, &SpectralPoint::new(x, 1), 2).unwrap().orders;
        assert!((y[1] - C64::new(0.25, 0.0) / x).norm() < 1e-14);
        assert!((y[2] + x.powf(-2.5) * (5.0 / 32.0)).norm() < 1e-14);
    }

    #[test]
    fn turning_point_rejected() {
        let p = Potential::airy();
        assert!(wkb_recursion(&p, &SpectralPoint::new(c(0.0), 1), 2).is_err());
    }

    #[test]
    fn riccati_values_airy() {
        let (p, sp) = airy_at_one();
        let r = riccati_data(&p, 3).eval(&sp).unwrap();
        assert_eq!(r.w, c(0.0));
        assert!((r.big_w[0] - c(5.0 / 64.0)).norm() < 1e-15);
        assert!((r.f[0] - c(-5.0 / 64.0)).norm() < 1e-15);
    }

    #[test]
    fn lambda_zero_without_q1() {
        let p = Potential::weber();
        let l = formal_wkb_differential(&p, &SpectralPoint::new(C64::new(0.3, 2.0), 1), 3).unwrap();
        assert!(l[0].norm() < 1e-14);
    }

    #[test]
    fn lambda_zero_with_q1() {
        // Λ₀ = Q₁/(2y₀) in the present sign convention
        let p = Potential::polynomial(&[&[1.0, 2.0, 1.0], &[0.5, 1.0]]).unwrap();
        let sp = SpectralPoint::new(C64::new(0.4, -0.3), 1);
        let l = formal_wkb_differential(&p, &sp, 2).unwrap();
        let y0 = sp.y0(&p);
        let q1 = p.qk(1).unwrap().eval(sp.x);
        assert!((l[0] - q1 / (y0 * 2.0)).norm() < 1e-13);
    }

    #[test]
    fn identity_chart() {
        let p = Potential::airy();
        let d = transform_check(&p, &affine_chart(c(1.0), c(0.0)), c(1.0), 1, 6).unwrap();
        assert!(d < 1e-13);
    }

    #[test]
    fn generator_logs() {
        let one = Potential::constant_one();
        assert_eq!(canonical_generator_log(&one, &[c(0.0), c(1.0)]).unwrap(), C64::new(-0.0, -0.0));
        let p = Potential::airy();
        let v = canonical_generator_log(&p, &[c(1.0), c(4.0)]).unwrap();
        assert!((v - c(-0.25 * 4f64.ln())).norm() < 1e-13);
    }
}
