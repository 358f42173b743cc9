//! Laplace resummation of continued Borel data: plain rays, lateral rays at
//! Stokes phases, the Stokes jump, resummed WKB solutions and an ODE oracle.

use crate::borel_engine::{continue_ray, predict_singularities, BoundFit, BorelGrid, ContinueOptions, DEFAULT_K, DEFAULT_M};
use crate::error::{Error, Result};
use crate::ode::{integrate, Tolerances};
use crate::potential::Potential;
use crate::quad::gauss_legendre_on;
use crate::spectral::{angle_diff, continue_y0, liouville, wrap_angle, RecordStatus, SpectralPoint};
use crate::trajectories::trace;
use crate::wkb::y_jets_at;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "none")]
    None,
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResummedValue {
    pub hbar: C64,
    pub value: C64,
    pub alpha: f64,
    pub lateral: Side,
    pub tail_bound: f64,
}

/// Moments ∫₀^L vⁿ e^{−zv} dv for n = 0, 1, 2 (L = 1 or 2).
fn moments(z: C64, len: f64) -> [C64; 3] {
    if z.norm() * len < 0.5 {
        let mut out = [ZERO; 3];
        for (n, o) in out.iter_mut().enumerate() {
            let mut term = ONE;
            for j in 0..40 {
                if j > 0 {
                    term *= -z / j as f64;
                }
                *o += term * len.powi((n + j + 1) as i32) / (n + j + 1) as f64;
            }
        }
        return out;
    }
    let e = (-z * len).exp();
    let m0 = (ONE - e) / z;
    let m1 = (m0 - e * len) / z;
    let m2 = (m1 * 2.0 - e * len * len) / z;
    [m0, m1, m2]
}

/// ∫₀^{r_end} φ(r) e^{−λr} dr by product integration: φ interpolated
/// quadratically on pairs of intervals (a linear last panel for odd counts),
/// the exponential integrated exactly.
pub fn product_integrate(phi: &[C64], h: f64, lambda: C64) -> C64 {
    let m = phi.len().saturating_sub(1);
    if m == 0 {
        return ZERO;
    }
    let z = lambda * h;
    let quad = moments(z, 2.0);
    let w0 = (quad[2] - quad[1] * 3.0 + quad[0] * 2.0) * 0.5;
    let w1 = -(quad[2] - quad[1] * 2.0);
    let w2 = (quad[2] - quad[1]) * 0.5;
    let shift = (-z * 2.0).exp();
    let mut acc = ZERO;
    let mut scale = ONE;
    let mut j = 0;
    while j + 2 <= m {
        acc += scale * (phi[j] * w0 + phi[j + 1] * w1 + phi[j + 2] * w2);
        scale *= shift;
        j += 2;
    }
    if j < m {
        let lin = moments(z, 1.0);
        acc += scale * (phi[j] * (lin[0] - lin[1]) + phi[j + 1] * lin[1]);
    }
    acc * h
}

fn sector_rate(alpha: f64, hbar: C64) -> Result<f64> {
    if hbar.norm() == 0.0 || !hbar.is_finite() {
        return Err(Error::Input("ħ must be finite and nonzero".into()));
    }
    Ok((C64::from_polar(1.0, alpha) / hbar).re)
}

/// Laplace transform of samples φ(r_j e^{iα}), r_j = jh, with the analytic
/// tail bound C e^{(K−λ)τ}/(λ−K) for λ = Re(e^{iα}/ħ).
pub fn laplace_samples(phi: &[C64], h: f64, alpha: f64, fit: BoundFit, hbar: C64) -> Result<ResummedValue> {
    let rate = sector_rate(alpha, hbar)?;
    if rate <= fit.k_exp {
        return Err(Error::Input(format!(
            "ħ = {hbar} outside the sector: Re(e^(iα)/ħ) = {rate:.4} must exceed the fitted exponent K = {:.4}",
            fit.k_exp
        )));
    }
    let dir = C64::from_polar(1.0, alpha);
    let lambda = dir / hbar;
    let value = product_integrate(phi, h, lambda) * dir;
    let tau = h * (phi.len() - 1) as f64;
    let tail_bound = fit.c * ((fit.k_exp - rate) * tau).exp() / (rate - fit.k_exp);
    Ok(ResummedValue { hbar, value, alpha, lateral: Side::None, tail_bound })
}

pub fn laplace_ray(grid: &BorelGrid, hbar: C64) -> Result<ResummedValue> {
    laplace_samples(&grid.phi_total, grid.h(), grid.alpha, grid.bound_fit, hbar)
}

#[derive(Clone, Copy, Debug)]
pub struct ResumOptions {
    pub k: usize,
    pub m: usize,
    /// ray length; None picks 25 max|ħ|
    pub tau: Option<f64>,
    /// Gauss-Legendre nodes per path segment
    pub nodes: usize,
    /// wedge half-angle of the lateral rays
    pub delta: f64,
}

impl Default for ResumOptions {
    fn default() -> Self {
        ResumOptions { k: DEFAULT_K, m: DEFAULT_M, tau: None, nodes: 12, delta: 0.3 }
    }
}

impl ResumOptions {
    fn tau_for(&self, hbars: &[C64]) -> f64 {
        self.tau.unwrap_or_else(|| 25.0 * hbars.iter().map(|h| h.norm()).fold(0.0, f64::max))
    }

    fn continue_opts(&self) -> ContinueOptions {
        ContinueOptions { k: self.k, m: self.m, ..Default::default() }
    }
}

/// Errors when a trajectory of phase α from sp reaches a transition point
/// within Z-length τ (the ray is a Stokes ray there).
fn ensure_regular(p: &Potential, sp: &SpectralPoint, alpha: f64, tau: f64) -> Result<()> {
    let t = trace(p, sp, alpha, tau * 1.05)?;
    if let Some((pt, z)) = t.hit() {
        return Err(Error::Input(format!(
            "phase {alpha:.6} is a Stokes phase at x = {} (singularity at {z} towards {pt}); use lateral resummation",
            sp.x
        )));
    }
    Ok(())
}

/// Resummed f̂ at sp along the ray of phase α.
pub fn resum_f(p: &Potential, sp: &SpectralPoint, alpha: f64, hbars: &[C64], opt: &ResumOptions) -> Result<Vec<ResummedValue>> {
    let tau = opt.tau_for(hbars);
    ensure_regular(p, sp, alpha, tau)?;
    let grid = continue_ray(p, sp, alpha, tau, &opt.continue_opts())?;
    hbars.iter().map(|h| laplace_ray(&grid, *h)).collect()
}

/// ψ at the end of a path together with ψ' and the log of the amplitude
/// ψ/(a₀e^{−S/ħ}); normalised by ψ(x₀) = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResummedSolution {
    pub x: C64,
    pub psi: ResummedValue,
    pub dpsi: C64,
    pub log_psi: C64,
    /// S = ∫ y₀ dx
    #[serde(rename = "S")]
    pub s: C64,
    /// log a₀ = −¼ log(Q₀(x)/Q₀(x₀)) along the path
    pub log_a0: C64,
    pub log_amplitude: C64,
}

/// Resums ψ along the polyline start → xs[0] → ... with one fresh ray of
/// phase α per quadrature node. ψ = a₀e^{−S/ħ}exp(−∫(Λ₀ + 2y₀f_α)dx).
pub fn resum_wkb(
    p: &Potential,
    start: &SpectralPoint,
    xs: &[C64],
    alpha: f64,
    hbars: &[C64],
    opt: &ResumOptions,
) -> Result<Vec<ResummedSolution>> {
    let y_start = liouville(p, start)?;
    let tau = opt.tau_for(hbars);
    let copt = opt.continue_opts();
    let nh = hbars.len();
    let mut log_psi = vec![ZERO; nh];
    let mut tails = vec![0.0f64; nh];
    let (mut s_acc, mut l0_acc, mut la0_acc) = (ZERO, ZERO, ZERO);
    let (gt, gw) = gauss_legendre_on(opt.nodes, 0.0, 1.0);
    let mut xa = start.x;
    let mut y = y_start;
    // (x, y₀, dx·weight) for every node, y₀ continued sequentially
    let mut nodes: Vec<(C64, C64, C64)> = Vec::new();
    for &xb in xs {
        let dx = xb - xa;
        for (t, w) in gt.iter().zip(&gw) {
            let x = xa + dx * *t;
            y = continue_y0(p, x, y);
            nodes.push((x, y, dx * *w));
        }
        y = continue_y0(p, xb, y);
        xa = xb;
    }
    let per_node: Vec<(C64, C64, Vec<ResummedValue>)> = nodes
        .par_iter()
        .map(|&(x, y, _)| {
            let sp = SpectralPoint::from_y0(p, x, y);
            ensure_regular(p, &sp, alpha, tau)?;
            let grid = continue_ray(p, &sp, alpha, tau, &copt)?;
            let ys = y_jets_at(p, x, y, 1, 0);
            let dlog = p.q0_prime(x) / p.q0(x);
            let fs = hbars.iter().map(|h| laplace_ray(&grid, *h)).collect::<Result<Vec<_>>>()?;
            Ok((ys[1].value(), dlog, fs))
        })
        .collect::<Result<_>>()?;
    for (&(_, y, wdx), (y1, dlog, fs)) in nodes.iter().zip(&per_node) {
        s_acc += y * wdx;
        l0_acc += (*y1 - dlog * 0.25) * wdx;
        la0_acc += -dlog * 0.25 * wdx;
        for (i, f) in fs.iter().enumerate() {
            log_psi[i] -= y * 2.0 * f.value * wdx;
            tails[i] += (y * 2.0 * wdx).norm() * f.tail_bound;
        }
    }
    let x_end = xa;
    let sp_end = SpectralPoint::from_y0(p, x_end, y);
    ensure_regular(p, &sp_end, alpha, tau)?;
    let grid_end = continue_ray(p, &sp_end, alpha, tau, &copt)?;
    let ys_end = y_jets_at(p, x_end, y, 1, 0);
    let mut out = Vec::with_capacity(nh);
    for (i, h) in hbars.iter().enumerate() {
        // amplitude excludes a₀: exp(−∫(Λ₀ + 2y₀f)) with Λ₀ = y₁ − ¼ dlog Q₀
        let log_amplitude = -l0_acc + log_psi[i];
        let lp = -s_acc / *h + la0_acc + log_amplitude;
        let psi = lp.exp();
        let f_end = laplace_ray(&grid_end, *h)?;
        let big_y = y + ys_end[1].value() * *h + y * 2.0 * *h * f_end.value;
        out.push(ResummedSolution {
            x: x_end,
            psi: ResummedValue { hbar: *h, value: psi, alpha: wrap_angle(alpha), lateral: Side::None, tail_bound: tails[i] * psi.norm() },
            dpsi: -big_y * psi / *h,
            log_psi: lp,
            s: s_acc,
            log_a0: la0_acc,
            log_amplitude,
        });
    }
    Ok(out)
}

/// Half-angle of the lateral wedge: δ halved until no other predicted
/// singularity of modulus ≤ τ lies strictly inside the wedge around α.
fn wedge_delta(p: &Potential, sp: &SpectralPoint, alpha: f64, tau: f64, delta: f64) -> Result<(f64, Vec<C64>)> {
    let preds = predict_singularities(p, sp, tau)?;
    let mut on_ray = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    for r in &preds {
        let xi = r.central_charge;
        let d = angle_diff(xi.arg(), alpha).abs();
        if d < 1e-6 {
            on_ray.push(xi);
        } else if r.status != RecordStatus::Unresolved {
            off.push(d);
        }
    }
    let mut dl = delta;
    while off.iter().any(|d| *d <= dl) && dl > 1e-3 {
        dl *= 0.5;
    }
    Ok((dl, on_ray))
}

/// Lateral resummation of f̂ at sp: the Laplace integral along the ray
/// rotated by ±δ (L = counter-clockwise side), which equals the diverted
/// contour by Cauchy's theorem.
pub fn lateral_resum(
    p: &Potential,
    sp: &SpectralPoint,
    alpha: f64,
    side: Side,
    hbars: &[C64],
    opt: &ResumOptions,
) -> Result<Vec<ResummedValue>> {
    let tau = opt.tau_for(hbars);
    let (dl, on_ray) = wedge_delta(p, sp, alpha, tau, opt.delta)?;
    let rot = match side {
        _ if on_ray.is_empty() => 0.0,
        Side::L => dl,
        Side::R => -dl,
        Side::None => return Err(Error::Input("lateral resummation needs side L or R".into())),
    };
    let grid = continue_ray(p, sp, alpha + rot, tau, &opt.continue_opts())?;
    hbars
        .iter()
        .map(|h| {
            // ħ on the Stokes ray maps to the rotated ray with the same weight
            let mut v = laplace_ray(&grid, *h)?;
            v.alpha = wrap_angle(alpha);
            v.lateral = side;
            Ok(v)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub alpha: f64,
    /// |ħ| samples; ħ = |ħ|e^{iα}
    pub hbar: Vec<f64>,
    /// f^L − f^R at each ħ
    pub jump: Vec<C64>,
    /// bound on the numerical error of each jump value
    pub jump_error: Vec<f64>,
    /// a in log|Δ| ≈ −a/|ħ| + b log|ħ| + c
    pub fitted_exponent: Option<f64>,
    pub fitted_power: Option<f64>,
    pub predicted_abs_xi: Option<f64>,
}

/// Jump f^L − f^R at the Stokes phase α. The difference of the two lateral
/// contours is deformed to an arc of radius ρ₀ < |ξ| plus the two rotated
/// rays beyond it, and e^{−ρ₀/|ħ|} is factored out so no cancellation
/// happens at the scale of f itself.
pub fn jump_fit(p: &Potential, sp: &SpectralPoint, alpha: f64, hbars: &[f64], opt: &ResumOptions) -> Result<JumpReport> {
    if hbars.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::Input("jump fit needs positive |ħ| samples".into()));
    }
    let hmax = hbars.iter().copied().fold(0.0, f64::max);
    let preds = predict_singularities(p, sp, opt.tau.unwrap_or(1e3))?;
    let xi = preds
        .iter()
        .filter(|r| r.status == RecordStatus::Visible && angle_diff(r.central_charge.arg(), alpha).abs() < 1e-4)
        .map(|r| r.central_charge.norm())
        .fold(f64::INFINITY, f64::min);
    let alpha = wrap_angle(alpha);
    if !xi.is_finite() {
        // no singularity on the ray: both lateral contours coincide
        return Ok(JumpReport {
            alpha,
            hbar: hbars.to_vec(),
            jump: vec![ZERO; hbars.len()],
            jump_error: vec![0.0; hbars.len()],
            fitted_exponent: None,
            fitted_power: None,
            predicted_abs_xi: None,
        });
    }
    let (dl, _) = wedge_delta(p, sp, alpha, xi + 10.0 * hmax, opt.delta)?;
    let tau = (xi + 10.0 * hmax) / dl.cos();
    let copt = opt.continue_opts();
    let (gl, gr) = rayon::join(
        || continue_ray(p, sp, alpha + dl, tau, &copt),
        || continue_ray(p, sp, alpha - dl, tau, &copt),
    );
    let (gl, gr) = (gl?, gr?);
    let h = gl.h();
    let arc_opt = ContinueOptions { k: opt.k, m: (opt.m / 4).max(8 * opt.k), self_check: false, ..Default::default() };
    let (at, aw) = gauss_legendre_on(24, -dl, dl);
    let mut jumps = Vec::new();
    let mut errs = Vec::new();
    for &hb in hbars {
        let rho_target = xi - (6.0 * hb).max(0.05 * xi);
        let j0 = (rho_target / h).floor() as usize;
        let rho0 = h * j0 as f64;
        // arc ccw from α−δ to α+δ; t = ρ₀e^{i(α+θ)}, weight e^{−(t−ρ₀e^{iα})/ħ}
        let arc: Vec<C64> = at
            .par_iter()
            .zip(aw.par_iter())
            .map(|(th, w)| {
                let g = continue_ray(p, sp, alpha + th, rho0, &arc_opt)?;
                let phi = g.phi_total[g.m()];
                let e = C64::from_polar(1.0, *th);
                let weight = (-(e - ONE) * rho0 / hb).exp();
                Ok(phi * weight * C64::new(0.0, rho0) * C64::from_polar(1.0, alpha) * e * *w)
            })
            .collect::<Result<_>>()?;
        let mut acc: C64 = arc.iter().sum();
        let mut err = 0.0;
        for (g, sign) in [(&gl, 1.0), (&gr, -1.0)] {
            let rot = C64::from_polar(1.0, g.alpha - alpha);
            let lambda = rot / hb;
            let part = product_integrate(&g.phi_total[j0..], h, lambda) * C64::from_polar(1.0, g.alpha);
            acc += part * ((ONE - rot) * rho0 / hb).exp() * sign;
            let rate = lambda.re;
            if rate > g.bound_fit.k_exp {
                err += g.bound_fit.c * ((g.bound_fit.k_exp - rate) * tau + rho0 / hb).exp() / (rate - g.bound_fit.k_exp);
            } else {
                err = f64::INFINITY;
            }
        }
        let scale = (-rho0 / hb).exp();
        jumps.push(acc * scale);
        errs.push(err * scale + 1e-7 * acc.norm() * scale);
    }
    let pts: Vec<(f64, f64)> = hbars
        .iter()
        .zip(&jumps)
        .zip(&errs)
        .filter(|((_, j), e)| j.norm() > 10.0 * **e && j.norm() > 0.0)
        .map(|((h, j), _)| (*h, j.norm().ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Numerical(format!(
            "only {} jump samples above their error bound; need at least 4",
            pts.len()
        )));
    }
    let (a, b) = fit_exponent(&pts);
    Ok(JumpReport {
        alpha,
        hbar: hbars.to_vec(),
        jump: jumps,
        jump_error: errs,
        fitted_exponent: Some(a),
        fitted_power: Some(b),
        predicted_abs_xi: Some(xi),
    })
}

/// Least squares for log|Δ| = −a/h + b log h + c; returns (a, b).
pub fn fit_exponent(pts: &[(f64, f64)]) -> (f64, f64) {
    let a = nalgebra::DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => -1.0 / pts[i].0,
        1 => pts[i].0.ln(),
        _ => 1.0,
    });
    let b = nalgebra::DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd solve");
    (sol[0], sol[1])
}

/// Q(x, ħ) = Σ Q_k(x)ħ^k.
pub fn q_full(p: &Potential, x: C64, hbar: C64) -> C64 {
    let mut acc = ZERO;
    let mut hk = ONE;
    for k in 0..=p.hbar_degree() {
        acc += p.qk(k).map_or(ZERO, |q| q.eval(x)) * hk;
        hk *= hbar;
    }
    acc
}

/// Integrates ħ²Ψ'' = QΨ along the straight segment x_anchor → x_eval with
/// adaptive Dormand-Prince at relative tolerance 1e−12. Returns (Ψ, Ψ').
pub fn ode_oracle(p: &Potential, x_anchor: C64, x_eval: C64, hbar: C64, init: (C64, C64)) -> Result<(C64, C64)> {
    for (z, _) in p.poles() {
        let d = x_eval - x_anchor;
        let t = (((z - x_anchor) * d.conj()).re / d.norm_sqr().max(1e-300)).clamp(0.0, 1.0);
        if (x_anchor + d * t - z).norm() < 1e-8 {
            return Err(Error::Critical(format!("integration segment passes through the pole {z}")));
        }
    }
    let d = x_eval - x_anchor;
    let h2 = hbar * hbar;
    let f = |s: f64, y: &[C64]| {
        let x = x_anchor + d * s;
        vec![y[1] * d, q_full(p, x, hbar) * y[0] / h2 * d]
    };
    let tol = Tolerances { rtol: 1e-12, atol: 1e-300, h_min: 1e-14, h_max: f64::INFINITY };
    let out = integrate(&f, 0.0, 1.0, &[init.0, init.1], &tol)?;
    let last = &out.last().unwrap().1;
    Ok((last[0], last[1]))
}

/// One-sided limits of φ at T = ρe^{iα}: values at ρe^{i(α±δ_j)} along
/// straight rays, extrapolated to δ = 0 by Neville's scheme. Equal limits
/// mean the two approach paths are homotopic in the Borel plane.
pub fn one_sided_limits(
    p: &Potential,
    sp: &SpectralPoint,
    alpha: f64,
    rho: f64,
    deltas: &[f64],
    opt: &ContinueOptions,
) -> Result<(C64, C64)> {
    let mut sides = [ZERO; 2];
    for (s, sign) in [1.0, -1.0].iter().enumerate() {
        let vals: Vec<C64> = deltas
            .par_iter()
            .map(|d| continue_ray(p, sp, alpha + sign * d, rho, opt).map(|g| g.phi_total[g.m()]))
            .collect::<Result<_>>()?;
        sides[s] = neville_at_zero(deltas, &vals);
    }
    Ok((sides[0], sides[1]))
}

pub fn neville_at_zero(xs: &[f64], ys: &[C64]) -> C64 {
    let n = xs.len();
    let mut p = ys.to_vec();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i] * xs[i + k] - p[i + 1] * xs[i]) / (xs[i + k] - xs[i]);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_agree_across_branches() {
        for z in [C64::new(0.49, 0.1), C64::new(0.51, -0.1)] {
            let a = moments(z, 2.0);
            let e = (-z * 2.0).exp();
            let exact0 = (ONE - e) / z;
            assert!((a[0] - exact0).norm() < 1e-13);
        }
    }

    #[test]
    fn laplace_of_constant_and_linear() {
        let fit = BoundFit { c: 1.0, k_exp: 0.0 };
        let h = 20.0 / 400.0;
        let one = vec![ONE; 401];
        let v = laplace_samples(&one, h, 0.0, fit, C64::new(0.1, 0.0)).unwrap();
        assert!((v.value - C64::new(0.1, 0.0)).norm() < 1e-12);
        assert!(v.tail_bound < 1e-8);
        let lin: Vec<C64> = (0..=400).map(|j| C64::new(h * j as f64, 0.0)).collect();
        let fit = BoundFit { c: 20.0, k_exp: 0.0 };
        let v = laplace_samples(&lin, h, 0.0, fit, C64::new(0.05, 0.0)).unwrap();
        assert!((v.value - C64::new(0.0025, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn odd_panel_count() {
        let h = 0.01;
        let phi: Vec<C64> = (0..=401).map(|j| C64::new(h * j as f64, 0.0)).collect();
        let v = product_integrate(&phi, h, C64::new(3.0, 1.0));
        let l = C64::new(3.0, 1.0);
        let r = h * 401.0;
        let exact = (ONE - (-l * r).exp() * (ONE + l * r)) / (l * l);
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn sector_violation_names_inequality() {
        let fit = BoundFit { c: 1.0, k_exp: 2.0 };
        let e = laplace_samples(&[ONE; 9], 0.1, 0.0, fit, C64::new(1.0, 0.0)).unwrap_err();
        assert!(e.to_string().contains("Re(e^(iα)/ħ)"));
    }

    #[test]
    fn ode_exponential() {
        let p = Potential::constant_one();
        // forward integration of the recessive mode loses e^{2x/ħ}·ε, so ħ is kept moderate
        let hb = C64::new(0.5, 0.0);
        let (v, _) = ode_oracle(&p, C64::new(0.0, 0.0), C64::new(1.0, 0.0), hb, (ONE, -ONE / hb)).unwrap();
        let exact = (-2.0f64).exp();
        assert!((v / exact - ONE).norm() < 1e-9);
    }

    #[test]
    fn ode_reversible_and_wronskian() {
        let p = Potential::airy();
        let hb = C64::new(0.3, 0.0);
        let (a, b) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let there = ode_oracle(&p, a, b, hb, (ONE, ONE)).unwrap();
        let back = ode_oracle(&p, b, a, hb, there).unwrap();
        assert!((back.0 - ONE).norm() < 1e-8 && (back.1 - ONE).norm() < 1e-8);
        let u = ode_oracle(&p, a, b, hb, (ONE, ZERO)).unwrap();
        let v = ode_oracle(&p, a, b, hb, (ZERO, ONE)).unwrap();
        let wr = u.0 * v.1 - u.1 * v.0;
        assert!((wr - ONE).norm() < 1e-8);
    }

    #[test]
    fn neville_recovers_cubic() {
        let xs = [0.1, 0.2, 0.3, 0.4];
        let ys: Vec<C64> = xs.iter().map(|x| C64::new(1.0 + x - 2.0 * x * x * x, 0.0)).collect();
        assert!((neville_at_zero(&xs, &ys) - ONE).norm() < 1e-13);
    }
}
