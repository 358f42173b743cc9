//! The spectral double cover Σ = {y² = Q₀(x)}: sheet-tracked points and
//! paths, the Liouville form λ = y₀ dx, σ = 2λ, central charges and the flow
//! of V = (1/2y₀) ∂x.

use crate::error::{Error, Result};
use crate::ode::{dopri_step, step_factor, Tolerances};
use crate::potential::{CriticalPoint, Kind, Potential};
use crate::quad::gauss_legendre_on;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const BRANCH_TOL: f64 = 1e-9;
/// Default exclusion radius around transition points, in |Z|-distance.
pub const EXCLUSION_RADIUS: f64 = 1e-3;
/// Beyond this modulus flows are integrated in the chart u = 1/x.
pub const INFINITY_CHART: f64 = 1e6;

/// A point of Σ: y₀ = sheet · principal √Q₀(x).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub x: C64,
    pub sheet: i8,
}

impl SpectralPoint {
    pub fn new(x: C64, sheet: i8) -> Self {
        SpectralPoint { x, sheet: if sheet < 0 { -1 } else { 1 } }
    }

    /// The involution ι swapping the sheets.
    pub fn flip(&self) -> Self {
        SpectralPoint { x: self.x, sheet: -self.sheet }
    }

    /// Sheet label of an explicit value of y₀ at x.
    pub fn from_y0(p: &Potential, x: C64, y0: C64) -> Self {
        let r = p.q0(x).sqrt();
        let sheet = if (y0 - r).norm() <= (y0 + r).norm() { 1 } else { -1 };
        SpectralPoint { x, sheet }
    }

    pub fn y0(&self, p: &Potential) -> C64 {
        p.q0(self.x).sqrt() * self.sheet as f64
    }
}

/// Nearest of the two roots ±√Q₀(x) to a reference value.
pub fn continue_y0(p: &Potential, x: C64, reference: C64) -> C64 {
    let r = p.q0(x).sqrt();
    if (r - reference).norm() <= (r + reference).norm() {
        r
    } else {
        -r
    }
}

fn distance_to_branch(p: &Potential, x: C64) -> f64 {
    p.branch_points()
        .iter()
        .chain(p.poles().iter().map(|q| &q.0))
        .map(|b| (b - x).norm())
        .fold(f64::INFINITY, f64::min)
}

/// y₀ at a spectral point; λ = y₀ dx and σ = 2 y₀ dx.
pub fn liouville(p: &Potential, sp: &SpectralPoint) -> Result<C64> {
    let d = distance_to_branch(p, sp.x);
    if d <= BRANCH_TOL {
        return Err(Error::Critical(format!(
            "x = {} is within {:.1e} of a branch point or pole",
            sp.x, BRANCH_TOL
        )));
    }
    Ok(sp.y0(p))
}

/// ∫ 2 y₀ dx along the chord a → b with y₀ continued from `ya`.
/// Returns the increment and y₀ at b.
pub fn chord_z(p: &Potential, xa: C64, ya: C64, xb: C64, nodes: usize) -> (C64, C64) {
    let (t, w) = gauss_legendre_on(nodes, 0.0, 1.0);
    let d = xb - xa;
    let mut acc = C64::new(0.0, 0.0);
    let mut y = ya;
    for (ti, wi) in t.iter().zip(&w) {
        y = continue_y0(p, xa + d * *ti, y);
        acc += y * 2.0 * *wi;
    }
    let yb = continue_y0(p, xb, y);
    (acc * d, yb)
}

/// Z-distance machinery: ∫_x^z σ along the straight segment from x to a
/// transition point z, via the substitution x' = z + (x - z) u².
pub fn z_remainder(p: &Potential, x: C64, y0: C64, z: C64, kind: Kind, order: usize) -> C64 {
    let e: i32 = match kind {
        Kind::Zero => order as i32,
        Kind::Pole => -(order as i32),
    };
    let d = x - z;
    let (u, w) = gauss_legendre_on(24, 0.0, 1.0);
    // walk from u = 1 towards 0 continuing h(u) = y0(x'(u)) u^{-e}
    let mut h = y0;
    let mut acc = C64::new(0.0, 0.0);
    for i in (0..u.len()).rev() {
        let ui = u[i];
        let cand = p.q0(z + d * ui * ui).sqrt() * ui.powi(-e);
        h = if (cand - h).norm() <= (cand + h).norm() { cand } else { -cand };
        // integrand 4 d u y0 = 4 d u^{1+e} h
        acc += h * ui.powi(1 + e) * 4.0 * w[i];
    }
    -(acc * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosestApproach {
    pub point: C64,
    pub z_distance: f64,
}

/// Closest transition point in Z-distance, only evaluated for points that are
/// near in x (within `x_window` times the local scale).
pub fn nearest_transition(p: &Potential, x: C64, y0: C64) -> Option<(C64, C64)> {
    let mut best: Option<(C64, C64)> = None;
    for (z, kind, m) in p.transition_data() {
        let rem = z_remainder(p, x, y0, z, kind, m);
        if best.map_or(true, |b| rem.norm() < b.1.norm()) {
            best = Some((z, rem));
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaPath {
    pub samples: Vec<SpectralPoint>,
    /// Flow parameter (or arc length) per sample.
    pub s: Vec<f64>,
    pub cumulative_z: Vec<C64>,
    pub phase_profile: Vec<f64>,
    /// y₀ carried along the path.
    pub y0: Vec<C64>,
}

impl SigmaPath {
    pub(crate) fn from_samples(p: &Potential, xs: Vec<C64>, y0: Vec<C64>, s: Vec<f64>, nodes: usize) -> SigmaPath {
        let mut cz = vec![C64::new(0.0, 0.0)];
        for i in 1..xs.len() {
            let (dz, _) = chord_z(p, xs[i - 1], y0[i - 1], xs[i], nodes);
            cz.push(cz[i - 1] + dz);
        }
        let samples = xs
            .iter()
            .zip(&y0)
            .map(|(x, y)| SpectralPoint::from_y0(p, *x, *y))
            .collect();
        let mut path = SigmaPath { samples, s, cumulative_z: cz, phase_profile: vec![], y0 };
        path.phase_profile = path.compute_phase_profile();
        path
    }

    fn compute_phase_profile(&self) -> Vec<f64> {
        let n = self.cumulative_z.len();
        if n < 2 {
            return vec![0.0; n];
        }
        let mut ph: Vec<f64> = (1..n)
            .map(|i| (self.cumulative_z[i] - self.cumulative_z[i - 1]).arg())
            .collect();
        ph.insert(0, ph[0]);
        ph
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> SpectralPoint {
        self.samples[0]
    }

    pub fn end(&self) -> SpectralPoint {
        *self.samples.last().unwrap()
    }

    pub fn total_z(&self) -> C64 {
        *self.cumulative_z.last().unwrap()
    }

    pub fn xs(&self) -> Vec<C64> {
        self.samples.iter().map(|s| s.x).collect()
    }

    /// Pointwise sheet flip; Z changes sign.
    pub fn flip(&self) -> SigmaPath {
        SigmaPath {
            samples: self.samples.iter().map(|s| s.flip()).collect(),
            s: self.s.clone(),
            cumulative_z: self.cumulative_z.iter().map(|z| -z).collect(),
            phase_profile: self
                .phase_profile
                .iter()
                .map(|a| wrap_angle(a + std::f64::consts::PI))
                .collect(),
            y0: self.y0.iter().map(|y| -y).collect(),
        }
    }

    /// Path followed by `other`; the central charges add.
    pub fn concat(&self, other: &SigmaPath) -> Result<SigmaPath> {
        let a = self.end();
        let b = other.start();
        let scale = 1.0 + a.x.norm();
        let ya = *self.y0.last().unwrap();
        let yb = other.y0[0];
        if (a.x - b.x).norm() > 1e-12 * scale || (ya - yb).norm() > 1e-8 * (1.0 + ya.norm()) {
            return Err(Error::Input("paths do not join on the same sheet".into()));
        }
        let shift = self.total_z();
        let s_shift = *self.s.last().unwrap() - other.s[0];
        let mut out = self.clone();
        for i in 1..other.len() {
            out.samples.push(other.samples[i]);
            out.s.push(other.s[i] + s_shift);
            out.cumulative_z.push(other.cumulative_z[i] + shift);
            out.y0.push(other.y0[i]);
        }
        out.phase_profile = out.compute_phase_profile();
        Ok(out)
    }

    /// CSV rows (s, re x, im x, sheet, re Z, im Z).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,re_x,im_x,sheet,re_Z,im_Z\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e}\n",
                self.s[i],
                self.samples[i].x.re,
                self.samples[i].x.im,
                self.samples[i].sheet,
                self.cumulative_z[i].re,
                self.cumulative_z[i].im
            ));
        }
        out
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r >= t {
        0.0
    } else {
        r
    }
}

/// Signed angular difference a - b in (-π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    if d > std::f64::consts::PI {
        d - std::f64::consts::TAU
    } else {
        d
    }
}

/// Polyline through `xs`, each edge split into `sub` pieces, y₀ continued
/// from the start point.
pub fn polyline_path(p: &Potential, start: &SpectralPoint, xs: &[C64], sub: usize) -> Result<SigmaPath> {
    let mut pts = vec![start.x];
    for w in std::iter::once(start.x).chain(xs.iter().copied()).collect::<Vec<_>>().windows(2) {
        for j in 1..=sub {
            pts.push(w[0] + (w[1] - w[0]) * (j as f64 / sub as f64));
        }
    }
    let mut y = vec![liouville(p, start)?];
    let mut s = vec![0.0];
    for i in 1..pts.len() {
        if distance_to_branch(p, pts[i]) <= BRANCH_TOL {
            return Err(Error::Critical(format!("path passes through a branch point near {}", pts[i])));
        }
        // continue through the chord's interior so that the sheet is not lost
        let (_, yb) = chord_z(p, pts[i - 1], y[i - 1], pts[i], 8);
        y.push(yb);
        s.push(s[i - 1] + (pts[i] - pts[i - 1]).norm());
    }
    Ok(SigmaPath::from_samples(p, pts, y, s, 16))
}

/// Straight segment start.x → x_end.
pub fn segment_path(p: &Potential, start: &SpectralPoint, x_end: C64, n: usize) -> Result<SigmaPath> {
    polyline_path(p, start, &[x_end], n.max(1))
}

/// Z(γ) = ∫_γ σ, recomputed with a finer rule than the stored increments.
pub fn central_charge(p: &Potential, path: &SigmaPath) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for i in 1..path.len() {
        let xa = path.samples[i - 1].x;
        if distance_to_branch(p, xa) <= BRANCH_TOL {
            return Err(Error::Critical(format!("path touches a branch point near {xa}")));
        }
        let (dz, _) = chord_z(p, xa, path.y0[i - 1], path.samples[i].x, 24);
        acc += dz;
    }
    Ok(acc)
}

/// Right-hand side of the V-flow with unit speed in Z along e^{iθ}:
/// state (x, y₀) in the x chart, (u = 1/x, y₀) in the u chart.
fn flow_rhs(p: &Potential, dir: C64, chart_u: bool, y: &[C64]) -> Vec<C64> {
    let (x, y0) = if chart_u { (C64::new(1.0, 0.0) / y[0], y[1]) } else { (y[0], y[1]) };
    let xdot = dir / (y0 * 2.0);
    let ydot = p.q0_prime(x) * xdot / (y0 * 2.0);
    if chart_u {
        vec![-y[0] * y[0] * xdot, ydot]
    } else {
        vec![xdot, ydot]
    }
}

/// State of an in-progress V-flow.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub s: f64,
    pub x: C64,
    pub y0: C64,
    pub h: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    pub rtol: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { rtol: 1e-12, h_min: 1e-12, h_max: f64::INFINITY }
    }
}

/// Takes one accepted adaptive step of the flow with direction e^{iθ}, not
/// overshooting `s_stop`. Returns Err on step collapse.
pub fn flow_step(p: &Potential, dir: C64, st: &mut FlowState, s_stop: f64, opt: &FlowOptions) -> Result<()> {
    loop {
        let chart_u = st.x.norm() > INFINITY_CHART;
        let z = if chart_u { C64::new(1.0, 0.0) / st.x } else { st.x };
        let state = [z, st.y0];
        let remaining = s_stop - st.s;
        let h = st.h.min(remaining).min(opt.h_max);
        let tol = Tolerances { rtol: opt.rtol, atol: opt.rtol * 1e-3, h_min: opt.h_min, h_max: opt.h_max };
        let f = |_s: f64, y: &[C64]| flow_rhs(p, dir, chart_u, y);
        let (yn, err) = dopri_step(&f, st.s, &state, h, &tol);
        // scale-aware error in x: compare relative to |x| but also to the step
        if err <= 1.0 {
            let xn = if chart_u { C64::new(1.0, 0.0) / yn[0] } else { yn[0] };
            st.s = if h >= remaining { s_stop } else { st.s + h };
            st.y0 = continue_y0(p, xn, yn[1]);
            st.x = xn;
            st.h = h * step_factor(err);
            return Ok(());
        }
        st.h = h * step_factor(err);
        if st.h < opt.h_min {
            let (cp, d) = match nearest_transition(p, st.x, st.y0) {
                Some((z, rem)) => (z, rem.norm()),
                None => (st.x, f64::NAN),
            };
            return Err(Error::StepCollapse { s: st.s, closest_point: cp, closest_distance: d });
        }
    }
}

fn check_exclusion(p: &Potential, x: C64, y0: C64, radius: f64, s: f64) -> Result<()> {
    for (z, kind, m) in p.transition_data() {
        // cheap prefilter: Z-distance grows at least like |x - z| times a local scale
        if (x - z).norm() > 1.0 + 10.0 * radius.sqrt() {
            continue;
        }
        let rem = z_remainder(p, x, y0, z, kind, m);
        if rem.norm() < radius {
            return Err(Error::StepCollapse { s, closest_point: z, closest_distance: rem.norm() });
        }
    }
    for (q, _) in p.poles() {
        if (x - q).norm() < 1e-9 {
            return Err(Error::StepCollapse { s, closest_point: q, closest_distance: 0.0 });
        }
    }
    Ok(())
}

/// Flow of V for a complex charge t: dx/ds = e^{iθ}/(2y₀), s ∈ [0, |t|],
/// with at least `n_steps` samples.
pub fn flow_v(p: &Potential, sp: &SpectralPoint, t: C64, n_steps: usize) -> Result<SigmaPath> {
    flow_v_with(p, sp, t, n_steps, EXCLUSION_RADIUS)
}

pub fn flow_v_with(p: &Potential, sp: &SpectralPoint, t: C64, n_steps: usize, exclusion: f64) -> Result<SigmaPath> {
    let y0 = liouville(p, sp)?;
    let len = t.norm();
    let dir = if len > 0.0 { t / len } else { C64::new(1.0, 0.0) };
    let mut xs = vec![sp.x];
    let mut ys = vec![y0];
    let mut ss = vec![0.0];
    if len == 0.0 {
        return Ok(SigmaPath::from_samples(p, xs, ys, ss, 16));
    }
    let opt = FlowOptions { h_max: len / n_steps.max(1) as f64, ..Default::default() };
    let mut st = FlowState { s: 0.0, x: sp.x, y0, h: opt.h_max };
    while st.s < len {
        flow_step(p, dir, &mut st, len, &opt)?;
        check_exclusion(p, st.x, st.y0, exclusion, st.s)?;
        xs.push(st.x);
        ys.push(st.y0);
        ss.push(st.s);
    }
    Ok(SigmaPath::from_samples(p, xs, ys, ss, 16))
}

/// Geodesic ray with samples exactly at Z = j τ/M e^{iα}, j = 0..M.
pub fn geodesic_ray(p: &Potential, sp: &SpectralPoint, alpha: f64, tau: f64, m: usize, exclusion: f64) -> Result<SigmaPath> {
    let y0 = liouville(p, sp)?;
    let dir = C64::from_polar(1.0, alpha);
    let h = tau / m as f64;
    let mut xs = vec![sp.x];
    let mut ys = vec![y0];
    let mut ss = vec![0.0];
    let opt = FlowOptions { rtol: 1e-13, h_max: h, ..Default::default() };
    let mut st = FlowState { s: 0.0, x: sp.x, y0, h };
    for j in 1..=m {
        let target = h * j as f64;
        while st.s < target {
            flow_step(p, dir, &mut st, target, &opt)?;
        }
        st.s = target;
        check_exclusion(p, st.x, st.y0, exclusion, st.s)?;
        xs.push(st.x);
        ys.push(st.y0);
        ss.push(target);
    }
    Ok(SigmaPath::from_samples(p, xs, ys, ss, 16))
}

/// Sheet flag after transporting y₀ once around a circle about `centre`.
pub fn monodromy_sheet(p: &Potential, sp: &SpectralPoint, centre: C64, n: usize) -> Result<i8> {
    let r = sp.x - centre;
    let pts: Vec<C64> = (1..=n)
        .map(|k| centre + r * C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    let path = polyline_path(p, sp, &pts, 4)?;
    Ok(path.end().sheet)
}

/// A critical path from a base point to a transition point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalPathRecord {
    pub path: SigmaPath,
    pub terminal: CriticalPoint,
    pub central_charge: C64,
    pub is_trajectory: bool,
    pub status: RecordStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Visible,
    Chained,
    Unresolved,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn liouville_trivial_cases() {
        let one = Potential::constant_one();
        assert_eq!(liouville(&one, &SpectralPoint::new(c(3.0, -2.0), 1)).unwrap(), c(1.0, 0.0));
        let airy = Potential::airy();
        assert_eq!(liouville(&airy, &SpectralPoint::new(c(1.0, 0.0), 1)).unwrap(), c(1.0, 0.0));
        assert!(liouville(&airy, &SpectralPoint::new(c(0.0, 0.0), 1)).is_err());
    }

    #[test]
    fn constant_segment_charge() {
        let one = Potential::constant_one();
        let path = segment_path(&one, &SpectralPoint::new(c(0.0, 0.0), 1), c(1.0, 0.0), 10).unwrap();
        assert!((central_charge(&one, &path).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn airy_charge_to_turning_point() {
        let airy = Potential::airy();
        // (4/3) x^{3/2} antiderivative; the endpoint approaches the zero
        for eps in [1e-4, 1e-6, 1e-8] {
            let path = segment_path(&airy, &SpectralPoint::new(c(1.0, 0.0), 1), c(eps, 0.0), 2000).unwrap();
            let z = central_charge(&airy, &path).unwrap();
            let exact = -4.0 / 3.0 * (1.0 - eps.powf(1.5));
            assert!((z - c(exact, 0.0)).norm() < 1e-8, "{eps} {}", (z - c(exact, 0.0)).norm());
            if eps <= 1e-6 {
                assert!((z - c(-4.0 / 3.0, 0.0)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn remainder_to_turning_point() {
        let airy = Potential::airy();
        let rem = z_remainder(&airy, c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), Kind::Zero, 1);
        assert!((rem - c(-4.0 / 3.0, 0.0)).norm() < 1e-13);
        let x = c(-0.5, 0.7);
        let y = x.sqrt();
        let rem = z_remainder(&airy, x, y, c(0.0, 0.0), Kind::Zero, 1);
        assert!((rem + x.powf(1.5) * (4.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn flow_closed_form() {
        let airy = Potential::airy();
        let t = 4.0 / 3.0 * (2f64.powf(1.5) - 1.0);
        let path = flow_v(&airy, &SpectralPoint::new(c(1.0, 0.0), 1), c(t, 0.0), 50).unwrap();
        assert!((path.end().x - c(2.0, 0.0)).norm() < 1e-6);
        assert!((path.total_z() - c(t, 0.0)).norm() < 1e-8 * (1.0 + t));
    }

    #[test]
    fn constant_flow_moves_linearly() {
        let one = Potential::constant_one();
        let path = flow_v(&one, &SpectralPoint::new(c(0.5, 0.5), 1), c(1.0, 1.0), 8).unwrap();
        assert!((path.end().x - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn monodromy_flags() {
        let airy = Potential::airy();
        let sp = SpectralPoint::new(c(0.5, 0.0), 1);
        assert_eq!(monodromy_sheet(&airy, &sp, c(0.0, 0.0), 64).unwrap(), -1);
        let dbl = Potential::new(vec![crate::poly::RationalFn::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap()]).unwrap();
        assert_eq!(monodromy_sheet(&dbl, &sp, c(0.0, 0.0), 64).unwrap(), 1);
    }
}
