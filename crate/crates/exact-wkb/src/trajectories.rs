//! Trajectories of φ₀: curves on Σ along which σ(γ̇) ∈ e^{iα}R₊. Tracing,
//! critical-phase search, saddles, Stokes graphs and stability.

use crate::error::{Error, Result};
use crate::potential::{is_simple_complete, Kind, Location, Potential};
use crate::spectral::{
    continue_y0, flow_step, liouville, wrap_angle, z_remainder, FlowOptions, FlowState, SigmaPath,
    SpectralPoint, INFINITY_CHART,
};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

pub const CAPTURE_RADIUS: f64 = 1e-4;
/// Large enough for a trajectory of the Airy potential to reach |x| = 1e6.
pub const DEFAULT_MAX_LEN: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Termination {
    HitsTransition { point: C64, z_distance: f64, z_hit: C64 },
    EntersPole { point: Location },
    MaxLength,
    NumericalStall { s: f64, closest_point: C64, closest_distance: f64 },
}

/// Closest approach of a trajectory to one transition point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approach {
    pub point: C64,
    /// ∫σ from the closest trajectory point to the transition point
    pub z_rem: C64,
    /// Im(e^{−iα} z_rem): which side the trajectory passes on
    pub signed_miss: f64,
    /// cumulative Z at the closest point
    pub z_at: C64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: SpectralPoint,
    pub phase: f64,
    pub path: SigmaPath,
    pub termination: Termination,
    pub approaches: Vec<Approach>,
}

impl Trajectory {
    pub fn hit(&self) -> Option<(C64, C64)> {
        match self.termination {
            Termination::HitsTransition { point, z_hit, .. } => Some((point, z_hit)),
            _ => None,
        }
    }

    /// Largest deviation of the local phase from α along the path.
    pub fn phase_deviation(&self) -> f64 {
        self.path
            .phase_profile
            .iter()
            .skip(1)
            .map(|a| crate::spectral::angle_diff(*a, self.phase).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    pub max_len: f64,
    pub capture: f64,
    pub rtol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { max_len: DEFAULT_MAX_LEN, capture: CAPTURE_RADIUS, rtol: 1e-10 }
    }
}

/// Maximal trajectory of phase α from sp.
pub fn trace(p: &Potential, sp: &SpectralPoint, alpha: f64, max_len: f64) -> Result<Trajectory> {
    trace_with(p, sp, alpha, &TraceOptions { max_len, ..Default::default() })
}

pub fn trace_with(p: &Potential, sp: &SpectralPoint, alpha: f64, opt: &TraceOptions) -> Result<Trajectory> {
    let y0 = liouville(p, sp)?;
    let dir = C64::from_polar(1.0, alpha);
    let tps = p.transition_data();
    let high_poles: Vec<C64> = p.poles().into_iter().filter(|q| q.1 >= 2).map(|q| q.0).collect();
    let fopt = FlowOptions { rtol: opt.rtol, h_min: 1e-12, h_max: f64::INFINITY };
    let mut st = FlowState { s: 0.0, x: sp.x, y0, h: 1e-3 };
    let mut xs = vec![sp.x];
    let mut ys = vec![y0];
    let mut ss = vec![0.0];
    let mut approaches: Vec<Approach> = tps
        .iter()
        .map(|(z, kind, m)| {
            let rem = z_remainder(p, sp.x, y0, *z, *kind, *m);
            Approach { point: *z, z_rem: rem, signed_miss: (rem * dir.conj()).im, z_at: C64::new(0.0, 0.0) }
        })
        .collect();
    let mut termination = None;
    for (i, (z, _, _)) in tps.iter().enumerate() {
        if approaches[i].z_rem.norm() < opt.capture {
            termination = Some(Termination::HitsTransition {
                point: *z,
                z_distance: approaches[i].z_rem.norm(),
                z_hit: approaches[i].z_rem,
            });
        }
    }
    let mut guard = 0usize;
    while termination.is_none() {
        guard += 1;
        if st.s >= opt.max_len || guard > 200_000 {
            termination = Some(Termination::MaxLength);
            break;
        }
        if let Err(e) = flow_step(p, dir, &mut st, opt.max_len, &fopt) {
            let (cp, cd) = match e {
                Error::StepCollapse { closest_point, closest_distance, .. } => (closest_point, closest_distance),
                _ => (st.x, f64::NAN),
            };
            termination = Some(Termination::NumericalStall { s: st.s, closest_point: cp, closest_distance: cd });
            break;
        }
        xs.push(st.x);
        ys.push(st.y0);
        ss.push(st.s);
        let z_here = dir * st.s;
        for (i, (z, kind, m)) in tps.iter().enumerate() {
            let rem = z_remainder(p, st.x, st.y0, *z, *kind, *m);
            if rem.norm() < approaches[i].z_rem.norm() {
                approaches[i] = Approach { point: *z, z_rem: rem, signed_miss: (rem * dir.conj()).im, z_at: z_here };
            }
            if rem.norm() < opt.capture {
                termination = Some(Termination::HitsTransition {
                    point: *z,
                    z_distance: rem.norm(),
                    z_hit: z_here + rem,
                });
                break;
            }
        }
        if termination.is_some() {
            break;
        }
        if st.x.norm() > INFINITY_CHART {
            termination = Some(Termination::EntersPole { point: Location::Infinity });
            break;
        }
        for q in &high_poles {
            if (st.x - q).norm() < 1e-6 {
                termination = Some(Termination::EntersPole { point: Location::Finite(*q) });
            }
        }
    }
    let path = SigmaPath::from_samples(p, xs, ys, ss, 16);
    Ok(Trajectory { start: *sp, phase: wrap_angle(alpha), path, termination: termination.unwrap(), approaches })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    SemiStable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPhase {
    pub alpha: f64,
    pub terminal: C64,
    pub z_hit: C64,
    pub stability: Stability,
    /// set when bisection did not settle; reported as unstable
    pub unresolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesDiagram {
    pub at: SpectralPoint,
    pub critical_phases: Vec<CriticalPhase>,
    pub regular_phases: Vec<f64>,
}

fn miss_for(t: &Trajectory, z: C64) -> f64 {
    match t.hit() {
        Some((pt, _)) if (pt - z).norm() < 1e-12 => 0.0,
        _ => t
            .approaches
            .iter()
            .find(|a| (a.point - z).norm() < 1e-12)
            .map(|a| a.signed_miss)
            .unwrap_or(f64::NAN),
    }
}

fn is_regular(p: &Potential, sp: &SpectralPoint, alpha: f64, max_len: f64) -> bool {
    match trace(p, sp, alpha, max_len) {
        Ok(t) => t.hit().is_none(),
        Err(_) => false,
    }
}

/// Bisects the signed miss towards z on [a, b]; returns the verified hit.
fn bisect_hit(p: &Potential, sp: &SpectralPoint, z: C64, mut a: f64, mut b: f64, max_len: f64) -> Option<(f64, Trajectory)> {
    let ta = trace(p, sp, a, max_len).ok()?;
    let mut fa = miss_for(&ta, z);
    if fa == 0.0 {
        return Some((a, ta));
    }
    for _ in 0..60 {
        if (b - a).abs() < 1e-7 {
            break;
        }
        let mid = 0.5 * (a + b);
        let tm = trace(p, sp, mid, max_len).ok()?;
        let fm = miss_for(&tm, z);
        if fm == 0.0 {
            return Some((mid, tm));
        }
        if fm.is_nan() {
            return None;
        }
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let mid = 0.5 * (a + b);
    let tm = trace(p, sp, mid, max_len).ok()?;
    match tm.hit() {
        Some((pt, _)) if (pt - z).norm() < 1e-12 => Some((mid, tm)),
        _ => None,
    }
}

fn classify_stability(p: &Potential, sp: &SpectralPoint, alpha: f64, max_len: f64) -> Stability {
    let open = [1e-3, 1e-2]
        .iter()
        .all(|e| is_regular(p, sp, alpha + e, max_len) && is_regular(p, sp, alpha - e, max_len));
    if open {
        return Stability::Stable;
    }
    let y0 = sp.y0(p);
    let tangent = C64::from_polar(1.0, alpha) / y0;
    let normal = tangent / tangent.norm() * C64::new(0.0, 1.0);
    let transverse = [-2.0, -1.0, 1.0, 2.0, 0.5].iter().all(|k| {
        let x = sp.x + normal * (1e-3 * k);
        let q = SpectralPoint::from_y0(p, x, continue_y0(p, x, y0));
        is_regular(p, &q, alpha, max_len)
    });
    if transverse {
        Stability::SemiStable
    } else {
        Stability::Unstable
    }
}

/// Critical phases at sp found by scanning n phases and bisecting sign
/// changes of the signed miss, each verified by an actual hit.
pub fn stokes_diagram(p: &Potential, sp: &SpectralPoint, n_phases: usize) -> Result<StokesDiagram> {
    stokes_diagram_with(p, sp, n_phases, DEFAULT_MAX_LEN)
}

pub fn stokes_diagram_with(p: &Potential, sp: &SpectralPoint, n_phases: usize, max_len: f64) -> Result<StokesDiagram> {
    liouville(p, sp)?;
    let n = n_phases.max(4);
    let phases: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
    let traces: Vec<Trajectory> = phases
        .par_iter()
        .map(|a| trace(p, sp, *a, max_len))
        .collect::<Result<Vec<_>>>()?;
    let tps: Vec<C64> = p.transition_points();
    let mut found: Vec<(f64, Trajectory)> = Vec::new();
    let mut push = |alpha: f64, t: Trajectory| {
        let a = wrap_angle(alpha);
        if !found.iter().any(|(b, _)| crate::spectral::angle_diff(a, *b).abs() < 1e-5) {
            found.push((a, t));
        }
    };
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (phases[i], if j == 0 { TAU } else { phases[j] });
        if let Some((pt, _)) = traces[i].hit() {
            push(a, traces[i].clone());
            let _ = pt;
            continue;
        }
        for z in &tps {
            let fa = miss_for(&traces[i], *z);
            let fb = miss_for(&traces[j], *z);
            if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() || fb == 0.0 {
                continue;
            }
            if let Some((alpha, t)) = bisect_hit(p, sp, *z, a, b, max_len) {
                push(alpha, t);
            }
        }
    }
    found.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let critical_phases = found
        .into_iter()
        .map(|(alpha, t)| {
            let (terminal, z_hit) = t.hit().unwrap();
            CriticalPhase {
                alpha,
                terminal,
                z_hit,
                stability: classify_stability(p, sp, alpha, max_len),
                unresolved: false,
            }
        })
        .collect::<Vec<_>>();
    let regular_phases = phases
        .iter()
        .zip(&traces)
        .filter(|(_, t)| t.hit().is_none())
        .map(|(a, _)| *a)
        .collect();
    Ok(StokesDiagram { at: *sp, critical_phases, regular_phases })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Leg {
    pub from: C64,
    /// analytic local direction arg(x − z) of the leg
    pub direction: f64,
    /// measured arg(x_start − z) after refinement of the start point
    pub measured_direction: f64,
    pub trajectory: Trajectory,
}

/// Start point on the leg of phase α leaving z in direction θ: refined so that
/// ∫_z^x σ = ρ e^{iα}.
fn leg_start(p: &Potential, z: C64, kind: Kind, theta: f64, alpha: f64, rho: f64) -> Result<SpectralPoint> {
    let c = match kind {
        Kind::Zero => p.q0_prime(z),
        Kind::Pole => {
            // residue of Q₀ at the simple pole
            let eps = 1e-7 * (1.0 + z.norm());
            p.q0(z + eps) * eps
        }
    };
    let r = match kind {
        Kind::Zero => (3.0 * rho / (4.0 * c.norm().sqrt())).powf(2.0 / 3.0),
        Kind::Pole => (rho / (4.0 * c.norm().sqrt())).powi(2),
    };
    let mut x = z + C64::from_polar(r, theta);
    let target = C64::from_polar(rho, alpha);
    let mut y = p.q0(x).sqrt();
    let zfrom = |x: C64, y: C64| -z_remainder(p, x, y, z, kind, 1);
    if (zfrom(x, y) * target.conj()).re < 0.0 {
        y = -y;
    }
    for _ in 0..8 {
        let f = zfrom(x, y) - target;
        let step = f / (y * 2.0);
        x -= step;
        y = continue_y0(p, x, y);
        if step.norm() < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    Ok(SpectralPoint::from_y0(p, x, y))
}

/// Local leg directions at a transition point for phase α.
pub fn leg_directions(p: &Potential, z: C64, kind: Kind, alpha: f64) -> Vec<f64> {
    match kind {
        Kind::Zero => {
            let c = p.q0_prime(z);
            let base = 2.0 / 3.0 * (alpha - c.sqrt().arg());
            (0..3).map(|j| wrap_angle(base + TAU * j as f64 / 3.0)).collect()
        }
        Kind::Pole => {
            let eps = 1e-7 * (1.0 + z.norm());
            let c = p.q0(z + eps) * eps;
            vec![wrap_angle(2.0 * (alpha - c.sqrt().arg()))]
        }
    }
}

/// All legs of the Stokes graph at phase α: three from each simple zero,
/// one from each simple pole.
pub fn stokes_graph(p: &Potential, alpha: f64) -> Result<Vec<Leg>> {
    stokes_graph_with(p, alpha, DEFAULT_MAX_LEN)
}

pub fn stokes_graph_with(p: &Potential, alpha: f64, max_len: f64) -> Result<Vec<Leg>> {
    if !is_simple_complete(p).0 {
        return Err(Error::Input("Stokes graph needs simple zeros of Q_0".into()));
    }
    let mut legs = Vec::new();
    for (z, kind, _) in p.transition_data() {
        for theta in leg_directions(p, z, kind, alpha) {
            let sp = leg_start(p, z, kind, theta, alpha, 1e-2)?;
            let t = trace(p, &sp, alpha, max_len)?;
            legs.push(Leg { from: z, direction: theta, measured_direction: wrap_angle((sp.x - z).arg()), trajectory: t });
        }
    }
    Ok(legs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Saddle {
    pub alpha: f64,
    pub from: C64,
    pub to: C64,
    pub central_charge: C64,
}

/// Straight-segment central charge between two transition points, on the
/// principal sheet at the midpoint.
pub fn segment_charge(p: &Potential, a: (C64, Kind, usize), b: (C64, Kind, usize)) -> C64 {
    let mid = (a.0 + b.0) * 0.5;
    let y = p.q0(mid).sqrt();
    -z_remainder(p, mid, y, a.0, a.1, a.2) + z_remainder(p, mid, y, b.0, b.1, b.2)
}

fn leg_hits(p: &Potential, from: (C64, Kind, usize), to: C64, alpha: f64, max_len: f64) -> Option<(Trajectory, f64)> {
    let mut best: Option<(Trajectory, f64)> = None;
    for theta in leg_directions(p, from.0, from.1, alpha) {
        let sp = leg_start(p, from.0, from.1, theta, alpha, 1e-2).ok()?;
        let t = trace(p, &sp, alpha, max_len).ok()?;
        let m = miss_for(&t, to);
        if m == 0.0 {
            return Some((t, 0.0));
        }
        if best.as_ref().map_or(true, |b| m.abs() < b.1.abs()) {
            best = Some((t, m));
        }
    }
    best
}

/// Saddle trajectories with phase in [lo, hi]: candidates from pairwise
/// segment charges, verified by shooting the legs and refined by bisection.
pub fn saddle_scan(p: &Potential, range: (f64, f64), n: usize) -> Result<Vec<Saddle>> {
    if !is_simple_complete(p).0 {
        return Err(Error::Input("saddle scan needs simple zeros of Q_0".into()));
    }
    let tps = p.transition_data();
    let width = (range.1 - range.0).abs().max(1e-12);
    let bracket = (width / n.max(1) as f64).min(0.05);
    let max_len = 1e3 * (1.0 + tps.iter().map(|t| t.0.norm()).fold(0.0, f64::max));
    let mut out: Vec<Saddle> = Vec::new();
    for i in 0..tps.len() {
        for j in 0..tps.len() {
            if i == j {
                continue;
            }
            let zc = segment_charge(p, tps[i], tps[j]);
            for cand in [zc, -zc] {
                let alpha0 = wrap_angle(cand.arg());
                let in_range = (0..3).any(|s| {
                    let a = alpha0 + TAU * (s as f64 - 1.0);
                    a >= range.0 - 1e-12 && a <= range.1 + 1e-12
                });
                if !in_range {
                    continue;
                }
                let verified = match leg_hits(p, tps[i], tps[j].0, alpha0, max_len) {
                    Some((t, m)) if m == 0.0 => Some((alpha0, t)),
                    _ => {
                        // bisect the leg miss on a bracket around the candidate
                        let (mut a, mut b) = (alpha0 - bracket, alpha0 + bracket);
                        let fa0 = leg_hits(p, tps[i], tps[j].0, a, max_len).map(|x| x.1);
                        let fb0 = leg_hits(p, tps[i], tps[j].0, b, max_len).map(|x| x.1);
                        match (fa0, fb0) {
                            (Some(mut fa), Some(fb)) if fa.signum() != fb.signum() => {
                                let mut res = None;
                                for _ in 0..60 {
                                    let mid = 0.5 * (a + b);
                                    match leg_hits(p, tps[i], tps[j].0, mid, max_len) {
                                        Some((t, 0.0)) => {
                                            res = Some((mid, t));
                                            break;
                                        }
                                        Some((_, fm)) if fm.signum() == fa.signum() => {
                                            a = mid;
                                            fa = fm;
                                        }
                                        Some(_) => b = mid,
                                        None => break,
                                    }
                                    if b - a < 1e-9 {
                                        break;
                                    }
                                }
                                res
                            }
                            _ => None,
                        }
                    }
                };
                if let Some((alpha, t)) = verified {
                    let alpha = wrap_angle(alpha);
                    let (_, z_hit) = t.hit().unwrap();
                    // central charge of the saddle from tps[i] to tps[j]
                    let zc_total = z_hit + C64::from_polar(1e-2, alpha);
                    if !out.iter().any(|s| {
                        crate::spectral::angle_diff(s.alpha, alpha).abs() < 1e-6
                            && ((s.from == tps[i].0 && s.to == tps[j].0) || (s.from == tps[j].0 && s.to == tps[i].0))
                    }) {
                        out.push(Saddle { alpha, from: tps[i].0, to: tps[j].0, central_charge: zc_total });
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.alpha.partial_cmp(&b.alpha).unwrap());
    Ok(out)
}

/// Half-turn helper used by callers comparing sheets.
pub fn opposite(alpha: f64) -> f64 {
    wrap_angle(alpha + PI)
}
