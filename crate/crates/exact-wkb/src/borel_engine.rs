//! Continuation of the Borel transform φ = B[f̂] along geodesic rays on Σ by
//! successive approximation, plus prediction and detection of its
//! singularities.
//!
//! φ solves (V − ∂_t)φ = φ∗φ + wφ + ω with φ(·, 0) = f₁. Along a ray of phase
//! α the characteristics stay on the ray, so every quantity lives on the
//! triangular table F[a][ℓ] = φ(x_a, ℓh e^{iα}) with a + ℓ ≤ M, where x_a is
//! the ray point at charge a h e^{iα}.

use crate::error::{Error, Result};
use crate::hbar_series::{borel_transform, HbarSeries, TSeries};
use crate::poly;
use crate::potential::{classify, is_simple_complete, CriticalPoint, Potential};
use crate::spectral::{
    angle_diff, geodesic_ray, liouville, segment_path, z_remainder, CriticalPathRecord, RecordStatus, SigmaPath,
    SpectralPoint, EXCLUSION_RADIUS,
};
use crate::trajectories::{saddle_scan, trace, Trajectory};
use nalgebra::DMatrix;
use crate::wkb::{riccati_data, RiccatiData};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub const DEFAULT_K: usize = 16;
pub const DEFAULT_M: usize = 512;

/// m₀ = m₁ = 1, m_k = Σ_{i+j=k−2} m_i m_j + m_{k−1}; saturates at u128::MAX.
pub fn motzkin_bound(k_max: usize) -> Vec<u128> {
    let mut m: Vec<u128> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        if k < 2 {
            m.push(1);
            continue;
        }
        let mut s: u128 = m[k - 1];
        for i in 0..=k - 2 {
            s = s.saturating_add(m[i].saturating_mul(m[k - 2 - i]));
        }
        m.push(s);
    }
    m
}

/// max_{1≤k≤K} m_k^{1/k}.
pub fn motzkin_growth(k_max: usize) -> f64 {
    motzkin_bound(k_max)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &v)| (v as f64).powf(1.0 / k as f64))
        .fold(1.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFit {
    pub c: f64,
    pub k_exp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub c: f64,
    pub l: f64,
    pub m: f64,
    pub checked: usize,
    pub violations: usize,
    /// max over entries of |φ_(k)| / bound
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BorelGrid {
    pub path: SigmaPath,
    pub alpha: f64,
    pub tau: f64,
    /// K × (M+1): φ_(k) at the base point, charge r_j e^{iα}
    pub orders: Vec<Vec<C64>>,
    pub phi_total: Vec<C64>,
    pub bound_fit: BoundFit,
    pub envelope: EnvelopeReport,
    /// max |φ_M − φ_{M/2}| / max |φ_M| at shared nodes (0 when not run)
    pub self_consistency: f64,
}

impl BorelGrid {
    pub fn m(&self) -> usize {
        self.phi_total.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.tau / self.m() as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        self.h() * j as f64
    }

    /// Charge t at node j.
    pub fn t(&self, j: usize) -> C64 {
        C64::from_polar(self.r(j), self.alpha)
    }

    /// CSV rows: r, then re/im of each order, then re/im of the total.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r");
        for k in 0..self.orders.len() {
            out.push_str(&format!(",re_phi{k},im_phi{k}"));
        }
        out.push_str(",re_total,im_total\n");
        for j in 0..self.phi_total.len() {
            out.push_str(&format!("{:.12e}", self.r(j)));
            for o in &self.orders {
                out.push_str(&format!(",{:.12e},{:.12e}", o[j].re, o[j].im));
            }
            out.push_str(&format!(",{:.12e},{:.12e}\n", self.phi_total[j].re, self.phi_total[j].im));
        }
        out
    }
}

/// Pointwise data of the Borel PDE on the ray nodes.
struct NodeData {
    f1: Vec<C64>,
    w: Vec<C64>,
    /// ω(x_c, t) = Σ_n omega[c][n] t^n
    omega: Vec<Vec<C64>>,
}

fn node_data(rd: &RiccatiData, path: &SigmaPath) -> Result<NodeData> {
    let n = path.len();
    let mut f1 = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    for i in 0..n {
        let x = path.samples[i].x;
        let y0 = path.y0[i];
        let v = rd.f1(x, y0);
        if !v.is_finite() {
            return Err(Error::Numerical(format!("f₁ not finite at {x}")));
        }
        f1.push(v);
        w.push(rd.w(x));
        omega.push(rd.omega_coeffs(x));
    }
    Ok(NodeData { f1, w, omega })
}

/// Triangular table F[a][ℓ], a + ℓ ≤ M.
type Table = Vec<Vec<C64>>;

fn zero_table(m: usize) -> Table {
    (0..=m).map(|a| vec![ZERO; m + 1 - a]).collect()
}

fn is_zero_table(t: &Table) -> bool {
    t.iter().all(|row| row.iter().all(|v| *v == ZERO))
}

/// acc[r] += scale · (Σ_{u=0}^r A[u]B[r−u] − ½(A[0]B[r] + A[r]B[0])).
fn conv_accumulate(a: &[C64], b: &[C64], scale: C64, acc: &mut [C64], buf: &mut ConvBuf) {
    let n = a.len();
    buf.load(a, b);
    for r in 0..n {
        let (ar, ai) = (&buf.ar[..=r], &buf.ai[..=r]);
        let off = n - 1 - r;
        let (br, bi) = (&buf.br[off..], &buf.bi[off..]);
        let mut sr = 0.0;
        let mut si = 0.0;
        for u in 0..=r {
            sr += ar[u] * br[u] - ai[u] * bi[u];
            si += ar[u] * bi[u] + ai[u] * br[u];
        }
        let s = C64::new(sr, si) - (a[0] * b[r] + a[r] * b[0]) * 0.5;
        acc[r] += s * scale;
    }
}

/// Split re/im buffers with B reversed so the inner loop is a plain dot product.
struct ConvBuf {
    ar: Vec<f64>,
    ai: Vec<f64>,
    br: Vec<f64>,
    bi: Vec<f64>,
}

impl ConvBuf {
    fn new(n: usize) -> Self {
        ConvBuf { ar: vec![0.0; n], ai: vec![0.0; n], br: vec![0.0; n], bi: vec![0.0; n] }
    }

    fn load(&mut self, a: &[C64], b: &[C64]) {
        let n = a.len();
        self.ar.resize(n, 0.0);
        self.ai.resize(n, 0.0);
        self.br.resize(n, 0.0);
        self.bi.resize(n, 0.0);
        for u in 0..n {
            self.ar[u] = a[u].re;
            self.ai[u] = a[u].im;
            self.br[n - 1 - u] = b[u].re;
            self.bi[n - 1 - u] = b[u].im;
        }
    }
}

/// Solves for the K order tables on a ray with node spacing h and phase α.
fn solve_tables(nd: &NodeData, h: f64, alpha: f64, k_orders: usize) -> Vec<Table> {
    let m = nd.f1.len() - 1;
    let e = C64::from_polar(1.0, alpha);
    let mut tables: Vec<Table> = Vec::with_capacity(k_orders);
    // φ_(0)[a][ℓ] = f₁(x_{a+ℓ})
    tables.push((0..=m).map(|a| (0..=m - a).map(|l| nd.f1[a + l]).collect()).collect());
    let has_omega = nd.omega.iter().any(|c| c.iter().any(|v| *v != ZERO));
    let has_w = nd.w.iter().any(|v| *v != ZERO);
    let mut buf = ConvBuf::new(m + 1);
    for k in 1..k_orders {
        let mut src = zero_table(m);
        if k == 1 {
            for c in 0..=m {
                for j in 0..=m - c {
                    let mut v = nd.w[c] * tables[0][c][j];
                    if has_omega {
                        let t = e * (h * j as f64);
                        v += nd.omega[c].iter().rev().fold(ZERO, |acc, co| acc * t + co);
                    }
                    src[c][j] = v;
                }
            }
        } else {
            let scale = e * h;
            for i in 0..=(k - 2) / 2 {
                let i2 = k - 2 - i;
                if is_zero_table(&tables[i]) || is_zero_table(&tables[i2]) {
                    continue;
                }
                let factor = if i == i2 { scale } else { scale * 2.0 };
                for c in 0..=m {
                    conv_accumulate(&tables[i][c], &tables[i2][c], factor, &mut src[c], &mut buf);
                }
            }
            if has_w {
                for c in 0..=m {
                    for j in 0..=m - c {
                        src[c][j] += nd.w[c] * tables[k - 1][c][j];
                    }
                }
            }
        }
        // φ_(k)[a][ℓ] = −e^{iα} h trap_{j=0..ℓ} Φ̃[a+ℓ−j][j], cumulative along anti-diagonals
        let mut out = zero_table(m);
        if !is_zero_table(&src) {
            let pre = -e * h;
            for d in 0..=m {
                let mut run = ZERO;
                let g0 = src[d][0];
                for l in 1..=d {
                    let gl = src[d - l][l];
                    run += gl;
                    // trapezoid: Σ_{j=0}^{ℓ} G_j − (G_0 + G_ℓ)/2
                    let trap = run + g0 * 0.5 - gl * 0.5;
                    out[d - l][l] = pre * trap;
                }
            }
        }
        tables.push(out);
    }
    tables
}

fn envelope_check(nd: &NodeData, tables: &[Table], h: f64) -> EnvelopeReport {
    let sup = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let has_omega = nd.omega.iter().any(|c| c.iter().any(|v| *v != ZERO));
    let mut c = 1f64.max(sup(&nd.f1)).max(sup(&nd.w));
    let mut l = 0.0f64;
    if has_omega {
        let deg = nd.omega.iter().map(|c| c.len()).max().unwrap_or(0);
        let om0: Vec<C64> = nd.omega.iter().map(|o| o.first().copied().unwrap_or(ZERO)).collect();
        c = c.max(sup(&om0)) + 1.0;
        let mut fact = 1.0;
        for n in 1..deg {
            fact *= n as f64;
            let on: Vec<C64> = nd.omega.iter().map(|o| o.get(n).copied().unwrap_or(ZERO)).collect();
            l = l.max((sup(&on) * fact / c).powf(1.0 / n as f64));
        }
    }
    let k_orders = tables.len();
    let m = motzkin_growth(k_orders.max(1));
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mc = m * c;
    for (k, t) in tables.iter().enumerate() {
        let mut kfact = 1.0;
        for i in 1..=k {
            kfact *= i as f64;
        }
        for row in t {
            for (lidx, v) in row.iter().enumerate() {
                let r = h * lidx as f64;
                let bound = c * (mc * r).powi(k as i32) / kfact * (l * r).exp();
                let a = v.norm();
                checked += 1;
                if a > bound * (1.0 + 1e-12) + 1e-300 {
                    violations += 1;
                }
                if bound > 0.0 {
                    worst = worst.max(a / bound);
                } else if a > 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
    }
    EnvelopeReport { c, l, m, checked, violations, worst_ratio: worst }
}

/// Exponential envelope of the total: K = max(0, slope of log|φ| over the
/// second half), C = max_j |φ_j| e^{−K r_j}.
pub fn fit_bound(phi: &[C64], h: f64) -> BoundFit {
    let n = phi.len();
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&j| phi[j].norm() > 0.0)
        .map(|j| (h * j as f64, phi[j].norm().ln()))
        .collect();
    let mut k = 0.0;
    if pts.len() >= 2 {
        let q = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / q;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / q;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            k = (sxy / sxx).max(0.0);
        }
    }
    let c = phi
        .iter()
        .enumerate()
        .map(|(j, v)| v.norm() * (-k * h * j as f64).exp())
        .fold(0.0, f64::max);
    BoundFit { c, k_exp: k }
}

fn check_geodesic(path: &SigmaPath) -> Result<(f64, f64)> {
    let m = path.len().saturating_sub(1);
    if m == 0 {
        return Err(Error::Input("path needs at least two samples".into()));
    }
    let total = path.total_z();
    let tau = total.norm();
    let alpha = total.arg();
    let h = tau / m as f64;
    for (j, z) in path.cumulative_z.iter().enumerate() {
        let expect = C64::from_polar(h * j as f64, alpha);
        if (z - expect).norm() > 1e-8 * (1.0 + tau) {
            return Err(Error::Input(
                "continuation needs a geodesic ray sampled uniformly in Z".into(),
            ));
        }
    }
    for a in &path.phase_profile {
        if angle_diff(*a, alpha).abs() > 1e-6 {
            return Err(Error::Input("path phase profile is not constant".into()));
        }
    }
    Ok((alpha, tau))
}

#[derive(Clone, Copy, Debug)]
pub struct ContinueOptions {
    pub k: usize,
    pub m: usize,
    /// Run the M/2 self-consistency check.
    pub self_check: bool,
    pub exclusion: f64,
}

impl Default for ContinueOptions {
    fn default() -> Self {
        ContinueOptions { k: DEFAULT_K, m: DEFAULT_M, self_check: true, exclusion: EXCLUSION_RADIUS }
    }
}

/// Continues φ along a geodesic ray (the path from `geodesic_ray`) with K
/// orders; M is the number of path intervals.
pub fn continue_phi(p: &Potential, path: &SigmaPath, k: usize) -> Result<BorelGrid> {
    continue_phi_with(p, path, k, true)
}

pub fn continue_phi_with(p: &Potential, path: &SigmaPath, k: usize, self_check: bool) -> Result<BorelGrid> {
    let (alpha, tau) = check_geodesic(path)?;
    let m = path.len() - 1;
    if k == 0 {
        return Err(Error::Input("need at least one order".into()));
    }
    if m < 8 * k {
        return Err(Error::Input(format!("grid too coarse: M = {m} < 8K = {}", 8 * k)));
    }
    let rd = riccati_data(p, 2);
    let nd = node_data(&rd, path)?;
    let h = tau / m as f64;
    let tables = solve_tables(&nd, h, alpha, k);
    let orders: Vec<Vec<C64>> = tables.iter().map(|t| t[0].clone()).collect();
    let phi_total: Vec<C64> = (0..=m).map(|j| orders.iter().map(|o| o[j]).sum()).collect();
    if phi_total.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("Borel continuation produced non-finite values".into()));
    }
    let envelope = envelope_check(&nd, &tables, h);
    let mut consistency = 0.0;
    if self_check && m % 2 == 0 && m / 2 >= 8 {
        let half = NodeData {
            f1: nd.f1.iter().step_by(2).copied().collect(),
            w: nd.w.iter().step_by(2).copied().collect(),
            omega: nd.omega.iter().step_by(2).cloned().collect(),
        };
        let th = solve_tables(&half, 2.0 * h, alpha, k);
        let scale = phi_total.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let mut diff = 0.0f64;
        for j in 0..=m / 2 {
            let coarse: C64 = th.iter().map(|t| t[0][j]).sum();
            diff = diff.max((coarse - phi_total[2 * j]).norm());
        }
        consistency = diff / scale;
        if consistency > 1e-4 {
            return Err(Error::Numerical(format!(
                "grid too coarse: M and M/2 disagree by {consistency:.2e} (> 1e-4); increase M"
            )));
        }
    }
    let bound_fit = fit_bound(&phi_total, h);
    Ok(BorelGrid {
        path: path.clone(),
        alpha,
        tau,
        orders,
        phi_total,
        bound_fit,
        envelope,
        self_consistency: consistency,
    })
}

/// Builds the geodesic ray of phase α and length τ from `sp` and continues φ.
pub fn continue_ray(p: &Potential, sp: &SpectralPoint, alpha: f64, tau: f64, opt: &ContinueOptions) -> Result<BorelGrid> {
    let path = geodesic_ray(p, sp, alpha, tau, opt.m, opt.exclusion)?;
    continue_phi_with(p, &path, opt.k, opt.self_check)
}

/// Taylor germ of B[f̂] at sp: b_k = f_{k+1}/k!, k = 0..n−1.
pub fn borel_germ(p: &Potential, sp: &SpectralPoint, n: usize) -> Result<TSeries> {
    let rd = riccati_data(p, n);
    let v = rd.eval(sp)?;
    let mut a = vec![ZERO];
    a.extend(v.f.iter().copied());
    borel_transform(&HbarSeries::new(a)?)
}

/// Predicted and detected Borel singularities at one base point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularityReport {
    pub predicted: Vec<CriticalPathRecord>,
    pub detected: Vec<DetectedPole>,
    pub matches: Vec<SingularityMatch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectedPole {
    pub pole: C64,
    /// summed over the cluster
    pub residue: C64,
    /// number of approximant poles merged into this one
    pub multiplicity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityMatch {
    pub predicted: usize,
    pub detected: usize,
    pub distance: f64,
}

pub const DEFAULT_CHAIN_DEPTH: usize = 3;

fn critical_point_at(cps: &[CriticalPoint], z: C64) -> Option<CriticalPoint> {
    cps.iter()
        .find(|c| c.location.finite().map_or(false, |x| (x - z).norm() < 1e-9 * (1.0 + z.norm())))
        .cloned()
}

fn miss_towards(t: &Trajectory, z: C64) -> Option<f64> {
    if let Some((pt, _)) = t.hit() {
        if (pt - z).norm() < 1e-12 {
            return Some(0.0);
        }
    }
    t.approaches.iter().find(|a| (a.point - z).norm() < 1e-12).map(|a| a.signed_miss)
}

/// Shoots the trajectory from sp that ends at z, starting from phase alpha0.
fn shoot(p: &Potential, sp: &SpectralPoint, z: C64, alpha0: f64, max_len: f64) -> Option<Trajectory> {
    let run = |a: f64| trace(p, sp, a, max_len).ok();
    let t0 = run(alpha0)?;
    let f0 = miss_towards(&t0, z)?;
    if f0 == 0.0 {
        return Some(t0);
    }
    // bracket the sign change, then bisect; the miss is monotone near a hit
    let mut bracket = None;
    for k in 1..=12 {
        let d = 1e-3 * 2f64.powi(k - 1);
        for a in [alpha0 - d, alpha0 + d] {
            let t = run(a)?;
            match miss_towards(&t, z) {
                Some(0.0) => return Some(t),
                Some(f) if f.signum() != f0.signum() => {
                    bracket = Some(if a < alpha0 { (a, alpha0, f) } else { (alpha0, a, f0) });
                    break;
                }
                _ => {}
            }
        }
        if bracket.is_some() {
            break;
        }
    }
    let (mut lo, mut hi, mut flo) = bracket?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let t = run(mid)?;
        let fm = miss_towards(&t, z)?;
        if fm == 0.0 {
            return Some(t);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    None
}

/// Critical paths from sp with |Z| ≤ radius: geodesic hits (visible), their
/// extensions by saddle chains up to depth 3, and unresolved candidates.
pub fn predict_singularities(p: &Potential, sp: &SpectralPoint, radius: f64) -> Result<Vec<CriticalPathRecord>> {
    predict_singularities_with(p, sp, radius, DEFAULT_CHAIN_DEPTH)
}

pub fn predict_singularities_with(
    p: &Potential,
    sp: &SpectralPoint,
    radius: f64,
    depth: usize,
) -> Result<Vec<CriticalPathRecord>> {
    let y0 = liouville(p, sp)?;
    let cps = classify(p)?;
    let tps = p.transition_data();
    let max_len = 1.5 * radius;
    let mut out: Vec<CriticalPathRecord> = Vec::new();
    let known = |out: &Vec<CriticalPathRecord>, xi: C64| {
        out.iter().any(|r| (r.central_charge - xi).norm() < 1e-6 * (1.0 + xi.norm()))
    };
    for &(z, kind, m) in &tps {
        let guess = z_remainder(p, sp.x, y0, z, kind, m);
        if !guess.is_finite() || guess.norm() > 2.0 * radius {
            continue;
        }
        let terminal = match critical_point_at(&cps, z) {
            Some(c) => c,
            None => continue,
        };
        match shoot(p, sp, z, guess.arg(), max_len) {
            Some(t) => {
                let (_, xi) = t.hit().unwrap();
                if xi.norm() <= radius && !known(&out, xi) {
                    out.push(CriticalPathRecord {
                        path: t.path.clone(),
                        terminal,
                        central_charge: xi,
                        is_trajectory: true,
                        status: RecordStatus::Visible,
                    });
                }
            }
            None => {
                if guess.norm() <= radius && !known(&out, guess) {
                    let path = segment_path(p, sp, z + (sp.x - z) * 1e-3, 64)?;
                    out.push(CriticalPathRecord {
                        path,
                        terminal,
                        central_charge: guess,
                        is_trajectory: false,
                        status: RecordStatus::Unresolved,
                    });
                }
            }
        }
    }
    if depth > 0 && !tps.is_empty() && is_simple_complete(p).0 {
        let saddles = saddle_scan(p, (0.0, std::f64::consts::TAU), 64)?;
        let visible: Vec<CriticalPathRecord> =
            out.iter().filter(|r| r.status == RecordStatus::Visible).cloned().collect();
        for rec in visible {
            let a = rec.terminal.location.finite().unwrap();
            for s in saddles.iter().filter(|s| (s.from - a).norm() < 1e-9 || (s.to - a).norm() < 1e-9) {
                let other = if (s.from - a).norm() < 1e-9 { s.to } else { s.from };
                for n in 1..=depth {
                    for sign in [1.0, -1.0] {
                        let xi = rec.central_charge + s.central_charge * (sign * n as f64);
                        if xi.norm() > radius || known(&out, xi) {
                            continue;
                        }
                        let end = if n % 2 == 1 { other } else { a };
                        if let Some(terminal) = critical_point_at(&cps, end) {
                            out.push(CriticalPathRecord {
                                path: rec.path.clone(),
                                terminal,
                                central_charge: xi,
                                is_trajectory: false,
                                status: RecordStatus::Chained,
                            });
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.central_charge.norm().partial_cmp(&b.central_charge.norm()).unwrap());
    Ok(out)
}

/// Denominator and numerator of the (m, n) Padé approximant of Σ c_k t^k,
/// via the SVD null vector of the Toeplitz block, with rank reduction.
pub fn pade(c: &[C64], m: usize, n: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    if c.len() < m + n + 1 {
        return Err(Error::Input("insufficient germ length".into()));
    }
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((vec![ZERO], vec![C64::new(1.0, 0.0)]));
    }
    let coef = |i: isize| if i < 0 { ZERO } else { c[i as usize] };
    let (mut m, mut n) = (m, n);
    loop {
        if n == 0 {
            return Ok((c[..=m].to_vec(), vec![C64::new(1.0, 0.0)]));
        }
        // padded with a zero row so the SVD returns a full right basis
        let z = DMatrix::from_fn(n + 1, n + 1, |i, j| if i < n { coef((m + 1 + i) as isize - j as isize) } else { ZERO });
        let svd = z.svd(false, true);
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|a, b| svd.singular_values[*b].partial_cmp(&svd.singular_values[*a]).unwrap());
        let rank = order.iter().filter(|i| svd.singular_values[**i] > 1e-13 * scale).count();
        if rank < n {
            let drop = n - rank;
            n -= drop;
            m = m.saturating_sub(drop);
            continue;
        }
        let vt = svd.v_t.ok_or_else(|| Error::Numerical("insufficient germ length".into()))?;
        let null = order[n];
        let b: Vec<C64> = (0..=n).map(|j| vt[(null, j)].conj()).collect();
        let a: Vec<C64> = (0..=m)
            .map(|i| (0..=n.min(i)).map(|j| coef(i as isize - j as isize) * b[j]).sum())
            .collect();
        return Ok((a, b));
    }
}

/// Poles of the (n, n) Padé approximant kept only if they reappear at
/// (n+2, n+2) within 1e−3. The germ is rescaled by its root-test radius.
pub fn detect_pade(germ: &TSeries) -> Result<Vec<DetectedPole>> {
    let c = &germ.coeffs;
    let len = c.len();
    if len < 16 {
        return Err(Error::Input("insufficient germ length: need at least 16 coefficients".into()));
    }
    let tail: Vec<f64> = c[len / 2..]
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(i, v)| v.norm().powf(-1.0 / (i + len / 2) as f64))
        .collect();
    if tail.is_empty() {
        return Ok(vec![]);
    }
    let rho = tail.iter().sum::<f64>() / tail.len() as f64;
    let cs: Vec<C64> = c.iter().enumerate().map(|(k, v)| v * rho.powi(k as i32)).collect();
    let n = (len - 5) / 2;
    let poles_of = |n: usize| -> Result<Vec<DetectedPole>> {
        let (a, b) = pade(&cs, n, n)?;
        let db = poly::deriv(&b);
        Ok(poly::roots(&b)
            .into_iter()
            .map(|s| DetectedPole { pole: s * rho, residue: -poly::eval(&a, s) / poly::eval(&db, s) * rho, multiplicity: 1 })
            .collect())
    };
    let p1 = poles_of(n)?;
    let p2 = poles_of(n + 2)?;
    let stable: Vec<DetectedPole> = p1
        .into_iter()
        .filter(|d| d.pole.is_finite() && p2.iter().any(|e| (e.pole - d.pole).norm() < 1e-3 * (1.0 + d.pole.norm())))
        .collect();
    // higher-order poles and logarithms show up as tight clusters
    let mut out: Vec<DetectedPole> = Vec::new();
    for d in stable {
        match out.iter_mut().find(|c| (c.pole - d.pole).norm() < 1e-2 * (1.0 + d.pole.norm())) {
            Some(c) => {
                let k = c.multiplicity as f64;
                c.pole = (c.pole * k + d.pole) / (k + 1.0);
                c.residue += d.residue;
                c.multiplicity += 1;
            }
            None => out.push(d),
        }
    }
    out.sort_by(|a, b| a.pole.norm().partial_cmp(&b.pole.norm()).unwrap());
    Ok(out)
}

/// Phase scan: fitted growth exponent of φ along rays, largest near Stokes phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupSample {
    pub alpha: f64,
    pub k_exp: f64,
    pub max_abs: f64,
}

pub fn endpoint_blowup(
    p: &Potential,
    sp: &SpectralPoint,
    phases: &[f64],
    tau: f64,
    opt: &ContinueOptions,
) -> Vec<BlowupSample> {
    phases
        .iter()
        .map(|&alpha| match continue_ray(p, sp, alpha, tau, opt) {
            Ok(g) => BlowupSample {
                alpha,
                k_exp: g.bound_fit.k_exp,
                max_abs: g.phi_total.iter().map(|v| v.norm()).fold(0.0, f64::max),
            },
            Err(_) => BlowupSample { alpha, k_exp: f64::INFINITY, max_abs: f64::INFINITY },
        })
        .collect()
}

/// Pairs predicted central charges with detected poles within tol.
pub fn match_singularities(predicted: &[CriticalPathRecord], detected: &[DetectedPole], tol: f64) -> Vec<SingularityMatch> {
    let mut out = Vec::new();
    for (i, r) in predicted.iter().enumerate() {
        let best = detected
            .iter()
            .enumerate()
            .map(|(j, d)| (j, (d.pole - r.central_charge).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if let Some((j, dist)) = best {
            if dist <= tol {
                out.push(SingularityMatch { predicted: i, detected: j, distance: dist });
            }
        }
    }
    out
}

pub fn singularity_report(p: &Potential, sp: &SpectralPoint, radius: f64, depth: usize, germ_len: usize) -> Result<SingularityReport> {
    let predicted = predict_singularities_with(p, sp, radius, depth)?;
    let germ = borel_germ(p, sp, germ_len)?;
    let detected = detect_pade(&germ)?;
    let matches = match_singularities(&predicted, &detected, 2e-2);
    Ok(SingularityReport { predicted, detected, matches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn motzkin_first_ten() {
        let m = motzkin_bound(9);
        assert_eq!(m, vec![1, 1, 2, 4, 9, 21, 51, 127, 323, 835]);
    }

    #[test]
    fn trapezoid_convolution_of_constants() {
        // 1 ∗ 1 = r exactly under the trapezoid rule
        let a = vec![C64::new(1.0, 0.0); 9];
        let mut acc = vec![ZERO; 9];
        let mut buf = ConvBuf::new(9);
        conv_accumulate(&a, &a, C64::new(0.5, 0.0), &mut acc, &mut buf);
        for (r, v) in acc.iter().enumerate() {
            assert!((v.re - 0.5 * r as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn fit_of_pure_exponential() {
        let h = 0.01;
        let phi: Vec<C64> = (0..200).map(|j| C64::new(3.0 * (2.0 * h * j as f64).exp(), 0.0)).collect();
        let b = fit_bound(&phi, h);
        assert!((b.k_exp - 2.0).abs() < 1e-9);
        assert!((b.c - 3.0).abs() < 1e-9);
    }

    #[test]
    fn pade_finds_simple_pole() {
        // a_k = (k−1)! has Borel transform 1/(1 − t)
        let mut a = vec![0.0];
        a.extend((1..30).map(|k| crate::hbar_series::factorial(k - 1)));
        let g = borel_transform(&HbarSeries::from_real(&a).unwrap()).unwrap();
        let d = detect_pade(&g).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].pole - C64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn pade_sees_nothing_for_entire_germ() {
        let a: Vec<f64> = (0..30).map(crate::hbar_series::factorial).map(|f| 1.0 / f).collect();
        let g = borel_transform(&HbarSeries::from_real(&a).unwrap()).unwrap();
        assert!(detect_pade(&g).unwrap().is_empty());
    }

    #[test]
    fn short_germ_is_rejected() {
        let g = TSeries::new(vec![C64::new(1.0, 0.0); 8]).unwrap();
        assert!(detect_pade(&g).is_err());
    }

    #[test]
    fn airy_prediction() {
        let p = Potential::airy();
        let r = predict_singularities(&p, &SpectralPoint::new(C64::new(1.0, 0.0), 1), 10.0).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].status, RecordStatus::Visible);
        assert!((r[0].central_charge + C64::new(4.0 / 3.0, 0.0)).norm() < 1e-6);
        let none = predict_singularities(&Potential::constant_one(), &SpectralPoint::new(C64::new(0.0, 0.0), 1), 10.0);
        assert!(none.unwrap().is_empty());
    }
}
