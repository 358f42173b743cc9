//! Command line front end: `exact-wkb <subcommand> <spec.json> [flags]`.

use crate::borel_engine::{
    borel_germ, continue_ray, detect_pade, match_singularities, motzkin_bound, predict_singularities_with,
    ContinueOptions, SingularityReport, DEFAULT_CHAIN_DEPTH, DEFAULT_K, DEFAULT_M,
};
use crate::error::{Error, Result};
use crate::hbar_series::{borel_transform, factorial, HbarSeries};
use crate::potential::{classify, is_simple_complete, Potential, PotentialSpec, RationalSpec};
use crate::resummation::{jump_fit, laplace_samples, ode_oracle, resum_f, resum_wkb, ResumOptions};
use crate::spectral::{liouville, SpectralPoint};
use crate::trajectories::{saddle_scan, stokes_diagram, stokes_graph, Leg, Termination};
use crate::wkb::{formal_wkb_differential, riccati_data, wkb_recursion};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "exact-wkb", version, about = "Exact WKB analysis of ħ²Ψ'' = Q(x, ħ)Ψ")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Critical points of Q₀ on the Riemann sphere
    Classify(CommonArgs),
    /// WKB coefficients y_k, Λ_k and the Riccati data at the base point
    Coeffs(CommonArgs),
    /// Stokes diagram at the base point, Stokes graph and saddles at --phase
    Stokes(CommonArgs),
    /// Continue the Borel transform along the ray of phase --phase
    BorelContinue(CommonArgs),
    /// Predicted and Padé-detected Borel singularities
    BorelSing(CommonArgs),
    /// Laplace resummation along --phase
    Resum(CommonArgs),
    /// Lateral jump at the Stokes phase --phase
    Jump(CommonArgs),
    /// Run the built-in identity checks
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Problem spec (JSON)
    spec: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug, Clone)]
struct SelftestArgs {
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug, Clone, Default)]
struct Flags {
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Number of orders K (or WKB order N for coeffs)
    #[arg(long)]
    order: Option<usize>,
    /// Grid intervals M
    #[arg(long)]
    grid: Option<usize>,
    /// Ray phase α in radians
    #[arg(long, allow_hyphen_values = true)]
    phase: Option<f64>,
    /// Comma separated ħ values
    #[arg(long, value_delimiter = ',')]
    hbar: Option<Vec<f64>>,
    /// Radius in the Borel plane for singularity prediction
    #[arg(long)]
    radius: Option<f64>,
    /// Saddle-chain depth
    #[arg(long)]
    depth: Option<usize>,
    /// Recorded in the manifest; all algorithms are deterministic
    #[arg(long)]
    seed: Option<u64>,
}

/// Contents of the spec file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "Q")]
    pub q: Vec<RationalSpec>,
    #[serde(default)]
    pub basepoint: Option<BasepointSpec>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BasepointSpec {
    pub x: C64,
    #[serde(default = "plus")]
    pub sheet: i8,
}

fn plus() -> i8 {
    1
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub phase: Option<f64>,
    pub hbar: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
    /// ray length for continuation and resummation
    pub tau: Option<f64>,
    /// polyline continuing the base point, for `resum`
    pub path: Option<Vec<C64>>,
    /// phases sampled by the Stokes diagram
    pub n_phases: Option<usize>,
    /// Taylor coefficients used for Padé detection
    pub germ_len: Option<usize>,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde_json appends its own " at line L column C"
            let msg = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
            Error::Input(format!("spec line {} column {}: {}", e.line(), e.column(), msg))
        })
    }

    pub fn potential(&self) -> Result<Potential> {
        Potential::from_spec(&PotentialSpec { q: self.q.clone() })
    }
}

/// Parameters after merging spec values with command line flags.
#[derive(Clone, Debug, Serialize)]
struct Resolved {
    order: usize,
    grid: usize,
    phase: f64,
    hbar: Vec<f64>,
    radius: f64,
    depth: usize,
    seed: u64,
    tau: Option<f64>,
    path: Option<Vec<C64>>,
    n_phases: usize,
    germ_len: usize,
}

fn in_range<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<T> {
    if v < lo || v > hi {
        return Err(Error::Input(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

fn resolve(spec: &Params, f: &Flags, cmd: &str) -> Result<Resolved> {
    let default_order = if cmd == "coeffs" { 8 } else { DEFAULT_K };
    let order = in_range("order", f.order.or(spec.order).unwrap_or(default_order), 1, 64)?;
    let grid = in_range("grid", f.grid.or(spec.grid).unwrap_or(DEFAULT_M), 8, 8192)?;
    if cmd != "coeffs" && grid < 8 * order {
        return Err(Error::Input(format!("grid = {grid} must be at least 8·order = {}", 8 * order)));
    }
    let phase = f.phase.or(spec.phase).unwrap_or(0.0);
    if !phase.is_finite() {
        return Err(Error::Input("phase must be finite".into()));
    }
    let hbar = f.hbar.clone().or_else(|| spec.hbar.clone()).unwrap_or_else(|| vec![0.1, 0.05, 0.02]);
    if hbar.is_empty() || hbar.iter().any(|h| !(*h > 0.0 && *h <= 10.0)) {
        return Err(Error::Input("hbar values must lie in (0, 10]".into()));
    }
    let radius = f.radius.or(spec.radius).unwrap_or(10.0);
    in_range("radius", radius, 1e-6, 1e6)?;
    let depth = in_range("depth", f.depth.or(spec.depth).unwrap_or(DEFAULT_CHAIN_DEPTH), 0, 10)?;
    let tau = match spec.tau {
        Some(t) => Some(in_range("tau", t, 1e-6, 1e4)?),
        None => None,
    };
    let n_phases = in_range("n_phases", spec.n_phases.unwrap_or(64), 4, 4096)?;
    let germ_len = in_range("germ_len", spec.germ_len.unwrap_or(24), 16, 80)?;
    Ok(Resolved {
        order,
        grid,
        phase,
        hbar,
        radius,
        depth,
        seed: f.seed.or(spec.seed).unwrap_or(0),
        tau,
        path: spec.path.clone(),
        n_phases,
        germ_len,
    })
}

struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
        self.files.push((name.to_string(), sha256(content.as_bytes())));
        Ok(())
    }

    fn write_json(&mut self, name: &str, v: &Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Numerical(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn basepoint(spec: &ProblemSpec) -> Result<SpectralPoint> {
    let b = spec
        .basepoint
        .ok_or_else(|| Error::Input("this subcommand needs a basepoint {\"x\": [re, im], \"sheet\": ±1}".into()))?;
    if b.sheet != 1 && b.sheet != -1 {
        return Err(Error::Input("sheet must be 1 or -1".into()));
    }
    Ok(SpectralPoint::new(b.x, b.sheet))
}

fn continue_opts(r: &Resolved) -> ContinueOptions {
    ContinueOptions { k: r.order, m: r.grid, ..Default::default() }
}

fn resum_opts(r: &Resolved) -> ResumOptions {
    ResumOptions { k: r.order, m: r.grid, tau: r.tau, ..Default::default() }
}

fn cmd_classify(p: &Potential, out: &mut Outputs) -> Result<()> {
    let cps = classify(p)?;
    let (simple, complete) = is_simple_complete(p);
    out.write_json(
        "classify.json",
        &json!({ "critical_points": to_json(&cps), "simple": simple, "complete": complete }),
    )
}

fn cmd_coeffs(p: &Potential, sp: &SpectralPoint, r: &Resolved, out: &mut Outputs) -> Result<()> {
    let n = r.order;
    let y = wkb_recursion(p, sp, n)?;
    let lam = formal_wkb_differential(p, sp, n.saturating_sub(1))?;
    let rv = riccati_data(p, n).eval(sp)?;
    out.write_json(
        "coeffs.json",
        &json!({
            "x": to_json(&sp.x),
            "sheet": sp.sheet,
            "y": to_json(&y.orders),
            "Lambda": to_json(&lam),
            "w": to_json(&rv.w),
            "W": to_json(&rv.big_w),
            "f": to_json(&rv.f),
        }),
    )
}

fn leg_color(t: &Termination) -> &'static str {
    match t {
        Termination::HitsTransition { .. } => "#c0392b",
        Termination::EntersPole { .. } => "#2a6fdb",
        Termination::MaxLength => "#7f8c8d",
        Termination::NumericalStall { .. } => "#e67e22",
    }
}

fn stokes_svg(p: &Potential, legs: &[Leg]) -> String {
    let tps = p.finite_critical();
    let extent = tps.iter().map(|z| z.norm()).fold(0.0, f64::max) * 2.0 + 2.0;
    let size = 600.0;
    let map = |x: C64| ((x.re + extent) / (2.0 * extent) * size, (extent - x.im) / (2.0 * extent) * size);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for leg in legs {
        let pts: Vec<String> = leg
            .trajectory
            .path
            .xs()
            .into_iter()
            .take_while(|x| x.norm() < 50.0 * extent)
            .map(|x| {
                let (a, b) = map(x);
                format!("{a:.3},{b:.3}")
            })
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            leg_color(&leg.trajectory.termination),
            pts.join(" ")
        ));
    }
    for z in tps {
        let (a, b) = map(z);
        s.push_str(&format!("<circle cx=\"{a:.3}\" cy=\"{b:.3}\" r=\"3\" fill=\"black\"/>\n"));
    }
    s.push_str("</svg>\n");
    s
}

fn cmd_stokes(p: &Potential, spec: &ProblemSpec, r: &Resolved, out: &mut Outputs) -> Result<()> {
    let mut report = serde_json::Map::new();
    report.insert("phase".into(), json!(r.phase));
    if spec.basepoint.is_some() {
        let sp = basepoint(spec)?;
        report.insert("diagram".into(), to_json(&stokes_diagram(p, &sp, r.n_phases)?));
    }
    let legs = if is_simple_complete(p).0 {
        let legs = stokes_graph(p, r.phase)?;
        let saddles = saddle_scan(p, (0.0, std::f64::consts::TAU), r.n_phases)?;
        report.insert("saddles".into(), to_json(&saddles));
        report.insert(
            "legs".into(),
            Value::Array(
                legs.iter()
                    .map(|l| {
                        json!({
                            "from": to_json(&l.from),
                            "direction": l.direction,
                            "measured_direction": l.measured_direction,
                            "termination": to_json(&l.trajectory.termination),
                            "samples": l.trajectory.path.len(),
                        })
                    })
                    .collect(),
            ),
        );
        legs
    } else {
        report.insert("graph_note".into(), json!("Stokes graph omitted: zeros of Q_0 are not all simple"));
        Vec::new()
    };
    out.write_json("stokes.json", &Value::Object(report))?;
    out.write("stokes.svg", &stokes_svg(p, &legs))
}

fn cmd_borel_continue(p: &Potential, sp: &SpectralPoint, r: &Resolved, out: &mut Outputs) -> Result<()> {
    let tau = r.tau.unwrap_or(1.0);
    let g = continue_ray(p, sp, r.phase, tau, &continue_opts(r))?;
    out.write("grid.csv", &g.to_csv())?;
    out.write_json(
        "grid.json",
        &json!({
            "alpha": g.alpha,
            "tau": g.tau,
            "orders": g.orders.len(),
            "intervals": g.m(),
            "bound_fit": to_json(&g.bound_fit),
            "envelope": to_json(&g.envelope),
            "self_consistency": g.self_consistency,
            "phi_total_end": to_json(&g.phi_total[g.m()]),
        }),
    )
}

fn cmd_borel_sing(p: &Potential, sp: &SpectralPoint, r: &Resolved, out: &mut Outputs) -> Result<()> {
    let predicted = predict_singularities_with(p, sp, r.radius, r.depth)?;
    let germ = borel_germ(p, sp, r.germ_len)?;
    let detected = detect_pade(&germ)?;
    let matches = match_singularities(&predicted, &detected, 2e-2);
    let rep = SingularityReport { predicted, detected, matches };
    let summary: Vec<Value> = rep
        .predicted
        .iter()
        .map(|c| {
            json!({
                "xi": to_json(&c.central_charge),
                "status": to_json(&c.status),
                "terminal": to_json(&c.terminal.location),
                "is_trajectory": c.is_trajectory,
            })
        })
        .collect();
    out.write_json(
        "singularities.json",
        &json!({
            "predicted": summary,
            "detected": to_json(&rep.detected),
            "matches": to_json(&rep.matches),
        }),
    )
}

fn cmd_resum(p: &Potential, sp: &SpectralPoint, r: &Resolved, out: &mut Outputs) -> Result<()> {
    let hs: Vec<C64> = r.hbar.iter().map(|h| C64::from_polar(*h, 0.0)).collect();
    let opt = resum_opts(r);
    let mut csv = String::from("hbar,re,im,tail_bound\n");
    let report = match &r.path {
        Some(path) if !path.is_empty() => {
            let sols = resum_wkb(p, sp, path, r.phase, &hs, &opt)?;
            for s in &sols {
                csv.push_str(&format!("{},{:e},{:e},{:e}\n", s.psi.hbar.re, s.psi.value.re, s.psi.value.im, s.psi.tail_bound));
            }
            json!({ "quantity": "psi", "x0": to_json(&sp.x), "solutions": to_json(&sols) })
        }
        _ => {
            let vals = resum_f(p, sp, r.phase, &hs, &opt)?;
            for v in &vals {
                csv.push_str(&format!("{},{:e},{:e},{:e}\n", v.hbar.re, v.value.re, v.value.im, v.tail_bound));
            }
            json!({ "quantity": "f", "x": to_json(&sp.x), "values": to_json(&vals) })
        }
    };
    out.write_json("resum.json", &report)?;
    out.write("resum.csv", &csv)
}

fn cmd_jump(p: &Potential, sp: &SpectralPoint, r: &Resolved, out: &mut Outputs) -> Result<()> {
    let rep = jump_fit(p, sp, r.phase, &r.hbar, &resum_opts(r))?;
    out.write_json("jump.json", &to_json(&rep))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check { name, pass: false, detail: e.to_string() },
    }
}

fn selftest_checks() -> Vec<Check> {
    let c = |re: f64| C64::new(re, 0.0);
    vec![
        check("motzkin_first_ten", || {
            let m = motzkin_bound(9);
            Ok((m == vec![1, 1, 2, 4, 9, 21, 51, 127, 323, 835], format!("{m:?}")))
        }),
        check("borel_of_factorial_series", || {
            let mut a = vec![0.0];
            a.extend((1..12).map(|k| factorial(k - 1)));
            let b = borel_transform(&HbarSeries::from_real(&a)?)?;
            let err = b.coeffs.iter().map(|v| (v - c(1.0)).norm()).fold(0.0, f64::max);
            Ok((err < 1e-12, format!("max deviation from 1: {err:.1e}")))
        }),
        check("laplace_of_one", || {
            let fit = crate::borel_engine::BoundFit { c: 1.0, k_exp: 0.0 };
            let v = laplace_samples(&[c(1.0); 401], 0.05, 0.0, fit, c(0.1))?;
            let err = (v.value - c(0.1)).norm();
            Ok((err < 1e-12 && v.tail_bound < 1e-8, format!("error {err:.1e}, tail {:.1e}", v.tail_bound)))
        }),
        check("constant_potential_is_trivial", || {
            let p = Potential::constant_one();
            let sp = SpectralPoint::new(c(0.0), 1);
            let f = riccati_data(&p, 6).eval(&sp)?.f;
            let g = continue_ray(&p, &sp, 0.3, 1.0, &ContinueOptions { k: 4, m: 64, ..Default::default() })?;
            let m = f.iter().chain(g.phi_total.iter()).map(|v| v.norm()).fold(0.0, f64::max);
            Ok((m == 0.0, format!("max |value| {m:.1e}")))
        }),
        check("airy_low_orders", || {
            let p = Potential::airy();
            let y = wkb_recursion(&p, &SpectralPoint::new(c(1.0), 1), 2)?.orders;
            let err = (y[1] - c(0.25)).norm().max((y[2] + c(5.0 / 32.0)).norm());
            Ok((err < 1e-12, format!("y1 = {}, y2 = {}", y[1], y[2])))
        }),
        check("airy_central_charge", || {
            let p = Potential::airy();
            let sp = SpectralPoint::new(c(1.0), 1);
            let t = crate::trajectories::trace(&p, &sp, std::f64::consts::PI, 1e3)?;
            let z = t.hit().map(|h| h.1).unwrap_or(C64::new(f64::NAN, 0.0));
            Ok(((z + c(4.0 / 3.0)).norm() < 1e-4, format!("Z = {z}")))
        }),
        check("ode_exponential", || {
            let p = Potential::constant_one();
            let (v, _) = ode_oracle(&p, c(0.0), c(1.0), c(0.5), (c(1.0), c(-2.0)))?;
            let err = (v / (-2.0f64).exp() - c(1.0)).norm();
            Ok((err < 1e-9, format!("relative error {err:.1e}")))
        }),
        check("liouville_sheet_flip", || {
            let p = Potential::weber();
            let sp = SpectralPoint::new(c(2.0), 1);
            let a = liouville(&p, &sp)?;
            let b = liouville(&p, &sp.flip())?;
            Ok(((a + b).norm() < 1e-15, format!("y0 = {a}, flipped {b}")))
        }),
    ]
}

fn cmd_selftest(out: &mut Outputs) -> Result<bool> {
    let checks = selftest_checks();
    let all = checks.iter().all(|c| c.pass);
    let v: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
        .collect();
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    out.write_json("selftest.json", &json!({ "checks": v, "all_pass": all }))?;
    Ok(all)
}

fn cmd_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Classify(_) => "classify",
        Cmd::Coeffs(_) => "coeffs",
        Cmd::Stokes(_) => "stokes",
        Cmd::BorelContinue(_) => "borel-continue",
        Cmd::BorelSing(_) => "borel-sing",
        Cmd::Resum(_) => "resum",
        Cmd::Jump(_) => "jump",
        Cmd::Selftest(_) => "selftest",
    }
}

fn execute(cmd: &Cmd) -> Result<bool> {
    let name = cmd_name(cmd);
    if let Cmd::Selftest(a) = cmd {
        let r = resolve(&Params::default(), &a.flags, name)?;
        let mut out = Outputs::new(&a.flags.out)?;
        let ok = cmd_selftest(&mut out)?;
        write_manifest(&mut out, name, None, &r)?;
        return Ok(ok);
    }
    let a = match cmd {
        Cmd::Classify(a)
        | Cmd::Coeffs(a)
        | Cmd::Stokes(a)
        | Cmd::BorelContinue(a)
        | Cmd::BorelSing(a)
        | Cmd::Resum(a)
        | Cmd::Jump(a) => a,
        Cmd::Selftest(_) => unreachable!(),
    };
    let text = std::fs::read_to_string(&a.spec)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", a.spec.display())))?;
    let spec = ProblemSpec::parse(&text)?;
    let r = resolve(&spec.params, &a.flags, name)?;
    let p = spec.potential()?;
    let mut out = Outputs::new(&a.flags.out)?;
    match cmd {
        Cmd::Classify(_) => cmd_classify(&p, &mut out)?,
        Cmd::Coeffs(_) => cmd_coeffs(&p, &basepoint(&spec)?, &r, &mut out)?,
        Cmd::Stokes(_) => cmd_stokes(&p, &spec, &r, &mut out)?,
        Cmd::BorelContinue(_) => cmd_borel_continue(&p, &basepoint(&spec)?, &r, &mut out)?,
        Cmd::BorelSing(_) => cmd_borel_sing(&p, &basepoint(&spec)?, &r, &mut out)?,
        Cmd::Resum(_) => cmd_resum(&p, &basepoint(&spec)?, &r, &mut out)?,
        Cmd::Jump(_) => cmd_jump(&p, &basepoint(&spec)?, &r, &mut out)?,
        Cmd::Selftest(_) => unreachable!(),
    }
    write_manifest(&mut out, name, Some(&text), &r)?;
    Ok(true)
}

fn write_manifest(out: &mut Outputs, cmd: &str, input: Option<&str>, r: &Resolved) -> Result<()> {
    let files: Vec<Value> = out.files.iter().map(|(f, h)| json!({ "file": f, "sha256": h })).collect();
    let manifest = json!({
        "command": cmd,
        "input_sha256": input.map(|t| sha256(t.as_bytes())),
        "parameters": to_json(r),
        "seed": r.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": files,
    });
    let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Numerical(e.to_string()))?;
    s.push('\n');
    std::fs::write(out.dir.join("manifest.json"), s).map_err(|e| Error::Numerical(e.to_string()))
}

/// Parses argv (including the program name) and runs; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.cmd) {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input() {
                2
            } else {
                3
            }
        }
    }
}
