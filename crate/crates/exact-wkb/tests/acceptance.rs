//! Acceptance run: one PASS/FAIL line per criterion, each against an
//! oracle that does not go through the code path under test.

use exact_wkb::borel_engine::{continue_ray, detect_pade, motzkin_bound, BorelGrid, ContinueOptions};
use exact_wkb::hbar_series::{borel_transform, HbarSeries};
use exact_wkb::potential::Potential;
use exact_wkb::resummation::{jump_fit, ode_oracle, one_sided_limits, resum_wkb, ResumOptions};
use exact_wkb::spectral::SpectralPoint;
use exact_wkb::trajectories::{saddle_scan, stokes_graph, Termination};
use exact_wkb::wkb::{log_slope, riccati_data, riccati_residual_coeffs, schrodinger_residual_coeffs, wkb_recursion};
use exact_wkb::C64;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn wrap(f: impl FnOnce() -> Result<Outcome, String>) -> Outcome {
    f().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") })
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let t0 = Instant::now();
    let mut o = f();
    let dt = t0.elapsed();
    if let Some(lim) = limit {
        if dt > lim {
            o.pass = false;
        }
        o.detail = format!("{}; {:.2}s (limit {}s)", o.detail, dt.as_secs_f64(), lim.as_secs());
    } else {
        o.detail = format!("{}; {:.2}s", o.detail, dt.as_secs_f64());
    }
    o
}

fn s(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// y₁ = 1/(4x), y₂ = −5/(32x^{5/2}) for Q = x on the principal sheet.
fn criterion_1() -> Outcome {
    wrap(|| {
        let p = Potential::airy();
        let mut worst = 0.0f64;
        for x in [1.0f64, 2.0] {
            let y = wkb_recursion(&p, &SpectralPoint::new(c(x), 1), 2).map_err(s)?.orders;
            worst = worst.max((y[1] - c(0.25 / x)).norm());
            worst = worst.max((y[2] - c(-5.0 / (32.0 * x.powf(2.5)))).norm());
        }
        Ok(Outcome { pass: worst < 1e-12, detail: format!("max deviation {worst:.1e} (tol 1e-12)") })
    })
}

fn criterion_2() -> Outcome {
    wrap(|| {
        let hbars: Vec<f64> = (0..9).map(|i| 10f64.powf(-3.0 + 2.0 * i as f64 / 8.0)).collect();
        let mut worst = 0.0f64;
        let mut floor = 0.0f64;
        let mut lines = Vec::new();
        for (name, p, x) in [("airy", Potential::airy(), 1.5), ("weber", Potential::weber(), 2.0)] {
            let sp = SpectralPoint::new(c(x), 1);
            for n in [4usize, 8] {
                let sr = schrodinger_residual_coeffs(&p, &sp, n).map_err(s)?;
                // Ŷ truncated at ħ^N means f̂ truncated at f_{N−1}
                let rr = riccati_residual_coeffs(&p, &sp, n - 1).map_err(s)?;
                // orders ≤ N vanish identically; f64 leaves them at roundoff, which would swamp
                // an O(ħ^{N+1}) tail at small ħ, so they are checked separately
                let low = sr[..=n].iter().chain(&rr[..=n]).map(|v| v.norm()).fold(0.0, f64::max);
                floor = floor.max(low);
                let a = log_slope(&sr, n + 1, &hbars);
                let b = log_slope(&rr, n + 1, &hbars);
                worst = worst.max((a - (n + 1) as f64).abs()).max((b - (n + 1) as f64).abs());
                lines.push(format!("{name} N={n}: {a:.3}/{b:.3}"));
            }
        }
        Ok(Outcome {
            pass: worst <= 0.2 && floor < 1e-12,
            detail: format!(
                "slopes (Schrödinger/Riccati) {}; max |slope − (N+1)| {worst:.3}; orders ≤ N at most {floor:.1e}",
                lines.join(", ")
            ),
        })
    })
}

/// Taylor germ of B[f̂] straight from the f-coefficients: Σ f_{k+1} t^k/k!.
fn germ_oracle(p: &Potential, sp: &SpectralPoint, n: usize) -> Result<HbarSeries, String> {
    let f = riccati_data(p, n).eval(sp).map_err(s)?.f;
    let mut a = vec![c(0.0)];
    a.extend(f);
    HbarSeries::new(a).map_err(s)
}

fn criterion_3(grids: &mut Vec<(String, BorelGrid)>) -> Outcome {
    wrap(|| {
        let cases = [
            ("airy x=1", Potential::airy(), SpectralPoint::new(c(1.0), 1), 0.0, 4.0 / 3.0),
            ("airy x=1+i sheet -", Potential::airy(), SpectralPoint::new(C64::new(1.0, 1.0), -1), 0.5, 1.0),
            ("weber x=2", Potential::weber(), SpectralPoint::new(c(2.0), 1), 0.0, 2.147),
        ];
        let mut worst = 0.0f64;
        let mut lines = Vec::new();
        for (name, p, sp, alpha, tau) in cases {
            let g = continue_ray(&p, &sp, alpha, tau, &ContinueOptions::default()).map_err(s)?;
            let germ = borel_transform(&germ_oracle(&p, &sp, 41)?).map_err(s)?;
            let jmax = g.m() / 10;
            let scale = (0..=jmax).map(|j| germ.eval(g.t(j)).norm()).fold(0.0, f64::max);
            let err = (0..=jmax).map(|j| (g.phi_total[j] - germ.eval(g.t(j))).norm()).fold(0.0, f64::max) / scale;
            worst = worst.max(err);
            lines.push(format!("{name}: {err:.1e}"));
            grids.push((name.to_string(), g));
        }
        Ok(Outcome { pass: worst < 1e-6, detail: format!("relative germ error {} (tol 1e-6)", lines.join(", ")) })
    })
}

fn criterion_4() -> Outcome {
    wrap(|| {
        // antiderivative oracles: ∫ 2√x = (4/3)x^{3/2}; ∫ 2√(x²−1) = x√(x²−1) − arcosh x
        let airy_xi = -4.0 / 3.0;
        let weber_xi = -(2.0 * 3f64.sqrt() - (2.0 + 3f64.sqrt()).ln());
        let mut detail = Vec::new();
        let mut pass = true;
        for (name, p, x, xi) in [("airy", Potential::airy(), 1.0, airy_xi), ("weber", Potential::weber(), 2.0, weber_xi)] {
            let sp = SpectralPoint::new(c(x), 1);
            let germ = borel_transform(&germ_oracle(&p, &sp, 25)?).map_err(s)?;
            let poles = detect_pade(&germ).map_err(s)?;
            let nearest = poles
                .iter()
                .min_by(|a, b| a.pole.norm().partial_cmp(&b.pole.norm()).unwrap())
                .ok_or("no stable pole")?;
            let d = (nearest.pole - c(xi)).norm();
            pass &= d < 2e-2;
            detail.push(format!("{name}: nearest pole {:.5} vs {xi:.5}, distance {d:.1e}", nearest.pole));
        }
        Ok(Outcome { pass, detail: format!("{} (tol 2e-2)", detail.join("; ")) })
    })
}

fn criterion_5() -> Outcome {
    wrap(|| {
        let legs = stokes_graph(&Potential::airy(), 0.0).map_err(s)?;
        let expected = [0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0];
        let mut dir_err = 0.0f64;
        for e in expected {
            let best = legs
                .iter()
                .map(|l| {
                    let d = (l.measured_direction - e).rem_euclid(2.0 * PI);
                    d.min(2.0 * PI - d)
                })
                .fold(f64::INFINITY, f64::min);
            dir_err = dir_err.max(best);
        }
        let escape = legs
            .iter()
            .all(|l| matches!(l.trajectory.termination, Termination::EntersPole { .. }));
        let saddles = saddle_scan(&Potential::weber(), (0.0, 2.0 * PI), 64).map_err(s)?;
        let hit = saddles
            .iter()
            .find(|s| (s.alpha - PI / 2.0).abs() < 1e-4)
            .map(|s| (s.alpha, s.central_charge));
        let pass = legs.len() == 3 && dir_err < 1e-3 && hit.is_some() && escape;
        let weber = match hit {
            Some((a, z)) => format!("weber saddle at α = {a:.7}, Z = {z:.6} (oracle iπ)"),
            None => "weber saddle at π/2 not found".into(),
        };
        Ok(Outcome {
            pass,
            detail: format!("airy: {} legs, max direction error {dir_err:.1e} rad; {weber}", legs.len()),
        })
    })
}

fn criterion_6(grids: &mut Vec<(String, BorelGrid)>) -> Outcome {
    wrap(|| {
        let extra = [
            ("airy x=1 α=π/2", Potential::airy(), SpectralPoint::new(c(1.0), 1), PI / 2.0, 1.0),
            ("weber x=2 α=π/2", Potential::weber(), SpectralPoint::new(c(2.0), 1), PI / 2.0, 1.0),
            ("weber x=0.5i α=0", Potential::weber(), SpectralPoint::new(C64::new(0.0, 0.5), 1), 0.0, 1.0),
        ];
        for (name, p, sp, alpha, tau) in extra {
            let g = continue_ray(&p, &sp, alpha, tau, &ContinueOptions::default()).map_err(s)?;
            grids.push((name.to_string(), g));
        }
        let mut violations = 0;
        let mut checked = 0;
        let mut total_bad = 0;
        let mut worst = 0.0f64;
        for (_, g) in grids.iter() {
            let e = &g.envelope;
            violations += e.violations;
            checked += e.checked;
            worst = worst.max(e.worst_ratio);
            let rate = e.m * e.c + e.l;
            total_bad += g
                .phi_total
                .iter()
                .enumerate()
                .filter(|(j, v)| v.norm() > e.c * (rate * g.r(*j)).exp() * (1.0 + 1e-12))
                .count();
        }
        Ok(Outcome {
            pass: violations == 0 && total_bad == 0 && checked > 0,
            detail: format!(
                "{} grids, {checked} order samples, {violations} order violations, {total_bad} total-envelope violations, worst ratio {worst:.3}",
                grids.len()
            ),
        })
    })
}

fn criterion_7() -> Outcome {
    let m = motzkin_bound(20);
    let listed = m[..10] == [1, 1, 2, 4, 9, 21, 51, 127, 323, 835];
    // ĝ = 1 + z²ĝ² + zĝ, coefficient of z^k
    let mut ok = true;
    for k in 0..=20usize {
        let mut rhs: u128 = if k == 0 { 1 } else { 0 };
        if k >= 1 {
            rhs += m[k - 1];
        }
        if k >= 2 {
            rhs += (0..=k - 2).map(|i| m[i] * m[k - 2 - i]).sum::<u128>();
        }
        ok &= rhs == m[k];
    }
    Outcome {
        pass: listed && ok,
        detail: format!("first ten {:?}; generating identity through order 20: {ok}", &m[..10]),
    }
}

fn criterion_8() -> Outcome {
    wrap(|| {
        let p = Potential::airy();
        let sp = SpectralPoint::new(c(1.0), 1);
        let hs = [c(0.1), c(0.05), c(0.02)];
        let sols = resum_wkb(&p, &sp, &[c(2.0)], 0.0, &hs, &ResumOptions::default()).map_err(s)?;
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for sol in &sols {
            // propagate the resummed Cauchy data at x = 2 back to the anchor x = 1, where ψ = 1
            let (v, _) = ode_oracle(&p, c(2.0), c(1.0), sol.psi.hbar, (sol.psi.value, sol.dpsi)).map_err(s)?;
            let err = (c(1.0) / v - c(1.0)).norm();
            worst = worst.max(err);
            parts.push(format!("ħ={}: {err:.1e}", sol.psi.hbar.re));
        }
        Ok(Outcome { pass: worst <= 1e-4, detail: format!("|ψ_resum/ψ_ode − 1| {} (tol 1e-4)", parts.join(", ")) })
    })
}

fn criterion_9() -> Outcome {
    wrap(|| {
        let p = Potential::airy();
        let sp = SpectralPoint::new(c(1.0), 1);
        let hb: Vec<f64> = (0..6).map(|i| 0.02 * 5f64.powf(i as f64 / 5.0)).collect();
        let rep = jump_fit(&p, &sp, PI, &hb, &ResumOptions::default()).map_err(s)?;
        let a = rep.fitted_exponent.ok_or("no exponent fitted")?;
        let oracle = 4.0 / 3.0;
        let rel = (a - oracle).abs() / oracle;
        Ok(Outcome { pass: rel <= 0.05, detail: format!("fitted exponent {a:.5} vs 4/3, relative error {rel:.1e} (tol 5%)") })
    })
}

fn criterion_10() -> Outcome {
    wrap(|| {
        let p = Potential::airy();
        let sp = SpectralPoint::new(c(1.0), 1);
        let deltas = [0.1, 0.15, 0.2, 0.25, 0.3];
        let opt = ContinueOptions::default();
        // endpoint ρ = 1.5|ξ| lies beyond the singularity on the Stokes ray
        let rho = 1.5 * 4.0 / 3.0;
        let (l0, r0) = one_sided_limits(&p, &sp, 0.0, rho, &deltas, &opt).map_err(s)?;
        let (l1, r1) = one_sided_limits(&p, &sp, PI, rho, &deltas, &opt).map_err(s)?;
        let same = (l0 - r0).norm();
        let split = (l1 - r1).norm();
        Ok(Outcome {
            pass: same < 1e-5 && split > 1e-4,
            detail: format!("homotopic paths differ by {same:.1e} (tol 1e-5); paths around ξ = −4/3 differ by {split:.2e} (need > 1e-4)"),
        })
    })
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture or filters; only run when not filtered out
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let mut grids = Vec::new();
    let sec = |n| Some(Duration::from_secs(n));
    let results = vec![
        (1, "WKB recursion exactness", timed(sec(1), criterion_1)),
        (2, "residual slopes", timed(sec(10), criterion_2)),
        (3, "germ agreement", timed(sec(30), || criterion_3(&mut grids))),
        (4, "singularity match", timed(sec(60), criterion_4)),
        (5, "Stokes geometry", timed(sec(30), criterion_5)),
        (6, "order envelope", timed(None, || criterion_6(&mut grids))),
        (7, "Motzkin sequence", timed(None, criterion_7)),
        (8, "resummation vs ODE", timed(sec(120), criterion_8)),
        (9, "jump exponent", timed(sec(120), criterion_9)),
        (10, "homotopy invariance", timed(None, criterion_10)),
    ];
    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
