//! The ħ-polynomial potential Q(x, ħ) = Σ Q_k(x) ħ^k and the critical
//! structure of φ₀ = Q₀ dx² on the Riemann sphere.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::poly::{self, RationalFn};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Relative tolerance for grouping numerically split multiple roots.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    q: Vec<RationalFn>,
    q0_prime: RationalFn,
    zeros: Vec<(C64, usize)>,
    poles: Vec<(C64, usize)>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalSpec {
    pub num: Vec<C64>,
    #[serde(default)]
    pub den: Option<Vec<C64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(rename = "Q")]
    pub q: Vec<RationalSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Finite(C64),
    Infinity,
}

impl Location {
    pub fn finite(&self) -> Option<C64> {
        match self {
            Location::Finite(z) => Some(*z),
            Location::Infinity => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Zero,
    Pole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    TurningPoint,
    SimpleTurningPoint,
    InfiniteCriticalPoint,
    VirtualZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Location,
    pub kind: Kind,
    pub order: u32,
    pub parity: Parity,
    pub labels: Vec<Label>,
}

impl CriticalPoint {
    fn new(location: Location, kind: Kind, order: u32) -> Self {
        let parity = if order % 2 == 0 { Parity::Even } else { Parity::Odd };
        let mut labels = Vec::new();
        match kind {
            Kind::Zero => {
                labels.push(Label::TurningPoint);
                if order == 1 {
                    labels.push(Label::SimpleTurningPoint);
                }
            }
            Kind::Pole => {
                if order == 1 {
                    labels.push(Label::TurningPoint);
                } else {
                    labels.push(Label::InfiniteCriticalPoint);
                    if order % 2 == 1 {
                        labels.push(Label::VirtualZero);
                    }
                }
            }
        }
        CriticalPoint { location, kind, order, parity, labels }
    }

    pub fn is_turning_point(&self) -> bool {
        self.labels.contains(&Label::TurningPoint)
    }

    /// Zeros and odd-order poles: points where √Q₀ branches.
    pub fn is_branch_point(&self) -> bool {
        self.kind == Kind::Zero && self.order % 2 == 1 || self.kind == Kind::Pole && self.order % 2 == 1
    }
}

fn reversed(p: &[C64]) -> Vec<C64> {
    let mut v = poly::trim(p);
    v.reverse();
    v
}

impl Potential {
    pub fn new(q: Vec<RationalFn>) -> Result<Self> {
        if q.is_empty() || q[0].is_zero() {
            return Err(Error::Input("Q_0 must not be identically zero".into()));
        }
        let q0_prime = q[0].deriv();
        let zeros = poly::cluster_roots(&q[0].zeros(), ROOT_CLUSTER_TOL);
        let poles = poly::cluster_roots(&q[0].poles(), ROOT_CLUSTER_TOL);
        let p = Potential { q, q0_prime, zeros, poles };
        p.check_pole_orders()?;
        Ok(p)
    }

    pub fn from_spec(spec: &PotentialSpec) -> Result<Self> {
        let q = spec
            .q
            .iter()
            .map(|r| {
                RationalFn::new(
                    r.num.clone(),
                    r.den.clone().unwrap_or_else(|| vec![C64::new(1.0, 0.0)]),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Potential::new(q)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: PotentialSpec = serde_json::from_str(s)
            .map_err(|e| Error::Input(format!("line {} column {}: {}", e.line(), e.column(), e)))?;
        Potential::from_spec(&spec)
    }

    /// Polynomial potential from real ħ-ordered coefficient lists.
    pub fn polynomial(qs: &[&[f64]]) -> Result<Self> {
        Potential::new(
            qs.iter()
                .map(|c| RationalFn::poly(c.iter().map(|&x| C64::new(x, 0.0)).collect()))
                .collect(),
        )
    }

    pub fn airy() -> Self {
        Potential::polynomial(&[&[0.0, 1.0]]).unwrap()
    }

    pub fn weber() -> Self {
        Potential::polynomial(&[&[-1.0, 0.0, 1.0]]).unwrap()
    }

    pub fn constant_one() -> Self {
        Potential::polynomial(&[&[1.0]]).unwrap()
    }

    pub fn coefficients(&self) -> &[RationalFn] {
        &self.q
    }

    pub fn q0_prime(&self, x: C64) -> C64 {
        self.q0_prime.eval(x)
    }

    pub fn hbar_degree(&self) -> usize {
        self.q.len() - 1
    }

    /// Q_k, zero beyond the stored degree.
    pub fn qk(&self, k: usize) -> Option<&RationalFn> {
        self.q.get(k)
    }

    pub fn q0(&self, x: C64) -> C64 {
        self.q[0].eval(x)
    }

    pub fn q_jet(&self, k: usize, x: &Jet) -> Jet {
        match self.q.get(k) {
            Some(r) if !r.is_zero() => r.eval_jet(x),
            _ => Jet::constant(C64::new(0.0, 0.0), x.len()),
        }
    }

    pub fn conj(&self) -> Potential {
        Potential::new(self.q.iter().map(|r| r.conj()).collect()).expect("conjugate of a valid potential")
    }

    fn check_pole_orders(&self) -> Result<()> {
        let q0 = &self.q[0];
        let inf0 = q0.num_degree() as i64 - q0.den_degree() as i64;
        for (k, qk) in self.q.iter().enumerate().skip(1) {
            if qk.is_zero() {
                continue;
            }
            for (z, m) in poly::cluster_roots(&qk.poles(), ROOT_CLUSTER_TOL) {
                let ord0 = -q0.order_at(z, 1e-8);
                if ord0 < m as i64 {
                    return Err(Error::Input(format!(
                        "Q_{k} has a pole of order {m} at {z} where Q_0 has pole order {}",
                        ord0.max(0)
                    )));
                }
            }
            let infk = qk.num_degree() as i64 - qk.den_degree() as i64;
            if infk > inf0 {
                return Err(Error::Input(format!(
                    "Q_{k} grows faster than Q_0 at infinity"
                )));
            }
        }
        Ok(())
    }

    /// Finite zeros of Q₀ with multiplicity.
    pub fn zeros(&self) -> Vec<(C64, usize)> {
        self.zeros.clone()
    }

    /// Finite poles of Q₀ with order.
    pub fn poles(&self) -> Vec<(C64, usize)> {
        self.poles.clone()
    }

    /// Pole order of φ₀ at ∞ in the chart u = 1/x (negative: zero order).
    pub fn order_at_infinity(&self) -> i64 {
        self.q[0].num_degree() as i64 - self.q[0].den_degree() as i64 + 4
    }

    /// Finite transition points: zeros and simple poles of φ₀.
    pub fn transition_points(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.zeros().into_iter().map(|z| z.0).collect();
        v.extend(self.poles().into_iter().filter(|p| p.1 == 1).map(|p| p.0));
        v
    }

    /// Finite transition points with their kind and order.
    pub fn transition_data(&self) -> Vec<(C64, Kind, usize)> {
        let mut v: Vec<(C64, Kind, usize)> =
            self.zeros().into_iter().map(|(z, m)| (z, Kind::Zero, m)).collect();
        v.extend(self.poles().into_iter().filter(|p| p.1 == 1).map(|(z, m)| (z, Kind::Pole, m)));
        v
    }

    /// Finite branch points of Σ: zeros and odd-order poles.
    pub fn branch_points(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.zeros().into_iter().filter(|z| z.1 % 2 == 1).map(|z| z.0).collect();
        v.extend(self.poles().into_iter().filter(|p| p.1 % 2 == 1).map(|p| p.0));
        v
    }

    /// All finite critical points (zeros and poles of Q₀).
    pub fn finite_critical(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.zeros().into_iter().map(|z| z.0).collect();
        v.extend(self.poles().into_iter().map(|p| p.0));
        v
    }
}

/// All zeros and poles of φ₀ on the sphere, including ∞.
pub fn classify(p: &Potential) -> Result<Vec<CriticalPoint>> {
    let zeros = p.zeros();
    let poles = p.poles();
    for (z, _) in &zeros {
        for (q, _) in &poles {
            if (z - q).norm() <= 1e-8 {
                return Err(Error::Input(format!(
                    "divisor not minimal at desk tolerance: zero {z} and pole {q} coincide"
                )));
            }
        }
    }
    let mut out: Vec<CriticalPoint> = zeros
        .iter()
        .map(|(z, m)| CriticalPoint::new(Location::Finite(*z), Kind::Zero, *m as u32))
        .collect();
    out.extend(
        poles
            .iter()
            .map(|(z, m)| CriticalPoint::new(Location::Finite(*z), Kind::Pole, *m as u32)),
    );
    let inf = p.order_at_infinity();
    if inf > 0 {
        out.push(CriticalPoint::new(Location::Infinity, Kind::Pole, inf as u32));
    } else if inf < 0 {
        out.push(CriticalPoint::new(Location::Infinity, Kind::Zero, (-inf) as u32));
    }
    let zsum: i64 = out.iter().filter(|c| c.kind == Kind::Zero).map(|c| c.order as i64).sum();
    let psum: i64 = out.iter().filter(|c| c.kind == Kind::Pole).map(|c| c.order as i64).sum();
    if zsum - psum != -4 {
        return Err(Error::Numerical(format!(
            "degree bookkeeping failed: zeros {zsum} minus poles {psum} != -4"
        )));
    }
    Ok(out)
}

/// Res² of φ₀ at an even-order pole; 0 for odd-order poles.
pub fn quadratic_residue(p: &Potential, cp: &CriticalPoint) -> Result<C64> {
    if cp.kind != Kind::Pole {
        return Err(Error::Input("quadratic residue is defined at poles only".into()));
    }
    let m = cp.order as usize;
    if m % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let q0 = &p.q[0];
    // φ₀ = g(w) w^{-m} dw² in the local coordinate w; g is regular and nonzero at w = 0
    let (g_num, g_den, w0) = match cp.location {
        Location::Finite(x0) => {
            let mut den = q0.den.clone();
            for _ in 0..m {
                den = poly::deflate(&den, x0);
            }
            (q0.num.clone(), den, x0)
        }
        Location::Infinity => (reversed(&q0.num), reversed(&q0.den), C64::new(0.0, 0.0)),
    };
    let len = m / 2 + 1;
    let w = Jet::variable(w0, len);
    let g = Jet::eval_poly(&g_num, &w).div(&Jet::eval_poly(&g_den, &w));
    if m == 2 {
        return Ok(g.value());
    }
    let sg = g.sqrt_with(g.value().sqrt());
    let b = sg.0[m / 2 - 1];
    Ok(b * b)
}

/// (simple, complete): all zeros simple; simple and no simple poles.
pub fn is_simple_complete(p: &Potential) -> (bool, bool) {
    let cps = match classify(p) {
        Ok(c) => c,
        Err(_) => return (false, false),
    };
    let simple = cps.iter().filter(|c| c.kind == Kind::Zero).all(|c| c.order == 1);
    let simple_pole = cps.iter().any(|c| c.kind == Kind::Pole && c.order == 1);
    (simple, simple && !simple_pole)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn airy_classification() {
        let cps = classify(&Potential::airy()).unwrap();
        assert_eq!(cps.len(), 2);
        let z = cps.iter().find(|c| c.kind == Kind::Zero).unwrap();
        assert!(z.labels.contains(&Label::SimpleTurningPoint));
        let inf = cps.iter().find(|c| c.location == Location::Infinity).unwrap();
        assert_eq!(inf.order, 5);
        assert!(inf.labels.contains(&Label::VirtualZero));
    }

    #[test]
    fn constant_has_order_four_at_infinity() {
        let cps = classify(&Potential::constant_one()).unwrap();
        assert_eq!(cps.len(), 1);
        assert_eq!(cps[0].order, 4);
        assert_eq!(cps[0].parity, Parity::Even);
    }

    #[test]
    fn residue_of_double_pole() {
        let p = Potential::new(vec![RationalFn::new(vec![c(4.0)], vec![c(0.0), c(0.0), c(1.0)]).unwrap()]).unwrap();
        let cps = classify(&p).unwrap();
        let pole = cps.iter().find(|c| c.location == Location::Finite(c0())).unwrap();
        assert!((quadratic_residue(&p, pole).unwrap() - c(4.0)).norm() < 1e-12);
    }

    fn c0() -> C64 {
        C64::new(0.0, 0.0)
    }

    #[test]
    fn residue_of_quartic_pole() {
        // (1/x² + 3/x)² = (1 + 3x)² / x⁴
        let p = Potential::new(vec![RationalFn::new(
            vec![c(1.0), c(6.0), c(9.0)],
            vec![c0(), c0(), c0(), c0(), c(1.0)],
        )
        .unwrap()])
        .unwrap();
        let cps = classify(&p).unwrap();
        let pole = cps.iter().find(|c| c.kind == Kind::Pole && c.order == 4 && c.location != Location::Infinity).unwrap();
        assert!((quadratic_residue(&p, pole).unwrap() - c(9.0)).norm() < 1e-12);
    }

    #[test]
    fn residue_rejects_zero() {
        let p = Potential::airy();
        let cps = classify(&p).unwrap();
        let z = cps.iter().find(|c| c.kind == Kind::Zero).unwrap();
        assert!(quadratic_residue(&p, z).is_err());
    }

    #[test]
    fn simplicity_flags() {
        assert_eq!(is_simple_complete(&Potential::airy()), (true, true));
        let sq = Potential::polynomial(&[&[0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(is_simple_complete(&sq), (false, false));
        let inv = Potential::new(vec![RationalFn::new(vec![c(1.0)], vec![c0(), c(1.0)]).unwrap()]).unwrap();
        assert_eq!(is_simple_complete(&inv), (true, false));
    }

    #[test]
    fn higher_order_pole_assumption_enforced() {
        let q0 = RationalFn::poly(vec![c(0.0), c(1.0)]);
        let q1 = RationalFn::new(vec![c(1.0)], vec![c0(), c(1.0)]).unwrap();
        assert!(Potential::new(vec![q0, q1]).is_err());
    }

    #[test]
    fn json_ingest() {
        let p = Potential::from_json(r#"{"Q":[{"num":[[0,0],[1,0]],"den":[[1,0]]}]}"#).unwrap();
        assert_eq!(p, Potential::airy());
        let e = Potential::from_json(r#"{"Q":[{"num":[[0,0]],"bogus":1}]}"#).unwrap_err();
        assert!(e.is_input());
    }
}
