//! Dense complex polynomials (ascending coefficients) and rational functions.

use crate::error::{Error, Result};
use crate::jet::Jet;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Drops trailing coefficients that are exactly zero (keeps at least one).
pub fn trim(p: &[C64]) -> Vec<C64> {
    let mut v = p.to_vec();
    while v.len() > 1 && *v.last().unwrap() == ZERO {
        v.pop();
    }
    if v.is_empty() {
        v.push(ZERO);
    }
    v
}

pub fn is_zero(p: &[C64]) -> bool {
    p.iter().all(|c| *c == ZERO)
}

/// Degree of a trimmed polynomial; the zero polynomial reports 0.
pub fn degree(p: &[C64]) -> usize {
    trim(p).len() - 1
}

pub fn eval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(ZERO, |acc, c| acc * x + c)
}

pub fn deriv(p: &[C64]) -> Vec<C64> {
    if p.len() <= 1 {
        return vec![ZERO];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&out)
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    let out: Vec<C64> = (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect();
    trim(&out)
}

pub fn scale(a: &[C64], c: C64) -> Vec<C64> {
    trim(&a.iter().map(|x| x * c).collect::<Vec<_>>())
}

/// Divides by (x - r), discarding the remainder.
pub fn deflate(p: &[C64], r: C64) -> Vec<C64> {
    let p = trim(p);
    let n = p.len();
    if n <= 1 {
        return vec![ZERO];
    }
    let mut q = vec![ZERO; n - 1];
    let mut acc = p[n - 1];
    for k in (0..n - 1).rev() {
        q[k] = acc;
        acc = p[k] + acc * r;
    }
    q
}

pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![ONE];
    for r in roots {
        p = mul(&p, &[-r, ONE]);
    }
    p
}

/// Roots via eigenvalues of the companion matrix, followed by one Newton step.
pub fn roots(p: &[C64]) -> Vec<C64> {
    let p = trim(p);
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    let ev = match m.clone().try_schur(1e-15, 10_000) {
        Some(s) => s.eigenvalues().map(|v| v.iter().copied().collect::<Vec<_>>()),
        None => None,
    };
    let mut rs = ev.unwrap_or_else(|| m.diagonal().iter().copied().collect());
    let dp = deriv(&p);
    for r in rs.iter_mut() {
        let d = eval(&dp, *r);
        if d.norm() > 0.0 {
            let step = eval(&p, *r) / d;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    rs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    rs
}

/// Groups numerically split multiple roots. Returns (centre, multiplicity).
pub fn cluster_roots(rs: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &r in rs {
        let scale = 1.0 + r.norm();
        match groups.iter_mut().find(|g| {
            let c = g.iter().sum::<C64>() / g.len() as f64;
            (c - r).norm() <= tol * scale
        }) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| (g.iter().sum::<C64>() / g.len() as f64, g.len()))
        .collect()
}

/// A rational function N(x)/D(x) with complex coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFn {
    pub num: Vec<C64>,
    #[serde(default = "one_poly")]
    pub den: Vec<C64>,
}

fn one_poly() -> Vec<C64> {
    vec![ONE]
}

impl RationalFn {
    /// Builds and gcd-reduces: common roots closer than 1e-10 are cancelled.
    pub fn new(num: Vec<C64>, den: Vec<C64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(Error::Input("non-finite coefficient in rational function".into()));
        }
        let mut den = trim(&den);
        if is_zero(&den) {
            return Err(Error::Input("denominator is identically zero".into()));
        }
        let mut num = trim(&num);
        if is_zero(&num) {
            return Ok(RationalFn { num: vec![ZERO], den: vec![ONE] });
        }
        if degree(&den) > 0 && degree(&num) > 0 {
            let mut dr = roots(&den);
            for r in roots(&num) {
                if let Some(pos) = dr.iter().position(|d| (d - r).norm() <= 1e-10 * (1.0 + r.norm())) {
                    let d = dr.remove(pos);
                    let c = (r + d) * 0.5;
                    num = deflate(&num, c);
                    den = deflate(&den, c);
                }
            }
        }
        let lead = den[den.len() - 1];
        // normalise so the denominator is monic
        num = scale(&num, ONE / lead);
        den = scale(&den, ONE / lead);
        Ok(RationalFn { num, den })
    }

    pub fn poly(num: Vec<C64>) -> Self {
        RationalFn { num: trim(&num), den: vec![ONE] }
    }

    pub fn constant(c: C64) -> Self {
        Self::poly(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        is_zero(&self.num)
    }

    pub fn eval(&self, x: C64) -> C64 {
        eval(&self.num, x) / eval(&self.den, x)
    }

    pub fn eval_jet(&self, x: &Jet) -> Jet {
        Jet::eval_poly(&self.num, x).div(&Jet::eval_poly(&self.den, x))
    }

    pub fn deriv(&self) -> RationalFn {
        let n = add(
            &mul(&deriv(&self.num), &self.den),
            &scale(&mul(&self.num, &deriv(&self.den)), -ONE),
        );
        RationalFn { num: n, den: mul(&self.den, &self.den) }
    }

    pub fn num_degree(&self) -> usize {
        degree(&self.num)
    }

    pub fn den_degree(&self) -> usize {
        degree(&self.den)
    }

    /// Zeros of the numerator (finite zeros of the function).
    pub fn zeros(&self) -> Vec<C64> {
        if self.is_zero() {
            return vec![];
        }
        roots(&self.num)
    }

    pub fn poles(&self) -> Vec<C64> {
        roots(&self.den)
    }

    /// Order of vanishing at x0 (negative for a pole).
    pub fn order_at(&self, x0: C64, tol: f64) -> i64 {
        fn mult(p: &[C64], x0: C64, tol: f64) -> i64 {
            let mut p = trim(p);
            let mut m = 0;
            let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
            while degree(&p) > 0 && eval(&p, x0).norm() <= tol * scale * (1.0 + x0.norm()).powi(degree(&p) as i32) {
                p = deflate(&p, x0);
                m += 1;
            }
            m
        }
        mult(&self.num, x0, tol) - mult(&self.den, x0, tol)
    }

    /// Composes with a polynomial or rational map: returns R(phi(x)).
    pub fn compose(&self, phi: &RationalFn) -> RationalFn {
        // R = N/D with deg N = n, deg D = d; N(P/S) S^k / (D(P/S) S^k), k = max(n, d)
        let k = self.num.len().max(self.den.len()) - 1;
        let lift = |p: &[C64]| -> Vec<C64> {
            let mut acc = vec![ZERO];
            for (i, c) in p.iter().enumerate() {
                let mut term = vec![*c];
                for _ in 0..i {
                    term = mul(&term, &phi.num);
                }
                for _ in i..k {
                    term = mul(&term, &phi.den);
                }
                acc = add(&acc, &term);
            }
            acc
        };
        RationalFn { num: lift(&self.num), den: lift(&self.den) }
    }

    pub fn conj(&self) -> RationalFn {
        RationalFn {
            num: self.num.iter().map(|c| c.conj()).collect(),
            den: self.den.iter().map(|c| c.conj()).collect(),
        }
    }
}
