//! Truncated power series in ħ and in the Borel variable t.
//!
//! The Borel transform here is the one compatible with the Laplace transform
//! `L[t^k] = k! ħ^{k+1}` and with the convolution rule
//! `t^a * t^b = a! b! / (a+b+1)! t^{a+b+1}`: `b_k = a_{k+1} / k!`.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn check_finite(c: &[C64]) -> Result<()> {
    if c.iter().any(|z| !z.is_finite()) {
        return Err(Error::Input("series coefficient is not finite".into()));
    }
    if c.is_empty() {
        return Err(Error::Input("series needs at least one coefficient".into()));
    }
    Ok(())
}

/// ln k! for moderate k, summed directly (exact enough well past 170).
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Σ_{k=0}^{N} a_k ħ^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HbarSeries {
    pub coeffs: Vec<C64>,
}

/// Σ_{k=0}^{N-1} b_k t^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TSeries {
    pub coeffs: Vec<C64>,
}

impl HbarSeries {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        check_finite(&coeffs)?;
        Ok(HbarSeries { coeffs })
    }

    pub fn from_real(c: &[f64]) -> Result<Self> {
        Self::new(c.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, hbar: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * hbar + c)
    }

    pub fn add(&self, o: &HbarSeries) -> HbarSeries {
        let n = self.coeffs.len().min(o.coeffs.len());
        HbarSeries { coeffs: (0..n).map(|k| self.coeffs[k] + o.coeffs[k]).collect() }
    }

    pub fn scale(&self, c: C64) -> HbarSeries {
        HbarSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &HbarSeries) -> HbarSeries {
        let n = self.coeffs.len().min(o.coeffs.len());
        let mut out = vec![ZERO; n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += self.coeffs[i] * o.coeffs[j];
            }
        }
        HbarSeries { coeffs: out }
    }

    /// exp of the series, truncated at the same order.
    pub fn exp(&self) -> HbarSeries {
        let n = self.coeffs.len();
        let mut e = vec![ZERO; n];
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut s = ZERO;
            for j in 1..=k {
                s += self.coeffs[j] * e[k - j] * j as f64;
            }
            e[k] = s / k as f64;
        }
        HbarSeries { coeffs: e }
    }

    /// Index of the smallest term |a_k ħ^k| for k >= 1 and the partial sum up to it.
    pub fn optimal_truncation(&self, hbar: C64) -> (usize, C64) {
        let mut best = (0usize, f64::INFINITY);
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let t = (a * hbar.powu(k as u32)).norm();
            if a.norm() > 0.0 && t < best.1 {
                best = (k, t);
            }
        }
        let kstar = if best.0 == 0 { self.truncation_order() } else { best.0 };
        let sum = (0..=kstar).fold(ZERO, |acc, k| acc + self.coeffs[k] * hbar.powu(k as u32));
        (kstar, sum)
    }
}

impl TSeries {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        check_finite(&coeffs)?;
        Ok(TSeries { coeffs })
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, t: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    pub fn add(&self, o: &TSeries) -> TSeries {
        let n = self.coeffs.len().min(o.coeffs.len());
        TSeries { coeffs: (0..n).map(|k| self.coeffs[k] + o.coeffs[k]).collect() }
    }

    pub fn scale(&self, c: C64) -> TSeries {
        TSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Formal Laplace coefficients: a_{k+1} = b_k k!, with a_0 = 0.
    pub fn formal_laplace(&self) -> HbarSeries {
        let mut a = vec![ZERO];
        a.extend(self.coeffs.iter().enumerate().map(|(k, b)| b * factorial(k)));
        HbarSeries { coeffs: a }
    }
}

/// b_k = a_{k+1}/k!, k = 0..N-1. The constant term is dropped.
pub fn borel_transform(f: &HbarSeries) -> Result<TSeries> {
    let n = f.truncation_order();
    if n < 1 {
        return Err(Error::Input("Borel transform needs truncation order >= 1".into()));
    }
    let b = (0..n)
        .map(|k| f.coeffs[k + 1] / factorial(k))
        .collect();
    Ok(TSeries { coeffs: b })
}

/// Truncated convolution in t: t^a * t^b = a! b!/(a+b+1)! t^{a+b+1}.
pub fn convolve_truncated(f: &TSeries, g: &TSeries) -> Result<TSeries> {
    let n = f.coeffs.len();
    if g.coeffs.len() != n {
        return Err(Error::Input(format!(
            "convolution needs equal truncation orders ({} vs {})",
            n,
            g.coeffs.len()
        )));
    }
    let mut out = vec![ZERO; n];
    for (a, fa) in f.coeffs.iter().enumerate() {
        for (b, gb) in g.coeffs.iter().enumerate() {
            let k = a + b + 1;
            if k >= n {
                break;
            }
            let w = (ln_factorial(a) + ln_factorial(b) - ln_factorial(k)).exp();
            out[k] += fa * gb * w;
        }
    }
    Ok(TSeries { coeffs: out })
}

/// Least-squares fit of log(|a_k|/k!) = log C + k log M over nonzero terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FactorialFit {
    pub c: f64,
    pub m: f64,
    pub rms_residual: f64,
    pub n_used: usize,
}

pub fn factorial_type_fit(f: &HbarSeries, first: usize) -> Result<FactorialFit> {
    if f.truncation_order() < 4 {
        return Err(Error::Input("factorial-type fit needs truncation order >= 4".into()));
    }
    let pts: Vec<(f64, f64)> = f
        .coeffs
        .iter()
        .enumerate()
        .skip(first)
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(k, a)| (k as f64, a.norm().ln() - ln_factorial(k)))
        .collect();
    if pts.is_empty() {
        return Ok(FactorialFit { c: 0.0, m: 0.0, rms_residual: 0.0, n_used: 0 });
    }
    if pts.len() == 1 {
        return Ok(FactorialFit { c: pts[0].1.exp(), m: 1.0, rms_residual: 0.0, n_used: 1 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - icpt - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FactorialFit { c: icpt.exp(), m: slope.exp(), rms_residual: rms, n_used: pts.len() })
}

/// (C, M) with |a_k| ~ C M^k k!. All-zero input gives (0, 0).
pub fn factorial_type_estimate(f: &HbarSeries) -> Result<(f64, f64)> {
    let fit = factorial_type_fit(f, 0)?;
    Ok((fit.c, fit.m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn transform_of_hbar_is_one() {
        let b = borel_transform(&HbarSeries::from_real(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(b.coeffs, vec![re(1.0)]);
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let b = borel_transform(&HbarSeries::from_real(&[3.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(b.coeffs.iter().all(|c| *c == ZERO));
    }

    #[test]
    fn shifted_factorials_map_to_geometric() {
        // a_k = (k-1)! gives b_k = 1, i.e. 1/(1-t)
        let a: Vec<f64> = (0..8).map(|k| if k == 0 { 0.0 } else { factorial(k - 1) }).collect();
        let b = borel_transform(&HbarSeries::from_real(&a).unwrap()).unwrap();
        assert!(b.coeffs.iter().all(|c| (c - re(1.0)).norm() < 1e-15));
    }

    #[test]
    fn factorials_map_to_k_plus_one() {
        let a: Vec<f64> = (0..7).map(factorial).collect();
        let b = borel_transform(&HbarSeries::from_real(&a).unwrap()).unwrap();
        for (k, c) in b.coeffs.iter().enumerate() {
            assert!((c - re(k as f64 + 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn small_convolutions() {
        let one = TSeries::new(vec![re(1.0), re(0.0), re(0.0), re(0.0)]).unwrap();
        let t = TSeries::new(vec![re(0.0), re(1.0), re(0.0), re(0.0)]).unwrap();
        let a = convolve_truncated(&one, &one).unwrap();
        assert!((a.coeffs[1] - re(1.0)).norm() < 1e-15);
        let b = convolve_truncated(&t, &t).unwrap();
        assert!((b.coeffs[3] - re(1.0 / 6.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_windows_rejected() {
        let a = TSeries::new(vec![re(1.0); 3]).unwrap();
        let b = TSeries::new(vec![re(1.0); 4]).unwrap();
        assert!(convolve_truncated(&a, &b).is_err());
    }

    #[test]
    fn factorial_fits() {
        let a: Vec<f64> = (0..12).map(factorial).collect();
        let (_, m) = factorial_type_estimate(&HbarSeries::from_real(&a).unwrap()).unwrap();
        assert!((m - 1.0).abs() < 1e-6);
        let a: Vec<f64> = (0..12).map(|k| 2f64.powi(k as i32) * factorial(k)).collect();
        let (c, m) = factorial_type_estimate(&HbarSeries::from_real(&a).unwrap()).unwrap();
        assert!((m - 2.0).abs() < 1e-6);
        assert!((c - 1.0).abs() < 1e-6);
        let z = HbarSeries::from_real(&[0.0; 6]).unwrap();
        assert_eq!(factorial_type_estimate(&z).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn exp_series() {
        let s = HbarSeries::from_real(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap().exp();
        for (k, c) in s.coeffs.iter().enumerate() {
            assert!((c.re - 1.0 / factorial(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn convolution_matches_laplace_product() {
        // L[f*g] = L[f] L[g] at the level of formal coefficients
        let f = TSeries::new(vec![re(0.3), re(-1.2), re(0.5), re(2.0), re(0.1)]).unwrap();
        let g = TSeries::new(vec![re(1.1), re(0.4), re(-0.7), re(0.2), re(0.9)]).unwrap();
        let conv = convolve_truncated(&f, &g).unwrap();
        let prod = f.formal_laplace().mul(&g.formal_laplace());
        let lc = conv.formal_laplace();
        for k in 0..lc.coeffs.len() {
            assert!((lc.coeffs[k] - prod.coeffs[k]).norm() < 1e-12);
        }
    }
}
