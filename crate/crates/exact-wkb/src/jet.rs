//! Truncated Taylor arithmetic (forward-mode differentiation to arbitrary order).
//!
//! A `Jet` holds the Taylor coefficients c_0..c_{n-1} of a function at a point,
//! so `c_k = f^(k)(x0)/k!`. Dual numbers are the n = 2 case.

use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet(pub Vec<C64>);

impl Jet {
    pub fn constant(c: C64, n: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); n.max(1)];
        v[0] = c;
        Jet(v)
    }

    /// The identity function x at x0.
    pub fn variable(x0: C64, n: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); n.max(1)];
        v[0] = x0;
        if n > 1 {
            v[1] = C64::new(1.0, 0.0);
        }
        Jet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn value(&self) -> C64 {
        self.0[0]
    }

    pub fn truncate(&self, n: usize) -> Jet {
        Jet(self.0[..n.min(self.len())].to_vec())
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        Jet((0..n).map(|k| self.0[k] + o.0[k]).collect())
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        Jet((0..n).map(|k| self.0[k] - o.0[k]).collect())
    }

    pub fn scale(&self, c: C64) -> Jet {
        Jet(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.0[..n].iter().enumerate() {
            for (j, b) in o.0[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Jet(out)
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        let mut q = vec![C64::new(0.0, 0.0); n];
        let d0 = o.0[0];
        for k in 0..n {
            let mut s = self.0[k];
            for j in 1..=k {
                s -= o.0[j] * q[k - j];
            }
            q[k] = s / d0;
        }
        Jet(q)
    }

    /// Square root with the constant term fixed to `root0` (which must square to c_0).
    pub fn sqrt_with(&self, root0: C64) -> Jet {
        let n = self.len();
        let mut r = vec![C64::new(0.0, 0.0); n];
        r[0] = root0;
        for k in 1..n {
            let mut s = self.0[k];
            for j in 1..k {
                s -= r[j] * r[k - j];
            }
            r[k] = s / (root0 * 2.0);
        }
        Jet(r)
    }

    /// d/dx; the result is one coefficient shorter.
    pub fn deriv(&self) -> Jet {
        if self.len() <= 1 {
            return Jet(vec![]);
        }
        Jet((1..self.len()).map(|k| self.0[k] * k as f64).collect())
    }

    /// Evaluates the ascending-coefficient polynomial at the jet `x`.
    pub fn eval_poly(coeffs: &[C64], x: &Jet) -> Jet {
        let n = x.len();
        let mut acc = Jet::constant(C64::new(0.0, 0.0), n);
        for c in coeffs.iter().rev() {
            acc = acc.mul(x);
            acc.0[0] += c;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sqrt_of_square() {
        let x = Jet::variable(c(2.0), 6);
        let sq = x.mul(&x);
        let r = sq.sqrt_with(c(2.0));
        for (a, b) in r.0.iter().zip(x.0.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn reciprocal_taylor() {
        // 1/(1 - d) = sum d^k
        let one = Jet::constant(c(1.0), 8);
        let den = Jet::eval_poly(&[c(1.0), c(-1.0)], &Jet::variable(c(0.0), 8));
        let q = one.div(&den);
        for a in q.0 {
            assert!((a - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_cube() {
        let x = Jet::variable(c(3.0), 5);
        let cube = x.mul(&x).mul(&x);
        let d = cube.deriv();
        assert!((d.value() - c(27.0)).norm() < 1e-12);
        assert!((d.0[1] - c(18.0)).norm() < 1e-12);
    }
}
