//! Sparse multivariate polynomials and a Chebyshev-based Taylor probe for
//! one-variable functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> Polynomial {
        let terms = terms
            .into_iter()
            .map(|(powers, coeff)| {
                assert_eq!(powers.len(), dim, "monomial arity");
                Monomial { powers, coeff }
            })
            .collect();
        Polynomial { dim, terms }
    }

    pub fn constant(dim: usize, c: f64) -> Polynomial {
        Polynomial::new(dim, vec![(vec![0; dim], c)])
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|m| m.coeff * m.powers.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|m| m.powers[axis] > 0)
            .map(|m| {
                let mut powers = m.powers.clone();
                let c = m.coeff * powers[axis] as f64;
                powers[axis] -= 1;
                Monomial { powers, coeff: c }
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    /// Multiplies by x_axis^k.
    pub fn shift(&self, axis: usize, k: u32) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|m| {
                let mut powers = m.powers.clone();
                powers[axis] += k;
                Monomial { powers, coeff: m.coeff }
            })
            .collect();
        Polynomial { dim: self.dim, terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|m| m.powers.iter().sum::<u32>()).max().unwrap_or(0)
    }
}

/// Monomial coefficients c_m of the degree-`deg` Chebyshev interpolant of
/// `g` on [-rho, rho], in the scaled variable y = t/rho. So |c_m| is the
/// size of the order-m Taylor term at t = rho.
pub fn scaled_taylor(g: impl Fn(f64) -> f64, rho: f64, deg: usize) -> Vec<f64> {
    let n = deg + 1;
    let samples: Vec<f64> = (0..n)
        .map(|j| {
            let theta = PI * (j as f64 + 0.5) / n as f64;
            g(rho * theta.cos())
        })
        .collect();
    // Chebyshev coefficients at the first-kind nodes
    let mut cheb = vec![0.0; n];
    for (m, c) in cheb.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in samples.iter().enumerate() {
            let theta = PI * (j as f64 + 0.5) / n as f64;
            s += v * (m as f64 * theta).cos();
        }
        *c = s * 2.0 / n as f64;
    }
    cheb[0] *= 0.5;
    chebyshev_to_monomial(&cheb)
}

fn chebyshev_to_monomial(cheb: &[f64]) -> Vec<f64> {
    let n = cheb.len();
    let mut out = vec![0.0; n];
    // T_0 = 1, T_1 = y, T_{m+1} = 2y T_m - T_{m-1}
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    t_prev[0] = 1.0;
    if n > 1 {
        t_cur[1] = 1.0;
    }
    for (m, &c) in cheb.iter().enumerate() {
        let basis = if m == 0 { &t_prev } else { &t_cur };
        for (o, b) in out.iter_mut().zip(basis) {
            *o += c * b;
        }
        if m >= 1 && m + 1 < n {
            let mut next = vec![0.0; n];
            for i in 0..n - 1 {
                next[i + 1] += 2.0 * t_cur[i];
            }
            for i in 0..n {
                next[i] -= t_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_partials() {
        // 3 x^2 y - y^3 + 2
        let p = Polynomial::new(2, vec![(vec![2, 1], 3.0), (vec![0, 3], -1.0), (vec![0, 0], 2.0)]);
        assert_eq!(p.eval(&[1.0, 2.0]), 6.0 - 8.0 + 2.0);
        assert_eq!(p.partial(0).eval(&[1.0, 2.0]), 12.0);
        assert_eq!(p.partial(1).eval(&[1.0, 2.0]), 3.0 - 12.0);
        assert_eq!(p.shift(0, 2).eval(&[2.0, 1.0]), 4.0 * p.eval(&[2.0, 1.0]));
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn scaled_taylor_recovers_polynomial() {
        let c = scaled_taylor(|t| 1.0 - 2.0 * t + 0.5 * t.powi(4), 0.5, 8);
        let expect = [1.0, -1.0, 0.0, 0.0, 0.5 * 0.0625, 0.0, 0.0, 0.0, 0.0];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-11, "{c:?}");
        }
    }
}
