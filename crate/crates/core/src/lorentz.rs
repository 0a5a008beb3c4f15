//! Discrete Lorentz norms on weighted samples, in the rearrangement form
//! ‖t^{1/α} f*(t)‖_{L^β(dt/t)}, and the checkers built on them.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzParams {
    pub alpha: f64,
    /// `f64::INFINITY` encodes the weak space.
    pub beta: f64,
}

impl LorentzParams {
    pub fn new(alpha: f64, beta: f64) -> Result<LorentzParams> {
        if !(alpha > 0.0) {
            return Err(LabError::Precondition(format!("alpha must be positive, got {alpha}")));
        }
        if alpha.is_infinite() {
            return Err(LabError::Unsupported("infinite alpha".into()));
        }
        if !(beta > 0.0) {
            return Err(LabError::Precondition(format!("beta must be positive, got {beta}")));
        }
        Ok(LorentzParams { alpha, beta })
    }

    pub fn lp(p: f64) -> LorentzParams {
        LorentzParams { alpha: p, beta: p }
    }

    pub fn weak(alpha: f64) -> LorentzParams {
        LorentzParams { alpha, beta: f64::INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedSamples {
    /// Values are stored as magnitudes; only |f| enters any norm here.
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<WeightedSamples> {
        if values.len() != weights.len() {
            return Err(LabError::Precondition(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(LabError::Precondition(format!("weight {w} is not positive")));
        }
        Ok(WeightedSamples { values: values.into_iter().map(f64::abs).collect(), weights })
    }

    pub fn from_complex(values: &[Complex64], weights: Vec<f64>) -> Result<WeightedSamples> {
        WeightedSamples::new(values.iter().map(|z| z.norm()).collect(), weights)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Plain L^p norm, p = ∞ allowed.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, &self.weights, p)
    }

    pub fn scaled(&self, c: f64) -> WeightedSamples {
        WeightedSamples { values: self.values.iter().map(|v| v * c.abs()).collect(), weights: self.weights.clone() }
    }
}

pub fn lp_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| v.abs().powf(p) * w).sum();
    s.powf(1.0 / p)
}

/// μ({|f| ≥ λ}).
pub fn distribution_function(f: &WeightedSamples, lambda: f64) -> f64 {
    f.values.iter().zip(&f.weights).filter(|(v, _)| **v >= lambda).map(|(_, w)| w).sum()
}

pub fn lorentz_norm(f: &WeightedSamples, lp: LorentzParams) -> Result<f64> {
    if lp.alpha.is_infinite() {
        return Err(LabError::Unsupported("infinite alpha".into()));
    }
    Ok(lorentz_norm_raw(&f.values, &f.weights, lp.alpha, lp.beta))
}

/// Rearrangement norm of the step function with the given magnitudes.
/// The order is a total order on (value, weight) pairs, so any permutation
/// of the input gives bit-identical output.
pub fn lorentz_norm_raw(values: &[f64], weights: &[f64], alpha: f64, beta: f64) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].abs() > 0.0).collect();
    idx.sort_by(|&a, &b| {
        values[b].abs().total_cmp(&values[a].abs()).then(weights[b].total_cmp(&weights[a]))
    });
    if beta.is_infinite() {
        let mut t = 0.0;
        let mut sup = 0.0f64;
        for &i in &idx {
            t += weights[i];
            sup = sup.max(t.powf(1.0 / alpha) * values[i].abs());
        }
        return sup;
    }
    let gamma = beta / alpha;
    let mut t_prev = 0.0f64;
    let mut acc = 0.0;
    for &i in &idx {
        let w = weights[i];
        let t_next = t_prev + w;
        // t_next^γ − t_prev^γ without cancellation
        let incr = if gamma == 1.0 {
            w
        } else if t_prev == 0.0 {
            w.powf(gamma)
        } else {
            t_prev.powf(gamma) * (gamma * (w / t_prev).ln_1p()).exp_m1()
        };
        acc += values[i].abs().powf(beta) * incr;
        t_prev = t_next;
    }
    (acc / gamma).powf(1.0 / beta)
}

/// Constant c with ‖f‖_{α,β₂} ≤ c ‖f‖_{α,β₁} for β₁ ≤ β₂.
pub fn embedding_constant(alpha: f64, beta1: f64, beta2: f64) -> f64 {
    let e = 1.0 / beta1 - if beta2.is_infinite() { 0.0 } else { 1.0 / beta2 };
    (beta1 / alpha).powf(e)
}

/// Values on an X-grid × Y-grid, row-major in x.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGridFunction {
    pub values: Vec<f64>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerAxis {
    X,
    Y,
}

impl ProductGridFunction {
    pub fn new(values: Vec<f64>, wx: Vec<f64>, wy: Vec<f64>) -> Result<ProductGridFunction> {
        if values.len() != wx.len() * wy.len() {
            return Err(LabError::Precondition("grid shape mismatch".into()));
        }
        if wx.iter().chain(&wy).any(|w| !(*w > 0.0)) {
            return Err(LabError::Precondition("weights must be positive".into()));
        }
        Ok(ProductGridFunction { values: values.into_iter().map(f64::abs).collect(), wx, wy })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.wy.len() + j]
    }

    pub fn transpose(&self) -> ProductGridFunction {
        let (nx, ny) = (self.wx.len(), self.wy.len());
        let mut values = vec![0.0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                values[j * nx + i] = self.at(i, j);
            }
        }
        ProductGridFunction { values, wx: self.wy.clone(), wy: self.wx.clone() }
    }
}

pub fn mixed_lorentz_norm(
    f: &ProductGridFunction,
    outer: LorentzParams,
    inner: LorentzParams,
    inner_axis: InnerAxis,
) -> f64 {
    let g = match inner_axis {
        InnerAxis::Y => f.clone(),
        InnerAxis::X => f.transpose(),
    };
    let ny = g.wy.len();
    let profile: Vec<f64> = (0..g.wx.len())
        .map(|i| lorentz_norm_raw(&g.values[i * ny..(i + 1) * ny], &g.wy, inner.alpha, inner.beta))
        .collect();
    lorentz_norm_raw(&profile, &g.wx, outer.alpha, outer.beta)
}

fn reciprocal(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// ‖fg‖_{α,β} / (‖f‖_{α₁,β₁} ‖g‖_{α₂,β₂}).
pub fn check_holder(
    f: &WeightedSamples,
    g: &WeightedSamples,
    first: LorentzParams,
    second: LorentzParams,
    target: LorentzParams,
) -> Result<f64> {
    let tol = 1e-12;
    let da = reciprocal(first.alpha) + reciprocal(second.alpha) - reciprocal(target.alpha);
    let db = reciprocal(first.beta) + reciprocal(second.beta) - reciprocal(target.beta);
    if da.abs() > tol || db.abs() > tol {
        return Err(LabError::Precondition(format!(
            "exponents do not split: 1/α mismatch {da:e}, 1/β mismatch {db:e}"
        )));
    }
    if f.weights != g.weights {
        return Err(LabError::Precondition("f and g must share the sample set".into()));
    }
    let fg: Vec<f64> = f.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
    let num = lorentz_norm_raw(&fg, &f.weights, target.alpha, target.beta);
    let den = lorentz_norm_raw(&f.values, &f.weights, first.alpha, first.beta)
        * lorentz_norm_raw(&g.values, &g.weights, second.alpha, second.beta);
    Ok(safe_ratio(num, den))
}

/// Upper bound for the Hölder ratio ‖fg‖_{p,q'} over ‖f‖_{α,∞}‖g‖_{q'}
/// with 1/p = 1/α + 1/q'.
pub fn weak_holder_constant(p: f64) -> f64 {
    2f64.powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffYoung {
    pub ratio: f64,
    pub transform_norm: f64,
    pub input_norm: f64,
    pub fft_len: usize,
}

/// ‖û‖_{p'} / ‖u‖_{L^{p,p'}} for samples on a uniform grid; the transform
/// is the zero-padded DFT, which is the trapezoid approximation of
/// ∫ e^{−2πixξ} u(x) dx on the reciprocal grid.
pub fn check_hausdorff_young(u: &[Complex64], spacing: f64, p: f64) -> Result<HausdorffYoung> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(LabError::Precondition(format!("p = {p} outside (1, 2]")));
    }
    if u.is_empty() || !(spacing > 0.0) {
        return Err(LabError::Domain("empty grid".into()));
    }
    let pp = p / (p - 1.0);
    let n = (4 * u.len()).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..u.len()].copy_from_slice(u);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dxi = 1.0 / (n as f64 * spacing);
    let mags: Vec<f64> = buf.iter().map(|z| z.norm() * spacing).collect();
    let total: f64 = mags.iter().map(|m| m * m).sum();
    // bins |k| > 3n/8 sit near the Nyquist frequency
    let tail: f64 = mags.iter().enumerate().filter(|(k, _)| (*k).min(n - *k) > 3 * n / 8).map(|(_, m)| m * m).sum();
    if total > 0.0 && tail > 1e-12 * total {
        return Err(LabError::Refinement(format!(
            "spectrum not resolved: relative energy {:.3e} near the band edge",
            tail / total
        )));
    }
    let transform_norm = lp_norm(&mags, &vec![dxi; n], pp);
    let abs_u: Vec<f64> = u.iter().map(|z| z.norm()).collect();
    let input_norm = lorentz_norm_raw(&abs_u, &vec![spacing; u.len()], p, pp);
    Ok(HausdorffYoung { ratio: safe_ratio(transform_norm, input_norm), transform_norm, input_norm, fft_len: n })
}

/// ‖u‖_{L^{p'}_x L^1_y} / ‖u‖_{L^1_y L^{p'}_x}.
pub fn check_minkowski(u: &ProductGridFunction, p: f64) -> f64 {
    let pp = p / (p - 1.0);
    let num = mixed_lorentz_norm(u, LorentzParams::lp(pp), LorentzParams::lp(1.0), InnerAxis::Y);
    let den = mixed_lorentz_norm(u, LorentzParams::lp(1.0), LorentzParams::lp(pp), InnerAxis::X);
    safe_ratio(num, den)
}

/// ‖u‖_{L^{p'}_x L^{p,p'}_y} / ‖u‖_{L^{p,p'}_y L^{p'}_x}.
pub fn check_interchange(u: &ProductGridFunction, p: f64) -> f64 {
    let pp = p / (p - 1.0);
    let lor = LorentzParams { alpha: p, beta: pp };
    let num = mixed_lorentz_norm(u, LorentzParams::lp(pp), lor, InnerAxis::Y);
    let den = mixed_lorentz_norm(u, lor, LorentzParams::lp(pp), InnerAxis::X);
    safe_ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::indicator_lorentz_norm;

    fn samples(v: &[f64], w: &[f64]) -> WeightedSamples {
        WeightedSamples::new(v.to_vec(), w.to_vec()).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let ind = samples(&[1.0], &[1.0]);
        assert_eq!(distribution_function(&ind, 0.5), 1.0);
        assert_eq!(distribution_function(&ind, 1.5), 0.0);
        assert_eq!(distribution_function(&samples(&[3.0, 2.0, 1.0], &[1.0; 3]), 2.0), 2.0);
    }

    #[test]
    fn indicator_norms_match_closed_form() {
        for &(m, a, b) in &[(1.0, 2.0, 1.0), (0.3, 1.5, 1.5), (2.5, 3.7, 0.8), (7.0, 1.2, f64::INFINITY)] {
            // split the indicator into uneven pieces; the norm must not care
            let f = samples(&[1.0, 1.0, 1.0], &[0.2 * m, 0.5 * m, 0.3 * m]);
            let got = lorentz_norm(&f, LorentzParams { alpha: a, beta: b }).unwrap();
            let want = indicator_lorentz_norm(m, a, b);
            assert!((got - want).abs() < 1e-13 * want, "{m} {a} {b}: {got} vs {want}");
        }
    }

    #[test]
    fn pure_power_weak_norm_is_one() {
        // r^{-1/α} on a geometric grid, each cell valued at its upper end,
        // so t^{1/α} f*(t) approaches 1 from below at the cell boundaries.
        let alpha = 3.0;
        let mut v = Vec::new();
        let mut w = Vec::new();
        let mut r: f64 = 1e-6;
        while r < 2.0 {
            let next = r * 1.01;
            v.push(next.powf(-1.0 / alpha));
            w.push(next - r);
            r = next;
        }
        let got = lorentz_norm_raw(&v, &w, alpha, f64::INFINITY);
        assert!(got <= 1.0 + 1e-12);
        assert!(got > 0.99, "{got}");
    }

    #[test]
    fn rank_one_mixed_norm_factorizes() {
        let gx = [1.0, 2.0, 0.5];
        let hy = [3.0, 0.25];
        let wx = vec![0.5, 0.25, 0.25];
        let wy = vec![1.0, 2.0];
        let vals: Vec<f64> = gx.iter().flat_map(|a| hy.iter().map(move |b| a * b)).collect();
        let f = ProductGridFunction::new(vals, wx.clone(), wy.clone()).unwrap();
        let got = mixed_lorentz_norm(&f, LorentzParams::lp(3.0), LorentzParams::lp(1.5), InnerAxis::Y);
        let want = lp_norm(&gx, &wx, 3.0) * lp_norm(&hy, &wy, 1.5);
        assert!((got - want).abs() < 1e-13 * want);
        assert!((check_minkowski(&f, 1.5) - 1.0).abs() < 1e-10);
        assert!((check_interchange(&f, 1.5) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn holder_equality_case_and_zero_convention() {
        let f = samples(&[1.0], &[1.0]);
        let r = check_holder(&f, &f, LorentzParams::lp(2.0), LorentzParams::lp(2.0), LorentzParams::lp(1.0)).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let z = samples(&[0.0], &[1.0]);
        let r0 = check_holder(&z, &f, LorentzParams::lp(2.0), LorentzParams::lp(2.0), LorentzParams::lp(1.0)).unwrap();
        assert_eq!(r0, 0.0);
        let bad = check_holder(&f, &f, LorentzParams::lp(2.0), LorentzParams::lp(2.0), LorentzParams::lp(2.0));
        assert!(matches!(bad, Err(LabError::Precondition(_))));
    }

    #[test]
    fn hausdorff_young_parseval() {
        let h = 0.01;
        let u: Vec<Complex64> = (0..200)
            .map(|j| {
                let x = (j as f64 - 100.0) * h;
                Complex64::new((-x * x * 20.0).exp(), 0.3 * x * (-x * x * 20.0).exp())
            })
            .collect();
        let r = check_hausdorff_young(&u, h, 2.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12, "{}", r.ratio);
    }

    #[test]
    fn hausdorff_young_rejects_unresolved_band() {
        let u: Vec<Complex64> = (0..64).map(|j| Complex64::new(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        assert!(matches!(check_hausdorff_young(&u, 0.1, 1.5), Err(LabError::Refinement(_))));
    }

    #[test]
    fn alpha_infinite_unsupported() {
        assert!(matches!(LorentzParams::new(f64::INFINITY, f64::INFINITY), Err(LabError::Unsupported(_))));
    }
}
