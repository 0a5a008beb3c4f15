//! Exponent admissibility, the anisotropic Knapp scaling and its λ-slope.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::extension::{least_squares, EvalGrid, ExtensionPlan, GridAxis, SampledDensity, ALIAS_LIMIT};
use crate::lorentz::lp_norm;
use crate::quadrature::{plateau, AxisRule};
use crate::surface::{dual, GraphFn, GraphMeasure, SurfaceDescriptor};

/// Relative tolerance for exponent equalities.
pub const EXPONENT_TOL: f64 = 1e-12;

fn below(a: f64, b: f64) -> bool {
    a < b - EXPONENT_TOL * a.abs().max(b.abs())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXPONENT_TOL * a.abs().max(b.abs())
}

/// p′/(n+1) ≥ q/(n−1) and p′ > 2n/(n−1).
pub fn admissible_compact(n: usize, pprime: f64, q: f64) -> bool {
    let nf = n as f64;
    let lhs = pprime / (nf + 1.0);
    let rhs = q / (nf - 1.0);
    let crit = 2.0 * nf / (nf - 1.0);
    !below(lhs, rhs) && pprime > crit && !close(pprime, crit)
}

/// p′/(n+1) = q/(n−1) and p′ > 2n/(n−1).
pub fn scale_invariant(n: usize, pprime: f64, q: f64) -> bool {
    let nf = n as f64;
    let crit = 2.0 * nf / (nf - 1.0);
    close(pprime / (nf + 1.0), q / (nf - 1.0)) && pprime > crit && !close(pprime, crit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnappParams {
    pub k: u32,
    pub lambda: f64,
    pub eps: f64,
    pub pprime: f64,
    pub q: f64,
}

impl KnappParams {
    pub fn new(k: u32, lambda: f64, eps: f64, pprime: f64, q: f64) -> Result<KnappParams> {
        if k < 2 {
            return Err(LabError::Domain(format!("type k = {k} must be at least 2")));
        }
        if !(lambda > 1.0) || !(eps > 0.0) {
            return Err(LabError::Domain(format!("need λ > 1 and ε > 0, got λ = {lambda}, ε = {eps}")));
        }
        if !(pprime > 1.0) || !(q >= 1.0) {
            return Err(LabError::Domain(format!("need p' > 1 and q ≥ 1, got ({pprime}, {q})")));
        }
        Ok(KnappParams { k, lambda, eps, pprime, q })
    }
}

pub fn knapp_exponent(kp: &KnappParams) -> f64 {
    knapp_exponent_raw(kp.k, kp.eps, kp.pprime, kp.q)
}

/// (1+ε)/q − (1+k+ε)/p′.
pub fn knapp_exponent_raw(k: u32, eps: f64, pprime: f64, q: f64) -> f64 {
    (1.0 + eps) / q - (1.0 + k as f64 + eps) / pprime
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NecessityVerdict {
    Consistent,
    Violated,
}

/// Violated iff p′ < (k+1)q.
pub fn necessity_verdict(k: u32, pprime: f64, q: f64) -> NecessityVerdict {
    if below(pprime, (k as f64 + 1.0) * q) {
        NecessityVerdict::Violated
    } else {
        NecessityVerdict::Consistent
    }
}

/// An ε > 0 with negative Knapp exponent, when one exists.
pub fn necessity_witness(k: u32, pprime: f64, q: f64) -> Option<f64> {
    if necessity_verdict(k, pprime, q) == NecessityVerdict::Consistent {
        return None;
    }
    let slope = 1.0 / q - 1.0 / pprime;
    let at_zero = knapp_exponent_raw(k, 0.0, pprime, q);
    if slope <= 0.0 {
        return Some(1.0);
    }
    // the exponent crosses zero at −at_zero/slope
    Some(0.5 * (-at_zero / slope))
}

/// ε ∈ {2^{−10}, …, 2}.
pub fn epsilon_grid() -> Vec<f64> {
    (-10..=1).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub k: u32,
    pub pprime: f64,
    pub q: f64,
    pub verdict: NecessityVerdict,
    pub min_exponent: f64,
    pub agrees: bool,
}

/// Random triples with p′ ∈ {1.25, 1.5, …, 16}, q ∈ {1, 1.25, …, 4},
/// k ∈ {2, …, 6}; the verdict is compared with the sign of the minimum
/// exponent over the ε-grid.
pub fn necessity_census(count: usize, seed: u64) -> Vec<CensusRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = epsilon_grid();
    (0..count)
        .map(|_| {
            let k = rng.random_range(2..=6u32);
            let pprime = rng.random_range(5..=64u32) as f64 / 4.0;
            let q = rng.random_range(4..=16u32) as f64 / 4.0;
            census_row(k, pprime, q, &grid)
        })
        .collect()
}

pub fn census_row(k: u32, pprime: f64, q: f64, grid: &[f64]) -> CensusRow {
    let verdict = necessity_verdict(k, pprime, q);
    let min_exponent = grid.iter().map(|&e| knapp_exponent_raw(k, e, pprime, q)).fold(f64::INFINITY, f64::min);
    let agrees = (verdict == NecessityVerdict::Violated) == (min_exponent < 0.0);
    CensusRow { k, pprime, q, verdict, min_exponent, agrees }
}

/// Random (n, p′, q) for the boundary-agreement property; one in four is
/// placed on the scale-invariant line.
pub fn admissibility_census(count: usize, seed: u64) -> Vec<(usize, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=6usize);
            let pprime = rng.random_range(1.01..12.0);
            let q = if rng.random_range(0..4) == 0 {
                pprime * (n as f64 - 1.0) / (n as f64 + 1.0)
            } else {
                rng.random_range(1.0..10.0)
            };
            (n, pprime, q)
        })
        .collect()
}

/// Test function on the unit square of the rescaled chart.
pub type KnappBump = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Smoothed indicator of [0,1]² with transitions of relative width 0.1.
pub fn knapp_cap() -> KnappBump {
    Arc::new(|s1, s2| plateau(s1, 0.0, 1.0, 0.1) * plateau(s2, 0.0, 1.0, 0.1))
}

/// Dual box, resolution and chart sampling for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnappGrid {
    /// Half-width X of the unscaled box [−X, X]³.
    pub box_half: f64,
    pub box_res: usize,
    /// Chart nodes per axis; None picks the smallest count the aliasing
    /// rule allows, with 10% headroom.
    pub nodes: Option<usize>,
}

impl Default for KnappGrid {
    fn default() -> KnappGrid {
        KnappGrid { box_half: 1.0, box_res: 25, nodes: None }
    }
}

impl KnappGrid {
    fn nodes_for(&self, k: u32) -> usize {
        self.nodes.unwrap_or_else(|| {
            let need = 2.0 * std::f64::consts::PI * self.box_half * (2.0 + k as f64) / ALIAS_LIMIT;
            (1.1 * need).ceil() as usize + 1
        })
    }
}

/// One λ of a sweep: |E u_λ| on the dilated box, plus the density values.
#[derive(Debug, Clone)]
pub struct KnappSample {
    pub lambda: f64,
    pub field_abs: Vec<f64>,
    pub cell_weights: Vec<f64>,
    pub density_abs: Vec<f64>,
    pub density_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappRow {
    pub lambda: f64,
    pub lhs_norm: f64,
    pub density_norm: f64,
    pub ratio: f64,
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappFit {
    pub k: u32,
    pub eps: f64,
    pub pprime: f64,
    pub q: f64,
    pub predicted: f64,
    pub fitted: f64,
    pub intercept: f64,
    pub rows: Vec<KnappRow>,
    pub verdict: NecessityVerdict,
}

/// Fields of u_λ(ξ) = u(λξ₁, λ^ε ξ₂) on the graph of f, for a list of λ.
/// The extension carries φ = (1+|∇f|²)^{1/2}.
pub struct KnappSweep {
    pub k: u32,
    pub eps: f64,
    pub samples: Vec<KnappSample>,
}

impl KnappSweep {
    pub fn compute(f: Arc<dyn GraphFn>, k: u32, eps: f64, lambdas: &[f64], u: KnappBump, grid: &KnappGrid) -> Result<KnappSweep> {
        if lambdas.len() < 4 {
            return Err(LabError::Precondition("the slope fit needs at least four λ values".into()));
        }
        for &l in lambdas {
            KnappParams::new(k, l, eps, 2.0, 1.0)?;
        }
        if f.dim() != 2 {
            return Err(LabError::Precondition("Knapp caps live on graphs over R²".into()));
        }
        let m = grid.nodes_for(k);
        let mut samples = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let l2 = lambda.powf(eps);
            let surf = SurfaceDescriptor::graph(f.clone(), Some(k), GraphMeasure::Area, vec![0.0, 0.0], vec![1.0 / lambda, 1.0 / l2]);
            let uu = u.clone();
            let d = SampledDensity::sample(&surf, &[m, m], Some(&[AxisRule::Trapezoid; 2]), |sp| {
                Complex64::new(uu(lambda * sp.chart[0], l2 * sp.chart[1]), 0.0)
            })?;
            let x = grid.box_half;
            let n = grid.box_res;
            let g = EvalGrid::new(vec![
                GridAxis::new(-x * lambda, x * lambda, n),
                GridAxis::new(-x * l2, x * l2, n),
                GridAxis::new(-x * lambda.powi(k as i32), x * lambda.powi(k as i32), n),
            ]);
            let plan = ExtensionPlan::new(&d, &g)?;
            let field = plan.apply(&d.coefficients());
            samples.push(KnappSample {
                lambda,
                field_abs: field.iter().map(|z| z.norm()).collect(),
                cell_weights: g.cell_weights(),
                density_abs: d.values.iter().map(|z| z.norm()).collect(),
                density_weights: d.weights.clone(),
            });
        }
        if samples.iter().all(|s| s.density_abs.iter().all(|v| *v == 0.0)) {
            return Err(LabError::Precondition("the test function vanishes; the slope is undefined".into()));
        }
        Ok(KnappSweep { k, eps, samples })
    }

    /// Fits log(‖u_λ‖_{q′} / ‖E u_λ‖_{p′}) against log λ.
    pub fn fit(&self, pprime: f64, q: f64) -> Result<KnappFit> {
        let qp = dual(q);
        let mut rows = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            let lhs = lp_norm(&s.field_abs, &s.cell_weights, pprime);
            let dn = lp_norm(&s.density_abs, &s.density_weights, qp);
            if lhs == 0.0 || dn == 0.0 {
                return Err(LabError::Numerical(format!("zero norm at λ = {}", s.lambda)));
            }
            let ratio = dn / lhs;
            rows.push(KnappRow { lambda: s.lambda, lhs_norm: lhs, density_norm: dn, ratio, log_ratio: ratio.ln() });
        }
        let xs: Vec<f64> = rows.iter().map(|r| r.lambda.ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.log_ratio).collect();
        let (fitted, intercept) = least_squares(&xs, &ys);
        Ok(KnappFit {
            k: self.k,
            eps: self.eps,
            pprime,
            q,
            predicted: knapp_exponent_raw(self.k, self.eps, pprime, q),
            fitted,
            intercept,
            rows,
            verdict: necessity_verdict(self.k, pprime, q),
        })
    }
}

/// Sweep and fit for f = ξ₁ᵏ with the smoothed cap.
pub fn knapp_slope_fit(k: u32, eps: f64, pprime: f64, q: f64, lambdas: &[f64], grid: &KnappGrid) -> Result<KnappFit> {
    let f = Arc::new(crate::surface::FiniteTypeGraph::monomial(k, 2));
    KnappSweep::compute(f, k, eps, lambdas, knapp_cap(), grid)?.fit(pprime, q)
}

/// max over s ∈ [0,1]² of |λᵏ f(s₁/λ, s₂/λ^ε) − c s₁ᵏ| on an m×m grid.
pub fn knapp_limit_deviation(f: &dyn GraphFn, k: u32, eps: f64, lambda: f64, c: f64, m: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let s1 = i as f64 / (m - 1) as f64;
            let s2 = j as f64 / (m - 1) as f64;
            let v = lambda.powi(k as i32) * f.value(&[s1 / lambda, s2 / lambda.powf(eps)]);
            worst = worst.max((v - c * s1.powi(k as i32)).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_examples() {
        assert!(admissible_compact(3, 4.0, 2.0));
        assert!(!admissible_compact(2, 4.0, 1.0));
        assert!(!admissible_compact(2, 6.0, 7.0));
        assert!(scale_invariant(2, 6.0, 2.0));
        assert!(scale_invariant(3, 4.0, 2.0));
        assert!(!scale_invariant(2, 5.0, 2.0));
    }

    #[test]
    fn exponent_examples() {
        let e = |k, eps, pp, q| knapp_exponent(&KnappParams::new(k, 2.0, eps, pp, q).unwrap());
        assert!((e(2, 1.0, 6.0, 2.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((e(2, 0.1, 5.0, 2.0) + 0.07).abs() < 1e-15);
        assert_eq!(necessity_verdict(2, 6.0, 2.0), NecessityVerdict::Consistent);
        assert_eq!(necessity_verdict(2, 5.0, 2.0), NecessityVerdict::Violated);
        assert_eq!(necessity_verdict(4, 6.0, 1.0), NecessityVerdict::Consistent);
        let w = necessity_witness(2, 5.0, 2.0).unwrap();
        assert!(knapp_exponent_raw(2, w, 5.0, 2.0) < 0.0);
        assert!(knapp_exponent_raw(2, 0.1, 5.0, 2.0) < 0.0);
    }

    #[test]
    fn params_are_validated() {
        assert!(KnappParams::new(1, 2.0, 1.0, 6.0, 2.0).is_err());
        assert!(KnappParams::new(2, 1.0, 1.0, 6.0, 2.0).is_err());
        assert!(KnappParams::new(2, 2.0, 0.0, 6.0, 2.0).is_err());
    }

    #[test]
    fn zero_bump_has_no_slope() {
        let f = Arc::new(crate::surface::FiniteTypeGraph::monomial(2, 2));
        let zero: KnappBump = Arc::new(|_, _| 0.0);
        let grid = KnappGrid { box_half: 0.5, box_res: 5, nodes: None };
        assert!(KnappSweep::compute(f, 2, 1.0, &[2.0, 3.0, 4.0, 5.0], zero, &grid).is_err());
    }
}
