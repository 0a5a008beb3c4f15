//! Surface patches, their measures, and local differential probes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::poly::{scaled_taylor, Polynomial};
use crate::quadrature::AxisRule;

/// A height function over a chart in R^dim, with optional exact derivatives.
pub trait GraphFn: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, xi: &[f64]) -> f64;
    fn gradient(&self, _xi: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// Row-major dim × dim.
    fn hessian(&self, _xi: &[f64]) -> Option<Vec<f64>> {
        None
    }
    fn label(&self) -> String {
        "graph".to_string()
    }
}

impl GraphFn for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, xi: &[f64]) -> f64 {
        self.eval(xi)
    }
    fn gradient(&self, xi: &[f64]) -> Option<Vec<f64>> {
        Some((0..self.dim).map(|i| self.partial(i).eval(xi)).collect())
    }
    fn hessian(&self, xi: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim;
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            let pi = self.partial(i);
            for j in 0..d {
                h[i * d + j] = pi.partial(j).eval(xi);
            }
        }
        Some(h)
    }
    fn label(&self) -> String {
        "polynomial".to_string()
    }
}

/// f = a(ξ)·ξ₁ᵏ with a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTypeGraph {
    pub k: u32,
    pub a: Polynomial,
    expanded: Polynomial,
}

impl FiniteTypeGraph {
    pub fn new(k: u32, a: Polynomial) -> FiniteTypeGraph {
        let expanded = a.shift(0, k);
        FiniteTypeGraph { k, a, expanded }
    }

    /// The pure power ξ₁ᵏ in `dim` variables.
    pub fn monomial(k: u32, dim: usize) -> FiniteTypeGraph {
        FiniteTypeGraph::new(k, Polynomial::constant(dim, 1.0))
    }

    pub fn expanded(&self) -> &Polynomial {
        &self.expanded
    }
}

impl GraphFn for FiniteTypeGraph {
    fn dim(&self) -> usize {
        self.expanded.dim
    }
    fn value(&self, xi: &[f64]) -> f64 {
        self.a.eval(xi) * xi[0].powi(self.k as i32)
    }
    fn gradient(&self, xi: &[f64]) -> Option<Vec<f64>> {
        self.expanded.gradient(xi)
    }
    fn hessian(&self, xi: &[f64]) -> Option<Vec<f64>> {
        self.expanded.hessian(xi)
    }
    fn label(&self) -> String {
        format!("a*xi1^{}", self.k)
    }
}

/// Wraps a closure; derivatives come from finite differences.
pub struct FnGraph<F> {
    dim: usize,
    f: F,
    label: String,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnGraph<F> {
    pub fn new(dim: usize, label: &str, f: F) -> FnGraph<F> {
        FnGraph { dim, f, label: label.to_string() }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> GraphFn for FnGraph<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, xi: &[f64]) -> f64 {
        (self.f)(xi)
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Sphere,
    Paraboloid,
    Hyperboloid,
    Cone,
    GraphFiniteType,
}

/// Which measure a graph surface carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMeasure {
    /// dξ on the chart.
    Chart,
    /// Surface area, (1+|∇f|²)^{1/2} dξ.
    Area,
}

#[derive(Clone)]
pub struct GraphSpec {
    pub f: Arc<dyn GraphFn>,
    pub k: Option<u32>,
    pub measure: GraphMeasure,
}

impl fmt::Debug for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphSpec")
            .field("f", &self.f.label())
            .field("k", &self.k)
            .field("measure", &self.measure)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Patch {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// r0 ≤ |ξ| ≤ r1, for the cone.
    Annulus { r0: f64, r1: f64 },
}

impl Patch {
    pub fn cube(dim: usize, half: f64) -> Patch {
        Patch::Box { lo: vec![-half; dim], hi: vec![half; dim] }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Patch::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt(),
            Patch::Annulus { r1, .. } => 2.0 * r1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceDescriptor {
    pub kind: SurfaceKind,
    /// Dimension of the slice convention; the cone lives in R^{n+1}.
    pub n: usize,
    pub patch: Patch,
    pub graph: Option<GraphSpec>,
}

/// Boundary slack for patch membership tests.
const PATCH_TOL: f64 = 1e-12;

impl SurfaceDescriptor {
    /// Full sphere S^{n-1} in iterated angles (θ₁..θ_{n−2}, φ).
    pub fn sphere(n: usize) -> SurfaceDescriptor {
        assert!(n >= 2);
        let mut lo = vec![0.0; n - 1];
        let mut hi = vec![PI; n - 1];
        lo[n - 2] = 0.0;
        hi[n - 2] = 2.0 * PI;
        SurfaceDescriptor { kind: SurfaceKind::Sphere, n, patch: Patch::Box { lo, hi }, graph: None }
    }

    pub fn circle() -> SurfaceDescriptor {
        SurfaceDescriptor::sphere(2)
    }

    pub fn paraboloid(n: usize, half: f64) -> SurfaceDescriptor {
        SurfaceDescriptor { kind: SurfaceKind::Paraboloid, n, patch: Patch::cube(n - 1, half), graph: None }
    }

    pub fn hyperboloid(n: usize, half: f64) -> SurfaceDescriptor {
        SurfaceDescriptor { kind: SurfaceKind::Hyperboloid, n, patch: Patch::cube(n - 1, half), graph: None }
    }

    pub fn cone(n: usize, r0: f64, r1: f64) -> SurfaceDescriptor {
        SurfaceDescriptor { kind: SurfaceKind::Cone, n, patch: Patch::Annulus { r0, r1 }, graph: None }
    }

    /// The default truncation 1/2 ≤ |ξ| ≤ 2.
    pub fn cone_ring(n: usize) -> SurfaceDescriptor {
        SurfaceDescriptor::cone(n, 0.5, 2.0)
    }

    pub fn graph(f: Arc<dyn GraphFn>, k: Option<u32>, measure: GraphMeasure, lo: Vec<f64>, hi: Vec<f64>) -> SurfaceDescriptor {
        let n = f.dim() + 1;
        assert_eq!(lo.len(), f.dim());
        SurfaceDescriptor {
            kind: SurfaceKind::GraphFiniteType,
            n,
            patch: Patch::Box { lo, hi },
            graph: Some(GraphSpec { f, k, measure }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(LabError::Precondition(format!("n = {} < 2", self.n)));
        }
        match (&self.patch, self.kind) {
            (Patch::Annulus { r0, r1 }, SurfaceKind::Cone) => {
                if !(*r0 > 0.0 && r1 > r0) {
                    return Err(LabError::Precondition(format!(
                        "cone annulus needs 0 < r0 < r1, got [{r0}, {r1}]"
                    )));
                }
            }
            (Patch::Box { lo, hi }, kind) if kind != SurfaceKind::Cone => {
                if lo.len() != self.chart_dim() || hi.len() != lo.len() {
                    return Err(LabError::Precondition("patch dimension mismatch".into()));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(b > a)) {
                    return Err(LabError::Precondition("empty patch".into()));
                }
            }
            _ => return Err(LabError::Precondition("patch shape does not match surface kind".into())),
        }
        if self.kind == SurfaceKind::GraphFiniteType {
            match &self.graph {
                Some(g) if g.f.dim() + 1 == self.n => {}
                _ => return Err(LabError::Precondition("graph surface needs an f of dimension n-1".into())),
            }
        }
        Ok(())
    }

    pub fn chart_dim(&self) -> usize {
        match self.kind {
            SurfaceKind::Cone => self.n,
            _ => self.n - 1,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            SurfaceKind::Cone => self.n + 1,
            _ => self.n,
        }
    }

    pub fn contains(&self, chart: &[f64]) -> bool {
        match &self.patch {
            Patch::Box { lo, hi } => chart
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| *x >= a - PATCH_TOL && *x <= b + PATCH_TOL),
            Patch::Annulus { r0, r1 } => {
                let r = norm(chart);
                r >= r0 * (1.0 - PATCH_TOL) && r <= r1 * (1.0 + PATCH_TOL)
            }
        }
    }

    fn height(&self, xi: &[f64]) -> f64 {
        match self.kind {
            SurfaceKind::Paraboloid => 0.5 * xi.iter().map(|x| x * x).sum::<f64>(),
            SurfaceKind::Hyperboloid => (1.0 + xi.iter().map(|x| x * x).sum::<f64>()).sqrt(),
            SurfaceKind::GraphFiniteType => self.graph.as_ref().expect("validated").f.value(xi),
            _ => unreachable!(),
        }
    }

    /// Ambient point for a chart point.
    pub fn point(&self, chart: &[f64]) -> Vec<f64> {
        match self.kind {
            SurfaceKind::Sphere => sphere_point(chart),
            SurfaceKind::Cone => {
                let mut p = chart.to_vec();
                p.push(norm(chart));
                p
            }
            _ => {
                let mut p = chart.to_vec();
                p.push(self.height(chart));
                p
            }
        }
    }

    /// Density of dσ against the chart coordinates.
    pub fn measure_weight(&self, chart: &[f64]) -> Result<f64> {
        if chart.len() != self.chart_dim() {
            return Err(LabError::Domain(format!(
                "chart point has {} coordinates, expected {}",
                chart.len(),
                self.chart_dim()
            )));
        }
        if self.kind == SurfaceKind::Cone && norm(chart) == 0.0 {
            return Err(LabError::Singular("cone vertex ξ = 0".into()));
        }
        if !self.contains(chart) {
            return Err(LabError::Domain(format!("{chart:?} lies outside the patch")));
        }
        Ok(match self.kind {
            SurfaceKind::Sphere => sphere_jacobian(chart),
            SurfaceKind::Paraboloid => 1.0,
            SurfaceKind::Hyperboloid => 1.0 / (1.0 + chart.iter().map(|x| x * x).sum::<f64>()).sqrt(),
            SurfaceKind::Cone => 1.0 / norm(chart),
            SurfaceKind::GraphFiniteType => {
                let g = self.graph.as_ref().expect("validated");
                match g.measure {
                    GraphMeasure::Chart => 1.0,
                    GraphMeasure::Area => {
                        let step = 1e-4 * self.patch.diameter();
                        let (grad, _) = derivatives(g.f.as_ref(), chart, step)?;
                        (1.0 + grad.iter().map(|x| x * x).sum::<f64>()).sqrt()
                    }
                }
            }
        })
    }

    /// Sampling coordinates: the chart itself, except for the cone which is
    /// sampled in polar form (r, angles).
    pub fn param_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.patch {
            Patch::Box { lo, hi } => (lo.clone(), hi.clone()),
            Patch::Annulus { r0, r1 } => {
                let (mut lo, mut hi) = (vec![*r0], vec![*r1]);
                let n = self.n;
                for i in 0..n - 1 {
                    lo.push(0.0);
                    hi.push(if i == n - 2 { 2.0 * PI } else { PI });
                }
                (lo, hi)
            }
        }
    }

    pub fn default_rules(&self) -> Vec<AxisRule> {
        let (lo, hi) = self.param_box();
        let d = lo.len();
        let angular = |j: usize, first_angle: usize| {
            if j + 1 == d {
                if ((hi[j] - lo[j]) - 2.0 * PI).abs() < 1e-14 {
                    AxisRule::Periodic
                } else {
                    AxisRule::Trapezoid
                }
            } else if j >= first_angle {
                AxisRule::GaussLegendre
            } else {
                AxisRule::Trapezoid
            }
        };
        match self.kind {
            SurfaceKind::Sphere => (0..d).map(|j| angular(j, 0)).collect(),
            SurfaceKind::Cone => (0..d).map(|j| angular(j, 1)).collect(),
            _ => vec![AxisRule::Trapezoid; d],
        }
    }

    /// Chart point for sampling coordinates.
    pub fn chart_of_param(&self, param: &[f64]) -> Vec<f64> {
        match self.kind {
            SurfaceKind::Cone => {
                let r = param[0];
                sphere_point(&param[1..]).into_iter().map(|w| r * w).collect()
            }
            _ => param.to_vec(),
        }
    }

    /// Jacobian of the sampling map times the measure weight.
    pub fn param_weight(&self, param: &[f64]) -> Result<f64> {
        match self.kind {
            SurfaceKind::Cone => {
                let r = param[0];
                if r <= 0.0 {
                    return Err(LabError::Singular("cone vertex ξ = 0".into()));
                }
                // r^{n-1} dr dω against dξ/|ξ|
                Ok(r.powi(self.n as i32 - 2) * sphere_jacobian(&param[1..]))
            }
            _ => self.measure_weight(param),
        }
    }

    /// For each ambient axis, the sampling axis it copies verbatim, if any.
    pub fn aligned_axes(&self) -> Vec<Option<usize>> {
        match self.kind {
            SurfaceKind::Sphere | SurfaceKind::Cone => vec![None; self.ambient_dim()],
            _ => (0..self.n).map(|i| if i + 1 < self.n { Some(i) } else { None }).collect(),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            SurfaceKind::Sphere => format!("sphere(n={})", self.n),
            SurfaceKind::Paraboloid => format!("paraboloid(n={})", self.n),
            SurfaceKind::Hyperboloid => format!("hyperboloid(n={})", self.n),
            SurfaceKind::Cone => format!("cone(n={})", self.n),
            SurfaceKind::GraphFiniteType => {
                format!("graph(n={}, {})", self.n, self.graph.as_ref().map(|g| g.f.label()).unwrap_or_default())
            }
        }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Iterated angles (θ₁..θ_{m−1}, φ) to a point of S^m ⊂ R^{m+1}.
pub fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let m = angles.len();
    let mut p = Vec::with_capacity(m + 1);
    let mut s = 1.0;
    for &a in &angles[..m - 1] {
        p.push(s * a.cos());
        s *= a.sin();
    }
    let phi = angles[m - 1];
    p.push(s * phi.cos());
    p.push(s * phi.sin());
    p
}

/// sin^{m−1}θ₁ · sin^{m−2}θ₂ ⋯ sin θ_{m−1}.
pub fn sphere_jacobian(angles: &[f64]) -> f64 {
    let m = angles.len();
    angles[..m - 1]
        .iter()
        .enumerate()
        .map(|(i, a)| a.sin().abs().powi((m - 1 - i) as i32))
        .product()
}

/// Gradient and row-major Hessian, exact where the graph provides them and
/// central differences with the given step otherwise.
pub fn derivatives(f: &dyn GraphFn, pt: &[f64], step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = f.dim();
    let grad = match f.gradient(pt) {
        Some(g) => g,
        None => (0..d)
            .map(|i| {
                let mut a = pt.to_vec();
                let mut b = pt.to_vec();
                a[i] += step;
                b[i] -= step;
                (f.value(&a) - f.value(&b)) / (2.0 * step)
            })
            .collect(),
    };
    let hess = match f.hessian(pt) {
        Some(h) => h,
        None => {
            let f0 = f.value(pt);
            let mut h = vec![0.0; d * d];
            for i in 0..d {
                let mut a = pt.to_vec();
                let mut b = pt.to_vec();
                a[i] += step;
                b[i] -= step;
                h[i * d + i] = (f.value(&a) - 2.0 * f0 + f.value(&b)) / (step * step);
                for j in i + 1..d {
                    let eval = |si: f64, sj: f64| {
                        let mut c = pt.to_vec();
                        c[i] += si * step;
                        c[j] += sj * step;
                        f.value(&c)
                    };
                    let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                        / (4.0 * step * step);
                    h[i * d + j] = v;
                    h[j * d + i] = v;
                }
            }
            h
        }
    };
    if grad.iter().chain(&hess).any(|v| !v.is_finite()) {
        return Err(LabError::Numerical(format!("non-finite derivative estimate at {pt:?}")));
    }
    Ok((grad, hess))
}

/// K = (f₁₁f₂₂ − f₁₂²)/(1+|∇f|²)² for a graph over R².
pub fn gaussian_curvature(f: &dyn GraphFn, pt: &[f64], step: f64) -> Result<f64> {
    if f.dim() != 2 {
        return Err(LabError::Unsupported(format!("curvature of a {}-variable graph", f.dim())));
    }
    let (g, h) = derivatives(f, pt, step)?;
    let det = h[0] * h[3] - h[1] * h[2];
    let w = 1.0 + g[0] * g[0] + g[1] * g[1];
    Ok(det / (w * w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactOrder {
    Exactly(u32),
    AtLeast(u32),
}

/// Relative threshold on ray Taylor coefficients.
pub const CONTACT_REL_TOL: f64 = 1e-7;
/// Floor relative to the function's own size, so rounding noise on a plane
/// never registers as curvature.
pub const CONTACT_NOISE_TOL: f64 = 1e-10;
pub const CONTACT_FAN: usize = 32;

pub fn fan_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => (0..CONTACT_FAN)
            .map(|j| {
                let t = PI * j as f64 / CONTACT_FAN as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_fa17);
            (0..CONTACT_FAN)
                .map(|_| {
                    let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                    let r = norm(&v);
                    v.into_iter().map(|x| x / r).collect()
                })
                .collect()
        }
    }
}

/// Type of `pt`: the lowest order m ≥ 2 at which some ray of the fan sees a
/// nonzero Taylor coefficient once the affine part is removed.
pub fn contact_order(f: &dyn GraphFn, pt: &[f64], max_k: u32, radius: f64) -> ContactOrder {
    let deg = (max_k as usize + 2).max(6);
    let dirs = fan_directions(f.dim());
    let mut coeffs = Vec::with_capacity(dirs.len());
    let mut size = 0.0f64;
    let mut curv_scale = 0.0f64;
    for w in &dirs {
        let c = scaled_taylor(
            |t| {
                let x: Vec<f64> = pt.iter().zip(w).map(|(p, d)| p + t * d).collect();
                f.value(&x)
            },
            radius,
            deg,
        );
        size = size.max(c.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        curv_scale = curv_scale.max(c[2..].iter().fold(0.0f64, |m, v| m.max(v.abs())));
        coeffs.push(c);
    }
    let threshold = (CONTACT_REL_TOL * curv_scale).max(CONTACT_NOISE_TOL * size);
    for m in 2..=max_k as usize {
        if coeffs.iter().any(|c| c[m].abs() > threshold) {
            return ContactOrder::Exactly(m as u32);
        }
    }
    ContactOrder::AtLeast(max_k)
}

/// Exponents (p, q) with duals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<ExponentPair> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(LabError::Precondition(format!("p = {p} outside (1, 2]")));
        }
        if !(q >= 1.0) {
            return Err(LabError::Precondition(format!("q = {q} < 1")));
        }
        Ok(ExponentPair { p, q })
    }

    pub fn from_duals(pprime: f64, q: f64) -> Result<ExponentPair> {
        if !(pprime >= 2.0) {
            return Err(LabError::Precondition(format!("p' = {pprime} < 2")));
        }
        ExponentPair::new(dual(pprime), q)
    }

    pub fn pprime(&self) -> f64 {
        dual(self.p)
    }

    pub fn qprime(&self) -> f64 {
        dual(self.q)
    }
}

/// Hölder dual exponent; 1 ↔ ∞.
pub fn dual(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_weight_examples() {
        let h = SurfaceDescriptor::hyperboloid(3, 1.0);
        assert_eq!(h.measure_weight(&[0.0, 0.0]).unwrap(), 1.0);
        let c = SurfaceDescriptor::cone(2, 0.5, 3.0);
        assert_eq!(c.measure_weight(&[2.0, 0.0]).unwrap(), 0.5);
        let p = SurfaceDescriptor::paraboloid(3, 1.0);
        assert_eq!(p.measure_weight(&[0.3, -0.7]).unwrap(), 1.0);
        assert!(matches!(c.measure_weight(&[0.0, 0.0]), Err(LabError::Singular(_))));
        assert!(matches!(c.measure_weight(&[0.1, 0.0]), Err(LabError::Domain(_))));
        assert!(matches!(p.measure_weight(&[1.5, 0.0]), Err(LabError::Domain(_))));
    }

    #[test]
    fn sphere_points_are_unit() {
        let p = sphere_point(&[0.3, 1.1, 4.0]);
        assert_eq!(p.len(), 4);
        assert!((norm(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn curvature_examples() {
        let cyl = Polynomial::new(2, vec![(vec![2, 0], 1.0)]);
        assert_eq!(gaussian_curvature(&cyl, &[0.0, 0.0], 1e-4).unwrap(), 0.0);
        let bowl = Polynomial::new(2, vec![(vec![2, 0], 0.5), (vec![0, 2], 0.5)]);
        assert_eq!(gaussian_curvature(&bowl, &[0.0, 0.0], 1e-4).unwrap(), 1.0);
    }

    #[test]
    fn contact_order_examples() {
        let cyl = Polynomial::new(2, vec![(vec![2, 0], 1.0)]);
        assert_eq!(contact_order(&cyl, &[0.0, 0.0], 8, 0.05), ContactOrder::Exactly(2));
        let a = Polynomial::new(2, vec![(vec![0, 0], 1.5), (vec![1, 1], 2.0), (vec![0, 2], -1.0)]);
        let f = FiniteTypeGraph::new(4, a);
        assert_eq!(contact_order(&f, &[0.0, 0.0], 8, 0.05), ContactOrder::Exactly(4));
        let plane = Polynomial::new(2, vec![]);
        assert_eq!(contact_order(&plane, &[0.0, 0.0], 8, 0.05), ContactOrder::AtLeast(8));
        let tilted = Polynomial::new(2, vec![(vec![0, 0], 3.0), (vec![1, 0], -2.0), (vec![0, 1], 0.5)]);
        assert_eq!(contact_order(&tilted, &[0.0, 0.0], 8, 0.05), ContactOrder::AtLeast(8));
    }

    #[test]
    fn exponent_duals() {
        let e = ExponentPair::from_duals(6.0, 2.0).unwrap();
        assert!((e.p - 1.2).abs() < 1e-15);
        assert!((1.0 / e.p + 1.0 / e.pprime() - 1.0).abs() < 1e-15);
        assert_eq!(e.qprime(), 2.0);
        assert_eq!(dual(1.0), f64::INFINITY);
    }
}
