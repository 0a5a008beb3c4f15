//! Direct-summation evaluation of (u dσ)∨ and the norm ratios built on it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quadrature::{bump, plateau, AxisNodes, AxisRule};
use crate::surface::{SurfaceDescriptor, SurfaceKind};

/// Largest admissible value of 2π Σᵢ max|xᵢ| · max|ΔPᵢ|.
pub const ALIAS_LIMIT: f64 = 0.25;

/// Where a node sits: sampling coordinates, chart coordinates, ambient point.
#[derive(Debug, Clone, Copy)]
pub struct SamplePoint<'a> {
    pub param: &'a [f64],
    pub chart: &'a [f64],
    pub point: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct SampledDensity {
    pub surface: SurfaceDescriptor,
    /// Product-grid shape in sampling coordinates; `None` for scattered nodes.
    pub shape: Option<Vec<usize>>,
    pub param_dim: usize,
    pub chart_dim: usize,
    pub dim: usize,
    pub params: Vec<f64>,
    pub charts: Vec<f64>,
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// Per ambient axis, the largest coordinate jump between grid neighbours.
    pub max_step: Vec<f64>,
    pub aligned: Vec<Option<usize>>,
    pub axes: Vec<AxisNodes>,
    pub rules: Vec<AxisRule>,
}

impl SampledDensity {
    pub fn sample<U>(surface: &SurfaceDescriptor, counts: &[usize], rules: Option<&[AxisRule]>, u: U) -> Result<SampledDensity>
    where
        U: Fn(&SamplePoint) -> Complex64,
    {
        surface.validate()?;
        let (lo, hi) = surface.param_box();
        let d = lo.len();
        if counts.len() != d {
            return Err(LabError::Precondition(format!("{} counts for {d} sampling axes", counts.len())));
        }
        if counts.contains(&0) {
            return Err(LabError::Domain("empty surface grid".into()));
        }
        let default_rules = surface.default_rules();
        let rules = rules.unwrap_or(&default_rules);
        let axes: Vec<AxisNodes> = (0..d).map(|a| AxisNodes::new(rules[a], lo[a], hi[a], counts[a])).collect();
        let total: usize = counts.iter().product();
        let dim = surface.ambient_dim();
        let chart_dim = surface.chart_dim();
        let mut params = Vec::with_capacity(total * d);
        let mut charts = Vec::with_capacity(total * chart_dim);
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let param: Vec<f64> = (0..d).map(|a| axes[a].nodes[idx[a]]).collect();
            let w: f64 = (0..d).map(|a| axes[a].weights[idx[a]]).product();
            let chart = surface.chart_of_param(&param);
            let point = surface.point(&chart);
            weights.push(w * surface.param_weight(&param)?);
            params.extend_from_slice(&param);
            charts.extend_from_slice(&chart);
            points.extend_from_slice(&point);
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let mut out = SampledDensity {
            surface: surface.clone(),
            shape: Some(counts.to_vec()),
            param_dim: d,
            chart_dim,
            dim,
            params,
            charts,
            points,
            values: vec![Complex64::new(1.0, 0.0); total],
            weights,
            max_step: vec![0.0; dim],
            aligned: surface.aligned_axes(),
            axes,
            rules: rules.to_vec(),
        };
        out.max_step = out.grid_steps();
        out.set_values(u);
        Ok(out)
    }

    /// Nodes without product structure, e.g. assembled by hand.
    pub fn scattered(
        surface: &SurfaceDescriptor,
        points: Vec<Vec<f64>>,
        values: Vec<Complex64>,
        weights: Vec<f64>,
        max_step: Vec<f64>,
    ) -> Result<SampledDensity> {
        let dim = surface.ambient_dim();
        if points.iter().any(|p| p.len() != dim) || values.len() != points.len() || weights.len() != points.len() {
            return Err(LabError::Precondition("scattered density shape mismatch".into()));
        }
        let flat: Vec<f64> = points.concat();
        Ok(SampledDensity {
            surface: surface.clone(),
            shape: None,
            param_dim: dim,
            chart_dim: dim,
            dim,
            params: flat.clone(),
            charts: flat.clone(),
            points: flat,
            values,
            weights,
            max_step,
            aligned: vec![None; dim],
            axes: Vec::new(),
            rules: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sample_point(&self, j: usize) -> SamplePoint<'_> {
        SamplePoint {
            param: &self.params[j * self.param_dim..(j + 1) * self.param_dim],
            chart: &self.charts[j * self.chart_dim..(j + 1) * self.chart_dim],
            point: &self.points[j * self.dim..(j + 1) * self.dim],
        }
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    pub fn set_values<U: Fn(&SamplePoint) -> Complex64>(&mut self, u: U) {
        for j in 0..self.len() {
            self.values[j] = u(&self.sample_point(j));
        }
    }

    pub fn with_values<U: Fn(&SamplePoint) -> Complex64>(&self, u: U) -> SampledDensity {
        let mut out = self.clone();
        out.set_values(u);
        out
    }

    /// Σ w_j, the discrete ∫ dσ.
    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// ‖u‖_{L^q(dσ)}.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let mags: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        crate::lorentz::lp_norm(&mags, &self.weights, q)
    }

    fn grid_steps(&self) -> Vec<f64> {
        let mut steps = vec![0.0f64; self.dim];
        let Some(shape) = &self.shape else { return steps };
        let d = shape.len();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        for j in 0..self.len() {
            for a in 0..d {
                let ia = (j / strides[a]) % shape[a];
                let next = if ia + 1 < shape[a] {
                    j + strides[a]
                } else if self.axes[a].periodic && shape[a] > 1 {
                    j - ia * strides[a]
                } else {
                    continue;
                };
                let (p, q) = (self.point(j), self.point(next));
                for i in 0..self.dim {
                    steps[i] = steps[i].max((p[i] - q[i]).abs());
                }
            }
        }
        steps
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.values.iter().zip(&self.weights).map(|(u, w)| u * *w).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, n: usize) -> GridAxis {
        GridAxis { lo, hi, n }
    }

    pub fn node(&self, a: usize) -> f64 {
        if self.n == 1 {
            0.5 * (self.lo + self.hi)
        } else {
            self.lo + (self.hi - self.lo) * a as f64 / (self.n - 1) as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|a| self.node(a)).collect()
    }

    /// Trapezoid cell lengths.
    pub fn weights(&self) -> Vec<f64> {
        if self.n == 1 {
            let w = self.hi - self.lo;
            return vec![if w > 0.0 { w } else { 1.0 }];
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        let mut w = vec![h; self.n];
        w[0] *= 0.5;
        w[self.n - 1] *= 0.5;
        w
    }

    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Tensor box of evaluation points, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub axes: Vec<GridAxis>,
}

impl EvalGrid {
    pub fn new(axes: Vec<GridAxis>) -> EvalGrid {
        EvalGrid { axes }
    }

    pub fn cube(dim: usize, half: f64, n: usize) -> EvalGrid {
        EvalGrid { axes: vec![GridAxis::new(-half, half, n); dim] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scaled(&self, c: f64) -> EvalGrid {
        self.scaled_axes(&vec![c; self.dim()])
    }

    pub fn scaled_axes(&self, c: &[f64]) -> EvalGrid {
        EvalGrid {
            axes: self
                .axes
                .iter()
                .zip(c)
                .map(|(a, s)| GridAxis::new(a.lo * s, a.hi * s, a.n))
                .collect(),
        }
    }

    pub fn translated(&self, off: &[f64]) -> EvalGrid {
        EvalGrid {
            axes: self.axes.iter().zip(off).map(|(a, o)| GridAxis::new(a.lo + o, a.hi + o, a.n)).collect(),
        }
    }

    pub fn point(&self, mut flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            p[i] = a.node(flat % a.n);
            flat /= a.n;
        }
        p
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn cell_weights(&self) -> Vec<f64> {
        let per: Vec<Vec<f64>> = self.axes.iter().map(|a| a.weights()).collect();
        let mut out = vec![1.0; self.len()];
        for (flat, w) in out.iter_mut().enumerate() {
            let mut f = flat;
            for (i, a) in self.axes.iter().enumerate().rev() {
                *w *= per[i][f % a.n];
                f /= a.n;
            }
        }
        out
    }

    pub fn volume(&self) -> f64 {
        self.cell_weights().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: EvalGrid,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mags: Vec<f64> = self.values.iter().map(|z| z.norm()).collect();
        crate::lorentz::lp_norm(&mags, &self.grid.cell_weights(), p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// 2π Σᵢ max|xᵢ| · max|ΔPᵢ|, the per-cell phase bound.
pub fn alias_bound(d: &SampledDensity, extent: &[f64]) -> f64 {
    2.0 * PI * extent.iter().zip(&d.max_step).map(|(x, h)| x * h).sum::<f64>()
}

/// Scales `counts` up until the aliasing rule holds on `extent` with 10%
/// headroom; never lowers a count.
pub fn sufficient_counts(
    surface: &SurfaceDescriptor,
    counts: &[usize],
    rules: Option<&[AxisRule]>,
    extent: &[f64],
) -> Result<Vec<usize>> {
    let mut c = counts.to_vec();
    for _ in 0..8 {
        let d = SampledDensity::sample(surface, &c, rules, |_| Complex64::new(1.0, 0.0))?;
        let b = alias_bound(&d, extent);
        if b <= 0.9 * ALIAS_LIMIT {
            return Ok(c);
        }
        let f = b / (0.9 * ALIAS_LIMIT);
        c = c.iter().map(|&n| ((n as f64 - 1.0) * f).ceil() as usize + 2).collect();
    }
    Err(LabError::Refinement(format!("no surface grid up to {c:?} meets the aliasing rule")))
}

fn check_alias(d: &SampledDensity, extent: &[f64]) -> Result<()> {
    let b = alias_bound(d, extent);
    if b > ALIAS_LIMIT {
        return Err(LabError::Refinement(format!(
            "per-cell phase bound {b:.4} exceeds {ALIAS_LIMIT}; refine the surface grid or shrink the box"
        )));
    }
    Ok(())
}

struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn zeros(n: usize) -> Split {
        Split { re: vec![0.0; n], im: vec![0.0; n] }
    }

    fn from_phases(phases: impl Iterator<Item = f64>) -> Split {
        let (re, im) = phases
            .map(|t| {
                let (s, c) = t.sin_cos();
                (c, s)
            })
            .unzip();
        Split { re, im }
    }

    fn mul_assign(&mut self, t: &Split) {
        for j in 0..self.re.len() {
            let (r, m) = (self.re[j] * t.re[j] - self.im[j] * t.im[j], self.re[j] * t.im[j] + self.im[j] * t.re[j]);
            self.re[j] = r;
            self.im[j] = m;
        }
    }

    fn dot(&self, other: &Split) -> Complex64 {
        cdot(&self.re, &self.im, &other.re, &other.im)
    }
}

/// Σ a_j b_j with four interleaved accumulators combined as (0+1)+(2+3).
#[inline]
fn cdot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> Complex64 {
    let n = ar.len();
    let (ar, ai, br, bi) = (&ar[..n], &ai[..n], &br[..n], &bi[..n]);
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let blocks = n / 4;
    for b in 0..blocks {
        for l in 0..4 {
            let j = 4 * b + l;
            re[l] += ar[j] * br[j] - ai[j] * bi[j];
            im[l] += ar[j] * bi[j] + ai[j] * br[j];
        }
    }
    for j in 4 * blocks..n {
        re[0] += ar[j] * br[j] - ai[j] * bi[j];
        im[0] += ar[j] * bi[j] + ai[j] * br[j];
    }
    Complex64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]))
}

/// (u dσ)∨(x) = Σ_j e^{2πi⟨x,P_j⟩} u_j w_j on every point of the box.
pub fn extend(d: &SampledDensity, g: &EvalGrid) -> Result<Field> {
    let plan = ExtensionPlan::new(d, g)?;
    Ok(Field { grid: g.clone(), values: plan.apply(&d.coefficients()) })
}

/// Phase tables for one node set and one box, reusable across densities
/// that share the nodes.
pub struct ExtensionPlan {
    grid: EvalGrid,
    nodes: usize,
    layout: Layout,
}

enum Layout {
    Tensor { tables: Vec<Vec<Split>> },
    /// Graph over R²: ξ₁ and ξ₂ are the first two ambient coordinates, so
    /// the sum runs over ξ₂ first, then ξ₁.
    Graph { m1: usize, m2: usize, t1: Vec<Split>, t2: Vec<Split>, t3: Vec<Split> },
}

impl ExtensionPlan {
    pub fn new(d: &SampledDensity, g: &EvalGrid) -> Result<ExtensionPlan> {
        if d.is_empty() || g.is_empty() {
            return Err(LabError::Domain("empty surface or evaluation grid".into()));
        }
        if g.dim() != d.dim {
            return Err(LabError::Precondition(format!(
                "grid has {} axes, surface lives in R^{}",
                g.dim(),
                d.dim
            )));
        }
        let extent: Vec<f64> = g.axes.iter().map(|a| a.max_abs()).collect();
        check_alias(d, &extent)?;
        let graph_layout =
            d.dim == 3 && d.shape.as_ref().map(|s| s.len()) == Some(2) && d.aligned == [Some(0), Some(1), None];
        let layout = if graph_layout {
            let shape = d.shape.as_ref().expect("graph layout");
            let (m1, m2) = (shape[0], shape[1]);
            let xi1: Vec<f64> = (0..m1).map(|j1| d.points[3 * (j1 * m2)]).collect();
            let xi2: Vec<f64> = (0..m2).map(|j2| d.points[3 * j2 + 1]).collect();
            let line = |xs: Vec<f64>, ps: &[f64]| -> Vec<Split> {
                xs.iter().map(|&x| Split::from_phases(ps.iter().map(|p| 2.0 * PI * x * p))).collect()
            };
            Layout::Graph {
                m1,
                m2,
                t1: line(g.axes[0].nodes(), &xi1),
                t2: line(g.axes[1].nodes(), &xi2),
                t3: axis_table(d, 2, &g.axes[2].nodes()),
            }
        } else {
            Layout::Tensor { tables: (0..d.dim).map(|i| axis_table(d, i, &g.axes[i].nodes())).collect() }
        };
        Ok(ExtensionPlan { grid: g.clone(), nodes: d.len(), layout })
    }

    pub fn grid(&self) -> &EvalGrid {
        &self.grid
    }

    /// Field values for node coefficients u_j w_j, in grid order.
    pub fn apply(&self, coef: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(coef.len(), self.nodes, "coefficient count");
        match &self.layout {
            Layout::Tensor { tables } => self.apply_tensor(tables, coef),
            Layout::Graph { m1, m2, t1, t2, t3 } => self.apply_graph(*m1, *m2, t1, t2, t3, coef),
        }
    }

    fn apply_tensor(&self, tables: &[Vec<Split>], coef: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let dim = g.dim();
        let n_last = g.axes[dim - 1].n;
        let outer: usize = g.axes[..dim - 1].iter().map(|a| a.n).product();
        let rows: Vec<Vec<Complex64>> = (0..outer)
            .into_par_iter()
            .map(|flat| {
                let mut v = Split { re: coef.iter().map(|c| c.re).collect(), im: coef.iter().map(|c| c.im).collect() };
                let mut f = flat;
                for i in (0..dim - 1).rev() {
                    let a = f % g.axes[i].n;
                    f /= g.axes[i].n;
                    v.mul_assign(&tables[i][a]);
                }
                (0..n_last).map(|c| tables[dim - 1][c].dot(&v)).collect()
            })
            .collect();
        rows.concat()
    }

    fn apply_graph(&self, m1: usize, m2: usize, t1: &[Split], t2: &[Split], t3: &[Split], coef: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let (n1, n2, n3) = (g.axes[0].n, g.axes[1].n, g.axes[2].n);
        let c_split = Split { re: coef.iter().map(|c| c.re).collect(), im: coef.iter().map(|c| c.im).collect() };
        let columns: Vec<Vec<Complex64>> = (0..n3)
            .into_par_iter()
            .map(|c| {
                let mut w = Split { re: t3[c].re.clone(), im: t3[c].im.clone() };
                w.mul_assign(&c_split);
                let mut col = vec![Complex64::new(0.0, 0.0); n1 * n2];
                let mut inner = Split::zeros(m1);
                for b in 0..n2 {
                    for j1 in 0..m1 {
                        let s = j1 * m2..(j1 + 1) * m2;
                        let z = cdot(&t2[b].re, &t2[b].im, &w.re[s.clone()], &w.im[s]);
                        inner.re[j1] = z.re;
                        inner.im[j1] = z.im;
                    }
                    for a in 0..n1 {
                        col[a * n2 + b] = t1[a].dot(&inner);
                    }
                }
                col
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2 * n3];
        for (c, col) in columns.iter().enumerate() {
            for (ab, v) in col.iter().enumerate() {
                out[ab * n3 + c] = *v;
            }
        }
        out
    }
}

fn axis_table(d: &SampledDensity, axis: usize, xs: &[f64]) -> Vec<Split> {
    let dim = d.dim;
    xs.iter()
        .map(|&x| Split::from_phases((0..d.len()).map(|j| 2.0 * PI * x * d.points[j * dim + axis])))
        .collect()
}

/// Pointwise evaluation at arbitrary points.
pub fn extend_points(d: &SampledDensity, pts: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    if d.is_empty() || pts.is_empty() {
        return Err(LabError::Domain("empty surface or point set".into()));
    }
    if pts.iter().any(|p| p.len() != d.dim) {
        return Err(LabError::Precondition("point dimension mismatch".into()));
    }
    let mut extent = vec![0.0f64; d.dim];
    for p in pts {
        for (e, x) in extent.iter_mut().zip(p) {
            *e = e.max(x.abs());
        }
    }
    check_alias(d, &extent)?;
    let coef = d.coefficients();
    let (cr, ci): (Vec<f64>, Vec<f64>) = coef.iter().map(|c| (c.re, c.im)).unzip();
    let dim = d.dim;
    Ok(pts
        .par_iter()
        .map(|x| {
            let t = Split::from_phases((0..d.len()).map(|j| {
                let p = &d.points[j * dim..(j + 1) * dim];
                2.0 * PI * x.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
            }));
            cdot(&t.re, &t.im, &cr, &ci)
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct TrialDensity {
    pub label: String,
    pub density: SampledDensity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRatio {
    pub label: String,
    pub extension_norm: f64,
    pub density_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    /// Lower bound for the truncated operator norm.
    pub best_ratio: f64,
    pub best_label: String,
    pub trials: Vec<TrialRatio>,
    pub skipped: usize,
}

/// Trial densities with ‖u‖ below this are skipped.
pub const NEGLIGIBLE_NORM: f64 = 1e-14;

/// max over the family of ‖(u dσ)∨‖_{L^{p'}(box)} / ‖u‖_{L^{q'}(dσ)}.
pub fn extension_ratio(family: &[TrialDensity], pprime: f64, qprime: f64, g: &EvalGrid) -> Result<RatioReport> {
    let mut trials = Vec::new();
    let mut skipped = 0;
    for t in family {
        let rhs = t.density.lq_norm(qprime);
        if rhs < NEGLIGIBLE_NORM {
            skipped += 1;
            continue;
        }
        let lhs = extend(&t.density, g)?.lp_norm(pprime);
        trials.push(TrialRatio { label: t.label.clone(), extension_norm: lhs, density_norm: rhs, ratio: lhs / rhs });
    }
    let (best_ratio, best_label) = trials
        .iter()
        .fold((0.0, String::new()), |(r, l), t| if t.ratio > r { (t.ratio, t.label.clone()) } else { (r, l) });
    Ok(RatioReport { best_ratio, best_label, trials, skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub constant: bool,
    pub cap_widths: Vec<f64>,
    pub bumps: usize,
    pub modulations: usize,
    /// Modulation frequencies are drawn from [−m, m]^D.
    pub max_modulation: f64,
    pub seed: u64,
}

impl Default for FamilySpec {
    fn default() -> FamilySpec {
        FamilySpec {
            constant: true,
            cap_widths: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            bumps: 20,
            modulations: 10,
            max_modulation: 2.0,
            seed: 0,
        }
    }
}

struct ParamBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    periodic: Vec<bool>,
}

impl ParamBox {
    fn offset(&self, a: usize, x: f64, c: f64) -> f64 {
        let d = x - c;
        if self.periodic[a] {
            let l = self.hi[a] - self.lo[a];
            d - l * (d / l).round()
        } else {
            d
        }
    }
}

#[derive(Debug, Clone)]
struct Bump {
    center: Vec<f64>,
    width: Vec<f64>,
    amp: Complex64,
}

fn random_bump(rng: &mut ChaCha8Rng, b: &ParamBox, free_axes: &[bool]) -> Bump {
    let d = b.lo.len();
    let mut center = Vec::with_capacity(d);
    let mut width = Vec::with_capacity(d);
    for a in 0..d {
        let l = b.hi[a] - b.lo[a];
        if !free_axes[a] {
            center.push(0.5 * (b.lo[a] + b.hi[a]));
            width.push(f64::INFINITY);
            continue;
        }
        let w = rng.random_range(0.1..0.3) * l;
        let c = if b.periodic[a] { b.lo[a] + rng.random::<f64>() * l } else { rng.random_range(b.lo[a] + w..b.hi[a] - w) };
        center.push(c);
        width.push(w);
    }
    let amp = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..2.0 * PI));
    Bump { center, width, amp }
}

fn bump_value(bm: &Bump, b: &ParamBox, x: &[f64]) -> Complex64 {
    let mut v = 1.0;
    for a in 0..x.len() {
        if bm.width[a].is_finite() {
            v *= bump(b.offset(a, x[a], bm.center[a]) / bm.width[a]);
        }
    }
    bm.amp * v
}

/// Constant, Knapp caps, random smooth bumps and modulated bumps on the
/// sampling grid of `base`. Cone caps stay long in the radial direction.
pub fn standard_family(base: &SampledDensity, spec: &FamilySpec) -> Vec<TrialDensity> {
    let (lo, hi) = base.surface.param_box();
    let periodic: Vec<bool> = base.axes.iter().map(|a| a.periodic).collect();
    let pb = ParamBox { lo, hi, periodic };
    let d = pb.lo.len();
    let radial_free = base.surface.kind != SurfaceKind::Cone;
    let cap_axes: Vec<bool> = (0..d).map(|a| a > 0 || radial_free).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    if spec.constant {
        out.push(TrialDensity { label: "constant".into(), density: base.with_values(|_| Complex64::new(1.0, 0.0)) });
    }
    for &w in &spec.cap_widths {
        let pb_ref = &pb;
        let cap_axes = &cap_axes;
        let density = base.with_values(|sp| {
            let mut v = 1.0;
            for a in 0..d {
                let (l, h) = (pb_ref.lo[a], pb_ref.hi[a]);
                if !cap_axes[a] {
                    v *= plateau(sp.param[a], l, h, 0.1);
                    continue;
                }
                let c = 0.5 * (l + h);
                let half = 0.5 * w * (h - l);
                let x = c + pb_ref.offset(a, sp.param[a], c);
                v *= plateau(x, c - half, c + half, 0.1);
            }
            Complex64::new(v, 0.0)
        });
        out.push(TrialDensity { label: format!("cap(width={w})"), density });
    }
    let free = vec![true; d];
    for i in 0..spec.bumps {
        let count = rng.random_range(1..=3);
        let bumps: Vec<Bump> = (0..count).map(|_| random_bump(&mut rng, &pb, &free)).collect();
        let density = base.with_values(|sp| bumps.iter().map(|bm| bump_value(bm, &pb, sp.param)).sum());
        out.push(TrialDensity { label: format!("bump#{i}"), density });
    }
    for i in 0..spec.modulations {
        let bm = random_bump(&mut rng, &pb, &free);
        let x0: Vec<f64> = (0..base.dim).map(|_| rng.random_range(-spec.max_modulation..=spec.max_modulation)).collect();
        let density = base.with_values(|sp| {
            let phase = 2.0 * PI * x0.iter().zip(sp.point).map(|(a, b)| a * b).sum::<f64>();
            bump_value(&bm, &pb, sp.param) * Complex64::from_polar(1.0, phase)
        });
        out.push(TrialDensity { label: format!("modulated#{i}"), density });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub direction: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    /// Envelope window length in x units and samples per window.
    pub window: f64,
    pub window_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub radii: Vec<f64>,
    pub envelope: Vec<f64>,
}

pub fn decay_fit(d: &SampledDensity, spec: &DecaySpec) -> Result<DecayFit> {
    if spec.radii < 20 {
        return Err(LabError::Precondition(format!("{} radii, at least 20 needed", spec.radii)));
    }
    if !(spec.r_min > 0.0 && spec.r_max > spec.r_min) || spec.window_samples == 0 {
        return Err(LabError::Precondition("bad radius range".into()));
    }
    let len = crate::surface::norm(&spec.direction);
    let dir: Vec<f64> = spec.direction.iter().map(|x| x / len).collect();
    let ratio = (spec.r_max / spec.r_min).ln();
    let radii: Vec<f64> =
        (0..spec.radii).map(|i| spec.r_min * (ratio * i as f64 / (spec.radii - 1) as f64).exp()).collect();
    let m = spec.window_samples;
    let pts: Vec<Vec<f64>> = radii
        .iter()
        .flat_map(|&r| {
            let dir = &dir;
            (0..m).map(move |s| {
                let off = if m == 1 { 0.0 } else { spec.window * (s as f64 / (m - 1) as f64 - 0.5) };
                dir.iter().map(|w| (r + off) * w).collect::<Vec<f64>>()
            })
        })
        .collect();
    let vals = extend_points(d, &pts)?;
    let envelope: Vec<f64> = vals.chunks(m).map(|c| c.iter().fold(0.0f64, |a, z| a.max(z.norm()))).collect();
    if envelope.iter().any(|e| !(*e > 0.0)) {
        return Err(LabError::Numerical("envelope vanishes; cannot fit a power law".into()));
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = envelope.iter().map(|e| e.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(DecayFit { slope, intercept, radii, envelope })
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::circle_extension;

    fn circle(n: usize) -> SampledDensity {
        SampledDensity::sample(&SurfaceDescriptor::circle(), &[n], None, |_| Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn circle_total_measure_and_origin() {
        let d = circle(64);
        assert!((d.total_measure() - 2.0 * PI).abs() < 1e-13);
        let v = extend_points(&d, &[vec![0.0, 0.0]]).unwrap();
        assert!((v[0].re - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn circle_matches_bessel_on_box() {
        let d = circle(1024);
        let g = EvalGrid::cube(2, 3.0, 13);
        let f = extend(&d, &g).unwrap();
        for (i, z) in f.values.iter().enumerate() {
            let x = g.point(i);
            let want = circle_extension(crate::surface::norm(&x));
            assert!((z.re - want).abs() < 1e-10 && z.im.abs() < 1e-10, "{x:?}");
        }
    }

    #[test]
    fn tensor_and_pointwise_paths_agree() {
        let s = SurfaceDescriptor::paraboloid(3, 0.5);
        let d = SampledDensity::sample(&s, &[80, 60], None, |sp| {
            Complex64::new(1.0 + sp.chart[0], sp.chart[1] * sp.chart[0])
        })
        .unwrap();
        let g = EvalGrid::new(vec![GridAxis::new(-0.5, 0.3, 4), GridAxis::new(-0.3, 0.5, 5), GridAxis::new(0.0, 0.4, 3)]);
        let f = extend(&d, &g).unwrap();
        let direct = extend_points(&d, &g.points()).unwrap();
        for (a, b) in f.values.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
        // and the generic path, by hiding the graph layout
        let mut hidden = d.clone();
        hidden.aligned = vec![None; 3];
        let f2 = extend(&hidden, &g).unwrap();
        for (a, b) in f2.values.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn aliasing_is_refused() {
        let d = circle(16);
        let g = EvalGrid::cube(2, 10.0, 5);
        assert!(matches!(extend(&d, &g), Err(LabError::Refinement(_))));
    }

    #[test]
    fn cone_ring_origin_value() {
        let s = SurfaceDescriptor::cone_ring(2);
        let d = SampledDensity::sample(&s, &[9, 32], None, |_| Complex64::new(1.0, 0.0)).unwrap();
        let v = extend_points(&d, &[vec![0.0, 0.0, 0.0]]).unwrap();
        assert!((v[0].re - 3.0 * PI).abs() < 1e-12);
        for j in 0..d.len() {
            let p = d.point(j);
            assert!((p[2] - (p[0] * p[0] + p[1] * p[1]).sqrt()).abs() < 1e-12);
        }
    }
}
