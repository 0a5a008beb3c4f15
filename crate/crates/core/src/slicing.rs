//! Slicing the cone into spheres, parabolas and hyperbolas; per-link
//! verification of the resulting inequality chains and of the finite-type
//! chain; slice constants and their transfer to the cone.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::extension::{
    extend_points, extension_ratio, standard_family, EvalGrid, ExtensionPlan, FamilySpec, GridAxis, RatioReport,
    SampledDensity,
};
use crate::knapp::{admissible_compact, scale_invariant};
use crate::lorentz::{embedding_constant, lorentz_norm_raw, lp_norm, weak_holder_constant};
use crate::poly::scaled_taylor;
use crate::quadrature::{smooth_step, trapezoid, AxisRule};
use crate::reference::babenko_beckner;
use crate::surface::{dual, norm, ExponentPair, FnGraph, GraphFn, GraphMeasure, SurfaceDescriptor};

/// a′ = ξ′, a_n = (τ+ξ_n)/√2, b = (τ−ξ_n)/√2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCoords {
    pub a_prime: Vec<f64>,
    pub a_n: f64,
    pub b: f64,
}

impl NullCoords {
    /// The cone point above (a′, a_n), where b = |a′|²/(2a_n).
    pub fn on_cone(a_prime: &[f64], a_n: f64) -> NullCoords {
        let b = a_prime.iter().map(|x| x * x).sum::<f64>() / (2.0 * a_n);
        NullCoords { a_prime: a_prime.to_vec(), a_n, b }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        let mut v = self.a_prime.clone();
        v.push(self.a_n);
        v.push(self.b);
        v
    }
}

pub fn to_null(xi: &[f64], tau: f64) -> NullCoords {
    let n = xi.len();
    NullCoords {
        a_prime: xi[..n - 1].to_vec(),
        a_n: (tau + xi[n - 1]) * FRAC_1_SQRT_2,
        b: (tau - xi[n - 1]) * FRAC_1_SQRT_2,
    }
}

pub fn from_null(c: &NullCoords) -> (Vec<f64>, f64) {
    let mut xi = c.a_prime.clone();
    xi.push((c.a_n - c.b) * FRAC_1_SQRT_2);
    (xi, (c.a_n + c.b) * FRAC_1_SQRT_2)
}

/// Overlap of the two sector cutoffs, measured in ξ_n/|ξ|.
pub const SECTOR_OVERLAP: f64 = 0.1;

/// Smooth partition of unity (χ₊, χ₋) splitting the cone by the sign of
/// ξ_n/|ξ|, with transition band |ξ_n/|ξ|| < SECTOR_OVERLAP/2.
pub fn sector_partition(xi: &[f64]) -> (f64, f64) {
    let c = xi[xi.len() - 1] / norm(xi);
    let plus = smooth_step((c + 0.5 * SECTOR_OVERLAP) / SECTOR_OVERLAP);
    (plus, 1.0 - plus)
}

/// u on the cone ring, split into sphere densities r ↦ u(r·).
#[derive(Debug, Clone)]
pub struct PolarSlices {
    pub n: usize,
    pub radii: Vec<f64>,
    /// Radial quadrature weight times r^{n−2}.
    pub radial_weights: Vec<f64>,
    pub slices: Vec<SampledDensity>,
}

pub fn polar_slices(d: &SampledDensity) -> Result<PolarSlices> {
    let Some(shape) = &d.shape else {
        return Err(LabError::Domain("polar slicing needs a polar product grid".into()));
    };
    if d.surface.kind != crate::surface::SurfaceKind::Cone {
        return Err(LabError::Domain("polar slicing applies to cone densities".into()));
    }
    let n = d.surface.n;
    let sphere = SurfaceDescriptor::sphere(n);
    let per_slice: usize = shape[1..].iter().product();
    let base = SampledDensity::sample(&sphere, &shape[1..], Some(&d.rules[1..]), |_| Complex64::new(1.0, 0.0))?;
    let radial = &d.axes[0];
    let mut slices = Vec::with_capacity(shape[0]);
    for i in 0..shape[0] {
        let mut s = base.clone();
        s.values.copy_from_slice(&d.values[i * per_slice..(i + 1) * per_slice]);
        slices.push(s);
    }
    Ok(PolarSlices {
        n,
        radii: radial.nodes.clone(),
        radial_weights: radial.nodes.iter().zip(&radial.weights).map(|(r, w)| w * r.powi(n as i32 - 2)).collect(),
        slices,
    })
}

impl PolarSlices {
    /// Σ_r e^{2πitr} r^{n−2} w_r ∫ e^{2πi r x·ω} u(rω) dω at points (x, t).
    pub fn reassemble(&self, pts: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); pts.len()];
        for ((r, w), s) in self.radii.iter().zip(&self.radial_weights).zip(&self.slices) {
            if s.values.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p[..self.n].iter().map(|x| x * r).collect()).collect();
            let inner = extend_points(s, &scaled)?;
            for ((o, v), p) in out.iter_mut().zip(inner).zip(pts) {
                *o += Complex64::from_polar(*w, 2.0 * PI * p[self.n] * r) * v;
            }
        }
        Ok(out)
    }

    pub fn nonzero_slices(&self) -> usize {
        self.slices.iter().filter(|s| s.values.iter().any(|v| v.norm() > 0.0)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainId {
    Sphere,
    Parab,
    Hyperb,
    FiniteType,
}

impl ChainId {
    pub fn name(&self) -> &'static str {
        match self {
            ChainId::Sphere => "sphere",
            ChainId::Parab => "parab",
            ChainId::Hyperb => "hyperb",
            ChainId::FiniteType => "finite-type",
        }
    }
}

/// Geometry of one chain run. The transverse variable s is r, a_n, ξ_n or
/// ξ₂; the slice grid covers the sphere angles, the a′ box, the η box or the
/// ξ₁ interval; `y_box` is the box dual to the slice variables and `z_axis`
/// the axis dual to s.
#[derive(Clone)]
pub struct ChainSetup {
    pub chain: ChainId,
    pub n: usize,
    pub exponents: ExponentPair,
    pub s_range: (f64, f64),
    pub s_count: usize,
    pub slice_half: f64,
    pub slice_counts: Vec<usize>,
    pub y_box: EvalGrid,
    pub z_axis: GridAxis,
    /// Height function for the finite-type chain.
    pub graph: Option<Arc<dyn GraphFn>>,
}

impl std::fmt::Debug for ChainSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainSetup")
            .field("chain", &self.chain)
            .field("n", &self.n)
            .field("exponents", &self.exponents)
            .field("s_range", &self.s_range)
            .field("s_count", &self.s_count)
            .field("slice_half", &self.slice_half)
            .field("slice_counts", &self.slice_counts)
            .field("y_box", &self.y_box)
            .field("z_axis", &self.z_axis)
            .finish()
    }
}

impl ChainSetup {
    /// Whole-cone dilation: s-range and a′ box grow by λ, the dual boxes
    /// shrink by λ.
    pub fn rescaled(&self, lambda: f64) -> ChainSetup {
        let mut out = self.clone();
        out.s_range = (self.s_range.0 * lambda, self.s_range.1 * lambda);
        if self.chain == ChainId::Parab {
            out.slice_half = self.slice_half * lambda;
        }
        out.y_box = self.y_box.scaled(1.0 / lambda);
        out.z_axis = GridAxis::new(self.z_axis.lo / lambda, self.z_axis.hi / lambda, self.z_axis.n);
        out
    }

    fn check(&self) -> Result<()> {
        let (s0, s1) = self.s_range;
        if !(s1 > s0) || self.s_count < 2 {
            return Err(LabError::Precondition("transverse range needs s0 < s1 and two nodes".into()));
        }
        let slice_dim = match self.chain {
            ChainId::FiniteType => 1,
            _ => self.n - 1,
        };
        if self.slice_counts.len() != slice_dim {
            return Err(LabError::Precondition(format!("slice grid needs {slice_dim} counts")));
        }
        let y_dim = match self.chain {
            ChainId::FiniteType => 2,
            _ => self.n,
        };
        if self.y_box.dim() != y_dim {
            return Err(LabError::Precondition(format!("dual box needs {y_dim} axes")));
        }
        let e = &self.exponents;
        match self.chain {
            ChainId::FiniteType => {
                if self.graph.as_ref().map(|g| g.dim()) != Some(2) {
                    return Err(LabError::Precondition("finite-type chain needs a graph over R²".into()));
                }
                if e.qprime() < e.p {
                    return Err(LabError::Precondition("finite-type chain needs q' ≥ p".into()));
                }
            }
            _ => {
                if s0 <= 0.0 {
                    return Err(LabError::Precondition("transverse variable must stay positive".into()));
                }
                if e.qprime() > e.pprime() {
                    return Err(LabError::Precondition("embedding step needs q' ≤ p'".into()));
                }
                if e.qprime() <= e.p {
                    return Err(LabError::Precondition("Hölder step needs q' > p".into()));
                }
            }
        }
        Ok(())
    }

    /// Exponent α of the power weight F(s) = s^{−1/α}.
    pub fn weak_exponent(&self) -> f64 {
        1.0 / (1.0 / self.exponents.p - 1.0 / self.exponents.qprime())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Inequality,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub name: String,
    pub kind: LinkKind,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bound: Option<f64>,
    /// Whether the bound is certified rather than measured.
    pub certified: bool,
    pub exceeds_bound: bool,
    pub violated: bool,
}

/// Relative tolerance for identity links.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Slack on certified bounds, for rounding in the norm sums.
pub const BOUND_SLACK: f64 = 1e-9;

impl ChainLink {
    fn new(name: &str, kind: LinkKind, lhs: f64, rhs: f64, bound: Option<f64>, certified: bool) -> ChainLink {
        let ratio = if rhs == 0.0 {
            if lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            lhs / rhs
        };
        let exceeds_bound = match (kind, bound) {
            (LinkKind::Identity, _) => (lhs - rhs).abs() > IDENTITY_TOL * lhs.abs().max(rhs.abs()),
            (LinkKind::Inequality, Some(b)) => ratio > b * (1.0 + BOUND_SLACK),
            (LinkKind::Inequality, None) => false,
        };
        let violated = !ratio.is_finite() || (certified && exceeds_bound);
        ChainLink { name: name.to_string(), kind, lhs, rhs, ratio, bound, certified, exceeds_bound, violated }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: ChainId,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub pprime: f64,
    pub qprime: f64,
    pub u_label: String,
    pub trivial: bool,
    pub links: Vec<ChainLink>,
    pub extension_norm: f64,
    pub density_norm: f64,
    pub extension_ratio: f64,
    /// ‖F‖_{α,∞} over the sampled transverse range.
    pub weak_norm_f: f64,
}

impl ChainReport {
    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn violations(&self) -> Vec<&ChainLink> {
        self.links.iter().filter(|l| l.violated).collect()
    }
}

/// Precomputed slice plans for repeated chain runs on one setup.
pub struct ChainRunner {
    setup: ChainSetup,
    s_nodes: Vec<f64>,
    s_weights: Vec<f64>,
    slices: Vec<SliceSlot>,
    z_phases: Vec<Vec<Complex64>>,
    y_weights: Vec<f64>,
    z_weights: Vec<f64>,
}

struct SliceSlot {
    plan: ExtensionPlan,
    base: SampledDensity,
    /// Chart points of the underlying surface at which u is read.
    u_points: Vec<Vec<f64>>,
    /// Per-node weight for the norm entering the slice bound.
    norm_weights: Vec<f64>,
    /// Per-node extra factor folded into the slice density (φ for the
    /// finite-type chain).
    density_factor: Vec<f64>,
    prefactor: f64,
}

impl ChainRunner {
    pub fn new(setup: &ChainSetup) -> Result<ChainRunner> {
        setup.check()?;
        let s_axis = trapezoid(setup.s_range.0, setup.s_range.1, setup.s_count);
        let n = setup.n;
        let mut slices = Vec::with_capacity(setup.s_count);
        let rules = vec![AxisRule::Trapezoid; setup.slice_counts.len()];
        for &s in &s_axis.nodes {
            let slot = match setup.chain {
                ChainId::Sphere => {
                    let base = SampledDensity::sample(&SurfaceDescriptor::sphere(n), &setup.slice_counts, None, |_| {
                        Complex64::new(1.0, 0.0)
                    })?;
                    let u_points = (0..base.len()).map(|j| base.point(j).iter().map(|w| s * w).collect()).collect();
                    SliceSlot {
                        plan: ExtensionPlan::new(&base, &setup.y_box.scaled(s))?,
                        norm_weights: base.weights.clone(),
                        density_factor: vec![1.0; base.len()],
                        u_points,
                        base,
                        prefactor: s.powi(n as i32 - 2),
                    }
                }
                ChainId::Parab => {
                    let surf = SurfaceDescriptor::paraboloid(n, setup.slice_half);
                    let base = SampledDensity::sample(&surf, &setup.slice_counts, Some(&rules), |_| Complex64::new(1.0, 0.0))?;
                    let u_points = (0..base.len())
                        .map(|j| from_null(&NullCoords::on_cone(base.sample_point(j).chart, s)).0)
                        .collect();
                    let mut scale = vec![1.0; n];
                    scale[n - 1] = 1.0 / s;
                    SliceSlot {
                        plan: ExtensionPlan::new(&base, &setup.y_box.scaled_axes(&scale))?,
                        norm_weights: base.weights.clone(),
                        density_factor: vec![1.0; base.len()],
                        u_points,
                        base,
                        prefactor: FRAC_1_SQRT_2 / s,
                    }
                }
                ChainId::Hyperb => {
                    let surf = SurfaceDescriptor::hyperboloid(n, setup.slice_half);
                    let base = SampledDensity::sample(&surf, &setup.slice_counts, Some(&rules), |_| Complex64::new(1.0, 0.0))?;
                    let u_points = (0..base.len())
                        .map(|j| {
                            let mut xi: Vec<f64> = base.sample_point(j).chart.iter().map(|e| s * e).collect();
                            xi.push(s);
                            xi
                        })
                        .collect();
                    SliceSlot {
                        plan: ExtensionPlan::new(&base, &setup.y_box.scaled(s))?,
                        norm_weights: base.weights.clone(),
                        density_factor: vec![1.0; base.len()],
                        u_points,
                        base,
                        prefactor: s.powi(n as i32 - 2),
                    }
                }
                ChainId::FiniteType => {
                    let f = setup.graph.clone().expect("checked");
                    let fs = f.clone();
                    let curve = FnGraph::new(1, "slice", move |t: &[f64]| fs.value(&[t[0], s]));
                    let surf = SurfaceDescriptor::graph(
                        Arc::new(curve),
                        None,
                        GraphMeasure::Chart,
                        vec![-setup.slice_half],
                        vec![setup.slice_half],
                    );
                    let base = SampledDensity::sample(&surf, &setup.slice_counts, None, |_| Complex64::new(1.0, 0.0))?;
                    let step = 1e-4 * 2.0 * setup.slice_half;
                    let mut u_points = Vec::with_capacity(base.len());
                    let mut phi = Vec::with_capacity(base.len());
                    for j in 0..base.len() {
                        let xi = vec![base.sample_point(j).chart[0], s];
                        let (g, _) = crate::surface::derivatives(f.as_ref(), &xi, step)?;
                        phi.push((1.0 + g[0] * g[0] + g[1] * g[1]).sqrt());
                        u_points.push(xi);
                    }
                    SliceSlot {
                        plan: ExtensionPlan::new(&base, &setup.y_box)?,
                        norm_weights: base.weights.clone(),
                        density_factor: phi,
                        u_points,
                        base,
                        prefactor: 1.0,
                    }
                }
            };
            slices.push(slot);
        }
        let z_nodes = setup.z_axis.nodes();
        let z_phases = z_nodes
            .iter()
            .map(|&z| s_axis.nodes.iter().map(|&s| Complex64::from_polar(1.0, 2.0 * PI * z * s)).collect())
            .collect();
        Ok(ChainRunner {
            y_weights: setup.y_box.cell_weights(),
            z_weights: setup.z_axis.weights(),
            setup: setup.clone(),
            s_nodes: s_axis.nodes.clone(),
            s_weights: s_axis.weights.clone(),
            slices,
            z_phases,
        })
    }

    pub fn setup(&self) -> &ChainSetup {
        &self.setup
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    /// Runs every link for u given on the surface chart (ξ ∈ Rⁿ for the
    /// cone chains, (ξ₁, ξ₂) for the finite-type chain).
    pub fn run(&self, u: &(dyn Fn(&[f64]) -> Complex64 + Sync), label: &str, slice_constant: f64) -> Result<ChainReport> {
        let st = &self.setup;
        let e = st.exponents;
        let (p, pp, q, qp) = (e.p, e.pprime(), e.q, e.qprime());
        let n = st.n;
        let ns = self.s_nodes.len();
        let ny = st.y_box.len();

        let mut h = Vec::with_capacity(ns);
        // per slice: ‖u‖ in the slice-bound norm, and the plain chart norm
        let mut slice_norm = Vec::with_capacity(ns);
        let mut chart_norm = Vec::with_capacity(ns);
        let mut max_u = 0.0f64;
        for (i, slot) in self.slices.iter().enumerate() {
            let vals: Vec<Complex64> = slot.u_points.iter().map(|x| u(x)).collect();
            if st.chain == ChainId::Parab {
                for (j, v) in vals.iter().enumerate() {
                    let a = slot.base.sample_point(j).chart;
                    if v.norm() > 0.0 && norm(a) > self.s_nodes[i] * (1.0 + 1e-12) {
                        return Err(LabError::Precondition(format!(
                            "u is nonzero outside the sector |a'| ≤ a_n at a' = {a:?}, a_n = {}",
                            self.s_nodes[i]
                        )));
                    }
                }
            }
            max_u = vals.iter().fold(max_u, |m, v| m.max(v.norm()));
            let coef: Vec<Complex64> = vals
                .iter()
                .zip(&slot.base.weights)
                .zip(&slot.density_factor)
                .map(|((v, w), f)| v * (w * f))
                .collect();
            let field = slot.plan.apply(&coef);
            h.push(field.into_iter().map(|z| z * slot.prefactor).collect::<Vec<Complex64>>());
            let mags: Vec<f64> = vals.iter().zip(&slot.density_factor).map(|(v, f)| v.norm() * f).collect();
            slice_norm.push(lp_norm(&mags, &slot.norm_weights, qp));
            let plain: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
            chart_norm.push(lp_norm(&plain, &slot.norm_weights, qp));
        }

        // E(y, z) = Σ_s e^{2πizs} h(s, y) w_s
        let nz = st.z_axis.n;
        let mut e_abs = vec![0.0; ny * nz];
        for y in 0..ny {
            for (zi, ph) in self.z_phases.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..ns {
                    acc += ph[s] * h[s][y] * self.s_weights[s];
                }
                e_abs[y * nz + zi] = acc.norm();
            }
        }
        let cell: Vec<f64> = (0..ny * nz).map(|k| self.y_weights[k / nz] * self.z_weights[k % nz]).collect();
        let lhs = lp_norm(&e_abs, &cell, pp);

        let finite_type = st.chain == ChainId::FiniteType;
        // transverse exponents: Lorentz (p, p') for the cone, plain L^p otherwise
        let (sa, sb) = if finite_type { (p, p) } else { (p, pp) };
        let h_abs: Vec<Vec<f64>> = h.iter().map(|row| row.iter().map(|z| z.norm()).collect()).collect();
        let hy_profile: Vec<f64> = (0..ny)
            .map(|y| {
                let col: Vec<f64> = (0..ns).map(|s| h_abs[s][y]).collect();
                lorentz_norm_raw(&col, &self.s_weights, sa, sb)
            })
            .collect();
        let hy_rhs = lp_norm(&hy_profile, &self.y_weights, pp);
        let slice_profile: Vec<f64> = h_abs.iter().map(|row| lp_norm(row, &self.y_weights, pp)).collect();
        let inter_rhs = lorentz_norm_raw(&slice_profile, &self.s_weights, sa, sb);

        let mut links = Vec::new();
        let density_norm;
        let mut weak_norm_f = 0.0;
        if finite_type {
            links.push(ChainLink::new("hausdorff-young", LinkKind::Inequality, lhs, hy_rhs, Some(babenko_beckner(p)), true));
            links.push(ChainLink::new("minkowski", LinkKind::Inequality, hy_rhs, inter_rhs, Some(1.0), true));
            let slice_rhs = lp_norm(&slice_norm, &self.s_weights, p);
            links.push(ChainLink::new("slice", LinkKind::Inequality, inter_rhs, slice_rhs, Some(slice_constant), false));
            let plain_rhs = lp_norm(&chart_norm, &self.s_weights, p);
            let max_phi = self.slices.iter().flat_map(|s| s.density_factor.iter()).fold(1.0f64, |m, v| m.max(*v));
            links.push(ChainLink::new("absorb-weight", LinkKind::Inequality, slice_rhs, plain_rhs, Some(max_phi), true));
            let flat_norm = lp_norm(&chart_norm, &self.s_weights, qp);
            let len = st.s_range.1 - st.s_range.0;
            links.push(ChainLink::new(
                "holder-interval",
                LinkKind::Inequality,
                plain_rhs,
                flat_norm,
                Some(len.powf(1.0 / p - 1.0 / qp)),
                true,
            ));
            density_norm = lp_norm(&slice_norm_unweighted_phi(&self.slices, u, qp), &self.s_weights, qp);
            links.push(ChainLink::new("measure", LinkKind::Inequality, flat_norm, density_norm, Some(1.0), true));
        } else {
            let sn: Vec<f64> = self.s_nodes.clone();
            let (b, f, g, factor): (Vec<f64>, Vec<f64>, Vec<f64>, f64) = match st.chain {
                ChainId::Sphere | ChainId::Hyperb => {
                    let nf = n as f64;
                    let b = sn.iter().zip(&slice_norm).map(|(s, m)| s.powf(nf - 2.0 - nf / pp) * m).collect();
                    let f = sn.iter().map(|s| s.powf((nf - 2.0) / q - nf / pp)).collect();
                    let g = sn.iter().zip(&slice_norm).map(|(s, m)| s.powf((nf - 2.0) / qp) * m).collect();
                    (b, f, g, 1.0)
                }
                ChainId::Parab => {
                    let b = sn.iter().zip(&slice_norm).map(|(s, m)| FRAC_1_SQRT_2 * s.powf(1.0 / pp - 1.0) * m).collect();
                    let f = sn.iter().map(|s| s.powf(1.0 / qp - 1.0 / p)).collect();
                    let g = sn.iter().zip(&slice_norm).map(|(s, m)| FRAC_1_SQRT_2 * s.powf(-1.0 / qp) * m).collect();
                    (b, f, g, 2f64.powf(-0.5 / q))
                }
                ChainId::FiniteType => unreachable!(),
            };
            density_norm = self.cone_density_norm(u, qp);
            let b_norm = lorentz_norm_raw(&b, &self.s_weights, p, pp);
            let fg: Vec<f64> = f.iter().zip(&g).map(|(a, c)| a * c).collect();
            let fg_pp = lorentz_norm_raw(&fg, &self.s_weights, p, pp);
            let fg_qp = lorentz_norm_raw(&fg, &self.s_weights, p, qp);
            let support: Vec<usize> = (0..ns).filter(|&i| g[i] > 0.0).collect();
            let f_sup: Vec<f64> = support.iter().map(|&i| f[i]).collect();
            let w_sup: Vec<f64> = support.iter().map(|&i| self.s_weights[i]).collect();
            weak_norm_f = lorentz_norm_raw(&f_sup, &w_sup, st.weak_exponent(), f64::INFINITY);
            let g_norm = lp_norm(&g, &self.s_weights, qp);
            links.push(ChainLink::new("hausdorff-young", LinkKind::Inequality, lhs, hy_rhs, None, false));
            links.push(ChainLink::new("interchange", LinkKind::Inequality, hy_rhs, inter_rhs, None, false));
            links.push(ChainLink::new("slice", LinkKind::Inequality, inter_rhs, b_norm, Some(slice_constant), false));
            links.push(ChainLink::new("regroup", LinkKind::Identity, b_norm, fg_pp, None, true));
            links.push(ChainLink::new(
                "embedding",
                LinkKind::Inequality,
                fg_pp,
                fg_qp,
                Some(embedding_constant(p, qp, pp)),
                true,
            ));
            links.push(ChainLink::new(
                "holder",
                LinkKind::Inequality,
                fg_qp,
                weak_norm_f * g_norm,
                Some(weak_holder_constant(p)),
                true,
            ));
            links.push(ChainLink::new("final", LinkKind::Identity, g_norm, factor * density_norm, None, true));
        }
        let trivial = max_u == 0.0;
        if trivial {
            for l in &mut links {
                l.violated = false;
                l.exceeds_bound = false;
            }
        }
        Ok(ChainReport {
            chain: st.chain,
            n,
            p,
            q,
            pprime: pp,
            qprime: qp,
            u_label: label.to_string(),
            trivial,
            links,
            extension_norm: lhs,
            density_norm,
            extension_ratio: if density_norm > 0.0 { lhs / density_norm } else { 0.0 },
            weak_norm_f,
        })
    }

    /// ‖u‖_{L^{q'}(dσ)} assembled from the surface measure directly.
    fn cone_density_norm(&self, u: &(dyn Fn(&[f64]) -> Complex64 + Sync), qp: f64) -> f64 {
        let st = &self.setup;
        let mut acc = 0.0;
        for (i, slot) in self.slices.iter().enumerate() {
            let s = self.s_nodes[i];
            let ws = self.s_weights[i];
            for (j, x) in slot.u_points.iter().enumerate() {
                let uv = u(x).norm().powf(qp);
                if uv == 0.0 {
                    continue;
                }
                // cone measure dξ/|ξ| in the slice coordinates
                let jac = match st.chain {
                    ChainId::Sphere => s.powi(st.n as i32 - 2) * slot.base.weights[j],
                    ChainId::Parab => slot.base.weights[j] / (2f64.sqrt() * s),
                    ChainId::Hyperb => {
                        let eta = slot.base.sample_point(j).chart;
                        let w_chart = slot.base.weights[j] * (1.0 + eta.iter().map(|e| e * e).sum::<f64>()).sqrt();
                        w_chart * s.powi(st.n as i32 - 1) / norm(x)
                    }
                    ChainId::FiniteType => unreachable!(),
                };
                acc += uv * jac * ws;
            }
        }
        acc.powf(1.0 / qp)
    }
}

fn slice_norm_unweighted_phi(slices: &[SliceSlot], u: &(dyn Fn(&[f64]) -> Complex64 + Sync), qp: f64) -> Vec<f64> {
    slices
        .iter()
        .map(|slot| {
            let m: Vec<f64> = slot.u_points.iter().map(|x| u(x).norm()).collect();
            let w: Vec<f64> = slot.norm_weights.iter().zip(&slot.density_factor).map(|(w, f)| w * f).collect();
            lp_norm(&m, &w, qp)
        })
        .collect()
}

pub fn verify_chain(
    setup: &ChainSetup,
    u: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    label: &str,
    slice_constant: f64,
) -> Result<ChainReport> {
    ChainRunner::new(setup)?.run(u, label, slice_constant)
}

/// Trial-family lower bound for the slice surface's constant on the
/// largest box the chain feeds it.
pub fn measure_slice_constant(setup: &ChainSetup, family: &FamilySpec) -> Result<RatioReport> {
    setup.check()?;
    let e = setup.exponents;
    let rules = vec![AxisRule::Trapezoid; setup.slice_counts.len()];
    let n = setup.n;
    let (density, grid) = match setup.chain {
        ChainId::Sphere => (
            SampledDensity::sample(&SurfaceDescriptor::sphere(n), &setup.slice_counts, None, |_| Complex64::new(1.0, 0.0))?,
            setup.y_box.scaled(setup.s_range.1),
        ),
        ChainId::Parab => {
            let mut scale = vec![1.0; n];
            scale[n - 1] = 1.0 / setup.s_range.0;
            (
                SampledDensity::sample(&SurfaceDescriptor::paraboloid(n, setup.slice_half), &setup.slice_counts, Some(&rules), |_| {
                    Complex64::new(1.0, 0.0)
                })?,
                setup.y_box.scaled_axes(&scale),
            )
        }
        ChainId::Hyperb => (
            SampledDensity::sample(&SurfaceDescriptor::hyperboloid(n, setup.slice_half), &setup.slice_counts, Some(&rules), |_| {
                Complex64::new(1.0, 0.0)
            })?,
            setup.y_box.scaled(setup.s_range.1),
        ),
        ChainId::FiniteType => {
            let f = setup.graph.clone().expect("checked");
            let runner = ChainRunner::new(setup)?;
            let mut best: Option<RatioReport> = None;
            for &s in runner.s_nodes() {
                let fs = f.clone();
                let sp = SliceProblem {
                    psi: Arc::new(move |t| fs.value(&[t, s])),
                    a: setup.slice_half,
                    k: 2,
                    delta: setup.slice_half,
                    pprime: e.pprime(),
                    q: e.q,
                    box_axes: setup.y_box.clone(),
                    nodes: setup.slice_counts[0],
                    family: family.clone(),
                };
                let r = slice_ratio(&sp)?;
                if best.as_ref().map(|b| r.best_ratio > b.best_ratio).unwrap_or(true) {
                    best = Some(r);
                }
            }
            return Ok(best.expect("at least two slices"));
        }
    };
    let fam = standard_family(&density, family);
    extension_ratio(&fam, e.pprime(), e.qprime(), &grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    WholeCone,
    Compact,
}

/// Largest measured ratios of the two unquantified links over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConstants {
    pub hausdorff_young: f64,
    pub interchange: f64,
}

impl LinkConstants {
    pub fn from_reports(reports: &[ChainReport]) -> LinkConstants {
        let max_of = |name: &str| {
            reports
                .iter()
                .filter_map(|r| r.link(name))
                .map(|l| l.ratio)
                .filter(|r| r.is_finite())
                .fold(0.0f64, f64::max)
        };
        LinkConstants { hausdorff_young: max_of("hausdorff-young"), interchange: max_of("interchange") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBound {
    pub mode: TransferMode,
    pub value: f64,
    pub factors: Vec<(String, f64)>,
}

/// Upper bound for the cone extension ratio obtained by multiplying the
/// slice constant through the chain.
pub fn transfer_constant(
    setup: &ChainSetup,
    slice_constant: f64,
    links: &LinkConstants,
    mode: TransferMode,
) -> Result<TransferBound> {
    setup.check()?;
    let e = setup.exponents;
    let (p, pp, q, qp) = (e.p, e.pprime(), e.q, e.qprime());
    let n = setup.n;
    let (s0, s1) = setup.s_range;
    let mut factors: Vec<(String, f64)> = Vec::new();
    match (setup.chain, mode) {
        (ChainId::FiniteType, TransferMode::WholeCone) => {
            return Err(LabError::Mode("the finite-type chain has no whole-surface mode".into()));
        }
        (ChainId::FiniteType, TransferMode::Compact) => {
            let runner = ChainRunner::new(setup)?;
            let max_phi = runner.slices.iter().flat_map(|s| s.density_factor.iter()).fold(1.0f64, |m, v| m.max(*v));
            factors.push(("hausdorff-young".into(), babenko_beckner(p)));
            factors.push(("minkowski".into(), 1.0));
            factors.push(("slice".into(), slice_constant));
            factors.push(("absorb-weight".into(), max_phi));
            factors.push(("holder-interval".into(), (s1 - s0).powf(1.0 / p - 1.0 / qp)));
            factors.push(("measure".into(), 1.0));
        }
        (_, TransferMode::WholeCone) => {
            if !scale_invariant(n, pp, q) {
                return Err(LabError::Mode(format!(
                    "(p', q) = ({pp}, {q}) is not scale invariant for n = {n}"
                )));
            }
            factors.push(("hausdorff-young".into(), links.hausdorff_young));
            factors.push(("interchange".into(), links.interchange));
            factors.push(("slice".into(), slice_constant));
            factors.push(("embedding".into(), embedding_constant(p, qp, pp)));
            factors.push(("holder".into(), weak_holder_constant(p)));
            // the pure power s^{-1/α} has weak norm exactly 1 on (0, ∞)
            factors.push(("weak-norm-f".into(), 1.0));
            factors.push(("final".into(), chain_factor(setup.chain, q)));
        }
        (_, TransferMode::Compact) => {
            if !admissible_compact(n, pp, q) {
                return Err(LabError::Mode(format!("(p', q) = ({pp}, {q}) is not admissible for n = {n}")));
            }
            let alpha = setup.weak_exponent();
            // F = s^{-1/α} is largest at the inner end
            let sup_f = s0.powf(-1.0 / alpha);
            factors.push(("hausdorff-young".into(), links.hausdorff_young));
            factors.push(("interchange".into(), links.interchange));
            factors.push(("slice".into(), slice_constant));
            factors.push(("lp-embedding".into(), 1.0));
            factors.push(("holder-range".into(), (s1 - s0).powf(1.0 / p - 1.0 / qp)));
            factors.push(("sup-f".into(), sup_f));
            factors.push(("final".into(), chain_factor(setup.chain, q)));
        }
    }
    let value = factors.iter().map(|(_, v)| v).product();
    Ok(TransferBound { mode, value, factors })
}

fn chain_factor(chain: ChainId, q: f64) -> f64 {
    match chain {
        ChainId::Parab => 2f64.powf(-0.5 / q),
        _ => 1.0,
    }
}

/// One-dimensional slice problem: the curve t ↦ (t, ψ(t)) on (−δ, δ) with
/// the chart measure dt.
#[derive(Clone)]
pub struct SliceProblem {
    pub psi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// ψ is given on [−a, a].
    pub a: f64,
    pub k: u32,
    pub delta: f64,
    pub pprime: f64,
    pub q: f64,
    pub box_axes: EvalGrid,
    pub nodes: usize,
    pub family: FamilySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceVerdict {
    InsideRange,
    OutsideRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceOracleReport {
    /// Lower bound over the trial family.
    pub constant: f64,
    pub best_label: String,
    pub verdict: SliceVerdict,
    pub trials: RatioReport,
}

/// Conditions under which the slice estimate is certified:
/// p′ > 4, p′ ≥ k+2, p′ ≥ (k+1)q.
pub fn slice_verdict(k: u32, pprime: f64, q: f64) -> SliceVerdict {
    let kf = k as f64;
    let tol = 1e-12 * pprime;
    if pprime > 4.0 + tol && pprime >= kf + 2.0 - tol && pprime >= (kf + 1.0) * q - tol {
        SliceVerdict::InsideRange
    } else {
        SliceVerdict::OutsideRange
    }
}

/// Checks ψ^{(j)}(0) = 0 for 1 ≤ j < k and ψ^{(k)}(0) ≠ 0 from Chebyshev
/// Taylor coefficients on [−ρ, ρ].
pub fn check_slice_phase(psi: &dyn Fn(f64) -> f64, k: u32, radius: f64) -> Result<()> {
    let c = scaled_taylor(psi, radius, k as usize + 4);
    let scale = c[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-7 * scale.max(1e-300);
    for (j, cj) in c.iter().enumerate().take(k as usize).skip(1) {
        if cj.abs() > tol {
            return Err(LabError::Precondition(format!("ψ has a nonzero derivative of order {j} < k at 0")));
        }
    }
    if c[k as usize].abs() <= tol {
        return Err(LabError::Precondition(format!("ψ^({k})(0) vanishes")));
    }
    Ok(())
}

fn slice_ratio(sp: &SliceProblem) -> Result<RatioReport> {
    let psi = sp.psi.clone();
    let curve = FnGraph::new(1, "psi", move |t: &[f64]| psi(t[0]));
    let surf = SurfaceDescriptor::graph(Arc::new(curve), Some(sp.k), GraphMeasure::Chart, vec![-sp.delta], vec![sp.delta]);
    let base = SampledDensity::sample(&surf, &[sp.nodes], None, |_| Complex64::new(1.0, 0.0))?;
    let fam = standard_family(&base, &sp.family);
    extension_ratio(&fam, sp.pprime, dual(sp.q), &sp.box_axes)
}

pub fn slice_oracle(sp: &SliceProblem) -> Result<SliceOracleReport> {
    if sp.delta >= sp.a {
        return Err(LabError::Precondition(format!("δ = {} must be smaller than a = {}", sp.delta, sp.a)));
    }
    check_slice_phase(sp.psi.as_ref(), sp.k, sp.delta)?;
    let trials = slice_ratio(sp)?;
    Ok(SliceOracleReport {
        constant: trials.best_ratio,
        best_label: trials.best_label.clone(),
        verdict: slice_verdict(sp.k, sp.pprime, sp.q),
        trials,
    })
}

/// Slice constants across a family of phases, for the uniformity claim.
pub fn slice_uniformity(problems: &[(String, SliceProblem)]) -> Result<Vec<(String, f64)>> {
    problems.iter().map(|(l, sp)| Ok((l.clone(), slice_oracle(sp)?.constant))).collect()
}
