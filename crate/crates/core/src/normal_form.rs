//! Developable graphs: the zero-curvature residual, the normal form
//! f = a·ξ₁ᵏ, and second-order vanishing along a coordinate subspace.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::poly::{scaled_taylor, Polynomial};
use crate::surface::{contact_order, derivatives, fan_directions, ContactOrder, GraphFn};

/// f = a(ξ)·ξ₁ᵏ with a smooth a.
#[derive(Clone)]
pub struct NormalFormSurface {
    pub k: u32,
    pub a: Arc<dyn GraphFn>,
}

impl NormalFormSurface {
    pub fn new(k: u32, a: Arc<dyn GraphFn>) -> Result<NormalFormSurface> {
        if k < 2 {
            return Err(LabError::Domain(format!("type k = {k} must be at least 2")));
        }
        if a.dim() != 2 {
            return Err(LabError::Domain("the normal form lives over R²".into()));
        }
        Ok(NormalFormSurface { k, a })
    }

    pub fn from_polynomial(k: u32, a: Polynomial) -> Result<NormalFormSurface> {
        NormalFormSurface::new(k, Arc::new(a))
    }

    /// max |f(0, ξ₂)| on the sample.
    pub fn flatness(&self, xi2: &[f64]) -> f64 {
        xi2.iter().map(|&y| self.value(&[0.0, y]).abs()).fold(0.0, f64::max)
    }
}

impl GraphFn for NormalFormSurface {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, xi: &[f64]) -> f64 {
        self.a.value(xi) * xi[0].powi(self.k as i32)
    }
    fn gradient(&self, xi: &[f64]) -> Option<Vec<f64>> {
        let g = self.a.gradient(xi)?;
        let k = self.k as i32;
        let (p, p1) = (xi[0].powi(k), k as f64 * xi[0].powi(k - 1));
        Some(vec![g[0] * p + self.a.value(xi) * p1, g[1] * p])
    }
    fn hessian(&self, xi: &[f64]) -> Option<Vec<f64>> {
        let g = self.a.gradient(xi)?;
        let h = self.a.hessian(xi)?;
        let k = self.k as i32;
        let kf = k as f64;
        let p = xi[0].powi(k);
        let p1 = kf * xi[0].powi(k - 1);
        let p2 = kf * (kf - 1.0) * xi[0].powi(k - 2);
        let a = self.a.value(xi);
        let h11 = h[0] * p + 2.0 * g[0] * p1 + a * p2;
        let h12 = h[1] * p + g[1] * p1;
        let h22 = h[3] * p;
        Some(vec![h11, h12, h12, h22])
    }
    fn label(&self) -> String {
        format!("a*xi1^{}", self.k)
    }
}

/// Rectangular sample grid over a patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: usize,
}

impl PatchGrid {
    pub fn square(half: f64, n: usize) -> PatchGrid {
        PatchGrid { lo: vec![-half; 2], hi: vec![half; 2], n }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let d = self.lo.len();
        let total = self.n.pow(d as u32);
        (0..total)
            .map(|mut flat| {
                let mut p = vec![0.0; d];
                for a in (0..d).rev() {
                    let i = flat % self.n;
                    flat /= self.n;
                    p[a] = if self.n == 1 {
                        0.5 * (self.lo[a] + self.hi[a])
                    } else {
                        self.lo[a] + (self.hi[a] - self.lo[a]) * i as f64 / (self.n - 1) as f64
                    };
                }
                p
            })
            .collect()
    }
}

/// Finite-difference step for graphs without exact derivatives.
pub const FD_STEP: f64 = 2e-4;

/// max over the grid of |f₁₁f₂₂ − f₁₂²| / max(1, ‖Hess f‖²_op).
pub fn curvature_residual(f: &dyn GraphFn, grid: &PatchGrid) -> Result<f64> {
    if f.dim() != 2 {
        return Err(LabError::Unsupported("curvature residual of a graph not over R²".into()));
    }
    let mut worst = 0.0f64;
    for p in grid.points() {
        let (_, h) = derivatives(f, &p, FD_STEP)?;
        let det = h[0] * h[3] - h[1] * h[2];
        // largest eigenvalue modulus of the symmetric 2×2 Hessian
        let m = 0.5 * (h[0] + h[3]);
        let r = (0.25 * (h[0] - h[3]).powi(2) + h[1] * h[1]).sqrt();
        let op = m.abs() + r;
        worst = worst.max(det.abs() / (op * op).max(1.0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub k: u32,
    pub label: String,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl NormalFormReport {
    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub const RESIDUAL_TOL: f64 = 1e-6;
/// Growth allowed for f/ξ₁ᵏ and its difference quotients along the
/// shrinking mesh, relative to the two coarsest levels.
pub const QUOTIENT_GROWTH: f64 = 4.0;

fn order_at_least(c: ContactOrder, k: u32) -> bool {
    match c {
        ContactOrder::Exactly(m) | ContactOrder::AtLeast(m) => m >= k,
    }
}

/// Checks a claimed normal form of type k on the patch [−h, h]²:
/// (i) contact order at 0 is at least k, (ii) f/ξ₁ᵏ stays bounded as
/// ξ₁ → 0, (iii) the curvature residual vanishes, (iv) the type is exactly
/// k along the ξ₂-axis.
pub fn verify_normal_form(f: &dyn GraphFn, k: u32, half: f64) -> Result<NormalFormReport> {
    if k < 2 {
        return Err(LabError::Domain(format!("type k = {k} must be at least 2")));
    }
    if f.dim() != 2 {
        return Err(LabError::Unsupported("normal forms are for graphs over R²".into()));
    }
    let radius = 0.5 * half;
    let mut checks = Vec::new();

    let c0 = contact_order(f, &[0.0, 0.0], k + 2, radius);
    checks.push(CheckResult {
        name: "contact-order".into(),
        passed: order_at_least(c0, k),
        value: match c0 {
            ContactOrder::Exactly(m) | ContactOrder::AtLeast(m) => m as f64,
        },
        detail: format!("{c0:?} at the origin"),
    });

    let (q_ok, q_max, q_detail) = quotient_bounded(f, k, half);
    checks.push(CheckResult { name: "quotient-bounded".into(), passed: q_ok, value: q_max, detail: q_detail });

    let res = curvature_residual(f, &PatchGrid::square(half, 9))?;
    checks.push(CheckResult {
        name: "curvature-residual".into(),
        passed: res <= RESIDUAL_TOL,
        value: res,
        detail: format!("tolerance {RESIDUAL_TOL:e}"),
    });

    let mut worst = None;
    let mut all = true;
    for i in 0..7 {
        let y = -0.5 * half + half * i as f64 / 6.0;
        let c = contact_order(f, &[0.0, y], k + 2, radius);
        if c != ContactOrder::Exactly(k) {
            all = false;
            worst.get_or_insert((y, c));
        }
    }
    checks.push(CheckResult {
        name: "type-propagation".into(),
        passed: all,
        value: if all { k as f64 } else { f64::NAN },
        detail: match worst {
            None => format!("Exactly({k}) at seven points of the ξ₂-axis"),
            Some((y, c)) => format!("{c:?} at (0, {y})"),
        },
    });

    let passed = checks.iter().all(|c| c.passed);
    Ok(NormalFormReport { k, label: f.label(), checks, passed })
}

fn quotient_bounded(f: &dyn GraphFn, k: u32, half: f64) -> (bool, f64, String) {
    let scale = PatchGrid::square(half, 5).points().iter().map(|p| f.value(p).abs()).fold(1.0f64, f64::max);
    let h0 = 0.5 * half;
    let floor = 1e-9 * scale;
    let mut q_max = 0.0f64;
    for sign in [-1.0, 1.0] {
        for j in 0..5 {
            let y = -0.5 * half + half * j as f64 / 4.0;
            let mut xs = Vec::new();
            let mut x = h0;
            while xs.len() < 21 && x.powi(k as i32) >= floor {
                xs.push(sign * x);
                x *= 0.5;
            }
            if xs.len() < 4 {
                return (false, f64::NAN, "mesh too short to judge".into());
            }
            let q: Vec<f64> = xs.iter().map(|&x| f.value(&[x, y]) / x.powi(k as i32)).collect();
            let dq: Vec<f64> = (0..q.len() - 1).map(|m| (q[m + 1] - q[m]).abs() / (xs[m] - xs[m + 1]).abs()).collect();
            let q_ref = q[0].abs().max(q[1].abs());
            let d_ref = dq[0].max(dq[1]);
            let q_tail = q[2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let d_tail = dq[2..].iter().fold(0.0f64, |m, v| m.max(*v));
            q_max = q_max.max(q_ref).max(q_tail);
            let q_fine = q_tail <= QUOTIENT_GROWTH * q_ref + 1e-9 * scale;
            let d_fine = d_tail <= QUOTIENT_GROWTH * d_ref + 1e-6 * (1.0 + q_max) / h0;
            if !(q_fine && d_fine) {
                return (false, q_max, format!("f/ξ₁^{k} grows near (0, {y}) from the {} side", if sign < 0.0 { "left" } else { "right" }));
            }
        }
    }
    (true, q_max, format!("sup |f/ξ₁^{k}| ≈ {q_max:.6}"))
}

/// Largest scaled Taylor coefficient of order below k at 0 over a fan of
/// rays, relative to the largest coefficient of any order.
pub fn taylor_vanishing(f: &dyn GraphFn, k: u32, radius: f64) -> f64 {
    let mut low = 0.0f64;
    let mut all = 0.0f64;
    for w in fan_directions(f.dim()) {
        let c = scaled_taylor(|t| f.value(&[t * w[0], t * w[1]]), radius, k as usize + 4);
        low = low.max(c[..k as usize].iter().fold(0.0f64, |m, v| m.max(v.abs())));
        all = all.max(c.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    if all == 0.0 {
        0.0
    } else {
        low / all
    }
}

/// Tangent developable of r(s) = (s, s²/2, s³/6), written as a graph over
/// its tangent plane at r(0) + v₀r′(0) in the frame that diagonalises the
/// second fundamental form (ξ₂ along the ruling).
pub struct TangentDevelopable {
    v0: f64,
    origin: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
    normal: [f64; 3],
}

fn curve(s: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    ([s, 0.5 * s * s, s * s * s / 6.0], [1.0, s, 0.5 * s * s], [0.0, 1.0, s])
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn unit3(a: [f64; 3]) -> [f64; 3] {
    let r = dot3(&a, &a).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl TangentDevelopable {
    pub fn new(v0: f64) -> Result<TangentDevelopable> {
        if v0 == 0.0 {
            return Err(LabError::Singular("v₀ = 0 lies on the edge of regression".into()));
        }
        let (r, d1, d2) = curve(0.0);
        let origin = [r[0] + v0 * d1[0], r[1] + v0 * d1[1], r[2] + v0 * d1[2]];
        let xs = [d1[0] + v0 * d2[0], d1[1] + v0 * d2[1], d1[2] + v0 * d2[2]];
        let normal = unit3(cross3(&xs, &d1));
        // second fundamental form over (X_s, X_v): X_ss = r″ + v₀r‴, X_sv = r″, X_vv = 0
        let xss = [d2[0], d2[1], d2[2] + v0];
        let ff = [dot3(&xs, &xs), dot3(&xs, &d1), dot3(&d1, &d1)];
        let sf = [dot3(&xss, &normal), dot3(&d2, &normal), 0.0];
        // II w = λ I w
        let qa = ff[0] * ff[2] - ff[1] * ff[1];
        let qb = -(sf[0] * ff[2] + sf[2] * ff[0] - 2.0 * sf[1] * ff[1]);
        let qc = sf[0] * sf[2] - sf[1] * sf[1];
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        let mut lams = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)];
        if lams[0].abs() < lams[1].abs() {
            lams.swap(0, 1);
        }
        let tangent = |lam: f64| {
            let w1 = [sf[1] - lam * ff[1], -(sf[0] - lam * ff[0])];
            let w2 = [sf[2] - lam * ff[2], -(sf[1] - lam * ff[1])];
            let w = if w1[0].hypot(w1[1]) >= w2[0].hypot(w2[1]) { w1 } else { w2 };
            unit3([
                w[0] * xs[0] + w[1] * d1[0],
                w[0] * xs[1] + w[1] * d1[1],
                w[0] * xs[2] + w[1] * d1[2],
            ])
        };
        let e1 = tangent(lams[0]);
        let mut e2 = cross3(&normal, &e1);
        let ruling = tangent(lams[1]);
        if dot3(&e2, &ruling) < 0.0 {
            e2 = [-e2[0], -e2[1], -e2[2]];
        }
        Ok(TangentDevelopable { v0, origin, e1, e2, normal })
    }

    fn surface(&self, s: f64, v: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let (r, d1, d2) = curve(s);
        let x = [r[0] + v * d1[0], r[1] + v * d1[1], r[2] + v * d1[2]];
        let xs = [d1[0] + v * d2[0], d1[1] + v * d2[1], d1[2] + v * d2[2]];
        (x, xs, d1)
    }
}

impl GraphFn for TangentDevelopable {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, xi: &[f64]) -> f64 {
        // Newton on (s, v) ↦ tangent-plane coordinates of X(s, v) − P₀
        let (mut s, mut v) = (0.0, self.v0);
        for _ in 0..60 {
            let (x, xs, xv) = self.surface(s, v);
            let d = sub3(&x, &self.origin);
            let f1 = dot3(&d, &self.e1) - xi[0];
            let f2 = dot3(&d, &self.e2) - xi[1];
            let (a, b, c, dd) = (dot3(&xs, &self.e1), dot3(&xv, &self.e1), dot3(&xs, &self.e2), dot3(&xv, &self.e2));
            let det = a * dd - b * c;
            let ds = (dd * f1 - b * f2) / det;
            let dv = (a * f2 - c * f1) / det;
            s -= ds;
            v -= dv;
            if ds.abs().max(dv.abs()) < 1e-16 {
                break;
            }
        }
        let (x, _, _) = self.surface(s, v);
        dot3(&sub3(&x, &self.origin), &self.normal)
    }
    fn label(&self) -> String {
        format!("tangent-developable(v0={})", self.v0)
    }
}

/// f and ∇f vanish on {ξ′ = 0}, where ξ′ is the first `prime_dims`
/// coordinates; sampled on a grid of ξ″ in [−r, r].
pub fn second_order_vanishing(f: &dyn GraphFn, prime_dims: usize, r: f64, tol: f64) -> Result<bool> {
    let d = f.dim();
    if prime_dims == 0 || prime_dims >= d {
        return Err(LabError::Domain(format!("split {prime_dims} + {} is not proper", d.saturating_sub(prime_dims))));
    }
    let rest = d - prime_dims;
    let grid = PatchGrid { lo: vec![-r; rest], hi: vec![r; rest], n: 5 };
    for p in grid.points() {
        let mut x = vec![0.0; prime_dims];
        x.extend(p);
        let v = f.value(&x);
        let g = match f.gradient(&x) {
            Some(g) => g,
            None => gradient4(f, &x, 1e-3 * r.max(1e-3)),
        };
        if v.abs() > tol || g.iter().any(|c| c.abs() > tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn gradient4(f: &dyn GraphFn, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let at = |s: f64| {
                let mut y = x.to_vec();
                y[i] += s * h;
                f.value(&y)
            };
            (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::FnGraph;

    #[test]
    fn residual_examples() {
        let cyl = NormalFormSurface::from_polynomial(3, Polynomial::constant(2, 1.0)).unwrap();
        assert!(curvature_residual(&cyl, &PatchGrid::square(0.5, 9)).unwrap() < 1e-8);
        let ell = Polynomial::new(2, vec![(vec![2, 0], 0.5), (vec![0, 2], 0.5)]);
        assert!((curvature_residual(&ell, &PatchGrid::square(0.5, 9)).unwrap() - 1.0).abs() < 1e-12);
        let cone = FnGraph::new(2, "cone", |x: &[f64]| x[0] * (1.0 + (x[1] / x[0]).powi(2)).sqrt());
        let grid = PatchGrid { lo: vec![0.5, -0.5], hi: vec![1.5, 0.5], n: 7 };
        assert!(curvature_residual(&cone, &grid).unwrap() < 1e-6);
    }

    #[test]
    fn normal_form_examples() {
        let cyl = NormalFormSurface::from_polynomial(3, Polynomial::constant(2, 1.0)).unwrap();
        let r = verify_normal_form(&cyl, 3, 0.5).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        let f = Polynomial::new(2, vec![(vec![3, 0], 1.0), (vec![4, 0], 1.0)]);
        let r = verify_normal_form(&f, 3, 0.5).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        let bad = Polynomial::new(2, vec![(vec![3, 0], 1.0), (vec![3, 2], 1.0)]);
        let r = verify_normal_form(&bad, 3, 0.5).unwrap();
        assert!(!r.passed);
        assert_eq!(r.failures()[0].name, "curvature-residual");
    }

    #[test]
    fn tangent_developable_is_normal_form_of_type_two() {
        let td = TangentDevelopable::new(1.0).unwrap();
        assert!(td.value(&[0.0, 0.0]).abs() < 1e-15);
        let r = verify_normal_form(&td, 2, 0.1).unwrap();
        assert!(r.passed, "{:?}", r.checks);
    }

    #[test]
    fn vanishing_examples() {
        let f = Polynomial::new(2, vec![(vec![2, 0], 1.0), (vec![2, 1], 1.0)]);
        assert!(second_order_vanishing(&f, 1, 0.5, 1e-10).unwrap());
        let g = Polynomial::new(2, vec![(vec![2, 0], 1.0), (vec![0, 3], 1.0)]);
        assert!(!second_order_vanishing(&g, 1, 0.5, 1e-10).unwrap());
    }

    #[test]
    fn taylor_consistency() {
        let a = Polynomial::new(2, vec![(vec![0, 0], 1.0), (vec![1, 1], 0.5), (vec![0, 2], -0.3)]);
        let s = NormalFormSurface::from_polynomial(4, a).unwrap();
        assert!(taylor_vanishing(&s, 4, 0.3) < 1e-5);
        assert!(s.flatness(&[-0.4, 0.0, 0.3]) < 1e-12);
    }
}
