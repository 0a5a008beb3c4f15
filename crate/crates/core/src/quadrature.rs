//! One-dimensional rules and the smooth cutoffs used to build test densities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisRule {
    /// Endpoint-inclusive trapezoid.
    Trapezoid,
    GaussLegendre,
    /// Equispaced nodes on [lo, hi) with equal weights.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisNodes {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub periodic: bool,
}

impl AxisNodes {
    pub fn new(rule: AxisRule, lo: f64, hi: f64, n: usize) -> AxisNodes {
        assert!(n >= 1, "axis needs at least one node");
        match rule {
            AxisRule::Trapezoid => trapezoid(lo, hi, n),
            AxisRule::GaussLegendre => gauss_legendre(lo, hi, n),
            AxisRule::Periodic => periodic(lo, hi, n),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn trapezoid(lo: f64, hi: f64, n: usize) -> AxisNodes {
    if n == 1 {
        return AxisNodes { nodes: vec![0.5 * (lo + hi)], weights: vec![hi - lo], periodic: false };
    }
    let h = (hi - lo) / (n - 1) as f64;
    let nodes = (0..n).map(|i| lo + h * i as f64).collect();
    let mut weights = vec![h; n];
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    AxisNodes { nodes, weights, periodic: false }
}

pub fn periodic(lo: f64, hi: f64, n: usize) -> AxisNodes {
    let h = (hi - lo) / n as f64;
    AxisNodes {
        nodes: (0..n).map(|i| lo + h * i as f64).collect(),
        weights: vec![h; n],
        periodic: true,
    }
}

/// Nodes by Newton iteration on P_n from the Tricomi initial guesses.
pub fn gauss_legendre(lo: f64, hi: f64, n: usize) -> AxisNodes {
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    AxisNodes { nodes, weights, periodic: false }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Compactly supported bump on (-1, 1) with peak 1 at 0.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Smoothed indicator of [lo, hi]; the transitions occupy `rel_width` of the
/// interval length at each end, inside the interval.
pub fn plateau(x: f64, lo: f64, hi: f64, rel_width: f64) -> f64 {
    let w = rel_width * (hi - lo);
    if w <= 0.0 {
        return if x >= lo && x <= hi { 1.0 } else { 0.0 };
    }
    smooth_step((x - lo) / w) * smooth_step((hi - x) / w)
}
