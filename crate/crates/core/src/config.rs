//! Declarative surface and density descriptions for configs and the CLI.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::extension::{SamplePoint, SampledDensity};
use crate::poly::Polynomial;
use crate::quadrature::{bump, plateau, AxisRule};
use crate::surface::{FiniteTypeGraph, GraphMeasure, SurfaceDescriptor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Circle,
    Sphere { n: usize },
    Paraboloid { n: usize, half: f64 },
    Hyperboloid { n: usize, half: f64 },
    Cone { n: usize, r0: f64, r1: f64 },
    /// ξ₁ᵏ over [−half, half]².
    Monomial {
        k: u32,
        half: f64,
        #[serde(default = "chart_measure")]
        measure: GraphMeasure,
    },
    /// Zero height over [−half, half]².
    Plane { half: f64 },
    Polynomial {
        terms: Vec<(Vec<u32>, f64)>,
        #[serde(default)]
        k: Option<u32>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "chart_measure")]
        measure: GraphMeasure,
    },
}

fn chart_measure() -> GraphMeasure {
    GraphMeasure::Chart
}

impl SurfaceSpec {
    /// Parses the names accepted on the command line.
    pub fn from_name(name: &str, n: Option<usize>, half: f64) -> Result<SurfaceSpec> {
        let n2 = n.unwrap_or(2);
        Ok(match name {
            "circle" => SurfaceSpec::Circle,
            "sphere" => SurfaceSpec::Sphere { n: n.unwrap_or(3) },
            "paraboloid" => SurfaceSpec::Paraboloid { n: n.unwrap_or(3), half },
            "hyperboloid" => SurfaceSpec::Hyperboloid { n: n.unwrap_or(3), half },
            "cone" => SurfaceSpec::Cone { n: n2, r0: 0.5, r1: 2.0 },
            "plane" => SurfaceSpec::Plane { half },
            other => {
                if let Some(k) = other.strip_prefix("monomial") {
                    let k: u32 = k.parse().map_err(|_| LabError::Config(format!("unknown surface `{other}`")))?;
                    SurfaceSpec::Monomial { k, half, measure: GraphMeasure::Chart }
                } else {
                    return Err(LabError::Config(format!(
                        "unknown surface `{other}`; expected circle, sphere, paraboloid, hyperboloid, cone, plane or monomialK"
                    )));
                }
            }
        })
    }

    pub fn build(&self) -> Result<SurfaceDescriptor> {
        let s = match self {
            SurfaceSpec::Circle => SurfaceDescriptor::circle(),
            SurfaceSpec::Sphere { n } => SurfaceDescriptor::sphere(*n),
            SurfaceSpec::Paraboloid { n, half } => SurfaceDescriptor::paraboloid(*n, *half),
            SurfaceSpec::Hyperboloid { n, half } => SurfaceDescriptor::hyperboloid(*n, *half),
            SurfaceSpec::Cone { n, r0, r1 } => SurfaceDescriptor::cone(*n, *r0, *r1),
            SurfaceSpec::Monomial { k, half, measure } => SurfaceDescriptor::graph(
                Arc::new(FiniteTypeGraph::monomial(*k, 2)),
                Some(*k),
                *measure,
                vec![-half; 2],
                vec![*half; 2],
            ),
            SurfaceSpec::Plane { half } => SurfaceDescriptor::graph(
                Arc::new(Polynomial::new(2, vec![])),
                None,
                GraphMeasure::Chart,
                vec![-half; 2],
                vec![*half; 2],
            ),
            SurfaceSpec::Polynomial { terms, k, lo, hi, measure } => {
                let dim = lo.len();
                if terms.iter().any(|(p, _)| p.len() != dim) {
                    return Err(LabError::Config(format!("every term needs {dim} exponents")));
                }
                SurfaceDescriptor::graph(Arc::new(Polynomial::new(dim, terms.clone())), *k, *measure, lo.clone(), hi.clone())
            }
        };
        s.validate().map_err(|e| LabError::Config(format!("surface: {e}")))?;
        Ok(s)
    }
}

/// Densities on the sampling coordinates of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    One,
    /// Compact bump at the centre of the parameter box; `width` is relative
    /// to each side.
    Bump { width: f64 },
    /// Smoothed indicator of the central fraction `width` of each side.
    Cap { width: f64 },
    /// Bump times e^{2πi⟨x₀, P⟩}.
    Modulated { width: f64, x0: Vec<f64> },
}

impl DensitySpec {
    pub fn from_name(name: &str) -> Result<DensitySpec> {
        match name {
            "one" => Ok(DensitySpec::One),
            "bump" => Ok(DensitySpec::Bump { width: 0.5 }),
            "cap" => Ok(DensitySpec::Cap { width: 0.25 }),
            other => Err(LabError::Config(format!("unknown density `{other}`; expected one, bump or cap"))),
        }
    }

    pub fn value(&self, surface: &SurfaceDescriptor, sp: &SamplePoint) -> Complex64 {
        let (lo, hi) = surface.param_box();
        let profile = |width: f64, smooth_cap: bool| -> f64 {
            let mut v = 1.0;
            for a in 0..lo.len() {
                let c = 0.5 * (lo[a] + hi[a]);
                let half = 0.5 * width * (hi[a] - lo[a]);
                v *= if smooth_cap {
                    plateau(sp.param[a], c - half, c + half, 0.1)
                } else {
                    bump((sp.param[a] - c) / half)
                };
            }
            v
        };
        match self {
            DensitySpec::One => Complex64::new(1.0, 0.0),
            DensitySpec::Bump { width } => Complex64::new(profile(*width, false), 0.0),
            DensitySpec::Cap { width } => Complex64::new(profile(*width, true), 0.0),
            DensitySpec::Modulated { width, x0 } => {
                let ph = 2.0 * PI * x0.iter().zip(sp.point).map(|(a, b)| a * b).sum::<f64>();
                profile(*width, false) * Complex64::from_polar(1.0, ph)
            }
        }
    }

    pub fn sample(&self, surface: &SurfaceDescriptor, counts: &[usize], rules: Option<&[AxisRule]>) -> Result<SampledDensity> {
        if let DensitySpec::Modulated { x0, .. } = self {
            if x0.len() != surface.ambient_dim() {
                return Err(LabError::Config(format!("x0 needs {} entries", surface.ambient_dim())));
            }
        }
        SampledDensity::sample(surface, counts, rules, |sp| self.value(surface, sp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_parse_from_toml() {
        let s: SurfaceSpec = toml::from_str("kind = \"cone\"\nn = 2\nr0 = 0.5\nr1 = 2.0").unwrap();
        assert_eq!(s, SurfaceSpec::Cone { n: 2, r0: 0.5, r1: 2.0 });
        assert!(toml::from_str::<SurfaceSpec>("kind = \"cone\"\nn = 2\nr0 = 0.5\nr1 = 2.0\nextra = 1").is_err());
        assert!(SurfaceSpec::Cone { n: 2, r0: 2.0, r1: 1.0 }.build().is_err());
        let d: DensitySpec = toml::from_str("kind = \"cap\"\nwidth = 0.5").unwrap();
        assert_eq!(d, DensitySpec::Cap { width: 0.5 });
    }

    #[test]
    fn names() {
        assert_eq!(SurfaceSpec::from_name("monomial3", None, 1.0).unwrap(), SurfaceSpec::Monomial {
            k: 3,
            half: 1.0,
            measure: GraphMeasure::Chart
        });
        assert!(SurfaceSpec::from_name("torus", None, 1.0).is_err());
        assert!(DensitySpec::from_name("one").is_ok());
    }
}
