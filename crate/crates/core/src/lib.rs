//! Numerical laboratory for Fourier extension estimates on conic and
//! finite-type surfaces.

// `!(x > 0.0)` is deliberate: it rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod config;
pub mod error;
pub mod extension;
pub mod knapp;
pub mod lorentz;
pub mod normal_form;
pub mod ode;
pub mod poly;
pub mod quadrature;
pub mod reference;
pub mod slicing;
pub mod surface;

pub use error::{LabError, Result};
pub use extension::{EvalGrid, Field, GridAxis, SampledDensity};
pub use lorentz::{LorentzParams, ProductGridFunction, WeightedSamples};
pub use num_complex::Complex64;
pub use surface::{ExponentPair, SurfaceDescriptor, SurfaceKind};
