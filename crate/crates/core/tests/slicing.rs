use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restriction_lab::extension::{extend, extend_points, EvalGrid, FamilySpec, SampledDensity};
use restriction_lab::slicing::*;
use restriction_lab::{Complex64, LabError, SurfaceDescriptor};

fn ring(counts: [usize; 2], u: impl Fn(f64, f64) -> Complex64) -> SampledDensity {
    SampledDensity::sample(&SurfaceDescriptor::cone(2, 0.5, 2.0), &counts, None, |p| {
        let c = p.chart;
        u(c[0].hypot(c[1]), c[1].atan2(c[0]))
    })
    .unwrap()
}

#[test]
fn reassembled_slices_match_direct_extension() {
    let d = ring([80, 640], |_, _| Complex64::new(1.0, 0.0));
    let slices = polar_slices(&d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.random_range(-0.6..0.6)).collect()).collect();
    let a = slices.reassemble(&pts).unwrap();
    let b = extend_points(&d, &pts).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-8 * y.norm().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn one_shell_gives_one_slice() {
    let probe = polar_slices(&ring([24, 64], |_, _| Complex64::new(1.0, 0.0))).unwrap();
    let r0 = probe.radii[9];
    let d = ring([24, 64], |r, th| if (r - r0).abs() < 1e-12 { Complex64::new(th.cos(), 1.0) } else { Complex64::new(0.0, 0.0) });
    assert_eq!(polar_slices(&d).unwrap().nonzero_slices(), 1);
}

#[test]
fn radial_density_gives_constant_slices() {
    let d = ring([24, 64], |r, _| Complex64::new((-r).exp(), 0.0));
    for s in polar_slices(&d).unwrap().slices {
        let v0 = s.values[0];
        assert!(s.values.iter().all(|v| (v - v0).norm() < 1e-14));
    }
}

#[test]
fn non_cone_density_is_rejected() {
    let d = SampledDensity::sample(&SurfaceDescriptor::circle(), &[32], None, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(matches!(polar_slices(&d), Err(LabError::Domain(_))));
}

#[test]
fn dilating_the_slice_box_scales_the_norm() {
    let d = SampledDensity::sample(&SurfaceDescriptor::circle(), &[2400], None, |p| Complex64::new(1.0 + p.chart[0].cos(), 0.0))
        .unwrap();
    let pp = 6.0;
    let unit = EvalGrid::cube(2, 2.0, 33);
    for r in [0.5, 1.5, 3.0] {
        let big = extend(&d, &unit.scaled(r)).unwrap().lp_norm(pp);
        // the same samples read on the unit box: x ↦ F(r x)
        let f = extend(&d, &unit.scaled(r)).unwrap();
        let w = unit.cell_weights();
        let small = f.values.iter().zip(&w).map(|(v, w)| v.norm().powf(pp) * w).sum::<f64>().powf(1.0 / pp);
        let expected = r.powf(-2.0 / pp) * big;
        assert!((small - expected).abs() < 1e-6 * expected, "r = {r}: {small} vs {expected}");
    }
}

fn problem(psi: Arc<dyn Fn(f64) -> f64 + Send + Sync>, k: u32, pprime: f64, q: f64, half: f64) -> SliceProblem {
    SliceProblem {
        psi,
        a: 1.0,
        k,
        delta: 0.5,
        pprime,
        q,
        box_axes: EvalGrid::cube(2, half, (4.0 * half) as usize + 1),
        nodes: 640,
        family: FamilySpec { bumps: 8, modulations: 4, ..FamilySpec::default() },
    }
}

#[test]
fn parabola_slice_constant_is_stable_under_box_doubling() {
    let psi: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|t| t * t);
    let a = slice_oracle(&problem(psi.clone(), 2, 6.0, 2.0, 4.0)).unwrap();
    let b = slice_oracle(&problem(psi, 2, 6.0, 2.0, 8.0)).unwrap();
    assert_eq!(a.verdict, SliceVerdict::InsideRange);
    assert!((b.constant / a.constant - 1.0).abs() < 0.1, "{} vs {}", a.constant, b.constant);
}

#[test]
fn zero_density_has_zero_ratio() {
    let mut sp = problem(Arc::new(|t| t * t), 2, 6.0, 2.0, 2.0);
    sp.family = FamilySpec { constant: false, cap_widths: vec![], bumps: 0, modulations: 0, ..FamilySpec::default() };
    assert_eq!(slice_oracle(&sp).unwrap().constant, 0.0);
}

#[test]
fn cubic_slice_constants_are_uniform() {
    let problems: Vec<(String, SliceProblem)> = [-0.5, -0.25, 0.0, 0.25, 0.5]
        .into_iter()
        .map(|s: f64| {
            let psi: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |t| t.powi(3) * (1.0 + s * t));
            (format!("s={s}"), problem(psi, 3, 5.0, 1.25, 4.0))
        })
        .collect();
    assert_eq!(slice_verdict(3, 5.0, 1.25), SliceVerdict::InsideRange);
    let c = slice_uniformity(&problems).unwrap();
    let lo = c.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let hi = c.iter().map(|x| x.1).fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 2.0, "{c:?}");
}

#[test]
fn slice_window_must_sit_inside_the_phase_interval() {
    let mut sp = problem(Arc::new(|t| t * t), 2, 6.0, 2.0, 2.0);
    sp.delta = 1.0;
    assert!(matches!(slice_oracle(&sp), Err(LabError::Precondition(_))));
}

#[test]
fn null_coordinates_preserve_the_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let xi: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let tau = rng.random_range(-2.0..2.0);
        let c = to_null(&xi, tau);
        let lhs = xi.iter().map(|v| v * v).sum::<f64>() + tau * tau;
        let rhs = c.as_vec().iter().map(|v| v * v).sum::<f64>();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
    }
}
