use std::f64::consts::{PI, TAU};

use restriction_lab::extension::*;
use restriction_lab::lorentz::lp_norm;
use restriction_lab::reference::circle_extension;
use restriction_lab::{Complex64, SurfaceDescriptor};

fn circle(n: usize, u: impl Fn(f64) -> Complex64) -> SampledDensity {
    SampledDensity::sample(&SurfaceDescriptor::circle(), &[n], None, |p| u(p.param[0])).unwrap()
}

fn one(_: f64) -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn constant_circle_ratio_matches_bessel_norm() {
    let g = EvalGrid::cube(2, 4.0, 65);
    let fam = vec![TrialDensity { label: "one".into(), density: circle(2048, one) }];
    let r = extension_ratio(&fam, 6.0, 2.0, &g).unwrap();
    let oracle: Vec<f64> = g.points().iter().map(|x| circle_extension(x[0].hypot(x[1])).abs()).collect();
    let want = lp_norm(&oracle, &g.cell_weights(), 6.0) / TAU.sqrt();
    assert!((r.best_ratio - want).abs() < 1e-6 * want, "{} vs {want}", r.best_ratio);
}

#[test]
fn ratio_is_homogeneous() {
    let g = EvalGrid::cube(2, 3.0, 25);
    let u = |t: f64| Complex64::new(1.0 + 0.5 * t.cos(), 0.2 * t.sin());
    let base = circle(1024, u);
    let ratio = |c: f64| {
        let fam = vec![TrialDensity { label: "u".into(), density: base.with_values(|p| c * u(p.param[0])) }];
        extension_ratio(&fam, 6.0, 2.0, &g).unwrap().best_ratio
    };
    let r1 = ratio(1.0);
    for c in [1e-3, 0.5, 7.0, 1e4] {
        assert!((ratio(c) - r1).abs() < 1e-12 * r1);
    }
}

#[test]
fn modulation_translates_the_extension() {
    let g = EvalGrid::cube(2, 3.0, 21);
    let x0 = [0.7, -1.3];
    let u = |t: f64| Complex64::new((t.cos() * 2.0).exp(), 0.0);
    let d = circle(2048, u);
    let modulated = d.with_values(|p| u(p.param[0]) * Complex64::from_polar(1.0, TAU * (x0[0] * p.point[0] + x0[1] * p.point[1])));
    let a = extend(&modulated, &g).unwrap();
    let b = extend(&d, &g.translated(&x0)).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x.norm() - y.norm()).abs() < 1e-10);
    }
    // the same norm over the box family {g - x0}, {g}
    let fam = |dd: &SampledDensity| vec![TrialDensity { label: "u".into(), density: dd.clone() }];
    let r1 = extension_ratio(&fam(&modulated), 6.0, 2.0, &g).unwrap().best_ratio;
    let r2 = extension_ratio(&fam(&d), 6.0, 2.0, &g.translated(&x0)).unwrap().best_ratio;
    assert!((r1 - r2).abs() < 1e-10 * r1);
}

#[test]
fn extension_is_linear() {
    let g = EvalGrid::cube(2, 2.0, 17);
    let u = |t: f64| Complex64::new(t.sin(), 1.0);
    let v = |t: f64| Complex64::new((3.0 * t).cos(), -t.cos());
    let (a, b) = (Complex64::new(0.3, -2.0), Complex64::new(1.5, 0.25));
    let eu = extend(&circle(1024, u), &g).unwrap();
    let ev = extend(&circle(1024, v), &g).unwrap();
    let ew = extend(&circle(1024, |t| a * u(t) + b * v(t)), &g).unwrap();
    for ((x, y), z) in eu.values.iter().zip(&ev.values).zip(&ew.values) {
        assert!((a * x + b * y - z).norm() < 1e-12 * z.norm().max(1.0));
    }
}

#[test]
fn l2_norm_grows_like_the_square_root_of_the_box() {
    let d = circle(8192, one);
    let l2 = |half: f64| extend(&d, &EvalGrid::cube(2, half, (4.0 * half) as usize + 1)).unwrap().lp_norm(2.0);
    let growth = l2(16.0) / l2(8.0);
    assert!((growth / 2f64.sqrt() - 1.0).abs() < 0.05, "growth {growth}");
}

#[test]
fn refining_the_surface_grid_changes_little() {
    let g = EvalGrid::cube(2, 10.0, 41);
    let u = |t: f64| Complex64::new((t.cos()).exp(), (2.0 * t).sin());
    let coarse = extend(&circle(4096, u), &g).unwrap();
    let fine = extend(&circle(8192, u), &g).unwrap();
    let diff = coarse.values.iter().zip(&fine.values).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    assert!(diff < 1e-6, "{diff:e}");
}

#[test]
fn cone_ring_total_measure() {
    let d = SampledDensity::sample(&SurfaceDescriptor::cone(2, 0.5, 2.0), &[40, 64], None, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!((d.total_measure() - 3.0 * PI).abs() < 1e-10);
    let v = extend_points(&d, &[vec![0.0, 0.0, 0.0]]).unwrap();
    assert!((v[0].re - 3.0 * PI).abs() < 1e-10);
}

#[test]
fn empty_surface_grid_is_an_error() {
    let r = SampledDensity::sample(&SurfaceDescriptor::circle(), &[0], None, |_| Complex64::new(1.0, 0.0));
    assert!(r.is_err());
}
