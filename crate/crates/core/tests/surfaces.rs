use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restriction_lab::extension::SampledDensity;
use restriction_lab::poly::Polynomial;
use restriction_lab::surface::*;
use restriction_lab::Complex64;

#[test]
fn cone_samples_lie_on_the_cone() {
    let d = SampledDensity::sample(&SurfaceDescriptor::cone(3, 0.5, 2.0), &[12, 10, 20], None, |_| Complex64::new(1.0, 0.0))
        .unwrap();
    for j in 0..d.len() {
        let p = d.point(j);
        assert!((p[3] - norm(&p[..3])).abs() < 1e-12);
    }
}

#[test]
fn sphere_graph_has_unit_curvature() {
    let cap = FnGraph::new(2, "cap", |x: &[f64]| (1.0 - x[0] * x[0] - x[1] * x[1]).sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let r = 0.7 * rng.random::<f64>().sqrt();
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let k = gaussian_curvature(&cap, &[r * th.cos(), r * th.sin()], 1e-4).unwrap();
        assert!((k - 1.0).abs() < 1e-6, "K = {k} at r = {r}");
    }
}

#[test]
fn cylinders_are_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let gs: [fn(f64) -> f64; 3] = [|t| t.sin(), |t| t.powi(4) - t, |t| (2.0 * t).exp()];
    for g in gs {
        let f = FnGraph::new(2, "cyl", move |x: &[f64]| g(x[0]));
        for _ in 0..100 {
            let pt = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            assert!(gaussian_curvature(&f, &pt, 1e-4).unwrap().abs() < 1e-7);
        }
    }
}

#[test]
fn cubic_curvature_matches_exact_hessian() {
    // ξ₁³(1+ξ₂): det H = −9ξ₁⁴, zero only on the developable line ξ₁ = 0
    let exact = Polynomial::new(2, vec![(vec![3, 0], 1.0), (vec![3, 1], 1.0)]);
    let fd = FnGraph::new(2, "cubic", |x: &[f64]| x[0].powi(3) * (1.0 + x[1]));
    let mut worst = 0.0f64;
    for i in 0..100 {
        for j in 0..100 {
            let pt = [-0.3 + 0.6 * i as f64 / 99.0, -0.3 + 0.6 * j as f64 / 99.0];
            let a = gaussian_curvature(&exact, &pt, 1e-4).unwrap();
            let b = gaussian_curvature(&fd, &pt, 1e-4).unwrap();
            worst = worst.max((a - b).abs());
            let (g, _) = derivatives(&exact, &pt, 1e-4).unwrap();
            let w = 1.0 + g[0] * g[0] + g[1] * g[1];
            assert!((a + 9.0 * pt[0].powi(4) / (w * w)).abs() < 1e-14);
        }
    }
    assert!(worst < 1e-6, "finite differences off by {worst:e}");
    assert_eq!(gaussian_curvature(&exact, &[0.0, 0.2], 1e-4).unwrap(), 0.0);
}

#[test]
fn contact_order_ignores_affine_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 2u32..=5 {
        for _ in 0..10 {
            let (c, a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let f = Polynomial::new(2, vec![(vec![k, 0], 1.0), (vec![0, 0], c), (vec![1, 0], a), (vec![0, 1], b)]);
            assert_eq!(contact_order(&f, &[0.0, 0.0], 8, 0.05), ContactOrder::Exactly(k));
        }
    }
}

#[test]
fn graph_weights_are_positive_and_sum_to_area() {
    let s = SurfaceDescriptor::paraboloid(3, 1.0);
    let d = SampledDensity::sample(&s, &[21, 21], None, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(d.weights.iter().all(|w| *w > 0.0));
    assert!((d.total_measure() - 4.0).abs() < 1e-10);
    let circle = SampledDensity::sample(&SurfaceDescriptor::circle(), &[64], None, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!((circle.total_measure() - std::f64::consts::TAU).abs() < 1e-8);
}

#[test]
fn sphere_measure_in_four_dimensions() {
    // |S³| = 2π²
    let d = SampledDensity::sample(&SurfaceDescriptor::sphere(4), &[24, 24, 48], None, |_| Complex64::new(1.0, 0.0)).unwrap();
    let target = 2.0 * std::f64::consts::PI.powi(2);
    assert!((d.total_measure() - target).abs() < 1e-8 * target, "{}", d.total_measure());
}
