use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restriction_lab::knapp::*;
use restriction_lab::normal_form::*;
use restriction_lab::ode::*;
use restriction_lab::poly::Polynomial;
use restriction_lab::surface::{FiniteTypeGraph, FnGraph};

#[test]
fn parabolic_cylinder_knapp_slope() {
    let grid = KnappGrid::default();
    let fit = knapp_slope_fit(2, 1.0, 6.0, 2.0, &[4.0, 8.0, 16.0, 32.0], &grid).unwrap();
    assert!((fit.predicted - 1.0 / 3.0).abs() < 1e-12);
    assert!((fit.fitted - fit.predicted).abs() <= 0.1, "fitted {}", fit.fitted);
    assert_eq!(fit.verdict, NecessityVerdict::Consistent);
}

#[test]
fn rescaled_surface_converges_to_its_leading_term() {
    let a = Polynomial::new(2, vec![(vec![0, 0], 1.0), (vec![1, 0], 1.0), (vec![0, 1], 1.0)]);
    let f = FiniteTypeGraph::new(3, a);
    let dev = |eps: f64, lambda: f64| knapp_limit_deviation(&f, 3, eps, lambda, 1.0, 21);
    // the deviation s₁³(s₁/λ + s₂/λ^ε) peaks at the corner (1, 1)
    let exact = |eps: f64, lambda: f64| 1.0 / lambda + lambda.powf(-eps);
    for lambda in [4.0, 8.0, 16.0, 64.0] {
        let r = dev(1.0, 2.0 * lambda) / dev(1.0, lambda);
        assert!((r - 0.5).abs() < 1e-12, "ε = 1, λ = {lambda}: {r}");
        let r = dev(0.5, 2.0 * lambda) / dev(0.5, lambda);
        let want = exact(0.5, 2.0 * lambda) / exact(0.5, lambda);
        assert!((r - want).abs() < 1e-12, "ε = 1/2, λ = {lambda}: {r}");
    }
}

#[test]
fn quadratic_forms_in_the_prime_variables_vanish_to_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let mut terms = Vec::new();
        for i in 0..2 {
            for j in i..2 {
                for _ in 0..3 {
                    let mut e: Vec<u32> = (0..3).map(|_| rng.random_range(0..3)).collect();
                    e[i] += 1;
                    e[j] += 1;
                    terms.push((e, rng.random_range(-1.0..1.0)));
                }
            }
        }
        let f = Polynomial::new(3, terms.clone());
        assert!(second_order_vanishing(&f, 2, 0.5, 1e-10).unwrap());
        // the same form plus a cubic in ξ″ no longer vanishes
        terms.push((vec![0, 0, 3], 1.0));
        assert!(!second_order_vanishing(&Polynomial::new(3, terms), 2, 0.5, 1e-10).unwrap());
    }
    let numeric = FnGraph::new(2, "x1^2 sin", |x: &[f64]| x[0] * x[0] * (1.0 + x[1].sin()));
    assert!(second_order_vanishing(&numeric, 1, 0.5, 1e-10).unwrap());
}

#[test]
fn quintic_sweep_never_falsifies() {
    let reports = ode_sweep(5, 100, 7).unwrap();
    assert_eq!(reports.len(), 100);
    assert!(reports.iter().all(|r| !r.falsifying()));
    assert!(reports.iter().all(|r| (0.1..=10.0).contains(&r.c) && (-10.0..=10.0).contains(&r.d)));
}

#[test]
fn closed_form_branches_solve_the_equation() {
    for k in 3..=6 {
        for (branch, a, b) in [(Branch::Plus, 1.0, 1.0), (Branch::Plus, 2.0, 0.5), (Branch::Minus, -1.0, 3.0)] {
            let sol = OdeSolution::new(k, branch, a, b).unwrap();
            // keep one unit away from the pole so φ stays O(1)
            let (lo, hi) = sol.domain();
            let (lo, hi) = if lo.is_finite() { (lo + 1.0, lo + 6.0) } else { (hi - 6.0, hi - 1.0) };
            let ts: Vec<f64> = (0..100).map(|i| lo + (hi - lo) * i as f64 / 99.0).collect();
            assert!(ode_residual(&sol, &ts).unwrap() < 1e-10, "k = {k} {branch:?}");
        }
    }
}

#[test]
fn normal_form_of_a_quartic_passes() {
    let a = Polynomial::new(2, vec![(vec![0, 0], 2.0), (vec![1, 0], 1.0)]);
    let s = NormalFormSurface::from_polynomial(4, a).unwrap();
    let r = verify_normal_form(&s, 4, 0.4).unwrap();
    assert!(r.passed, "{:?}", r.failures());
    let wrong = verify_normal_form(&s, 3, 0.4).unwrap();
    assert!(!wrong.passed);
}
