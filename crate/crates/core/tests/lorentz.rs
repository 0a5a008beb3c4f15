use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restriction_lab::lorentz::*;
use restriction_lab::Complex64;

#[test]
fn pure_powers_commute_under_fubini() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for &p in &[1.5, 3.0, 6.0] {
        let vals: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let wx: Vec<f64> = (0..16).map(|_| rng.random_range(0.1..1.0)).collect();
        let wy: Vec<f64> = (0..16).map(|_| rng.random_range(0.1..1.0)).collect();
        let f = ProductGridFunction::new(vals, wx, wy).unwrap();
        let a = mixed_lorentz_norm(&f, LorentzParams::lp(p), LorentzParams::lp(p), InnerAxis::Y);
        let b = mixed_lorentz_norm(&f, LorentzParams::lp(p), LorentzParams::lp(p), InnerAxis::X);
        assert!((a - b).abs() < 1e-12 * a);
    }
}

#[test]
fn constant_on_unit_grid_has_norm_one() {
    let f = ProductGridFunction::new(vec![1.0; 40], vec![0.125; 8], vec![0.2; 5]).unwrap();
    for (o, i) in [(2.0, 3.0), (1.0, 6.0), (4.0, 1.5)] {
        let v = mixed_lorentz_norm(&f, LorentzParams::lp(o), LorentzParams::lp(i), InnerAxis::Y);
        assert!((v - 1.0).abs() < 1e-14);
    }
}

#[test]
fn weak_holder_bound_on_power_times_indicator() {
    // f = t^{-1/α₁} lies in L^{α₁,∞}; g the indicator of a random subset
    let (a1, a2) = (3.0, 2.0);
    let target = 1.0 / (1.0 / a1 + 1.0 / a2);
    let n = 1000;
    let w = vec![1.0 / n as f64; n];
    let f: Vec<f64> = (0..n).map(|j| ((j as f64 + 1.0) / n as f64).powf(-1.0 / a1)).collect();
    let constant = weak_holder_constant(target);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let keep = rng.random_range(0.05..1.0);
        let g: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < keep { 1.0 } else { 0.0 }).collect();
        let r = check_holder(
            &WeightedSamples::new(f.clone(), w.clone()).unwrap(),
            &WeightedSamples::new(g, w.clone()).unwrap(),
            LorentzParams::weak(a1),
            LorentzParams::lp(a2),
            LorentzParams { alpha: target, beta: a2 },
        )
        .unwrap();
        worst = worst.max(r);
    }
    assert!(worst > 0.0 && worst <= constant, "worst {worst} vs {constant}");
}

#[test]
fn weak_norm_of_power_does_not_depend_on_truncation() {
    let alpha = 2.5;
    let norm_on = |r_max: f64| {
        let mut v = Vec::new();
        let mut w = Vec::new();
        let mut r: f64 = 1e-6;
        while r < r_max {
            let next = r * 1.001;
            v.push(next.powf(-1.0 / alpha));
            w.push(next - r);
            r = next;
        }
        lorentz_norm_raw(&v, &w, alpha, f64::INFINITY)
    };
    let (a, b) = (norm_on(1.0), norm_on(100.0));
    assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    assert!((a - 1.0).abs() < 1e-3);
}

fn gaussian(n: usize, h: f64, width: f64) -> Vec<Complex64> {
    let c = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|j| {
            let x = (j as f64 - c) * h / width;
            Complex64::new((-x * x).exp(), 0.0)
        })
        .collect()
}

#[test]
fn hausdorff_young_ratio_is_stable_under_refinement() {
    let ratio = |h: f64| {
        let n = (12.0 / h) as usize + 1;
        check_hausdorff_young(&gaussian(n, h, 1.0), h, 1.5).unwrap().ratio
    };
    // the rearranged step function converges at first order in h
    let (a, b) = (ratio(0.01), ratio(0.005));
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn hausdorff_young_ratio_is_dilation_invariant() {
    let h = 1.0 / 256.0;
    let ratio = |w: f64| check_hausdorff_young(&gaussian((12.0 * w / h) as usize + 1, h, w), h, 1.5).unwrap().ratio;
    let base = ratio(1.0);
    for w in [0.5, 0.25, 0.125] {
        assert!((ratio(w) - base).abs() < 1e-3, "w = {w}");
    }
}
