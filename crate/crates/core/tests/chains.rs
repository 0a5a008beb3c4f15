use std::sync::Arc;

use restriction_lab::extension::{EvalGrid, FamilySpec, GridAxis};
use restriction_lab::knapp::scale_invariant;
use restriction_lab::slicing::*;
use restriction_lab::surface::{FiniteTypeGraph, GraphFn};
use restriction_lab::{Complex64, ExponentPair, LabError};

fn sphere() -> ChainSetup {
    ChainSetup {
        chain: ChainId::Sphere,
        n: 2,
        exponents: ExponentPair::from_duals(6.0, 2.0).unwrap(),
        s_range: (0.5, 2.0),
        s_count: 48,
        slice_half: 0.0,
        slice_counts: vec![640],
        y_box: EvalGrid::cube(2, 1.0, 11),
        z_axis: GridAxis::new(-1.0, 1.0, 11),
        graph: None,
    }
}

fn parab() -> ChainSetup {
    ChainSetup {
        chain: ChainId::Parab,
        n: 2,
        exponents: ExponentPair::from_duals(6.0, 2.0).unwrap(),
        s_range: (0.5, 1.0),
        s_count: 32,
        slice_half: 0.5,
        slice_counts: vec![96],
        y_box: EvalGrid::cube(2, 1.0, 11),
        z_axis: GridAxis::new(-1.0, 1.0, 11),
        graph: None,
    }
}

fn hyperb() -> ChainSetup {
    ChainSetup { chain: ChainId::Hyperb, ..parab() }
}

fn finite_type() -> ChainSetup {
    let f: Arc<dyn GraphFn> = Arc::new(FiniteTypeGraph::monomial(2, 2));
    ChainSetup {
        chain: ChainId::FiniteType,
        n: 2,
        exponents: ExponentPair::from_duals(6.0, 2.0).unwrap(),
        s_range: (-0.5, 0.5),
        s_count: 24,
        slice_half: 0.5,
        slice_counts: vec![128],
        y_box: EvalGrid::cube(2, 1.5, 11),
        z_axis: GridAxis::new(-1.5, 1.5, 11),
        graph: Some(f),
    }
}

fn smooth(x: &[f64]) -> Complex64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Complex64::new((-r2).exp() * (1.0 + 0.3 * x[0]), 0.2 * x[1])
}

fn assert_identities(r: &ChainReport) {
    for l in &r.links {
        if l.kind == LinkKind::Identity {
            assert!(!l.exceeds_bound, "{} {}: {} vs {}", r.chain.name(), l.name, l.lhs, l.rhs);
        }
        assert!(!l.violated, "{} {} violated: ratio {}", r.chain.name(), l.name, l.ratio);
    }
}

#[test]
fn zero_density_gives_trivial_report() {
    let r = verify_chain(&sphere(), &|_| Complex64::new(0.0, 0.0), "zero", 1.0).unwrap();
    assert!(r.trivial);
    assert!(r.links.iter().all(|l| l.ratio == 0.0 && !l.violated));
}

#[test]
fn single_shell_is_the_interchange_equality_case() {
    let setup = sphere();
    let runner = ChainRunner::new(&setup).unwrap();
    let shell = runner.s_nodes()[17];
    let u = move |x: &[f64]| {
        let r = x[0].hypot(x[1]);
        let th = x[1].atan2(x[0]);
        if (r - shell).abs() < 1e-9 {
            Complex64::new(1.0 + 0.5 * th.cos(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let r = runner.run(&u, "shell", 1.0).unwrap();
    let l = r.link("interchange").unwrap();
    assert!((l.ratio - 1.0).abs() < 1e-10, "interchange ratio {}", l.ratio);
}

#[test]
fn certified_links_hold_on_every_cone_chain() {
    for setup in [sphere(), parab(), hyperb()] {
        let r = verify_chain(&setup, &smooth, "smooth", 10.0).unwrap();
        assert_eq!(
            r.links.iter().map(|l| l.name.as_str()).collect::<Vec<_>>(),
            ["hausdorff-young", "interchange", "slice", "regroup", "embedding", "holder", "final"]
        );
        assert_identities(&r);
        assert!(r.extension_ratio > 0.0);
    }
}

#[test]
fn parab_chain_refuses_density_outside_sector() {
    // at a_n = 0.5 the chart reaches |a'| = 0.5 exactly, so widen the slice
    let setup = ChainSetup { slice_half: 0.8, slice_counts: vec![160], ..parab() };
    let err = verify_chain(&setup, &|_| Complex64::new(1.0, 0.0), "one", 1.0).unwrap_err();
    assert!(matches!(err, LabError::Precondition(_)), "{err}");
}

#[test]
fn finite_type_chain_links() {
    let setup = finite_type();
    let r = verify_chain(&setup, &smooth, "smooth", 10.0).unwrap();
    assert_eq!(
        r.links.iter().map(|l| l.name.as_str()).collect::<Vec<_>>(),
        ["hausdorff-young", "minkowski", "slice", "absorb-weight", "holder-interval", "measure"]
    );
    assert_identities(&r);
}

#[test]
fn whole_cone_mode_needs_scale_invariance() {
    let mut setup = sphere();
    setup.exponents = ExponentPair::from_duals(7.0, 2.0).unwrap();
    assert!(!scale_invariant(2, 7.0, 2.0));
    let links = LinkConstants { hausdorff_young: 1.0, interchange: 1.0 };
    let err = transfer_constant(&setup, 1.0, &links, TransferMode::WholeCone).unwrap_err();
    assert!(matches!(err, LabError::Mode(_)));
    let err = transfer_constant(&finite_type(), 1.0, &links, TransferMode::WholeCone).unwrap_err();
    assert!(matches!(err, LabError::Mode(_)));
}

#[test]
fn compact_transfer_is_the_product_of_its_factors() {
    let mut setup = sphere();
    setup.exponents = ExponentPair::from_duals(7.0, 2.0).unwrap();
    let links = LinkConstants { hausdorff_young: 1.5, interchange: 1.1 };
    let b = transfer_constant(&setup, 2.0, &links, TransferMode::Compact).unwrap();
    let e = setup.exponents;
    let alpha = setup.weak_exponent();
    let expected = 1.5 * 1.1 * 2.0 * 1.5f64.powf(1.0 / e.p - 1.0 / e.qprime()) * 0.5f64.powf(-1.0 / alpha);
    assert!((b.value - expected).abs() < 1e-12 * expected, "{} vs {expected}", b.value);
}

#[test]
fn rescaled_setup_reproduces_ratios() {
    let setup = sphere();
    let a = verify_chain(&setup, &smooth, "smooth", 1.0).unwrap();
    let lambda = 3.0;
    let big = setup.rescaled(lambda);
    let b = verify_chain(&big, &|x: &[f64]| smooth(&[x[0] / lambda, x[1] / lambda]), "smooth", 1.0).unwrap();
    for (la, lb) in a.links.iter().zip(&b.links) {
        assert!((la.ratio - lb.ratio).abs() < 1e-6 * la.ratio.max(1e-300), "{}: {} vs {}", la.name, la.ratio, lb.ratio);
    }
    assert!((a.extension_ratio - b.extension_ratio).abs() < 1e-6 * a.extension_ratio);
}

#[test]
fn measured_slice_constant_is_positive_for_each_chain() {
    let family = FamilySpec { bumps: 4, modulations: 2, ..FamilySpec::default() };
    for setup in [sphere(), parab(), hyperb(), finite_type()] {
        let r = measure_slice_constant(&setup, &family).unwrap();
        assert!(r.best_ratio > 0.0 && r.best_ratio.is_finite(), "{:?}", setup.chain);
    }
}
