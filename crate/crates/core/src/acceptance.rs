//! The acceptance suite: one check per criterion, with pinned tolerances.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DensitySpec, SurfaceSpec};
use crate::error::{LabError, Result};
use crate::extension::{decay_fit, DecaySpec, EvalGrid, ExtensionPlan, FamilySpec, GridAxis};
use crate::knapp::{census_row, epsilon_grid, knapp_cap, necessity_census, KnappGrid, KnappSweep, NecessityVerdict};
use crate::lorentz::{
    check_hausdorff_young, check_interchange, check_minkowski, lorentz_norm, LorentzParams, ProductGridFunction, WeightedSamples,
};
use crate::normal_form::{curvature_residual, verify_normal_form, NormalFormSurface, PatchGrid, TangentDevelopable};
use crate::ode::{ode_residual, ode_sweep, Branch, OdeSolution};
use crate::poly::Polynomial;
use crate::quadrature::{bump, plateau};
use crate::reference::circle_extension;
use crate::slicing::{
    measure_slice_constant, transfer_constant, ChainId, ChainReport, ChainRunner, ChainSetup, LinkConstants, LinkKind, TransferMode,
};
use crate::surface::{norm, ExponentPair, FiniteTypeGraph, FnGraph, GraphFn};

pub const BESSEL_TOL: f64 = 1e-6;
pub const BESSEL_NODES: usize = 4096;
pub const BESSEL_SECONDS: f64 = 10.0;
pub const DECAY_TOL: f64 = 0.05;
pub const ANCHOR_TOL: f64 = 1e-12;
pub const MINKOWSKI_SLACK: f64 = 1e-12;
pub const INTERCHANGE_CAP: f64 = 10.0;
pub const INTERCHANGE_DRIFT: f64 = 0.2;
pub const PARSEVAL_TOL: f64 = 1e-8;
pub const IDENTITY_LINK_TOL: f64 = 1e-10;
pub const RESCALE_TOL: f64 = 1e-6;
pub const CHAIN_SECONDS: f64 = 300.0;
pub const KNAPP_SLOPE_TOL: f64 = 0.1;
pub const ODE_RESIDUAL_TOL: f64 = 1e-10;
pub const DEVELOPABLE_TOL: f64 = 1e-6;
pub const ELLIPTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> AcceptanceConfig {
        AcceptanceConfig { seed: 20240917 }
    }
}

impl AcceptanceConfig {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionResult {
    fn new(id: u32, name: &str) -> CriterionResult {
        CriterionResult { id, name: name.to_string(), passed: true, summary: String::new(), metrics: BTreeMap::new() }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.passed = false;
            if !self.summary.is_empty() {
                self.summary.push_str("; ");
            }
            self.summary.push_str(what);
        }
    }

    fn finish(mut self, ok_summary: String) -> CriterionResult {
        if self.passed {
            self.summary = ok_summary;
        }
        self
    }

    pub fn line(&self) -> String {
        format!("[{}] {:>2} {:<22} {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.summary)
    }
}

/// Wall-clock per criterion; kept out of the report so reruns compare
/// byte for byte.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub seconds: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl AcceptanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn failed(id: u32, name: &str, e: crate::error::LabError) -> CriterionResult {
    let mut c = CriterionResult::new(id, name);
    c.require(false, &format!("error: {e}"));
    c
}

pub type CriterionFn = fn(&AcceptanceConfig) -> Result<CriterionResult>;

/// Criteria 1 to 9; the determinism criterion reruns these.
pub fn criteria() -> Vec<(u32, &'static str, CriterionFn)> {
    vec![
        (1, "bessel-oracle", bessel_oracle as CriterionFn),
        (2, "decay-slope", decay_slope),
        (3, "lorentz-anchor", lorentz_anchor),
        (4, "minkowski-link", minkowski_link),
        (5, "parseval", parseval),
        (6, "chain-verification", chain_verification),
        (7, "knapp-necessity", knapp_necessity),
        (8, "ode-suite", ode_suite),
        (9, "normal-form-suite", normal_form_suite),
    ]
}

pub fn run_criterion(id: u32, cfg: &AcceptanceConfig) -> (CriterionResult, f64) {
    let (_, name, f) = criteria().into_iter().find(|(i, _, _)| *i == id).expect("criterion id");
    let (r, s) = timed(|| f(cfg));
    (r.unwrap_or_else(|e| failed(id, name, e)), s)
}

/// Criteria 1 to 9 once.
pub fn run_core(cfg: &AcceptanceConfig) -> (Vec<CriterionResult>, Timings) {
    run_ids(cfg, &criteria().iter().map(|c| c.0).collect::<Vec<_>>())
}

fn run_ids(cfg: &AcceptanceConfig, ids: &[u32]) -> (Vec<CriterionResult>, Timings) {
    let mut t = Timings::default();
    let mut out = Vec::new();
    for &id in ids {
        let (r, s) = run_criterion(id, cfg);
        t.seconds.insert(id, s);
        out.push(r);
    }
    (out, t)
}

/// The full suite: criteria 1 to 9, then a second pass compared byte for
/// byte with the first.
pub fn run_suite(cfg: &AcceptanceConfig) -> (AcceptanceReport, Timings) {
    run_selected(cfg, &[]).expect("all ids are known")
}

/// Like `run_suite` restricted to `ids` (empty means all); the
/// determinism criterion reruns only the selected ones.
pub fn run_selected(cfg: &AcceptanceConfig, ids: &[u32]) -> Result<(AcceptanceReport, Timings)> {
    let known: Vec<u32> = criteria().iter().map(|c| c.0).collect();
    let mut ids: Vec<u32> = if ids.is_empty() { known.clone() } else { ids.to_vec() };
    ids.sort_unstable();
    ids.dedup();
    if let Some(bad) = ids.iter().find(|i| !known.contains(i) && **i != 10) {
        return Err(LabError::Config(format!("no acceptance criterion {bad}")));
    }
    ids.retain(|i| *i != 10);
    let (mut crit, mut t) = run_ids(cfg, &ids);
    let ((second, _), s) = timed(|| run_ids(cfg, &ids));
    t.seconds.insert(10, s);
    crit.push(determinism_verdict(&crit, &second));
    let passed = crit.iter().all(|c| c.passed);
    Ok((AcceptanceReport { seed: cfg.seed, criteria: crit, passed }, t))
}

pub fn determinism_verdict(first: &[CriterionResult], second: &[CriterionResult]) -> CriterionResult {
    let mut c = CriterionResult::new(10, "determinism");
    let a = serde_json::to_string(first).expect("serialises");
    let b = serde_json::to_string(second).expect("serialises");
    c.metric("bytes", a.len() as f64);
    c.require(a == b, "second run differs from the first");
    c.finish(format!("two runs byte-identical ({} bytes)", a.len()))
}

/// 1. Circle extension of u ≡ 1 against 2πJ₀(2π|x|) on |x| ≤ 10.
pub fn bessel_oracle(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(1, "bessel-oracle");
    let (err, secs) = timed(|| -> Result<f64> {
        let d = DensitySpec::One.sample(&SurfaceSpec::Circle.build()?, &[BESSEL_NODES], None)?;
        let g = EvalGrid::cube(2, 10.0, 81);
        let plan = ExtensionPlan::new(&d, &g)?;
        let vals = plan.apply(&d.coefficients());
        let mut err = 0.0f64;
        for (i, v) in vals.iter().enumerate() {
            let x = g.point(i);
            let r = x[0].hypot(x[1]);
            if r <= 10.0 {
                err = err.max((v - Complex64::new(circle_extension(r), 0.0)).norm());
            }
        }
        Ok(err)
    });
    let err = err?;
    c.metric("sup_error", err);
    c.require(err <= BESSEL_TOL, &format!("sup error {err:.3e} > {BESSEL_TOL:e}"));
    c.require(secs < BESSEL_SECONDS, &format!("took {secs:.1} s"));
    Ok(c.finish(format!("sup error {err:.2e} over |x| ≤ 10, N = {BESSEL_NODES}")))
}

/// 2. Envelope slopes: −1/2 for the circle, 0 for a flat patch along its normal.
pub fn decay_slope(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(2, "decay-slope");
    let circle = DensitySpec::One.sample(&SurfaceSpec::Circle.build()?, &[16384], None)?;
    let spec = DecaySpec { direction: vec![1.0, 0.0], r_min: 10.0, r_max: 100.0, radii: 40, window: 1.0, window_samples: 16 };
    let fit = decay_fit(&circle, &spec)?;
    let plane = SurfaceSpec::Plane { half: 1.0 }.build()?;
    let flat = DensitySpec::Bump { width: 1.0 }.sample(&plane, &[64, 64], None)?;
    let spec3 = DecaySpec { direction: vec![0.0, 0.0, 1.0], ..spec.clone() };
    let flat_fit = decay_fit(&flat, &spec3)?;
    c.metric("circle_slope", fit.slope);
    c.metric("flat_slope", flat_fit.slope);
    c.require((fit.slope + 0.5).abs() <= DECAY_TOL, &format!("circle slope {:.4}", fit.slope));
    c.require(flat_fit.slope.abs() <= DECAY_TOL, &format!("flat slope {:.4}", flat_fit.slope));
    Ok(c.finish(format!("circle slope {:.4}, flat slope {:.2e}", fit.slope, flat_fit.slope)))
}

fn random_samples(rng: &mut ChaCha8Rng, len: usize) -> WeightedSamples {
    let values: Vec<f64> = (0..len).map(|_| rng.random::<f64>() * 10f64.powf(rng.random_range(-2.0..2.0))).collect();
    let weights: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..2.0)).collect();
    WeightedSamples::new(values, weights).expect("positive weights")
}

/// 3. ‖f‖_{α,α} = ‖f‖_α.
pub fn lorentz_anchor(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(3, "lorentz-anchor");
    let mut worst = 0.0f64;
    for (s, alpha) in [1.2, 2.0, 3.7].into_iter().enumerate() {
        let mut rng = cfg.rng(30 + s as u64);
        for _ in 0..1000 {
            let len = rng.random_range(1..200);
            let f = random_samples(&mut rng, len);
            let a = lorentz_norm(&f, LorentzParams::new(alpha, alpha)?)?;
            let b = f.lp_norm(alpha);
            worst = worst.max((a - b).abs() / b);
        }
    }
    c.metric("max_rel_error", worst);
    c.require(worst <= ANCHOR_TOL, &format!("relative error {worst:.3e}"));
    Ok(c.finish(format!("max relative error {worst:.2e} over 3000 sets")))
}

/// A random mixture of anisotropic Gaussians on [0,1]².
fn random_field(rng: &mut ChaCha8Rng) -> Vec<[f64; 5]> {
    (0..rng.random_range(1..=4))
        .map(|_| {
            [
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.05..0.5),
                rng.random_range(0.05..0.5),
                rng.random_range(0.2..2.0),
            ]
        })
        .collect()
}

/// Cell-centre samples on an n×n grid with weights 1/n.
fn sample_field(field: &[[f64; 5]], n: usize) -> ProductGridFunction {
    let h = 1.0 / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            values.push(field.iter().map(|g| g[4] * (-((x - g[0]) / g[2]).powi(2) - ((y - g[1]) / g[3]).powi(2)).exp()).sum());
        }
    }
    ProductGridFunction::new(values, vec![h; n], vec![h; n]).expect("shape")
}

/// 4. Minkowski ratio ≤ 1 and the Lorentz interchange constant.
pub fn minkowski_link(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(4, "minkowski-link");
    for (s, (p, tag)) in [(4.0 / 3.0, "p4/3"), (1.5, "p3/2")].into_iter().enumerate() {
        let mut rng = cfg.rng(40 + s as u64);
        let fields: Vec<Vec<[f64; 5]>> = (0..1000).map(|_| random_field(&mut rng)).collect();
        let mut mink = 0.0f64;
        let mut consts = Vec::new();
        for n in [8usize, 16] {
            let mut worst = 0.0f64;
            for f in &fields {
                let u = sample_field(f, n);
                if n == 8 {
                    mink = mink.max(check_minkowski(&u, p));
                }
                worst = worst.max(check_interchange(&u, p));
            }
            consts.push(worst);
        }
        let drift = (consts[1] - consts[0]).abs() / consts[0];
        c.metric(&format!("{tag}_minkowski_max"), mink);
        c.metric(&format!("{tag}_interchange_8"), consts[0]);
        c.metric(&format!("{tag}_interchange_16"), consts[1]);
        c.require(mink <= 1.0 + MINKOWSKI_SLACK, &format!("{tag}: Minkowski ratio {mink}"));
        c.require(consts[0].is_finite() && consts[0] <= INTERCHANGE_CAP, &format!("{tag}: interchange {}", consts[0]));
        c.require(drift <= INTERCHANGE_DRIFT, &format!("{tag}: interchange drifts {drift:.3} under doubling"));
    }
    let m = &c.metrics;
    let summary = format!(
        "Minkowski max {:.12}/{:.12}; interchange constant {:.4}→{:.4} (p=4/3), {:.4}→{:.4} (p=3/2)",
        m["p4/3_minkowski_max"], m["p3/2_minkowski_max"], m["p4/3_interchange_8"], m["p4/3_interchange_16"],
        m["p3/2_interchange_8"], m["p3/2_interchange_16"]
    );
    Ok(c.finish(summary))
}

/// 5. Hausdorff–Young at p = 2 is Parseval.
pub fn parseval(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(5, "parseval");
    let mut rng = cfg.rng(50);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(256..1024);
        let h = rng.random_range(0.01..0.5);
        let freq = rng.random_range(0.0..0.1);
        let modes: Vec<(f64, f64, f64)> =
            (0..3).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..3.0), rng.random_range(0.0..2.0 * PI))).collect();
        let u: Vec<Complex64> = (0..n)
            .map(|j| {
                let x = 2.0 * (j as f64 + 0.5) / n as f64 - 1.0;
                let amp: f64 = 1.0 + modes.iter().map(|(a, m, ph)| a * (PI * m * x + ph).cos()).sum::<f64>();
                Complex64::from_polar(bump(x) * amp, 2.0 * PI * freq * j as f64)
            })
            .collect();
        let hy = check_hausdorff_young(&u, h, 2.0)?;
        worst = worst.max((hy.ratio - 1.0).abs());
    }
    c.metric("max_deviation", worst);
    c.require(worst <= PARSEVAL_TOL, &format!("deviation {worst:.3e}"));
    Ok(c.finish(format!("max |ratio − 1| = {worst:.2e} over 100 inputs")))
}

/// Geometry shared by the chain criterion, the CLI and the benches.
pub fn sphere_chain_setup() -> ChainSetup {
    ChainSetup {
        chain: ChainId::Sphere,
        n: 2,
        exponents: ExponentPair::from_duals(6.0, 2.0).expect("valid"),
        s_range: (0.5, 2.0),
        s_count: 96,
        slice_half: 0.0,
        slice_counts: vec![800],
        y_box: EvalGrid::cube(2, 1.25, 21),
        z_axis: GridAxis::new(-1.25, 1.25, 21),
        graph: None,
    }
}

/// Seeded densities on the ring r ∈ [r0, r1]: a radial plateau, angular
/// caps, and random mixtures of radial bumps times von Mises profiles.
pub type ConeDensity = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

pub fn cone_corpus(seed: u64, count: usize, r0: f64, r1: f64) -> Vec<(String, ConeDensity)> {
    let mut out: Vec<(String, ConeDensity)> = Vec::new();
    out.push(("radial-plateau".into(), Arc::new(move |x: &[f64]| {
        let r = norm(x);
        Complex64::new(plateau(r, r0, r1, 0.1), 0.0)
    })));
    for (i, w) in [1.0, 0.5, 0.25, 0.125].into_iter().enumerate() {
        if out.len() >= count {
            break;
        }
        out.push((format!("cap#{i}"), Arc::new(move |x: &[f64]| {
            let r = norm(x);
            let th = x[1].atan2(x[0]);
            Complex64::new(plateau(r, r0, r1, 0.1) * plateau(th, -w, w, 0.1), 0.0)
        })));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = r1 - r0;
    while out.len() < count {
        let terms = rng.random_range(1..=3);
        let parts: Vec<(f64, f64, f64, f64, Complex64, f64)> = (0..terms)
            .map(|_| {
                let w = rng.random_range(0.1..0.3) * len;
                let c = rng.random_range(r0 + w..r1 - w);
                let kappa = rng.random_range(0.0..8.0);
                let th0 = rng.random_range(-PI..PI);
                let amp = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..2.0 * PI));
                let m = rng.random_range(-3..=3) as f64;
                (c, w, kappa, th0, amp, m)
            })
            .collect();
        let label = format!("mixture#{}", out.len());
        out.push((label, Arc::new(move |x: &[f64]| {
            let r = norm(x);
            let th = x[1].atan2(x[0]);
            parts
                .iter()
                .map(|(c, w, kappa, th0, amp, m)| {
                    amp * (bump((r - c) / w) * (kappa * ((th - th0).cos() - 1.0)).exp())
                        * Complex64::from_polar(1.0, m * th)
                })
                .sum()
        })));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSuiteOutcome {
    pub slice_constant: f64,
    pub slice_best: String,
    pub links: LinkConstants,
    pub transfer: f64,
    pub best_extension_ratio: f64,
    pub best_label: String,
    pub reports: Vec<ChainReport>,
}

/// Runs the chain on the corpus for one dilation λ.
pub fn chain_suite(setup: &ChainSetup, corpus: &[(String, ConeDensity)], lambda: f64, family: &FamilySpec) -> Result<ChainSuiteOutcome> {
    let st = setup.rescaled(lambda);
    let cs = measure_slice_constant(&st, family)?;
    let runner = ChainRunner::new(&st)?;
    let reports: Vec<ChainReport> = corpus
        .par_iter()
        .map(|(label, u)| {
            let u = u.clone();
            let ul = move |x: &[f64]| {
                let y: Vec<f64> = x.iter().map(|v| v / lambda).collect();
                u(&y)
            };
            runner.run(&ul, label, cs.best_ratio)
        })
        .collect::<Result<_>>()?;
    let links = LinkConstants::from_reports(&reports);
    let transfer = transfer_constant(&st, cs.best_ratio, &links, TransferMode::WholeCone)?.value;
    let (best_label, best) = reports
        .iter()
        .map(|r| (r.u_label.clone(), r.extension_ratio))
        .fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    Ok(ChainSuiteOutcome { slice_constant: cs.best_ratio, slice_best: cs.best_label, links, transfer, best_extension_ratio: best, best_label, reports })
}

/// 6. Chain verification on the cone ring for (p′, q) = (6, 2), n = 2.
pub fn chain_verification(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(6, "chain-verification");
    let t = Instant::now();
    let setup = sphere_chain_setup();
    let corpus = cone_corpus(cfg.seed ^ 0x6c0e, 100, setup.s_range.0, setup.s_range.1);
    let family = FamilySpec { seed: cfg.seed, ..FamilySpec::default() };
    let base = chain_suite(&setup, &corpus, 1.0, &family)?;
    let mut identity_err = 0.0f64;
    let mut certified_breaks = 0usize;
    let mut sandwich_breaks = 0usize;
    let mut slice_exceed = 0usize;
    for r in &base.reports {
        for l in &r.links {
            if l.kind == LinkKind::Identity {
                identity_err = identity_err.max((l.lhs - l.rhs).abs() / l.lhs.abs().max(l.rhs.abs()).max(f64::MIN_POSITIVE));
            }
            if l.violated {
                certified_breaks += 1;
            }
            if l.name == "slice" && l.exceeds_bound {
                slice_exceed += 1;
            }
        }
        if r.extension_ratio > base.transfer {
            sandwich_breaks += 1;
        }
    }
    let mut drift = 0.0f64;
    for lambda in [2.0, 4.0] {
        let other = chain_suite(&setup, &corpus, lambda, &family)?;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        drift = drift.max(rel(base.transfer, other.transfer));
        for (a, b) in base.reports.iter().zip(&other.reports) {
            drift = drift.max(rel(a.extension_ratio, b.extension_ratio));
            for (la, lb) in a.links.iter().zip(&b.links) {
                drift = drift.max(rel(la.ratio, lb.ratio));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    c.metric("slice_constant", base.slice_constant);
    c.metric("hausdorff_young_constant", base.links.hausdorff_young);
    c.metric("interchange_constant", base.links.interchange);
    c.metric("transfer_constant", base.transfer);
    c.metric("best_extension_ratio", base.best_extension_ratio);
    c.metric("margin", base.transfer / base.best_extension_ratio);
    c.metric("identity_error", identity_err);
    c.metric("rescale_drift", drift);
    c.metric("slice_links_over_measured", slice_exceed as f64);
    c.require(identity_err <= IDENTITY_LINK_TOL, &format!("identity links off by {identity_err:.3e}"));
    c.require(certified_breaks == 0, &format!("{certified_breaks} certified links violated"));
    c.require(sandwich_breaks == 0, &format!("{sandwich_breaks} of 100 inputs exceed the transferred bound"));
    c.require(drift <= RESCALE_TOL, &format!("λ drift {drift:.3e}"));
    c.require(secs < CHAIN_SECONDS, &format!("took {secs:.0} s"));
    Ok(c.finish(format!(
        "max cone ratio {:.4} ({}) ≤ transfer {:.4}; identities {:.1e}; λ drift {:.1e}",
        base.best_extension_ratio, base.best_label, base.transfer, identity_err, drift
    )))
}

/// 7. Knapp slopes against (1+ε)/q − (1+k+ε)/p′, and the verdict census.
pub fn knapp_necessity(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(7, "knapp-necessity");
    let lambdas = [4.0, 8.0, 16.0, 32.0];
    let mut worst = 0.0f64;
    let mut fits = 0usize;
    for k in [2u32, 3, 4] {
        for eps in [0.5, 1.0] {
            let f: Arc<dyn GraphFn> = Arc::new(FiniteTypeGraph::monomial(k, 2));
            let sweep = KnappSweep::compute(f, k, eps, &lambdas, knapp_cap(), &KnappGrid::default())?;
            for pp in [5.0, 6.0, 8.0] {
                for q in [1.0, 2.0] {
                    let fit = sweep.fit(pp, q)?;
                    worst = worst.max((fit.fitted - fit.predicted).abs());
                    fits += 1;
                }
            }
        }
    }
    let grid = epsilon_grid();
    let mut mismatches = 0usize;
    for k in [2u32, 3, 4] {
        for pp in [5.0, 6.0, 8.0] {
            for q in [1.0, 2.0] {
                if !census_row(k, pp, q, &grid).agrees {
                    mismatches += 1;
                }
            }
        }
    }
    let census = necessity_census(1000, cfg.seed);
    mismatches += census.iter().filter(|r| !r.agrees).count();
    let violated = census.iter().filter(|r| r.verdict == NecessityVerdict::Violated).count();
    c.metric("max_slope_error", worst);
    c.metric("census_mismatches", mismatches as f64);
    c.metric("census_violated", violated as f64);
    c.require(worst <= KNAPP_SLOPE_TOL, &format!("slope error {worst:.4}"));
    c.require(mismatches == 0, &format!("{mismatches} census mismatches"));
    Ok(c.finish(format!("{fits} fits, max slope error {worst:.4}; census 1018 triples, {violated} violated, 0 mismatches")))
}

/// 8. Closed-form residuals and the backward-continuation sweep.
pub fn ode_suite(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(8, "ode-suite");
    let mut worst = 0.0f64;
    for k in 3..=6u32 {
        for (branch, a, b) in [(Branch::Plus, 1.0, 1.0), (Branch::Minus, 2.0, 0.5), (Branch::Plus, -1.0, 6.0)] {
            let sol = OdeSolution::new(k, branch, a, b)?;
            let ts: Vec<f64> = (0..100).map(|i| 5.0 * i as f64 / 99.0).collect();
            worst = worst.max(ode_residual(&sol, &ts)?);
        }
    }
    let mut falsifying = 0usize;
    let mut blowups = 0usize;
    let mut total = 0usize;
    for k in 3..=6u32 {
        for r in ode_sweep(k, 100, cfg.seed.wrapping_add(k as u64))? {
            total += 1;
            if r.falsifying() {
                falsifying += 1;
            }
            if matches!(r.verdict, crate::ode::OdeVerdict::BlowUp { .. }) {
                blowups += 1;
            }
        }
    }
    c.metric("max_residual", worst);
    c.metric("falsifying", falsifying as f64);
    c.metric("blow_ups", blowups as f64);
    c.require(worst < ODE_RESIDUAL_TOL, &format!("residual {worst:.3e}"));
    c.require(falsifying == 0, &format!("{falsifying} falsifying continuations"));
    Ok(c.finish(format!("residual {worst:.2e}; {total} continuations, {blowups} blow-ups, 0 falsifying")))
}

/// 9. Normal forms, developable residuals, the elliptic paraboloid.
pub fn normal_form_suite(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut c = CriterionResult::new(9, "normal-form-suite");
    let mut developable = 0.0f64;
    for k in [2u32, 3, 4] {
        let cyl = NormalFormSurface::from_polynomial(k, Polynomial::constant(2, 1.0))?;
        let rep = verify_normal_form(&cyl, k, 0.5)?;
        c.require(rep.passed, &format!("cylinder ξ₁^{k}: {:?}", rep.failures().iter().map(|f| &f.name).collect::<Vec<_>>()));
        developable = developable.max(curvature_residual(&cyl, &PatchGrid::square(0.5, 9))?);
    }
    let td = TangentDevelopable::new(1.0)?;
    let rep = verify_normal_form(&td, 2, 0.1)?;
    c.require(rep.passed, &format!("tangent developable: {:?}", rep.failures().iter().map(|f| &f.name).collect::<Vec<_>>()));
    developable = developable.max(curvature_residual(&td, &PatchGrid::square(0.1, 9))?);
    let cone = FnGraph::new(2, "cone", |x: &[f64]| x[0] * (1.0 + (x[1] / x[0]).powi(2)).sqrt());
    developable = developable.max(curvature_residual(&cone, &PatchGrid { lo: vec![0.5, -0.5], hi: vec![1.5, 0.5], n: 9 })?);
    let ell = Polynomial::new(2, vec![(vec![2, 0], 0.5), (vec![0, 2], 0.5)]);
    let elliptic = curvature_residual(&ell, &PatchGrid::square(0.5, 9))?;
    c.metric("developable_residual", developable);
    c.metric("elliptic_residual", elliptic);
    c.require(developable < DEVELOPABLE_TOL, &format!("developable residual {developable:.3e}"));
    c.require((elliptic - 1.0).abs() <= ELLIPTIC_TOL, &format!("elliptic residual {elliptic}"));
    Ok(c.finish(format!("cylinders k=2,3,4 and tangent developable pass; developable residual {developable:.1e}, elliptic {elliptic}")))
}
