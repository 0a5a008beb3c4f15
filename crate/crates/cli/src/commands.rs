use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use restriction_lab::acceptance::{cone_corpus, run_selected, AcceptanceConfig, ConeDensity};
use restriction_lab::config::{DensitySpec, SurfaceSpec};
use restriction_lab::extension::{extend_points, sufficient_counts, alias_bound, ExtensionPlan, FamilySpec};
use restriction_lab::knapp::{admissible_compact, knapp_cap, necessity_witness, scale_invariant, KnappGrid, KnappSweep};
use restriction_lab::lorentz::{lorentz_norm_raw, lp_norm};
use restriction_lab::normal_form::{verify_normal_form, TangentDevelopable};
use restriction_lab::ode::{ode_no_nontrivial_solution, ode_sweep, OdeReport, OdeVerdict};
use restriction_lab::slicing::{
    measure_slice_constant, transfer_constant, ChainId, ChainReport, ChainRunner, ChainSetup, LinkConstants, TransferMode,
};
use restriction_lab::surface::{contact_order, gaussian_curvature, FiniteTypeGraph, FnGraph, GraphFn, Patch};
use restriction_lab::{Complex64, EvalGrid, ExponentPair, GridAxis, SampledDensity, SurfaceDescriptor};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

/// What a subcommand hands back: the JSON `result`, an optional CSV body and
/// lines for stdout.
pub struct Output {
    pub result: Value,
    pub csv: Option<String>,
    pub lines: Vec<String>,
    /// Set when the run itself completed but reports a failure.
    pub failed: bool,
}

impl Output {
    fn new(result: Value, csv: String) -> Output {
        Output { result, csv: Some(csv), lines: Vec::new(), failed: false }
    }
}

fn one(_: &restriction_lab::extension::SamplePoint) -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn build_surface(name: Option<&str>, n: Option<usize>, half: Option<f64>, spec: &Option<SurfaceSpec>) -> Result<SurfaceDescriptor, CliError> {
    let spec = match spec {
        Some(s) => s.clone(),
        None => SurfaceSpec::from_name(name.unwrap_or("circle"), n, half.unwrap_or(1.0))?,
    };
    Ok(spec.build()?)
}

fn csv_row(cells: impl IntoIterator<Item = String>) -> String {
    let mut s = cells.into_iter().collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// `inf` is written as a string so it survives the JSON round trip.
mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(x) if x.is_infinite() => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) => t.parse::<f64>().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceArgs {
    /// circle, sphere, paraboloid, hyperboloid, cone, plane or monomialK
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-width of graph patches
    #[arg(long)]
    pub half: Option<f64>,
    /// Nodes per sampling axis
    #[arg(long)]
    pub res: Option<usize>,
    #[arg(skip)]
    pub surface_spec: Option<SurfaceSpec>,
}

pub fn surface(a: &SurfaceArgs) -> Result<Output, CliError> {
    let s = build_surface(a.surface.as_deref(), a.n, a.half, &a.surface_spec)?;
    let dims = s.param_box().0.len();
    let d = SampledDensity::sample(&s, &vec![a.res.unwrap_or(16); dims], None, one)?;
    let amb = s.ambient_dim();
    let mut csv = csv_row(
        (0..dims).map(|i| format!("param_{i}")).chain((0..amb).map(|i| format!("point_{i}"))).chain(["weight".to_string()]),
    );
    for j in 0..d.len() {
        let sp = d.sample_point(j);
        csv.push_str(&csv_row(
            sp.param.iter().chain(sp.point).map(|v| v.to_string()).chain([d.weights[j].to_string()]),
        ));
    }
    let mut result = json!({
        "label": s.label(),
        "kind": s.kind,
        "chart_dim": s.chart_dim(),
        "ambient_dim": amb,
        "nodes": d.len(),
        "total_measure": d.total_measure(),
    });
    if let (Some(g), Patch::Box { lo, hi }) = (&s.graph, &s.patch) {
        let centre: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        if g.f.dim() == 2 {
            let step = 1e-4 * s.patch.diameter();
            result["curvature_at_centre"] = json!(gaussian_curvature(g.f.as_ref(), &centre, step)?);
        }
        result["contact_order_at_centre"] = json!(contact_order(g.f.as_ref(), &centre, 8, 0.05));
    }
    Ok(Output::new(result, csv))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct NormArgs {
    /// CSV of value,weight rows
    #[arg(long, conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Seeded random samples instead of an input file
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Second exponent; `inf` for the weak norm
    #[arg(long)]
    #[serde(with = "exponent")]
    pub beta: Option<f64>,
}

fn read_samples(path: &PathBuf) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    let mut v = Vec::new();
    let mut w = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cells.as_slice() {
            [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((a, b)) => {
                v.push(a);
                w.push(b);
            }
            // a header line is allowed
            None if i == 0 => {}
            None => return Err(CliError::Schema(format!("{}:{}: expected value,weight", path.display(), i + 1))),
        }
    }
    Ok((v, w))
}

pub fn norm(a: &NormArgs, seed: u64) -> Result<Output, CliError> {
    let (v, w) = match (&a.input, a.random) {
        (Some(p), _) => read_samples(p)?,
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(1e-3..1.0))).unzip()
        }
        (None, None) => return Err(CliError::Schema("norm needs --input or --random".into())),
    };
    let f = restriction_lab::WeightedSamples::new(v, w)?;
    let alpha = a.alpha.unwrap_or(2.0);
    let beta = a.beta.unwrap_or(alpha);
    let lp = restriction_lab::LorentzParams::new(alpha, beta)?;
    let value = restriction_lab::lorentz::lorentz_norm(&f, lp)?;
    let abs: Vec<f64> = f.values.iter().map(|x| x.abs()).collect();
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&i, &j| abs[j].total_cmp(&abs[i]));
    let mut csv = csv_row(["t".to_string(), "f_star".to_string()]);
    let mut t = 0.0;
    for &i in &order {
        t += f.weights[i];
        csv.push_str(&csv_row([t.to_string(), abs[i].to_string()]));
    }
    let result = json!({
        "count": f.len(),
        "total_weight": f.total_weight(),
        "alpha": alpha,
        "beta": if beta.is_infinite() { json!("inf") } else { json!(beta) },
        "lorentz_norm": value,
        "lp_norm": lp_norm(&abs, &f.weights, alpha),
        "weak_norm": lorentz_norm_raw(&abs, &f.weights, alpha, f64::INFINITY),
    });
    Ok(Output::new(result, csv))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct ExtendArgs {
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub half: Option<f64>,
    /// Density: one, bump or cap
    #[arg(long)]
    pub u: Option<String>,
    /// Half-width of the evaluation box
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub box_half: Option<f64>,
    /// Evaluation points per axis
    #[arg(long)]
    pub res: Option<usize>,
    /// Surface nodes per sampling axis; raised as the aliasing rule requires
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(skip)]
    pub surface_spec: Option<SurfaceSpec>,
    #[arg(skip)]
    pub density: Option<DensitySpec>,
}

/// Ceiling on the phase tables one command may allocate.
const PLAN_BYTES_LIMIT: f64 = 1024.0 * 1024.0 * 1024.0;

pub fn extend(a: &ExtendArgs) -> Result<Output, CliError> {
    let s = build_surface(a.surface.as_deref(), a.n, a.half, &a.surface_spec)?;
    let density = match &a.density {
        Some(d) => d.clone(),
        None => DensitySpec::from_name(a.u.as_deref().unwrap_or("one"))?,
    };
    let amb = s.ambient_dim();
    let half = a.box_half.unwrap_or(if amb == 2 { 10.0 } else { 2.0 });
    let res = a.res.unwrap_or(if amb == 2 { 64 } else { 24 });
    if !(half > 0.0) || res < 2 {
        return Err(CliError::Schema("extend needs box > 0 and res ≥ 2".into()));
    }
    let dims = s.param_box().0.len();
    let counts = sufficient_counts(&s, &vec![a.nodes.unwrap_or(32); dims], None, &vec![half; amb])?;
    let table_bytes = 16.0 * amb as f64 * res as f64 * counts.iter().product::<usize>() as f64;
    if table_bytes > PLAN_BYTES_LIMIT {
        return Err(CliError::Schema(format!(
            "{counts:?} surface nodes against {res}^{amb} points needs {:.1} GiB of phase tables; lower --box or --res",
            table_bytes / 2f64.powi(30)
        )));
    }
    let d = density.sample(&s, &counts, None)?;
    let g = EvalGrid::cube(amb, half, res);
    let field = ExtensionPlan::new(&d, &g)?.apply(&d.coefficients());
    let origin = extend_points(&d, &[vec![0.0; amb]])?[0];
    let mut csv = csv_row((0..amb).map(|i| format!("x_{i}")).chain(["re", "im", "abs"].map(String::from)));
    for (i, v) in field.iter().enumerate() {
        csv.push_str(&csv_row(g.point(i).iter().map(|x| x.to_string()).chain([v.re, v.im, v.norm()].map(|x| x.to_string()))));
    }
    let mags: Vec<f64> = field.iter().map(|z| z.norm()).collect();
    let w = g.cell_weights();
    let norms: BTreeMap<String, f64> = [2.0, 4.0, 6.0].iter().map(|&p| (format!("L{p}"), lp_norm(&mags, &w, p))).collect();
    let result = json!({
        "surface": s.label(),
        "density": density,
        "nodes": counts,
        "alias_bound": alias_bound(&d, &vec![half; amb]),
        "value_at_origin": {"re": origin.re, "im": origin.im},
        "abs_at_origin": origin.norm(),
        "sup": mags.iter().fold(0.0f64, |m, v| m.max(*v)),
        "norms": norms,
    });
    Ok(Output::new(result, csv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ChainName {
    Sphere,
    Parab,
    Hyperb,
    #[value(alias = "finite-type")]
    #[serde(rename = "finite-type", alias = "finitetype")]
    Finitetype,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct ChainArgs {
    #[arg(long, value_enum)]
    pub chain: Option<ChainName>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub pprime: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Half-width of the box dual to the slice variables
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub box_half: Option<f64>,
    /// Points per axis of the dual boxes
    #[arg(long)]
    pub res: Option<usize>,
    /// Nodes in the transverse variable
    #[arg(long)]
    pub s_count: Option<usize>,
    /// Number of seeded test densities
    #[arg(long)]
    pub count: Option<usize>,
    /// Dilation applied to the setup and the densities
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Degree of ξ₁ᵏ for the finite-type chain
    #[arg(long)]
    pub k: Option<u32>,
}

fn chain_setup(a: &ChainArgs) -> Result<ChainSetup, CliError> {
    let chain = match a.chain.unwrap_or(ChainName::Sphere) {
        ChainName::Sphere => ChainId::Sphere,
        ChainName::Parab => ChainId::Parab,
        ChainName::Hyperb => ChainId::Hyperb,
        ChainName::Finitetype => ChainId::FiniteType,
    };
    let n = a.n.unwrap_or(2);
    if n < 2 || (chain == ChainId::FiniteType && n != 2) {
        return Err(CliError::Schema(format!("n = {n} is not available for the {} chain", chain.name())));
    }
    let exponents = ExponentPair::from_duals(a.pprime.unwrap_or(6.0), a.q.unwrap_or(2.0))?;
    let half = a.box_half.unwrap_or(1.25);
    let res = a.res.unwrap_or(21);
    let y_dim = if chain == ChainId::FiniteType { 2 } else { n };
    let y_box = EvalGrid::cube(y_dim, half, res);
    let z_axis = GridAxis::new(-half, half, res);
    let trap = vec![restriction_lab::quadrature::AxisRule::Trapezoid; n - 1];
    let (s_range, slice_half, slice_counts, graph): (_, _, _, Option<Arc<dyn GraphFn>>) = match chain {
        ChainId::Sphere => {
            let (s0, s1) = (0.5, 2.0);
            let counts = sufficient_counts(&SurfaceDescriptor::sphere(n), &vec![32; n - 1], None, &vec![half * s1; n])?;
            ((s0, s1), 0.0, counts, None)
        }
        ChainId::Parab => {
            let (s0, s1) = (0.5, 1.0);
            let mut extent = vec![half; n];
            extent[n - 1] = half / s0;
            let counts = sufficient_counts(&SurfaceDescriptor::paraboloid(n, s0), &vec![16; n - 1], Some(&trap), &extent)?;
            ((s0, s1), s0, counts, None)
        }
        ChainId::Hyperb => {
            let (s0, s1) = (0.5, 1.0);
            let counts = sufficient_counts(&SurfaceDescriptor::hyperboloid(n, 0.5), &vec![16; n - 1], Some(&trap), &vec![half * s1; n])?;
            ((s0, s1), 0.5, counts, None)
        }
        ChainId::FiniteType => {
            let k = a.k.unwrap_or(2);
            let kk = k as i32;
            let curve = FnGraph::new(1, "slice", move |t: &[f64]| t[0].powi(kk));
            let surf = SurfaceDescriptor::graph(Arc::new(curve), None, restriction_lab::surface::GraphMeasure::Chart, vec![-0.5], vec![0.5]);
            let counts = sufficient_counts(&surf, &[32], None, &[half, half])?;
            let f: Arc<dyn GraphFn> = Arc::new(FiniteTypeGraph::monomial(k, 2));
            ((-0.5, 0.5), 0.5, counts, Some(f))
        }
    };
    let s_count = a.s_count.unwrap_or(96);
    // one phase-table plan per transverse node
    let table_bytes = 16.0 * (s_count * y_dim * res) as f64 * slice_counts.iter().product::<usize>() as f64;
    if table_bytes > PLAN_BYTES_LIMIT {
        return Err(CliError::Schema(format!(
            "{slice_counts:?} slice nodes on {s_count} slices needs {:.1} GiB of phase tables; lower --box, --res or --s-count",
            table_bytes / 2f64.powi(30)
        )));
    }
    Ok(ChainSetup {
        chain,
        n,
        exponents,
        s_range,
        s_count,
        slice_half,
        slice_counts,
        y_box,
        z_axis,
        graph,
    })
}

/// Seeded smooth densities on the (ξ₁, ξ₂) square of the finite-type chain.
fn square_corpus(seed: u64, count: usize) -> Vec<(String, ConeDensity)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let parts: Vec<([f64; 2], f64, [f64; 2], Complex64)> = (0..rng.random_range(1..=3))
                .map(|_| {
                    let c = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
                    let m = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                    let amp = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
                    (c, rng.random_range(0.05..0.2), m, amp)
                })
                .collect();
            let u: ConeDensity = Arc::new(move |x: &[f64]| {
                parts
                    .iter()
                    .map(|(c, w, m, amp)| {
                        let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                        amp * (-r2 / (2.0 * w * w)).exp() * Complex64::from_polar(1.0, std::f64::consts::TAU * (m[0] * x[0] + m[1] * x[1]))
                    })
                    .sum()
            });
            (format!("bumps#{i}"), u)
        })
        .collect()
}

pub fn chain(a: &ChainArgs, seed: u64) -> Result<Output, CliError> {
    let lambda = a.lambda.unwrap_or(1.0);
    if !(lambda > 0.0) {
        return Err(CliError::Schema("lambda must be positive".into()));
    }
    let base = chain_setup(a)?;
    let setup = if base.chain == ChainId::FiniteType { base.clone() } else { base.rescaled(lambda) };
    let count = a.count.unwrap_or(20);
    let corpus = match base.chain {
        ChainId::Sphere => cone_corpus(seed, count, 0.5, 2.0),
        ChainId::Parab => cone_corpus(seed, count, 0.3, 1.5),
        ChainId::Hyperb => cone_corpus(seed, count, 0.4, 1.2),
        ChainId::FiniteType => square_corpus(seed, count),
    };
    let family = FamilySpec { seed, ..FamilySpec::default() };
    let slice = measure_slice_constant(&setup, &family)?;
    let runner = ChainRunner::new(&setup)?;
    let scale = if base.chain == ChainId::FiniteType { 1.0 } else { lambda };
    let reports: Vec<ChainReport> = corpus
        .par_iter()
        .map(|(label, u)| {
            let u = u.clone();
            let ul = move |x: &[f64]| u(&x.iter().map(|v| v / scale).collect::<Vec<_>>());
            runner.run(&ul, label, slice.best_ratio)
        })
        .collect::<Result<_, _>>()?;
    let links = LinkConstants::from_reports(&reports);
    let e = setup.exponents;
    let mode = if setup.chain != ChainId::FiniteType && scale_invariant(setup.n, e.pprime(), e.q) {
        Some(TransferMode::WholeCone)
    } else if setup.chain == ChainId::FiniteType || admissible_compact(setup.n, e.pprime(), e.q) {
        Some(TransferMode::Compact)
    } else {
        None
    };
    let transfer = match mode {
        Some(m) => Some(transfer_constant(&setup, slice.best_ratio, &links, m)?),
        None => None,
    };
    let mut csv = csv_row(["u", "link", "kind", "lhs", "rhs", "ratio", "bound", "violated"].map(String::from));
    let mut violated = Vec::new();
    let mut per_u = Vec::new();
    for r in &reports {
        for l in &r.links {
            csv.push_str(&csv_row([
                r.u_label.clone(),
                l.name.clone(),
                format!("{:?}", l.kind).to_lowercase(),
                l.lhs.to_string(),
                l.rhs.to_string(),
                l.ratio.to_string(),
                l.bound.map(|b| b.to_string()).unwrap_or_default(),
                l.violated.to_string(),
            ]));
            if l.violated {
                violated.push(json!({"u": r.u_label, "link": l.name, "lhs": l.lhs, "rhs": l.rhs, "ratio": l.ratio}));
            }
        }
        per_u.push(json!({
            "u": r.u_label,
            "trivial": r.trivial,
            "extension_ratio": r.extension_ratio,
            "links": r.links.iter().map(|l| (l.name.clone(), l.ratio)).collect::<BTreeMap<_, _>>(),
        }));
    }
    let best = reports.iter().map(|r| r.extension_ratio).fold(0.0f64, f64::max);
    let result = json!({
        "chain": setup.chain.name(),
        "n": setup.n,
        "p": e.p,
        "q": e.q,
        "pprime": e.pprime(),
        "qprime": e.qprime(),
        "lambda": lambda,
        "s_range": [setup.s_range.0, setup.s_range.1],
        "slice_counts": setup.slice_counts,
        "slice_constant": slice.best_ratio,
        "slice_best": slice.best_label,
        "link_constants": links,
        "transfer": transfer,
        "best_extension_ratio": best,
        "sandwich_holds": transfer.as_ref().map(|t| best <= t.value),
        "violations": violated,
        "densities": per_u,
    });
    if !violated.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} certified chain links violated\n{}",
            violated.len(),
            serde_json::to_string_pretty(&result).expect("serialises")
        )));
    }
    Ok(Output::new(result, csv))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct KnappArgs {
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub pprime: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated dilations, at least four
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub box_half: Option<f64>,
    #[arg(long)]
    pub box_res: Option<usize>,
    /// Chart nodes per axis; chosen from the aliasing rule when absent
    #[arg(long)]
    pub nodes: Option<usize>,
}

pub fn knapp(a: &KnappArgs) -> Result<Output, CliError> {
    let k = a.k.unwrap_or(2);
    let (pp, q, eps) = (a.pprime.unwrap_or(6.0), a.q.unwrap_or(2.0), a.eps.unwrap_or(1.0));
    let lambdas = a.lambdas.clone().unwrap_or_else(|| vec![4.0, 8.0, 16.0, 32.0]);
    let d = KnappGrid::default();
    let grid = KnappGrid { box_half: a.box_half.unwrap_or(d.box_half), box_res: a.box_res.unwrap_or(d.box_res), nodes: a.nodes };
    let f: Arc<dyn GraphFn> = Arc::new(FiniteTypeGraph::monomial(k, 2));
    let fit = KnappSweep::compute(f, k, eps, &lambdas, knapp_cap(), &grid)?.fit(pp, q)?;
    let mut csv = csv_row(["lambda", "lhs_norm", "ratio", "log_ratio"].map(String::from));
    for r in &fit.rows {
        csv.push_str(&csv_row([r.lambda, r.lhs_norm, r.ratio, r.log_ratio].map(|x| x.to_string())));
    }
    let result = json!({
        "k": k,
        "eps": eps,
        "pprime": pp,
        "q": q,
        "lambdas": lambdas,
        "predicted": fit.predicted,
        "fitted": fit.fitted,
        "intercept": fit.intercept,
        "slope_error": (fit.fitted - fit.predicted).abs(),
        "verdict": fit.verdict,
        "witness_eps": necessity_witness(k, pp, q),
    });
    Ok(Output::new(result, csv))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct OdeArgs {
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub t0: Option<f64>,
    /// φ(t₀)
    #[arg(long)]
    pub c: Option<f64>,
    /// φ′(t₀)
    #[arg(long)]
    pub d: Option<f64>,
    /// Run a seeded sweep of this many initial conditions instead
    #[arg(long)]
    pub sweep: Option<usize>,
}

fn ode_csv(reports: &[OdeReport]) -> String {
    let mut csv = csv_row(["k", "t0", "c", "d", "verdict", "t_star", "phi0", "accepted", "rejected"].map(String::from));
    for r in reports {
        let (verdict, t_star, phi0) = match r.verdict {
            OdeVerdict::BlowUp { t_star, .. } => ("blow_up", t_star.to_string(), String::new()),
            OdeVerdict::ReachesZero { phi0, .. } => ("reaches_zero", String::new(), phi0.to_string()),
            OdeVerdict::Falsifying { phi0, .. } => ("falsifying", String::new(), phi0.to_string()),
        };
        csv.push_str(&csv_row([
            r.k.to_string(),
            r.t0.to_string(),
            r.c.to_string(),
            r.d.to_string(),
            verdict.to_string(),
            t_star,
            phi0,
            r.accepted.to_string(),
            r.rejected.to_string(),
        ]));
    }
    csv
}

pub fn ode(a: &OdeArgs, seed: u64) -> Result<Output, CliError> {
    let k = a.k.unwrap_or(3);
    let reports = match a.sweep {
        Some(n) => ode_sweep(k, n, seed)?,
        None => vec![ode_no_nontrivial_solution(k, a.t0.unwrap_or(1.0), a.c.unwrap_or(1.0), a.d.unwrap_or(-1.0))?],
    };
    let falsifying = reports.iter().filter(|r| r.falsifying()).count();
    let result = json!({
        "k": k,
        "runs": reports.len(),
        "falsifying": falsifying,
        "blow_ups": reports.iter().filter(|r| matches!(r.verdict, OdeVerdict::BlowUp { .. })).count(),
        "reports": reports,
    });
    Ok(Output::new(result, ode_csv(&reports)))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct NormalFormArgs {
    /// monomialK or developable
    #[arg(long)]
    pub surface: Option<String>,
    /// Claimed type; defaults to the surface's own
    #[arg(long)]
    pub k: Option<u32>,
    /// Half-width of the test patch
    #[arg(long)]
    pub half: Option<f64>,
    /// Curve parameter of the tangent developable's base point
    #[arg(long)]
    pub v0: Option<f64>,
    #[arg(skip)]
    pub surface_spec: Option<SurfaceSpec>,
}

pub fn normalform(a: &NormalFormArgs) -> Result<Output, CliError> {
    let (f, k, half): (Arc<dyn GraphFn>, Option<u32>, f64) = match (a.surface.as_deref(), &a.surface_spec) {
        (Some("developable"), None) => (Arc::new(TangentDevelopable::new(a.v0.unwrap_or(1.0))?), Some(2), 0.1),
        (name, spec) => {
            let s = build_surface(Some(name.unwrap_or("monomial3")), Some(2), Some(0.5), spec)?;
            let g = s.graph.ok_or_else(|| CliError::Schema("normalform needs a graph surface".into()))?;
            (g.f, g.k, 0.5)
        }
    };
    let k = a.k.or(k).ok_or_else(|| CliError::Schema("normalform needs --k for this surface".into()))?;
    if f.dim() != 2 {
        return Err(CliError::Schema("normalform needs a graph over R²".into()));
    }
    let report = verify_normal_form(f.as_ref(), k, a.half.unwrap_or(half))?;
    let mut csv = csv_row(["check", "passed", "value", "detail"].map(String::from));
    for c in &report.checks {
        csv.push_str(&csv_row([c.name.clone(), c.passed.to_string(), c.value.to_string(), quote(&c.detail)]));
    }
    let lines = report.checks.iter().map(|c| format!("[{}] {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)).collect();
    Ok(Output { result: serde_json::to_value(&report).expect("serialises"), csv: Some(csv), lines, failed: false })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptanceArgs {
    /// Comma-separated criterion ids; all when absent
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u32>>,
}

pub fn acceptance(a: &AcceptanceArgs, seed: u64) -> Result<Output, CliError> {
    let cfg = AcceptanceConfig { seed };
    let (report, timings) = run_selected(&cfg, a.criteria.as_deref().unwrap_or(&[]))?;
    let mut csv = csv_row(["id", "name", "passed", "summary"].map(String::from));
    let mut lines = Vec::new();
    for c in &report.criteria {
        csv.push_str(&csv_row([c.id.to_string(), c.name.clone(), c.passed.to_string(), quote(&c.summary)]));
        let secs = timings.seconds.get(&c.id).copied().unwrap_or(0.0);
        lines.push(format!("{}  ({secs:.1}s)", c.line()));
    }
    Ok(Output {
        result: serde_json::to_value(&report).expect("serialises"),
        csv: Some(csv),
        lines,
        failed: !report.passed,
    })
}
