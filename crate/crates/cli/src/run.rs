//! Execution of manifest runs and report assembly.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use seqwarp_core::fields::{
    concircular_check, concircular_suite, conformal_factors, conserved_along_geodesic, geodesic_condition_residuals,
    integrate_geodesic, killing_check, lie_decomposition_check, trajectory_csv, GeodesicState, Trajectory,
};
use seqwarp_core::geometry::LocalGeometry;
use seqwarp_core::spacetimes::grw_concircular_check;
use seqwarp_core::swp::{
    aux_scalars_at, cf_ricci, scalar_relation, verify_theorems, CrossTerm, FactorVector, FbarStarCoefficient,
    PointContext, Swp, VerifyConfig,
};
use seqwarp_core::{eval_jet2, parse_expr, Block, BlockVector};

use crate::error::CliError;
use crate::manifest::{parse_manifest, Expect, LambdaInput, RunSpec, COMMANDS};
use crate::model::{build, Model};

pub const AD_TOLERANCE: f64 = 1e-8;
pub const INTEGRATED_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub only: Option<String>,
    pub seed: Option<u64>,
    pub timestamp: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out: PathBuf::from("seqwarp-out"), only: None, seed: None, timestamp: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub index: usize,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub expect: Expect,
    /// Verdict of the check itself.
    pub pass: bool,
    /// Consistency conditions that must hold whatever the verdict.
    pub invariants_hold: bool,
    /// `pass` matches `expect` and the invariants hold.
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    pub result: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub manifest: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix_ms: Option<u128>,
    pub runs: Vec<RunReport>,
    pub pass: bool,
}

pub struct Outcome {
    pub report: Report,
    pub report_path: PathBuf,
    pub exit_code: i32,
}

pub fn load(path: &Path) -> Result<Model, CliError> {
    let src = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    build(parse_manifest(&src)?)
}

/// Everything a run produces besides its bookkeeping.
struct Produced {
    pass: bool,
    invariants_hold: bool,
    result: Value,
    files: Vec<(String, String)>,
}

fn block_of(swp: &Swp, i: usize) -> (Block, usize) {
    let b = Block::ALL.into_iter().find(|b| swp.range(*b).contains(&i)).expect("index inside the total chart");
    (b, i - swp.offset(b))
}

fn present_matrix(swp: &Swp, m: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    let order = swp.presentation_order();
    order.iter().map(|&i| order.iter().map(|&j| m(i, j)).collect()).collect()
}

fn file_stem(model: &Model, k: usize) -> String {
    let run = &model.manifest.runs[k];
    let base = run.name().map(str::to_string).unwrap_or_else(|| format!("run{k}"));
    let clean: String =
        base.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{}-{clean}", run.command())
}

#[derive(Serialize)]
struct BlockInfo {
    block: usize,
    chart: String,
    coords: Vec<String>,
    metric: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct Describe {
    kind: String,
    origin: String,
    dims: [usize; 3],
    total_dim: usize,
    coords: Vec<String>,
    blocks: Vec<BlockInfo>,
    f: String,
    fbar: String,
    /// Negative and positive metric eigenvalues at the box centre.
    signature: (usize, usize),
}

fn describe(model: &Model) -> Result<Produced, CliError> {
    let swp = &model.swp;
    let kind = model.manifest.construction.kind.name().to_string();
    let origin = match swp.origin() {
        seqwarp_core::swp::Origin::Assembled => "assembled",
        seqwarp_core::swp::Origin::StandardStatic => "standard_static",
        seqwarp_core::swp::Origin::Grw { .. } => "grw",
    };
    let blocks = Block::ALL
        .iter()
        .map(|&b| {
            let c = swp.factor(b);
            BlockInfo {
                block: b.number(),
                chart: model.block_names[b.index()].clone(),
                coords: c.coords().to_vec(),
                metric: c.metric_matrix().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect(),
            }
        })
        .collect();
    let centre: Vec<f64> = swp.total().bounds().iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
    let g = LocalGeometry::new(swp.total(), &centre).map_err(CliError::core("describe"))?;
    let eig = g.metric().g.clone().symmetric_eigen().eigenvalues;
    let neg = eig.iter().filter(|v| **v < 0.0).count();
    let d = Describe {
        kind,
        origin: origin.to_string(),
        dims: swp.dims(),
        total_dim: swp.total().dim(),
        coords: swp.presented_coords(),
        blocks,
        f: swp.f().to_string(),
        fbar: swp.fbar().to_string(),
        signature: (neg, eig.len() - neg),
    };
    Ok(Produced { pass: true, invariants_hold: true, result: serde_json::to_value(d)?, files: vec![] })
}

#[derive(Serialize)]
struct CurvaturePoint {
    point: Vec<f64>,
    scalar: f64,
    riemann_max_abs: f64,
    ricci_oracle: Vec<Vec<f64>>,
    ricci_closed_form: Vec<Vec<f64>>,
    ricci_rel_residual: f64,
    aux: seqwarp_core::swp::AuxScalars,
    scalar_relation: seqwarp_core::swp::ScalarRelation,
    pass: bool,
}

fn curvature(model: &Model, ctx: &str, points: &[Vec<f64>], tol: f64) -> Result<Produced, CliError> {
    let swp = &model.swp;
    let n = swp.total().dim();
    let mut out = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let c = format!("{ctx} points[{k}]");
        let q = model.point(p, &c)?;
        let core = |e| CliError::Core { context: c.clone(), source: e };
        let g = LocalGeometry::new(swp.total(), &q).map_err(core)?;
        let curv = g.curvature();
        let pc = PointContext::new(swp, &q).map_err(core)?;
        let mut cf = vec![vec![0.0; n]; n];
        for (i, row) in cf.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let (bi, li) = block_of(swp, i);
                let (bj, lj) = block_of(swp, j);
                let mut x = vec![0.0; swp.dims()[bi.index()]];
                x[li] = 1.0;
                let mut y = vec![0.0; swp.dims()[bj.index()]];
                y[lj] = 1.0;
                *slot = cf_ricci(
                    &pc,
                    &FactorVector::new(bi, x),
                    &FactorVector::new(bj, y),
                    FbarStarCoefficient::FiberDimension,
                    CrossTerm::BaseHessian,
                )
                .map_err(core)?;
            }
        }
        let oracle_sup = curv.ricci.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut abs = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                abs = abs.max((cf[i][j] - curv.ricci[(i, j)]).abs());
            }
        }
        let rel = abs / oracle_sup.max(1.0);
        let sr = scalar_relation(swp, &q).map_err(core)?;
        out.push(CurvaturePoint {
            point: p.clone(),
            scalar: curv.scalar,
            riemann_max_abs: curv.riemann.max_abs(),
            ricci_oracle: present_matrix(swp, |i, j| curv.ricci[(i, j)]),
            ricci_closed_form: present_matrix(swp, |i, j| cf[i][j]),
            ricci_rel_residual: rel,
            aux: aux_scalars_at(swp, &q, FbarStarCoefficient::FiberDimension).map_err(core)?,
            pass: rel < tol && sr.residual < tol * sr.total.abs().max(1.0),
            scalar_relation: sr,
        });
    }
    let pass = out.iter().all(|p| p.pass);
    Ok(Produced {
        pass,
        invariants_hold: true,
        result: serde_json::json!({ "tolerance": tol, "points": out }),
        files: vec![],
    })
}

#[derive(Serialize)]
struct ConservedEntry {
    field: String,
    numeric_killing: bool,
    initial: f64,
    max_drift: f64,
    conserved: bool,
}

#[derive(Serialize)]
struct GeodesicResult {
    mode: &'static str,
    dt: f64,
    t_start: f64,
    t_end: f64,
    steps: usize,
    exit_time: Option<f64>,
    initial_point: Vec<f64>,
    initial_velocity: Vec<f64>,
    final_point: Vec<f64>,
    speed2_initial: f64,
    speed2_drift: f64,
    max_block_residual: [f64; 3],
    max_total_residual: f64,
    block_condition: bool,
    total_condition: bool,
    equivalence_holds: bool,
    conserved: Vec<ConservedEntry>,
    tolerance: f64,
}

#[allow(clippy::too_many_arguments)]
fn geodesic(
    model: &Model,
    ctx: &str,
    start: Option<(&[f64], &[f64])>,
    curve: Option<&[String]>,
    t0: f64,
    t1: f64,
    dt: f64,
    tol: f64,
    conserved: &[String],
    seed: u64,
    stem: &str,
) -> Result<Produced, CliError> {
    let swp = &model.swp;
    let core = |e| CliError::Core { context: ctx.to_string(), source: e };
    let (traj, mode) = match (start, curve) {
        (Some((p, v)), _) => {
            let init = GeodesicState::new(t0, model.point(p, ctx)?, model.vector(v, ctx)?);
            (integrate_geodesic(swp, &init, t1, dt).map_err(core)?, "integrated")
        }
        (None, Some(c)) => {
            let exprs = model.curve(c, ctx)?;
            let steps = ((t1 - t0) / dt).round() as usize;
            let vars = ["s".to_string()];
            let mut states = Vec::with_capacity(steps + 1);
            for k in 0..=steps {
                let s = t0 + k as f64 * dt;
                let mut point = Vec::with_capacity(exprs.len());
                let mut velocity = Vec::with_capacity(exprs.len());
                for e in &exprs {
                    let j = eval_jet2(e, &[s], &vars).map_err(|e| core(e.into()))?;
                    point.push(j.value);
                    velocity.push(j.grad[0]);
                }
                swp.total().check_point(&point).map_err(core)?;
                states.push(GeodesicState::new(s, point, velocity));
            }
            (Trajectory::from_states(swp, dt, states).map_err(core)?, "prescribed")
        }
        (None, None) => unreachable!("validated when the manifest was loaded"),
    };
    let res = geodesic_condition_residuals(swp, &traj).map_err(core)?;
    let blocks = res.max_block();
    let total = res.max_total();
    let drift = traj.max_speed2_drift();
    let block_condition = blocks.iter().all(|r| *r < tol);
    let total_condition = total < tol;

    let samples = swp.samples(DEFAULT_SAMPLES, seed);
    let mut entries = Vec::new();
    for name in conserved {
        let z = model.field(name, ctx)?;
        let killing = killing_check(swp, z, &samples, AD_TOLERANCE).map_err(core)?;
        let c = conserved_along_geodesic(swp, z, &traj).map_err(core)?;
        entries.push(ConservedEntry {
            field: name.clone(),
            numeric_killing: killing.numeric_pass,
            initial: c.series.first().copied().unwrap_or(0.0),
            max_drift: c.max_drift,
            conserved: c.max_drift < tol,
        });
    }
    let first = traj.states.first().expect("trajectory has states");
    let last = traj.states.last().expect("trajectory has states");
    let equivalence_holds = block_condition == total_condition;
    let conserved_ok = entries.iter().all(|e| !e.numeric_killing || e.conserved);
    let r = GeodesicResult {
        mode,
        dt,
        t_start: first.time,
        t_end: last.time,
        steps: traj.len() - 1,
        exit_time: traj.exit_time,
        initial_point: swp.present(&first.point),
        initial_velocity: swp.present(&first.velocity),
        final_point: swp.present(&last.point),
        speed2_initial: traj.speed2[0],
        speed2_drift: drift,
        max_block_residual: blocks,
        max_total_residual: total,
        block_condition,
        total_condition,
        equivalence_holds,
        conserved: entries,
        tolerance: tol,
    };
    let csv = trajectory_csv(swp, &traj, &res);
    Ok(Produced {
        pass: drift < tol && block_condition && total_condition,
        invariants_hold: equivalence_holds && conserved_ok,
        result: serde_json::to_value(r)?,
        files: vec![(format!("{stem}.csv"), csv)],
    })
}

#[derive(Serialize)]
struct DecompositionEntry {
    point: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    oracle: f64,
    terms: [f64; 5],
    decomposition: f64,
    residual: f64,
    pass: bool,
}

fn killing(
    model: &Model,
    ctx: &str,
    field: &str,
    samples: &[Vec<f64>],
    tol: f64,
    conformal: bool,
    decomposition: &[crate::manifest::DecompositionSpec],
) -> Result<Produced, CliError> {
    let swp = &model.swp;
    let core = |e| CliError::Core { context: ctx.to_string(), source: e };
    let z = model.field(field, ctx)?;
    let report = killing_check(swp, z, samples, tol).map_err(core)?;
    let conf = if conformal { Some(conformal_factors(swp, z, samples, tol).map_err(core)?) } else { None };
    let mut decomp = Vec::new();
    for (i, d) in decomposition.iter().enumerate() {
        let c = format!("{ctx} decomposition[{i}]");
        let p = model.point(&d.point, &c)?;
        let x = BlockVector::from_total(swp.dims(), &model.vector(&d.x, &c)?).map_err(core)?;
        let y = BlockVector::from_total(swp.dims(), &model.vector(&d.y, &c)?).map_err(core)?;
        let r = lie_decomposition_check(swp, z, &x, &y, &p).map_err(core)?;
        decomp.push(DecompositionEntry {
            point: d.point.clone(),
            x: d.x.clone(),
            y: d.y.clone(),
            oracle: r.oracle,
            terms: r.terms,
            decomposition: r.decomposition,
            residual: r.residual,
            pass: r.residual < tol * r.oracle.abs().max(1.0),
        });
    }
    let conformal_ok = conf.as_ref().is_none_or(|c| !c.killing_precondition || c.pass);
    let invariants_hold = report.sufficiency_consistent && conformal_ok && decomp.iter().all(|d| d.pass);
    let per_component_max = present_matrix(swp, |i, j| report.per_component_max[i][j]);
    let per_component_min = present_matrix(swp, |i, j| report.per_component_min[i][j]);
    Ok(Produced {
        pass: report.numeric_pass,
        invariants_hold,
        result: serde_json::json!({
            "field": field,
            "samples": report.samples,
            "numeric_max": report.numeric_max,
            "numeric_pass": report.numeric_pass,
            "per_component_min": per_component_min,
            "per_component_max": per_component_max,
            "checklist": report.checklist,
            "sufficiency_consistent": report.sufficiency_consistent,
            "conformal": conf,
            "decomposition": decomp,
            "tolerance": tol,
        }),
        files: vec![],
    })
}

fn concircular(model: &Model, ctx: &str, field: &str, samples: &[Vec<f64>], tol: f64) -> Result<Produced, CliError> {
    let swp = &model.swp;
    let core = |e| CliError::Core { context: ctx.to_string(), source: e };
    let z = model.field(field, ctx)?;
    let (total, suite) = if z.is_lifted() {
        let s = concircular_suite(swp, z, samples, tol).map_err(core)?;
        (s.total.clone(), Some(s))
    } else {
        (concircular_check(swp, z, samples, tol).map_err(core)?, None)
    };
    let conformal_ok = !total.concircular || total.conformal_residual < tol;
    let invariants_hold = conformal_ok && suite.as_ref().is_none_or(|s| s.pass);
    let (mu_min, mu_max) = total.mu_range();
    Ok(Produced {
        pass: total.concircular,
        invariants_hold,
        result: serde_json::json!({
            "field": field,
            "mu_min": mu_min,
            "mu_max": mu_max,
            "total": total,
            "suite": suite.map(|s| serde_json::json!({
                "components": s.components.iter().map(|c| serde_json::json!({
                    "chart": c.chart,
                    "concircular": c.concircular,
                    "max_residual": c.max_residual,
                    "mu_range": c.mu_range(),
                })).collect::<Vec<_>>(),
                "nonzero": s.nonzero,
                "f_constant": s.f_constant,
                "fbar_constant": s.fbar_constant,
                "checks": s.checks,
                "pass": s.pass,
            })),
        }),
        files: vec![],
    })
}

fn execute(model: &Model, k: usize, seed: u64) -> Result<Produced, CliError> {
    let ctx = model.run_label(k);
    let swp = &model.swp;
    let core = |e| CliError::Core { context: ctx.clone(), source: e };
    match &model.manifest.runs[k] {
        RunSpec::Describe { .. } => describe(model),
        RunSpec::Curvature { points, tolerance, .. } => {
            curvature(model, &ctx, points, tolerance.unwrap_or(AD_TOLERANCE))
        }
        RunSpec::VerifyTheorems { samples, seed: s, tolerance, lambda, .. } => {
            let cfg = VerifyConfig {
                samples: samples.unwrap_or(DEFAULT_SAMPLES),
                seed: s.unwrap_or(seed),
                tolerance: tolerance.unwrap_or(AD_TOLERANCE),
                lambda: match lambda {
                    Some(LambdaInput::Value(v)) => Some(*v),
                    _ => None,
                },
            };
            let suite = verify_theorems(swp, &cfg).map_err(core)?;
            let lines: Vec<String> = suite.adjudications.iter().map(|a| format!("{}: {}", a.subject, a.verdict)).collect();
            Ok(Produced {
                pass: suite.pass,
                invariants_hold: true,
                result: serde_json::json!({
                    "samples": cfg.samples,
                    "seed": cfg.seed,
                    "tolerance": cfg.tolerance,
                    "adjudication_lines": lines,
                    "suite": suite,
                }),
                files: vec![],
            })
        }
        RunSpec::Geodesic { point, velocity, curve, t_start, t_end, dt, tolerance, conserved, .. } => {
            let t0 = t_start.unwrap_or(0.0);
            let start = match (point, velocity) {
                (Some(p), Some(v)) => Some((p.as_slice(), v.as_slice())),
                _ => None,
            };
            geodesic(
                model,
                &ctx,
                start,
                curve.as_deref(),
                t0,
                t_end.unwrap_or(t0 + 1.0),
                dt.unwrap_or(DEFAULT_DT),
                tolerance.unwrap_or(INTEGRATED_TOLERANCE),
                conserved,
                seed,
                &file_stem(model, k),
            )
        }
        RunSpec::Killing { field, samples, seed: s, tolerance, conformal, decomposition, .. } => {
            let pts = swp.samples(samples.unwrap_or(DEFAULT_SAMPLES), s.unwrap_or(seed));
            killing(model, &ctx, field, &pts, tolerance.unwrap_or(AD_TOLERANCE), *conformal, decomposition)
        }
        RunSpec::Concircular { field, samples, seed: s, tolerance, .. } => {
            let pts = swp.samples(samples.unwrap_or(DEFAULT_SAMPLES), s.unwrap_or(seed));
            concircular(model, &ctx, field, &pts, tolerance.unwrap_or(AD_TOLERANCE))
        }
        RunSpec::SpacetimeSuite { u, samples, seed: s, tolerance, .. } => {
            let pts = swp.samples(samples.unwrap_or(DEFAULT_SAMPLES), s.unwrap_or(seed));
            let u = parse_expr(u).map_err(|e| core(e.into()))?;
            let r = grw_concircular_check(swp, &u, &pts, tolerance.unwrap_or(AD_TOLERANCE)).map_err(core)?;
            let (mu_min, mu_max) = r.concircular.mu_range();
            Ok(Produced {
                pass: r.pass,
                invariants_hold: r.consistent,
                result: serde_json::json!({ "mu_min": mu_min, "mu_max": mu_max, "report": r }),
                files: vec![],
            })
        }
    }
}

/// Execute the selected runs, write `report.json` and any CSVs into
/// `opts.out`, and return the exit code (0 all ok, 1 some run not ok).
pub fn run_manifest(path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    if let Some(only) = &opts.only {
        if !COMMANDS.contains(&only.as_str()) {
            return Err(CliError::Manifest(format!(
                "--only: unknown command \"{only}\" (commands: {})",
                COMMANDS.join(", ")
            )));
        }
    }
    let model = load(path)?;
    let seed = opts.seed.unwrap_or(model.manifest.seed);
    let mut runs = Vec::new();
    let mut files: Vec<(String, String)> = Vec::new();
    for (k, spec) in model.manifest.runs.iter().enumerate() {
        if opts.only.as_deref().is_some_and(|o| o != spec.command()) {
            continue;
        }
        let started = Instant::now();
        let produced = execute(&model, k, seed)?;
        let elapsed = started.elapsed().as_secs_f64() * 1e3;
        let expect = spec.expect();
        let ok = (produced.pass == (expect == Expect::Pass)) && produced.invariants_hold;
        runs.push(RunReport {
            index: k,
            command: spec.command(),
            name: spec.name().map(str::to_string),
            expect,
            pass: produced.pass,
            invariants_hold: produced.invariants_hold,
            ok,
            wall_time_ms: opts.timestamp.then_some(elapsed),
            files: produced.files.iter().map(|f| f.0.clone()).collect(),
            result: produced.result,
        });
        files.extend(produced.files);
    }
    let pass = runs.iter().all(|r| r.ok);
    let report = Report {
        tool: "seqwarp",
        version: env!("CARGO_PKG_VERSION"),
        manifest: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        seed,
        generated_unix_ms: opts
            .timestamp
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)),
        runs,
        pass,
    };

    let io = |p: &Path| {
        let path = p.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(&opts.out).map_err(io(&opts.out))?;
    for (name, body) in &files {
        let p = opts.out.join(name);
        std::fs::write(&p, body).map_err(io(&p))?;
    }
    let report_path = opts.out.join("report.json");
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(&report_path, json).map_err(io(&report_path))?;
    Ok(Outcome { exit_code: if pass { 0 } else { 1 }, report, report_path })
}
