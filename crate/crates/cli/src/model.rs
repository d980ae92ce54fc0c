//! Resolution of a parsed manifest into core objects.

use std::collections::BTreeMap;

use seqwarp_core::fields::BlockFieldSpec;
use seqwarp_core::spacetimes::{grw, standard_static, IntervalChart};
use seqwarp_core::swp::{Origin, Swp};
use seqwarp_core::{assemble, parse_expr, Block, Chart, Expr, Interval, VectorFieldSpec, Warping};

use crate::error::CliError;
use crate::manifest::{ChartSpec, ConstructionKind, ConstructionSpec, FieldSpec, Manifest, RunSpec};

pub struct Model {
    pub manifest: Manifest,
    pub swp: Swp,
    /// Chart name for each block, in block order.
    pub block_names: [String; 3],
    pub fields: BTreeMap<String, BlockFieldSpec>,
}

fn expr(src: &str, context: impl FnOnce() -> String) -> Result<Expr, CliError> {
    parse_expr(src).map_err(|e| CliError::Core { context: format!("{} `{src}`", context()), source: e.into() })
}

fn build_chart(spec: &ChartSpec) -> Result<Chart, CliError> {
    let name = &spec.name;
    let bounds: Vec<Interval> = spec.bounds.iter().map(|b| Interval::new(b[0], b[1])).collect();
    let core = CliError::core(format!("chart `{name}`"));
    match (&spec.metric, &spec.diagonal) {
        (Some(rows), None) => {
            let mut metric = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, s) in row.iter().enumerate() {
                    out.push(expr(s, || format!("chart `{name}` metric[{i}][{j}]"))?);
                }
                metric.push(out);
            }
            Chart::new(name.clone(), spec.coords.clone(), metric, bounds).map_err(core)
        }
        (None, Some(diag)) => {
            let mut out = Vec::with_capacity(diag.len());
            for (i, s) in diag.iter().enumerate() {
                out.push(expr(s, || format!("chart `{name}` diagonal[{i}]"))?);
            }
            Chart::diagonal(name.clone(), spec.coords.clone(), out, bounds).map_err(core)
        }
        _ => Err(CliError::Manifest(format!("chart `{name}`: give exactly one of `metric` or `diagonal`"))),
    }
}

fn warping(c: &ConstructionSpec, key: &str) -> Result<Expr, CliError> {
    let src = match key {
        "f" => &c.f,
        "fbar" => &c.fbar,
        "f1" => &c.f1,
        "f2" => &c.f2,
        "scale" => &c.scale,
        _ => &c.inner,
    };
    let src = src.as_deref().ok_or_else(|| {
        CliError::Manifest(format!("construction kind `{}` needs `{key}`", c.kind.name()))
    })?;
    expr(src, || format!("construction.{key}"))
}

fn time_chart(c: &ConstructionSpec) -> Result<IntervalChart, CliError> {
    let t = c.time.as_ref().ok_or_else(|| {
        CliError::Manifest(format!("construction kind `{}` needs a `time` table", c.kind.name()))
    })?;
    IntervalChart::new(t.coord.clone(), Interval::new(t.interval[0], t.interval[1]), t.sign)
        .map_err(CliError::core("construction.time"))
}

pub fn build(manifest: Manifest) -> Result<Model, CliError> {
    let mut charts: BTreeMap<String, Chart> = BTreeMap::new();
    for spec in &manifest.charts {
        if charts.contains_key(&spec.name) {
            return Err(CliError::Manifest(format!("chart `{}` declared twice", spec.name)));
        }
        charts.insert(spec.name.clone(), build_chart(spec)?);
    }
    let c = &manifest.construction;
    let spacetime = matches!(c.kind, ConstructionKind::StandardStatic | ConstructionKind::Grw);
    let want = if spacetime { 2 } else { 3 };
    if c.factors.len() != want {
        return Err(CliError::Manifest(format!(
            "construction kind `{}` takes {want} factors, got {}",
            c.kind.name(),
            c.factors.len()
        )));
    }
    let mut factors = Vec::with_capacity(3);
    for (k, name) in c.factors.iter().enumerate() {
        let chart = charts.get(name).ok_or_else(|| {
            let declared: Vec<&str> = charts.keys().map(String::as_str).collect();
            CliError::Manifest(format!(
                "construction.factors[{k}]: unknown chart \"{name}\" (declared charts: {})",
                if declared.is_empty() { "none".to_string() } else { declared.join(", ") }
            ))
        })?;
        factors.push(chart.clone());
    }
    if !spacetime && c.time.is_some() {
        return Err(CliError::Manifest(format!("construction kind `{}` takes no `time` table", c.kind.name())));
    }
    let core = CliError::core(format!("construction ({})", c.kind.name()));
    let (swp, block_names) = match c.kind {
        ConstructionKind::Sequential | ConstructionKind::Multiply | ConstructionKind::Iterated => {
            let [m1, m2, m3]: [Chart; 3] = factors.try_into().expect("three factors checked above");
            let w = match c.kind {
                ConstructionKind::Sequential => Warping::Sequential { f: warping(c, "f")?, fbar: warping(c, "fbar")? },
                ConstructionKind::Multiply => Warping::Multiply { f: warping(c, "f")?, fbar: warping(c, "fbar")? },
                _ => Warping::Iterated { f1: warping(c, "f1")?, f2: warping(c, "f2")? },
            };
            (assemble(m1, m2, m3, w).map_err(core)?, [0, 1, 2].map(|k| c.factors[k].clone()))
        }
        ConstructionKind::StandardStatic => {
            let i = time_chart(c)?;
            let [m1, m2]: [Chart; 2] = factors.try_into().expect("two factors checked above");
            let s = standard_static(&i, m1, m2, warping(c, "f")?, warping(c, "fbar")?).map_err(core)?;
            (s, [c.factors[0].clone(), c.factors[1].clone(), "I".to_string()])
        }
        ConstructionKind::Grw => {
            let i = time_chart(c)?;
            let [m1, m2]: [Chart; 2] = factors.try_into().expect("two factors checked above");
            let inner = match &c.inner {
                Some(_) => warping(c, "inner")?,
                None => Expr::one(),
            };
            let s = grw(&i, warping(c, "scale")?, m1, m2, inner).map_err(core)?;
            (s, ["I".to_string(), c.factors[0].clone(), c.factors[1].clone()])
        }
    };

    let mut fields = BTreeMap::new();
    for spec in &manifest.fields {
        if fields.contains_key(&spec.name) {
            return Err(CliError::Manifest(format!("field `{}` declared twice", spec.name)));
        }
        fields.insert(spec.name.clone(), build_field(&swp, &block_names, spec)?);
    }
    let model = Model { manifest, swp, block_names, fields };
    for (k, run) in model.manifest.runs.iter().enumerate() {
        model.validate_run(k, run)?;
    }
    Ok(model)
}

fn build_field(swp: &Swp, block_names: &[String; 3], spec: &FieldSpec) -> Result<BlockFieldSpec, CliError> {
    let name = &spec.name;
    let core = CliError::core(format!("field `{name}`"));
    let comps = |list: &[String], what: &str| -> Result<VectorFieldSpec, CliError> {
        let mut out = Vec::with_capacity(list.len());
        for (i, s) in list.iter().enumerate() {
            out.push(expr(s, || format!("field `{name}` {what}[{i}]"))?);
        }
        Ok(VectorFieldSpec::new(out))
    };
    match (&spec.blocks, &spec.total) {
        (Some(blocks), None) => {
            for key in blocks.keys() {
                if !block_names.contains(key) {
                    return Err(CliError::Manifest(format!(
                        "field `{name}`: unknown factor \"{key}\" (factors: {})",
                        block_names.join(", ")
                    )));
                }
            }
            let mut out = swp.dims().map(VectorFieldSpec::zero);
            for b in Block::ALL {
                if let Some(list) = blocks.get(&block_names[b.index()]) {
                    out[b.index()] = comps(list, &block_names[b.index()])?;
                }
            }
            BlockFieldSpec::lifted(swp, out).map_err(core)
        }
        (None, Some(total)) => {
            let v = comps(total, "total")?;
            if v.dim() != swp.total().dim() {
                return Err(CliError::Manifest(format!(
                    "field `{name}`: total has {} components, the product has dimension {}",
                    v.dim(),
                    swp.total().dim()
                )));
            }
            BlockFieldSpec::generic(swp, VectorFieldSpec::new(swp.unpresent(&v.components))).map_err(core)
        }
        _ => Err(CliError::Manifest(format!("field `{name}`: give exactly one of `blocks` or `total`"))),
    }
}

fn positive(v: Option<f64>, what: &str, ctx: &str) -> Result<(), CliError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(CliError::Manifest(format!("{ctx}: {what} must be > 0, got {x}"))),
        _ => Ok(()),
    }
}

impl Model {
    pub fn run_label(&self, k: usize) -> String {
        let run = &self.manifest.runs[k];
        match run.name() {
            Some(n) => format!("runs[{k}] ({} `{n}`)", run.command()),
            None => format!("runs[{k}] ({})", run.command()),
        }
    }

    pub fn field(&self, name: &str, ctx: &str) -> Result<&BlockFieldSpec, CliError> {
        self.fields.get(name).ok_or_else(|| {
            let declared: Vec<&str> = self.fields.keys().map(String::as_str).collect();
            CliError::Manifest(format!(
                "{ctx}: unknown field \"{name}\" (declared fields: {})",
                if declared.is_empty() { "none".to_string() } else { declared.join(", ") }
            ))
        })
    }

    /// Convert a point given in report order to internal order and check it
    /// lies in the box.
    pub fn point(&self, p: &[f64], ctx: &str) -> Result<Vec<f64>, CliError> {
        let total = self.swp.total();
        if p.len() != total.dim() {
            return Err(CliError::Manifest(format!(
                "{ctx}: expected {} coordinates ({}), got {}",
                total.dim(),
                self.swp.presented_coords().join(", "),
                p.len()
            )));
        }
        let q = self.swp.unpresent(p);
        total.check_point(&q).map_err(CliError::core(ctx.to_string()))?;
        Ok(q)
    }

    pub fn vector(&self, v: &[f64], ctx: &str) -> Result<Vec<f64>, CliError> {
        let n = self.swp.total().dim();
        if v.len() != n {
            return Err(CliError::Manifest(format!("{ctx}: expected {n} components, got {}", v.len())));
        }
        Ok(self.swp.unpresent(v))
    }

    pub fn curve(&self, comps: &[String], ctx: &str) -> Result<Vec<Expr>, CliError> {
        let n = self.swp.total().dim();
        if comps.len() != n {
            return Err(CliError::Manifest(format!("{ctx}: curve needs {n} expressions, got {}", comps.len())));
        }
        let mut out = Vec::with_capacity(n);
        for (i, s) in comps.iter().enumerate() {
            let e = expr(s, || format!("{ctx} curve[{i}]"))?;
            let foreign = e.foreign_variables(&["s".to_string()]);
            if !foreign.is_empty() {
                return Err(CliError::Manifest(format!(
                    "{ctx}: curve[{i}] may only use the parameter `s`, found {foreign:?}"
                )));
            }
            out.push(e);
        }
        Ok(self.swp.unpresent(&out))
    }

    fn validate_run(&self, k: usize, run: &RunSpec) -> Result<(), CliError> {
        let ctx = self.run_label(k);
        match run {
            RunSpec::Describe { .. } => {}
            RunSpec::Curvature { points, tolerance, .. } => {
                positive(*tolerance, "tolerance", &ctx)?;
                if points.is_empty() {
                    return Err(CliError::Manifest(format!("{ctx}: `points` is empty")));
                }
                for (i, p) in points.iter().enumerate() {
                    self.point(p, &format!("{ctx} points[{i}]"))?;
                }
            }
            RunSpec::VerifyTheorems { samples, tolerance, lambda, .. } => {
                positive(*tolerance, "tolerance", &ctx)?;
                positive(samples.map(|s| s as f64), "samples", &ctx)?;
                if let Some(crate::manifest::LambdaInput::Mode(m)) = lambda {
                    if m != "estimate" {
                        return Err(CliError::Manifest(format!(
                            "{ctx}: lambda must be a number or \"estimate\", got \"{m}\""
                        )));
                    }
                }
            }
            RunSpec::Geodesic { point, velocity, curve, t_start, t_end, dt, tolerance, conserved, .. } => {
                positive(*tolerance, "tolerance", &ctx)?;
                positive(*dt, "dt", &ctx)?;
                let t0 = t_start.unwrap_or(0.0);
                if let Some(t1) = t_end {
                    if *t1 <= t0 {
                        return Err(CliError::Manifest(format!("{ctx}: t_end must exceed t_start")));
                    }
                }
                match (point, velocity, curve) {
                    (Some(p), Some(v), None) => {
                        self.point(p, &format!("{ctx} point"))?;
                        self.vector(v, &format!("{ctx} velocity"))?;
                    }
                    (None, None, Some(c)) => {
                        self.curve(c, &ctx)?;
                    }
                    _ => {
                        return Err(CliError::Manifest(format!(
                            "{ctx}: give either `point` and `velocity` or a `curve`"
                        )))
                    }
                }
                for f in conserved {
                    self.field(f, &ctx)?;
                }
            }
            RunSpec::Killing { field, samples, tolerance, decomposition, conformal, .. } => {
                positive(*tolerance, "tolerance", &ctx)?;
                positive(samples.map(|s| s as f64), "samples", &ctx)?;
                let z = self.field(field, &ctx)?;
                if (*conformal || !decomposition.is_empty()) && !z.is_lifted() {
                    return Err(CliError::Manifest(format!(
                        "{ctx}: conformal factors and the decomposition need field `{field}` given per block"
                    )));
                }
                for (i, d) in decomposition.iter().enumerate() {
                    let c = format!("{ctx} decomposition[{i}]");
                    self.point(&d.point, &c)?;
                    self.vector(&d.x, &c)?;
                    self.vector(&d.y, &c)?;
                }
            }
            RunSpec::Concircular { field, samples, tolerance, .. } => {
                positive(*tolerance, "tolerance", &ctx)?;
                positive(samples.map(|s| s as f64), "samples", &ctx)?;
                self.field(field, &ctx)?;
            }
            RunSpec::SpacetimeSuite { u, samples, tolerance, .. } => {
                positive(*tolerance, "tolerance", &ctx)?;
                positive(samples.map(|s| s as f64), "samples", &ctx)?;
                if !matches!(self.swp.origin(), Origin::Grw { .. }) {
                    return Err(CliError::Manifest(format!("{ctx}: spacetime-suite needs construction kind `grw`")));
                }
                let e = expr(u, || format!("{ctx} u"))?;
                let time = self.swp.factor(Block::One).coords().to_vec();
                let foreign = e.foreign_variables(&time);
                if !foreign.is_empty() {
                    return Err(CliError::Manifest(format!("{ctx}: u may only depend on {time:?}, found {foreign:?}")));
                }
            }
        }
        Ok(())
    }
}
