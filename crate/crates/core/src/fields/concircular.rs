//! Concircular fields `∇_X ζ = μX`.

use rayon::prelude::*;
use serde::Serialize;

use super::{BlockFieldSpec, NONZERO};
use crate::error::Result;
use crate::geometry::{Chart, LocalGeometry, VectorFieldSpec};
use crate::swp::{Block, Swp};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcircularReport {
    pub chart: String,
    pub samples: usize,
    /// Least-squares `μ = tr(∇ζ) / n` per sample.
    pub mu: Vec<f64>,
    /// `max_{a,k} |(∇_{e_a} ζ)^k − μ δ^k_a|` per sample.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// Normalised `max |L_ζ g − 2μ g|` over samples.
    pub conformal_residual: f64,
    pub concircular: bool,
    pub tolerance: f64,
}

impl ConcircularReport {
    pub fn mu_range(&self) -> (f64, f64) {
        self.mu.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(*m), hi.max(*m)))
    }
}

fn sample(chart: &Chart, field: &VectorFieldSpec, p: &[f64]) -> Result<(f64, f64, f64)> {
    let g = LocalGeometry::new(chart, p)?;
    let n = chart.dim();
    let jac = g.covariant_jacobian(field)?;
    let mu = (0..n).map(|a| jac[a][a]).sum::<f64>() / n as f64;
    let mut res = 0.0f64;
    for (a, row) in jac.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let target = if a == k { mu } else { 0.0 };
            res = res.max((v - target).abs());
        }
    }
    let l = g.lie_derivative_metric(field)?;
    let gm = &g.metric().g;
    let mut conf = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let s = (gm[(i, i)] * gm[(j, j)]).abs().sqrt().max(1e-12);
            conf = conf.max((l[(i, j)] - 2.0 * mu * gm[(i, j)]).abs() / s);
        }
    }
    Ok((mu, res, conf))
}

/// Concircularity of `field` on a single chart, using the coordinate frame.
pub fn concircular_check_chart(
    chart: &Chart,
    field: &VectorFieldSpec,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConcircularReport> {
    field.validate(chart)?;
    let rows: Vec<(f64, f64, f64)> = samples.par_iter().map(|p| sample(chart, field, p)).collect::<Result<_>>()?;
    let max_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    let conformal_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.2));
    Ok(ConcircularReport {
        chart: chart.name().to_string(),
        samples: samples.len(),
        mu: rows.iter().map(|r| r.0).collect(),
        residual: rows.iter().map(|r| r.1).collect(),
        max_residual,
        conformal_residual,
        concircular: max_residual < tolerance,
        tolerance,
    })
}

/// Concircularity of `ζ` on the total chart.
pub fn concircular_check(
    swp: &Swp,
    zeta: &BlockFieldSpec,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConcircularReport> {
    concircular_check_chart(swp.total(), &zeta.total(swp)?, samples, tolerance)
}

/// Outcome of one sub-check of the concircular theorems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    /// Whether the hypotheses of this sub-check hold for the given field.
    pub applicable: bool,
    pub detail: String,
    /// `None` when not applicable.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcircularSuite {
    pub total: ConcircularReport,
    pub components: Vec<ConcircularReport>,
    /// `‖ζi‖ > 1e-8` at some sample.
    pub nonzero: [bool; 3],
    pub f_constant: bool,
    pub fbar_constant: bool,
    pub checks: Vec<SubCheck>,
    /// No applicable sub-check failed.
    pub pass: bool,
}

fn max_over<F: Fn(&[f64]) -> Result<f64> + Sync>(samples: &[Vec<f64>], f: F) -> Result<f64> {
    let v: Vec<f64> = samples.par_iter().map(|p| f(p)).collect::<Result<_>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// The component theorem, its obstruction and the base-field converse.
///
/// (i) with `f`, `f̄` constant and `ζ` concircular, every non-zero `ζi` is
/// concircular with the same `μ`; (ii) with a non-constant warping and every
/// `ζi` non-zero and concircular, `ζ` fails to be concircular; (iii) for
/// `ζ = ζ1` with `∇¹ζ1 = μ1 X` and `μ1 = ζ1(ln f) = ζ1(ln f̄)`, `ζ` is
/// concircular with `μ = μ1`.
pub fn concircular_suite(
    swp: &Swp,
    zeta: &BlockFieldSpec,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConcircularSuite> {
    let blocks = zeta.require_lifted("the concircular suite")?;
    let total = concircular_check(swp, zeta, samples, tolerance)?;
    let mut components = Vec::new();
    let mut nonzero = [false; 3];
    for b in Block::ALL {
        let chart = swp.factor(b);
        let pts: Vec<Vec<f64>> = samples.iter().map(|p| swp.project(p, b).to_vec()).collect();
        let field = &blocks[b.index()];
        components.push(concircular_check_chart(chart, field, &pts, tolerance)?);
        nonzero[b.index()] = max_over(&pts, |q| {
            let v = field.eval(chart, q)?;
            Ok(v.iter().fold(0.0f64, |m, c| m.max(c.abs())))
        })? > NONZERO;
    }
    let grad_sup = |chart: &Chart, e: &crate::expr::Expr, pts: Vec<Vec<f64>>| {
        max_over(&pts, |q| Ok(chart.jet(e, q)?.grad.iter().fold(0.0f64, |m, c| m.max(c.abs()))))
    };
    let m1: &Chart = swp.factor(Block::One);
    let f_constant = grad_sup(m1, swp.f(), samples.iter().map(|p| swp.project(p, Block::One).to_vec()).collect())?
        < tolerance;
    let fbar_constant =
        grad_sup(swp.base(), swp.fbar(), samples.iter().map(|p| swp.base_point(p).to_vec()).collect())? < tolerance;

    let mut checks = Vec::new();

    let (mu_lo, mu_hi) = total.mu_range();
    let applicable = f_constant && fbar_constant && total.concircular;
    let pass = applicable.then(|| {
        Block::ALL.iter().all(|b| {
            let c = &components[b.index()];
            !nonzero[b.index()]
                || (c.concircular && c.mu.iter().zip(&total.mu).all(|(a, m)| (a - m).abs() < tolerance))
        })
    });
    checks.push(SubCheck {
        name: "(i) constant warpings: components share mu".into(),
        applicable,
        detail: format!(
            "f constant: {f_constant}, fbar constant: {fbar_constant}, total concircular: {}, mu in [{mu_lo:.6e}, {mu_hi:.6e}]",
            total.concircular
        ),
        pass,
    });

    let all_components = (0..3).all(|k| nonzero[k] && components[k].concircular);
    let applicable = !(f_constant && fbar_constant) && all_components;
    checks.push(SubCheck {
        name: "(ii) non-constant warping obstructs concircular components".into(),
        applicable,
        detail: format!(
            "all components non-zero and concircular: {all_components}, total residual {:.6e}",
            total.max_residual
        ),
        pass: applicable.then_some(!total.concircular),
    });

    let base_only = !nonzero[1] && !nonzero[2] && nonzero[0];
    let c1 = &components[0];
    let mut mu_gap = f64::INFINITY;
    if base_only && c1.concircular {
        let rows: Vec<f64> = samples
            .par_iter()
            .zip(&c1.mu)
            .map(|(p, mu1)| {
                let q = swp.project(p, Block::One);
                let m1 = swp.factor(Block::One);
                let z1 = blocks[0].eval(m1, q)?;
                let fj = m1.jet(swp.f(), q)?;
                let fbj = swp.base().jet(swp.fbar(), swp.base_point(p))?;
                let lnf = crate::geometry::dot(&fj.grad, &z1) / fj.value;
                let lnfbar = crate::geometry::dot(&fbj.grad[..z1.len()], &z1) / fbj.value;
                Ok((mu1 - lnf).abs().max((mu1 - lnfbar).abs()))
            })
            .collect::<Result<_>>()?;
        mu_gap = rows.into_iter().fold(0.0, f64::max);
    }
    let applicable = base_only && c1.concircular && mu_gap < tolerance;
    let agree = c1.mu.iter().zip(&total.mu).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    checks.push(SubCheck {
        name: "(iii) base field with mu1 = zeta1(ln f) = zeta1(ln fbar)".into(),
        applicable,
        detail: format!(
            "zeta = zeta1 only: {base_only}, zeta1 concircular: {}, max |mu1 - zeta1(ln f)|, |mu1 - zeta1(ln fbar)|: {mu_gap:.6e}, total concircular: {}, max |mu - mu1|: {agree:.6e}",
            c1.concircular, total.concircular
        ),
        pass: applicable.then_some(total.concircular && agree < tolerance),
    });

    let pass = checks.iter().all(|c| c.pass != Some(false));
    Ok(ConcircularSuite { total, components, nonzero, f_constant, fbar_constant, checks, pass })
}
