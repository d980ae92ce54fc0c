//! Block conditions for `Ric̄ = λḡ`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::closed_form::{FbarStarCoefficient, PointContext};
use super::{Block, Swp};
use crate::error::{Error, Result};
use crate::geometry::LocalGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum LambdaSpec {
    Given(f64),
    /// Mean of `Ric̄_ii / ḡ_ii` over all samples and diagonal entries.
    Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResidual {
    pub condition: u8,
    pub description: String,
    pub max_residual: f64,
    pub pass: bool,
}

/// Residual of the `μ` formula for one `f̄*` coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCandidate {
    pub coefficient: FbarStarCoefficient,
    pub label: String,
    pub value: f64,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinReport {
    pub lambda: f64,
    pub lambda_spec: LambdaSpec,
    /// Variance of the diagonal ratios `Ric̄_ii / ḡ_ii`; zero for an Einstein metric.
    pub lambda_variance: f64,
    /// Fitted Einstein constant of M3.
    pub mu: f64,
    pub samples: usize,
    /// Conditions 1 to 3 and condition 4 evaluated with the `(n3 − 1)` coefficient.
    pub conditions: Vec<ConditionResidual>,
    pub candidates: Vec<CoefficientCandidate>,
    /// Candidates that pass condition 4.
    pub winners: Vec<String>,
    pub adjudication: String,
    /// `max |(n3/f̄) H^f̄(X1, Y2)|`: the mixed Ricci term, which the four
    /// conditions do not constrain.
    pub mixed_residual: f64,
    pub mixed_pass: bool,
    /// `max |Ric̄ − λḡ|` on the total chart.
    pub total_residual: f64,
    pub total_pass: bool,
    pub conditions_pass: bool,
    /// The conditions and the mixed term pass exactly when the total
    /// residual passes.
    pub consistent: bool,
    pub tolerance: f64,
}

struct SampleData {
    ric_total: DMatrix<f64>,
    g_total: DMatrix<f64>,
    ric: [DMatrix<f64>; 3],
    g: [DMatrix<f64>; 3],
    f: f64,
    fstar: f64,
    hess_f: DMatrix<f64>,
    fbar: f64,
    lap_fbar: f64,
    gradnorm2_fbar: f64,
    hess_fbar: DMatrix<f64>,
}

fn sample_data(swp: &Swp, p: &[f64]) -> Result<SampleData> {
    let ctx = PointContext::new(swp, p)?;
    let total = LocalGeometry::new(swp.total(), p)?;
    let n2 = swp.dims()[1] as f64;
    let f = ctx.f();
    let fb = ctx.fbar();
    Ok(SampleData {
        ric_total: total.curvature().ricci,
        g_total: total.metric().g.clone(),
        ric: Block::ALL.map(|b| ctx.factor(b).curvature().ricci),
        g: Block::ALL.map(|b| ctx.factor(b).metric().g.clone()),
        f: f.value,
        fstar: f.lap / f.value + (n2 - 1.0) * f.gradnorm2 / (f.value * f.value),
        hess_f: f.hess.clone(),
        fbar: fb.value,
        lap_fbar: fb.lap,
        gradnorm2_fbar: fb.gradnorm2,
        hess_fbar: fb.hess.clone(),
    })
}

fn sup(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Check the Einstein conditions at `samples`.
///
/// Residuals are absolute. `μ` is fitted once from all samples as the mean of
/// `Ric³_ii / g3_ii`.
pub fn einstein_check(swp: &Swp, lambda: LambdaSpec, samples: &[Vec<f64>], tolerance: f64) -> Result<EinsteinReport> {
    if samples.is_empty() {
        return Err(Error::Invalid("einstein check needs at least one sample".into()));
    }
    let data: Vec<SampleData> = samples.par_iter().map(|p| sample_data(swp, p)).collect::<Result<_>>()?;
    let [n1, n2, n3] = swp.dims();

    let ratios: Vec<f64> = data
        .iter()
        .flat_map(|d| (0..d.g_total.nrows()).map(move |i| d.ric_total[(i, i)] / d.g_total[(i, i)]))
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lambda_variance = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
    let lam = match lambda {
        LambdaSpec::Given(l) => l,
        LambdaSpec::Estimate => mean,
    };

    let mu_ratios: Vec<f64> = data.iter().flat_map(|d| (0..n3).map(move |i| d.ric[2][(i, i)] / d.g[2][(i, i)])).collect();
    let mu = mu_ratios.iter().sum::<f64>() / mu_ratios.len() as f64;

    let base_block = |h: &DMatrix<f64>, b: Block| {
        let o = if b == Block::One { 0 } else { n1 };
        let n = if b == Block::One { n1 } else { n2 };
        h.view((o, o), (n, n)).into_owned()
    };

    let mut c1 = 0.0f64;
    let mut c2 = 0.0f64;
    let mut c3 = 0.0f64;
    let mut total_residual = 0.0f64;
    let mut mixed_residual = 0.0f64;
    let mut cand = [0.0f64; 3];
    for d in &data {
        let h11 = base_block(&d.hess_fbar, Block::One);
        let h22 = base_block(&d.hess_fbar, Block::Two);
        let r1 = &d.ric[0] - &d.g[0] * lam - &d.hess_f * (n2 as f64 / d.f) - h11 * (n3 as f64 / d.fbar);
        c1 = c1.max(sup(&r1));
        let omega = d.f * d.f * (lam + d.fstar);
        let r2 = &d.ric[1] - &d.g[1] * omega - h22 * (n3 as f64 / d.fbar);
        c2 = c2.max(sup(&r2));
        c3 = c3.max(sup(&(&d.ric[2] - &d.g[2] * mu)));
        let h12 = d.hess_fbar.view((0, n1), (n1, n2)).into_owned();
        mixed_residual = mixed_residual.max(sup(&h12) * n3 as f64 / d.fbar);
        for (k, c) in FbarStarCoefficient::ALL.iter().enumerate() {
            let fbarstar = d.lap_fbar / d.fbar + c.value([n1, n2, n3]) * d.gradnorm2_fbar / (d.fbar * d.fbar);
            cand[k] = cand[k].max((mu - d.fbar * d.fbar * (lam + fbarstar)).abs());
        }
        total_residual = total_residual.max(sup(&(&d.ric_total - &d.g_total * lam)));
    }

    let candidates: Vec<CoefficientCandidate> = FbarStarCoefficient::ALL
        .iter()
        .zip(cand)
        .map(|(&c, r)| CoefficientCandidate {
            coefficient: c,
            label: c.label().to_string(),
            value: c.value([n1, n2, n3]),
            max_residual: r,
            pass: r < tolerance,
        })
        .collect();
    let winners: Vec<String> = candidates.iter().filter(|c| c.pass).map(|c| c.label.clone()).collect();
    let adjudication = match winners.len() {
        0 => "no coefficient satisfies the mu condition at these samples".to_string(),
        3 => "all coefficients satisfy the mu condition here (not distinguishing)".to_string(),
        _ => format!("mu condition satisfied by {}", winners.join(", ")),
    };
    let c4 = cand[2];
    let conditions: Vec<ConditionResidual> = [
        (1, "Ric1 = lambda g1 + (n2/f) H1f + (n3/fbar) Hfbar", c1),
        (2, "Ric2 = omega g2 + (n3/fbar) Hfbar", c2),
        (3, "Ric3 = mu g3", c3),
        (4, "mu = fbar^2 (lambda + fbar*) with (n3-1)", c4),
    ]
    .into_iter()
    .map(|(condition, d, r)| ConditionResidual {
        condition,
        description: d.to_string(),
        max_residual: r,
        pass: r < tolerance,
    })
    .collect();
    let conditions_pass = conditions.iter().all(|c| c.pass);
    let total_pass = total_residual < tolerance;
    let mixed_pass = mixed_residual < tolerance;
    Ok(EinsteinReport {
        lambda: lam,
        lambda_spec: lambda,
        lambda_variance,
        mu,
        samples: samples.len(),
        conditions,
        candidates,
        winners,
        adjudication,
        mixed_residual,
        mixed_pass,
        total_residual,
        total_pass,
        conditions_pass,
        consistent: (conditions_pass && mixed_pass) == total_pass,
        tolerance,
    })
}
