//! Killing and conformal fields, the Lie-derivative decomposition and
//! conserved quantities along geodesics.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::geodesic::Trajectory;
use super::BlockFieldSpec;
use crate::error::{Error, Result};
use crate::geometry::{bilinear, dot, Chart, LocalGeometry, VectorFieldSpec};
use crate::swp::{Block, BlockVector, Swp};

/// Diagonal entries smaller than this are not used for normalisation.
const TINY_DIAGONAL: f64 = 1e-12;

/// `max_ij |L_ij| / sqrt(|g_ii g_jj|)`, entrywise.
fn normalized(l: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(l.nrows(), l.ncols(), |i, j| {
        let s = (g[(i, i)] * g[(j, j)]).abs().sqrt();
        if s > TINY_DIAGONAL {
            l[(i, j)].abs() / s
        } else {
            l[(i, j)].abs()
        }
    })
}

fn sup(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Normalised `|L_ζ g|` of a field on a single chart.
fn chart_lie_norm(chart: &Chart, field: &VectorFieldSpec, p: &[f64]) -> Result<DMatrix<f64>> {
    let g = LocalGeometry::new(chart, p)?;
    Ok(normalized(&g.lie_derivative_metric(field)?, &g.metric().g))
}

/// Sufficient conditions for `ζ = ζ1 + ζ2 + ζ3` to be Killing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingChecklist {
    /// Normalised `max |L^i_{ζi} g_i|` per factor.
    pub component_lie: [f64; 3],
    pub components_killing: [bool; 3],
    /// `max |ζ1(f)|`.
    pub zeta1_f: f64,
    /// `max |(ζ1 + ζ2)(f̄)|`.
    pub zeta12_fbar: f64,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingReport {
    pub samples: usize,
    /// Normalised `max |L_ζ ḡ|` over samples and entries.
    pub numeric_max: f64,
    /// Per-entry minimum and maximum of the normalised `|L_ζ ḡ|` over samples.
    pub per_component_min: Vec<Vec<f64>>,
    pub per_component_max: Vec<Vec<f64>>,
    pub numeric_pass: bool,
    /// Present for fields given per block.
    pub checklist: Option<KillingChecklist>,
    /// `false` only if the checklist holds but the numeric check fails.
    pub sufficiency_consistent: bool,
    pub tolerance: f64,
}

struct KillingSample {
    total: DMatrix<f64>,
    comps: [f64; 3],
    zeta1_f: f64,
    zeta12_fbar: f64,
}

fn block_derivative(
    swp: &Swp,
    blocks: &[VectorFieldSpec; 3],
    p: &[f64],
) -> Result<(f64, f64, [f64; 3])> {
    let z1 = blocks[0].eval(swp.factor(Block::One), swp.project(p, Block::One))?;
    let z2 = blocks[1].eval(swp.factor(Block::Two), swp.project(p, Block::Two))?;
    let fj = swp.factor(Block::One).jet(swp.f(), swp.project(p, Block::One))?;
    let fbj = swp.base().jet(swp.fbar(), swp.base_point(p))?;
    let z12: Vec<f64> = z1.iter().chain(&z2).copied().collect();
    let mut comps = [0.0; 3];
    for b in Block::ALL {
        comps[b.index()] = sup(&chart_lie_norm(swp.factor(b), &blocks[b.index()], swp.project(p, b))?);
    }
    Ok((dot(&fj.grad, &z1), dot(&fbj.grad, &z12), comps))
}

/// Numeric `L_ζ ḡ` on the total chart plus, for fields given per block, the
/// checklist: each `ζi` Killing on `Mi`, `ζ1(f) = 0`, `(ζ1 + ζ2)(f̄) = 0`.
pub fn killing_check(swp: &Swp, zeta: &BlockFieldSpec, samples: &[Vec<f64>], tolerance: f64) -> Result<KillingReport> {
    let total_field = zeta.total(swp)?;
    let lifted = zeta.component(Block::One).is_some();
    let data: Vec<KillingSample> = samples
        .par_iter()
        .map(|p| {
            let total = chart_lie_norm(swp.total(), &total_field, p)?;
            let (zeta1_f, zeta12_fbar, comps) = match zeta {
                BlockFieldSpec::Lifted(blocks) => block_derivative(swp, blocks, p)?,
                BlockFieldSpec::Generic(_) => (0.0, 0.0, [0.0; 3]),
            };
            Ok(KillingSample { total, comps, zeta1_f, zeta12_fbar })
        })
        .collect::<Result<_>>()?;
    let n = swp.total().dim();
    let mut lo = vec![vec![f64::INFINITY; n]; n];
    let mut hi = vec![vec![0.0f64; n]; n];
    for d in &data {
        for i in 0..n {
            for j in 0..n {
                lo[i][j] = lo[i][j].min(d.total[(i, j)]);
                hi[i][j] = hi[i][j].max(d.total[(i, j)]);
            }
        }
    }
    if data.is_empty() {
        lo = vec![vec![0.0; n]; n];
    }
    let numeric_max = hi.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
    let numeric_pass = numeric_max < tolerance;
    let checklist = lifted.then(|| {
        let mut component_lie = [0.0f64; 3];
        let (mut zeta1_f, mut zeta12_fbar) = (0.0f64, 0.0f64);
        for d in &data {
            for k in 0..3 {
                component_lie[k] = component_lie[k].max(d.comps[k]);
            }
            zeta1_f = zeta1_f.max(d.zeta1_f.abs());
            zeta12_fbar = zeta12_fbar.max(d.zeta12_fbar.abs());
        }
        let components_killing = component_lie.map(|c| c < tolerance);
        let all_hold =
            components_killing.iter().all(|&k| k) && zeta1_f < tolerance && zeta12_fbar < tolerance;
        KillingChecklist { component_lie, components_killing, zeta1_f, zeta12_fbar, all_hold }
    });
    let sufficiency_consistent = !checklist.as_ref().is_some_and(|c| c.all_hold) || numeric_pass;
    Ok(KillingReport {
        samples: samples.len(),
        numeric_max,
        per_component_min: lo,
        per_component_max: hi,
        numeric_pass,
        checklist,
        sufficiency_consistent,
        tolerance,
    })
}

/// Both sides of the five-term decomposition of `(L_ζ ḡ)(X, Y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieDecomposition {
    pub oracle: f64,
    /// `(L¹g1)(X1,Y1)`, `f²(L²g2)(X2,Y2)`, `f̄²(L³g3)(X3,Y3)`,
    /// `2fζ1(f)g2(X2,Y2)`, `2f̄(ζ1+ζ2)(f̄)g3(X3,Y3)`.
    pub terms: [f64; 5],
    pub decomposition: f64,
    pub residual: f64,
}

pub fn lie_decomposition_check(
    swp: &Swp,
    zeta: &BlockFieldSpec,
    x: &BlockVector,
    y: &BlockVector,
    p: &[f64],
) -> Result<LieDecomposition> {
    let blocks = zeta.require_lifted("the Lie-derivative decomposition")?;
    let dims = swp.dims();
    for v in [x, y] {
        for b in Block::ALL {
            if v.block(b).len() != dims[b.index()] {
                return Err(Error::Dimension { expected: dims[b.index()], got: v.block(b).len() });
            }
        }
    }
    let total = LocalGeometry::new(swp.total(), p)?;
    let oracle = bilinear(&total.lie_derivative_metric(&zeta.total(swp)?)?, &x.to_total(), &y.to_total());

    let mut lie = [0.0; 3];
    let mut metric = [0.0; 3];
    for b in Block::ALL {
        let g = LocalGeometry::new(swp.factor(b), swp.project(p, b))?;
        let l = g.lie_derivative_metric(&blocks[b.index()])?;
        lie[b.index()] = bilinear(&l, x.block(b), y.block(b));
        metric[b.index()] = g.inner(x.block(b), y.block(b));
    }
    let f = swp.factor(Block::One).eval(swp.f(), swp.project(p, Block::One))?;
    let fbar = swp.base().eval(swp.fbar(), swp.base_point(p))?;
    let (zeta1_f, zeta12_fbar, _) = block_derivative(swp, blocks, p)?;
    let terms = [
        lie[0],
        f * f * lie[1],
        fbar * fbar * lie[2],
        2.0 * f * zeta1_f * metric[1],
        2.0 * fbar * zeta12_fbar * metric[2],
    ];
    let decomposition: f64 = terms.iter().sum();
    Ok(LieDecomposition { oracle, terms, decomposition, residual: (oracle - decomposition).abs() })
}

/// Residuals of the per-factor consequences of `ζ` being Killing:
/// `ζ1` Killing, `ζ2` conformal with factor `−2ζ1(ln f)`, `ζ3` conformal with
/// factor `−2(ζ1 + ζ2)(ln f̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalReport {
    pub samples: usize,
    pub killing_precondition: bool,
    pub warning: Option<String>,
    /// Normalised `max |L^1_{ζ1} g1|`.
    pub zeta1_killing: f64,
    /// Normalised `max |L^2_{ζ2} g2 + 2ζ1(ln f) g2|`.
    pub zeta2_conformal: f64,
    /// Normalised `max |L^3_{ζ3} g3 + 2(ζ1+ζ2)(ln f̄) g3|`.
    pub zeta3_conformal: f64,
    /// Range of the factor `−2ζ1(ln f)` over samples.
    pub zeta2_factor_range: (f64, f64),
    pub zeta3_factor_range: (f64, f64),
    pub pass: bool,
    pub tolerance: f64,
}

pub fn conformal_factors(
    swp: &Swp,
    zeta: &BlockFieldSpec,
    samples: &[Vec<f64>],
    tolerance: f64,
) -> Result<ConformalReport> {
    let blocks = zeta.require_lifted("the conformal-factor check")?;
    let killing = killing_check(swp, zeta, samples, tolerance)?;
    let rows: Vec<[f64; 5]> = samples
        .par_iter()
        .map(|p| {
            let f = swp.factor(Block::One).eval(swp.f(), swp.project(p, Block::One))?;
            let fbar = swp.base().eval(swp.fbar(), swp.base_point(p))?;
            let (zeta1_f, zeta12_fbar, _) = block_derivative(swp, blocks, p)?;
            let sigma2 = -2.0 * zeta1_f / f;
            let sigma3 = -2.0 * zeta12_fbar / fbar;
            let resid = |b: Block, sigma: f64| -> Result<f64> {
                let g = LocalGeometry::new(swp.factor(b), swp.project(p, b))?;
                let l = g.lie_derivative_metric(&blocks[b.index()])?;
                let gm = &g.metric().g;
                Ok(sup(&normalized(&(l - gm * sigma), gm)))
            };
            Ok([resid(Block::One, 0.0)?, resid(Block::Two, sigma2)?, resid(Block::Three, sigma3)?, sigma2, sigma3])
        })
        .collect::<Result<_>>()?;
    let max = |k: usize| rows.iter().fold(0.0f64, |a, r| a.max(r[k]));
    let range = |k: usize| {
        rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[k]), hi.max(r[k])))
    };
    let (z1, z2, z3) = (max(0), max(1), max(2));
    let warning = (!killing.numeric_pass).then(|| {
        format!("field is not Killing (max |L g| = {:.3e}); factors reported anyway", killing.numeric_max)
    });
    Ok(ConformalReport {
        samples: samples.len(),
        killing_precondition: killing.numeric_pass,
        warning,
        zeta1_killing: z1,
        zeta2_conformal: z2,
        zeta3_conformal: z3,
        zeta2_factor_range: range(3),
        zeta3_factor_range: range(4),
        pass: z1 < tolerance && z2 < tolerance && z3 < tolerance,
        tolerance,
    })
}

/// `ḡ(ζ, α′)` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedReport {
    pub series: Vec<f64>,
    pub max_drift: f64,
}

pub fn conserved_along_geodesic(swp: &Swp, zeta: &BlockFieldSpec, traj: &Trajectory) -> Result<ConservedReport> {
    let field = zeta.total(swp)?;
    let series: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let g = LocalGeometry::new(swp.total(), &s.point)?;
            Ok(g.inner(&field.eval(swp.total(), &s.point)?, &s.velocity))
        })
        .collect::<Result<_>>()?;
    let s0 = series.first().copied().unwrap_or(0.0);
    let max_drift = series.iter().fold(0.0f64, |m, v| m.max((v - s0).abs()));
    Ok(ConservedReport { series, max_drift })
}
