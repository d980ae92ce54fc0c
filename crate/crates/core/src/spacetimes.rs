//! Lorentzian constructions mapped onto [`assemble`].
//!
//! * standard static: `−f̄²dt² ⊕ (g1 ⊕ f²g2)` is assembled as
//!   `(m1 ×_f m2) ×_f̄ I` with `I` carrying `−dt²`. The time block is last
//!   internally and first in reports.
//! * generalized Robertson–Walker: `−dt² ⊕ a²(g1 ⊕ h²g2)` is assembled as
//!   `(I ×_a m1) ×_{a·h} m2`.
//!
//! In the concircular corollary for the latter, the scale factor `a` plays
//! the role of the corollary's `f` and the inner warping `h` that of its `f̄`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{concircular_check, BlockFieldSpec, ConcircularReport};
use crate::geometry::{Chart, Interval, VectorFieldSpec};
use crate::swp::{assemble, Block, Origin, Swp, Warping};

/// One-dimensional factor `(I, σ dt²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalChart {
    pub coord: String,
    pub interval: Interval,
    pub sign: f64,
}

impl IntervalChart {
    pub fn new(coord: impl Into<String>, interval: Interval, sign: f64) -> Result<IntervalChart> {
        let coord = coord.into();
        if !(interval.lo < interval.hi) {
            return Err(Error::InvalidChart { chart: "I".into(), reason: "empty interval".into() });
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(Error::InvalidChart { chart: "I".into(), reason: format!("sign must be +1 or -1, got {sign}") });
        }
        Ok(IntervalChart { coord, interval, sign })
    }

    /// Time axis `t` with metric `−dt²`.
    pub fn time(lo: f64, hi: f64) -> IntervalChart {
        IntervalChart { coord: "t".into(), interval: Interval::new(lo, hi), sign: -1.0 }
    }

    pub fn chart(&self) -> Result<Chart> {
        Chart::diagonal("I", vec![self.coord.clone()], vec![Expr::constant(self.sign)], vec![self.interval])
    }

    fn require_time(&self) -> Result<()> {
        if self.sign != -1.0 {
            return Err(Error::InvalidChart { chart: "I".into(), reason: "time axis needs sign -1".into() });
        }
        Ok(())
    }
}

/// `−f̄²dt² ⊕ (g1 ⊕ f²g2)`.
pub fn standard_static(i: &IntervalChart, m1: Chart, m2: Chart, f: Expr, fbar: Expr) -> Result<Swp> {
    i.require_time()?;
    let s = assemble(m1, m2, i.chart()?, Warping::Sequential { f, fbar })?;
    let n = s.total().dim();
    let presentation = std::iter::once(n - 1).chain(0..n - 1).collect();
    Ok(s.with_origin(Origin::StandardStatic, presentation))
}

/// `−dt² ⊕ a(t)²(g1 ⊕ h²g2)` with scale factor `a` over `t` and inner
/// warping `h` over `m1`.
pub fn grw(i: &IntervalChart, scale: Expr, m1: Chart, m2: Chart, inner: Expr) -> Result<Swp> {
    i.require_time()?;
    let fbar = scale.clone().mul(inner.clone());
    let s = assemble(i.chart()?, m1, m2, Warping::Sequential { f: scale.clone(), fbar })?;
    let n = s.total().dim();
    Ok(s.with_origin(Origin::Grw { scale, inner }, (0..n).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrwConcircularReport {
    pub samples: usize,
    /// `max |dh|` over samples.
    pub inner_gradient: f64,
    pub inner_constant: bool,
    /// `max |u̇ − u·(ln a)′|`.
    pub udot_mismatch: f64,
    pub hypotheses_hold: bool,
    pub concircular: ConcircularReport,
    /// `max |μ − u̇|`.
    pub mu_vs_udot: f64,
    /// Hypotheses hold, the field is concircular and `μ = u̇`.
    pub pass: bool,
    /// The corollary's implication is not contradicted.
    pub consistent: bool,
}

/// Check that `ζ = u∂t` is concircular with `μ = u̇` when `h` is constant and
/// `u̇ = u (ln a)′`. The concircular check runs even when the hypotheses
/// fail, so negative controls show up in the report.
pub fn grw_concircular_check(g: &Swp, u: &Expr, samples: &[Vec<f64>], tolerance: f64) -> Result<GrwConcircularReport> {
    let (scale, inner) = match g.origin() {
        Origin::Grw { scale, inner } => (scale, inner),
        _ => return Err(Error::Invalid("grw_concircular_check needs a product built by grw".into())),
    };
    let time = g.factor(Block::One);
    let m1 = g.factor(Block::Two);
    let zeta = BlockFieldSpec::single(g, Block::One, VectorFieldSpec::new(vec![u.clone()]))?;
    let mut inner_gradient = 0.0f64;
    let mut udot_mismatch = 0.0f64;
    let mut udot = Vec::with_capacity(samples.len());
    for p in samples {
        let t = g.project(p, Block::One);
        let hj = m1.jet(inner, g.project(p, Block::Two))?;
        inner_gradient = inner_gradient.max(hj.grad.iter().fold(0.0f64, |m, c| m.max(c.abs())));
        let uj = time.jet(u, t)?;
        let aj = time.jet(scale, t)?;
        udot_mismatch = udot_mismatch.max((uj.grad[0] - uj.value * aj.grad[0] / aj.value).abs());
        udot.push(uj.grad[0]);
    }
    let inner_constant = inner_gradient < tolerance;
    let hypotheses_hold = inner_constant && udot_mismatch < tolerance;
    let concircular = concircular_check(g, &zeta, samples, tolerance)?;
    let mu_vs_udot = concircular.mu.iter().zip(&udot).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let pass = hypotheses_hold && concircular.concircular && mu_vs_udot < tolerance;
    Ok(GrwConcircularReport {
        samples: samples.len(),
        inner_gradient,
        inner_constant,
        udot_mismatch,
        hypotheses_hold,
        concircular,
        mu_vs_udot,
        pass,
        consistent: !hypotheses_hold || pass,
    })
}
