//! Closed-form connection, curvature and Ricci formulas of a sequential
//! warped product, expressed through factor-level quantities only.
//!
//! Curvature closed forms are written for the operator convention
//! `R(X,Y) = ∇_[X,Y] − [∇_X, ∇_Y]`. The oracle in [`crate::geometry`] uses the
//! opposite sign, so component curvatures `R^i` are negated on the way in and
//! [`super::compare_oracle`] records the resulting global flip.

use serde::Serialize;

use super::{Block, BlockVector, FactorVector, LiftedField, Swp};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{LocalGeometry, ScalarCalculus};

/// Fibre bracket in the curvature of the warped fibres (cases 2 and 9).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bracket {
    /// `g(X,Y)Y − g(Z,Y)X`, the literal reading.
    AsWritten,
    /// `g(X,Z)Y − g(Y,Z)X`.
    Corrected,
}

impl Bracket {
    pub fn label(self) -> &'static str {
        match self {
            Bracket::AsWritten => "as-written g(X,Y)Y - g(Z,Y)X",
            Bracket::Corrected => "corrected g(X,Z)Y - g(Y,Z)X",
        }
    }

    fn apply(self, g: &LocalGeometry<'_>, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let (a, ua, b, ub) = match self {
            Bracket::AsWritten => (g.inner(x, y), y, g.inner(z, y), x),
            Bracket::Corrected => (g.inner(x, z), y, g.inner(y, z), x),
        };
        ua.iter().zip(ub).map(|(p, q)| a * p - b * q).collect()
    }
}

/// Coefficient of `‖grad f̄‖²/f̄²` in `f̄*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FbarStarCoefficient {
    /// `n1 + n2 − 1`, the literal Ricci coefficient.
    TheoremLiteral,
    /// `n2 − 1`, the literal coefficient in the Einstein condition for `μ`.
    CorollaryLiteral,
    /// `n3 − 1`, the fibre dimension minus one.
    FiberDimension,
}

impl FbarStarCoefficient {
    pub const ALL: [FbarStarCoefficient; 3] =
        [FbarStarCoefficient::TheoremLiteral, FbarStarCoefficient::CorollaryLiteral, FbarStarCoefficient::FiberDimension];

    pub fn value(self, dims: [usize; 3]) -> f64 {
        let [n1, n2, n3] = dims.map(|d| d as f64);
        match self {
            FbarStarCoefficient::TheoremLiteral => n1 + n2 - 1.0,
            FbarStarCoefficient::CorollaryLiteral => n2 - 1.0,
            FbarStarCoefficient::FiberDimension => n3 - 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FbarStarCoefficient::TheoremLiteral => "(n1+n2-1)",
            FbarStarCoefficient::CorollaryLiteral => "(n2-1)",
            FbarStarCoefficient::FiberDimension => "(n3-1)",
        }
    }
}

/// Mixed Ricci term `Ric̄(Xi, Yj)`, `i ≠ j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossTerm {
    /// Zero for every pair of distinct blocks.
    AsWritten,
    /// `−(n3/f̄) H^f̄(X, Y)` for one vector from M1 and one from M2, zero for
    /// pairs involving M3.
    BaseHessian,
}

impl CrossTerm {
    pub fn label(self) -> &'static str {
        match self {
            CrossTerm::AsWritten => "as-written 0",
            CrossTerm::BaseHessian => "-(n3/fbar) Hfbar(X1,Y2)",
        }
    }
}

/// Factor, base and warping-function data at one total point.
pub struct PointContext<'s> {
    swp: &'s Swp,
    point: Vec<f64>,
    factors: [LocalGeometry<'s>; 3],
    base: LocalGeometry<'s>,
    /// `f` on M1.
    f: ScalarCalculus,
    /// `f̄` on the base `M1 ×_f M2`.
    fbar: ScalarCalculus,
}

impl<'s> PointContext<'s> {
    pub fn new(swp: &'s Swp, p: &[f64]) -> Result<PointContext<'s>> {
        swp.total().check_point(p)?;
        let factors = [
            LocalGeometry::new(swp.factor(Block::One), swp.project(p, Block::One))?,
            LocalGeometry::new(swp.factor(Block::Two), swp.project(p, Block::Two))?,
            LocalGeometry::new(swp.factor(Block::Three), swp.project(p, Block::Three))?,
        ];
        let base = LocalGeometry::new(swp.base(), swp.base_point(p))?;
        let f = factors[0].scalar_calculus(swp.f())?;
        let fbar = base.scalar_calculus(swp.fbar())?;
        for (which, value) in [("f", f.value), ("fbar", fbar.value)] {
            if !(value > 0.0) {
                return Err(Error::WarpingNotPositive { which: which.into(), point: p.to_vec(), value });
            }
        }
        Ok(PointContext { swp, point: p.to_vec(), factors, base, f, fbar })
    }

    pub fn swp(&self) -> &Swp {
        self.swp
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn factor(&self, b: Block) -> &LocalGeometry<'s> {
        &self.factors[b.index()]
    }

    pub fn base(&self) -> &LocalGeometry<'s> {
        &self.base
    }

    pub fn f(&self) -> &ScalarCalculus {
        &self.f
    }

    pub fn fbar(&self) -> &ScalarCalculus {
        &self.fbar
    }

    fn dims(&self) -> [usize; 3] {
        self.swp.dims()
    }

    fn base_vec(&self, v: &FactorVector) -> Result<Vec<f64>> {
        self.swp.embed_base(v.block, &v.v)
    }

    fn check_len(&self, v: &FactorVector) -> Result<()> {
        let n = self.dims()[v.block.index()];
        if v.v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.v.len() });
        }
        Ok(())
    }

    /// `∇¹_X grad¹f` for `X` in M1, via `g1⁻¹ H¹f X`.
    fn nabla_grad_f(&self, x: &[f64]) -> Vec<f64> {
        let hx = crate::geometry::mat_vec(&self.f.hess, x);
        self.factors[0].raise(&hx)
    }

    /// `∇_X grad f̄` on the base for `X` in M1 ⊕ M2.
    fn nabla_grad_fbar(&self, x: &[f64]) -> Vec<f64> {
        let hx = crate::geometry::mat_vec(&self.fbar.hess, x);
        self.base.raise(&hx)
    }

    /// Component curvature `R^i(X,Y)Z` in the closed-form convention.
    fn factor_curvature(&self, b: Block, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        self.factors[b.index()].curvature().riemann.apply(x, y, z).into_iter().map(|v| -v).collect()
    }
}

/// Connection case for a `(direction, field)` block pair.
pub fn connection_case(dir: Block, field: Block) -> u8 {
    use Block::*;
    match (dir, field) {
        (One, One) => 1,
        (One, Two) | (Two, One) => 2,
        (Two, Two) => 3,
        (One, Three) | (Three, One) => 4,
        (Two, Three) | (Three, Two) => 5,
        (Three, Three) => 6,
    }
}

/// Curvature case for `R(X, Y)Z` with the given blocks, if the triple is one
/// of the nine listed forms.
pub fn riemann_case(x: Block, y: Block, z: Block) -> Option<u8> {
    use Block::*;
    Some(match (x, y, z) {
        (One, One, One) => 1,
        (Two, Two, Two) => 2,
        (One, Two, One) => 3,
        (One, Two, Two) => 4,
        (One, Two, Three) => 5,
        (a, b, c) if a == b && a != c => 6,
        (One | Two, Three, One | Two) => 7,
        (One | Two, Three, Three) => 8,
        (Three, Three, Three) => 9,
        _ => return None,
    })
}

pub fn ricci_case(x: Block, y: Block) -> u8 {
    if x != y {
        4
    } else {
        x.number() as u8
    }
}

fn scaled(c: f64, v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| c * x).collect()
}

fn wrong_case(kind: &str, case: u8, blocks: String) -> Error {
    Error::WrongBlock(format!("{kind} case {case} does not accept blocks {blocks}"))
}

/// Closed-form `∇̄_X Y` for lifted fields `X = dir`, `Y = field`.
pub fn cf_connection(ctx: &PointContext<'_>, case: u8, dir: &LiftedField, field: &LiftedField) -> Result<BlockVector> {
    let actual = connection_case(dir.block, field.block);
    if actual != case {
        return Err(wrong_case("connection", case, format!("({}, {})", dir.block.number(), field.block.number())));
    }
    let swp = ctx.swp;
    let p = &ctx.point;
    let x = dir.eval(swp, p)?;
    let y = field.eval(swp, p)?;
    let mut out = BlockVector::zeros(ctx.dims());
    let pick = |b: Block| if x.block == b { &x } else { &y };
    match case {
        1 => out.b1 = ctx.factors[0].covariant_derivative(&field.field, &x.v)?,
        2 => {
            let (x1, x2) = (pick(Block::One), pick(Block::Two));
            let c = ctx.f.derivative(&x1.v) / ctx.f.value;
            out.b2 = scaled(c, &x2.v);
        }
        3 => {
            out.b2 = ctx.factors[1].covariant_derivative(&field.field, &x.v)?;
            let g2 = ctx.factors[1].inner(&x.v, &y.v);
            out.b1 = scaled(-ctx.f.value * g2, &ctx.f.grad);
        }
        4 | 5 => {
            let xi = if case == 4 { pick(Block::One) } else { pick(Block::Two) };
            let x3 = pick(Block::Three);
            let c = ctx.fbar.derivative(&ctx.base_vec(xi)?) / ctx.fbar.value;
            out.b3 = scaled(c, &x3.v);
        }
        6 => {
            out.b3 = ctx.factors[2].covariant_derivative(&field.field, &x.v)?;
            let g3 = ctx.factors[2].inner(&x.v, &y.v);
            let grad = scaled(-ctx.fbar.value * g3, &ctx.fbar.grad);
            let n1 = ctx.dims()[0];
            out.b1 = grad[..n1].to_vec();
            out.b2 = grad[n1..].to_vec();
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// Closed-form `R̄(X, Y)Z` for single-block vectors.
pub fn cf_riemann(
    ctx: &PointContext<'_>,
    case: u8,
    x: &FactorVector,
    y: &FactorVector,
    z: &FactorVector,
    bracket: Bracket,
) -> Result<BlockVector> {
    for v in [x, y, z] {
        ctx.check_len(v)?;
    }
    let actual = riemann_case(x.block, y.block, z.block);
    if actual != Some(case) {
        return Err(wrong_case(
            "curvature",
            case,
            format!("({}, {}, {})", x.block.number(), y.block.number(), z.block.number()),
        ));
    }
    let mut out = BlockVector::zeros(ctx.dims());
    let n1 = ctx.dims()[0];
    match case {
        1 => out.b1 = ctx.factor_curvature(Block::One, &x.v, &y.v, &z.v),
        2 | 9 => {
            let (b, norm2) = if case == 2 { (Block::Two, ctx.f.gradnorm2) } else { (Block::Three, ctx.fbar.gradnorm2) };
            let r = ctx.factor_curvature(b, &x.v, &y.v, &z.v);
            let br = bracket.apply(&ctx.factors[b.index()], &x.v, &y.v, &z.v);
            *out.block_mut(b) = r.iter().zip(&br).map(|(ri, bi)| ri - norm2 * bi).collect();
        }
        3 => {
            let h = ctx.f.hess_form(&x.v, &z.v);
            out.b2 = scaled(-h / ctx.f.value, &y.v);
        }
        4 => {
            let g2 = ctx.factors[1].inner(&y.v, &z.v);
            out.b1 = scaled(ctx.f.value * g2, &ctx.nabla_grad_f(&x.v));
        }
        5 | 6 => {}
        7 => {
            let h = ctx.fbar.hess_form(&ctx.base_vec(x)?, &ctx.base_vec(z)?);
            out.b3 = scaled(-h / ctx.fbar.value, &y.v);
        }
        8 => {
            let g3 = ctx.factors[2].inner(&y.v, &z.v);
            let v = scaled(ctx.fbar.value * g3, &ctx.nabla_grad_fbar(&ctx.base_vec(x)?));
            out.b1 = v[..n1].to_vec();
            out.b2 = v[n1..].to_vec();
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// Closed-form `Ric̄(X, Y)` for single-block vectors.
pub fn cf_ricci(
    ctx: &PointContext<'_>,
    x: &FactorVector,
    y: &FactorVector,
    coefficient: FbarStarCoefficient,
    cross: CrossTerm,
) -> Result<f64> {
    ctx.check_len(x)?;
    ctx.check_len(y)?;
    let [_, n2, n3] = ctx.dims().map(|d| d as f64);
    if x.block != y.block {
        if cross == CrossTerm::AsWritten || x.block == Block::Three || y.block == Block::Three {
            return Ok(0.0);
        }
        return Ok(-n3 / ctx.fbar.value * ctx.fbar.hess_form(&ctx.base_vec(x)?, &ctx.base_vec(y)?));
    }
    let b = x.block;
    let ric = |b: Block| {
        let c = ctx.factors[b.index()].curvature();
        crate::geometry::bilinear(&c.ricci, &x.v, &y.v)
    };
    let aux = aux_scalars(ctx, coefficient);
    Ok(match b {
        Block::One => {
            let hf = ctx.f.hess_form(&x.v, &y.v);
            let hfbar = ctx.fbar.hess_form(&ctx.base_vec(x)?, &ctx.base_vec(y)?);
            ric(b) - n2 / ctx.f.value * hf - n3 / ctx.fbar.value * hfbar
        }
        Block::Two => {
            let g2 = ctx.factors[1].inner(&x.v, &y.v);
            let hfbar = ctx.fbar.hess_form(&ctx.base_vec(x)?, &ctx.base_vec(y)?);
            ric(b) - ctx.f.value.powi(2) * g2 * aux.fstar - n3 / ctx.fbar.value * hfbar
        }
        Block::Three => {
            let g3 = ctx.factors[2].inner(&x.v, &y.v);
            ric(b) - ctx.fbar.value.powi(2) * g3 * aux.fbarstar
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxScalars {
    pub fstar: f64,
    pub fbarstar: f64,
    pub u: f64,
    pub ubar: f64,
}

fn aux_scalars(ctx: &PointContext<'_>, coefficient: FbarStarCoefficient) -> AuxScalars {
    let [_, n2, n3] = ctx.dims().map(|d| d as f64);
    let (f, fb) = (&ctx.f, &ctx.fbar);
    AuxScalars {
        fstar: f.lap / f.value + (n2 - 1.0) * f.gradnorm2 / (f.value * f.value),
        fbarstar: fb.lap / fb.value + coefficient.value(ctx.dims()) * fb.gradnorm2 / (fb.value * fb.value),
        u: f.value.powf((n2 + 1.0) / 2.0),
        ubar: fb.value.powf((n3 + 1.0) / 2.0),
    }
}

/// `f*`, `f̄*`, `u = f^{(n2+1)/2}` and `ū = f̄^{(n3+1)/2}` at a total point.
pub fn aux_scalars_at(swp: &Swp, p: &[f64], coefficient: FbarStarCoefficient) -> Result<AuxScalars> {
    Ok(aux_scalars(&PointContext::new(swp, p)?, coefficient))
}

/// Both sides of the scalar-curvature relation at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarRelation {
    /// Oracle scalar curvature of the total chart.
    pub total: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub u: f64,
    pub ubar: f64,
    pub lap_u: f64,
    pub lap_ubar: f64,
    /// `R2 u^{-4/(n2+1)}`.
    pub term_r2: f64,
    /// `R3 ū^{-4/(n3+1)}`.
    pub term_r3: f64,
    /// `−4 n2 Δu / ((n2+1) u)`.
    pub term_u: f64,
    /// `−4 n3 Δū / ((n3+1) ū)`.
    pub term_ubar: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn scalar_relation(swp: &Swp, p: &[f64]) -> Result<ScalarRelation> {
    let ctx = PointContext::new(swp, p)?;
    let [n2, n3] = [swp.dims()[1] as f64, swp.dims()[2] as f64];
    let total = LocalGeometry::new(swp.total(), p)?.curvature().scalar;
    let r = |b: Block| ctx.factors[b.index()].curvature().scalar;
    let (r1, r2, r3) = (r(Block::One), r(Block::Two), r(Block::Three));
    let u_expr: Expr = swp.f().clone().powf((n2 + 1.0) / 2.0);
    let ubar_expr: Expr = swp.fbar().clone().powf((n3 + 1.0) / 2.0);
    let u = ctx.factors[0].scalar_calculus(&u_expr)?;
    let ubar = ctx.base.scalar_calculus(&ubar_expr)?;
    let term_r2 = r2 * u.value.powf(-4.0 / (n2 + 1.0));
    let term_r3 = r3 * ubar.value.powf(-4.0 / (n3 + 1.0));
    let term_u = -4.0 * n2 / ((n2 + 1.0) * u.value) * u.lap;
    let term_ubar = -4.0 * n3 / ((n3 + 1.0) * ubar.value) * ubar.lap;
    let rhs = r1 + term_r2 + term_r3 + term_u + term_ubar;
    Ok(ScalarRelation {
        total,
        r1,
        r2,
        r3,
        u: u.value,
        ubar: ubar.value,
        lap_u: u.lap,
        lap_ubar: ubar.lap,
        term_r2,
        term_r3,
        term_u,
        term_ubar,
        rhs,
        residual: (total - rhs).abs(),
    })
}

pub fn scalar_relation_residual(swp: &Swp, p: &[f64]) -> Result<f64> {
    Ok(scalar_relation(swp, p)?.residual)
}
