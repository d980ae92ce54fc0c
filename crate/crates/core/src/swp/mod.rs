//! Sequential warped products `(M1 ×_f M2) ×_f̄ M3`.
//!
//! [`assemble`] builds the total chart with metric `(g1 ⊕ f²g2) ⊕ f̄²g3` and
//! the base chart `M = M1 ×_f M2` (metric `g1 ⊕ f²g2`). Gradients, Hessians and
//! Laplacians of `f̄` are always taken on the base chart, never on the plain
//! product `M1 × M2`.

mod closed_form;
mod compare;
mod einstein;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Chart, Interval, VectorFieldSpec};
use crate::sampling::sample_box;

pub use closed_form::{
    aux_scalars_at, cf_connection, cf_ricci, cf_riemann, connection_case, ricci_case, riemann_case,
    scalar_relation, scalar_relation_residual, AuxScalars, Bracket, CrossTerm, FbarStarCoefficient, PointContext,
    ScalarRelation,
};
pub use compare::{
    compare_oracle, summarize, verify_theorems, Adjudication, CaseSummary, ClosedFormReport, CompareOptions,
    ScalarRelationSummary, Theorem, TheoremSuite, VerifyConfig,
};
pub use einstein::{einstein_check, CoefficientCandidate, ConditionResidual, EinsteinReport, LambdaSpec};

/// Number of grid points used for the warping positivity check.
const POSITIVITY_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Block {
    One,
    Two,
    Three,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::One, Block::Two, Block::Three];

    pub fn index(self) -> usize {
        match self {
            Block::One => 0,
            Block::Two => 1,
            Block::Three => 2,
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_number(n: usize) -> Option<Block> {
        Block::ALL.get(n.wrapping_sub(1)).copied()
    }
}

/// Warping data for [`assemble`].
#[derive(Debug, Clone, PartialEq)]
pub enum Warping {
    /// `f` over M1, `f̄` over M1 ⊕ M2.
    Sequential { f: Expr, fbar: Expr },
    /// Two fibres over M1: `f̄` may only use M1 coordinates.
    Multiply { f: Expr, fbar: Expr },
    /// `M1 ×_{f1} (M2 ×_{f2} M3)`, realised with `f = f1`, `f̄ = f1·f2`,
    /// `f1` over M1 and `f2` over M2.
    Iterated { f1: Expr, f2: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyKind {
    Sequential,
    Multiply,
    Iterated,
}

/// Which construction produced the product; the space-time constructors tag
/// their output so later checks can recover the original warpings.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Assembled,
    StandardStatic,
    /// `−dt² ⊕ a(t)²(g1 ⊕ h²g2)` with scale `a` and inner warping `h`.
    Grw { scale: Expr, inner: Expr },
}

#[derive(Debug, Clone)]
pub struct SequentialWarpedProduct {
    kind: AssemblyKind,
    origin: Origin,
    factors: [Chart; 3],
    f: Expr,
    fbar: Expr,
    base: Chart,
    total: Chart,
    presentation: Vec<usize>,
}

pub type Swp = SequentialWarpedProduct;

fn warped_entry(w2: &Expr, g: &Expr) -> Expr {
    if g.is_zero() {
        Expr::zero()
    } else {
        w2.clone().mul(g.clone())
    }
}

fn check_vars(what: &str, e: &Expr, allowed: &[String]) -> Result<()> {
    let foreign = e.foreign_variables(allowed);
    if foreign.is_empty() {
        Ok(())
    } else {
        Err(Error::ForbiddenCoordinate { what: what.to_string(), coords: foreign.into_iter().map(String::from).collect() })
    }
}

fn check_positive(which: &str, e: &Expr, chart: &Chart) -> Result<()> {
    for p in sample_box(chart.bounds(), POSITIVITY_SAMPLES, 0) {
        let value = chart.eval(e, &p)?;
        if !(value > 0.0) {
            return Err(Error::WarpingNotPositive { which: which.to_string(), point: p, value });
        }
    }
    Ok(())
}

/// Block-diagonal chart `a ⊕ w²b` (with `w = 1` when `None`).
fn block_chart(name: String, a: &Chart, warp: Option<&Expr>, b: &Chart) -> Result<Chart> {
    let (na, nb) = (a.dim(), b.dim());
    let n = na + nb;
    let w2 = warp.map(|w| w.clone().powf(2.0));
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let e = if j < na {
                a.metric_expr(i, j).clone()
            } else if i >= na {
                let g = b.metric_expr(i - na, j - na);
                match &w2 {
                    Some(w2) => warped_entry(w2, g),
                    None => g.clone(),
                }
            } else {
                Expr::zero()
            };
            upper.push(e);
        }
    }
    let coords = a.coords().iter().chain(b.coords()).cloned().collect();
    let bounds: Vec<Interval> = a.bounds().iter().chain(b.bounds()).copied().collect();
    Chart::from_upper(name, coords, upper, bounds)
}

/// Build the sequential warped product `(m1 ×_f m2) ×_f̄ m3`.
pub fn assemble(m1: Chart, m2: Chart, m3: Chart, warping: Warping) -> Result<Swp> {
    let mut seen: Vec<&String> = Vec::new();
    for c in m1.coords().iter().chain(m2.coords()).chain(m3.coords()) {
        if seen.contains(&c) {
            return Err(Error::NameCollision(c.clone()));
        }
        seen.push(c);
    }
    let m12: Vec<String> = m1.coords().iter().chain(m2.coords()).cloned().collect();
    let (kind, f, fbar) = match warping {
        Warping::Sequential { f, fbar } => {
            check_vars("warping function f", &f, m1.coords())?;
            check_vars("warping function fbar", &fbar, &m12)?;
            (AssemblyKind::Sequential, f, fbar)
        }
        Warping::Multiply { f, fbar } => {
            check_vars("warping function f", &f, m1.coords())?;
            check_vars("warping function fbar", &fbar, m1.coords())?;
            (AssemblyKind::Multiply, f, fbar)
        }
        Warping::Iterated { f1, f2 } => {
            check_vars("warping function f1", &f1, m1.coords())?;
            check_vars("warping function f2", &f2, m2.coords())?;
            let fbar = f1.clone().mul(f2);
            (AssemblyKind::Iterated, f1, fbar)
        }
    };
    check_positive("f", &f, &m1)?;
    let base = block_chart(format!("{} x_f {}", m1.name(), m2.name()), &m1, Some(&f), &m2)?;
    check_positive("fbar", &fbar, &base)?;
    let total = block_chart(format!("({}) x_fbar {}", base.name(), m3.name()), &base, Some(&fbar), &m3)?;
    let presentation = (0..total.dim()).collect();
    Ok(SequentialWarpedProduct {
        kind,
        origin: Origin::Assembled,
        factors: [m1, m2, m3],
        f,
        fbar,
        base,
        total,
        presentation,
    })
}

impl SequentialWarpedProduct {
    pub fn kind(&self) -> AssemblyKind {
        self.kind
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub(crate) fn with_origin(mut self, origin: Origin, presentation: Vec<usize>) -> Swp {
        debug_assert_eq!(presentation.len(), self.total.dim());
        self.origin = origin;
        self.presentation = presentation;
        self
    }

    pub fn factor(&self, b: Block) -> &Chart {
        &self.factors[b.index()]
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn fbar(&self) -> &Expr {
        &self.fbar
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn total(&self) -> &Chart {
        &self.total
    }

    /// Coordinate order used in reports and CSV output (indices into the
    /// total chart). Identity except for standard static space-times, which
    /// list `t` first.
    pub fn presentation_order(&self) -> &[usize] {
        &self.presentation
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.factors[0].dim(), self.factors[1].dim(), self.factors[2].dim()]
    }

    pub fn offset(&self, b: Block) -> usize {
        let d = self.dims();
        d[..b.index()].iter().sum()
    }

    pub fn range(&self, b: Block) -> std::ops::Range<usize> {
        let o = self.offset(b);
        o..o + self.dims()[b.index()]
    }

    pub fn project<'a>(&self, p: &'a [f64], b: Block) -> &'a [f64] {
        &p[self.range(b)]
    }

    pub fn base_point<'a>(&self, p: &'a [f64]) -> &'a [f64] {
        &p[..self.base.dim()]
    }

    /// Embed a factor vector into the total tangent space.
    pub fn embed(&self, b: Block, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.total.dim()];
        out[self.range(b)].copy_from_slice(v);
        out
    }

    /// Embed an M1 or M2 vector into the base tangent space.
    pub fn embed_base(&self, b: Block, v: &[f64]) -> Result<Vec<f64>> {
        if b == Block::Three {
            return Err(Error::WrongBlock("M3 vectors have no base component".into()));
        }
        let mut out = vec![0.0; self.base.dim()];
        out[self.range(b)].copy_from_slice(v);
        Ok(out)
    }

    /// Total coordinate names in presentation order.
    pub fn presented_coords(&self) -> Vec<String> {
        self.presentation.iter().map(|&i| self.total.coords()[i].clone()).collect()
    }

    pub fn present(&self, v: &[f64]) -> Vec<f64> {
        self.presentation.iter().map(|&i| v[i]).collect()
    }

    /// Inverse of [`present`](Self::present).
    pub fn unpresent<T: Clone>(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        for (k, &i) in self.presentation.iter().enumerate() {
            out[i] = v[k].clone();
        }
        out
    }

    /// Lift a field on one factor to the total chart by zero.
    pub fn lift(&self, b: Block, field: &VectorFieldSpec) -> Result<VectorFieldSpec> {
        field.validate(self.factor(b))?;
        let mut comps = vec![Expr::zero(); self.total.dim()];
        for (slot, c) in comps[self.range(b)].iter_mut().zip(&field.components) {
            *slot = c.clone();
        }
        Ok(VectorFieldSpec::new(comps))
    }

    /// Sample points strictly inside the total box.
    pub fn samples(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        sample_box(self.total.bounds(), count, seed)
    }
}

/// Tangent vector at a total point split into its M1/M2/M3 components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockVector {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub b3: Vec<f64>,
}

impl BlockVector {
    pub fn zeros(dims: [usize; 3]) -> BlockVector {
        BlockVector { b1: vec![0.0; dims[0]], b2: vec![0.0; dims[1]], b3: vec![0.0; dims[2]] }
    }

    pub fn from_total(dims: [usize; 3], v: &[f64]) -> Result<BlockVector> {
        let n: usize = dims.iter().sum();
        if v.len() != n {
            return Err(Error::Dimension { expected: n, got: v.len() });
        }
        Ok(BlockVector {
            b1: v[..dims[0]].to_vec(),
            b2: v[dims[0]..dims[0] + dims[1]].to_vec(),
            b3: v[dims[0] + dims[1]..].to_vec(),
        })
    }

    pub fn block(&self, b: Block) -> &[f64] {
        match b {
            Block::One => &self.b1,
            Block::Two => &self.b2,
            Block::Three => &self.b3,
        }
    }

    pub fn block_mut(&mut self, b: Block) -> &mut Vec<f64> {
        match b {
            Block::One => &mut self.b1,
            Block::Two => &mut self.b2,
            Block::Three => &mut self.b3,
        }
    }

    pub fn to_total(&self) -> Vec<f64> {
        self.b1.iter().chain(&self.b2).chain(&self.b3).copied().collect()
    }
}

/// A vector living in a single factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorVector {
    pub block: Block,
    pub v: Vec<f64>,
}

impl FactorVector {
    pub fn new(block: Block, v: Vec<f64>) -> FactorVector {
        FactorVector { block, v }
    }
}

/// A vector field on one factor, lifted by zero to the product. Components
/// are expressions over that factor's coordinates only.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedField {
    pub block: Block,
    pub field: VectorFieldSpec,
}

impl LiftedField {
    pub fn new(swp: &Swp, block: Block, field: VectorFieldSpec) -> Result<LiftedField> {
        field.validate(swp.factor(block))?;
        Ok(LiftedField { block, field })
    }

    pub fn eval(&self, swp: &Swp, p: &[f64]) -> Result<FactorVector> {
        let chart = swp.factor(self.block);
        Ok(FactorVector::new(self.block, self.field.eval(chart, swp.project(p, self.block))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn line(name: &str, coord: &str, lo: f64, hi: f64) -> Chart {
        Chart::parse_diagonal(name, &[coord], &["1"], &[(lo, hi)]).unwrap()
    }

    #[test]
    fn unit_warpings_give_direct_product() {
        let s = assemble(
            line("A", "x", 0.0, 1.0),
            line("B", "y", 0.0, 1.0),
            line("C", "z", 0.0, 1.0),
            Warping::Sequential { f: Expr::one(), fbar: Expr::one() },
        )
        .unwrap();
        let g = crate::geometry::metric_at(s.total(), &[0.5, 0.5, 0.5]).unwrap().g;
        assert_eq!(g, nalgebra::DMatrix::identity(3, 3));
        assert!(s.total().metric_expr(0, 1).is_zero());
        assert!(s.total().metric_expr(1, 2).is_zero());
    }

    #[test]
    fn name_collision() {
        let err = assemble(
            line("A", "x", 0.0, 1.0),
            line("B", "x", 0.0, 1.0),
            line("C", "z", 0.0, 1.0),
            Warping::Sequential { f: Expr::one(), fbar: Expr::one() },
        )
        .unwrap_err();
        assert_eq!(err, Error::NameCollision("x".into()));
    }

    #[test]
    fn forbidden_coordinates() {
        let mk = |w: Warping| assemble(line("A", "x", 0.5, 1.0), line("B", "y", 0.5, 1.0), line("C", "z", 0.5, 1.0), w);
        let e = |s: &str| parse_expr(s).unwrap();
        assert!(matches!(mk(Warping::Sequential { f: e("y"), fbar: e("1") }), Err(Error::ForbiddenCoordinate { .. })));
        assert!(matches!(mk(Warping::Sequential { f: e("x"), fbar: e("z") }), Err(Error::ForbiddenCoordinate { .. })));
        assert!(matches!(mk(Warping::Multiply { f: e("x"), fbar: e("y") }), Err(Error::ForbiddenCoordinate { .. })));
        assert!(matches!(mk(Warping::Iterated { f1: e("x"), f2: e("x") }), Err(Error::ForbiddenCoordinate { .. })));
        assert!(mk(Warping::Sequential { f: e("x"), fbar: e("x*y") }).is_ok());
    }

    #[test]
    fn positivity_violation() {
        let err = assemble(
            line("A", "x", -1.0, 1.0),
            line("B", "y", 0.0, 1.0),
            line("C", "z", 0.0, 1.0),
            Warping::Sequential { f: parse_expr("x").unwrap(), fbar: Expr::one() },
        )
        .unwrap_err();
        assert!(matches!(err, Error::WarpingNotPositive { .. }));
    }

    #[test]
    fn block_vector_split() {
        let v = BlockVector::from_total([2, 1, 1], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(v.b1, vec![1.0, 2.0]);
        assert_eq!(v.block(Block::Three), &[4.0]);
        assert_eq!(v.to_total(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(BlockVector::from_total([2, 1, 1], &[1.0]).is_err());
    }
}
