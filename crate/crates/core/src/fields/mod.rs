//! Geodesics and symmetry vector fields on a sequential warped product.

mod concircular;
mod geodesic;
mod killing;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::VectorFieldSpec;
use crate::swp::{Block, Swp};

pub use concircular::{
    concircular_check, concircular_check_chart, concircular_suite, ConcircularReport, ConcircularSuite, SubCheck,
};
pub use geodesic::{
    geodesic_condition_residuals, integrate_geodesic, trajectory_csv, GeodesicResiduals, GeodesicState, Trajectory,
};
pub use killing::{
    conformal_factors, conserved_along_geodesic, killing_check, lie_decomposition_check, ConformalReport,
    ConservedReport, KillingChecklist, KillingReport, LieDecomposition,
};

/// Threshold below which a field component counts as zero.
pub const NONZERO: f64 = 1e-8;

/// A vector field on the total manifold, either as a sum of lifted factor
/// fields `ζ1 + ζ2 + ζ3` or as arbitrary total-chart components.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockFieldSpec {
    Lifted([VectorFieldSpec; 3]),
    Generic(VectorFieldSpec),
}

impl BlockFieldSpec {
    /// Validates each block against its factor chart.
    pub fn lifted(swp: &Swp, blocks: [VectorFieldSpec; 3]) -> Result<BlockFieldSpec> {
        for b in Block::ALL {
            blocks[b.index()].validate(swp.factor(b))?;
        }
        Ok(BlockFieldSpec::Lifted(blocks))
    }

    /// A field living in one block, zero elsewhere.
    pub fn single(swp: &Swp, block: Block, field: VectorFieldSpec) -> Result<BlockFieldSpec> {
        let mut blocks = swp.dims().map(VectorFieldSpec::zero);
        blocks[block.index()] = field;
        BlockFieldSpec::lifted(swp, blocks)
    }

    pub fn generic(swp: &Swp, field: VectorFieldSpec) -> Result<BlockFieldSpec> {
        field.validate(swp.total())?;
        Ok(BlockFieldSpec::Generic(field))
    }

    pub fn is_lifted(&self) -> bool {
        matches!(self, BlockFieldSpec::Lifted(_))
    }

    pub fn component(&self, b: Block) -> Option<&VectorFieldSpec> {
        match self {
            BlockFieldSpec::Lifted(blocks) => Some(&blocks[b.index()]),
            BlockFieldSpec::Generic(_) => None,
        }
    }

    pub(crate) fn require_lifted(&self, what: &str) -> Result<&[VectorFieldSpec; 3]> {
        match self {
            BlockFieldSpec::Lifted(blocks) => Ok(blocks),
            BlockFieldSpec::Generic(_) => Err(Error::Invalid(format!("{what} needs a field given per block"))),
        }
    }

    /// Components on the total chart.
    pub fn total(&self, swp: &Swp) -> Result<VectorFieldSpec> {
        match self {
            BlockFieldSpec::Generic(v) => {
                v.validate(swp.total())?;
                Ok(v.clone())
            }
            BlockFieldSpec::Lifted(blocks) => {
                let mut comps: Vec<Expr> = Vec::with_capacity(swp.total().dim());
                for b in Block::ALL {
                    blocks[b.index()].validate(swp.factor(b))?;
                    comps.extend(blocks[b.index()].components.iter().cloned());
                }
                Ok(VectorFieldSpec::new(comps))
            }
        }
    }
}
