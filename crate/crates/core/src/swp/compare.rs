//! Closed form versus oracle over seeded samples.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::closed_form::{
    cf_connection, cf_ricci, cf_riemann, scalar_relation, Bracket, CrossTerm, FbarStarCoefficient, PointContext, ScalarRelation,
};
use super::einstein::{einstein_check, EinsteinReport, LambdaSpec};
use super::{Block, FactorVector, LiftedField, Swp};
use crate::error::Result;
use crate::expr::{Expr, Func};
use crate::geometry::{LocalGeometry, VectorFieldSpec};
use crate::sampling::{random_vector, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Connection,
    Riemann,
    Ricci,
}

impl Theorem {
    pub const ALL: [Theorem; 3] = [Theorem::Connection, Theorem::Riemann, Theorem::Ricci];

    pub fn cases(self) -> std::ops::RangeInclusive<u8> {
        match self {
            Theorem::Connection => 1..=6,
            Theorem::Riemann => 1..=9,
            Theorem::Ricci => 1..=4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Connection => "connection",
            Theorem::Riemann => "riemann",
            Theorem::Ricci => "ricci",
        }
    }

    fn stream(self, case: u8) -> u64 {
        let t = match self {
            Theorem::Connection => 1,
            Theorem::Riemann => 2,
            Theorem::Ricci => 3,
        };
        t * 100 + case as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub seed: u64,
    pub bracket: Bracket,
    pub coefficient: FbarStarCoefficient,
    pub cross: CrossTerm,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { seed: 42, bracket: Bracket::Corrected, coefficient: FbarStarCoefficient::FiberDimension, cross: CrossTerm::BaseHessian }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub theorem: Theorem,
    pub case: u8,
    /// Block number of each input, in argument order.
    pub blocks: Vec<usize>,
    pub point: Vec<f64>,
    pub closed_form: Vec<f64>,
    pub oracle: Vec<f64>,
    pub abs_residual: f64,
    pub rel_residual: f64,
    /// Whether the oracle value was negated before comparison.
    pub sign_flip: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn residual(closed: &[f64], oracle: &[f64], flip: bool) -> (f64, f64) {
    let s = if flip { -1.0 } else { 1.0 };
    let abs = closed.iter().zip(oracle).fold(0.0f64, |m, (c, o)| m.max((c - s * o).abs()));
    (abs, abs / max_abs(oracle).max(1.0))
}

/// Random smooth field on one factor: each component is
/// `c0 + c1·x_a + c2·sin(x_b) + c3·x_a·x_b` for random coordinates `a`, `b`.
fn random_field(swp: &Swp, block: Block, rng: &mut ChaCha8Rng) -> LiftedField {
    let chart = swp.factor(block);
    let n = chart.dim();
    let comps = (0..n)
        .map(|_| {
            let c: Vec<f64> = random_vector(rng, 4);
            let xa = Expr::var(chart.coords()[rng.random_range(0..n)].clone());
            let xb = Expr::var(chart.coords()[rng.random_range(0..n)].clone());
            Expr::constant(c[0])
                .add(xa.clone().scale(c[1]))
                .add(Expr::apply(Func::Sin, xb.clone()).scale(c[2]))
                .add(xa.mul(xb).scale(c[3]))
        })
        .collect();
    LiftedField { block, field: VectorFieldSpec::new(comps) }
}

fn connection_pairs(case: u8) -> Vec<(Block, Block)> {
    use Block::*;
    match case {
        1 => vec![(One, One)],
        2 => vec![(One, Two), (Two, One)],
        3 => vec![(Two, Two)],
        4 => vec![(One, Three), (Three, One)],
        5 => vec![(Two, Three), (Three, Two)],
        6 => vec![(Three, Three)],
        _ => vec![],
    }
}

fn riemann_triples(case: u8) -> Vec<[Block; 3]> {
    use Block::*;
    match case {
        1 => vec![[One, One, One]],
        2 => vec![[Two, Two, Two]],
        3 => vec![[One, Two, One]],
        4 => vec![[One, Two, Two]],
        5 => vec![[One, Two, Three]],
        6 => {
            let mut v = Vec::new();
            for i in Block::ALL {
                for j in Block::ALL {
                    if i != j {
                        v.push([i, i, j]);
                    }
                }
            }
            v
        }
        7 => vec![[One, Three, One], [One, Three, Two], [Two, Three, One], [Two, Three, Two]],
        8 => vec![[One, Three, Three], [Two, Three, Three]],
        9 => vec![[Three, Three, Three]],
        _ => vec![],
    }
}

fn ricci_pairs(case: u8) -> Vec<(Block, Block)> {
    use Block::*;
    match case {
        1 => vec![(One, One)],
        2 => vec![(Two, Two)],
        3 => vec![(Three, Three)],
        4 => vec![(One, Two), (Two, One), (One, Three), (Three, One), (Two, Three), (Three, Two)],
        _ => vec![],
    }
}

enum Input {
    Connection { dir: LiftedField, field: LiftedField },
    Vectors(Vec<FactorVector>),
}

fn invalid_case(theorem: Theorem, case: u8) -> crate::Error {
    crate::Error::Invalid(format!("{} has no case {case}", theorem.name()))
}

/// Unflipped comparison data for one sample.
fn evaluate(
    swp: &Swp,
    theorem: Theorem,
    case: u8,
    p: &[f64],
    input: &Input,
    opts: &CompareOptions,
) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
    let ctx = PointContext::new(swp, p)?;
    let total = LocalGeometry::new(swp.total(), p)?;
    match (theorem, input) {
        (Theorem::Connection, Input::Connection { dir, field }) => {
            let closed = cf_connection(&ctx, case, dir, field)?.to_total();
            let x = dir.eval(swp, p)?;
            let lifted = swp.lift(field.block, &field.field)?;
            let oracle = total.covariant_derivative(&lifted, &swp.embed(x.block, &x.v))?;
            Ok((vec![dir.block.number(), field.block.number()], closed, oracle))
        }
        (Theorem::Riemann, Input::Vectors(v)) => {
            let closed = cf_riemann(&ctx, case, &v[0], &v[1], &v[2], opts.bracket)?.to_total();
            let e: Vec<Vec<f64>> = v.iter().map(|f| swp.embed(f.block, &f.v)).collect();
            let oracle = total.curvature().riemann.apply(&e[0], &e[1], &e[2]);
            Ok((v.iter().map(|f| f.block.number()).collect(), closed, oracle))
        }
        (Theorem::Ricci, Input::Vectors(v)) => {
            let closed = cf_ricci(&ctx, &v[0], &v[1], opts.coefficient, opts.cross)?;
            let x = swp.embed(v[0].block, &v[0].v);
            let y = swp.embed(v[1].block, &v[1].v);
            let oracle = crate::geometry::bilinear(&total.curvature().ricci, &x, &y);
            Ok((vec![v[0].block.number(), v[1].block.number()], vec![closed], vec![oracle]))
        }
        _ => unreachable!(),
    }
}

/// Compare one theorem case at every sample point.
///
/// Inputs cycle through the admissible block patterns of the case. For the
/// curvature tensor a single sign flip is chosen for the whole case (the one
/// with the smaller worst residual, ties going to the flipped convention);
/// connection and Ricci values are never flipped.
pub fn compare_oracle(
    swp: &Swp,
    theorem: Theorem,
    case: u8,
    samples: &[Vec<f64>],
    opts: &CompareOptions,
) -> Result<Vec<ClosedFormReport>> {
    let dims = swp.dims();
    let mut r = rng(opts.seed, theorem.stream(case));
    let inputs: Vec<Input> = match theorem {
        Theorem::Connection => {
            let pairs = connection_pairs(case);
            if pairs.is_empty() {
                return Err(invalid_case(theorem, case));
            }
            (0..samples.len())
                .map(|k| {
                    let (a, b) = pairs[k % pairs.len()];
                    Input::Connection { dir: random_field(swp, a, &mut r), field: random_field(swp, b, &mut r) }
                })
                .collect()
        }
        Theorem::Riemann | Theorem::Ricci => {
            let patterns: Vec<Vec<Block>> = if theorem == Theorem::Riemann {
                riemann_triples(case).into_iter().map(|t| t.to_vec()).collect()
            } else {
                ricci_pairs(case).into_iter().map(|(a, b)| vec![a, b]).collect()
            };
            if patterns.is_empty() {
                return Err(invalid_case(theorem, case));
            }
            (0..samples.len())
                .map(|k| {
                    let pat = &patterns[k % patterns.len()];
                    Input::Vectors(
                        pat.iter().map(|&b| FactorVector::new(b, random_vector(&mut r, dims[b.index()]))).collect(),
                    )
                })
                .collect()
        }
    };

    let raw: Vec<(Vec<usize>, Vec<f64>, Vec<f64>)> = samples
        .par_iter()
        .zip(inputs.par_iter())
        .map(|(p, input)| evaluate(swp, theorem, case, p, input, opts))
        .collect::<Result<_>>()?;

    let flip = theorem == Theorem::Riemann && {
        let worst = |flip: bool| raw.iter().map(|(_, c, o)| residual(c, o, flip).1).fold(0.0, f64::max);
        worst(true) <= worst(false)
    };
    Ok(raw
        .into_iter()
        .zip(samples)
        .map(|((blocks, closed_form, oracle), p)| {
            let (abs_residual, rel_residual) = residual(&closed_form, &oracle, flip);
            ClosedFormReport {
                theorem,
                case,
                blocks,
                point: p.clone(),
                closed_form,
                oracle,
                abs_residual,
                rel_residual,
                sign_flip: flip,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSummary {
    pub theorem: Theorem,
    pub case: u8,
    /// Formula variant used, if the case has several.
    pub variant: Option<String>,
    pub samples: usize,
    pub max_abs_residual: f64,
    pub max_rel_residual: f64,
    pub sign_flip: bool,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn summarize(reports: &[ClosedFormReport], tolerance: f64, variant: Option<String>) -> Option<CaseSummary> {
    let first = reports.first()?;
    let max_abs_residual = reports.iter().map(|r| r.abs_residual).fold(0.0, f64::max);
    let max_rel_residual = reports.iter().map(|r| r.rel_residual).fold(0.0, f64::max);
    Some(CaseSummary {
        theorem: first.theorem,
        case: first.case,
        variant,
        samples: reports.len(),
        max_abs_residual,
        max_rel_residual,
        sign_flip: first.sign_flip,
        tolerance,
        pass: max_rel_residual < tolerance,
    })
}

/// Oracle verdict between competing readings of one formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Adjudication {
    pub subject: String,
    /// `(label, max relative residual, passes)` per candidate.
    pub candidates: Vec<(String, f64, bool)>,
    /// The unique passing candidate, if exactly one passes.
    pub winner: Option<String>,
    pub verdict: String,
}

impl Adjudication {
    fn new(subject: String, candidates: Vec<(String, f64, bool)>) -> Adjudication {
        let passing: Vec<&String> = candidates.iter().filter(|c| c.2).map(|c| &c.0).collect();
        let winner = if passing.len() == 1 { Some(passing[0].clone()) } else { None };
        let verdict = match passing.len() {
            0 => "no candidate matches the oracle".to_string(),
            1 => format!("oracle selects {}", passing[0]),
            n if n == candidates.len() => "all candidates match the oracle on this manifold (not distinguishing)".into(),
            _ => format!(
                "candidates {} match the oracle",
                passing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ),
        };
        Adjudication { subject, candidates, winner, verdict }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarRelationSummary {
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Term breakdown at the first sample.
    pub first: Option<ScalarRelation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Einstein constant; estimated from the samples when `None`.
    pub lambda: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { samples: 50, seed: 42, tolerance: 1e-8, lambda: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremSuite {
    /// Every connection, curvature and Ricci case exactly once.
    pub cases: Vec<CaseSummary>,
    pub adjudications: Vec<Adjudication>,
    pub scalar_relation: ScalarRelationSummary,
    pub einstein: EinsteinReport,
    pub pass: bool,
}

impl TheoremSuite {
    pub fn case(&self, theorem: Theorem, case: u8) -> Option<&CaseSummary> {
        self.cases.iter().find(|c| c.theorem == theorem && c.case == case)
    }

    pub fn adjudication(&self, subject_prefix: &str) -> Option<&Adjudication> {
        self.adjudications.iter().find(|a| a.subject.starts_with(subject_prefix))
    }
}

/// Run every closed form against the oracle, the scalar-curvature relation
/// and the Einstein conditions.
///
/// Curvature cases 2 and 9 are summarized with the corrected bracket, the
/// Ricci fibre case with the `(n3 − 1)` coefficient and the mixed Ricci case
/// with the base-Hessian term; the competing readings are reported as
/// adjudications. The Einstein part counts towards `pass`
/// only through its consistency flag, since most manifolds are not Einstein.
pub fn verify_theorems(swp: &Swp, cfg: &VerifyConfig) -> Result<TheoremSuite> {
    let samples = swp.samples(cfg.samples, cfg.seed);
    let opts = CompareOptions { seed: cfg.seed, ..CompareOptions::default() };
    let tol = cfg.tolerance;
    let mut cases = Vec::new();
    let mut adjudications = Vec::new();
    for theorem in Theorem::ALL {
        for case in theorem.cases() {
            let reports = compare_oracle(swp, theorem, case, &samples, &opts)?;
            let variant = match (theorem, case) {
                (Theorem::Riemann, 2 | 9) => {
                    let literal = CompareOptions { bracket: Bracket::AsWritten, ..opts };
                    let lit = summarize(&compare_oracle(swp, theorem, case, &samples, &literal)?, tol, None);
                    let cor = summarize(&reports, tol, None);
                    let cand = [(Bracket::AsWritten, lit), (Bracket::Corrected, cor)]
                        .into_iter()
                        .filter_map(|(b, s)| s.map(|s| (b.label().to_string(), s.max_rel_residual, s.pass)))
                        .collect();
                    adjudications.push(Adjudication::new(format!("riemann case {case} fibre bracket"), cand));
                    Some(Bracket::Corrected.label().to_string())
                }
                (Theorem::Ricci, 3) => {
                    let mut cand = Vec::new();
                    for c in FbarStarCoefficient::ALL {
                        let o = CompareOptions { coefficient: c, ..opts };
                        if let Some(s) = summarize(&compare_oracle(swp, theorem, case, &samples, &o)?, tol, None) {
                            cand.push((format!("fbar* coefficient {}", c.label()), s.max_rel_residual, s.pass));
                        }
                    }
                    adjudications.push(Adjudication::new("ricci case 3 fbar* coefficient".into(), cand));
                    Some(format!("fbar* coefficient {}", FbarStarCoefficient::FiberDimension.label()))
                }
                (Theorem::Ricci, 4) => {
                    let mut cand = Vec::new();
                    for c in [CrossTerm::AsWritten, CrossTerm::BaseHessian] {
                        let o = CompareOptions { cross: c, ..opts };
                        if let Some(s) = summarize(&compare_oracle(swp, theorem, case, &samples, &o)?, tol, None) {
                            cand.push((c.label().to_string(), s.max_rel_residual, s.pass));
                        }
                    }
                    adjudications.push(Adjudication::new("ricci case 4 mixed term".into(), cand));
                    Some(CrossTerm::BaseHessian.label().to_string())
                }
                _ => None,
            };
            if let Some(s) = summarize(&reports, tol, variant) {
                cases.push(s);
            }
        }
    }

    let relations: Vec<ScalarRelation> =
        samples.par_iter().map(|p| scalar_relation(swp, p)).collect::<Result<_>>()?;
    let max_residual = relations.iter().map(|r| r.residual / r.total.abs().max(1.0)).fold(0.0, f64::max);
    let scalar_relation = ScalarRelationSummary {
        samples: relations.len(),
        max_residual,
        tolerance: tol,
        pass: max_residual < tol,
        first: relations.into_iter().next(),
    };

    let lambda = cfg.lambda.map_or(LambdaSpec::Estimate, LambdaSpec::Given);
    let einstein = einstein_check(swp, lambda, &samples, tol)?;
    let pass = cases.iter().all(|c| c.pass) && scalar_relation.pass && einstein.consistent;
    Ok(TheoremSuite { cases, adjudications, scalar_relation, einstein, pass })
}
