use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{eval_jet2, eval_value, parse_expr, Expr, Jet2};

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// One coordinate patch: ordered coordinate names, a symmetric matrix of
/// metric expressions and a box of validity.
///
/// Only the upper triangle of the metric is stored, so `g_ij` and `g_ji` are
/// the same tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    upper: Vec<Expr>,
    bounds: Vec<Interval>,
}

fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

impl Chart {
    /// Build a chart from a full metric matrix. Off-diagonal pairs must be
    /// identical trees.
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        metric: Vec<Vec<Expr>>,
        bounds: Vec<Interval>,
    ) -> Result<Chart> {
        let name = name.into();
        let dim = coords.len();
        let invalid = |reason: String| Error::InvalidChart { chart: name.clone(), reason };
        if metric.len() != dim || metric.iter().any(|row| row.len() != dim) {
            return Err(invalid(format!("metric must be {dim}x{dim}")));
        }
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                if metric[i][j] != metric[j][i] {
                    return Err(invalid(format!("metric entries ({i},{j}) and ({j},{i}) differ")));
                }
                upper.push(metric[i][j].clone());
            }
        }
        Chart::from_upper(name, coords, upper, bounds)
    }

    /// Build a chart from the row-major upper triangle of the metric.
    pub fn from_upper(
        name: impl Into<String>,
        coords: Vec<String>,
        upper: Vec<Expr>,
        bounds: Vec<Interval>,
    ) -> Result<Chart> {
        let name = name.into();
        let dim = coords.len();
        let invalid = |reason: String| Error::InvalidChart { chart: name.clone(), reason };
        if dim == 0 {
            return Err(invalid("chart needs at least one coordinate".into()));
        }
        if upper.len() != dim * (dim + 1) / 2 {
            return Err(invalid("metric upper triangle has the wrong length".into()));
        }
        if bounds.len() != dim {
            return Err(invalid(format!("expected {dim} coordinate intervals, got {}", bounds.len())));
        }
        for (k, c) in coords.iter().enumerate() {
            let valid = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
                && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
            if !valid || c == "pi" {
                return Err(invalid(format!("`{c}` is not a usable coordinate name")));
            }
            if coords[..k].contains(c) {
                return Err(invalid(format!("coordinate `{c}` declared twice")));
            }
        }
        for (c, iv) in coords.iter().zip(&bounds) {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(invalid(format!("interval for `{c}` is empty or unbounded")));
            }
        }
        for e in &upper {
            let foreign = e.foreign_variables(&coords);
            if !foreign.is_empty() {
                return Err(Error::ForbiddenCoordinate {
                    what: format!("metric of chart `{name}`"),
                    coords: foreign.into_iter().map(String::from).collect(),
                });
            }
        }
        Ok(Chart { name, coords, upper, bounds })
    }

    pub fn diagonal(
        name: impl Into<String>,
        coords: Vec<String>,
        diag: Vec<Expr>,
        bounds: Vec<Interval>,
    ) -> Result<Chart> {
        let dim = coords.len();
        if diag.len() != dim {
            return Err(Error::Dimension { expected: dim, got: diag.len() });
        }
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(if i == j { diag[i].clone() } else { Expr::zero() });
            }
        }
        Chart::from_upper(name, coords, upper, bounds)
    }

    /// Convenience constructor from expression strings.
    pub fn parse(name: &str, coords: &[&str], metric: &[&[&str]], bounds: &[(f64, f64)]) -> Result<Chart> {
        let metric = metric
            .iter()
            .map(|row| row.iter().map(|s| parse_expr(s).map_err(Error::from)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Chart::new(
            name,
            coords.iter().map(|s| s.to_string()).collect(),
            metric,
            bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect(),
        )
    }

    /// Diagonal chart from expression strings.
    pub fn parse_diagonal(name: &str, coords: &[&str], diag: &[&str], bounds: &[(f64, f64)]) -> Result<Chart> {
        let diag = diag.iter().map(|s| parse_expr(s).map_err(Error::from)).collect::<Result<Vec<_>>>()?;
        Chart::diagonal(
            name,
            coords.iter().map(|s| s.to_string()).collect(),
            diag,
            bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn metric_expr(&self, i: usize, j: usize) -> &Expr {
        &self.upper[upper_index(self.dim(), i, j)]
    }

    pub fn metric_upper(&self) -> &[Expr] {
        &self.upper
    }

    pub fn metric_matrix(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.metric_expr(i, j).clone()).collect()).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(x, iv)| iv.contains(*x))
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: p.len() });
        }
        if !self.contains(p) {
            return Err(Error::OutOfBox { chart: self.name.clone(), point: p.to_vec() });
        }
        Ok(())
    }

    pub fn rename(mut self, name: impl Into<String>) -> Chart {
        self.name = name.into();
        self
    }

    /// Evaluate a scalar expression over this chart's coordinates.
    pub fn eval(&self, e: &Expr, p: &[f64]) -> Result<f64> {
        Ok(eval_value(e, p, &self.coords)?)
    }

    pub fn jet(&self, e: &Expr, p: &[f64]) -> Result<Jet2> {
        Ok(eval_jet2(e, p, &self.coords)?)
    }
}

/// Vector field given by one component expression per chart coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    pub components: Vec<Expr>,
}

impl VectorFieldSpec {
    pub fn new(components: Vec<Expr>) -> VectorFieldSpec {
        VectorFieldSpec { components }
    }

    pub fn zero(dim: usize) -> VectorFieldSpec {
        VectorFieldSpec { components: vec![Expr::zero(); dim] }
    }

    pub fn parse(components: &[&str]) -> Result<VectorFieldSpec> {
        let components = components.iter().map(|s| parse_expr(s).map_err(Error::from)).collect::<Result<_>>()?;
        Ok(VectorFieldSpec { components })
    }

    /// Coordinate basis field `∂_k`.
    pub fn coordinate(dim: usize, k: usize) -> VectorFieldSpec {
        let mut v = VectorFieldSpec::zero(dim);
        v.components[k] = Expr::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn validate(&self, chart: &Chart) -> Result<()> {
        if self.dim() != chart.dim() {
            return Err(Error::Dimension { expected: chart.dim(), got: self.dim() });
        }
        let foreign: Vec<String> = self
            .components
            .iter()
            .flat_map(|c| c.foreign_variables(chart.coords()))
            .map(String::from)
            .collect();
        if !foreign.is_empty() {
            return Err(Error::ForbiddenCoordinate { what: format!("vector field on `{}`", chart.name()), coords: foreign });
        }
        Ok(())
    }

    pub fn eval(&self, chart: &Chart, p: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| chart.eval(c, p)).collect()
    }

    pub fn jets(&self, chart: &Chart, p: &[f64]) -> Result<Vec<Jet2>> {
        self.components.iter().map(|c| chart.jet(c, p)).collect()
    }

    /// `true` when every component is the literal zero.
    pub fn is_literal_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }
}
