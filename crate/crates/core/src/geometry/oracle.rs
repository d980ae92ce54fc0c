//! Brute-force coordinate formulas. Metric derivatives come from exact
//! second-order jets, so nothing here carries finite-difference error.

use nalgebra::DMatrix;

use super::chart::{Chart, VectorFieldSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// Relative non-degeneracy threshold: `|det g| > DEGENERACY * max|g_ij|^dim`.
pub const DEGENERACY: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MetricAt {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub det: f64,
}

/// `Γ^k_ij`, stored `[k][i][j]`, symmetric in `(i, j)`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.data[(k * n + i) * n + j]
    }

    /// `Γ^k_ij u^i v^j`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(k, i, j) * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }
}

/// `R^l_kij` with `R(∂_i, ∂_j)∂_k = R^l_kij ∂_l`, stored `[l][k][i][j]`.
#[derive(Debug, Clone)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, l: usize, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.data[((l * n + k) * n + i) * n + j]
    }

    /// Components of `R(X, Y)Z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|l| {
                let mut s = 0.0;
                for k in 0..n {
                    if z[k] == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            s += self.get(l, k, i, j) * x[i] * y[j] * z[k];
                        }
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct Curvature {
    pub riemann: Riemann,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

/// Derivative data of a scalar field at a point.
#[derive(Debug, Clone)]
pub struct ScalarCalculus {
    pub value: f64,
    /// Partial derivatives `∂_i s`.
    pub differential: Vec<f64>,
    /// `g^{ij} ∂_j s`.
    pub grad: Vec<f64>,
    /// Covariant Hessian `∂_i ∂_j s − Γ^k_ij ∂_k s`.
    pub hess: DMatrix<f64>,
    pub lap: f64,
    /// `g(grad s, grad s)`; negative values are possible for indefinite metrics.
    pub gradnorm2: f64,
}

impl ScalarCalculus {
    pub fn hess_form(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.hess, x, y)
    }

    /// Directional derivative `X(s)`.
    pub fn derivative(&self, x: &[f64]) -> f64 {
        dot(&self.differential, x)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn bilinear(m: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            s += m[(i, j)] * x[i] * y[j];
        }
    }
    s
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

/// Metric, inverse metric, metric derivatives and Christoffel symbols at one
/// point of one chart. The curvature and field operations share this cache.
#[derive(Debug, Clone)]
pub struct LocalGeometry<'c> {
    chart: &'c Chart,
    point: Vec<f64>,
    metric: MetricAt,
    /// `∂_k g_ij`, `[k][i][j]`.
    dg: Vec<f64>,
    /// `∂_k ∂_l g_ij`, `[k][l][i][j]`.
    ddg: Vec<f64>,
    /// Christoffel symbols of the first kind `Γ_{l,ij}`, `[l][i][j]`.
    first: Vec<f64>,
    gamma: Christoffel,
}

impl<'c> LocalGeometry<'c> {
    /// Checks that `p` is inside the chart box.
    pub fn new(chart: &'c Chart, p: &[f64]) -> Result<LocalGeometry<'c>> {
        chart.check_point(p)?;
        LocalGeometry::at_any(chart, p)
    }

    /// Same as [`LocalGeometry::new`] without the box check; used by
    /// integrator stages that may probe just past the boundary.
    pub(crate) fn at_any(chart: &'c Chart, p: &[f64]) -> Result<LocalGeometry<'c>> {
        let n = chart.dim();
        if p.len() != n {
            return Err(Error::Dimension { expected: n, got: p.len() });
        }
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![0.0; n * n * n];
        let mut ddg = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in i..n {
                let e = chart.metric_expr(i, j);
                if e.is_zero() {
                    continue;
                }
                let jet = chart.jet(e, p)?;
                g[(i, j)] = jet.value;
                g[(j, i)] = jet.value;
                for k in 0..n {
                    dg[(k * n + i) * n + j] = jet.grad[k];
                    dg[(k * n + j) * n + i] = jet.grad[k];
                    for l in 0..n {
                        let h = jet.hess(k, l);
                        ddg[((k * n + l) * n + i) * n + j] = h;
                        ddg[((k * n + l) * n + j) * n + i] = h;
                    }
                }
            }
        }
        let metric = invert_metric(chart, p, g)?;

        let d = |k: usize, i: usize, j: usize| dg[(k * n + i) * n + j];
        let mut first = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                    first[(l * n + i) * n + j] = v;
                    first[(l * n + j) * n + i] = v;
                }
            }
        }
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += metric.g_inv[(k, l)] * first[(l * n + i) * n + j];
                    }
                    data[(k * n + i) * n + j] = s;
                    data[(k * n + j) * n + i] = s;
                }
            }
        }
        Ok(LocalGeometry {
            chart,
            point: p.to_vec(),
            metric,
            dg,
            ddg,
            first,
            gamma: Christoffel { dim: n, data },
        })
    }

    pub fn chart(&self) -> &Chart {
        self.chart
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn metric(&self) -> &MetricAt {
        &self.metric
    }

    pub fn christoffel(&self) -> &Christoffel {
        &self.gamma
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        bilinear(&self.metric.g, x, y)
    }

    /// Raise an index: `g^{ij} w_j`.
    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        mat_vec(&self.metric.g_inv, w)
    }

    /// Lower an index: `g_ij v^j`.
    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.metric.g, v)
    }

    fn dgamma(&self) -> Vec<f64> {
        // ∂_m Γ^k_ij = ∂_m g^{kl} Γ_{l,ij} + g^{kl} ∂_m Γ_{l,ij},
        // ∂_m g^{kl} = -g^{ka} ∂_m g_ab g^{bl}.
        let n = self.dim();
        let gi = &self.metric.g_inv;
        let dg = |k: usize, i: usize, j: usize| self.dg[(k * n + i) * n + j];
        let ddg = |k: usize, l: usize, i: usize, j: usize| self.ddg[((k * n + l) * n + i) * n + j];
        let mut dginv = vec![0.0; n * n * n];
        for m in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            s += gi[(k, a)] * dg(m, a, b) * gi[(b, l)];
                        }
                    }
                    dginv[(m * n + k) * n + l] = -s;
                }
            }
        }
        let mut out = vec![0.0; n * n * n * n];
        for m in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            let dfirst = 0.5 * (ddg(m, i, j, l) + ddg(m, j, i, l) - ddg(m, l, i, j));
                            s += dginv[(m * n + k) * n + l] * self.first[(l * n + i) * n + j] + gi[(k, l)] * dfirst;
                        }
                        out[((m * n + k) * n + i) * n + j] = s;
                        out[((m * n + k) * n + j) * n + i] = s;
                    }
                }
            }
        }
        out
    }

    pub fn curvature(&self) -> Curvature {
        let n = self.dim();
        let dgam = self.dgamma();
        let dg = |m: usize, k: usize, i: usize, j: usize| dgam[((m * n + k) * n + i) * n + j];
        let gam = |k: usize, i: usize, j: usize| self.gamma.get(k, i, j);
        let mut data = vec![0.0; n * n * n * n];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let mut v = dg(i, l, j, k) - dg(j, l, i, k);
                        for m in 0..n {
                            v += gam(l, i, m) * gam(m, j, k) - gam(l, j, m) * gam(m, i, k);
                        }
                        data[((l * n + k) * n + i) * n + j] = v;
                        data[((l * n + k) * n + j) * n + i] = -v;
                    }
                }
            }
        }
        let riemann = Riemann { dim: n, data };
        let mut ricci = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                ricci[(i, j)] = (0..n).map(|m| riemann.get(m, i, m, j)).sum();
            }
        }
        let scalar = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.metric.g_inv[(i, j)] * ricci[(i, j)])
            .sum();
        Curvature { riemann, ricci, scalar }
    }

    pub fn scalar_calculus(&self, s: &Expr) -> Result<ScalarCalculus> {
        let n = self.dim();
        let jet = self.chart.jet(s, &self.point)?;
        let differential = jet.grad.clone();
        let grad = self.raise(&differential);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut v = jet.hess(i, j);
                for k in 0..n {
                    v -= self.gamma.get(k, i, j) * differential[k];
                }
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let gi = &self.metric.g_inv;
        let mut lap = 0.0;
        for i in 0..n {
            for j in 0..n {
                lap += gi[(i, j)] * hess[(i, j)];
            }
        }
        let gradnorm2 = dot(&differential, &grad);
        Ok(ScalarCalculus { value: jet.value, differential, grad, hess, lap, gradnorm2 })
    }

    pub fn covariant_derivative(&self, v: &VectorFieldSpec, dir: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.dim() != n {
            return Err(Error::Dimension { expected: n, got: v.dim() });
        }
        if dir.len() != n {
            return Err(Error::Dimension { expected: n, got: dir.len() });
        }
        let jets = v.jets(self.chart, &self.point)?;
        let values: Vec<f64> = jets.iter().map(|j| j.value).collect();
        let gv = self.gamma.contract(dir, &values);
        Ok((0..n).map(|k| dot(dir, &jets[k].grad) + gv[k]).collect())
    }

    /// `(∇_{∂_i} ζ)^k` as rows `i`.
    pub fn covariant_jacobian(&self, z: &VectorFieldSpec) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.covariant_derivative(z, &e)
            })
            .collect()
    }

    pub fn lie_derivative_metric(&self, z: &VectorFieldSpec) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let nabla = self.covariant_jacobian(z)?;
        // a_ij = g(∇_{∂_i} ζ, ∂_j)
        let lowered: Vec<Vec<f64>> = nabla.iter().map(|row| self.lower(row)).collect();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = lowered[i][j] + lowered[j][i];
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }
}

fn invert_metric(chart: &Chart, p: &[f64], g: DMatrix<f64>) -> Result<MetricAt> {
    let n = g.nrows();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lu = g.clone().lu();
    let det = lu.determinant();
    let threshold = DEGENERACY * scale.powi(n as i32);
    let degenerate = || Error::DegenerateMetric { chart: chart.name().to_string(), point: p.to_vec(), det, threshold };
    if !(det.abs() > threshold) || scale == 0.0 {
        return Err(degenerate());
    }
    let inv = lu.try_inverse().ok_or_else(degenerate)?;
    let g_inv = (&inv + inv.transpose()) * 0.5;
    Ok(MetricAt { g, g_inv, det })
}

pub fn metric_at(c: &Chart, p: &[f64]) -> Result<MetricAt> {
    Ok(LocalGeometry::new(c, p)?.metric)
}

pub fn christoffel_at(c: &Chart, p: &[f64]) -> Result<Christoffel> {
    Ok(LocalGeometry::new(c, p)?.gamma)
}

pub fn curvature_at(c: &Chart, p: &[f64]) -> Result<Curvature> {
    Ok(LocalGeometry::new(c, p)?.curvature())
}

pub fn scalar_calculus_at(c: &Chart, p: &[f64], s: &Expr) -> Result<ScalarCalculus> {
    LocalGeometry::new(c, p)?.scalar_calculus(s)
}

pub fn covariant_derivative_at(c: &Chart, v: &VectorFieldSpec, dir: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    LocalGeometry::new(c, p)?.covariant_derivative(v, dir)
}

pub fn lie_derivative_metric_at(c: &Chart, z: &VectorFieldSpec, p: &[f64]) -> Result<DMatrix<f64>> {
    LocalGeometry::new(c, p)?.lie_derivative_metric(z)
}
