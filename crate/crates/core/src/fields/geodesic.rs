//! Fixed-step RK4 geodesics and the block form of the geodesic equation.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, LocalGeometry};
use crate::swp::{Block, Swp};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicState {
    pub time: f64,
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl GeodesicState {
    pub fn new(time: f64, point: Vec<f64>, velocity: Vec<f64>) -> GeodesicState {
        GeodesicState { time, point, velocity }
    }
}

/// States at a uniform step, with `ḡ(α′, α′)` per state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<GeodesicState>,
    pub speed2: Vec<f64>,
    /// Set when integration stopped because the curve left the chart box.
    pub exit_time: Option<f64>,
}

impl Trajectory {
    /// Wrap an arbitrary sampled curve (for example a negative control).
    pub fn from_states(swp: &Swp, dt: f64, states: Vec<GeodesicState>) -> Result<Trajectory> {
        for w in states.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(Error::Invalid("trajectory times must be strictly increasing".into()));
            }
        }
        let speed2 = states
            .iter()
            .map(|s| Ok(LocalGeometry::new(swp.total(), &s.point)?.inner(&s.velocity, &s.velocity)))
            .collect::<Result<_>>()?;
        Ok(Trajectory { dt, states, speed2, exit_time: None })
    }

    pub fn max_speed2_drift(&self) -> f64 {
        let s0 = self.speed2.first().copied().unwrap_or(0.0);
        self.speed2.iter().fold(0.0, |m, s| m.max((s - s0).abs()))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn acceleration(swp: &Swp, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let g = LocalGeometry::at_any(swp.total(), x)?;
    Ok(g.christoffel().contract(v, v).into_iter().map(|a| -a).collect())
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi + a * xi).collect()
}

/// One RK4 step of `(x′, v′) = (v, −Γ(x)(v, v))`.
fn rk4_step(swp: &Swp, x: &[f64], v: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let k1x = v.to_vec();
    let k1v = acceleration(swp, x, v)?;
    let x2 = axpy(h / 2.0, &k1x, x);
    let v2 = axpy(h / 2.0, &k1v, v);
    let k2v = acceleration(swp, &x2, &v2)?;
    let x3 = axpy(h / 2.0, &v2, x);
    let v3 = axpy(h / 2.0, &k2v, v);
    let k3v = acceleration(swp, &x3, &v3)?;
    let x4 = axpy(h, &v3, x);
    let v4 = axpy(h, &k3v, v);
    let k4v = acceleration(swp, &x4, &v4)?;
    let n = x.len();
    let xn = (0..n).map(|i| x[i] + h / 6.0 * (k1x[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect();
    let vn = (0..n).map(|i| v[i] + h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])).collect();
    Ok((xn, vn))
}

/// Integrate from `init` to `t_end` with step `dt`.
///
/// The number of steps is `round((t_end − t0) / dt)`. Leaving the chart box
/// ends the run early: the states inside the box are kept and `exit_time`
/// records the time of the first state outside.
pub fn integrate_geodesic(swp: &Swp, init: &GeodesicState, t_end: f64, dt: f64) -> Result<Trajectory> {
    let total = swp.total();
    total.check_point(&init.point)?;
    if init.velocity.len() != total.dim() {
        return Err(Error::Dimension { expected: total.dim(), got: init.velocity.len() });
    }
    if !(dt > 0.0) || init.time + dt == init.time || !dt.is_finite() {
        return Err(Error::StepUnderflow { t: init.time, dt });
    }
    if !(t_end > init.time) {
        return Err(Error::Invalid(format!("t_end {t_end} must exceed the initial time {}", init.time)));
    }
    let steps = ((t_end - init.time) / dt).round() as usize;
    let mut states = vec![init.clone()];
    let mut exit_time = None;
    let (mut x, mut v) = (init.point.clone(), init.velocity.clone());
    for k in 1..=steps {
        let t = init.time + k as f64 * dt;
        let next = rk4_step(swp, &x, &v, dt);
        let (xn, vn) = match next {
            Ok(s) => s,
            // A stage probing outside the box may hit a singular metric.
            Err(_) if !total.contains(&axpy(dt, &v, &x)) => {
                exit_time = Some(t);
                break;
            }
            Err(e) => return Err(e),
        };
        if !total.contains(&xn) {
            exit_time = Some(t);
            break;
        }
        if xn.iter().chain(&vn).any(|c| !c.is_finite()) {
            return Err(Error::Invalid(format!("non-finite state at t = {t}")));
        }
        x = xn;
        v = vn;
        states.push(GeodesicState::new(t, x.clone(), v.clone()));
    }
    let mut traj = Trajectory::from_states(swp, dt, states)?;
    traj.exit_time = exit_time;
    Ok(traj)
}

/// Per-state residuals of the three block equations and of `∇_T T = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicResiduals {
    pub res1: Vec<f64>,
    pub res2: Vec<f64>,
    pub res3: Vec<f64>,
    pub total: Vec<f64>,
}

impl GeodesicResiduals {
    pub fn max_block(&self) -> [f64; 3] {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(*b));
        [m(&self.res1), m(&self.res2), m(&self.res3)]
    }

    pub fn max_total(&self) -> f64 {
        self.total.iter().fold(0.0f64, |a, b| a.max(*b))
    }
}

/// Fourth-order finite differences of the velocity series.
fn accelerations(traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    let s = &traj.states;
    let m = s.len();
    if m < 5 {
        return Err(Error::Invalid(format!("need at least 5 states for residuals, got {m}")));
    }
    let n = s[0].velocity.len();
    let h = traj.dt;
    let comb = |idx: [usize; 5], w: [f64; 5], denom: f64| -> Vec<f64> {
        (0..n).map(|c| (0..5).map(|k| w[k] * s[idx[k]].velocity[c]).sum::<f64>() / (denom * h)).collect()
    };
    let head = [0, 1, 2, 3, 4];
    let tail = [m - 1, m - 2, m - 3, m - 4, m - 5];
    let edge = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let near_edge = [-3.0, -10.0, 18.0, -6.0, 1.0];
    Ok((0..m)
        .map(|i| match i {
            0 => comb(head, edge, 12.0),
            1 => comb(head, near_edge, 12.0),
            _ if i + 1 == m => comb(tail, edge, -12.0),
            _ if i + 2 == m => comb(tail, near_edge, -12.0),
            _ => comb([i - 2, i - 1, i, i + 1, i + 2], [1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        })
        .collect())
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Evaluate the block geodesic conditions along `traj`, with accelerations
/// estimated from the stored velocities.
pub fn geodesic_condition_residuals(swp: &Swp, traj: &Trajectory) -> Result<GeodesicResiduals> {
    let acc = accelerations(traj)?;
    let mut out = GeodesicResiduals { res1: vec![], res2: vec![], res3: vec![], total: vec![] };
    for (s, a) in traj.states.iter().zip(&acc) {
        let p = &s.point;
        let v = |b: Block| &s.velocity[swp.range(b)];
        let a_b = |b: Block| &a[swp.range(b)];
        let geo = |b: Block| LocalGeometry::new(swp.factor(b), swp.project(p, b));
        let (g1, g2, g3) = (geo(Block::One)?, geo(Block::Two)?, geo(Block::Three)?);
        let base = LocalGeometry::new(swp.base(), swp.base_point(p))?;
        let f = g1.scalar_calculus(swp.f())?;
        let fbar = base.scalar_calculus(swp.fbar())?;
        let (v1, v2, v3) = (v(Block::One), v(Block::Two), v(Block::Three));
        let n1 = v1.len();
        let norm2 = g2.inner(v2, v2);
        let norm3 = g3.inner(v3, v3);

        let gam1 = g1.christoffel().contract(v1, v1);
        let r1: Vec<f64> = (0..n1)
            .map(|i| a_b(Block::One)[i] + gam1[i] - f.value * norm2 * f.grad[i] - fbar.value * norm3 * fbar.grad[i])
            .collect();

        let dlnf = f.derivative(v1) / f.value;
        let gam2 = g2.christoffel().contract(v2, v2);
        let r2: Vec<f64> = (0..v2.len())
            .map(|i| a_b(Block::Two)[i] + gam2[i] + 2.0 * dlnf * v2[i] - fbar.value * norm3 * fbar.grad[n1 + i])
            .collect();

        let v12: Vec<f64> = v1.iter().chain(v2).copied().collect();
        let dlnfbar = dot(&fbar.differential, &v12) / fbar.value;
        let gam3 = g3.christoffel().contract(v3, v3);
        let r3: Vec<f64> = (0..v3.len()).map(|i| a_b(Block::Three)[i] + gam3[i] + 2.0 * dlnfbar * v3[i]).collect();

        let total = LocalGeometry::new(swp.total(), p)?;
        let gam = total.christoffel().contract(&s.velocity, &s.velocity);
        let rt: Vec<f64> = a.iter().zip(&gam).map(|(x, y)| x + y).collect();

        out.res1.push(sup(&r1));
        out.res2.push(sup(&r2));
        out.res3.push(sup(&r3));
        out.total.push(sup(&rt));
    }
    Ok(out)
}

/// CSV with columns `t, coords…, v_coords…, speed2, res1, res2, res3` in
/// presentation order, every number printed with 17 significant digits.
/// The parameter column is `tau` when a coordinate is itself called `t`.
pub fn trajectory_csv(swp: &Swp, traj: &Trajectory, res: &GeodesicResiduals) -> String {
    let coords = swp.presented_coords();
    let mut out = String::from(if coords.iter().any(|c| c == "t") { "tau" } else { "t" });
    for c in &coords {
        let _ = write!(out, ",{c}");
    }
    for c in &coords {
        let _ = write!(out, ",v_{c}");
    }
    out.push_str(",speed2,res1,res2,res3\n");
    for (k, s) in traj.states.iter().enumerate() {
        let mut row = vec![s.time];
        row.extend(swp.present(&s.point));
        row.extend(swp.present(&s.velocity));
        row.push(traj.speed2[k]);
        for series in [&res.res1, &res.res2, &res.res3] {
            row.push(series.get(k).copied().unwrap_or(f64::NAN));
        }
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
