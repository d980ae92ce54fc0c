//! Reference manifolds.

use std::f64::consts::PI;

use crate::expr::{parse_expr, Expr};
use crate::geometry::Chart;
use crate::spacetimes::{grw, standard_static, IntervalChart};
use crate::swp::{assemble, Swp, Warping};

fn e(s: &str) -> Expr {
    parse_expr(s).expect("fixture expression")
}

fn line(name: &str, coord: &str, lo: f64, hi: f64) -> Chart {
    Chart::parse_diagonal(name, &[coord], &["1"], &[(lo, hi)]).expect("fixture chart")
}

/// Euclidean plane `(x, y)` on `(−1, 1)²`.
pub fn euclidean_plane() -> Chart {
    Chart::parse_diagonal("R2", &["x", "y"], &["1", "1"], &[(-1.0, 1.0), (-1.0, 1.0)]).expect("fixture chart")
}

/// Polar plane `dr² + r²dθ²`.
pub fn polar_plane() -> Chart {
    Chart::parse_diagonal("polar", &["r", "theta"], &["1", "r^2"], &[(0.5, 3.0), (-PI, PI)]).expect("fixture chart")
}

/// Unit sphere `dθ² + sin²θ dφ²` away from the poles.
pub fn unit_s2() -> Chart {
    Chart::parse_diagonal("S2", &["theta", "phi"], &["1", "sin(theta)^2"], &[(0.3, 2.8), (-PI, PI)])
        .expect("fixture chart")
}

/// Lorentzian line with metric `−dt²`.
pub fn time_line(lo: f64, hi: f64) -> Chart {
    Chart::parse_diagonal("I", &["t"], &["-1"], &[(lo, hi)]).expect("fixture chart")
}

/// `R² × R × R` with `f = f̄ = 1`.
pub fn flat_product() -> Swp {
    assemble(
        euclidean_plane().rename("M1"),
        line("M2", "z", -1.0, 1.0),
        line("M3", "w", -1.0, 1.0),
        Warping::Sequential { f: Expr::one(), fbar: Expr::one() },
    )
    .expect("flat product")
}

/// `dr² + r²dθ² + r²dφ²` with `f = f̄ = r`.
pub fn polar_cone() -> Swp {
    assemble(
        line("M1", "r", 0.5, 3.0),
        line("M2", "theta", -PI, PI),
        line("M3", "phi", -PI, PI),
        Warping::Sequential { f: e("r"), fbar: e("r") },
    )
    .expect("polar cone")
}

/// Unit 3-sphere `dψ² + sin²ψ dθ² + sin²ψ sin²θ dφ²`.
pub fn round_s3() -> Swp {
    assemble(
        line("M1", "psi", 0.3, 2.8),
        line("M2", "theta", 0.3, 2.8),
        line("M3", "phi", -PI, PI),
        Warping::Sequential { f: e("sin(psi)"), fbar: e("sin(psi)*sin(theta)") },
    )
    .expect("round S3")
}

/// Unit 5-sphere with a unit 3-sphere as third factor.
pub fn round_s5() -> Swp {
    let s3 = Chart::parse_diagonal(
        "S3",
        &["a", "b", "c"],
        &["1", "sin(a)^2", "sin(a)^2*sin(b)^2"],
        &[(0.3, 2.8), (0.3, 2.8), (-PI, PI)],
    )
    .expect("fixture chart");
    assemble(
        line("M1", "psi", 0.3, 2.8),
        line("M2", "theta", 0.3, 2.8),
        s3,
        Warping::Sequential { f: e("sin(psi)"), fbar: e("sin(psi)*sin(theta)") },
    )
    .expect("round S5")
}

/// Curved factors of dimension two each, a non-diagonal third factor and
/// warpings without special structure.
pub fn generic_curved() -> Swp {
    let m1 = Chart::parse_diagonal("M1", &["a", "b"], &["1", "sin(a)^2"], &[(0.3, 2.8), (-PI, PI)])
        .expect("fixture chart");
    let m2 = Chart::parse_diagonal("M2", &["c", "d"], &["1/d^2", "1/d^2"], &[(-1.0, 1.0), (0.5, 2.0)])
        .expect("fixture chart");
    let m3 = Chart::parse("M3", &["u", "w"], &[&["1 + w^2", "0.3"], &["0.3", "2 + sin(u)"]], &[(-1.0, 1.0), (-1.0, 1.0)])
        .expect("fixture chart");
    assemble(
        m1,
        m2,
        m3,
        Warping::Sequential { f: e("2 + 0.5*cos(a) + 0.3*sin(b)"), fbar: e("1.5 + 0.4*sin(a)*cos(c) + 0.2*d") },
    )
    .expect("generic fixture")
}

/// `−x²dt² + dx² + x²dy²`, a standard static space-time over `(1, 2) × S¹`.
pub fn static_fixture() -> Swp {
    standard_static(
        &IntervalChart::time(-1.0, 1.0),
        line("M1", "x", 1.0, 2.0),
        line("M2", "y", -PI, PI),
        e("x"),
        e("x"),
    )
    .expect("static fixture")
}

/// `−dt² + e^{2t}(dx² + dy²)`.
pub fn grw_fixture() -> Swp {
    grw(&IntervalChart::time(-1.0, 1.0), e("exp(t)"), line("M1", "x", -1.0, 1.0), line("M2", "y", -1.0, 1.0), Expr::one())
        .expect("GRW fixture")
}

/// The three fixtures every theorem is checked on.
pub fn core_fixtures() -> Vec<(&'static str, Swp)> {
    vec![("flat_product", flat_product()), ("polar_cone", polar_cone()), ("round_s3", round_s3())]
}
