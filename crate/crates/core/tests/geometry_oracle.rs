use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use seqwarp_core::fixtures::{euclidean_plane, polar_plane, unit_s2};
use seqwarp_core::geometry::*;
use seqwarp_core::sampling::sample_box;
use seqwarp_core::{parse_expr, Chart, Error, Expr};

fn line(metric: &str) -> Chart {
    Chart::parse_diagonal("L", &["t"], &[metric], &[(-1.0, 1.0)]).unwrap()
}

fn field(c: &[&str]) -> VectorFieldSpec {
    VectorFieldSpec::parse(c).unwrap()
}

#[test]
fn metric_examples() {
    let m = metric_at(&euclidean_plane(), &[0.2, -0.4]).unwrap();
    assert_eq!(m.g, DMatrix::identity(2, 2));
    assert_eq!(m.g_inv, DMatrix::identity(2, 2));
    assert_eq!(m.det, 1.0);

    let m = metric_at(&line("-1"), &[0.0]).unwrap();
    assert_eq!((m.g[(0, 0)], m.g_inv[(0, 0)], m.det), (-1.0, -1.0, -1.0));

    let m = metric_at(&polar_plane(), &[2.0, 0.3]).unwrap();
    assert_eq!(m.g, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0])));
    assert_abs_diff_eq!(m.g_inv[(1, 1)], 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(m.det, 4.0, epsilon = 1e-12);
}

#[test]
fn inverse_is_accurate_on_a_full_metric() {
    let c = Chart::parse(
        "full",
        &["u", "w"],
        &[&["1 + w^2", "0.3"], &["0.3", "2 + sin(u)"]],
        &[(-1.0, 1.0), (-1.0, 1.0)],
    )
    .unwrap();
    for p in sample_box(c.bounds(), 20, 3) {
        let m = metric_at(&c, &p).unwrap();
        let id = &m.g * &m.g_inv;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}

#[test]
fn degenerate_metric_is_rejected() {
    let c = Chart::parse("deg", &["x", "y"], &[&["1", "1"], &["1", "1"]], &[(0.0, 1.0), (0.0, 1.0)]).unwrap();
    assert!(matches!(metric_at(&c, &[0.5, 0.5]), Err(Error::DegenerateMetric { .. })));
}

#[test]
fn points_outside_the_box_are_rejected() {
    assert!(matches!(metric_at(&polar_plane(), &[0.1, 0.0]), Err(Error::OutOfBox { .. })));
}

#[test]
fn christoffel_examples() {
    let g = christoffel_at(&euclidean_plane(), &[0.1, 0.2]).unwrap();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.get(k, i, j), 0.0);
            }
        }
    }
    let g = christoffel_at(&polar_plane(), &[2.0, 0.0]).unwrap();
    assert_abs_diff_eq!(g.get(0, 1, 1), -2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(g.get(1, 0, 1), 0.5, epsilon = 1e-15);
    assert_eq!(g.get(1, 0, 1), g.get(1, 1, 0));

    let g = christoffel_at(&unit_s2(), &[FRAC_PI_2, 0.0]).unwrap();
    assert_abs_diff_eq!(g.get(0, 1, 1), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(g.get(1, 0, 1), 0.0, epsilon = 1e-15);
}

#[test]
fn flat_charts_have_zero_curvature() {
    for c in [euclidean_plane(), line("-1")] {
        for p in sample_box(c.bounds(), 20, 1) {
            let k = curvature_at(&c, &p).unwrap();
            assert!(k.riemann.max_abs() < 1e-10);
            assert!(k.scalar.abs() < 1e-10);
        }
    }
    for p in sample_box(polar_plane().bounds(), 50, 1) {
        assert!(curvature_at(&polar_plane(), &p).unwrap().riemann.max_abs() < 1e-9);
    }
}

#[test]
fn unit_sphere_has_scalar_curvature_two() {
    let s2 = unit_s2();
    for p in sample_box(s2.bounds(), 50, 42) {
        assert_abs_diff_eq!(curvature_at(&s2, &p).unwrap().scalar, 2.0, epsilon = 1e-8);
    }
}

#[test]
fn scalar_calculus_examples() {
    let s = scalar_calculus_at(&unit_s2(), &[1.0, 0.5], &Expr::constant(3.0)).unwrap();
    assert_eq!((s.lap, s.gradnorm2), (0.0, 0.0));
    assert!(s.grad.iter().all(|g| *g == 0.0));

    let r2 = parse_expr("x^2 + y^2").unwrap();
    let s = scalar_calculus_at(&euclidean_plane(), &[0.5, 0.0], &r2).unwrap();
    assert_abs_diff_eq!(s.lap, 4.0, epsilon = 1e-14);
    let s = scalar_calculus_at(&Chart::parse_diagonal("R2", &["x", "y"], &["1", "1"], &[(-2.0, 2.0); 2]).unwrap(), &[1.0, 0.0], &r2).unwrap();
    assert_abs_diff_eq!(s.gradnorm2, 4.0, epsilon = 1e-14);

    let cos = parse_expr("cos(theta)").unwrap();
    for p in sample_box(unit_s2().bounds(), 20, 5) {
        let s = scalar_calculus_at(&unit_s2(), &p, &cos).unwrap();
        assert_abs_diff_eq!(s.lap, -2.0 * p[0].cos(), epsilon = 1e-12);
    }
}

#[test]
fn gradnorm_is_signed_in_lorentzian_signature() {
    let s = scalar_calculus_at(&line("-1"), &[0.3], &parse_expr("t").unwrap()).unwrap();
    assert_eq!(s.gradnorm2, -1.0);
}

#[test]
fn covariant_derivative_examples() {
    let v = covariant_derivative_at(&euclidean_plane(), &field(&["1", "2"]), &[0.3, 1.0], &[0.0, 0.0]).unwrap();
    assert_eq!(v, vec![0.0, 0.0]);

    let v = covariant_derivative_at(&polar_plane(), &field(&["r", "0"]), &[0.0, 1.0], &[2.0, 0.4]).unwrap();
    assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-15);

    let v = covariant_derivative_at(&unit_s2(), &field(&["0", "1"]), &[1.0, 0.0], &[FRAC_PI_4, 0.0]).unwrap();
    assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-12);
}

#[test]
fn covariant_derivative_is_linear_and_leibniz() {
    let c = unit_s2();
    let y = field(&["sin(phi)", "theta*cos(phi)"]);
    let h = parse_expr("1 + theta^2").unwrap();
    let hy = VectorFieldSpec::new(y.components.iter().map(|e| h.clone().mul(e.clone())).collect());
    for p in sample_box(c.bounds(), 10, 9) {
        let (x1, x2) = ([0.3, -0.7], [1.1, 0.4]);
        let sum = [x1[0] + 2.0 * x2[0], x1[1] + 2.0 * x2[1]];
        let a = covariant_derivative_at(&c, &y, &x1, &p).unwrap();
        let b = covariant_derivative_at(&c, &y, &x2, &p).unwrap();
        let s = covariant_derivative_at(&c, &y, &sum, &p).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(s[k], a[k] + 2.0 * b[k], epsilon = 1e-12);
        }
        // ∇_X(hY) = X(h)Y + h∇_X Y
        let hj = c.jet(&h, &p).unwrap();
        let yv = y.eval(&c, &p).unwrap();
        let lhs = covariant_derivative_at(&c, &hy, &x1, &p).unwrap();
        let xh = hj.grad[0] * x1[0] + hj.grad[1] * x1[1];
        for k in 0..2 {
            assert_abs_diff_eq!(lhs[k], xh * yv[k] + hj.value * a[k], epsilon = 1e-12);
        }
    }
}

#[test]
fn lie_derivative_examples() {
    let p = [0.3, -0.6];
    let l = lie_derivative_metric_at(&euclidean_plane(), &VectorFieldSpec::zero(2), &p).unwrap();
    assert_eq!(l, DMatrix::zeros(2, 2));
    let l = lie_derivative_metric_at(&euclidean_plane(), &field(&["-y", "x"]), &p).unwrap();
    assert_eq!(l, DMatrix::zeros(2, 2));
    let l = lie_derivative_metric_at(&euclidean_plane(), &field(&["x", "y"]), &p).unwrap();
    assert_eq!(l, DMatrix::identity(2, 2) * 2.0);
}

fn curved_charts() -> Vec<Chart> {
    vec![
        unit_s2(),
        polar_plane(),
        Chart::parse(
            "full",
            &["u", "w"],
            &[&["1 + w^2", "0.3"], &["0.3", "2 + sin(u)"]],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap(),
        Chart::parse_diagonal(
            "warped3",
            &["a", "b", "c"],
            &["1", "(2 + cos(a))^2", "exp(a*b)"],
            &[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap(),
        Chart::parse_diagonal("lorentz", &["t", "x"], &["-1", "exp(2*t)"], &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap(),
    ]
}

#[test]
fn curvature_symmetries() {
    for c in curved_charts() {
        let n = c.dim();
        for p in sample_box(c.bounds(), 10, 11) {
            let g = LocalGeometry::new(&c, &p).unwrap();
            let gam = g.christoffel();
            let k = g.curvature();
            let r = &k.riemann;
            for a in 0..n {
                for b in 0..n {
                    for i in 0..n {
                        assert_eq!(gam.get(a, b, i), gam.get(a, i, b));
                        for j in 0..n {
                            assert_eq!(r.get(a, b, i, j), -r.get(a, b, j, i));
                            let bianchi = r.get(a, b, i, j) + r.get(a, i, j, b) + r.get(a, j, b, i);
                            assert!(bianchi.abs() < 1e-9, "{}: Bianchi {bianchi}", c.name());
                        }
                    }
                    let scale = k.ricci.amax().max(1.0);
                    assert!((k.ricci[(a, b)] - k.ricci[(b, a)]).abs() < 1e-10 * scale);
                }
            }
        }
    }
}

/// Rebuild the Riemann tensor from central differences of the Christoffel
/// symbols and compare it with the jet-based one.
#[test]
fn curvature_matches_finite_difference_rebuild() {
    let h = 1e-4;
    for c in curved_charts() {
        let n = c.dim();
        for p in sample_box(c.bounds(), 5, 13) {
            let gam = christoffel_at(&c, &p).unwrap();
            let dgam: Vec<Christoffel> = (0..n)
                .flat_map(|m| {
                    let mut q = p.clone();
                    q[m] += h;
                    let plus = christoffel_at(&c, &q).unwrap();
                    q[m] -= 2.0 * h;
                    let minus = christoffel_at(&c, &q).unwrap();
                    [plus, minus]
                })
                .collect();
            let d = |m: usize, l: usize, i: usize, j: usize| {
                (dgam[2 * m].get(l, i, j) - dgam[2 * m + 1].get(l, i, j)) / (2.0 * h)
            };
            let r = curvature_at(&c, &p).unwrap().riemann;
            for l in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut v = d(i, l, j, k) - d(j, l, i, k);
                            for m in 0..n {
                                v += gam.get(l, i, m) * gam.get(m, j, k) - gam.get(l, j, m) * gam.get(m, i, k);
                            }
                            assert!((v - r.get(l, k, i, j)).abs() < 1e-4, "{}: {v} vs {}", c.name(), r.get(l, k, i, j));
                        }
                    }
                }
            }
        }
    }
}

fn metric_pairing(c: &Chart, y: &VectorFieldSpec, z: &VectorFieldSpec) -> Expr {
    let n = c.dim();
    let mut e = Expr::zero();
    for i in 0..n {
        for j in 0..n {
            e = e.add(c.metric_expr(i, j).clone().mul(y.components[i].clone()).mul(z.components[j].clone()));
        }
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_compatibility(
        which in 0usize..5,
        coeffs in prop::collection::vec(-1.0f64..1.0, 12),
        x in prop::collection::vec(-1.0f64..1.0, 3),
        seed in 0u64..1000,
    ) {
        let c = &curved_charts()[which];
        let n = c.dim();
        let coords = c.coords();
        let mk = |off: usize| VectorFieldSpec::new(
            (0..n)
                .map(|k| {
                    let v = Expr::var(coords[k].clone());
                    let w = Expr::var(coords[(k + 1) % n].clone());
                    Expr::constant(coeffs[off + k])
                        .add(v.mul(Expr::apply(seqwarp_core::expr::Func::Sin, w)).scale(coeffs[off + 3 + k]))
                })
                .collect(),
        );
        let (y, z) = (mk(0), mk(6));
        let p = &sample_box(c.bounds(), 1, seed)[0];
        let g = LocalGeometry::new(c, p).unwrap();
        let x = &x[..n];
        let pairing = c.jet(&metric_pairing(c, &y, &z), p).unwrap();
        let lhs: f64 = pairing.grad.iter().zip(x).map(|(a, b)| a * b).sum();
        let ny = g.covariant_derivative(&y, x).unwrap();
        let nz = g.covariant_derivative(&z, x).unwrap();
        let rhs = g.inner(&ny, &z.eval(c, p).unwrap()) + g.inner(&y.eval(c, p).unwrap(), &nz);
        prop_assert!((lhs - rhs).abs() < 1e-8, "{} vs {}", lhs, rhs);
    }
}
