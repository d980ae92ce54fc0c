use approx::assert_abs_diff_eq;
use seqwarp_core::fields::*;
use seqwarp_core::fixtures::*;
use seqwarp_core::swp::Block;
use seqwarp_core::{BlockVector, Error, VectorFieldSpec};

fn vf(c: &[&str]) -> VectorFieldSpec {
    VectorFieldSpec::parse(c).unwrap()
}

#[test]
fn cone_geodesic_conserves_speed_and_satisfies_block_equations() {
    let cone = polar_cone();
    let init = GeodesicState::new(0.0, vec![1.0, 0.1, -0.2], vec![0.3, 0.2, 0.1]);
    let traj = integrate_geodesic(&cone, &init, 2.0, 1e-3).unwrap();
    assert_eq!(traj.len(), 2001);
    assert!(traj.exit_time.is_none());
    assert!(traj.max_speed2_drift() < 1e-10);
    let res = geodesic_condition_residuals(&cone, &traj).unwrap();
    assert!(res.max_total() < 1e-6);
    assert!(res.max_block().iter().all(|r| *r < 1e-6));
}

#[test]
fn circle_of_constant_radius_is_not_a_geodesic() {
    // r = 1, θ = t: the r-equation leaves r f (∂θ)² = 1 unbalanced.
    let cone = polar_cone();
    let dt = 1e-3;
    let states = (0..=1000)
        .map(|k| {
            let t = k as f64 * dt;
            GeodesicState::new(t, vec![1.0, t - 0.5, 0.0], vec![0.0, 1.0, 0.0])
        })
        .collect();
    let traj = Trajectory::from_states(&cone, dt, states).unwrap();
    let res = geodesic_condition_residuals(&cone, &traj).unwrap();
    assert_abs_diff_eq!(res.max_block()[0], 1.0, epsilon = 1e-9);
}

#[test]
fn leaving_the_box_truncates_the_trajectory() {
    let s = static_fixture();
    let init = GeodesicState::new(0.0, vec![1.5, 0.0, 0.0], vec![0.2, 0.1, 1.0]);
    let traj = integrate_geodesic(&s, &init, 5.0, 1e-3).unwrap();
    let exit = traj.exit_time.unwrap();
    assert!(exit > 0.0 && exit < 5.0);
    assert!(traj.states.iter().all(|st| s.total().contains(&st.point)));
    assert!(traj.max_speed2_drift() < 1e-9);
}

#[test]
fn geodesic_input_errors() {
    let cone = polar_cone();
    let init = GeodesicState::new(0.0, vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]);
    assert!(matches!(integrate_geodesic(&cone, &init, 1.0, 0.0), Err(Error::StepUnderflow { .. })));
    assert!(integrate_geodesic(&cone, &init, -1.0, 0.1).is_err());
    let outside = GeodesicState::new(0.0, vec![5.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]);
    assert!(integrate_geodesic(&cone, &outside, 1.0, 0.1).is_err());
}

#[test]
fn trajectory_csv_layout() {
    let s = static_fixture();
    let init = GeodesicState::new(0.0, vec![1.5, 0.0, 0.0], vec![0.0, 0.0, 1.0]);
    let traj = integrate_geodesic(&s, &init, 0.01, 1e-3).unwrap();
    let res = geodesic_condition_residuals(&s, &traj).unwrap();
    let csv = trajectory_csv(&s, &traj, &res);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "tau,t,x,y,v_t,v_x,v_y,speed2,res1,res2,res3");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), traj.len());
    let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first.len(), 11);
    // Presentation order puts the time coordinate first.
    assert_eq!(first[1], 0.0);
    assert_eq!(first[2], 1.5);
    assert_eq!(first[4], 1.0);
}

#[test]
fn cone_rotations_are_killing() {
    let cone = polar_cone();
    let samples = cone.samples(50, 42);
    for blocks in [[vf(&["0"]), vf(&["1"]), vf(&["0"])], [vf(&["0"]), vf(&["0"]), vf(&["1"])]] {
        let z = BlockFieldSpec::lifted(&cone, blocks).unwrap();
        let r = killing_check(&cone, &z, &samples, 1e-8).unwrap();
        assert!(r.numeric_pass && r.numeric_max < 1e-12);
        assert!(r.checklist.as_ref().unwrap().all_hold);
        assert!(r.sufficiency_consistent);
    }
}

#[test]
fn radial_dilation_is_not_killing() {
    let cone = polar_cone();
    let z = BlockFieldSpec::lifted(&cone, [vf(&["r"]), vf(&["0"]), vf(&["0"])]).unwrap();
    let r = killing_check(&cone, &z, &cone.samples(50, 42), 1e-8).unwrap();
    assert!(!r.numeric_pass);
    for i in 0..3 {
        assert_abs_diff_eq!(r.per_component_min[i][i], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.per_component_max[i][i], 2.0, epsilon = 1e-12);
    }
    let c = r.checklist.unwrap();
    assert!(!c.components_killing[0] && !c.all_hold);
    assert!(c.zeta1_f > 0.5);
}

#[test]
fn generic_field_has_no_checklist() {
    let cone = polar_cone();
    let z = BlockFieldSpec::generic(&cone, vf(&["0", "1", "0"])).unwrap();
    let r = killing_check(&cone, &z, &cone.samples(10, 42), 1e-8).unwrap();
    assert!(r.numeric_pass && r.checklist.is_none());
    assert!(lie_decomposition_check(&cone, &z, &BlockVector::zeros([1, 1, 1]), &BlockVector::zeros([1, 1, 1]), &[1.0, 0.0, 0.0]).is_err());
}

#[test]
fn lie_decomposition_example() {
    let cone = polar_cone();
    let z = BlockFieldSpec::lifted(&cone, [vf(&["r"]), vf(&["0"]), vf(&["0"])]).unwrap();
    let x = BlockVector::from_total([1, 1, 1], &[0.0, 1.0, 0.0]).unwrap();
    let d = lie_decomposition_check(&cone, &z, &x, &x, &[2.0, 0.0, 0.0]).unwrap();
    assert_abs_diff_eq!(d.oracle, 8.0, epsilon = 1e-12);
    assert_abs_diff_eq!(d.terms[3], 8.0, epsilon = 1e-12);
    assert!(d.residual < 1e-12);
}

#[test]
fn lie_decomposition_on_the_generic_fixture() {
    let s = generic_curved();
    let z = BlockFieldSpec::lifted(&s, [vf(&["cos(b)", "a"]), vf(&["d", "c*d"]), vf(&["w", "1"])]).unwrap();
    let dims = s.dims();
    for (k, p) in s.samples(20, 3).into_iter().enumerate() {
        let x: Vec<f64> = (0..6).map(|i| ((i + k) as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..6).map(|i| ((i * k) as f64 * 0.21).cos()).collect();
        let x = BlockVector::from_total(dims, &x).unwrap();
        let y = BlockVector::from_total(dims, &y).unwrap();
        let d = lie_decomposition_check(&s, &z, &x, &y, &p).unwrap();
        assert!(d.residual < 1e-8 * d.oracle.abs().max(1.0), "{d:?}");
    }
}

#[test]
fn conformal_factors_of_a_killing_field() {
    let cone = polar_cone();
    let z = BlockFieldSpec::lifted(&cone, [vf(&["0"]), vf(&["1"]), vf(&["0"])]).unwrap();
    let r = conformal_factors(&cone, &z, &cone.samples(30, 42), 1e-8).unwrap();
    assert!(r.killing_precondition && r.warning.is_none() && r.pass);
    assert_eq!(r.zeta2_factor_range, (0.0, 0.0));

    let z = BlockFieldSpec::lifted(&cone, [vf(&["r"]), vf(&["0"]), vf(&["0"])]).unwrap();
    let r = conformal_factors(&cone, &z, &cone.samples(30, 42), 1e-8).unwrap();
    assert!(!r.killing_precondition && r.warning.is_some());
    assert_abs_diff_eq!(r.zeta2_factor_range.0, -2.0, epsilon = 1e-12);
}

#[test]
fn killing_momentum_is_conserved() {
    let cone = polar_cone();
    let z = BlockFieldSpec::single(&cone, Block::Two, vf(&["1"])).unwrap();
    let init = GeodesicState::new(0.0, vec![1.0, 0.1, -0.2], vec![0.3, 0.2, 0.1]);
    let traj = integrate_geodesic(&cone, &init, 2.0, 1e-3).unwrap();
    let c = conserved_along_geodesic(&cone, &z, &traj).unwrap();
    assert_eq!(c.series.len(), traj.len());
    assert!(c.max_drift < 1e-10);
    assert_abs_diff_eq!(c.series[0], 0.2, epsilon = 1e-15);
}

#[test]
fn static_time_translation_is_killing() {
    let s = static_fixture();
    let z = BlockFieldSpec::single(&s, Block::Three, vf(&["1"])).unwrap();
    let r = killing_check(&s, &z, &s.samples(50, 42), 1e-8).unwrap();
    assert!(r.numeric_pass && r.checklist.unwrap().all_hold);
}

#[test]
fn position_field_on_the_cone_is_concircular() {
    let cone = polar_cone();
    let samples = cone.samples(50, 42);
    let z = BlockFieldSpec::single(&cone, Block::One, vf(&["r"])).unwrap();
    let r = concircular_check(&cone, &z, &samples, 1e-8).unwrap();
    assert!(r.concircular && r.max_residual < 1e-12);
    assert!(r.conformal_residual < 1e-12);
    let (lo, hi) = r.mu_range();
    assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);

    let suite = concircular_suite(&cone, &z, &samples, 1e-8).unwrap();
    assert_eq!(suite.nonzero, [true, false, false]);
    assert!(!suite.f_constant && !suite.fbar_constant);
    assert!(suite.checks[2].applicable && suite.checks[2].pass == Some(true));
    assert!(!suite.checks[0].applicable);
    assert!(suite.pass);

    let d = BlockFieldSpec::single(&cone, Block::One, vf(&["1"])).unwrap();
    let r = concircular_check(&cone, &d, &samples, 1e-8).unwrap();
    assert!(!r.concircular && r.max_residual > 0.3);
}

#[test]
fn constant_warpings_share_mu() {
    let flat = flat_product();
    let z = BlockFieldSpec::lifted(&flat, [vf(&["2*x", "2*y"]), vf(&["2*z"]), vf(&["2*w"])]).unwrap();
    let suite = concircular_suite(&flat, &z, &flat.samples(30, 42), 1e-8).unwrap();
    assert!(suite.f_constant && suite.fbar_constant);
    assert!(suite.checks[0].applicable && suite.checks[0].pass == Some(true));
    assert!(suite.total.mu.iter().all(|m| (m - 2.0).abs() < 1e-12));
}

#[test]
fn lifted_fields_require_per_block_input() {
    let cone = polar_cone();
    let z = BlockFieldSpec::generic(&cone, vf(&["r", "0", "0"])).unwrap();
    assert!(concircular_suite(&cone, &z, &cone.samples(5, 1), 1e-8).is_err());
    assert!(BlockFieldSpec::single(&cone, Block::One, vf(&["r", "1"])).is_err());
}
