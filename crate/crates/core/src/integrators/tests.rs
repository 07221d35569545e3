use super::*;
use crate::diagnostics::{energy_non_increasing, DiagnosticsRecord};
use crate::geometry::{init_ellipse, reconstruct_curve};
use std::f64::consts::PI;

const LB: f64 = 2.0 * PI * 0.2;

fn setup(scheme: Scheme, dt: f64, n: usize, mu: f64) -> (Integrator, GridSpec) {
    let grid = GridSpec::new(n, 1.0, 2 * n, LB).unwrap();
    let params = PhysParams::with_elastic_time(1.0, mu, 1.0, 1.0, LB);
    let integ = Integrator::new(grid, params, SchemeConfig::new(scheme, dt)).unwrap();
    (integ, grid)
}

fn ellipse(grid: &GridSpec, steady: bool) -> StepState {
    let (iface, curve) = init_ellipse(0.32, 0.24, [0.5, 0.5], grid.n_b, LB).unwrap();
    StepState::initial(iface, curve, grid, steady)
}

/// Circle whose arclength derivative is exactly one.
fn rest_circle(grid: &GridSpec, steady: bool) -> StepState {
    let r = LB / (2.0 * PI);
    let (iface, curve) = init_ellipse(r, r, [0.5, 0.5], grid.n_b, LB).unwrap();
    StepState::initial(iface, curve, grid, steady)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn one_step(scheme: Scheme, dt: f64, n: usize, mu: f64) -> StepState {
    let (mut integ, grid) = setup(scheme, dt, n, mu);
    let mut st = ellipse(&grid, scheme.is_steady());
    integ.step(&mut st).unwrap();
    st
}

#[test]
fn names_round_trip() {
    for s in Scheme::ALL {
        assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        assert_eq!(s.to_string(), s.name());
    }
    assert!("nope".parse::<Scheme>().is_err());
    assert_eq!("boundary_integral".parse::<SteadyVelocity>().unwrap(), SteadyVelocity::BoundaryIntegral);
}

#[test]
fn config_validation() {
    assert!(SchemeConfig::new(Scheme::Ssd1Steady, 0.0).validate().is_err());
    let mut c = SchemeConfig::new(Scheme::Ssd1Steady, 0.1);
    c.tol = 1e-3;
    assert!(c.validate().is_err());
    assert!(SchemeConfig::new(Scheme::Ssd1Unsteady, 0.1).rescale);
    assert!(!SchemeConfig::new(Scheme::SecondOrderUnsteady, 0.1).rescale);
}

#[test]
fn rest_circle_is_a_fixed_point() {
    for scheme in Scheme::ALL {
        let (mut integ, grid) = setup(scheme, 0.5, 16, 0.05);
        let st0 = rest_circle(&grid, scheme.is_steady());
        let mut st = st0.clone();
        for _ in 0..3 {
            integ.step(&mut st).unwrap();
        }
        let tol = 1e-10;
        assert!(max_diff(&st.interface.s_alpha, &st0.interface.s_alpha) < tol, "{scheme}");
        assert!(max_diff(&st.interface.phi, &st0.interface.phi) < tol, "{scheme}");
        assert!(max_diff(&st.curve.x, &st0.curve.x) < tol, "{scheme}");
        assert!(max_diff(&st.curve.y, &st0.curve.y) < tol, "{scheme}");
        if let Some(f) = &st.fluid {
            assert!(f.max_speed() < tol, "{scheme}");
        }
        assert_eq!(st.step, 3);
        assert!((st.t - 1.5).abs() < 1e-14);
    }
}

#[test]
fn reference_points_sit_on_the_stepped_curve() {
    for scheme in Scheme::ALL {
        let (dt, mu) = if scheme.is_steady() { (0.1, 1.0) } else { (0.005, 0.05) };
        let st = one_step(scheme, dt, 16, mu);
        let m = st.interface.mid_index();
        let [r0, r1] = st.interface.ref_points;
        assert_eq!([st.curve.x[0], st.curve.y[0]], r0, "{scheme}");
        assert_eq!([st.curve.x[m], st.curve.y[m]], r1, "{scheme}");
    }
}

#[test]
fn rescaling_falls_back_to_one_at_rest() {
    let (mut integ, grid) = setup(Scheme::Ssd1Unsteady, 0.1, 16, 0.05);
    let mut st = rest_circle(&grid, false);
    integ.step(&mut st).unwrap();
    assert_eq!(integ.rescaling(), (Some(1.0), Some(1.0)));
}

#[test]
fn rescaling_is_computed_once() {
    let (mut integ, grid) = setup(Scheme::Ssd1Unsteady, 0.05, 16, 0.05);
    let mut st = ellipse(&grid, false);
    integ.step(&mut st).unwrap();
    let first = integ.rescaling();
    assert!(first.0.unwrap() > 0.0 && first.1.unwrap() > 0.0);
    integ.step(&mut st).unwrap();
    assert_eq!(integ.rescaling(), first);
}

#[test]
fn ssd1_contracts_high_stretch_mode() {
    let n_b = 256;
    let mode = 32.0;
    let eps = 1e-6;
    let dt = 0.01;
    let w = 2.0 * PI / LB;
    let alpha: Vec<f64> = (0..n_b).map(|j| j as f64 * LB / n_b as f64).collect();
    let r = 1.0 / w;
    let iface = InterfaceState {
        s_alpha: alpha.iter().map(|a| 1.0 + eps * (mode * w * a).cos()).collect(),
        phi: vec![0.0; n_b],
        ref_points: [[0.5 + r, 0.5], [0.5 - r, 0.5]],
        lb: LB,
    };
    let curve = reconstruct_curve(&iface);
    let grid = GridSpec::new(64, 1.0, n_b, LB).unwrap();
    let params = PhysParams::with_elastic_time(1.0, 1.0, 1.0, 1.0, LB);
    let mut config = SchemeConfig::new(Scheme::Ssd1Steady, dt);
    config.steady_velocity = SteadyVelocity::BoundaryIntegral;
    let mut integ = Integrator::new(grid, params, config).unwrap();
    let mut st = StepState::initial(iface, curve, &grid, true);
    integ.step(&mut st).unwrap();
    let amp = |s: &[f64]| -> f64 {
        2.0 / n_b as f64 * s.iter().zip(&alpha).map(|(v, a)| (v - 1.0) * (mode * w * a).cos()).sum::<f64>()
    };
    let ratio = amp(&st.interface.s_alpha) / eps;
    let predicted = 1.0 / (1.0 + dt * 0.25 * mode * w);
    assert!((ratio - predicted).abs() < 0.02 * predicted, "{ratio} vs {predicted}");
}

/// The one-step difference of two consistent first-order schemes is at
/// least `O(Δt²)`: `d(Δt)/d(Δt/2) ≥ 4` up to a margin.
fn assert_second_order_gap(a: Scheme, b: Scheme, dt: f64, n: usize, mu: f64) {
    let gap = |dt: f64| {
        let x = one_step(a, dt, n, mu);
        let y = one_step(b, dt, n, mu);
        max_diff(&x.interface.s_alpha, &y.interface.s_alpha).max(max_diff(&x.interface.phi, &y.interface.phi))
    };
    let (g1, g2) = (gap(dt), gap(0.5 * dt));
    let ratio = g1 / g2;
    assert!(ratio > 3.2, "{a} vs {b}: {g1:e} / {g2:e} = {ratio}");
}

#[test]
fn ssd2_steady_consistent_with_ssd1() {
    assert_second_order_gap(Scheme::Ssd2Steady, Scheme::Ssd1Steady, 1e-3, 16, 1.0);
}

#[test]
fn stable_steady_consistent_with_explicit() {
    assert_second_order_gap(Scheme::StableSteady, Scheme::ExplicitSteady, 1e-3, 16, 1.0);
}

#[test]
fn ifrk4_consistent_with_explicit() {
    assert_second_order_gap(Scheme::Ifrk4Steady, Scheme::ExplicitSteady, 1e-3, 16, 1.0);
}

#[test]
fn stable_unsteady_consistent_with_explicit() {
    assert_second_order_gap(Scheme::StableUnsteady, Scheme::ExplicitUnsteady, 1e-3, 16, 0.05);
}

#[test]
fn ssd_unsteady_close_to_explicit_for_small_steps() {
    for scheme in [Scheme::Ssd1Unsteady, Scheme::Ssd2Unsteady] {
        let x = one_step(scheme, 1e-4, 16, 0.05);
        let y = one_step(Scheme::ExplicitUnsteady, 1e-4, 16, 0.05);
        let change =
            max_diff(&y.interface.s_alpha, &ellipse(&GridSpec::new(16, 1.0, 32, LB).unwrap(), false).interface.s_alpha);
        assert!(max_diff(&x.interface.s_alpha, &y.interface.s_alpha) < 1e-2 * change, "{scheme}");
    }
}

#[test]
fn stable_schemes_do_not_gain_energy() {
    for (scheme, dt, mu) in [(Scheme::StableSteady, 1.0, 1.0), (Scheme::StableUnsteady, 0.05, 0.01)] {
        let (mut integ, grid) = setup(scheme, dt, 16, mu);
        let mut st = ellipse(&grid, scheme.is_steady());
        let mut records = vec![DiagnosticsRecord::of(&st, 1.0, 1.0, grid.h(), true)];
        for _ in 0..10 {
            integ.step(&mut st).unwrap();
            records.push(DiagnosticsRecord::of(&st, 1.0, 1.0, grid.h(), true));
        }
        assert!(energy_non_increasing(&records, 1e-12), "{scheme}");
        assert!(records.last().unwrap().total < records[0].total);
    }
}

#[test]
fn second_order_reduces_to_midpoint_for_small_steps() {
    let a = one_step(Scheme::SecondOrderUnsteady, 1e-3, 16, 0.05);
    let b = one_step(Scheme::SecondOrderExplicitUnsteady, 1e-3, 16, 0.05);
    let c = one_step(Scheme::ExplicitUnsteady, 1e-3, 16, 0.05);
    assert!(
        max_diff(&a.interface.s_alpha, &b.interface.s_alpha)
            < 0.1 * max_diff(&b.interface.s_alpha, &c.interface.s_alpha)
    );
}

#[test]
fn large_explicit_step_reports_blowup() {
    let (mut integ, grid) = setup(Scheme::ExplicitSteady, 20.0, 32, 1.0);
    let mut st = ellipse(&grid, true);
    let err = (0..50).find_map(|_| integ.step(&mut st).err()).expect("explicit step should blow up");
    assert!(err.is_instability(), "{err}");
}

#[test]
fn mismatched_state_is_rejected() {
    let (mut integ, grid) = setup(Scheme::ExplicitUnsteady, 0.01, 16, 0.05);
    let mut st = ellipse(&grid, true);
    assert!(integ.step(&mut st).is_err());
}
