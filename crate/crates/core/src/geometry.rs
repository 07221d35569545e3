//! Interface representation by arclength derivative `s_α` and tangent
//! angle `θ = 2πα/L_b + φ`, with reconstruction of the curve from two
//! reference points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::PeriodicLine;

/// Lagrangian unknowns of the interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceState {
    pub s_alpha: Vec<f64>,
    /// Periodic part of the tangent angle.
    pub phi: Vec<f64>,
    /// Curve positions anchored at `α = 0` and `α = L_b/2`.
    pub ref_points: [[f64; 2]; 2],
    /// Length of the parameter domain.
    pub lb: f64,
}

/// Curve positions at the boundary nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSamples {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Discrete `l²` distance `(Σ|X_j − Y_j|² Δα)^{1/2}`.
    pub fn l2_distance(&self, other: &CurveSamples, d_alpha: f64) -> f64 {
        let s: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .zip(other.x.iter().zip(&other.y))
            .map(|((x1, y1), (x2, y2))| (x1 - x2).powi(2) + (y1 - y2).powi(2))
            .sum();
        (s * d_alpha).sqrt()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> CurveSamples {
        CurveSamples { x: self.x.iter().map(|v| v + dx).collect(), y: self.y.iter().map(|v| v + dy).collect() }
    }
}

impl InterfaceState {
    pub fn n(&self) -> usize {
        self.s_alpha.len()
    }

    pub fn line(&self) -> PeriodicLine {
        PeriodicLine::new(self.n(), self.lb).expect("state has a valid line")
    }

    pub fn d_alpha(&self) -> f64 {
        self.lb / self.n() as f64
    }

    /// `2π/L_b`, the slope of the non-periodic part of `θ`.
    pub fn winding_rate(&self) -> f64 {
        2.0 * PI / self.lb
    }

    /// Node index anchored at `α = L_b/2`.
    pub fn mid_index(&self) -> usize {
        self.n() / 2
    }

    pub fn theta(&self) -> Vec<f64> {
        let w = self.winding_rate() * self.d_alpha();
        self.phi.iter().enumerate().map(|(j, p)| w * j as f64 + p).collect()
    }

    /// `D_Δα θ = 2π/L_b + D_Δα φ`.
    pub fn theta_alpha(&self) -> Vec<f64> {
        let w = self.winding_rate();
        let dphi = self.line().derivative(&self.phi, 1).expect("length checked");
        dphi.into_iter().map(|d| w + d).collect()
    }

    pub fn validate(&self) -> Result<()> {
        PeriodicLine::new(self.n(), self.lb)?;
        if self.phi.len() != self.n() {
            return Err(Error::ShapeMismatch { expected: self.n(), found: self.phi.len() });
        }
        check_positive(&self.s_alpha)?;
        if self.phi.iter().chain(self.ref_points.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite angle or reference point".into()));
        }
        Ok(())
    }

    /// Builds a state from closed-curve samples on a parameter domain of
    /// length `lb`. The curve must be counterclockwise.
    pub fn from_curve(curve: &CurveSamples, lb: f64) -> Result<Self> {
        let n = curve.len();
        let line = PeriodicLine::new(n, lb)?;
        let xa = line.derivative(&curve.x, 1)?;
        let ya = line.derivative(&curve.y, 1)?;
        let s_alpha: Vec<f64> = xa.iter().zip(&ya).map(|(a, b)| a.hypot(*b)).collect();
        if s_alpha.iter().any(|&s| s < 1e-12) {
            return Err(Error::InvalidGeometry("curve has a stationary point".into()));
        }
        let theta = unwrap_angles(&xa, &ya);
        let winding = theta[n - 1] - theta[0] + wrap_pi(theta[0] - theta[n - 1]);
        if (winding - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::InvalidGeometry(format!(
                "tangent winding {winding:.6} is not 2π (curve must be simple and counterclockwise)"
            )));
        }
        let w = 2.0 * PI / lb * line.spacing();
        let phi = theta.iter().enumerate().map(|(j, t)| t - w * j as f64).collect();
        Ok(Self { s_alpha, phi, ref_points: [[curve.x[0], curve.y[0]], [curve.x[n / 2], curve.y[n / 2]]], lb })
    }

    /// Replaces the reference points by the curve positions at their anchors.
    pub fn resync_reference_points(&mut self, curve: &CurveSamples) {
        let m = self.mid_index();
        self.ref_points = [[curve.x[0], curve.y[0]], [curve.x[m], curve.y[m]]];
    }
}

fn check_positive(s: &[f64]) -> Result<()> {
    for (index, &value) in s.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::DegenerateParameterization { index, value });
        }
    }
    Ok(())
}

fn wrap_pi(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Unwrapped `atan2(ya, xa)`.
fn unwrap_angles(xa: &[f64], ya: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xa.len());
    let mut prev = ya[0].atan2(xa[0]);
    out.push(prev);
    for j in 1..xa.len() {
        let raw = ya[j].atan2(xa[j]);
        let next = prev + wrap_pi(raw - prev);
        out.push(next);
        prev = next;
    }
    out
}

/// Ellipse `x = cx + a cos(2πα/L_b)`, `y = cy + b sin(2πα/L_b)` sampled at
/// `n_b` nodes of `[0, L_b)`.
pub fn init_ellipse(a: f64, b: f64, center: [f64; 2], n_b: usize, lb: f64) -> Result<(InterfaceState, CurveSamples)> {
    if !(a > 1e-12 && b > 1e-12) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidGeometry(format!("ellipse axes ({a}, {b}) must be positive")));
    }
    let line = PeriodicLine::new(n_b, lb)?;
    let w = 2.0 * PI / lb;
    let nodes = line.nodes();
    let curve = CurveSamples {
        x: nodes.iter().map(|t| center[0] + a * (w * t).cos()).collect(),
        y: nodes.iter().map(|t| center[1] + b * (w * t).sin()).collect(),
    };
    let state = InterfaceState::from_curve(&curve, lb)?;
    Ok((state, curve))
}

/// Unit tangents `(cos θ, sin θ)` and normals `(−sin θ, cos θ)`.
pub fn tangent_normal(state: &InterfaceState) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let theta = state.theta();
    let tau = theta.iter().map(|t| [t.cos(), t.sin()]).collect();
    let nor = theta.iter().map(|t| [-t.sin(), t.cos()]).collect();
    (tau, nor)
}

/// Force density per unit parameter, returned as `(F_x, F_y)`.
pub fn elastic_force(state: &InterfaceState, s_b: f64) -> (Vec<f64>, Vec<f64>) {
    let ds = state.line().derivative(&state.s_alpha, 1).expect("length checked");
    let ta = state.theta_alpha();
    let theta = state.theta();
    let n = state.n();
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    for j in 0..n {
        let (sn, cs) = theta[j].sin_cos();
        let normal = (state.s_alpha[j] - 1.0) * ta[j];
        fx[j] = s_b * (ds[j] * cs - normal * sn);
        fy[j] = s_b * (ds[j] * sn + normal * cs);
    }
    (fx, fy)
}

/// Right-hand sides `(V_α − θ_α U, (U_α + θ_α V)/s_α)`.
pub fn evolve_salpha_theta_rhs(
    state: &InterfaceState,
    normal_vel: &[f64],
    tangential_vel: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = state.n();
    for v in [normal_vel, tangential_vel] {
        if v.len() != n {
            return Err(Error::ShapeMismatch { expected: n, found: v.len() });
        }
    }
    check_positive(&state.s_alpha)?;
    let line = state.line();
    let dv = line.derivative(tangential_vel, 1)?;
    let du = line.derivative(normal_vel, 1)?;
    let ta = state.theta_alpha();
    let ds = (0..n).map(|j| dv[j] - ta[j] * normal_vel[j]).collect();
    let dth = (0..n).map(|j| (du[j] + tangential_vel[j] * ta[j]) / state.s_alpha[j]).collect();
    Ok((ds, dth))
}

/// Velocity `(V cos θ − U sin θ, V sin θ + U cos θ)` at both anchors.
pub fn reference_velocity(state: &InterfaceState, normal_vel: &[f64], tangential_vel: &[f64]) -> [[f64; 2]; 2] {
    let theta = state.theta();
    let mut out = [[0.0; 2]; 2];
    for (slot, j) in [0, state.mid_index()].into_iter().enumerate() {
        let (sn, cs) = theta[j].sin_cos();
        let (u, v) = (normal_vel[j], tangential_vel[j]);
        out[slot] = [v * cs - u * sn, v * sn + u * cs];
    }
    out
}

/// Forward-Euler update of both reference points.
pub fn update_reference_points(
    state: &InterfaceState,
    normal_vel: &[f64],
    tangential_vel: &[f64],
    dt: f64,
) -> [[f64; 2]; 2] {
    let vel = reference_velocity(state, normal_vel, tangential_vel);
    let mut r = state.ref_points;
    for i in 0..2 {
        r[i][0] += dt * vel[i][0];
        r[i][1] += dt * vel[i][1];
    }
    r
}

/// Relative mismatch between the two reconstructions above which a drift
/// warning is logged.
pub const DRIFT_WARNING: f64 = 1e-3;

/// Curve reconstruction together with the distance between the anchor
/// implied by the first reconstruction and the second reference point.
pub fn reconstruct_with_mismatch(state: &InterfaceState) -> (CurveSamples, f64) {
    let line = state.line();
    let theta = state.theta();
    let fx: Vec<f64> = theta.iter().zip(&state.s_alpha).map(|(t, s)| s * t.cos()).collect();
    let fy: Vec<f64> = theta.iter().zip(&state.s_alpha).map(|(t, s)| s * t.sin()).collect();
    let gx = line.antiderivative(&fx, 0.0).expect("length checked");
    let gy = line.antiderivative(&fy, 0.0).expect("length checked");
    let m = state.mid_index();
    let [r0, r1] = state.ref_points;
    // First reconstruction: r0 + g(α); second: r1 + g(α) − g(α_m).
    let shift_x = 0.5 * (r0[0] + r1[0] - gx[m]);
    let shift_y = 0.5 * (r0[1] + r1[1] - gy[m]);
    let mismatch = (r1[0] - r0[0] - gx[m]).hypot(r1[1] - r0[1] - gy[m]);
    let curve =
        CurveSamples { x: gx.iter().map(|g| g + shift_x).collect(), y: gy.iter().map(|g| g + shift_y).collect() };
    (curve, mismatch)
}

/// Curve positions from `(s_α, θ)` and the two reference points, averaging
/// the reconstructions anchored at each point.
pub fn reconstruct_curve(state: &InterfaceState) -> CurveSamples {
    let (curve, mismatch) = reconstruct_with_mismatch(state);
    let scale: f64 = state.s_alpha.iter().sum::<f64>() * state.d_alpha();
    if mismatch > DRIFT_WARNING * scale {
        log::warn!("reference point reconstructions disagree by {mismatch:.3e}");
    }
    curve
}

/// Signed shoelace area, positive for counterclockwise curves.
pub fn enclosed_area(curve: &CurveSamples) -> f64 {
    let n = curve.len();
    let mut acc = 0.0;
    for j in 0..n {
        let k = (j + 1) % n;
        acc += curve.x[j] * curve.y[k] - curve.x[k] * curve.y[j];
    }
    0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * PI;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn circle_has_uniform_stretch() {
        let (s, _) = init_ellipse(0.3, 0.3, [0.5, 0.5], 64, TWO_PI).unwrap();
        assert!(s.s_alpha.iter().all(|v| (v - 0.3).abs() < 1e-13));
        assert!(s.phi.iter().all(|p| (p - PI / 2.0).abs() < 1e-12));
    }

    #[test]
    fn ellipse_values() {
        let (s, c) = init_ellipse(0.32, 0.24, [0.5, 0.5], 256, TWO_PI).unwrap();
        assert!((s.s_alpha[0] - 0.24).abs() < 1e-13);
        // The shoelace sum carries a relative error of (2π/N)²/6.
        let area = enclosed_area(&reconstruct_curve(&s));
        assert!((area - enclosed_area(&c)).abs() < 1e-10);
        let (_, fine) = init_ellipse(0.32, 0.24, [0.5, 0.5], 1024, TWO_PI).unwrap();
        assert!((enclosed_area(&fine) - 0.241_274_3).abs() < 1e-5);
    }

    #[test]
    fn scaled_parameter_domain() {
        let lb = TWO_PI * 0.2;
        let (s, _) = init_ellipse(0.32, 0.24, [0.5, 0.5], 128, lb).unwrap();
        assert!((s.s_alpha[0] - 0.24 / 0.2).abs() < 1e-12);
        let ta = s.theta_alpha();
        let (_, c) = init_ellipse(0.32, 0.24, [0.5, 0.5], 128, lb).unwrap();
        let r = reconstruct_curve(&s);
        assert!(max_diff(&r.x, &c.x) < 1e-12);
        assert!(ta.iter().all(|t| t > &0.0));
    }

    #[test]
    fn degenerate_axes_rejected() {
        assert!(matches!(init_ellipse(0.0, 0.2, [0.5, 0.5], 64, TWO_PI), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn clockwise_curve_rejected() {
        let (_, c) = init_ellipse(0.3, 0.2, [0.5, 0.5], 64, TWO_PI).unwrap();
        let rev = CurveSamples { x: c.x.iter().rev().copied().collect(), y: c.y.iter().rev().copied().collect() };
        assert!(InterfaceState::from_curve(&rev, TWO_PI).is_err());
    }

    #[test]
    fn theta_matches_unwrapped_atan2() {
        let (s, c) = init_ellipse(0.32, 0.24, [0.5, 0.5], 256, TWO_PI).unwrap();
        let line = s.line();
        let xa = line.derivative(&c.x, 1).unwrap();
        let ya = line.derivative(&c.y, 1).unwrap();
        let th = s.theta();
        for j in 0..256 {
            let d = wrap_pi(th[j] - ya[j].atan2(xa[j]));
            assert!(d.abs() < 1e-8);
        }
    }

    #[test]
    fn tangent_normal_orthonormal() {
        let (s, _) = init_ellipse(0.32, 0.24, [0.5, 0.5], 64, TWO_PI).unwrap();
        let (t, n) = tangent_normal(&s);
        for (a, b) in t.iter().zip(&n) {
            assert!((a[0] * b[0] + a[1] * b[1]).abs() < 1e-15);
            assert!((a[0].hypot(a[1]) - 1.0).abs() < 1e-15);
        }
        let flat = InterfaceState { s_alpha: vec![1.0; 4], phi: vec![0.0; 4], ref_points: [[0.0; 2]; 2], lb: 1e9 };
        let (t, n) = tangent_normal(&flat);
        assert!((t[0][0] - 1.0).abs() < 1e-15 && t[0][1] == 0.0);
        assert!(n[0][0].abs() < 1e-15 && (n[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frenet_relation() {
        let (s, _) = init_ellipse(0.32, 0.24, [0.5, 0.5], 256, TWO_PI).unwrap();
        let (t, n) = tangent_normal(&s);
        let tx: Vec<f64> = t.iter().map(|v| v[0]).collect();
        let ty: Vec<f64> = t.iter().map(|v| v[1]).collect();
        let dtx = s.line().derivative(&tx, 1).unwrap();
        let dty = s.line().derivative(&ty, 1).unwrap();
        let ta = s.theta_alpha();
        for j in 0..256 {
            let k = ta[j] / s.s_alpha[j];
            assert!((dtx[j] / s.s_alpha[j] - k * n[j][0]).abs() < 1e-8);
            assert!((dty[j] / s.s_alpha[j] - k * n[j][1]).abs() < 1e-8);
        }
    }

    #[test]
    fn force_on_circles() {
        let (s, _) = init_ellipse(1.0, 1.0, [0.5, 0.5], 64, TWO_PI).unwrap();
        let (fx, fy) = elastic_force(&s, 3.0);
        assert!(fx.iter().chain(&fy).all(|v| v.abs() < 1e-12));

        let (s, _) = init_ellipse(0.4, 0.4, [0.5, 0.5], 64, TWO_PI).unwrap();
        let (fx, fy) = elastic_force(&s, 2.0);
        let (_, n) = tangent_normal(&s);
        for j in 0..64 {
            let mag = 2.0 * (0.4 - 1.0);
            assert!((fx[j] - mag * n[j][0]).abs() < 1e-12);
            assert!((fy[j] - mag * n[j][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn force_matches_product_rule_derivative() {
        let (s, _) = init_ellipse(0.32, 0.24, [0.5, 0.5], 256, TWO_PI).unwrap();
        let (fx, fy) = elastic_force(&s, 1.0);
        let (t, _) = tangent_normal(&s);
        let tx: Vec<f64> = (0..256).map(|j| (s.s_alpha[j] - 1.0) * t[j][0]).collect();
        let ty: Vec<f64> = (0..256).map(|j| (s.s_alpha[j] - 1.0) * t[j][1]).collect();
        let line = s.line();
        assert!(max_diff(&fx, &line.derivative(&tx, 1).unwrap()) < 1e-8);
        assert!(max_diff(&fy, &line.derivative(&ty, 1).unwrap()) < 1e-8);
        let sx: f64 = fx.iter().sum::<f64>() * s.d_alpha();
        let sy: f64 = fy.iter().sum::<f64>() * s.d_alpha();
        assert!(sx.abs() < 1e-10 && sy.abs() < 1e-10);
    }

    #[test]
    fn rhs_examples() {
        let (s, _) = init_ellipse(0.5, 0.5, [0.5, 0.5], 64, TWO_PI).unwrap();
        let (ds, dth) = evolve_salpha_theta_rhs(&s, &[0.0; 64], &[2.0; 64]).unwrap();
        assert!(ds.iter().all(|v| v.abs() < 1e-13));
        assert!(dth.iter().all(|v| (v - 2.0 / 0.5).abs() < 1e-12));

        let (ds, dth) = evolve_salpha_theta_rhs(&s, &[0.7; 64], &[0.0; 64]).unwrap();
        assert!(ds.iter().all(|v| (v + 0.7).abs() < 1e-12));
        assert!(dth.iter().all(|v| v.abs() < 1e-12));

        let (e, _) = init_ellipse(0.32, 0.24, [0.5, 0.5], 128, TWO_PI).unwrap();
        let th = e.theta();
        let c = 0.3;
        let u: Vec<f64> = th.iter().map(|t| -c * t.sin()).collect();
        let v: Vec<f64> = th.iter().map(|t| c * t.cos()).collect();
        let (ds, _) = evolve_salpha_theta_rhs(&e, &u, &v).unwrap();
        assert!(ds.iter().all(|x| x.abs() < 1e-10));

        let mut bad = e.clone();
        bad.s_alpha[3] = 0.0;
        assert!(matches!(
            evolve_salpha_theta_rhs(&bad, &u, &v),
            Err(Error::DegenerateParameterization { index: 3, .. })
        ));
    }

    fn flat_state(theta0: f64) -> InterfaceState {
        let mut s = InterfaceState {
            s_alpha: vec![1.0; 8],
            phi: vec![theta0; 8],
            ref_points: [[0.1, 0.2], [0.3, 0.4]],
            lb: TWO_PI,
        };
        s.phi[4] = theta0 - PI;
        s
    }

    #[test]
    fn reference_point_updates() {
        let s = flat_state(0.0);
        assert_eq!(update_reference_points(&s, &[0.0; 8], &[0.0; 8], 1.0), s.ref_points);
        let r = update_reference_points(&s, &[0.0; 8], &[1.0; 8], 0.1);
        assert!((r[0][0] - 0.2).abs() < 1e-15 && (r[0][1] - 0.2).abs() < 1e-15);
        let s = flat_state(PI / 2.0);
        let r = update_reference_points(&s, &[1.0; 8], &[0.0; 8], 0.05);
        assert!((r[0][0] - 0.05).abs() < 1e-15 && (r[0][1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn reconstruct_circle_and_ellipse() {
        let r = 0.25;
        let n = 128;
        let s = InterfaceState {
            s_alpha: vec![r; n],
            phi: vec![PI / 2.0; n],
            ref_points: [[0.5 + r, 0.5], [0.5 - r, 0.5]],
            lb: TWO_PI,
        };
        let c = reconstruct_curve(&s);
        for j in 0..n {
            let a = j as f64 * TWO_PI / n as f64;
            assert!((c.x[j] - (0.5 + r * a.cos())).abs() < 1e-10);
            assert!((c.y[j] - (0.5 + r * a.sin())).abs() < 1e-10);
        }
        let (e, orig) = init_ellipse(0.32, 0.24, [0.5, 0.5], 256, TWO_PI).unwrap();
        let c = reconstruct_curve(&e);
        assert!(max_diff(&c.x, &orig.x) < 1e-8 && max_diff(&c.y, &orig.y) < 1e-8);
        let (_, mismatch) = reconstruct_with_mismatch(&e);
        assert!(mismatch < 1e-8);
    }

    #[test]
    fn closure_of_reconstruction() {
        let (e, _) = init_ellipse(0.32, 0.24, [0.5, 0.5], 256, TWO_PI).unwrap();
        let th = e.theta();
        let cx: f64 = th.iter().zip(&e.s_alpha).map(|(t, s)| s * t.cos()).sum::<f64>() * e.d_alpha();
        let cy: f64 = th.iter().zip(&e.s_alpha).map(|(t, s)| s * t.sin()).sum::<f64>() * e.d_alpha();
        assert!(cx.hypot(cy) < 1e-8);
    }

    #[test]
    fn area_examples() {
        let (_, c) = init_ellipse(1.0, 1.0, [0.0, 0.0], 512, TWO_PI).unwrap();
        assert!((enclosed_area(&c) - PI).abs() < 1e-4);
        let rev = CurveSamples { x: c.x.iter().rev().copied().collect(), y: c.y.iter().rev().copied().collect() };
        assert!((enclosed_area(&rev) + enclosed_area(&c)).abs() < 1e-12);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_band_limited(c in prop::collection::vec(-0.02f64..0.02, 6), cx in 0.2f64..0.8) {
            let n = 128;
            let line = PeriodicLine::unit(n).unwrap();
            let a = line.nodes();
            let x: Vec<f64> = a.iter().map(|t| cx + 0.3 * t.cos() + c[0] * (2.0 * t).cos() + c[1] * (3.0 * t).sin() + c[2] * (5.0 * t).cos()).collect();
            let y: Vec<f64> = a.iter().map(|t| 0.5 + 0.25 * t.sin() + c[3] * (2.0 * t).sin() + c[4] * (4.0 * t).cos() + c[5] * (6.0 * t).sin()).collect();
            let curve = CurveSamples { x, y };
            let s = InterfaceState::from_curve(&curve, 2.0 * PI).unwrap();
            let r = reconstruct_curve(&s);
            for j in 0..n {
                prop_assert!((r.x[j] - curve.x[j]).abs() < 1e-8);
                prop_assert!((r.y[j] - curve.y[j]).abs() < 1e-8);
            }
        }

        #[test]
        fn translation_leaves_stretch_rate_zero(cx in -1.0f64..1.0, cy in -1.0f64..1.0, a in 0.2f64..0.32) {
            let (s, _) = init_ellipse(a, 0.24, [0.5, 0.5], 256, 2.0 * PI).unwrap();
            let th = s.theta();
            let u: Vec<f64> = th.iter().map(|t| -cx * t.sin() + cy * t.cos()).collect();
            let v: Vec<f64> = th.iter().map(|t| cx * t.cos() + cy * t.sin()).collect();
            let (ds, _) = evolve_salpha_theta_rhs(&s, &u, &v).unwrap();
            prop_assert!(ds.iter().all(|x| x.abs() < 1e-10));
        }
    }
}
