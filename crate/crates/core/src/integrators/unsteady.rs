//! Schemes for unsteady Stokes flow.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::steady::{circulant, derivative_matrix, scale_cols, scale_rows};
use super::{add_scaled, average, frozen_force, Frame, Integrator, StepState};
use crate::bessel::{k0, ssd_symbol_s, ssd_symbol_second_order, ssd_symbol_t, SsdSymbolParams};
use crate::coupling::Coupling;
use crate::error::Result;
use crate::geometry::{
    elastic_force, evolve_salpha_theta_rhs, reference_velocity, update_reference_points, InterfaceState,
};
use crate::linalg::dense_solve;
use crate::spectral::PeriodicLine;
use crate::stokes::{periodic_distance, FluidState};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Which rescaling coefficient to fetch.
#[derive(Clone, Copy)]
enum Coefficient {
    Stretch,
    Bend,
}

fn max_of(a: &[f64]) -> f64 {
    a.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Symbol parameters frozen at `s`, with a non-negative excess stretch.
/// Maxima below this are treated as roundoff when forming rescaling ratios.
const RESCALE_FLOOR: f64 = 1e-10;

fn symbol_params(integ: &Integrator, dt: f64, s: &[f64]) -> Result<SsdSymbolParams> {
    let p = &integ.params;
    let mut sp = SsdSymbolParams::from_state(p.s_b, p.mu, p.rho, dt, s)?;
    sp.s_max_excess = sp.s_max_excess.max(0.0);
    sp.gamma = sp.gamma.max(0.0);
    Ok(sp)
}

/// Dense form of the smooth unsteady kernel term acting on `s^{n+1} − sⁿ`:
/// `−(S_bΔt/(2πρ)) diag(θ_α/s²) K Δα D² diag(θ_α)` with
/// `K_ij = K₀(λ s_i |α_i − α_j|) + ln((L_b/π)|sin(π(α_i − α_j)/L_b)|)`.
fn smooth_kernel_matrix(line: &PeriodicLine, s: &[f64], theta_alpha: &[f64], lambda: f64, scale: f64) -> DMatrix<f64> {
    let n = line.n;
    let da = line.spacing();
    let lb = line.length;
    let k = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -(0.5 * lambda * s[i]).ln() - EULER_GAMMA
        } else {
            let d = (i as f64 - j as f64) * da;
            let wrapped = d.abs().min(lb - d.abs());
            k0(lambda * s[i] * wrapped) + periodic_distance(d, lb).ln()
        }
    });
    let weights: Vec<f64> = theta_alpha.iter().zip(s).map(|(t, si)| -scale * t / (si * si)).collect();
    let inner = k * da * derivative_matrix(line, 2);
    scale_cols(scale_rows(inner, &weights), theta_alpha)
}

impl Integrator {
    /// `compute` returns the measured and predicted maxima. Ratios of
    /// roundoff-sized values (a state at rest) are replaced by 1.
    fn rescale_coefficient(&mut self, which: Coefficient, compute: impl FnOnce() -> (f64, f64)) -> f64 {
        if !self.config.rescale {
            return 1.0;
        }
        let slot = match which {
            Coefficient::Stretch => &mut self.config.c_v,
            Coefficient::Bend => &mut self.config.c_u,
        };
        if let Some(c) = *slot {
            return c;
        }
        let (measured, predicted) = compute();
        let mut c = measured / predicted;
        if !(measured > RESCALE_FLOOR && predicted > RESCALE_FLOOR && c.is_finite()) {
            log::warn!("rescaling coefficient {c} is unusable; using 1");
            c = 1.0;
        }
        *slot = Some(c);
        c
    }

    fn interface_velocity(&self, c: &Coupling, frame: &Frame, f: &FluidState) -> (Vec<f64>, Vec<f64>) {
        frame.project(&c.interpolate(&f.u), &c.interpolate(&f.v))
    }

    fn fluid_response(
        &self,
        c: &Coupling,
        u_n: &FluidState,
        fx: &[f64],
        fy: &[f64],
        dt: f64,
        theta: f64,
        pressure: bool,
    ) -> Result<FluidState> {
        let p = &self.params;
        self.solver.unsteady_solve(
            Some((&u_n.u, &u_n.v)),
            &c.spread(fx),
            &c.spread(fy),
            p.rho,
            p.mu,
            dt,
            theta,
            pressure,
        )
    }

    pub(super) fn explicit_unsteady(&mut self, state: &StepState, dt: f64) -> Result<StepState> {
        let iface = &state.interface;
        let u_n = state.fluid.as_ref().expect("unsteady state");
        let frame = Frame::of(iface);
        let c = Coupling::new(&state.curve, &self.grid);
        let (fx, fy) = elastic_force(iface, self.params.s_b);
        let u1 = self.fluid_response(&c, u_n, &fx, &fy, dt, 1.0, true)?;
        let (un, ut) = self.interface_velocity(&c, &frame, &u1);
        let (ds, dth) = evolve_salpha_theta_rhs(iface, &un, &ut)?;
        let s1 = add_scaled(&iface.s_alpha, dt, &ds);
        let phi1 = add_scaled(&iface.phi, dt, &dth);
        let refs = update_reference_points(iface, &un, &ut, dt);
        let speed = u1.max_speed();
        self.assemble(state, s1, phi1, refs, Some(u1), speed)
    }

    pub(super) fn stable_unsteady(&mut self, state: &StepState, dt: f64) -> Result<StepState> {
        self.stable_two_step(state, dt)
    }

    /// First-order small-scale-decomposition scheme; the second kind adds
    /// the dense low-frequency terms.
    pub(super) fn ssd_unsteady(&mut self, state: &StepState, dt: f64, second_kind: bool) -> Result<StepState> {
        let iface = &state.interface;
        let u_n = state.fluid.as_ref().expect("unsteady state");
        let line = iface.line();
        let n = line.n;
        let frame = Frame::of(iface);
        let ta = frame.theta_alpha.clone();
        let c = Coupling::new(&state.curve, &self.grid);
        let s_b = self.params.s_b;

        // Intermediate velocity with the force fully explicit.
        let (fx, fy) = elastic_force(iface, s_b);
        let ustar = self.fluid_response(&c, u_n, &fx, &fy, dt, 1.0, false)?;
        let (us_n, us_t) = self.interface_velocity(&c, &frame, &ustar);
        let dvs = line.derivative(&us_t, 1)?;
        let e: Vec<f64> = (0..n).map(|j| dvs[j] - ta[j] * us_n[j]).collect();

        let p = symbol_params(self, dt, &iface.s_alpha)?;
        let t_sym = |w: f64| ssd_symbol_t(w, &p);
        let c_v = self.rescale_coefficient(Coefficient::Stretch, || {
            (max_of(&dvs), max_of(&line.apply_even(&iface.s_alpha, |_, w| t_sym(w))))
        });
        let delta_s = if second_kind {
            let scale = s_b * dt / (2.0 * PI * self.params.rho);
            let m = smooth_kernel_matrix(&line, &iface.s_alpha, &ta, p.lambda, scale);
            let a = DMatrix::identity(n, n) / dt - circulant(&line, |_, w| c_v * t_sym(w)) - m;
            self.solver.count(|c| c.dense_solves += 1);
            dense_solve(a, &e)?
        } else {
            line.apply_even(&e, |_, w| dt / (1.0 - dt * c_v * t_sym(w)))
        };
        let s1 = add_scaled(&iface.s_alpha, 1.0, &delta_s);
        InterfaceState { s_alpha: s1.clone(), ..iface.clone() }.validate()?;

        let (fx1, fy1) = frozen_force(&line, &s1, &ta, &frame, s_b);
        let u1 = self.fluid_response(&c, u_n, &fx1, &fy1, dt, 1.0, true)?;
        let (un1, ut1) = self.interface_velocity(&c, &frame, &u1);

        let s_sym = |w: f64| ssd_symbol_s(w, &p);
        let c_u = self.rescale_coefficient(Coefficient::Bend, || {
            let lead = line.apply_symbol_unchecked(&iface.phi, |k, w| {
                if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -s_sym(w) / w)
                }
            });
            (max_of(&un1), max_of(&lead))
        });
        let s1_min = s1.iter().copied().fold(f64::INFINITY, f64::min);
        let du = line.derivative(&un1, 1)?;
        let q: Vec<f64> = (0..n).map(|j| (du[j] + ta[j] * ut1[j]) / s1[j]).collect();
        let delta_phi = if second_kind {
            let adv_w: Vec<f64> = ut1.iter().zip(&s1).map(|(v, s)| v / s).collect();
            let a = DMatrix::identity(n, n) / dt
                - circulant(&line, |_, w| c_u * s_sym(w) / s1_min)
                - scale_rows(derivative_matrix(&line, 1), &adv_w);
            self.solver.count(|c| c.dense_solves += 1);
            dense_solve(a, &q)?
        } else {
            line.apply_even(&q, |_, w| dt / (1.0 - dt * c_u * s_sym(w) / s1_min))
        };
        let phi1 = add_scaled(&iface.phi, 1.0, &delta_phi);
        let refs = update_reference_points(iface, &un1, &ut1, dt);
        let speed = u1.max_speed();
        self.assemble(state, s1, phi1, refs, Some(u1), speed)
    }

    /// Midpoint/trapezoidal scheme: a half step of the first-order scheme,
    /// then a full step with spreading and interpolation at the midpoint
    /// configuration. With `implicit = false` all elastic terms are explicit.
    pub(super) fn second_order(&mut self, state: &StepState, dt: f64, implicit: bool) -> Result<StepState> {
        let half = if implicit {
            self.ssd_unsteady(state, 0.5 * dt, false)?
        } else {
            self.explicit_unsteady(state, 0.5 * dt)?
        };
        let iface = &state.interface;
        let u_n = state.fluid.as_ref().expect("unsteady state");
        let mid = &half.interface;
        let line = iface.line();
        let n = line.n;
        let frame = Frame::of(mid);
        let ta = frame.theta_alpha.clone();
        let c = Coupling::new(&half.curve, &self.grid);
        let s_b = self.params.s_b;

        let (fx, fy) = elastic_force(mid, s_b);
        let ustar = self.fluid_response(&c, u_n, &fx, &fy, dt, 0.5, false)?;
        let ubar_star = FluidState { u: average(&ustar.u, &u_n.u), v: average(&ustar.v, &u_n.v), p: Vec::new() };
        let (us_n, us_t) = self.interface_velocity(&c, &frame, &ubar_star);
        let dvs = line.derivative(&us_t, 1)?;
        let e: Vec<f64> = (0..n).map(|j| dvs[j] - ta[j] * us_n[j]).collect();

        let (c_v, c_u) = (self.config.c_v.unwrap_or(1.0), self.config.c_u.unwrap_or(1.0));
        let p = symbol_params(self, dt, &mid.s_alpha)?;
        // Crank–Nicolson in the leading term, explicit remainder at the midpoint.
        let cn = |x: &[f64], rhs: &[f64], x_mid: &[f64], sym: &dyn Fn(f64) -> f64| -> Vec<f64> {
            let a = line.apply_even(x, |_, w| (1.0 / dt + 0.5 * sym(w)) / (1.0 / dt - 0.5 * sym(w)));
            let b = line.apply_even(rhs, |_, w| 1.0 / (1.0 / dt - 0.5 * sym(w)));
            let m = line.apply_even(x_mid, |_, w| sym(w) / (1.0 / dt - 0.5 * sym(w)));
            (0..n).map(|j| a[j] + b[j] - m[j]).collect()
        };
        let t_sym = |w: f64| if implicit { c_v * ssd_symbol_second_order(w, &p).0 } else { 0.0 };
        let s_sym = |w: f64| if implicit { c_u * ssd_symbol_second_order(w, &p).1 } else { 0.0 };

        let s1 = cn(&iface.s_alpha, &e, &mid.s_alpha, &t_sym);
        InterfaceState { s_alpha: s1.clone(), ..iface.clone() }.validate()?;
        let s_bar = average(&s1, &iface.s_alpha);
        let (fx1, fy1) = frozen_force(&line, &s_bar, &ta, &frame, s_b);
        let u1 = self.fluid_response(&c, u_n, &fx1, &fy1, dt, 0.5, true)?;
        let ubar = FluidState { u: average(&u1.u, &u_n.u), v: average(&u1.v, &u_n.v), p: Vec::new() };
        let (un, ut) = self.interface_velocity(&c, &frame, &ubar);
        let du = line.derivative(&un, 1)?;
        let q: Vec<f64> = (0..n).map(|j| (du[j] + ta[j] * ut[j]) / mid.s_alpha[j]).collect();
        let phi1 = cn(&iface.phi, &q, &mid.phi, &s_sym);

        let vel = reference_velocity(mid, &un, &ut);
        let mut refs = iface.ref_points;
        for i in 0..2 {
            for d in 0..2 {
                refs[i][d] += dt * vel[i][d];
            }
        }
        let speed = u1.max_speed();
        self.assemble(state, s1, phi1, refs, Some(u1), speed)
    }
}
