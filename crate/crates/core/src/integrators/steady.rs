//! Schemes for steady Stokes flow, plus the affine solves shared with the
//! unsteady two-step scheme.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{add_scaled, frozen_force, Frame, Integrator, StepState};
use crate::coupling::Coupling;
use crate::error::Result;
use crate::geometry::{
    elastic_force, evolve_salpha_theta_rhs, reconstruct_curve, update_reference_points, InterfaceState,
};
use crate::linalg::{dense_solve, gmres, probe_columns};
use crate::spectral::PeriodicLine;
use crate::stokes::{log_kernel_symbol, FluidState};

/// Dense matrix of a real even multiplier on the line.
pub(crate) fn circulant(line: &PeriodicLine, symbol: impl Fn(i64, f64) -> f64) -> DMatrix<f64> {
    let n = line.n;
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let col = line.apply_even(&e0, symbol);
    DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n])
}

/// Dense matrix of the spectral derivative of order `order`.
pub(crate) fn derivative_matrix(line: &PeriodicLine, order: u32) -> DMatrix<f64> {
    let n = line.n;
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let col = line.derivative(&e0, order).expect("length checked");
    DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n])
}

/// `diag(d)·A`.
pub(crate) fn scale_rows(mut a: DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    for (i, di) in d.iter().enumerate() {
        a.row_mut(i).scale_mut(*di);
    }
    a
}

/// `A·diag(d)`.
pub(crate) fn scale_cols(mut a: DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    for (j, dj) in d.iter().enumerate() {
        a.column_mut(j).scale_mut(*dj);
    }
    a
}

impl Integrator {
    /// Solves `op(x) = rhs` for a linear `op`: dense probing for small
    /// systems, restarted GMRES otherwise.
    pub(super) fn solve_linear(
        &self,
        n: usize,
        mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>,
        rhs: &[f64],
        guess: &[f64],
    ) -> Result<Vec<f64>> {
        if n <= self.config.dense_limit {
            let a = probe_columns(n, &mut op)?;
            self.solver.count(|c| c.dense_solves += 1);
            dense_solve(a, rhs)
        } else {
            let sol = gmres(op, rhs, Some(guess), self.config.tol, 50, 10 * n)?;
            self.solver.count(|c| c.krylov_iterations += sol.iterations as u64);
            Ok(sol.x)
        }
    }

    pub(super) fn explicit_steady(&self, state: &StepState, dt: f64) -> Result<StepState> {
        let iface = &state.interface;
        let frame = Frame::of(iface);
        let (fx, fy) = elastic_force(iface, self.params.s_b);
        let (un, ut, speed) = self.steady_velocity(&state.curve, &frame, &fx, &fy)?;
        let (ds, dth) = evolve_salpha_theta_rhs(iface, &un, &ut)?;
        let s1 = add_scaled(&iface.s_alpha, dt, &ds);
        let phi1 = add_scaled(&iface.phi, dt, &dth);
        let refs = update_reference_points(iface, &un, &ut, dt);
        self.assemble(state, s1, phi1, refs, None, speed)
    }

    /// First and second kind small-scale-decomposition schemes.
    pub(super) fn ssd_steady(&self, state: &StepState, dt: f64, second_kind: bool) -> Result<StepState> {
        let iface = &state.interface;
        let line = iface.line();
        let frame = Frame::of(iface);
        let (fx, fy) = elastic_force(iface, self.params.s_b);
        let (un, ut, speed) = self.steady_velocity(&state.curve, &frame, &fx, &fy)?;
        let (ds, _) = evolve_salpha_theta_rhs(iface, &un, &ut)?;
        let c = self.params.s_b / (4.0 * self.params.mu);
        let gamma = stretch_factor(&iface.s_alpha);

        let delta_s = if second_kind {
            let ta = &frame.theta_alpha;
            let log_part = circulant(&line, |k, _| log_kernel_symbol(k, line.length));
            let coupling = scale_cols(scale_rows(log_part, ta), ta) * (self.params.s_b / (4.0 * PI * self.params.mu));
            let a = DMatrix::identity(line.n, line.n) / dt + circulant(&line, |_, w| c * w.abs()) + coupling;
            self.solver.count(|c| c.dense_solves += 1);
            dense_solve(a, &ds)?
        } else {
            line.apply_even(&ds, |_, w| dt / (1.0 + dt * c * w.abs()))
        };
        let s1 = add_scaled(&iface.s_alpha, 1.0, &delta_s);
        InterfaceState { s_alpha: s1.clone(), ..iface.clone() }.validate()?;

        let du = line.derivative(&un, 1)?;
        let q: Vec<f64> = (0..line.n).map(|j| (du[j] + frame.theta_alpha[j] * ut[j]) / s1[j]).collect();
        let phi1 = if second_kind {
            let adv =
                scale_rows(derivative_matrix(&line, 1), &ut.iter().zip(&s1).map(|(v, s)| v / s).collect::<Vec<_>>());
            let a = DMatrix::identity(line.n, line.n) / dt + circulant(&line, |_, w| c * gamma * w.abs()) - adv;
            self.solver.count(|c| c.dense_solves += 1);
            add_scaled(&iface.phi, 1.0, &dense_solve(a, &q)?)
        } else {
            add_scaled(&iface.phi, 1.0, &line.apply_even(&q, |_, w| dt / (1.0 + dt * c * gamma * w.abs())))
        };
        let refs = update_reference_points(iface, &un, &ut, dt);
        self.assemble(state, s1, phi1, refs, None, speed)
    }

    /// Right-hand sides and reference-point velocity at an intermediate state.
    fn steady_rhs(&self, iface: &InterfaceState, curve: Option<&crate::geometry::CurveSamples>) -> Result<StageRhs> {
        iface.validate()?;
        let owned;
        let curve = match curve {
            Some(c) => c,
            None => {
                owned = reconstruct_curve(iface);
                &owned
            }
        };
        let frame = Frame::of(iface);
        let (fx, fy) = elastic_force(iface, self.params.s_b);
        let (un, ut, speed) = self.steady_velocity(curve, &frame, &fx, &fy)?;
        let (ds, dphi) = evolve_salpha_theta_rhs(iface, &un, &ut)?;
        let refvel = crate::geometry::reference_velocity(iface, &un, &ut);
        Ok(StageRhs { ds, dphi, refvel, speed })
    }

    /// Integrating-factor RK4 (Lawson form) with the leading-order decay
    /// rates `η|κ|` and `γη|κ|` factored out.
    pub(super) fn ifrk4_steady(&self, state: &StepState, dt: f64) -> Result<StepState> {
        let iface = &state.interface;
        let line = iface.line();
        let c = self.params.s_b / (4.0 * self.params.mu);
        let gamma = stretch_factor(&iface.s_alpha);
        let es = |f: &[f64]| line.apply_even(f, |_, w| (-0.5 * dt * c * w.abs()).exp());
        let ep = |f: &[f64]| line.apply_even(f, |_, w| (-0.5 * dt * c * gamma * w.abs()).exp());
        // Nonlinear remainders N = rhs − L y with L = diag(−η, −ξ).
        let remainder = |st: &InterfaceState, r: &StageRhs| -> (Vec<f64>, Vec<f64>) {
            let ns = add_scaled(&r.ds, 1.0, &line.apply_even(&st.s_alpha, |_, w| c * w.abs()));
            let np = add_scaled(&r.dphi, 1.0, &line.apply_even(&st.phi, |_, w| c * gamma * w.abs()));
            (ns, np)
        };
        let stage = |s: Vec<f64>, p: Vec<f64>, refvel_sum: [[f64; 2]; 2], h: f64| InterfaceState {
            s_alpha: s,
            phi: p,
            ref_points: shift_refs(iface.ref_points, refvel_sum, h),
            lb: iface.lb,
        };

        let r1 = self.steady_rhs(iface, Some(&state.curve))?;
        let (k1s, k1p) = remainder(iface, &r1);
        let y2 = stage(
            es(&add_scaled(&iface.s_alpha, 0.5 * dt, &k1s)),
            ep(&add_scaled(&iface.phi, 0.5 * dt, &k1p)),
            r1.refvel,
            0.5 * dt,
        );
        let r2 = self.steady_rhs(&y2, None)?;
        let (k2s, k2p) = remainder(&y2, &r2);
        let es_s = es(&iface.s_alpha);
        let ep_p = ep(&iface.phi);
        let y3 = stage(add_scaled(&es_s, 0.5 * dt, &k2s), add_scaled(&ep_p, 0.5 * dt, &k2p), r2.refvel, 0.5 * dt);
        let r3 = self.steady_rhs(&y3, None)?;
        let (k3s, k3p) = remainder(&y3, &r3);
        let y4 = stage(es(&add_scaled(&es_s, dt, &k3s)), ep(&add_scaled(&ep_p, dt, &k3p)), r3.refvel, dt);
        let r4 = self.steady_rhs(&y4, None)?;
        let (k4s, k4p) = remainder(&y4, &r4);

        let combine = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64], e: &dyn Fn(&[f64]) -> Vec<f64>| {
            let inner = e(&add_scaled(y, dt / 6.0, k1));
            let mid: Vec<f64> = inner.iter().zip(k2.iter().zip(k3)).map(|(a, (b, c))| a + dt / 3.0 * (b + c)).collect();
            add_scaled(&e(&mid), dt / 6.0, k4)
        };
        let s1 = combine(&iface.s_alpha, &k1s, &k2s, &k3s, &k4s, &es);
        let phi1 = combine(&iface.phi, &k1p, &k2p, &k3p, &k4p, &ep);
        let mut refs = iface.ref_points;
        for i in 0..2 {
            for d in 0..2 {
                refs[i][d] +=
                    dt / 6.0 * (r1.refvel[i][d] + 2.0 * r2.refvel[i][d] + 2.0 * r3.refvel[i][d] + r4.refvel[i][d]);
            }
        }
        let speed = r1.speed.max(r2.speed).max(r3.speed).max(r4.speed);
        self.assemble(state, s1, phi1, refs, None, speed)
    }

    pub(super) fn stable_steady(&self, state: &StepState, dt: f64) -> Result<StepState> {
        self.stable_two_step(state, dt)
    }

    /// Two-step scheme with energy-stable implicit `s_α` and `θ` solves.
    /// Spreading and interpolation use the configuration at the start of
    /// the step.
    pub(super) fn stable_two_step(&self, state: &StepState, dt: f64) -> Result<StepState> {
        let iface = &state.interface;
        let line = iface.line();
        let n = line.n;
        let frame = Frame::of(iface);
        let ta = &frame.theta_alpha;
        let coupling = Coupling::new(&state.curve, &self.grid);
        let s_b = self.params.s_b;
        let (rho, mu) = (self.params.rho, self.params.mu);
        let prev = state.fluid.as_ref();
        let u_n = prev.map(|f| (f.u.as_slice(), f.v.as_slice()));

        // Grid velocity for a boundary force; `with_history` includes uⁿ.
        let fluid = |fx: &[f64], fy: &[f64], with_history: bool, pressure: bool| -> Result<FluidState> {
            let (gx, gy) = (coupling.spread(fx), coupling.spread(fy));
            match prev {
                None => self.solver.steady_solve(&gx, &gy, mu, false, pressure),
                Some(_) => self.solver.unsteady_solve(
                    if with_history { u_n } else { None },
                    &gx,
                    &gy,
                    rho,
                    mu,
                    dt,
                    1.0,
                    pressure,
                ),
            }
        };
        let boundary = |f: &FluidState| frame.project(&coupling.interpolate(&f.u), &coupling.interpolate(&f.v));

        // Step 1: s_α with θ frozen.
        let s_map = |ds: &[f64], excess: &[f64], history: bool| -> Result<Vec<f64>> {
            let (fx, fy) = frame.force(ds, excess, ta, s_b);
            let (un, ut) = boundary(&fluid(&fx, &fy, history, false)?);
            let dv = line.derivative(&ut, 1)?;
            Ok((0..n).map(|j| dv[j] - ta[j] * un[j]).collect())
        };
        let zeros = vec![0.0; n];
        let minus_one = vec![-1.0; n];
        let c1 = s_map(&zeros, &minus_one, true)?;
        let rhs1 = add_scaled(&iface.s_alpha, dt, &c1);
        let op1 = |x: &[f64]| -> Result<Vec<f64>> {
            let lx = s_map(&line.derivative(x, 1)?, x, false)?;
            Ok(add_scaled(x, -dt, &lx))
        };
        let s1 = self.solve_linear(n, op1, &rhs1, &iface.s_alpha)?;
        InterfaceState { s_alpha: s1.clone(), ..iface.clone() }.validate()?;

        let (fx, fy) = frozen_force(&line, &s1, ta, &frame, s_b);
        let u1 = fluid(&fx, &fy, true, prev.is_some())?;
        let (un1, ut1) = boundary(&u1);

        // Step 2: φ with the normal force evaluated at θ^{n+1}.
        let ds1 = line.derivative(&s1, 1)?;
        let excess: Vec<f64> = s1.iter().map(|s| s - 1.0).collect();
        let w = vec![iface.winding_rate(); n];
        let phi_map = |ds: &[f64], theta_alpha: &[f64], history: bool| -> Result<Vec<f64>> {
            let (fx, fy) = frame.force(ds, &excess, theta_alpha, s_b);
            let (un, ut) = boundary(&fluid(&fx, &fy, history, false)?);
            let du = line.derivative(&un, 1)?;
            Ok((0..n).map(|j| (du[j] + ta[j] * ut[j]) / s1[j]).collect())
        };
        let c2 = phi_map(&ds1, &w, true)?;
        let rhs2 = add_scaled(&iface.phi, dt, &c2);
        let op2 = |x: &[f64]| -> Result<Vec<f64>> {
            let lx = phi_map(&zeros, &line.derivative(x, 1)?, false)?;
            Ok(add_scaled(x, -dt, &lx))
        };
        let phi1 = self.solve_linear(n, op2, &rhs2, &iface.phi)?;

        let refs = update_reference_points(iface, &un1, &ut1, dt);
        let speed = u1.max_speed();
        let fluid_next = prev.map(|_| u1);
        self.assemble(state, s1, phi1, refs, fluid_next, speed)
    }
}

struct StageRhs {
    ds: Vec<f64>,
    dphi: Vec<f64>,
    refvel: [[f64; 2]; 2],
    speed: f64,
}

/// `max(0, max_α(1 − 1/s_α))`.
pub(crate) fn stretch_factor(s: &[f64]) -> f64 {
    s.iter().map(|v| 1.0 - 1.0 / v).fold(0.0, f64::max)
}

fn shift_refs(r: [[f64; 2]; 2], vel: [[f64; 2]; 2], h: f64) -> [[f64; 2]; 2] {
    let mut out = r;
    for i in 0..2 {
        for d in 0..2 {
            out[i][d] += h * vel[i][d];
        }
    }
    out
}
