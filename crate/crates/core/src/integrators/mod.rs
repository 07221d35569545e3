//! Time-stepping schemes for the interface–fluid system.
//!
//! Every scheme advances a [`StepState`] by one step of size `Δt`. Steady
//! schemes carry no fluid state; the velocity is recomputed from the current
//! force each step.

mod steady;
mod unsteady;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coupling::Coupling;
use crate::error::{Error, Result};
use crate::geometry::{reconstruct_curve, CurveSamples, InterfaceState};
use crate::nondim::PhysParams;
use crate::spectral::PeriodicLine;
use crate::stokes::{steady_velocity_on_interface, FluidSolver, FluidState, GridSpec};

/// Scheme identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ExplicitSteady,
    Ssd1Steady,
    Ssd2Steady,
    Ifrk4Steady,
    StableSteady,
    ExplicitUnsteady,
    Ssd1Unsteady,
    Ssd2Unsteady,
    StableUnsteady,
    SecondOrderUnsteady,
    /// Midpoint/trapezoidal scheme with every elastic term explicit.
    SecondOrderExplicitUnsteady,
}

impl Scheme {
    pub const ALL: [Scheme; 11] = [
        Scheme::ExplicitSteady,
        Scheme::Ssd1Steady,
        Scheme::Ssd2Steady,
        Scheme::Ifrk4Steady,
        Scheme::StableSteady,
        Scheme::ExplicitUnsteady,
        Scheme::Ssd1Unsteady,
        Scheme::Ssd2Unsteady,
        Scheme::StableUnsteady,
        Scheme::SecondOrderUnsteady,
        Scheme::SecondOrderExplicitUnsteady,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ExplicitSteady => "explicit_steady",
            Scheme::Ssd1Steady => "ssd1_steady",
            Scheme::Ssd2Steady => "ssd2_steady",
            Scheme::Ifrk4Steady => "ifrk4_steady",
            Scheme::StableSteady => "stable_steady",
            Scheme::ExplicitUnsteady => "explicit_unsteady",
            Scheme::Ssd1Unsteady => "ssd1_unsteady",
            Scheme::Ssd2Unsteady => "ssd2_unsteady",
            Scheme::StableUnsteady => "stable_unsteady",
            Scheme::SecondOrderUnsteady => "second_order_unsteady",
            Scheme::SecondOrderExplicitUnsteady => "second_order_explicit_unsteady",
        }
    }

    pub fn is_steady(self) -> bool {
        matches!(
            self,
            Scheme::ExplicitSteady
                | Scheme::Ssd1Steady
                | Scheme::Ssd2Steady
                | Scheme::Ifrk4Steady
                | Scheme::StableSteady
        )
    }

    /// Schemes whose discrete energy is provably non-increasing.
    pub fn is_energy_stable(self) -> bool {
        matches!(self, Scheme::StableSteady | Scheme::StableUnsteady)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config { field: "scheme".into(), reason: format!("unknown scheme `{s}`") })
    }
}

/// How steady schemes obtain the interface velocity from the force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyVelocity {
    /// Spread, periodic steady Stokes solve on the grid, interpolate.
    Grid,
    /// Free-space Stokeslet integral along the interface.
    BoundaryIntegral,
}

impl FromStr for SteadyVelocity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Self::Grid),
            "boundary_integral" => Ok(Self::BoundaryIntegral),
            _ => Err(Error::Config { field: "steady_velocity".into(), reason: format!("unknown mode `{s}`") }),
        }
    }
}

/// Largest boundary size for which implicit systems are assembled densely.
pub const DENSE_PROBE_LIMIT: usize = 256;

/// Ratio of the maximum speed to its first observed value that counts as
/// blowup.
pub const BLOWUP_SPEED_RATIO: f64 = 1e6;

/// Per-run scheme settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt: f64,
    /// Relative residual target of iterative solves.
    pub tol: f64,
    /// Rescale the leading-order unsteady terms by first-step ratios. On by
    /// default for the first-order semi-implicit schemes only: the ratios
    /// measured from a fluid at rest are small at small Δt, and the
    /// Crank–Nicolson leading term of the second-order scheme is unstable
    /// with them.
    pub rescale: bool,
    pub c_v: Option<f64>,
    pub c_u: Option<f64>,
    pub steady_velocity: SteadyVelocity,
    /// Boundary sizes up to this value use dense column probing.
    pub dense_limit: usize,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, dt: f64) -> Self {
        Self {
            scheme,
            dt,
            tol: 1e-10,
            rescale: matches!(scheme, Scheme::Ssd1Unsteady | Scheme::Ssd2Unsteady),
            c_v: None,
            c_u: None,
            steady_velocity: SteadyVelocity::Grid,
            dense_limit: DENSE_PROBE_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-4) {
            return Err(Error::param("tol", format!("{} must lie in (0, 1e-4]", self.tol)));
        }
        Ok(())
    }
}

/// Everything a scheme advances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepState {
    pub interface: InterfaceState,
    pub curve: CurveSamples,
    /// Grid velocity; absent for steady flow.
    pub fluid: Option<FluidState>,
    pub t: f64,
    pub step: u64,
    /// Largest velocity magnitude seen in the last step.
    pub max_speed: f64,
}

impl StepState {
    /// Initial state for a scheme: the fluid starts at rest for unsteady flow.
    pub fn initial(interface: InterfaceState, curve: CurveSamples, grid: &GridSpec, steady: bool) -> Self {
        Self { interface, curve, fluid: (!steady).then(|| FluidState::zeros(grid)), t: 0.0, step: 0, max_speed: 0.0 }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        self.interface.validate()?;
        if self.interface.n() != grid.n_b || self.curve.len() != grid.n_b {
            return Err(Error::ShapeMismatch { expected: grid.n_b, found: self.interface.n() });
        }
        if let Some(f) = &self.fluid {
            for a in [&f.u, &f.v] {
                if a.len() != grid.cells() {
                    return Err(Error::ShapeMismatch { expected: grid.cells(), found: a.len() });
                }
            }
        }
        Ok(())
    }
}

/// Tangent, normal and `D_Δα θ` of a frozen configuration.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub tau: Vec<[f64; 2]>,
    pub nor: Vec<[f64; 2]>,
    pub theta_alpha: Vec<f64>,
}

impl Frame {
    pub fn of(iface: &InterfaceState) -> Self {
        let (tau, nor) = crate::geometry::tangent_normal(iface);
        Self { tau, nor, theta_alpha: iface.theta_alpha() }
    }

    /// `S_b (ds τ + excess·θ_α n)` with a given `θ_α`.
    pub fn force(&self, ds: &[f64], excess: &[f64], theta_alpha: &[f64], s_b: f64) -> (Vec<f64>, Vec<f64>) {
        let n = ds.len();
        let mut fx = vec![0.0; n];
        let mut fy = vec![0.0; n];
        for j in 0..n {
            let normal = excess[j] * theta_alpha[j];
            fx[j] = s_b * (ds[j] * self.tau[j][0] + normal * self.nor[j][0]);
            fy[j] = s_b * (ds[j] * self.tau[j][1] + normal * self.nor[j][1]);
        }
        (fx, fy)
    }

    /// Normal and tangential components `(U, V)` of a boundary vector field.
    pub fn project(&self, ux: &[f64], uy: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = ux.len();
        let mut un = vec![0.0; n];
        let mut ut = vec![0.0; n];
        for j in 0..n {
            un[j] = ux[j] * self.nor[j][0] + uy[j] * self.nor[j][1];
            ut[j] = ux[j] * self.tau[j][0] + uy[j] * self.tau[j][1];
        }
        (un, ut)
    }
}

/// `S_b(D s τ + (s − 1)θ_α n)` in a frozen frame.
pub(crate) fn frozen_force(
    line: &PeriodicLine,
    s: &[f64],
    theta_alpha: &[f64],
    frame: &Frame,
    s_b: f64,
) -> (Vec<f64>, Vec<f64>) {
    let ds = line.derivative(s, 1).expect("length checked");
    let excess: Vec<f64> = s.iter().map(|v| v - 1.0).collect();
    frame.force(&ds, &excess, theta_alpha, s_b)
}

pub(crate) fn add_scaled(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + c * y).collect()
}

pub(crate) fn average(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Advances states of one configuration.
#[derive(Debug)]
pub struct Integrator {
    grid: GridSpec,
    params: PhysParams,
    config: SchemeConfig,
    solver: FluidSolver,
    reference_speed: Option<f64>,
}

impl Integrator {
    pub fn new(grid: GridSpec, params: PhysParams, config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        if (grid.lb - params.lb).abs() > 1e-14 * params.lb {
            return Err(Error::param("lb", "grid and physical parameter lengths differ"));
        }
        let solver = FluidSolver::new(&grid);
        Ok(Self { grid, params, config, solver, reference_speed: None })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn solver(&self) -> &FluidSolver {
        &self.solver
    }

    /// Rescaling coefficients in use, once determined.
    pub fn rescaling(&self) -> (Option<f64>, Option<f64>) {
        (self.config.c_v, self.config.c_u)
    }

    /// First positive maximum speed, the baseline of blowup detection.
    pub fn reference_speed(&self) -> Option<f64> {
        self.reference_speed
    }

    /// Restores the blowup baseline of a resumed run.
    pub fn set_reference_speed(&mut self, speed: Option<f64>) {
        self.reference_speed = speed;
    }

    /// Advances `state` by one step. On error the state is left unchanged.
    pub fn step(&mut self, state: &mut StepState) -> Result<()> {
        state.validate(&self.grid)?;
        if self.config.scheme.is_steady() != state.fluid.is_none() {
            return Err(Error::param("fluid", "fluid state presence does not match the scheme"));
        }
        let dt = self.config.dt;
        let next = match self.config.scheme {
            Scheme::ExplicitSteady => self.explicit_steady(state, dt),
            Scheme::Ssd1Steady => self.ssd_steady(state, dt, false),
            Scheme::Ssd2Steady => self.ssd_steady(state, dt, true),
            Scheme::Ifrk4Steady => self.ifrk4_steady(state, dt),
            Scheme::StableSteady => self.stable_steady(state, dt),
            Scheme::ExplicitUnsteady => self.explicit_unsteady(state, dt),
            Scheme::Ssd1Unsteady => self.ssd_unsteady(state, dt, false),
            Scheme::Ssd2Unsteady => self.ssd_unsteady(state, dt, true),
            Scheme::StableUnsteady => self.stable_unsteady(state, dt),
            Scheme::SecondOrderUnsteady => self.second_order(state, dt, true),
            Scheme::SecondOrderExplicitUnsteady => self.second_order(state, dt, false),
        };
        let mut next = next.map_err(|e| match e {
            Error::DegenerateParameterization { index, value } => {
                Error::Blowup { step: state.step + 1, reason: format!("s_alpha = {value:e} at node {index}") }
            }
            other => other,
        })?;
        next.t = state.t + dt;
        next.step = state.step + 1;
        self.check_blowup(&next)?;
        *state = next;
        Ok(())
    }

    fn check_blowup(&mut self, s: &StepState) -> Result<()> {
        let finite = s
            .interface
            .s_alpha
            .iter()
            .chain(&s.interface.phi)
            .chain(&s.curve.x)
            .chain(&s.curve.y)
            .all(|v| v.is_finite())
            && s.max_speed.is_finite()
            && s.fluid.iter().all(FluidState::is_finite);
        if !finite {
            return Err(Error::Blowup { step: s.step, reason: "non-finite values".into() });
        }
        if let Some((index, &value)) = s.interface.s_alpha.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::Blowup { step: s.step, reason: format!("s_alpha = {value:e} at node {index}") });
        }
        match self.reference_speed {
            None if s.max_speed > 0.0 => self.reference_speed = Some(s.max_speed),
            Some(r) if s.max_speed > BLOWUP_SPEED_RATIO * r => {
                return Err(Error::Blowup {
                    step: s.step,
                    reason: format!("max speed {:e} exceeds {BLOWUP_SPEED_RATIO:e} times its first value", s.max_speed),
                });
            }
            _ => {}
        }
        Ok(())
    }

    /// Velocity `(U, V)` at the nodes induced by the boundary force under
    /// steady Stokes flow, and the largest speed involved.
    fn steady_velocity(
        &self,
        curve: &CurveSamples,
        frame: &Frame,
        fx: &[f64],
        fy: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        match self.config.steady_velocity {
            SteadyVelocity::Grid => {
                let c = Coupling::new(curve, &self.grid);
                self.grid_steady_velocity(&c, frame, fx, fy)
            }
            SteadyVelocity::BoundaryIntegral => {
                let (ux, uy) = steady_velocity_on_interface(curve, fx, fy, self.params.mu, self.params.lb)?;
                let speed = ux.iter().zip(&uy).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
                let (un, ut) = frame.project(&ux, &uy);
                Ok((un, ut, speed))
            }
        }
    }

    fn grid_steady_velocity(
        &self,
        c: &Coupling,
        frame: &Frame,
        fx: &[f64],
        fy: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let st = self.solver.steady_solve(&c.spread(fx), &c.spread(fy), self.params.mu, false, false)?;
        let (ux, uy) = (c.interpolate(&st.u), c.interpolate(&st.v));
        let (un, ut) = frame.project(&ux, &uy);
        Ok((un, ut, st.max_speed()))
    }

    /// Builds the next state from new unknowns, reconstructing the curve.
    fn assemble(
        &self,
        prev: &StepState,
        s_alpha: Vec<f64>,
        phi: Vec<f64>,
        refs: [[f64; 2]; 2],
        fluid: Option<FluidState>,
        max_speed: f64,
    ) -> Result<StepState> {
        let mut interface = InterfaceState { s_alpha, phi, ref_points: refs, lb: prev.interface.lb };
        interface.validate()?;
        let curve = reconstruct_curve(&interface);
        // The curve depends only on the sum of the two points, so moving them
        // onto the averaged curve keeps it and stops their difference drifting.
        interface.resync_reference_points(&curve);
        Ok(StepState { interface, curve, fluid, t: prev.t, step: prev.step, max_speed })
    }
}

#[cfg(test)]
mod tests;
