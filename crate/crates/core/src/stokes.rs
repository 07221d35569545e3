//! Periodic spectral Stokes solvers and the steady boundary-integral
//! velocity on the interface.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CurveSamples;
use crate::spectral::{forward_2d_complex, inverse_2d_complex, wavenumber, PeriodicLine};

/// Discrete geometry of the fluid grid and of the boundary parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Grid points per axis.
    pub n: usize,
    /// Domain side length.
    pub l: f64,
    /// Boundary node count.
    pub n_b: usize,
    /// Boundary parameter length.
    pub lb: f64,
}

impl GridSpec {
    pub fn new(n: usize, l: f64, n_b: usize, lb: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("N = {n} must be even and at least 4")));
        }
        if n_b < 4 || !n_b.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("N_b = {n_b} must be even and at least 4")));
        }
        if !(l > 0.0 && lb > 0.0) {
            return Err(Error::InvalidGrid("domain and parameter lengths must be positive".into()));
        }
        Ok(Self { n, l, n_b, lb })
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn d_alpha(&self) -> f64 {
        self.lb / self.n_b as f64
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }
}

/// Velocity and pressure on the grid, row-major with `x` fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl FluidState {
    pub fn zeros(grid: &GridSpec) -> Self {
        let m = grid.cells();
        Self { u: vec![0.0; m], v: vec![0.0; m], p: vec![0.0; m] }
    }

    pub fn max_speed(&self) -> f64 {
        self.u.iter().zip(&self.v).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// Work counters used by the cost report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveCounters {
    pub fluid_solves: u64,
    pub ffts_2d: u64,
    pub dense_solves: u64,
    pub krylov_iterations: u64,
}

/// Spectral solver for periodic Stokes problems on a fixed grid.
///
/// Gradient and divergence use wavenumbers with the Nyquist entry zeroed;
/// the Laplacian keeps it. Projection is exact for the discrete divergence.
#[derive(Debug)]
pub struct FluidSolver {
    grid: GridSpec,
    kd: Vec<f64>,
    k2: Vec<f64>,
    counters: Cell<SolveCounters>,
}

/// Leray projection of one Fourier mode with derivative wavenumber `k`.
#[inline]
fn project_mode(kx: f64, ky: f64, fx: Complex64, fy: Complex64) -> (Complex64, Complex64) {
    let kk = kx * kx + ky * ky;
    if kk == 0.0 {
        return (fx, fy);
    }
    let dot = (fx * kx + fy * ky) / kk;
    (fx - dot * kx, fy - dot * ky)
}

/// Projects a spectral vector field given per-axis wavenumbers, as
/// `f̂ − k(k·f̂)/|k|²`, passing `k = 0` through.
pub fn leray_project(
    fx: &[Complex64],
    fy: &[Complex64],
    kx: impl Fn(usize) -> f64,
    ky: impl Fn(usize) -> f64,
    n: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut ox = vec![Complex64::new(0.0, 0.0); n * n];
    let mut oy = ox.clone();
    for jy in 0..n {
        for jx in 0..n {
            let idx = jy * n + jx;
            let (a, b) = project_mode(kx(jx), ky(jy), fx[idx], fy[idx]);
            ox[idx] = a;
            oy[idx] = b;
        }
    }
    (ox, oy)
}

impl FluidSolver {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n;
        let scale = 2.0 * PI / grid.l;
        let kd = (0..n).map(|j| if j == n / 2 { 0.0 } else { wavenumber(j, n) as f64 * scale }).collect();
        let k2 = (0..n).map(|j| (wavenumber(j, n) as f64 * scale).powi(2)).collect();
        Self { grid: *grid, kd, k2, counters: Cell::new(SolveCounters::default()) }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn counters(&self) -> SolveCounters {
        self.counters.get()
    }

    pub fn reset_counters(&self) {
        self.counters.set(SolveCounters::default());
    }

    pub(crate) fn count(&self, f: impl FnOnce(&mut SolveCounters)) {
        let mut c = self.counters.get();
        f(&mut c);
        self.counters.set(c);
    }

    /// Derivative wavenumber of storage index `j`.
    pub fn kd(&self, j: usize) -> f64 {
        self.kd[j]
    }

    /// Forward transforms of two real fields with one complex FFT.
    fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.grid.n;
        let mut z: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| Complex64::new(*x, *y)).collect();
        forward_2d_complex(&mut z, n);
        self.count(|c| c.ffts_2d += 1);
        let mut ha = vec![Complex64::new(0.0, 0.0); n * n];
        let mut hb = ha.clone();
        for jy in 0..n {
            let my = (n - jy) % n;
            for jx in 0..n {
                let mx = (n - jx) % n;
                let zk = z[jy * n + jx];
                let zm = z[my * n + mx].conj();
                ha[jy * n + jx] = 0.5 * (zk + zm);
                hb[jy * n + jx] = Complex64::new(0.0, -0.5) * (zk - zm);
            }
        }
        (ha, hb)
    }

    /// Inverse transforms of two spectra with real images.
    fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n;
        let mut z: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + Complex64::new(0.0, 1.0) * y).collect();
        inverse_2d_complex(&mut z, n);
        self.count(|c| c.ffts_2d += 1);
        (z.iter().map(|c| c.re).collect(), z.iter().map(|c| c.im).collect())
    }

    fn inverse_single(&self, a: &[Complex64]) -> Vec<f64> {
        let mut z = a.to_vec();
        inverse_2d_complex(&mut z, self.grid.n);
        self.count(|c| c.ffts_2d += 1);
        z.into_iter().map(|c| c.re).collect()
    }

    fn pressure(&self, fx: &[Complex64], fy: &[Complex64]) -> Vec<f64> {
        let n = self.grid.n;
        let mut p = vec![Complex64::new(0.0, 0.0); n * n];
        for jy in 0..n {
            for jx in 0..n {
                let (kx, ky) = (self.kd[jx], self.kd[jy]);
                let kk = kx * kx + ky * ky;
                if kk > 0.0 {
                    let idx = jy * n + jx;
                    p[idx] = Complex64::new(0.0, -1.0) * (fx[idx] * kx + fy[idx] * ky) / kk;
                }
            }
        }
        self.inverse_single(&p)
    }

    /// One implicit step of `ρ ∂u/∂t = −∇p + μ∇²u + f`, `∇·u = 0`, with
    /// viscous weight `theta` (1 for backward Euler, ½ for Crank–Nicolson).
    /// `u_n = None` stands for a fluid at rest.
    #[allow(clippy::too_many_arguments)]
    pub fn unsteady_solve(
        &self,
        u_n: Option<(&[f64], &[f64])>,
        fx: &[f64],
        fy: &[f64],
        rho: f64,
        mu: f64,
        dt: f64,
        theta: f64,
        with_pressure: bool,
    ) -> Result<FluidState> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", format!("{dt} must be positive")));
        }
        self.check_len(fx)?;
        self.check_len(fy)?;
        let n = self.grid.n;
        let (mut hx, mut hy) = self.forward_pair(fx, fy);
        let (fxh, fyh) = if with_pressure { (Some(hx.clone()), Some(hy.clone())) } else { (None, None) };
        let prev = match u_n {
            Some((u, v)) => {
                self.check_len(u)?;
                self.check_len(v)?;
                Some(self.forward_pair(u, v))
            }
            None => None,
        };
        let a = rho / dt;
        for jy in 0..n {
            for jx in 0..n {
                let idx = jy * n + jx;
                let (px, py) = project_mode(self.kd[jx], self.kd[jy], hx[idx], hy[idx]);
                let lap = mu * (self.k2[jx] + self.k2[jy]);
                let (mut rx, mut ry) = (px, py);
                if let Some((ux, uy)) = &prev {
                    let w = a - (1.0 - theta) * lap;
                    rx += ux[idx] * w;
                    ry += uy[idx] * w;
                }
                let d = a + theta * lap;
                hx[idx] = rx / d;
                hy[idx] = ry / d;
            }
        }
        let (u, v) = self.inverse_pair(&hx, &hy);
        let p = match (fxh, fyh) {
            (Some(x), Some(y)) => self.pressure(&x, &y),
            _ => vec![0.0; n * n],
        };
        self.count(|c| c.fluid_solves += 1);
        Ok(FluidState { u, v, p })
    }

    /// Steady Stokes solve `0 = −∇p + μ∇²u + f`. The mean force has no
    /// steady response on the torus; with `strict` a nonzero mean is an error,
    /// otherwise it is discarded.
    pub fn steady_solve(
        &self,
        fx: &[f64],
        fy: &[f64],
        mu: f64,
        strict: bool,
        with_pressure: bool,
    ) -> Result<FluidState> {
        if !(mu > 0.0) {
            return Err(Error::param("mu", format!("{mu} must be positive")));
        }
        self.check_len(fx)?;
        self.check_len(fy)?;
        let n = self.grid.n;
        let (mut hx, mut hy) = self.forward_pair(fx, fy);
        let mean = hx[0].norm().max(hy[0].norm());
        if strict && mean > 1e-10 {
            return Err(Error::NoSteadySolution(mean));
        }
        let (fxh, fyh) = if with_pressure { (Some(hx.clone()), Some(hy.clone())) } else { (None, None) };
        for jy in 0..n {
            for jx in 0..n {
                let idx = jy * n + jx;
                let lap = mu * (self.k2[jx] + self.k2[jy]);
                if lap == 0.0 {
                    hx[idx] = Complex64::new(0.0, 0.0);
                    hy[idx] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let (px, py) = project_mode(self.kd[jx], self.kd[jy], hx[idx], hy[idx]);
                hx[idx] = px / lap;
                hy[idx] = py / lap;
            }
        }
        let (u, v) = self.inverse_pair(&hx, &hy);
        let p = match (fxh, fyh) {
            (Some(x), Some(y)) => self.pressure(&x, &y),
            _ => vec![0.0; n * n],
        };
        self.count(|c| c.fluid_solves += 1);
        Ok(FluidState { u, v, p })
    }

    /// `max |∇_h · u|` with the solver's derivative wavenumbers.
    pub fn max_divergence(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.grid.n;
        let (hu, hv) = self.forward_pair(u, v);
        let mut d = vec![Complex64::new(0.0, 0.0); n * n];
        for jy in 0..n {
            for jx in 0..n {
                let idx = jy * n + jx;
                d[idx] = Complex64::new(0.0, 1.0) * (hu[idx] * self.kd[jx] + hv[idx] * self.kd[jy]);
            }
        }
        self.inverse_single(&d).into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.grid.cells() {
            return Err(Error::ShapeMismatch { expected: self.grid.cells(), found: f.len() });
        }
        Ok(())
    }
}

/// Unsteady Stokes step with backward-Euler viscosity and pressure output.
pub fn unsteady_stokes_step(
    grid: &GridSpec,
    u_n: &FluidState,
    fx: &[f64],
    fy: &[f64],
    rho: f64,
    mu: f64,
    dt: f64,
) -> Result<FluidState> {
    FluidSolver::new(grid).unsteady_solve(Some((&u_n.u, &u_n.v)), fx, fy, rho, mu, dt, 1.0, true)
}

/// Steady Stokes solve; a nonzero mean force is an error.
pub fn steady_stokes_grid_solve(grid: &GridSpec, fx: &[f64], fy: &[f64], mu: f64) -> Result<FluidState> {
    FluidSolver::new(grid).steady_solve(fx, fy, mu, true, true)
}

/// Multiplier of `f ↦ ∫ −ln((L_b/π)|sin(π(α−α')/L_b)|) f(α') dα'` at
/// integer wavenumber `m`.
pub fn log_kernel_symbol(m: i64, lb: f64) -> f64 {
    if m == 0 {
        -lb * (lb / (2.0 * PI)).ln()
    } else {
        lb / (2.0 * m.unsigned_abs() as f64)
    }
}

/// Periodic distance surrogate `(L_b/π)|sin(π d/L_b)|`, which behaves like
/// `|d|` near the diagonal.
#[inline]
pub fn periodic_distance(d: f64, lb: f64) -> f64 {
    (lb / PI) * (PI * d / lb).sin().abs()
}

/// Free-space Stokeslet velocity at the nodes induced by the force density
/// `(fx, fy)` along the curve.
///
/// The logarithmic part is split into a smooth remainder, integrated by the
/// trapezoid rule, and a periodic log kernel integrated spectrally.
pub fn steady_velocity_on_interface(
    curve: &CurveSamples,
    fx: &[f64],
    fy: &[f64],
    mu: f64,
    lb: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = curve.len();
    if fx.len() != n || fy.len() != n {
        return Err(Error::ShapeMismatch { expected: n, found: fx.len().min(fy.len()) });
    }
    let line = PeriodicLine::new(n, lb)?;
    let da = line.spacing();
    let xa = line.derivative(&curve.x, 1)?;
    let ya = line.derivative(&curve.y, 1)?;
    let mut u = line.apply_even(fx, |k, _| log_kernel_symbol(k, lb));
    let mut v = line.apply_even(fy, |k, _| log_kernel_symbol(k, lb));
    for i in 0..n {
        let s = xa[i].hypot(ya[i]);
        let (tx, ty) = (xa[i] / s, ya[i] / s);
        // Diagonal limits: smooth log part −ln s, tensor part ττᵀ.
        let mut su = (-s.ln() + tx * tx) * fx[i] + tx * ty * fy[i];
        let mut sv = tx * ty * fx[i] + (-s.ln() + ty * ty) * fy[i];
        for j in 0..n {
            if j == i {
                continue;
            }
            let (r1, r2) = (curve.x[i] - curve.x[j], curve.y[i] - curve.y[j]);
            let r_sq = r1 * r1 + r2 * r2;
            if r_sq == 0.0 {
                return Err(Error::InvalidGeometry(format!("nodes {i} and {j} coincide")));
            }
            let d = (i as f64 - j as f64) * da;
            let smooth = -0.5 * (r_sq.ln()) + periodic_distance(d, lb).ln();
            let (a11, a12, a22) = (r1 * r1 / r_sq, r1 * r2 / r_sq, r2 * r2 / r_sq);
            su += (smooth + a11) * fx[j] + a12 * fy[j];
            sv += a12 * fx[j] + (smooth + a22) * fy[j];
        }
        u[i] += su * da;
        v[i] += sv * da;
    }
    let c = 1.0 / (4.0 * PI * mu);
    u.iter_mut().chain(v.iter_mut()).for_each(|x| *x *= c);
    Ok((u, v))
}
