//! Modified Bessel functions of the second kind, the unsteady Stokes kernel
//! and the Fourier symbols of the leading-order velocity operators.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Beyond this argument `K_n(x)` is returned as zero.
pub const UNDERFLOW_ARG: f64 = 700.0;

/// Power series for `(K0, K1)`, used for `x ≤ 2`.
fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lnx2 = (0.5 * x).ln();
    // term_k = y^k / (k!)^2, harmonic number H_k
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut k0_tail = 0.0;
    // second series: y^k / (k! (k+1)!) with psi(k+1)+psi(k+2)
    let mut term1 = 1.0;
    let mut i1_sum = 1.0;
    let mut psi_sum = -2.0 * EULER_GAMMA + 1.0;
    let mut k1_tail = psi_sum;
    for k in 1..60 {
        let kf = k as f64;
        term *= y / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        k0_tail += term * harmonic;

        term1 *= y / (kf * (kf + 1.0));
        i1_sum += term1;
        psi_sum += 1.0 / kf + 1.0 / (kf + 1.0);
        k1_tail += term1 * psi_sum;
        if term < 1e-18 * i0 && term1 < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    let k0 = -(lnx2 + EULER_GAMMA) * i0 + k0_tail;
    let k1 = 1.0 / x + lnx2 * i1 - 0.25 * x * k1_tail;
    (k0, k1)
}

/// Steed's continued fraction for `(e^x K0, e^x K1)`, used for `x > 2`.
fn k01_scaled_cf(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        k01_series(x)
    } else if x > UNDERFLOW_ARG {
        (0.0, 0.0)
    } else {
        let (a, b) = k01_scaled_cf(x);
        let e = (-x).exp();
        (a * e, b * e)
    }
}

/// `K_order(x)` for `order ∈ {0, 1, 2}` and `x > 0`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("K_{order}({x}) requires x > 0")));
    }
    let (k0, k1) = k01(x);
    match order {
        0 => Ok(k0),
        1 => Ok(k1),
        2 => Ok(k0 + 2.0 * k1 / x),
        _ => Err(Error::Domain(format!("order {order} is not supported"))),
    }
}

/// `K0(x)` without argument checking; `x` must be positive.
#[inline]
pub fn k0(x: f64) -> f64 {
    k01(x).0
}

/// Fourier multiplier `1/√(β²+k²)` of `f ↦ (1/π)∫ K0(β|α−α'|) f(α') dα'`.
pub fn k0_convolution_symbol(beta: f64, k: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    Ok(1.0 / (beta * beta + k * k).sqrt())
}

/// Unsteady Stokes kernel tensor `G(r)` at screening parameter `λ`.
pub fn unsteady_kernel_g(r: [f64; 2], lambda: f64) -> Result<[[f64; 2]; 2]> {
    let rr = (r[0] * r[0] + r[1] * r[1]).sqrt();
    if rr == 0.0 {
        return Err(Error::SingularPoint("G is singular at r = 0".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let x = lambda * rr;
    let (k0, k1) = k01(x);
    let k2 = if x > UNDERFLOW_ARG { 0.0 } else { k0 + 2.0 * k1 / x };
    let r2 = rr * rr;
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            let rij = r[i] * r[j];
            g[i][j] = delta / r2 - 2.0 * rij / (r2 * r2) + 0.5 * lambda * lambda * (k0 + k2) * rij / r2
                - lambda * k1 * (delta / rr - rij / (r2 * rr));
        }
    }
    Ok(g)
}

/// Frozen per-step parameters of the leading-order symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsdSymbolParams {
    pub s_b: f64,
    pub mu: f64,
    pub rho: f64,
    pub dt: f64,
    /// `1/√(μΔt/ρ)`.
    pub lambda: f64,
    pub s_min: f64,
    /// `max(s_α − 1)`.
    pub s_max_excess: f64,
    /// `max(1 − 1/s_α)`.
    pub gamma: f64,
}

impl SsdSymbolParams {
    /// Builds the parameters from the current `s_α` samples.
    pub fn from_state(s_b: f64, mu: f64, rho: f64, dt: f64, s_alpha: &[f64]) -> Result<Self> {
        let s_min = s_alpha.iter().copied().fold(f64::INFINITY, f64::min);
        let s_max = s_alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = Self {
            s_b,
            mu,
            rho,
            dt,
            lambda: (rho / (mu * dt)).sqrt(),
            s_min,
            s_max_excess: s_max - 1.0,
            gamma: 1.0 - 1.0 / s_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.s_b, self.mu, self.rho, self.dt, self.lambda, self.s_min, self.s_max_excess, self.gamma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("ssd symbol", "non-finite parameter"));
        }
        if !(self.lambda > 0.0 && self.s_min > 0.0 && self.mu > 0.0 && self.rho > 0.0 && self.dt > 0.0) {
            return Err(Error::param("ssd symbol", "lambda, s_min, mu, rho, dt must be positive"));
        }
        if self.gamma >= 1.0 {
            return Err(Error::param("ssd symbol", "gamma must be below 1"));
        }
        Ok(())
    }

    /// The same parameters with `λ` replaced by `λ̄ = √(2ρ/(μΔt))`.
    pub fn with_midpoint_lambda(mut self) -> Self {
        self.lambda = (2.0 * self.rho / (self.mu * self.dt)).sqrt();
        self
    }
}

/// `((βk)² + k⁴)/√(β²+k²) − |k|³`, rewritten as `k²β²/(√(β²+k²)+|k|)`.
#[inline]
fn bracket_t(beta: f64, k: f64) -> f64 {
    let q = (beta * beta + k * k).sqrt();
    k * k * beta * beta / (q + k.abs())
}

/// `|k|³ − k⁴/√(β²+k²)`, rewritten as `|k|³β²/(√(β²+k²)(√(β²+k²)+|k|))`.
#[inline]
fn bracket_s(beta: f64, k: f64) -> f64 {
    let q = (beta * beta + k * k).sqrt();
    let a = k.abs();
    a * a * a * beta * beta / (q * (q + a))
}

/// Symbol of the leading-order stretching operator. `k` is the angular
/// wavenumber in the boundary parameter.
pub fn ssd_symbol_t(k: f64, p: &SsdSymbolParams) -> f64 {
    let beta = p.lambda * p.s_min;
    -(p.s_b * p.dt) / (2.0 * p.rho * p.s_min * p.s_min) * bracket_t(beta, k)
}

/// Symbol of the leading-order bending operator.
pub fn ssd_symbol_s(k: f64, p: &SsdSymbolParams) -> f64 {
    let beta = p.lambda * p.s_min;
    -(p.s_b * p.dt * p.s_max_excess) / (2.0 * p.rho * p.s_min * p.s_min) * bracket_s(beta, k)
}

/// Midpoint-rule symbols `(T̂, Ŝ)`; `p.lambda` is replaced by `λ̄`.
pub fn ssd_symbol_second_order(k: f64, p: &SsdSymbolParams) -> (f64, f64) {
    let q = p.with_midpoint_lambda();
    let beta = q.lambda * q.s_min;
    let s2 = q.s_min * q.s_min;
    let t = -(q.s_b * q.dt) / (4.0 * q.rho * s2) * bracket_t(beta, k);
    let s = -(q.s_b * q.dt * q.s_max_excess) / (4.0 * q.rho * s2 * q.s_min) * bracket_s(beta, k);
    (t, s)
}
