//! Periodic discrete Fourier transforms and Fourier multipliers.
//!
//! Forward transforms carry the `1/N` factor and inverse transforms carry
//! none, so `f_j = Σ_k f̂_k e^{i k α_j}`. Coefficients are stored in FFT
//! order; [`wavenumber`] maps a storage index to `k ∈ {−N/2+1, …, N/2}`.
//!
//! The unmatched Nyquist mode `k = N/2` has no conjugate partner. When a
//! multiplier is applied it receives the real part of the symbol, which
//! zeroes it for odd symbols (`ik`, `−i sgn k`) and keeps it for even ones.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

/// Signed wavenumber of storage index `j` for a transform of length `n`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("length {n} must be even and positive")));
    }
    Ok(())
}

/// Fourier coefficients of a periodic 1D sample vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum1D {
    coeffs: Vec<Complex64>,
}

impl Spectrum1D {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of wavenumber `k`, with `k` taken modulo `N`.
    pub fn get(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        self.coeffs[k.rem_euclid(n) as usize]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
}

/// Forward transform with the `1/N` normalization.
pub fn forward_1d(f: &[f64]) -> Result<Spectrum1D> {
    check_len(f.len())?;
    let n = f.len();
    let (fwd, _) = plans(n);
    let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(Spectrum1D { coeffs: buf })
}

/// Inverse transform; returns the real part.
pub fn inverse_1d(s: &Spectrum1D) -> Vec<f64> {
    let n = s.len();
    let (_, inv) = plans(n);
    let mut buf = s.coeffs.clone();
    inv.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// A uniform periodic sampling of `[0, length)` with `n` nodes.
///
/// Wavenumber `k` corresponds to the angular frequency `κ = 2πk/length`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicLine {
    pub n: usize,
    pub length: f64,
}

impl PeriodicLine {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        check_len(n)?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("period {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    /// The standard `2π`-periodic line.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|j| j as f64 * h).collect()
    }

    /// Angular frequency of integer wavenumber `k`.
    #[inline]
    pub fn omega(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.length
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::ShapeMismatch { expected: self.n, found: f.len() });
        }
        Ok(())
    }

    /// Applies `symbol(k, κ)` mode by mode, checking that the output is real.
    pub fn apply_symbol<S>(&self, f: &[f64], symbol: S) -> Result<Vec<f64>>
    where
        S: Fn(i64, f64) -> Complex64,
    {
        self.check(f)?;
        let n = self.n as i64;
        for k in 0..n / 2 {
            let a = symbol(k, self.omega(k));
            let b = symbol(-k, self.omega(-k));
            let tol = 1e-12 * a.norm().max(1.0);
            if (b - a.conj()).norm() > tol || (k == 0 && a.im.abs() > tol) {
                return Err(Error::Symmetry { k });
            }
        }
        Ok(self.apply_symbol_unchecked(f, symbol))
    }

    /// As [`apply_symbol`](Self::apply_symbol) without the symmetry check.
    /// The caller guarantees conjugate symmetry.
    pub fn apply_symbol_unchecked<S>(&self, f: &[f64], symbol: S) -> Vec<f64>
    where
        S: Fn(i64, f64) -> Complex64,
    {
        let mut s = forward_1d(f).expect("length checked");
        self.multiply(&mut s, symbol);
        inverse_1d(&s)
    }

    /// Multiplies a spectrum in place, applying the Nyquist rule.
    pub fn multiply<S>(&self, s: &mut Spectrum1D, symbol: S)
    where
        S: Fn(i64, f64) -> Complex64,
    {
        let n = self.n;
        for (j, c) in s.coeffs.iter_mut().enumerate() {
            let k = wavenumber(j, n);
            let mut m = symbol(k, self.omega(k));
            if j == n / 2 {
                m = Complex64::new(m.re, 0.0);
            }
            *c *= m;
        }
    }

    /// Applies a real, even multiplier `symbol(k, κ)`.
    pub fn apply_even(&self, f: &[f64], symbol: impl Fn(i64, f64) -> f64) -> Vec<f64> {
        self.apply_symbol_unchecked(f, |k, w| Complex64::new(symbol(k, w), 0.0))
    }

    /// `order`-th spectral derivative.
    pub fn derivative(&self, f: &[f64], order: u32) -> Result<Vec<f64>> {
        self.check(f)?;
        if order == 0 {
            return Ok(f.to_vec());
        }
        Ok(self.apply_symbol_unchecked(f, |_, w| Complex64::new(0.0, w).powu(order)))
    }

    /// Hilbert transform, multiplier `−i sgn(k)`.
    pub fn hilbert(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        Ok(self.apply_symbol_unchecked(f, |k, _| Complex64::new(0.0, -(k.signum() as f64))))
    }

    /// Spectral antiderivative `g` with `g(0) = value_at_zero`; the mean of
    /// `f` contributes the linear term `mean(f)·α`.
    pub fn antiderivative(&self, f: &[f64], value_at_zero: f64) -> Result<Vec<f64>> {
        self.check(f)?;
        let mut s = forward_1d(f)?;
        let mean = s.coeffs[0].re;
        s.coeffs[0] = Complex64::new(0.0, 0.0);
        self.multiply(&mut s, |k, w| if k == 0 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -1.0 / w) });
        let periodic = inverse_1d(&s);
        let shift = value_at_zero - periodic[0];
        let h = self.spacing();
        Ok(periodic.iter().enumerate().map(|(j, &p)| p + shift + mean * j as f64 * h).collect())
    }
}

fn unit_line(f: &[f64]) -> Result<PeriodicLine> {
    PeriodicLine::unit(f.len())
}

/// `order`-th derivative of `2π`-periodic samples.
pub fn spectral_derivative_1d(f: &[f64], order: u32) -> Result<Vec<f64>> {
    unit_line(f)?.derivative(f, order)
}

/// Hilbert transform of `2π`-periodic samples.
pub fn hilbert_transform(f: &[f64]) -> Result<Vec<f64>> {
    unit_line(f)?.hilbert(f)
}

/// Applies an integer-wavenumber multiplier to `2π`-periodic samples.
pub fn apply_symbol_1d(f: &[f64], symbol: impl Fn(i64) -> Complex64) -> Result<Vec<f64>> {
    unit_line(f)?.apply_symbol(f, |k, _| symbol(k))
}

/// Antiderivative of `2π`-periodic samples.
pub fn spectral_antiderivative(f: &[f64], value_at_zero: f64) -> Result<Vec<f64>> {
    unit_line(f)?.antiderivative(f, value_at_zero)
}

/// Grid axis selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Fourier coefficients of an `n × n` grid field, row-major with the
/// `y` wavenumber as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    pub n: usize,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        let n = self.n as i64;
        self.coeffs[(ky.rem_euclid(n) * n + kx.rem_euclid(n)) as usize]
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in j + 1..n {
            buf.swap(j * n + i, i * n + j);
        }
    }
}

fn fft_2d_in_place(buf: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    fft.process(buf);
    transpose(buf, n);
    fft.process(buf);
    transpose(buf, n);
}

/// Forward 2D transform of a real `n × n` field (row-major, `x` fastest).
pub fn forward_2d(field: &[f64], n: usize) -> Result<Spectrum2D> {
    check_len(n)?;
    if field.len() != n * n {
        return Err(Error::InvalidGrid(format!("field of {} values is not {n}×{n}", field.len())));
    }
    let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward_2d_complex(&mut buf, n);
    Ok(Spectrum2D { n, coeffs: buf })
}

/// In-place normalized forward transform of complex grid data.
pub fn forward_2d_complex(buf: &mut [Complex64], n: usize) {
    let (fwd, _) = plans(n);
    fft_2d_in_place(buf, n, &fwd);
    let scale = 1.0 / (n * n) as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
}

/// In-place inverse transform of complex grid data.
pub fn inverse_2d_complex(buf: &mut [Complex64], n: usize) {
    let (_, inv) = plans(n);
    fft_2d_in_place(buf, n, &inv);
}

/// Inverse 2D transform; returns the real part.
pub fn inverse_2d(s: &Spectrum2D) -> Vec<f64> {
    let mut buf = s.coeffs.clone();
    inverse_2d_complex(&mut buf, s.n);
    buf.into_iter().map(|c| c.re).collect()
}

/// Spectral derivative of a periodic grid field on `[0, length)²`.
pub fn spectral_derivative_2d(field: &[f64], n: usize, length: f64, axis: Axis) -> Result<Vec<f64>> {
    let mut s = forward_2d(field, n)?;
    let scale = 2.0 * PI / length;
    for jy in 0..n {
        for jx in 0..n {
            let j = match axis {
                Axis::X => jx,
                Axis::Y => jy,
            };
            let k = if j == n / 2 { 0.0 } else { wavenumber(j, n) as f64 * scale };
            s.coeffs[jy * n + jx] *= Complex64::new(0.0, k);
        }
    }
    Ok(inverse_2d(&s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> Vec<f64> {
        PeriodicLine::unit(n).unwrap().nodes()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_sine() {
        let a = nodes(64);
        let f: Vec<f64> = a.iter().map(|x| x.sin()).collect();
        let d = spectral_derivative_1d(&f, 1).unwrap();
        let e: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        assert!(max_err(&d, &e) <= 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let d = spectral_derivative_1d(&[1.0; 32], 1).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn second_derivative_two_modes() {
        let a = nodes(64);
        let f: Vec<f64> = a.iter().map(|x| (3.0 * x).sin() + 0.5 * (5.0 * x).cos()).collect();
        let d = spectral_derivative_1d(&f, 2).unwrap();
        let e: Vec<f64> = a.iter().map(|x| -9.0 * (3.0 * x).sin() - 12.5 * (5.0 * x).cos()).collect();
        assert!(max_err(&d, &e) <= 1e-11);
    }

    #[test]
    fn odd_or_empty_lengths_rejected() {
        assert!(matches!(spectral_derivative_1d(&[1.0; 7], 1), Err(Error::InvalidGrid(_))));
        assert!(matches!(spectral_derivative_1d(&[], 1), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let a = nodes(64);
        let f: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        let h = hilbert_transform(&f).unwrap();
        let e: Vec<f64> = a.iter().map(|x| x.sin()).collect();
        assert!(max_err(&h, &e) <= 1e-12);
    }

    #[test]
    fn hilbert_matches_principal_value_quadrature() {
        // (1/2π) PV ∫ f(α') cot((α−α')/2) dα' evaluated with the
        // odd-even node rule, which is exact for trigonometric polynomials
        // of low degree.
        let m = 512;
        let a = nodes(m);
        let f: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        let dx = 2.0 * PI / m as f64;
        for i in [0usize, 37, 100] {
            let mut acc = 0.0;
            for j in 0..m {
                if (i + j) % 2 == 1 {
                    acc += f[j] / ((a[i] - a[j]) / 2.0).tan();
                }
            }
            let pv = acc * 2.0 * dx / (2.0 * PI);
            assert!((pv - a[i].sin()).abs() < 1e-10, "{pv} vs {}", a[i].sin());
        }
    }

    #[test]
    fn hilbert_of_constant_and_square() {
        assert!(hilbert_transform(&[3.0; 16]).unwrap().iter().all(|x| x.abs() < 1e-14));
        let a = nodes(32);
        let f: Vec<f64> = a.iter().map(|x| (2.0 * x).cos() + 1.0).collect();
        let hh = hilbert_transform(&hilbert_transform(&f).unwrap()).unwrap();
        let e: Vec<f64> = a.iter().map(|x| -(2.0 * x).cos()).collect();
        assert!(max_err(&hh, &e) <= 1e-12);
    }

    #[test]
    fn symbol_examples() {
        let a = nodes(32);
        let f: Vec<f64> = a.iter().map(|x| (2.0 * x).cos()).collect();
        assert!(max_err(&apply_symbol_1d(&f, |_| Complex64::new(1.0, 0.0)).unwrap(), &f) < 1e-14);
        let g = apply_symbol_1d(&f, |k| Complex64::new(k.abs() as f64, 0.0)).unwrap();
        let e: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
        assert!(max_err(&g, &e) < 1e-13);
        let c: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        let g = apply_symbol_1d(&c, |k| Complex64::new(1.0 / (1.0 + (k * k) as f64).sqrt(), 0.0)).unwrap();
        let e: Vec<f64> = c.iter().map(|x| x / 2f64.sqrt()).collect();
        assert!(max_err(&g, &e) < 1e-13);
    }

    #[test]
    fn asymmetric_symbol_rejected() {
        let f = vec![1.0; 16];
        let r = apply_symbol_1d(&f, |k| Complex64::new(k as f64, 0.0));
        assert!(matches!(r, Err(Error::Symmetry { .. })));
    }

    #[test]
    fn antiderivative_examples() {
        let a = nodes(64);
        let f: Vec<f64> = a.iter().map(|x| x.cos()).collect();
        let g = spectral_antiderivative(&f, 0.0).unwrap();
        assert!(max_err(&g, &a.iter().map(|x| x.sin()).collect::<Vec<_>>()) < 1e-12);

        let g = spectral_antiderivative(&[0.7; 64], 0.0).unwrap();
        assert!(max_err(&g, &a.iter().map(|x| 0.7 * x).collect::<Vec<_>>()) < 1e-12);

        let f: Vec<f64> = a.iter().map(|x| x.cos() + 2.0).collect();
        let g = spectral_antiderivative(&f, 1.0).unwrap();
        let e: Vec<f64> = a.iter().map(|x| 1.0 + x.sin() + 2.0 * x).collect();
        assert!(max_err(&g, &e) < 1e-12);
    }

    #[test]
    fn scaled_period() {
        let line = PeriodicLine::new(32, 1.5).unwrap();
        let w = 2.0 * PI / 1.5;
        let a = line.nodes();
        let f: Vec<f64> = a.iter().map(|x| (w * x).sin()).collect();
        let d = line.derivative(&f, 1).unwrap();
        let e: Vec<f64> = a.iter().map(|x| w * (w * x).cos()).collect();
        assert!(max_err(&d, &e) < 1e-12);
    }

    #[test]
    fn derivative_2d_examples() {
        let n = 32;
        let h = 1.0 / n as f64;
        let tp = 2.0 * PI;
        let mut f = vec![0.0; n * n];
        let mut g = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                f[j * n + i] = (tp * x).sin();
                g[j * n + i] = (tp * x).sin() * (2.0 * tp * y).cos();
            }
        }
        let dx = spectral_derivative_2d(&f, n, 1.0, Axis::X).unwrap();
        let dy = spectral_derivative_2d(&g, n, 1.0, Axis::Y).unwrap();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                assert!((dx[j * n + i] - tp * (tp * x).cos()).abs() < 1e-12);
                let e = -2.0 * tp * (tp * x).sin() * (2.0 * tp * y).sin();
                assert!((dy[j * n + i] - e).abs() < 1e-11);
            }
        }
        let c = spectral_derivative_2d(&vec![2.0; n * n], n, 1.0, Axis::Y).unwrap();
        assert!(c.iter().all(|x| x.abs() < 1e-13));
        assert!(spectral_derivative_2d(&[0.0; 12], 4, 1.0, Axis::X).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn samples() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, 32)
    }

    proptest! {
        #[test]
        fn round_trip(f in samples()) {
            let g = inverse_1d(&forward_1d(&f).unwrap());
            for (a, b) in f.iter().zip(&g) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn conjugate_symmetry(f in samples()) {
            let s = forward_1d(&f).unwrap();
            for k in 1..16i64 {
                prop_assert!((s.get(-k) - s.get(k).conj()).norm() < 1e-14);
            }
        }

        #[test]
        fn parseval(f in samples()) {
            let s = forward_1d(&f).unwrap();
            let n = f.len() as f64;
            let da = 2.0 * PI / n;
            let lhs: f64 = f.iter().map(|x| x * x).sum::<f64>() * da;
            let rhs: f64 = s.as_slice().iter().map(|c| c.norm_sqr()).sum::<f64>() * n * da;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
        }

        #[test]
        fn hilbert_skew_adjoint(f in samples(), g in samples()) {
            let hf = hilbert_transform(&f).unwrap();
            let hg = hilbert_transform(&g).unwrap();
            let a: f64 = hf.iter().zip(&g).map(|(x, y)| x * y).sum();
            let b: f64 = f.iter().zip(&hg).map(|(x, y)| x * y).sum();
            prop_assert!((a + b).abs() <= 1e-10);
        }

        #[test]
        fn derivative_skew_adjoint(f in samples(), g in samples()) {
            let df = spectral_derivative_1d(&f, 1).unwrap();
            let dg = spectral_derivative_1d(&g, 1).unwrap();
            let a: f64 = df.iter().zip(&g).map(|(x, y)| x * y).sum();
            let b: f64 = f.iter().zip(&dg).map(|(x, y)| x * y).sum();
            prop_assert!((a + b).abs() <= 1e-10);
        }

        #[test]
        fn antiderivative_inverts_derivative(c in prop::collection::vec(-1.0f64..1.0, 6), mean in -2.0f64..2.0) {
            let a = PeriodicLine::unit(64).unwrap().nodes();
            let f: Vec<f64> = a.iter().map(|x| {
                mean + c[0] * x.cos() + c[1] * x.sin() + c[2] * (3.0 * x).cos()
                    + c[3] * (7.0 * x).sin() + c[4] * (11.0 * x).cos() + c[5] * (20.0 * x).sin()
            }).collect();
            let g = spectral_antiderivative(&f, 0.3).unwrap();
            // Remove the linear ramp before differentiating the periodic part.
            let per: Vec<f64> = g.iter().zip(&a).map(|(v, x)| v - mean * x).collect();
            let d = spectral_derivative_1d(&per, 1).unwrap();
            for (x, y) in d.iter().zip(&f) {
                prop_assert!((x + mean - y).abs() <= 1e-10);
            }
        }
    }
}
