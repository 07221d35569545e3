//! Discrete delta function coupling between boundary nodes and the grid.
//!
//! Spreading and interpolation share the same stencils, which makes them
//! exact adjoints under the `Γ_h` and `Ω_h` inner products.

use crate::error::{Error, Result};
use crate::geometry::CurveSamples;
use crate::stokes::GridSpec;

/// Peskin's 4-point kernel.
pub fn peskin_phi(r: f64) -> f64 {
    let a = r.abs();
    if a <= 1.0 {
        0.125 * (3.0 - 2.0 * a + (1.0 + 4.0 * a - 4.0 * a * a).max(0.0).sqrt())
    } else if a <= 2.0 {
        0.125 * (5.0 - 2.0 * a - (-7.0 + 12.0 * a - 4.0 * a * a).max(0.0).sqrt())
    } else {
        0.0
    }
}

/// Support of `δ_h(x − X)` for one node: a 4×4 block of grid points with
/// the separable weights `φ(x/h − i)` and `φ(y/h − j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaStencil {
    /// Grid indices of the block, already wrapped into `0..N`.
    pub ix: [usize; 4],
    pub iy: [usize; 4],
    pub wx: [f64; 4],
    pub wy: [f64; 4],
}

impl DeltaStencil {
    pub fn new(x: f64, y: f64, grid: &GridSpec) -> Self {
        let (ix, wx) = axis_weights(x / grid.h(), grid.n);
        let (iy, wy) = axis_weights(y / grid.h(), grid.n);
        Self { ix, iy, wx, wy }
    }

    /// `δ_h · h²` at block position `(a, b)`.
    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.wx[a] * self.wy[b]
    }
}

fn axis_weights(xi: f64, n: usize) -> ([usize; 4], [f64; 4]) {
    let base = xi.floor();
    let mut idx = [0usize; 4];
    let mut w = [0.0; 4];
    for m in 0..4 {
        let i = base + m as f64 - 1.0;
        w[m] = peskin_phi(xi - i);
        idx[m] = (i as i64).rem_euclid(n as i64) as usize;
    }
    (idx, w)
}

/// Stencils for every node of a curve, reused by spreading and interpolation.
#[derive(Clone, Debug)]
pub struct Coupling {
    grid: GridSpec,
    stencils: Vec<DeltaStencil>,
}

impl Coupling {
    pub fn new(curve: &CurveSamples, grid: &GridSpec) -> Self {
        let stencils = curve.x.iter().zip(&curve.y).map(|(&x, &y)| DeltaStencil::new(x, y, grid)).collect();
        Self { grid: *grid, stencils }
    }

    pub fn stencils(&self) -> &[DeltaStencil] {
        &self.stencils
    }

    /// `Σ_j g_j δ_h(x − X_j) Δα` on the grid.
    pub fn spread(&self, g: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let scale = self.grid.d_alpha() / (self.grid.h() * self.grid.h());
        let mut out = vec![0.0; n * n];
        for (st, &gj) in self.stencils.iter().zip(g) {
            let v = gj * scale;
            for b in 0..4 {
                let row = st.iy[b] * n;
                let vb = v * st.wy[b];
                for a in 0..4 {
                    out[row + st.ix[a]] += vb * st.wx[a];
                }
            }
        }
        out
    }

    /// `Σ_x u(x) δ_h(x − X_j) h²` at every node.
    pub fn interpolate(&self, field: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        self.stencils
            .iter()
            .map(|st| {
                let mut acc = 0.0;
                for b in 0..4 {
                    let row = st.iy[b] * n;
                    let mut r = 0.0;
                    for a in 0..4 {
                        r += field[row + st.ix[a]] * st.wx[a];
                    }
                    acc += r * st.wy[b];
                }
                acc
            })
            .collect()
    }
}

/// Spreads a per-node scalar onto the grid.
pub fn spread(curve: &CurveSamples, g: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    if g.len() != curve.len() {
        return Err(Error::ShapeMismatch { expected: curve.len(), found: g.len() });
    }
    Ok(Coupling::new(curve, grid).spread(g))
}

/// Interpolates a grid field to the curve nodes.
pub fn interpolate(curve: &CurveSamples, field: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    if field.len() != grid.n * grid.n {
        return Err(Error::ShapeMismatch { expected: grid.n * grid.n, found: field.len() });
    }
    Ok(Coupling::new(curve, grid).interpolate(field))
}

/// `Σ f g Δα`.
pub fn inner_product_gamma(f: &[f64], g: &[f64], d_alpha: f64) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::ShapeMismatch { expected: f.len(), found: g.len() });
    }
    Ok(f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * d_alpha)
}

/// `Σ u·v h²` over any number of components stored back to back.
pub fn inner_product_omega(u: &[f64], v: &[f64], h: f64) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::ShapeMismatch { expected: u.len(), found: v.len() });
    }
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() * h * h)
}
