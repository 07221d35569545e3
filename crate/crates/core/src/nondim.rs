//! Physical parameters and the dimensionless groups that control the model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensional inputs of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub rho: f64,
    pub mu: f64,
    /// Elastic coefficient of the interface.
    pub s_b: f64,
    /// Domain side length.
    pub l: f64,
    /// Boundary parameter length.
    pub lb: f64,
    /// Characteristic time.
    pub t0: f64,
}

impl PhysParams {
    /// Parameters with the viscous-elastic time `μL/S_b` as time unit.
    pub fn with_elastic_time(rho: f64, mu: f64, s_b: f64, l: f64, lb: f64) -> Self {
        Self { rho, mu, s_b, l, lb, t0: mu * l / s_b }
    }

    pub fn validate(&self) -> Result<()> {
        let fields =
            [("rho", self.rho), ("mu", self.mu), ("s_b", self.s_b), ("l", self.l), ("lb", self.lb), ("t0", self.t0)];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// The three groups `S_b t₀/(μL)`, `μt₀/(ρL²)` and `L_b/L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessGroups {
    pub elastic: f64,
    pub viscous: f64,
    pub length_ratio: f64,
}

/// Groups left once `t₀ = μL/S_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedGroups {
    /// `μ²/(ρ L S_b)`; absent for steady flow.
    pub inertia: Option<f64>,
    pub length_ratio: f64,
}

pub fn dimensionless_groups(p: &PhysParams) -> Result<DimensionlessGroups> {
    p.validate()?;
    Ok(DimensionlessGroups {
        elastic: p.s_b * p.t0 / (p.mu * p.l),
        viscous: p.mu * p.t0 / (p.rho * p.l * p.l),
        length_ratio: p.lb / p.l,
    })
}

/// Reduced groups; `steady` drops the inertial group.
pub fn reduced_groups(p: &PhysParams, steady: bool) -> Result<ReducedGroups> {
    p.validate()?;
    Ok(ReducedGroups { inertia: (!steady).then(|| p.mu * p.mu / (p.rho * p.l * p.s_b)), length_ratio: p.lb / p.l })
}

/// Viscosities of the canonical parameter sweep (`S_b = ρ = 1`).
pub const CANONICAL_VISCOSITIES: [f64; 4] = [0.1, 0.05, 0.01, 0.005];
