//! Run configuration and its flat `key = value` file format.
//!
//! The format is a subset of TOML: one `key = value` pair per line, `#`
//! comments, no tables. Values are numbers, booleans or quoted strings.
//! Overrides given as `key=value` strings accept bare words for string
//! values.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::init_ellipse;
use crate::integrators::{Integrator, Scheme, SchemeConfig, SteadyVelocity, StepState, DENSE_PROBE_LIMIT};
use crate::nondim::PhysParams;
use crate::stokes::GridSpec;

/// Parameter length that makes the rest state a circle of radius 0.2.
pub const DEFAULT_LB: f64 = 2.0 * PI * 0.2;

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "IBSTOKES_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Prefix of every artifact written by the run.
    pub name: String,
    pub scheme: Scheme,
    pub n: usize,
    /// Boundary node count; `2n` when absent.
    pub n_b: Option<usize>,
    pub dt: f64,
    pub t_end: f64,
    pub rho: f64,
    pub mu: f64,
    pub s_b: f64,
    /// Domain side length.
    pub l: f64,
    /// Boundary parameter length.
    pub lb: f64,
    pub ellipse_a: f64,
    pub ellipse_b: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub output_dir: PathBuf,
    /// Snapshot period in steps; 0 writes only the final state.
    pub snapshot_every: u64,
    /// Leading-term rescaling; the scheme default when absent.
    pub rescale: Option<bool>,
    pub tol: f64,
    pub steady_velocity: SteadyVelocity,
    pub dense_limit: usize,
    /// Runs never draw random numbers; kept so configs can state it.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            scheme: Scheme::Ssd1Steady,
            n: 64,
            n_b: None,
            dt: 0.1,
            t_end: 1.0,
            rho: 1.0,
            mu: 1.0,
            s_b: 1.0,
            l: 1.0,
            lb: DEFAULT_LB,
            ellipse_a: 0.32,
            ellipse_b: 0.24,
            center_x: 0.5,
            center_y: 0.5,
            output_dir: PathBuf::from("out"),
            snapshot_every: 0,
            rescale: None,
            tol: 1e-10,
            steady_velocity: SteadyVelocity::Grid,
            dense_limit: DENSE_PROBE_LIMIT,
            deterministic: true,
        }
    }
}

fn config_error(field: impl Into<String>, reason: impl ToString) -> Error {
    Error::Config { field: field.into(), reason: reason.to_string() }
}

fn toml_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    // serde reports the offending key inside backticks.
    let field = msg.split('`').nth(1).unwrap_or("document").to_string();
    config_error(field, msg)
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    /// Parses a configuration document; missing keys take defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(toml_error)?;
        if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table() || v.is_array()) {
            return Err(config_error(k.as_str(), "nested values are not allowed"));
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table).try_into().map_err(toml_error)
    }

    /// Applies `key=value` overrides on top of this configuration.
    pub fn with_overrides<S: AsRef<str>>(self, overrides: &[S]) -> Result<Self> {
        let mut table = toml::Table::try_from(&self).map_err(|e| config_error("document", e))?;
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o.split_once('=').ok_or_else(|| config_error(o, "expected key=value"))?;
            let key = k.trim();
            if key.is_empty() {
                return Err(config_error(o, "empty key"));
            }
            table.insert(key.to_string(), parse_value(v.trim()));
        }
        Self::from_table(table)
    }

    /// Serializes to the flat format accepted by [`parse`](Self::parse).
    pub fn to_document(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Output directory after the environment override.
    pub fn resolved_output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| self.output_dir.clone())
    }

    pub fn boundary_nodes(&self) -> usize {
        self.n_b.unwrap_or(2 * self.n)
    }

    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as u64
    }

    pub fn params(&self) -> PhysParams {
        PhysParams::with_elastic_time(self.rho, self.mu, self.s_b, self.l, self.lb)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.l, self.boundary_nodes(), self.lb).map_err(|e| config_error("n", e))
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut c = SchemeConfig::new(self.scheme, self.dt);
        c.tol = self.tol;
        if let Some(r) = self.rescale {
            c.rescale = r;
        }
        c.steady_velocity = self.steady_velocity;
        c.dense_limit = self.dense_limit;
        c
    }

    /// Checks every field against the preconditions of the modules it feeds.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(config_error("name", "must be a non-empty file stem"));
        }
        if !self.deterministic {
            return Err(config_error("deterministic", "runs are always deterministic"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(config_error("t_end", "must be finite and non-negative"));
        }
        let positive = [
            ("dt", self.dt),
            ("rho", self.rho),
            ("mu", self.mu),
            ("s_b", self.s_b),
            ("l", self.l),
            ("lb", self.lb),
            ("ellipse_a", self.ellipse_a),
            ("ellipse_b", self.ellipse_b),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_error(field, format!("{v} must be positive and finite")));
            }
        }
        self.grid()?;
        if !self.boundary_nodes().is_multiple_of(2) {
            return Err(config_error("n_b", "must be even"));
        }
        self.scheme_config().validate().map_err(|e| match e {
            Error::Parameter { name, reason } => config_error(name, reason),
            e => e,
        })?;
        let (x, y, r) = (self.center_x, self.center_y, self.ellipse_a.max(self.ellipse_b));
        if x - r < 0.0 || x + r > self.l || y - r < 0.0 || y + r > self.l {
            return Err(config_error("ellipse_a", "initial interface must lie inside the domain"));
        }
        Ok(())
    }

    /// Validated integrator and initial state.
    pub fn build(&self) -> Result<(Integrator, StepState)> {
        self.validate()?;
        let grid = self.grid()?;
        let (iface, curve) =
            init_ellipse(self.ellipse_a, self.ellipse_b, [self.center_x, self.center_y], grid.n_b, self.lb)?;
        let state = StepState::initial(iface, curve, &grid, self.scheme.is_steady());
        let integ = Integrator::new(grid, self.params(), self.scheme_config())?;
        Ok((integ, state))
    }
}
