//! Energy, area and stability instrumentation, and the temporal
//! convergence harness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enclosed_area, CurveSamples};
use crate::integrators::{Integrator, StepState};
use crate::stokes::FluidState;

/// `(ρ/2) Σ u·u h²`.
pub fn kinetic_energy(u: &FluidState, rho: f64, h: f64) -> f64 {
    let sum: f64 = u.u.iter().chain(&u.v).map(|x| x * x).sum();
    0.5 * rho * sum * h * h
}

/// `(S_b/2) Σ (s_α − 1)² Δα`.
pub fn potential_energy(s_alpha: &[f64], s_b: f64, d_alpha: f64) -> f64 {
    let sum: f64 = s_alpha.iter().map(|s| (s - 1.0) * (s - 1.0)).sum();
    0.5 * s_b * sum * d_alpha
}

/// One row of the per-step diagnostics stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub t: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub area: f64,
    pub max_u: f64,
    pub min_salpha: f64,
    pub max_salpha: f64,
    pub stable: bool,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "step,t,K,P,E,area,max_u,min_salpha,max_salpha,stable";

    pub fn of(state: &StepState, rho: f64, s_b: f64, h: f64, stable: bool) -> Self {
        let kinetic = state.fluid.as_ref().map_or(0.0, |f| kinetic_energy(f, rho, h));
        let iface = &state.interface;
        let potential = potential_energy(&iface.s_alpha, s_b, iface.d_alpha());
        let (lo, hi) =
            iface.s_alpha.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
        Self {
            step: state.step,
            t: state.t,
            kinetic,
            potential,
            total: kinetic + potential,
            area: enclosed_area(&state.curve),
            max_u: state.max_speed,
            min_salpha: lo,
            max_salpha: hi,
            stable,
        }
    }

    /// CSV row in [`CSV_HEADER`](Self::CSV_HEADER) order. Floats use the
    /// shortest representation that round-trips.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            self.step,
            self.t,
            self.kinetic,
            self.potential,
            self.total,
            self.area,
            self.max_u,
            self.min_salpha,
            self.max_salpha,
            u8::from(self.stable)
        )
    }
}

/// Energy growth factor above which a run counts as unstable.
pub const ENERGY_GROWTH_LIMIT: f64 = 10.0;

/// Outcome of a stability probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable { step: u64, reason: String },
}

impl Verdict {
    pub fn is_stable(&self) -> bool {
        matches!(self, Verdict::Stable)
    }
}

/// Probe result with the full diagnostics history.
#[derive(Clone, Debug)]
pub struct ProbeOutcome {
    pub verdict: Verdict,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: StepState,
}

/// Reason a state counts as unstable, if any: energy beyond
/// [`ENERGY_GROWTH_LIMIT`] times its initial value, or a curve that left
/// the domain box `[−L, 2L]²`.
pub fn instability_reason(
    record: &DiagnosticsRecord,
    initial_energy: f64,
    curve: &CurveSamples,
    l: f64,
) -> Option<String> {
    if !record.total.is_finite() {
        return Some("non-finite energy".into());
    }
    if record.total > ENERGY_GROWTH_LIMIT * initial_energy {
        return Some(format!("energy {:e} exceeds {ENERGY_GROWTH_LIMIT} times its initial value", record.total));
    }
    let outside = curve.x.iter().chain(&curve.y).any(|c| *c < -l || *c > 2.0 * l);
    outside.then(|| "interface left the computational domain".into())
}

/// Runs `steps` steps and classifies the run.
pub fn stability_probe(integrator: &mut Integrator, initial: StepState, steps: u64) -> ProbeOutcome {
    let p = *integrator.params();
    let h = integrator.grid().h();
    let mut state = initial;
    let first = DiagnosticsRecord::of(&state, p.rho, p.s_b, h, true);
    let e0 = first.total;
    let mut records = vec![first];
    let mut verdict = Verdict::Stable;
    for _ in 0..steps {
        if let Err(e) = integrator.step(&mut state) {
            verdict = Verdict::Unstable { step: state.step + 1, reason: e.to_string() };
            break;
        }
        let mut rec = DiagnosticsRecord::of(&state, p.rho, p.s_b, h, true);
        if let Some(reason) = instability_reason(&rec, e0, &state.curve, p.l) {
            rec.stable = false;
            records.push(rec);
            verdict = Verdict::Unstable { step: state.step, reason };
            break;
        }
        records.push(rec);
    }
    ProbeOutcome { verdict, records, final_state: state }
}

/// Whether `E^{n+1} ≤ Eⁿ + slack·E⁰` holds for every step.
pub fn energy_non_increasing(records: &[DiagnosticsRecord], slack: f64) -> bool {
    let Some(first) = records.first() else { return true };
    let e0 = first.total;
    records.windows(2).all(|w| w[1].total <= w[0].total + slack * e0)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::param("fit", "need at least two matching points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("fit", "abscissae coincide"));
    }
    Ok(sxy / sxx)
}

/// Final-time observables of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub curve: CurveSamples,
    pub d_alpha: f64,
    /// Grid velocity, `u` then `v`, when the flow is unsteady.
    pub velocity: Option<Vec<f64>>,
    pub h: f64,
}

/// Errors `e_T(Δt)` and fitted rates of a halving study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// `‖X(T;Δt) − X(T;Δt/2)‖` for each Δt but the last.
    pub x_errors: Vec<f64>,
    pub u_errors: Vec<f64>,
    pub x_rate: Option<f64>,
    pub u_rate: Option<f64>,
    /// `log₂(e(Δt)/e(Δt/2))` for consecutive pairs.
    pub x_pair_rates: Vec<f64>,
    pub u_pair_rates: Vec<f64>,
    /// Set when a run failed; errors cover the runs before it.
    pub aborted: Option<String>,
}

fn pair_rates(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn rate(dts: &[f64], e: &[f64]) -> Option<f64> {
    if e.len() < 2 || e.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = dts[..e.len()].iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly).ok()
}

/// Runs `run(Δt)` for every entry of the halving chain `dts` (in parallel)
/// and fits `log e_T` against `log Δt`.
pub fn run_convergence_study<F>(dts: &[f64], t_end: f64, run: F) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Result<Observables> + Sync,
{
    for w in dts.windows(2) {
        if (w[0] - 2.0 * w[1]).abs() > 1e-12 * w[0] {
            return Err(Error::param("dts", "time steps must form a halving chain"));
        }
    }
    for dt in dts {
        let steps = t_end / dt;
        if !(dt > &0.0) || (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::param("dts", format!("{t_end} is not a multiple of {dt}")));
        }
    }
    let results: Vec<Result<Observables>> = dts.par_iter().map(|dt| run(*dt)).collect();
    let mut obs = Vec::new();
    let mut aborted = None;
    for (dt, r) in dts.iter().zip(results) {
        match r {
            Ok(o) => obs.push(o),
            Err(e) => {
                aborted = Some(format!("run with dt = {dt} failed: {e}"));
                break;
            }
        }
    }
    let x_errors: Vec<f64> = obs.windows(2).map(|w| w[0].curve.l2_distance(&w[1].curve, w[0].d_alpha)).collect();
    let u_errors: Vec<f64> = obs
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].velocity.as_ref()?, w[1].velocity.as_ref()?);
            let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            Some((s * w[0].h * w[0].h).sqrt())
        })
        .collect();
    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        x_rate: rate(dts, &x_errors),
        u_rate: rate(dts, &u_errors),
        x_pair_rates: pair_rates(&x_errors),
        u_pair_rates: pair_rates(&u_errors),
        x_errors,
        u_errors,
        aborted,
    })
}
