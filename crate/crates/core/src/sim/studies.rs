//! Multi-run studies: temporal convergence, stability sweeps and cost
//! scaling.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_slope, run_convergence_study, stability_probe, ConvergenceReport, Observables, Verdict};
use crate::error::{Error, Result};
use crate::integrators::Scheme;
use crate::sim::config::RunConfig;

/// Runs `config` to `t_end` for each step of the halving chain `dts`.
pub fn convergence(config: &RunConfig, dts: &[f64]) -> Result<ConvergenceReport> {
    config.validate()?;
    run_convergence_study(dts, config.t_end, |dt| {
        let mut c = config.clone();
        c.dt = dt;
        let (mut integ, mut state) = c.build()?;
        for _ in 0..c.steps() {
            integ.step(&mut state)?;
        }
        let h = integ.grid().h();
        let velocity = state.fluid.map(|f| {
            let mut v = f.u;
            v.extend(f.v);
            v
        });
        Ok(Observables { d_alpha: state.interface.d_alpha(), curve: state.curve, velocity, h })
    })
}

/// Writes `<name>_convergence.csv` (one row per Δt) and
/// `<name>_convergence.json` (the full report).
pub fn write_convergence(report: &ConvergenceReport, dir: &Path, name: &str) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}_convergence.csv"));
    let mut w = fs::File::create(&csv)?;
    writeln!(w, "dt,x_error,u_error")?;
    for (i, dt) in report.dts.iter().enumerate() {
        let cell = |e: &[f64]| e.get(i).map(|v| format!("{v:?}")).unwrap_or_default();
        writeln!(w, "{dt:?},{},{}", cell(&report.x_errors), cell(&report.u_errors))?;
    }
    let json = dir.join(format!("{name}_convergence.json"));
    fs::write(&json, serde_json::to_string_pretty(report)?)?;
    Ok((csv, json))
}

/// One column of a sweep: a grid size and viscosity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepColumn {
    pub n: usize,
    pub mu: f64,
}

impl SweepColumn {
    pub fn label(&self) -> String {
        format!("N{}_mu{}", self.n, self.mu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scheme: Scheme,
    pub dts: Vec<f64>,
    pub columns: Vec<SweepColumn>,
    /// `verdicts[i][j]` is the verdict for `dts[i]` in `columns[j]`.
    pub verdicts: Vec<Vec<Verdict>>,
    /// Largest stable Δt of each column.
    pub largest_stable: Vec<Option<f64>>,
}

/// Probes every `(Δt, column)` pair of `base` up to `base.t_end`.
pub fn stability_sweep(base: &RunConfig, dts: &[f64], columns: &[SweepColumn]) -> Result<SweepReport> {
    let cells: Vec<(usize, usize)> = (0..dts.len()).flat_map(|i| (0..columns.len()).map(move |j| (i, j))).collect();
    let configs: Vec<RunConfig> = cells
        .iter()
        .map(|&(i, j)| {
            let mut c = base.clone();
            c.dt = dts[i];
            c.n = columns[j].n;
            c.n_b = None;
            c.mu = columns[j].mu;
            c.validate().map(|_| c)
        })
        .collect::<Result<_>>()?;
    let verdicts: Vec<Verdict> = configs
        .par_iter()
        .map(|c| {
            let (mut integ, state) = c.build().expect("validated");
            stability_probe(&mut integ, state, c.steps()).verdict
        })
        .collect();
    let mut grid = vec![vec![Verdict::Stable; columns.len()]; dts.len()];
    for (&(i, j), v) in cells.iter().zip(verdicts) {
        grid[i][j] = v;
    }
    let largest_stable = (0..columns.len())
        .map(|j| {
            (0..dts.len())
                .filter(|&i| grid[i][j].is_stable())
                .map(|i| dts[i])
                .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
        })
        .collect();
    Ok(SweepReport {
        scheme: base.scheme,
        dts: dts.to_vec(),
        columns: columns.to_vec(),
        verdicts: grid,
        largest_stable,
    })
}

pub fn write_sweep(report: &SweepReport, dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}_sweep.csv"));
    let mut w = fs::File::create(&path)?;
    let labels: Vec<String> = report.columns.iter().map(SweepColumn::label).collect();
    writeln!(w, "dt,{}", labels.join(","))?;
    for (dt, row) in report.dts.iter().zip(&report.verdicts) {
        let cells: Vec<&str> = row.iter().map(|v| if v.is_stable() { "stable" } else { "unstable" }).collect();
        writeln!(w, "{dt:?},{}", cells.join(","))?;
    }
    let largest: Vec<String> =
        report.largest_stable.iter().map(|d| d.map(|d| format!("{d:?}")).unwrap_or_default()).collect();
    writeln!(w, "largest_stable,{}", largest.join(","))?;
    Ok(path)
}

/// Per-step cost of one scheme at one grid size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostSample {
    pub scheme: Scheme,
    pub n: usize,
    pub n_b: usize,
    pub steps: u64,
    pub seconds_per_step: f64,
    pub fluid_solves_per_step: f64,
    pub ffts_per_step: f64,
    pub dense_solves_per_step: f64,
    pub krylov_iterations_per_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub samples: Vec<CostSample>,
    /// Fitted exponent of per-step time against `N`, per scheme.
    pub exponents: Vec<(Scheme, Option<f64>)>,
}

impl CostReport {
    pub fn sample(&self, scheme: Scheme, n: usize) -> Option<&CostSample> {
        self.samples.iter().find(|s| s.scheme == scheme && s.n == n)
    }

    pub fn exponent(&self, scheme: Scheme) -> Option<f64> {
        self.exponents.iter().find(|(s, _)| *s == scheme).and_then(|(_, e)| *e)
    }
}

/// Budget of one cost measurement.
#[derive(Clone, Copy, Debug)]
pub struct CostBudget {
    pub min_steps: u64,
    pub max_steps: u64,
    pub min_seconds: f64,
}

impl Default for CostBudget {
    fn default() -> Self {
        Self { min_steps: 2, max_steps: 200, min_seconds: 0.5 }
    }
}

/// Measures per-step wall time and operation counts. Runs are sequential
/// so timings do not compete for cores; one warm-up step precedes timing.
pub fn cost_scaling(base: &RunConfig, schemes: &[Scheme], ns: &[usize], budget: CostBudget) -> Result<CostReport> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config { field: "n".into(), reason: "grid sizes must be ascending".into() });
    }
    let mut samples = Vec::new();
    for &scheme in schemes {
        for &n in ns {
            let mut c = base.clone();
            c.scheme = scheme;
            c.n = n;
            c.n_b = None;
            c.rescale = None;
            let (mut integ, mut state) = c.build()?;
            integ.step(&mut state)?;
            integ.solver().reset_counters();
            let start = Instant::now();
            let mut steps = 0;
            while steps < budget.max_steps
                && (steps < budget.min_steps || start.elapsed().as_secs_f64() < budget.min_seconds)
            {
                integ.step(&mut state)?;
                steps += 1;
            }
            let secs = start.elapsed().as_secs_f64();
            let k = integ.solver().counters();
            let per = |v: u64| v as f64 / steps as f64;
            samples.push(CostSample {
                scheme,
                n,
                n_b: c.boundary_nodes(),
                steps,
                seconds_per_step: secs / steps as f64,
                fluid_solves_per_step: per(k.fluid_solves),
                ffts_per_step: per(k.ffts_2d),
                dense_solves_per_step: per(k.dense_solves),
                krylov_iterations_per_step: per(k.krylov_iterations),
            });
        }
    }
    let exponents = schemes
        .iter()
        .map(|&s| {
            let (x, y): (Vec<f64>, Vec<f64>) =
                samples.iter().filter(|c| c.scheme == s).map(|c| ((c.n as f64).ln(), c.seconds_per_step.ln())).unzip();
            (s, fit_slope(&x, &y).ok())
        })
        .collect();
    Ok(CostReport { samples, exponents })
}

pub fn write_cost(report: &CostReport, dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}_cost.csv"));
    let mut w = fs::File::create(&path)?;
    writeln!(w, "scheme,n,n_b,steps,seconds_per_step,fluid_solves_per_step,ffts_per_step,dense_solves_per_step,krylov_iterations_per_step")?;
    for s in &report.samples {
        writeln!(
            w,
            "{},{},{},{},{:?},{:?},{:?},{:?},{:?}",
            s.scheme,
            s.n,
            s.n_b,
            s.steps,
            s.seconds_per_step,
            s.fluid_solves_per_step,
            s.ffts_per_step,
            s.dense_solves_per_step,
            s.krylov_iterations_per_step
        )?;
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig::default().with_overrides(&["n=16", "mu=1", "t_end=2"]).unwrap()
    }

    #[test]
    fn empty_sweep_is_empty() {
        let r = stability_sweep(&base(), &[], &[SweepColumn { n: 16, mu: 1.0 }]).unwrap();
        assert!(r.verdicts.is_empty());
        assert_eq!(r.largest_stable, vec![None]);
    }

    #[test]
    fn sweep_finds_explicit_limit() {
        let mut c = base();
        c.scheme = Scheme::ExplicitSteady;
        c.t_end = 100.0;
        let r = stability_sweep(&c, &[0.05, 50.0], &[SweepColumn { n: 16, mu: 1.0 }]).unwrap();
        assert!(r.verdicts[0][0].is_stable());
        assert!(!r.verdicts[1][0].is_stable());
        assert_eq!(r.largest_stable, vec![Some(0.05)]);
        let dir = tempfile::tempdir().unwrap();
        let text = fs::read_to_string(write_sweep(&r, dir.path(), "x").unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), "dt,N16_mu1");
        assert_eq!(text.lines().last().unwrap(), "largest_stable,0.05");
    }

    #[test]
    fn explicit_and_ssd1_share_fluid_solve_counts() {
        let mut c = base();
        c.dt = 0.01;
        let budget = CostBudget { min_steps: 3, max_steps: 3, min_seconds: 0.0 };
        let r = cost_scaling(&c, &[Scheme::ExplicitUnsteady, Scheme::Ssd1Unsteady], &[16], budget).unwrap();
        let e = r.sample(Scheme::ExplicitUnsteady, 16).unwrap();
        let s = r.sample(Scheme::Ssd1Unsteady, 16).unwrap();
        assert!((e.fluid_solves_per_step - s.fluid_solves_per_step).abs() <= 1.0, "{e:?} {s:?}");
        assert!(cost_scaling(&c, &[Scheme::Ssd1Steady], &[32, 16], budget).is_err());
    }

    #[test]
    fn stable_probing_uses_one_solve_per_column() {
        let mut c = base();
        c.dt = 0.01;
        let budget = CostBudget { min_steps: 1, max_steps: 1, min_seconds: 0.0 };
        let r = cost_scaling(&c, &[Scheme::StableUnsteady], &[16], budget).unwrap();
        let s = r.sample(Scheme::StableUnsteady, 16).unwrap();
        assert!(s.fluid_solves_per_step >= s.n_b as f64);
    }

    #[test]
    fn convergence_report_files() {
        let mut c = base();
        c.scheme = Scheme::SecondOrderUnsteady;
        c.mu = 0.05;
        c.t_end = 0.25;
        let r = convergence(&c, &[0.125, 0.0625, 0.03125]).unwrap();
        assert_eq!(r.x_errors.len(), 2);
        assert_eq!(r.u_errors.len(), 2);
        let dir = tempfile::tempdir().unwrap();
        let (csv, json) = write_convergence(&r, dir.path(), "c").unwrap();
        assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 4);
        let back: ConvergenceReport = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
