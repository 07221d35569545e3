//! The step loop, diagnostics CSV output and state snapshots.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{instability_reason, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::geometry::{CurveSamples, InterfaceState};
use crate::integrators::{Integrator, Scheme, StepState};
use crate::sim::config::RunConfig;
use crate::stokes::{FluidState, SolveCounters};

pub const SNAPSHOT_VERSION: u32 = 1;

/// How a run ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RunOutcome {
    Completed,
    Unstable { step: u64, reason: String },
    SolverFailure { step: u64, reason: String },
}

impl RunOutcome {
    /// Process exit status of the `run` command.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunOutcome::Completed => 0,
            RunOutcome::Unstable { .. } => 2,
            RunOutcome::SolverFailure { .. } => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: StepState,
    pub counters: SolveCounters,
    pub wall_time: Duration,
    pub csv_path: Option<PathBuf>,
    pub snapshots: Vec<PathBuf>,
}

/// Full state of a run at one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub scheme: Scheme,
    pub step: u64,
    pub t: f64,
    pub n: usize,
    pub n_b: usize,
    pub l: f64,
    pub lb: f64,
    pub s_alpha: Vec<f64>,
    pub phi: Vec<f64>,
    pub ref_points: [[f64; 2]; 2],
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub max_speed: f64,
    pub c_v: Option<f64>,
    pub c_u: Option<f64>,
    pub reference_speed: Option<f64>,
}

impl Snapshot {
    pub fn capture(integ: &Integrator, state: &StepState) -> Self {
        let g = integ.grid();
        let (c_v, c_u) = integ.rescaling();
        let fluid = state.fluid.as_ref();
        Self {
            format_version: SNAPSHOT_VERSION,
            scheme: integ.config().scheme,
            step: state.step,
            t: state.t,
            n: g.n,
            n_b: g.n_b,
            l: g.l,
            lb: g.lb,
            s_alpha: state.interface.s_alpha.clone(),
            phi: state.interface.phi.clone(),
            ref_points: state.interface.ref_points,
            x: state.curve.x.clone(),
            y: state.curve.y.clone(),
            u: fluid.map(|f| f.u.clone()),
            v: fluid.map(|f| f.v.clone()),
            p: fluid.map(|f| f.p.clone()),
            max_speed: state.max_speed,
            c_v,
            c_u,
            reference_speed: integ.reference_speed(),
        }
    }

    /// Rebuilds the integrator and state. `config` supplies the physical
    /// and solver settings; grid sizes and scheme must match the snapshot.
    pub fn restore(&self, config: &RunConfig) -> Result<(Integrator, StepState)> {
        if self.format_version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported format version {}", self.format_version)));
        }
        if self.scheme != config.scheme || self.n != config.n || self.n_b != config.boundary_nodes() {
            return Err(Error::Snapshot("scheme or grid differs from the configuration".into()));
        }
        let mut sc = config.scheme_config();
        sc.c_v = self.c_v;
        sc.c_u = self.c_u;
        let grid = config.grid()?;
        let mut integ = Integrator::new(grid, config.params(), sc)?;
        integ.set_reference_speed(self.reference_speed);
        let fluid = match (&self.u, &self.v) {
            (Some(u), Some(v)) => {
                Some(FluidState { u: u.clone(), v: v.clone(), p: self.p.clone().unwrap_or_default() })
            }
            (None, None) => None,
            _ => return Err(Error::Snapshot("velocity has only one component".into())),
        };
        let state = StepState {
            interface: InterfaceState {
                s_alpha: self.s_alpha.clone(),
                phi: self.phi.clone(),
                ref_points: self.ref_points,
                lb: self.lb,
            },
            curve: CurveSamples { x: self.x.clone(), y: self.y.clone() },
            fluid,
            t: self.t,
            step: self.step,
            max_speed: self.max_speed,
        };
        state.validate(&grid).map_err(|e| Error::Snapshot(e.to_string()))?;
        Ok((integ, state))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Receives records and snapshots as the loop produces them.
pub trait RunSink {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()>;
    fn snapshot(&mut self, integ: &Integrator, state: &StepState) -> Result<()>;
}

/// Sink that keeps nothing.
pub struct NullSink;

impl RunSink for NullSink {
    fn record(&mut self, _: &DiagnosticsRecord) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _: &Integrator, _: &StepState) -> Result<()> {
        Ok(())
    }
}

/// Writes `<name>.csv` and `<name>_step<k>.json` into a directory.
pub struct FileSink {
    dir: PathBuf,
    name: String,
    csv: BufWriter<File>,
    pub csv_path: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

impl FileSink {
    pub fn create(dir: &Path, name: &str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{name}.csv"));
        let mut csv = BufWriter::new(File::create(&csv_path)?);
        writeln!(csv, "{}", DiagnosticsRecord::CSV_HEADER)?;
        Ok(Self { dir: dir.to_path_buf(), name: name.to_string(), csv, csv_path, snapshots: Vec::new() })
    }

    pub fn finish(mut self) -> Result<(PathBuf, Vec<PathBuf>)> {
        self.csv.flush()?;
        Ok((self.csv_path, self.snapshots))
    }
}

impl RunSink for FileSink {
    fn record(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.csv, "{}", record.csv_row())?;
        Ok(())
    }

    fn snapshot(&mut self, integ: &Integrator, state: &StepState) -> Result<()> {
        let path = self.dir.join(format!("{}_step{}.json", self.name, state.step));
        Snapshot::capture(integ, state).save(&path)?;
        self.snapshots.push(path);
        Ok(())
    }
}

/// Advances `state` by up to `steps` steps, classifying each one. The loop
/// stops at the first unstable step or numerical failure. Only I/O errors
/// of the sink are returned as `Err`.
pub fn drive(
    integ: &mut Integrator,
    mut state: StepState,
    steps: u64,
    snapshot_every: u64,
    sink: &mut dyn RunSink,
) -> Result<(RunOutcome, Vec<DiagnosticsRecord>, StepState)> {
    let p = *integ.params();
    let h = integ.grid().h();
    let first = DiagnosticsRecord::of(&state, p.rho, p.s_b, h, true);
    let e0 = first.total;
    sink.record(&first)?;
    let mut records = vec![first];
    let mut outcome = RunOutcome::Completed;
    for _ in 0..steps {
        if let Err(e) = integ.step(&mut state) {
            let step = state.step + 1;
            outcome = if e.is_instability() {
                RunOutcome::Unstable { step, reason: e.to_string() }
            } else {
                RunOutcome::SolverFailure { step, reason: e.to_string() }
            };
            break;
        }
        let mut rec = DiagnosticsRecord::of(&state, p.rho, p.s_b, h, true);
        let reason = instability_reason(&rec, e0, &state.curve, p.l);
        rec.stable = reason.is_none();
        sink.record(&rec)?;
        records.push(rec);
        if let Some(reason) = reason {
            outcome = RunOutcome::Unstable { step: state.step, reason };
            break;
        }
        if snapshot_every > 0 && state.step.is_multiple_of(snapshot_every) {
            sink.snapshot(integ, &state)?;
        }
    }
    let final_written = snapshot_every > 0 && state.step.is_multiple_of(snapshot_every) && state.step > 0;
    if !final_written {
        sink.snapshot(integ, &state)?;
    }
    Ok((outcome, records, state))
}

/// Runs a configuration, writing its artifacts to the resolved output
/// directory.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let (mut integ, state) = config.build()?;
    let mut sink = FileSink::create(&config.resolved_output_dir(), &config.name)?;
    let start = Instant::now();
    let (outcome, records, final_state) = drive(&mut integ, state, config.steps(), config.snapshot_every, &mut sink)?;
    let wall_time = start.elapsed();
    let (csv, snapshots) = sink.finish()?;
    Ok(RunReport {
        outcome,
        records,
        final_state,
        counters: integ.solver().counters(),
        wall_time,
        csv_path: Some(csv),
        snapshots,
    })
}

/// Runs a configuration without writing files.
pub fn run_in_memory(config: &RunConfig) -> Result<RunReport> {
    let (mut integ, state) = config.build()?;
    let start = Instant::now();
    let (outcome, records, final_state) = drive(&mut integ, state, config.steps(), 0, &mut NullSink)?;
    Ok(RunReport {
        outcome,
        records,
        final_state,
        counters: integ.solver().counters(),
        wall_time: start.elapsed(),
        csv_path: None,
        snapshots: Vec::new(),
    })
}
