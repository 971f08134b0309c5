//! The tightening loop: dual ascent, then alternate triplet search and
//! ascent until nothing new is found or time runs out.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::certificate::{add_trace_triplets, build_certificate, verify_certificate};
use crate::error::RunError;
use crate::frustrated::CycleFinder;
use crate::io::{read_model, InputFormat};
use crate::model::Relaxation;
use crate::reparam::solve_dual;
use crate::sac::SacFinder;
use crate::schedule::{schedule_step, ScheduleState, TripletFinder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sac,
    Fr,
    Fr1,
    None,
}

impl Method {
    pub fn finder(self) -> Option<&'static dyn TripletFinder> {
        match self {
            Method::Sac => Some(&SacFinder),
            Method::Fr => Some(&CycleFinder::Local),
            Method::Fr1 => Some(&CycleFinder::Spanning),
            Method::None => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Sac => "sac",
            Method::Fr => "fr",
            Method::Fr1 => "fr1",
            Method::None => "none",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sac" => Ok(Method::Sac),
            "fr" => Ok(Method::Fr),
            "fr1" => Ok(Method::Fr1),
            "none" => Ok(Method::None),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    /// Wall-clock budget in seconds, checked between stages.
    pub time_limit: f64,
    /// Diffusion passes per ascent stage.
    pub stage_passes: usize,
    /// A stage ends early once a pass gains less than this.
    pub tolerance: f64,
    pub eps0: f64,
    pub dmax0: usize,
    /// Cap on tightening stages; `None` runs until nothing new is found.
    pub max_stages: Option<usize>,
    /// Build and verify a certificate for one probe per SAC stage.
    pub certify: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Sac,
            time_limit: 300.0,
            stage_passes: 100,
            tolerance: 0.0,
            eps0: 0.1,
            dmax0: 3,
            max_stages: None,
            certify: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        if !(self.time_limit > 0.0) {
            return Err(RunError::Config("time limit must be positive".into()));
        }
        if self.stage_passes == 0 {
            return Err(RunError::Config("stage passes must be at least 1".into()));
        }
        if !(self.eps0 > 0.0) || !self.eps0.is_finite() {
            return Err(RunError::Config("eps must be positive and finite".into()));
        }
        if self.dmax0 == 0 {
            return Err(RunError::Config("dmax must be at least 1".into()));
        }
        Ok(())
    }
}

/// One row of the bound trace, written after every stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub seconds: f64,
    pub bound: f64,
    /// Triplet factors in the model.
    pub triplets: usize,
    pub stage: usize,
    pub eps: f64,
    pub dmax: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundTrace {
    pub rows: Vec<TraceRow>,
}

impl BoundTrace {
    pub fn final_bound(&self) -> Option<f64> {
        self.rows.last().map(|r| r.bound)
    }

    /// Fails on the first row whose bound drops below its predecessor by
    /// more than `tol`.
    pub fn check_monotone(&self, tol: f64) -> Result<(), RunError> {
        for (i, w) in self.rows.windows(2).enumerate() {
            if w[1].bound < w[0].bound - tol {
                return Err(RunError::NonMonotoneTrace {
                    row: i + 1,
                    prev: w[0].bound,
                    next: w[1].bound,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The finder returned no new triplet at any depth it could still use.
    NoNewTriplets,
    TimeLimit,
    StageLimit,
    /// `method = none`: ascent stopped improving.
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyRecord {
    pub stage: usize,
    pub r: usize,
    pub s: usize,
    pub eps: f64,
    pub gain: f64,
    pub max_branching: u64,
    pub passed: bool,
    /// Verification summary, or the construction error.
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: BoundTrace,
    pub model: Relaxation,
    pub stop: StopReason,
    pub certificates: Vec<CertifyRecord>,
}

fn certify_witness(model: &Relaxation, stage: usize, w: &crate::sac::ProbeWitness) -> CertifyRecord {
    let mut record = CertifyRecord {
        stage,
        r: w.r,
        s: w.s,
        eps: w.eps,
        gain: 0.0,
        max_branching: 0,
        passed: false,
        detail: String::new(),
    };
    let mut m = model.clone();
    if let Err(e) = add_trace_triplets(&mut m, &w.trace) {
        record.detail = e.to_string();
        return record;
    }
    match build_certificate(&m, &w.trace, w.eps) {
        Ok(cert) => {
            record.gain = cert.gain;
            record.max_branching = cert.max_branching;
            match verify_certificate(&m, &cert.messages, cert.r, cert.s, cert.gain) {
                Ok(report) => {
                    record.passed = report.passed();
                    record.detail = report.to_string();
                }
                Err(e) => record.detail = e.to_string(),
            }
        }
        Err(e) => record.detail = e.to_string(),
    }
    record
}

/// Runs the loop on `model`, consuming it; the tightened, reparameterized
/// model is returned in the outcome.
pub fn run(mut model: Relaxation, config: &RunConfig) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let start = Instant::now();
    let elapsed = || start.elapsed().as_secs_f64();
    let mut state = ScheduleState::new(config.eps0, config.dmax0);
    let mut trace = BoundTrace::default();
    let mut certificates = Vec::new();

    let out = solve_dual(&mut model, config.stage_passes, config.tolerance);
    let row = |model: &Relaxation, bound: f64, stage: usize, state: &ScheduleState| TraceRow {
        seconds: elapsed(),
        bound,
        triplets: model.num_triplets(),
        stage,
        eps: state.eps,
        dmax: state.d_max,
    };
    trace.rows.push(row(&model, out.bound, 0, &state));

    let Some(finder) = config.method.finder() else {
        // plain ascent: keep going while stages improve the bound
        let mut stage = 0;
        let mut prev = out.bound;
        let stop = loop {
            if config.max_stages.is_some_and(|m| stage >= m) {
                break StopReason::StageLimit;
            }
            if elapsed() >= config.time_limit {
                break StopReason::TimeLimit;
            }
            let out = solve_dual(&mut model, config.stage_passes, config.tolerance);
            stage += 1;
            trace.rows.push(row(&model, out.bound, stage, &state));
            if out.bound - prev <= 1e-12 {
                break StopReason::Converged;
            }
            prev = out.bound;
        };
        trace.check_monotone(1e-9)?;
        return Ok(RunOutcome { trace, model, stop, certificates });
    };

    let mut stage = 0;
    let stop = loop {
        if config.max_stages.is_some_and(|m| stage >= m) {
            break StopReason::StageLimit;
        }
        if elapsed() >= config.time_limit {
            break StopReason::TimeLimit;
        }
        let depth = state.d_max;
        let step = schedule_step(&mut state, &model, finder);
        let fresh = step.selection.new_triplets(&model);
        if fresh.is_empty() {
            if step.deepened && !finder.saturated(&model, depth) {
                continue;
            }
            break StopReason::NoNewTriplets;
        }
        stage += 1;
        if config.certify {
            if let Some(w) = step.selection.witnesses.first() {
                certificates.push(certify_witness(&model, stage, w));
            }
        }
        for t in fresh {
            model
                .add_triplet(t)
                .expect("finder returned a triplet over model variables");
        }
        let out = solve_dual(&mut model, config.stage_passes, config.tolerance);
        trace.rows.push(row(&model, out.bound, stage, &state));
    };
    trace.check_monotone(1e-9)?;
    Ok(RunOutcome { trace, model, stop, certificates })
}

/// Reads `input` and runs the loop on it.
pub fn run_file(input: &Path, format: InputFormat, config: &RunConfig) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let model = read_model(input, format)?;
    run(model, config)
}

/// Writes the trace as CSV with 9 significant digits after checking that
/// the bound never decreases.
pub fn write_trace(trace: &BoundTrace, mut out: impl Write) -> Result<(), RunError> {
    trace.check_monotone(1e-9)?;
    writeln!(out, "seconds,bound,triplets,stage,eps,dmax")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{:.9e},{:.9e},{},{},{:.9e},{}",
            r.seconds, r.bound, r.triplets, r.stage, r.eps, r.dmax
        )?;
    }
    Ok(())
}

pub fn emit_trace(trace: &BoundTrace, path: &PathBuf) -> Result<(), RunError> {
    let file = std::fs::File::create(path)?;
    write_trace(trace, std::io::BufWriter::new(file))
}
