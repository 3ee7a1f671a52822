//! The time-stepping driver and its output files.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gsqg_core::evolution::{Event, EventKind, OutputSink, Record, SimState, Termination};
use gsqg_core::io::{write_snapshot, TimeSeriesWriter};
use gsqg_core::layercake::LayerCake;

use crate::config::RunConfig;
use crate::presets;
use crate::CliError;

/// Streams records, snapshots and events to the output directory.
pub struct FileSink {
    series: Option<TimeSeriesWriter<BufWriter<File>>>,
    series_path: std::path::PathBuf,
    snapshots: BufWriter<File>,
    events: BufWriter<File>,
}

impl FileSink {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        Ok(Self {
            series: None,
            series_path: dir.join("timeseries.csv"),
            snapshots: BufWriter::new(File::create(dir.join("snapshots.jsonl"))?),
            events: BufWriter::new(File::create(dir.join("events.jsonl"))?),
        })
    }

    pub fn write_header(&mut self, header: &gsqg_core::io::CakeHeader) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.snapshots, header)?;
        self.snapshots.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        if let Some(s) = self.series.as_mut() {
            s.flush().map_err(std::io::Error::other)?;
        }
        self.snapshots.flush()?;
        self.events.flush()
    }
}

impl OutputSink<f64> for FileSink {
    fn record(&mut self, record: &Record<f64>, labels: &[String]) -> std::io::Result<()> {
        if self.series.is_none() {
            let file = BufWriter::new(File::create(&self.series_path)?);
            self.series = Some(TimeSeriesWriter::new(file, labels).map_err(std::io::Error::other)?);
        }
        let series = self.series.as_mut().expect("series writer created above");
        series.write(record).map_err(std::io::Error::other)
    }

    fn snapshot(&mut self, t: f64, step: usize, cake: &LayerCake<f64>) -> std::io::Result<()> {
        write_snapshot(&mut self.snapshots, cake, Some((t, step))).map_err(std::io::Error::other)
    }

    fn event(&mut self, event: &Event) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.events, event)?;
        self.events.write_all(b"\n")
    }
}

/// Exclusive ownership of an output directory, released on drop.
pub struct OutputLock {
    path: std::path::PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(".gsqg.lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked(dir.to_path_buf())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub termination: Termination,
    pub state: SimState<f64>,
}

impl RunSummary {
    pub fn final_record(&self) -> &Record<f64> {
        self.state.history.last().expect("a run always records its initial state")
    }

    pub fn envelope_violations(&self) -> usize {
        self.state.events.iter().filter(|e| e.kind == EventKind::EnvelopeViolation).count()
    }

    /// Exit status: 0 completed, 2 event, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self.termination {
            Termination::Completed => 0,
            Termination::Event(EventKind::QuadratureFailure) => 3,
            Termination::Event(_) => 2,
        }
    }
}

/// Runs the configured preset to `t_end`, writing every output into `dir`.
pub fn run_into(cfg: &RunConfig, dir: &Path) -> Result<RunSummary, CliError> {
    let inst = presets::build(cfg, cfg.levels)?;
    let mut evo = cfg.evolution_config();
    evo.stepper.velocity.external = inst.external;
    let mut state = SimState::new(inst.cake.clone(), evo)?;
    let mut sink = FileSink::create(dir)?;
    sink.write_header(&inst.header)?;
    let termination = state.run_until(cfg.t_end, &mut sink)?;
    sink.finish()?;
    let summary = RunSummary { termination, state };
    crate::write_file(&dir.join("report.txt"), render_report(cfg, &summary).as_bytes())?;
    Ok(summary)
}

pub fn render_report(cfg: &RunConfig, run: &RunSummary) -> String {
    let s = &run.state;
    let rec = run.final_record();
    let d = &rec.diagnostics;
    let mut out = String::new();
    let termination = match run.termination {
        Termination::Completed => "completed".to_string(),
        Termination::Event(kind) => format!("event {}", serde_json::to_string(&kind).unwrap_or_default().trim_matches('"')),
    };
    let _ = writeln!(out, "preset = {}", cfg.preset);
    let _ = writeln!(out, "termination = {termination}");
    let _ = writeln!(out, "exit_code = {}", run.exit_code());
    let _ = writeln!(out, "t = {}", s.t);
    let _ = writeln!(out, "t_end = {}", cfg.t_end);
    let _ = writeln!(out, "steps = {}", s.steps);
    let _ = writeln!(out, "curves = {}", s.cake.len());
    let _ = writeln!(out, "eta = {}", s.eta());
    let _ = writeln!(out, "area_drift = {}", rec.area_drift);
    let _ = writeln!(out, "area_drift_per_time = {}", if s.t > 0.0 { rec.area_drift / s.t } else { 0.0 });
    let _ = writeln!(out, "lip_integral = {}", rec.lip_integral);
    let _ = writeln!(out, "sup_u_integral = {}", rec.sup_u_integral);
    let _ = writeln!(out, "L_eta = {}", d.l_eta);
    let _ = writeln!(out, "R_eta = {}", d.r_eta);
    let _ = writeln!(out, "Q = {}", d.q);
    let _ = writeln!(out, "Lambda = {}", d.lambda);
    let _ = writeln!(out, "Sigma = {}", d.sigma);
    let _ = writeln!(out, "min_delta = {}", d.min_pairwise_delta);
    let _ = writeln!(out, "max_kappa = {}", d.max_kappa);
    let _ = writeln!(out, "records = {}", s.history.len());
    let _ = writeln!(out, "envelope_violations = {}", run.envelope_violations());
    let _ = writeln!(out, "events = {}", s.events.len());
    for e in &s.events {
        let kind = serde_json::to_string(&e.kind).unwrap_or_default();
        let _ = writeln!(out, "  {} t={} step={} [{}] value={} threshold={}: {}", kind.trim_matches('"'), e.t, e.step, e.labels.join(","), e.value, e.threshold, e.detail);
    }
    out
}
