//! Discrete-event simulation of one frame rendered on a parallel machine.
//!
//! The model charges compute by node speed and communication by
//! `latency + bytes / bandwidth` per message, with a master that ingests tile
//! results serially. Efficiency is sustained throughput over the machine's
//! peak, so every second a node spends waiting on the network shows up as
//! lost efficiency.

mod archetype;
mod sim;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::archetype::{
    ArchetypeCatalog, SystemArchetype, BUILTIN_CATALOG, CATALOG_FORMAT_VERSION, CATALOG_PEAK_TOLERANCE,
};
pub use self::sim::{decompose, simulate_frame, EventKind, RenderJob, SimEvent, SimResult, Strategy};

use crate::scale::{ScaleEstimate, DEFAULT_FPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("catalog: {0}")]
    Parse(String),
}

/// Machine-readable summary shared by the scale and simulation reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRecord {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
    pub frame_time_s: f64,
    pub achieved_fps: f64,
    pub peak_tflops: f64,
    pub sustained_tflops: f64,
    pub efficiency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_processors: Option<u64>,
}

impl ThroughputRecord {
    pub fn from_sim(label: impl Into<String>, arch: &SystemArchetype, sim: &SimResult) -> Self {
        Self {
            label: label.into(),
            parameter: None,
            frame_time_s: sim.frame_time_s,
            achieved_fps: sim.achieved_fps,
            peak_tflops: sim.peak_tflops,
            sustained_tflops: sim.sustained_tflops,
            efficiency: sim.efficiency,
            n_processors: Some(arch.node_count),
        }
    }

    /// The estimate viewed as a machine that exactly meets its target rate.
    pub fn from_estimate(label: impl Into<String>, estimate: &ScaleEstimate) -> Self {
        let fps = estimate.target_fps().unwrap_or(DEFAULT_FPS);
        Self {
            label: label.into(),
            parameter: None,
            frame_time_s: 1.0 / fps,
            achieved_fps: fps,
            peak_tflops: estimate.peak_tflops,
            sustained_tflops: estimate.sustained_tflops,
            efficiency: estimate.efficiency,
            n_processors: Some(estimate.n_processors),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Latency,
    NodeCount,
    TileCount,
}

impl std::str::FromStr for SweepParameter {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "latency" => Ok(Self::Latency),
            "node_count" | "node-count" | "nodes" => Ok(Self::NodeCount),
            "tile_count" | "tile-count" | "tiles" => Ok(Self::TileCount),
            other => Err(SimError::InvalidArgument(format!(
                "unknown sweep parameter {other:?} (latency, node_count, tile_count)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub outcome: Result<SimResult, SimError>,
}

fn as_count(v: f64, what: &str) -> Result<u64, SimError> {
    if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(SimError::InvalidArgument(format!("{what} must be a positive integer, got {v}")))
    }
}

/// One simulation per grid value. A bad value yields an error row; the sweep
/// carries on with the rest. A tile-count sweep re-splits the job uniformly.
pub fn sweep(
    arch: &SystemArchetype,
    job: &RenderJob,
    ref_gflops: f64,
    parameter: SweepParameter,
    grid: &[f64],
) -> Result<Vec<SweepRow>, SimError> {
    if grid.is_empty() {
        return Err(SimError::InvalidArgument("sweep grid is empty".into()));
    }
    let rows = grid
        .iter()
        .map(|&value| {
            let outcome = (|| {
                let mut arch = arch.clone();
                let mut job = job.clone();
                match parameter {
                    SweepParameter::Latency => {
                        if !(value.is_finite() && value >= 0.0) {
                            return Err(SimError::InvalidArgument(format!("latency must be >= 0, got {value}")));
                        }
                        arch.link_latency_s = value;
                    }
                    SweepParameter::NodeCount => {
                        arch.node_count = as_count(value, "node_count")?;
                        // A resized machine no longer matches its published peak.
                        arch.catalog_peak_tflops = None;
                        arch.catalog_sustained_tflops = None;
                    }
                    SweepParameter::TileCount => {
                        let tiles = as_count(value, "tile_count")? as usize;
                        job = decompose(job.total_work_s_ref, tiles, Strategy::Uniform)?
                            .with_result_bytes(job.bytes_per_tile_result)
                            .with_geometry_bytes(job.geometry_bytes_per_worker);
                    }
                }
                let mut r = simulate_frame(&arch, &job, ref_gflops)?;
                r.event_log = Vec::new();
                Ok(r)
            })();
            SweepRow { parameter: value, outcome }
        })
        .collect();
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: [&str; 7] =
    ["parameter", "frame_time_s", "achieved_fps", "peak_tflops", "sustained_tflops", "efficiency", "error"];

/// Writes sweep rows as CSV with a header row. Error rows leave the numeric
/// columns empty and fill `error`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for row in rows {
        let p = row.parameter.to_string();
        match &row.outcome {
            Ok(r) => w.write_record([
                p,
                r.frame_time_s.to_string(),
                r.achieved_fps.to_string(),
                r.peak_tflops.to_string(),
                r.sustained_tflops.to_string(),
                r.efficiency.to_string(),
                String::new(),
            ])?,
            Err(e) => w.write_record([
                p,
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ])?,
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtsVerdict {
    pub pass: bool,
    pub target_fps: f64,
    pub achieved_fps: f64,
    pub reasons: Vec<String>,
}

/// A machine passes when it reaches the target frame rate and can be run
/// interactively. The target comes from `required`'s basis, defaulting to 30 fps.
pub fn gts_verdict(arch: &SystemArchetype, required: &ScaleEstimate, sim: &SimResult) -> GtsVerdict {
    let target_fps = required.target_fps().unwrap_or(DEFAULT_FPS);
    let mut reasons = Vec::new();
    if sim.achieved_fps < target_fps {
        reasons.push(format!("frame rate {:.4} fps below interactive target {target_fps} fps", sim.achieved_fps));
    }
    if !arch.interactive {
        reasons.push(format!(
            "{} is not interactive (batch-queued or wide-area system, typically not run interactively)",
            arch.name
        ));
    }
    GtsVerdict { pass: reasons.is_empty(), target_fps, achieved_fps: sim.achieved_fps, reasons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::{extrapolate, CpuDescriptor, TargetInteractivity, WorkloadMeasurement};

    fn required() -> ScaleEstimate {
        extrapolate(&WorkloadMeasurement::parthenon(), &TargetInteractivity::default(), 0.5, &CpuDescriptor::pentium4())
            .unwrap()
    }

    fn sim_at_fps(fps: f64) -> SimResult {
        SimResult {
            frame_time_s: 1.0 / fps,
            achieved_fps: fps,
            peak_tflops: 1.0,
            sustained_tflops: 0.5,
            efficiency: 0.5,
            workers: 1,
            worker_busy_s: vec![],
            event_log: vec![],
        }
    }

    #[test]
    fn verdict_examples() {
        let grid = ArchetypeCatalog::builtin().get("Grid-1M").unwrap().clone();
        let v = gts_verdict(&grid, &required(), &sim_at_fps(1000.0));
        assert!(!v.pass);
        assert!(v.reasons.iter().any(|r| r.contains("not interactive")));

        let live = SystemArchetype::ideal("live", 4, 1.0);
        assert!(gts_verdict(&live, &required(), &sim_at_fps(30.0)).pass);

        let slow = gts_verdict(&live, &required(), &sim_at_fps(15.0));
        assert!(!slow.pass);
        assert_eq!(slow.reasons.len(), 1);
        assert!(slow.reasons[0].contains("fps"));
    }

    #[test]
    fn sweep_rows_and_errors() {
        let arch = SystemArchetype::ideal("four", 4, 1.0);
        let job = decompose(4.0, 4, Strategy::Uniform).unwrap();
        let rows = sweep(&arch, &job, 1.0, SweepParameter::Latency, &[0.0, -1.0, 0.5]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].outcome.as_ref().unwrap().efficiency, 1.0);
        assert!(rows[1].outcome.is_err());
        assert!(rows[2].outcome.as_ref().unwrap().efficiency < 1.0);

        let rows = sweep(&arch, &job, 1.0, SweepParameter::NodeCount, &[1.0, 2.5]).unwrap();
        assert_eq!(rows[0].outcome.as_ref().unwrap().frame_time_s, 4.0);
        assert!(rows[1].outcome.is_err());

        let rows = sweep(&arch, &job, 1.0, SweepParameter::TileCount, &[8.0]).unwrap();
        assert_eq!(rows[0].outcome.as_ref().unwrap().frame_time_s, 1.0);

        assert!(sweep(&arch, &job, 1.0, SweepParameter::Latency, &[]).is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let arch = SystemArchetype::ideal("two", 2, 1.0);
        let job = decompose(2.0, 2, Strategy::Uniform).unwrap();
        let rows = sweep(&arch, &job, 1.0, SweepParameter::Latency, &[0.0, f64::NAN]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "parameter,frame_time_s,achieved_fps,peak_tflops,sustained_tflops,efficiency,error");
        assert_eq!(lines[1], "0,1,1,0.002,0.002,1,");
        assert!(lines[2].starts_with("NaN,,,,,,"));
    }

    #[test]
    fn parameter_names() {
        assert_eq!("latency".parse::<SweepParameter>().unwrap(), SweepParameter::Latency);
        assert_eq!("nodes".parse::<SweepParameter>().unwrap(), SweepParameter::NodeCount);
        assert!("bandwidth".parse::<SweepParameter>().is_err());
    }
}
