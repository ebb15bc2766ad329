//! Compute-scale arithmetic: how many reference processors, and how many
//! TFlops peak and sustained, are needed to render one frame per display
//! interval when a single reference CPU needs `seconds_per_frame`.
//!
//! All functions are pure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn positive(name: &str, v: f64) -> Result<f64, ScaleError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ScaleError::InvalidArgument(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Default algorithmic efficiency (sustained / peak).
pub const DEFAULT_EFFICIENCY: f64 = 0.5;
/// Default interactive frame rate.
pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpuDescriptor {
    pub name: String,
    pub clock_ghz: f64,
    pub gflops: f64,
}

impl CpuDescriptor {
    pub fn new(name: impl Into<String>, clock_ghz: f64, gflops: f64) -> Result<Self, ScaleError> {
        Ok(Self {
            name: name.into(),
            clock_ghz: positive("clock_ghz", clock_ghz)?,
            gflops: positive("gflops", gflops)?,
        })
    }

    /// 2.4 GHz Pentium IV at 2 floating-point operations per cycle (4.8 GFlops).
    pub fn pentium4() -> Self {
        Self { name: "Pentium IV 2.4 GHz".into(), clock_ghz: 2.4, gflops: 4.8 }
    }

    pub fn validate(&self) -> Result<(), ScaleError> {
        positive("clock_ghz", self.clock_ghz)?;
        positive("gflops", self.gflops)?;
        Ok(())
    }
}

/// Single-CPU cost of one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadMeasurement {
    pub seconds_per_frame: f64,
    pub reference: CpuDescriptor,
}

impl WorkloadMeasurement {
    pub fn new(seconds_per_frame: f64, reference: CpuDescriptor) -> Result<Self, ScaleError> {
        reference.validate()?;
        Ok(Self { seconds_per_frame: positive("seconds_per_frame", seconds_per_frame)?, reference })
    }

    /// The photoreal reference frame: two hours on a 2.4 GHz Pentium IV.
    pub fn parthenon() -> Self {
        Self { seconds_per_frame: 7200.0, reference: CpuDescriptor::pentium4() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetInteractivity {
    pub frames_per_second: f64,
}

impl TargetInteractivity {
    pub fn new(frames_per_second: f64) -> Result<Self, ScaleError> {
        Ok(Self { frames_per_second: positive("frames_per_second", frames_per_second)? })
    }
}

impl Default for TargetInteractivity {
    fn default() -> Self {
        Self { frames_per_second: DEFAULT_FPS }
    }
}

/// Inputs an estimate was extrapolated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBasis {
    pub measurement: WorkloadMeasurement,
    pub target: TargetInteractivity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub n_processors: u64,
    pub per_cpu_gflops: f64,
    pub peak_tflops: f64,
    pub sustained_tflops: f64,
    pub efficiency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<ScaleBasis>,
}

impl ScaleEstimate {
    /// Frame rate the estimate was sized for, if it came from [`extrapolate`].
    pub fn target_fps(&self) -> Option<f64> {
        self.basis.as_ref().map(|b| b.target.frames_per_second)
    }
}

fn check_efficiency(efficiency: f64) -> Result<f64, ScaleError> {
    if efficiency > 0.0 && efficiency <= 1.0 {
        Ok(efficiency)
    } else {
        Err(ScaleError::InvalidArgument(format!("efficiency must lie in (0, 1], got {efficiency}")))
    }
}

/// Processors needed so that one frame costing `seconds_per_frame` on one CPU
/// completes within `1 / fps`: `ceil(seconds_per_frame * fps)`.
///
/// Products within 1e-9 relative of an integer are taken as that integer, so
/// `(1/30 s) * 30 fps` is 1 rather than 2.
pub fn required_parallelism(
    measurement: &WorkloadMeasurement,
    target: &TargetInteractivity,
) -> Result<u64, ScaleError> {
    let spf = positive("seconds_per_frame", measurement.seconds_per_frame)?;
    let fps = positive("frames_per_second", target.frames_per_second)?;
    let product = spf * fps;
    if product >= u64::MAX as f64 {
        return Err(ScaleError::InvalidArgument(format!("processor count {product} overflows")));
    }
    let nearest = product.round();
    let n = if (product - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { product.ceil() };
    Ok((n as u64).max(1))
}

/// Peak and sustained TFlops of `n` processors of `per_cpu` running an
/// algorithm of the given efficiency.
pub fn turing_scale(n: u64, per_cpu: &CpuDescriptor, efficiency: f64) -> Result<ScaleEstimate, ScaleError> {
    let efficiency = check_efficiency(efficiency)?;
    per_cpu.validate()?;
    if n == 0 {
        return Err(ScaleError::InvalidArgument("processor count must be >= 1".into()));
    }
    let peak_tflops = n as f64 * per_cpu.gflops / 1000.0;
    Ok(ScaleEstimate {
        n_processors: n,
        per_cpu_gflops: per_cpu.gflops,
        peak_tflops,
        sustained_tflops: peak_tflops * efficiency,
        efficiency,
        basis: None,
    })
}

/// [`required_parallelism`] followed by [`turing_scale`], keeping the inputs.
pub fn extrapolate(
    measurement: &WorkloadMeasurement,
    target: &TargetInteractivity,
    efficiency: f64,
    per_cpu: &CpuDescriptor,
) -> Result<ScaleEstimate, ScaleError> {
    let n = required_parallelism(measurement, target)?;
    let mut estimate = turing_scale(n, per_cpu, efficiency)?;
    estimate.basis = Some(ScaleBasis { measurement: measurement.clone(), target: *target });
    Ok(estimate)
}

/// A machine's rated throughput.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineRating {
    pub peak_tflops: f64,
    pub sustained_tflops: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVerdict {
    pub pass: bool,
    /// Machine sustained minus required sustained, TFlops.
    pub margin_tflops: f64,
}

/// Compares sustained throughput; equality passes.
pub fn passes_threshold(machine: &MachineRating, required: &ScaleEstimate) -> ThresholdVerdict {
    ThresholdVerdict {
        pass: machine.sustained_tflops >= required.sustained_tflops,
        margin_tflops: machine.sustained_tflops - required.sustained_tflops,
    }
}
