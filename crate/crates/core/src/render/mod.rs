//! Deterministic Monte Carlo path tracer.
//!
//! Lambertian surfaces only, cosine-weighted hemisphere sampling and a fixed
//! interaction budget per path, so expected pixel values have closed forms in
//! simple scenes. Output images are bit-identical for identical inputs no matter
//! how many threads render them.

mod camera;
mod image;
mod integrator;
pub mod presets;
mod sampling;
mod scene;
mod scene_file;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::camera::Camera;
pub use self::image::{Image, DISPLAY_GAMMA};
pub use self::integrator::{estimate_radiance, render, render_with_workers, RenderConfig, RenderOutput};
pub use self::sampling::{cosine_hemisphere, sample_stream, stratified_offset};
pub use self::scene::{Hit, Material, Primitive, Scene, Shape, EPSILON_T};
pub use self::scene_file::{SceneFile, SCENE_FORMAT_VERSION};

use crate::scale::{CpuDescriptor, WorkloadMeasurement};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("scene file: {0}")]
    Parse(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("encoding {0}: {1}")]
    Encode(String, String),
    #[error("internal: {0}")]
    Internal(String),
}

/// Single-worker timing of repeated renders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameTiming {
    /// Median over `samples`.
    pub seconds_per_frame: f64,
    pub samples: Vec<f64>,
    pub reference: CpuDescriptor,
}

impl FrameTiming {
    pub fn workload(&self) -> Result<WorkloadMeasurement, crate::scale::ScaleError> {
        WorkloadMeasurement::new(self.seconds_per_frame, self.reference.clone())
    }
}

/// Median of a non-empty slice; even lengths average the two middle values.
pub fn median_seconds(times: &[f64]) -> Option<f64> {
    if times.is_empty() {
        return None;
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) })
}

/// Renders `repetitions` times on one worker and reports the median wall time,
/// tagged with the caller's description of this machine.
pub fn measure_frame_time(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    repetitions: u32,
    reference: CpuDescriptor,
) -> Result<FrameTiming, RenderError> {
    if repetitions == 0 {
        return Err(RenderError::InvalidArgument("repetitions must be >= 1".into()));
    }
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| RenderError::Internal(e.to_string()))?;
    let mut samples = Vec::with_capacity(repetitions as usize);
    for _ in 0..repetitions {
        let start = Instant::now();
        pool.install(|| render(scene, camera, config))?;
        // Tiny scenes can finish below the clock resolution.
        samples.push(start.elapsed().as_secs_f64().max(1e-9));
    }
    let seconds_per_frame = median_seconds(&samples).expect("at least one repetition");
    Ok(FrameTiming { seconds_per_frame, samples, reference })
}
