use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::math::{Ray, Rgb};

use super::camera::Camera;
use super::image::Image;
use super::sampling::{cosine_hemisphere, sample_stream, stratified_offset};
use super::scene::Scene;
use super::RenderError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub samples_per_pixel: u32,
    /// Maximum number of surface interactions per path.
    pub max_path_depth: u32,
    pub rng_seed: u64,
}

impl RenderConfig {
    pub fn new(samples_per_pixel: u32, max_path_depth: u32, rng_seed: u64) -> Self {
        Self { samples_per_pixel, max_path_depth, rng_seed }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if self.samples_per_pixel == 0 {
            return Err(RenderError::InvalidArgument("samples_per_pixel must be >= 1".into()));
        }
        if self.max_path_depth == 0 {
            return Err(RenderError::InvalidArgument("max_path_depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// One-sample path-traced estimate of the radiance arriving along `ray`.
///
/// Each surface interaction adds the surface's emission (weighted by the path
/// throughput) and scales the throughput by the albedo; the next direction is
/// drawn from the cosine-weighted hemisphere, so the Lambertian weight is
/// exactly the albedo. Escaping rays collect the environment radiance. After
/// `max_path_depth` interactions the path contributes nothing further.
pub fn estimate_radiance<R: Rng + ?Sized>(scene: &Scene, ray: Ray, config: &RenderConfig, rng: &mut R) -> Rgb {
    let mut radiance = Rgb::ZERO;
    let mut throughput = Rgb::ONE;
    let mut ray = ray;
    for _ in 0..config.max_path_depth {
        let Some(hit) = scene.intersect(&ray) else {
            return radiance + throughput.hadamard(scene.environment_radiance);
        };
        let material = scene.material(hit.material);
        radiance += throughput.hadamard(material.emission);
        throughput = throughput.hadamard(material.albedo);
        if throughput.max_component() <= 0.0 {
            break;
        }
        let origin = ray.at(hit.distance);
        ray = Ray::new(origin, cosine_hemisphere(hit.normal, rng));
    }
    radiance
}

#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub image: Image,
    pub wall_seconds: f64,
}

/// Renders on rayon's global pool.
pub fn render(scene: &Scene, camera: &Camera, config: &RenderConfig) -> Result<RenderOutput, RenderError> {
    validate_inputs(scene, camera, config)?;
    let start = Instant::now();
    let image = render_rows(scene, camera, config);
    Ok(RenderOutput { image, wall_seconds: start.elapsed().as_secs_f64() })
}

/// Renders on a dedicated pool of `workers` threads. The image does not depend
/// on `workers`.
pub fn render_with_workers(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    workers: usize,
) -> Result<RenderOutput, RenderError> {
    validate_inputs(scene, camera, config)?;
    if workers == 0 {
        return Err(RenderError::InvalidArgument("worker count must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RenderError::Internal(e.to_string()))?;
    let start = Instant::now();
    let image = pool.install(|| render_rows(scene, camera, config));
    Ok(RenderOutput { image, wall_seconds: start.elapsed().as_secs_f64() })
}

fn validate_inputs(scene: &Scene, camera: &Camera, config: &RenderConfig) -> Result<(), RenderError> {
    camera.validate()?;
    config.validate()?;
    scene.validate()
}

fn render_rows(scene: &Scene, camera: &Camera, config: &RenderConfig) -> Image {
    let frame = camera.frame();
    let (w, h) = (camera.width as usize, camera.height as usize);
    let n = config.samples_per_pixel;
    let mut pixels = vec![Rgb::ZERO; w * h];
    pixels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, px) in row.iter_mut().enumerate() {
            let pixel_index = (y * w + x) as u64;
            let mut sum = Rgb::ZERO;
            for s in 0..n {
                let mut rng = sample_stream(config.rng_seed, pixel_index, s as u64);
                let (dx, dy) = stratified_offset(s, n, &mut rng);
                let ray = frame.ray(x as f64 + dx, y as f64 + dy);
                sum += estimate_radiance(scene, ray, config, &mut rng);
            }
            *px = sum / n as f64;
        }
    });
    Image::from_pixels(camera.width, camera.height, pixels)
}
