//! Monte Carlo error falls as 1/sqrt(N): render the Cornell preset at several
//! sample counts, compare each to a high-sample reference and fit the slope of
//! log(RMSE) against log(N).
//!
//! ```bash
//! cargo run --release -p gts-core --example cornell_convergence -- [size] [reference_spp] [out.ppm]
//! ```

use gts_core::render::{presets, render, RenderConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let size: u32 = args.next().map(|s| s.parse().expect("size")).unwrap_or(64);
    let reference_spp: u32 = args.next().map(|s| s.parse().expect("reference spp")).unwrap_or(4096);
    let out = args.next();

    let scene = presets::cornell_box();
    let camera = presets::cornell_camera(size, size);
    let depth = 8;

    let reference = render(&scene, &camera, &RenderConfig::new(reference_spp, depth, 0xC0FFEE)).unwrap();
    println!("reference: {size}x{size}, {reference_spp} spp, {:.2} s", reference.wall_seconds);
    if let Some(path) = out {
        reference.image.save(path.as_ref()).unwrap();
        println!("wrote {path}");
    }

    let counts = [4u32, 16, 64, 256];
    let mut points = Vec::new();
    for &n in &counts {
        let img = render(&scene, &camera, &RenderConfig::new(n, depth, 1)).unwrap();
        let rmse = img.image.rmse(&reference.image).unwrap();
        println!("N = {n:>4}  RMSE = {rmse:.5}  ({:.2} s)", img.wall_seconds);
        points.push(((n as f64).ln(), rmse.ln()));
    }
    let slope = least_squares_slope(&points);
    println!("log-log slope = {slope:.3} (ideal -0.5)");
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
