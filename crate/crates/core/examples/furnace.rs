//! White furnace: a unit-albedo box under a unit environment must render as
//! 1.0 everywhere, whatever the geometry. A gray variant (albedo and emission
//! 0.5 inside a closed sphere) must match the truncated geometric series.
//!
//! ```bash
//! cargo run --release -p gts-core --example furnace -- [spp] [depth]
//! ```

use gts_core::render::{presets, render_with_workers, Material, Primitive, RenderConfig, Scene};
use gts_core::{Rgb, Vec3};

fn main() {
    let mut args = std::env::args().skip(1);
    let spp: u32 = args.next().map(|s| s.parse().expect("spp")).unwrap_or(1024);
    let depth: u32 = args.next().map(|s| s.parse().expect("depth")).unwrap_or(32);

    let out = render_with_workers(
        &presets::furnace(),
        &presets::furnace_camera(32, 32),
        &RenderConfig::new(spp, depth, 7),
        1,
    )
    .unwrap();
    let worst = out.image.pixels().iter().flat_map(|p| [p.x, p.y, p.z]).map(|c| (c - 1.0).abs()).fold(0.0, f64::max);
    println!(
        "white furnace 32x32, {spp} spp, depth {depth}: max |pixel - 1| = {worst:.2e} ({:.2} s)",
        out.wall_seconds
    );

    let gray = Scene::new(
        vec![Material { albedo: Rgb::splat(0.5), emission: Rgb::splat(0.5) }],
        vec![Primitive::sphere(Vec3::ZERO, 5.0, 0)],
        Rgb::ZERO,
    )
    .unwrap();
    let mut camera = presets::furnace_camera(4, 4);
    camera.position = Vec3::ZERO;
    for d in [1u32, 2, 4, 8] {
        let img = render_with_workers(&gray, &camera, &RenderConfig::new(4, d, 1), 1).unwrap().image;
        let expected: f64 = (1..=d).map(|k| 0.5f64.powi(k as i32)).sum();
        println!("gray furnace depth {d}: pixel = {:.12}, series = {expected:.12}", img.get(0, 0).x);
    }
}
