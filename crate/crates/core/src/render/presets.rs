//! Built-in scenes.

use crate::math::{Rgb, Vec3};

use super::camera::Camera;
use super::scene::{Material, Primitive, Scene};

/// Two triangles covering the planar quad `a b c d` (given in winding order).
fn quad(a: Vec3, b: Vec3, c: Vec3, d: Vec3, material: usize) -> [Primitive; 2] {
    [Primitive::triangle(a, b, c, material), Primitive::triangle(a, c, d, material)]
}

/// A Cornell-style box: white floor, ceiling and back wall, red left and
/// green right wall, an open front, a small ceiling emitter and two spheres.
pub fn cornell_box() -> Scene {
    let white = 0;
    let red = 1;
    let green = 2;
    let light = 3;
    let materials = vec![
        Material::diffuse(Rgb::splat(0.73)),
        Material::diffuse(Rgb::new(0.65, 0.05, 0.05)),
        Material::diffuse(Rgb::new(0.12, 0.45, 0.15)),
        Material::emitter(Rgb::splat(12.0)),
    ];
    let v = Vec3::new;
    let mut prims = Vec::new();
    // floor, ceiling, back
    prims.extend(quad(v(-1., -1., 1.), v(1., -1., 1.), v(1., -1., -1.), v(-1., -1., -1.), white));
    prims.extend(quad(v(-1., 1., 1.), v(-1., 1., -1.), v(1., 1., -1.), v(1., 1., 1.), white));
    prims.extend(quad(v(-1., -1., -1.), v(1., -1., -1.), v(1., 1., -1.), v(-1., 1., -1.), white));
    prims.extend(quad(v(-1., -1., 1.), v(-1., -1., -1.), v(-1., 1., -1.), v(-1., 1., 1.), red));
    prims.extend(quad(v(1., -1., -1.), v(1., -1., 1.), v(1., 1., 1.), v(1., 1., -1.), green));
    prims.extend(quad(v(-0.3, 0.999, 0.3), v(-0.3, 0.999, -0.3), v(0.3, 0.999, -0.3), v(0.3, 0.999, 0.3), light));
    prims.push(Primitive::sphere(v(-0.4, -0.6, -0.3), 0.4, white));
    prims.push(Primitive::sphere(v(0.45, -0.65, 0.25), 0.35, white));
    Scene::new(materials, prims, Rgb::ZERO).expect("preset is valid")
}

pub fn cornell_camera(width: u32, height: u32) -> Camera {
    Camera {
        position: Vec3::new(0.0, 0.0, 3.4),
        forward: Vec3::new(0.0, 0.0, -1.0),
        up: Vec3::new(0.0, 1.0, 0.0),
        vfov: 40f64.to_radians(),
        width,
        height,
    }
}

/// Unit-albedo open-top box holding a unit-albedo sphere, lit only by a unit
/// environment. Every pixel converges to 1.
pub fn furnace() -> Scene {
    let v = Vec3::new;
    let mut prims = Vec::new();
    prims.extend(quad(v(-1., 0., 1.), v(1., 0., 1.), v(1., 0., -1.), v(-1., 0., -1.), 0));
    prims.extend(quad(v(-1., 0., -1.), v(1., 0., -1.), v(1., 1., -1.), v(-1., 1., -1.), 0));
    prims.extend(quad(v(-1., 0., 1.), v(-1., 0., -1.), v(-1., 1., -1.), v(-1., 1., 1.), 0));
    prims.extend(quad(v(1., 0., -1.), v(1., 0., 1.), v(1., 1., 1.), v(1., 1., -1.), 0));
    prims.extend(quad(v(1., 0., 1.), v(-1., 0., 1.), v(-1., 1., 1.), v(1., 1., 1.), 0));
    prims.push(Primitive::sphere(v(0.0, 0.45, 0.0), 0.45, 0));
    Scene::new(vec![Material::diffuse(Rgb::ONE)], prims, Rgb::ONE).expect("preset is valid")
}

pub fn furnace_camera(width: u32, height: u32) -> Camera {
    Camera {
        position: Vec3::new(0.0, 3.0, 2.2),
        forward: Vec3::new(0.0, -3.0, -2.2),
        up: Vec3::new(0.0, 1.0, 0.0),
        vfov: 45f64.to_radians(),
        width,
        height,
    }
}

/// Named preset lookup: `"cornell"` or `"furnace"`.
pub fn by_name(name: &str, width: u32, height: u32) -> Option<(Scene, Camera)> {
    match name {
        "cornell" => Some((cornell_box(), cornell_camera(width, height))),
        "furnace" => Some((furnace(), furnace_camera(width, height))),
        _ => None,
    }
}

pub const NAMES: &[&str] = &["cornell", "furnace"];
