use serde::{Deserialize, Serialize};

use crate::math::{Ray, Rgb, Vec3};

use super::RenderError;

/// Hits closer than this along a ray are ignored (self-intersection guard), in meters.
pub const EPSILON_T: f64 = 1e-4;

/// Lambertian surface description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub albedo: Rgb,
    #[serde(default)]
    pub emission: Rgb,
}

impl Material {
    pub fn diffuse(albedo: Rgb) -> Self {
        Self { albedo, emission: Rgb::ZERO }
    }

    pub fn emitter(emission: Rgb) -> Self {
        Self { albedo: Rgb::ZERO, emission }
    }

    fn validate(&self, index: usize) -> Result<(), RenderError> {
        let albedo_ok =
            self.albedo.is_finite() && self.albedo.min_component() >= 0.0 && self.albedo.max_component() <= 1.0;
        if !albedo_ok {
            return Err(RenderError::InvalidScene(format!(
                "material {index}: albedo {:?} outside [0, 1]",
                self.albedo.to_array()
            )));
        }
        if !self.emission.is_finite() || self.emission.min_component() < 0.0 {
            return Err(RenderError::InvalidScene(format!(
                "material {index}: emission must be finite and non-negative"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Sphere { center: Vec3, radius: f64 },
    Triangle { vertices: [Vec3; 3] },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(flatten)]
    pub shape: Shape,
    pub material: usize,
}

impl Primitive {
    pub fn sphere(center: Vec3, radius: f64, material: usize) -> Self {
        Self { shape: Shape::Sphere { center, radius }, material }
    }

    pub fn triangle(a: Vec3, b: Vec3, c: Vec3, material: usize) -> Self {
        Self { shape: Shape::Triangle { vertices: [a, b, c] }, material }
    }

    /// Distance along `ray` to the nearest hit beyond [`EPSILON_T`], with the
    /// outward geometric normal at that point.
    fn hit(&self, ray: &Ray) -> Option<(f64, Vec3)> {
        match self.shape {
            Shape::Sphere { center, radius } => {
                let oc = ray.origin - center;
                let half_b = oc.dot(ray.direction);
                let c = oc.dot(oc) - radius * radius;
                let disc = half_b * half_b - c;
                if disc < 0.0 {
                    return None;
                }
                let root = disc.sqrt();
                let mut t = -half_b - root;
                if t <= EPSILON_T {
                    t = -half_b + root;
                    if t <= EPSILON_T {
                        return None;
                    }
                }
                Some((t, (ray.at(t) - center) / radius))
            }
            Shape::Triangle { vertices: [a, b, c] } => {
                // Möller–Trumbore
                let e1 = b - a;
                let e2 = c - a;
                let p = ray.direction.cross(e2);
                let det = e1.dot(p);
                if det.abs() < 1e-12 {
                    return None;
                }
                let inv = 1.0 / det;
                let s = ray.origin - a;
                let u = s.dot(p) * inv;
                if !(0.0..=1.0).contains(&u) {
                    return None;
                }
                let q = s.cross(e1);
                let v = ray.direction.dot(q) * inv;
                if v < 0.0 || u + v > 1.0 {
                    return None;
                }
                let t = e2.dot(q) * inv;
                if t <= EPSILON_T {
                    return None;
                }
                Some((t, e1.cross(e2).normalized()))
            }
        }
    }

    fn validate(&self, index: usize, material_count: usize) -> Result<(), RenderError> {
        if self.material >= material_count {
            return Err(RenderError::InvalidScene(format!(
                "primitive {index}: material id {} does not resolve ({material_count} materials)",
                self.material
            )));
        }
        match self.shape {
            Shape::Sphere { center, radius } => {
                if !center.is_finite() || !(radius > 0.0 && radius.is_finite()) {
                    return Err(RenderError::InvalidScene(format!(
                        "primitive {index}: sphere needs a finite center and radius > 0"
                    )));
                }
            }
            Shape::Triangle { vertices: [a, b, c] } => {
                let area2 = (b - a).cross(c - a).length();
                let scale = (b - a).length().max((c - a).length());
                if !(a.is_finite() && b.is_finite() && c.is_finite()) || area2 <= 1e-12 * scale * scale {
                    return Err(RenderError::InvalidScene(format!(
                        "primitive {index}: triangle vertices are collinear or not finite"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Result of a successful ray query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub distance: f64,
    /// Unit normal facing against the incoming ray.
    pub normal: Vec3,
    pub material: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub materials: Vec<Material>,
    pub primitives: Vec<Primitive>,
    pub environment_radiance: Rgb,
}

impl Scene {
    /// Builds a scene and checks every invariant.
    pub fn new(
        materials: Vec<Material>,
        primitives: Vec<Primitive>,
        environment_radiance: Rgb,
    ) -> Result<Self, RenderError> {
        let scene = Self { materials, primitives, environment_radiance };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        for (i, m) in self.materials.iter().enumerate() {
            m.validate(i)?;
        }
        for (i, p) in self.primitives.iter().enumerate() {
            p.validate(i, self.materials.len())?;
        }
        let env = self.environment_radiance;
        if !env.is_finite() || env.min_component() < 0.0 {
            return Err(RenderError::InvalidScene("environment radiance must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Nearest intersection along `ray`. Linear scan over all primitives.
    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        debug_assert!((ray.direction.length() - 1.0).abs() < 1e-9);
        let mut best: Option<Hit> = None;
        for prim in &self.primitives {
            if let Some((t, n)) = prim.hit(ray) {
                if best.is_none_or(|b| t < b.distance) {
                    let normal = if n.dot(ray.direction) > 0.0 { -n } else { n };
                    best = Some(Hit { distance: t, normal, material: prim.material });
                }
            }
        }
        best
    }

    pub fn material(&self, id: usize) -> &Material {
        &self.materials[id]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_sphere_scene() -> Scene {
        Scene::new(
            vec![Material::diffuse(Rgb::splat(0.5))],
            vec![Primitive::sphere(Vec3::new(0.0, 0.0, -3.0), 1.0, 0)],
            Rgb::ZERO,
        )
        .unwrap()
    }

    #[test]
    fn ray_hits_sphere_front() {
        let scene = unit_sphere_scene();
        let hit = scene.intersect(&Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0))).unwrap();
        assert_eq!(hit.distance, 2.0);
        assert_eq!(hit.normal, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(hit.material, 0);
    }

    #[test]
    fn ray_pointing_away_misses() {
        let scene = unit_sphere_scene();
        assert!(scene.intersect(&Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0))).is_none());
        assert!(scene.intersect(&Ray::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0))).is_none());
    }

    #[test]
    fn near_grazing_ray_matches_closed_form() {
        // Offset the ray origin sideways so it passes at distance d from the
        // sphere center; the chord half-length is sqrt(r^2 - d^2).
        let scene = unit_sphere_scene();
        for d in [0.0, 0.5, 0.9, 0.999_999, 1.0] {
            let ray = Ray::new(Vec3::new(d, 0.0, 0.0), Vec3::new(0.0, 0.0, -1.0));
            let hit = scene.intersect(&ray).expect("ray within radius must hit");
            let expected = 3.0 - (1.0_f64 - d * d).max(0.0).sqrt();
            assert!((hit.distance - expected).abs() < 1e-6, "d={d}: {} vs {expected}", hit.distance);
        }
        let outside = Ray::new(Vec3::new(1.0 + 1e-6, 0.0, 0.0), Vec3::new(0.0, 0.0, -1.0));
        assert!(scene.intersect(&outside).is_none());
    }

    #[test]
    fn inside_sphere_sees_far_wall_with_inward_normal() {
        let scene =
            Scene::new(vec![Material::diffuse(Rgb::ONE)], vec![Primitive::sphere(Vec3::ZERO, 2.0, 0)], Rgb::ZERO)
                .unwrap();
        let hit = scene.intersect(&Ray::new(Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0))).unwrap();
        assert!((hit.distance - 2.0).abs() < 1e-12);
        assert_eq!(hit.normal, Vec3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn triangle_hit_and_epsilon_guard() {
        let scene = Scene::new(
            vec![Material::diffuse(Rgb::ONE)],
            vec![Primitive::triangle(
                Vec3::new(-1.0, -1.0, -1.0),
                Vec3::new(1.0, -1.0, -1.0),
                Vec3::new(0.0, 1.0, -1.0),
                0,
            )],
            Rgb::ZERO,
        )
        .unwrap();
        let hit = scene.intersect(&Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0))).unwrap();
        assert!((hit.distance - 1.0).abs() < 1e-12);
        assert_eq!(hit.normal, Vec3::new(0.0, 0.0, 1.0));
        // Origin on the surface: the hit at t = 0 is suppressed.
        let on_surface = Ray::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, -1.0));
        assert!(scene.intersect(&on_surface).is_none());
        let beside = Ray::new(Vec3::new(5.0, 0.0, 0.0), Vec3::new(0.0, 0.0, -1.0));
        assert!(scene.intersect(&beside).is_none());
    }

    #[test]
    fn nearest_of_several_wins() {
        let scene = Scene::new(
            vec![Material::diffuse(Rgb::ONE), Material::diffuse(Rgb::ZERO)],
            vec![
                Primitive::sphere(Vec3::new(0.0, 0.0, -10.0), 1.0, 0),
                Primitive::sphere(Vec3::new(0.0, 0.0, -5.0), 1.0, 1),
            ],
            Rgb::ZERO,
        )
        .unwrap();
        let hit = scene.intersect(&Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0))).unwrap();
        assert_eq!(hit.material, 1);
        assert!((hit.distance - 4.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_scenes_are_rejected() {
        let bad_radius =
            Scene::new(vec![Material::diffuse(Rgb::ONE)], vec![Primitive::sphere(Vec3::ZERO, 0.0, 0)], Rgb::ZERO);
        assert!(matches!(bad_radius, Err(RenderError::InvalidScene(_))));

        let collinear = Scene::new(
            vec![Material::diffuse(Rgb::ONE)],
            vec![Primitive::triangle(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), Vec3::new(2.0, 2.0, 2.0), 0)],
            Rgb::ZERO,
        );
        assert!(collinear.is_err());

        let dangling = Scene::new(vec![], vec![Primitive::sphere(Vec3::ZERO, 1.0, 0)], Rgb::ZERO);
        assert!(dangling.is_err());

        let bright_albedo = Scene::new(vec![Material::diffuse(Rgb::splat(1.5))], vec![], Rgb::ZERO);
        assert!(bright_albedo.is_err());

        let negative_env = Scene::new(vec![], vec![], Rgb::new(0.0, -1.0, 0.0));
        assert!(negative_env.is_err());

        let nan_emission =
            Scene::new(vec![Material { albedo: Rgb::ZERO, emission: Rgb::new(f64::NAN, 0.0, 0.0) }], vec![], Rgb::ZERO);
        assert!(nan_emission.is_err());
    }
}
