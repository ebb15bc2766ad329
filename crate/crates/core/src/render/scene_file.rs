//! TOML scene documents.
//!
//! ```toml
//! format_version = 1
//! environment_radiance = [0.0, 0.0, 0.0]
//!
//! [camera]
//! position = [0.0, 0.0, 3.4]
//! forward = [0.0, 0.0, -1.0]
//! up = [0.0, 1.0, 0.0]
//! vfov = 0.698          # radians
//! width = 64
//! height = 64
//!
//! [[materials]]
//! albedo = [0.73, 0.73, 0.73]
//! emission = [0.0, 0.0, 0.0]   # optional
//!
//! [[primitives]]
//! shape = "sphere"
//! center = [0.0, 0.0, -1.0]
//! radius = 0.5
//! material = 0
//!
//! [[primitives]]
//! shape = "triangle"
//! vertices = [[-1.0, -1.0, -1.0], [1.0, -1.0, -1.0], [0.0, 1.0, -1.0]]
//! material = 0
//!
//! [render]                      # optional
//! samples_per_pixel = 64
//! max_path_depth = 8
//! rng_seed = 1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::math::Rgb;

use super::camera::Camera;
use super::integrator::RenderConfig;
use super::scene::{Material, Primitive, Scene};
use super::RenderError;

pub const SCENE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub format_version: u32,
    pub environment_radiance: Rgb,
    pub camera: Camera,
    pub materials: Vec<Material>,
    #[serde(default)]
    pub primitives: Vec<Primitive>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render: Option<RenderConfig>,
}

impl SceneFile {
    pub fn new(scene: &Scene, camera: Camera, render: Option<RenderConfig>) -> Self {
        Self {
            format_version: SCENE_FORMAT_VERSION,
            environment_radiance: scene.environment_radiance,
            camera,
            materials: scene.materials.clone(),
            primitives: scene.primitives.clone(),
            render,
        }
    }

    pub fn parse(text: &str) -> Result<Self, RenderError> {
        let file: SceneFile = toml::from_str(text).map_err(|e| RenderError::Parse(e.to_string()))?;
        if file.format_version != SCENE_FORMAT_VERSION {
            return Err(RenderError::Parse(format!(
                "unsupported scene format_version {} (expected {SCENE_FORMAT_VERSION})",
                file.format_version
            )));
        }
        file.camera.validate()?;
        file.scene()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, RenderError> {
        let text = std::fs::read_to_string(path).map_err(|e| RenderError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene documents always serialize")
    }

    pub fn scene(&self) -> Result<Scene, RenderError> {
        Scene::new(self.materials.clone(), self.primitives.clone(), self.environment_radiance)
    }
}
