#![allow(dead_code)]

use std::path::{Path, PathBuf};

/// Writes a 2x2 binary PPM filled with `v`.
pub fn write_ppm(path: &Path, v: u8) {
    let mut bytes = b"P6\n2 2\n255\n".to_vec();
    bytes.extend(std::iter::repeat_n(v, 12));
    std::fs::write(path, bytes).unwrap();
}

/// Manifest with one stimulus of each kind; ids and file names are chosen
/// so a leak is easy to spot in payloads.
pub fn manifest_dir(dir: &Path) -> PathBuf {
    let stim = dir.join("imgs");
    std::fs::create_dir_all(&stim).unwrap();
    write_ppm(&stim.join("zz-photo-file.ppm"), 200);
    write_ppm(&stim.join("zz-cg-file.ppm"), 40);
    let path = dir.join("manifest.toml");
    std::fs::write(
        &path,
        r#"format_version = 1
root = "imgs"

[[stimulus]]
id = "zz-photo-id"
kind = "real"
image_path = "zz-photo-file.ppm"
provenance = "fixture"

[[stimulus]]
id = "zz-cg-id"
kind = "synthetic"
image_path = "zz-cg-file.ppm"
"#,
    )
    .unwrap();
    path
}
