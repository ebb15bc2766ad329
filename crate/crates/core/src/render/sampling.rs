//! Random streams and hemisphere sampling.
//!
//! Every camera sample owns an independent ChaCha8 stream whose 256-bit key is
//! `(seed, pixel_index, sample_index, STREAM_TAG)` in little-endian order. A
//! sample's random numbers therefore depend only on those three integers and
//! never on which thread rendered it or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::Vec3;

const STREAM_TAG: u64 = 0x6774_745f_7061_7468; // "gtt_path"

/// Random stream for one camera sample.
pub fn sample_stream(seed: u64, pixel_index: u64, sample_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&pixel_index.to_le_bytes());
    key[16..24].copy_from_slice(&sample_index.to_le_bytes());
    key[24..32].copy_from_slice(&STREAM_TAG.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Cosine-weighted direction about the unit `normal`; pdf is `cos(theta) / pi`.
pub fn cosine_hemisphere<R: Rng + ?Sized>(normal: Vec3, rng: &mut R) -> Vec3 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let r = u1.sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    let (t, b) = normal.orthonormal_basis();
    let z = (1.0 - u1).max(0.0).sqrt();
    (t * (r * phi.cos()) + b * (r * phi.sin()) + normal * z).normalized()
}

/// Sub-pixel offset in `[0, 1)^2` for sample `index` of `count`.
///
/// The first `m*m` samples (with `m = floor(sqrt(count))`) are jittered inside
/// an `m x m` grid of strata; any remainder is uniformly distributed.
pub fn stratified_offset<R: Rng + ?Sized>(index: u32, count: u32, rng: &mut R) -> (f64, f64) {
    let m = (count as f64).sqrt().floor() as u32;
    let jx: f64 = rng.random();
    let jy: f64 = rng.random();
    if m > 0 && index < m * m {
        let cx = (index % m) as f64;
        let cy = (index / m) as f64;
        ((cx + jx) / m as f64, (cy + jy) / m as f64)
    } else {
        (jx, jy)
    }
}
