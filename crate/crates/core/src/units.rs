//! Laboratory ↔ internal unit conversions.
//!
//! Internally, angular frequencies are in rad/fs and delays in fs. The
//! laboratory inputs treat "THz" as an angular frequency, so
//! 1 THz ≡ 10⁻³ rad/fs, and 1 as ≡ 10⁻³ fs.

const SCALE: f64 = 1000.0;

pub fn thz_to_rad_per_fs(thz: f64) -> f64 {
    thz / SCALE
}

pub fn rad_per_fs_to_thz(w: f64) -> f64 {
    w * SCALE
}

pub fn as_to_fs(attoseconds: f64) -> f64 {
    attoseconds / SCALE
}

pub fn fs_to_as(fs: f64) -> f64 {
    fs * SCALE
}
