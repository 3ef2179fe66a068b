//! Physical constants and the SI / boundary unit conversions.
//!
//! Everything inside the crate is SI. Files, CLI flags and reports use
//! millimetres, square millimetres, degrees and ampere-turns.

use std::f64::consts::PI;

/// Permeability of free space, H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// Standard gravity used for the weight balance, m/s².
pub const GRAVITY: f64 = 9.81;

pub fn mm_to_m(v: f64) -> f64 {
    v / 1.0e3
}

pub fn mm2_to_m2(v: f64) -> f64 {
    v / 1.0e6
}

pub fn deg_to_rad(v: f64) -> f64 {
    v.to_radians()
}

pub fn rad_to_deg(v: f64) -> f64 {
    v.to_degrees()
}

/// Finds a boundary-unit value `b` with `b / scale == si` exactly.
///
/// Multiplying back by the scale can land one ulp off the value that was
/// originally parsed, so the neighbours of the naive product are probed until
/// the forward conversion reproduces `si` bit for bit.
pub fn to_boundary(si: f64, scale: f64) -> f64 {
    let guess = si * scale;
    if !guess.is_finite() || guess / scale == si {
        return guess;
    }
    let mut up = guess;
    let mut down = guess;
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        if up / scale == si {
            return up;
        }
        if down / scale == si {
            return down;
        }
    }
    guess
}

pub fn m_to_mm(v: f64) -> f64 {
    to_boundary(v, 1.0e3)
}

pub fn m2_to_mm2(v: f64) -> f64 {
    to_boundary(v, 1.0e6)
}
