//! Ball volumes and the spherical cap fraction.

use std::f64::consts::PI;

use serde::Serialize;

use crate::special::betainc;

/// Volume of the unit ball and area of the unit sphere in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeConstants {
    pub n: u32,
    pub unit_ball_volume: f64,
    pub unit_sphere_area: f64,
}

impl VolumeConstants {
    pub fn new(n: u32) -> Self {
        // v_0 = 1, v_1 = 2, v_n = (2 pi / n) v_{n-2}
        let mut v = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
        let mut k = 2 + n % 2;
        while k <= n {
            v *= 2.0 * PI / k as f64;
            k += 2;
        }
        Self {
            n,
            unit_ball_volume: v,
            unit_sphere_area: n as f64 * v,
        }
    }

    /// `|B(a, r)| = v_n r^n`.
    pub fn ball_volume(&self, r: f64) -> f64 {
        self.unit_ball_volume * r.powi(self.n as i32)
    }
}

/// Fraction of the sphere `{|x| = t}` lying inside a ball of radius `r`
/// whose center is at distance `d` from the origin.
pub fn cap_fraction(t: f64, d: f64, r: f64, n: u32) -> f64 {
    if t + d <= r {
        return 1.0;
    }
    if (t - d).abs() >= r {
        return 0.0;
    }
    if n == 1 {
        // the sphere is {-t, t}; the ball is (d - r, d + r)
        let plus = (t - d).abs() < r;
        let minus = t + d < r;
        return 0.5 * (plus as u8 + minus as u8) as f64;
    }
    partial_cap_fraction(t, d, r, n, t - (r - d).abs(), r + d - t)
}

/// `1 - cos(theta)` and `1 + cos(theta)` for the cap half-angle, from the
/// distances `e_lo = t - |r - d|` and `e_hi = r + d - t` of the shell radius
/// to the ends of the partially covered range. The factored forms avoid the
/// cancellation in `(t^2 + d^2 - r^2) / (2td)` for small, distant balls.
fn cos_complements(t: f64, d: f64, r: f64, e_lo: f64, e_hi: f64) -> (f64, f64) {
    let gap2 = 2.0 * (r - d).abs();
    // r + t - d and t + d - r
    let (rtd, tdr) = if d >= r { (e_lo, e_lo + gap2) } else { (e_lo + gap2, e_lo) };
    let denom = 2.0 * t * d;
    let one_minus = (e_hi * rtd / denom).clamp(0.0, 2.0);
    let one_plus = (tdr * (t + d + r) / denom).clamp(0.0, 2.0);
    (one_minus, one_plus)
}

/// Cap fraction for a shell inside the partially covered range, `n >= 2`.
pub(crate) fn partial_cap_fraction(t: f64, d: f64, r: f64, n: u32, e_lo: f64, e_hi: f64) -> f64 {
    let (one_minus, one_plus) = cos_complements(t, d, r, e_lo, e_hi);
    match n {
        // arc length over circumference
        2 => 2.0 * one_minus.sqrt().atan2(one_plus.sqrt()) / PI,
        // Archimedes: area proportional to the cap height
        3 => 0.5 * one_minus,
        _ => {
            let sin2 = (one_minus * one_plus).min(1.0);
            let half = 0.5 * betainc(0.5 * (n as f64 - 1.0), 0.5, sin2);
            if one_minus <= one_plus {
                half
            } else {
                1.0 - half
            }
        }
    }
}

/// Incomplete-beta route for every `n >= 2`, used to cross-check the
/// low-dimension shortcuts in `cap_fraction`.
#[cfg(test)]
pub(crate) fn cap_fraction_beta(t: f64, d: f64, r: f64, n: u32) -> f64 {
    if t + d <= r {
        return 1.0;
    }
    if (t - d).abs() >= r {
        return 0.0;
    }
    let (one_minus, one_plus) = cos_complements(t, d, r, t - (r - d).abs(), r + d - t);
    let half = 0.5 * betainc(0.5 * (n as f64 - 1.0), 0.5, (one_minus * one_plus).min(1.0));
    if one_minus <= one_plus {
        half
    } else {
        1.0 - half
    }
}
