use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{pole_distance, LegendreFactor};

/// The double sector of angle α, optionally kept `pole_margin` away from
/// the poles iπ(ℤ + ½).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorDomain {
    pub angle: f64,
    pub pole_margin: f64,
    pub excluded_poles: bool,
}

/// Distance from d to the wedge {re^{iθ} : r ≥ 0, 0 ≤ θ ≤ α}; 0 inside.
fn wedge_distance(d: Complex64, angle: f64) -> f64 {
    let theta = d.im.atan2(d.re);
    if (0.0..=angle).contains(&theta) {
        return 0.0;
    }
    // the ray θ = 0 is at least |Im d| away, which is never the binding side here
    let off = theta - angle;
    let to_ray = if off > 0.0 && off < PI / 2.0 { d.norm() * off.sin() } else { d.norm() };
    to_ray.min(if d.re >= 0.0 { d.im.abs() } else { d.norm() })
}

impl SectorDomain {
    pub fn contains(&self, z: Complex64) -> bool {
        !self.excluded_poles || pole_distance(z) > self.pole_margin
    }

    /// Distance from the poles to the double sector of angle `angle` with
    /// apex x. Rotating the real line about x onto the ray x + ye^{iα}
    /// sweeps exactly this set.
    pub fn clearance(&self, x: f64, angle: f64) -> f64 {
        if !self.excluded_poles {
            return f64::INFINITY;
        }
        // upper wedge against poles in the upper half plane, and by symmetry
        // the lower wedge against the lower poles (apex reflected to −x)
        let kmax = (((x.abs() + 1.0) * angle.tan()) / PI).ceil() as i64 + 1;
        let mut best = f64::INFINITY;
        for k in 0..=kmax {
            let h = PI * (k as f64 + 0.5);
            for apex in [x, -x] {
                best = best.min(wedge_distance(Complex64::new(-apex, h), angle));
            }
        }
        best
    }

    /// The sector angle, reduced by factors of 0.8 until the double sector
    /// at x clears the poles by more than the margin.
    pub fn angle_for(&self, x: f64) -> Result<f64> {
        let mut angle = self.angle;
        loop {
            let d = self.clearance(x, angle);
            if d > self.pole_margin {
                return Ok(angle);
            }
            angle *= 0.8;
            if angle < 1e-3 {
                return Err(Error::PoleMargin {
                    re: x,
                    im: 0.0,
                    margin: self.pole_margin,
                    distance: d,
                });
            }
        }
    }
}

/// A with |Q_l^m(z)| ≤ A·e^{b|z|} wherever z is more than `margin` from
/// the poles, by sampling.
///
/// |Q_l^m| is iπ-periodic and decays like e^{−m|Re z|}, so with the weight
/// the maximum lies in |Im z| ≤ π/2, |Re z| ≤ 6; the margin circles around
/// ±iπ/2 are sampled densely. The sampled maximum is inflated by 5%.
pub fn legendre_bound(q: &LegendreFactor, b: f64, margin: f64) -> f64 {
    let mut best = 0.0f64;
    let mut visit = |z: Complex64| {
        if pole_distance(z) > margin {
            best = best.max(q.eval_unchecked(z).norm() * (-b * z.norm()).exp());
        }
    };
    let (nr, ni) = (600, 160);
    for i in 0..=nr {
        let re = -6.0 + 12.0 * i as f64 / nr as f64;
        for j in 0..=ni {
            visit(Complex64::new(re, -PI / 2.0 + PI * j as f64 / ni as f64));
        }
    }
    let r = margin * (1.0 + 1e-9) + 1e-12;
    for pole in [PI / 2.0, -PI / 2.0] {
        for j in 0..720 {
            let th = 2.0 * PI * j as f64 / 720.0;
            visit(Complex64::new(0.0, pole) + Complex64::from_polar(r, th));
        }
    }
    1.05 * best
}
