//! Initial data: plane waves, the superoscillating sequence F_n, supershift
//! families and the weighted sup-distance between signals.

mod extended;
mod signal;
mod superosc;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use extended::Dyadic;
pub use signal::HolomorphicSignal;
pub use superosc::{
    compensated_combination, eval_f_n, eval_f_n_f64, superosc_coefficients, SuperoscSequence, MAX_BITS,
};

/// max over `samples` of |F(z) − φ(z)|·e^{−C|z|}.
///
/// This is a lower bound for the supremum over the whole domain; callers
/// choose and record the sample set.
pub fn supershift_metric(f: &HolomorphicSignal, phi: &HolomorphicSignal, c: f64, samples: &[Complex64]) -> Result<f64> {
    if c < 0.0 {
        return Err(Error::InvalidInput(format!("weight constant C must be nonnegative, got {c}")));
    }
    let mut worst = 0.0f64;
    for &z in samples {
        let d = (f.eval(z)? - phi.eval(z)?).norm() * (-c * z.norm()).exp();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Polar sample cloud on the closed disk |z| ≤ radius: the origin plus
/// `radii` circles with `angles` equally spaced points each.
pub fn disk_samples(radius: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=radii {
        let r = radius * i as f64 / radii as f64;
        for j in 0..angles {
            out.push(Complex64::from_polar(r, 2.0 * PI * j as f64 / angles as f64));
        }
    }
    out
}

/// Uniform rectangular grid [x0, x1] × [y0, y1] with nx × ny points.
pub fn rect_samples(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Vec<Complex64> {
    let lin = |a: f64, b: f64, n: usize, i: usize| if n <= 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Complex64::new(lin(x.0, x.1, nx, i), lin(y.0, y.1, ny, j)));
        }
    }
    out
}

/// Default weight constant 2(1 + |κ|) for the supershift metric.
pub fn default_metric_constant(kappa: Complex64) -> f64 {
    2.0 * (1.0 + kappa.norm())
}

type FamilyFn = dyn Fn(Complex64) -> HolomorphicSignal + Send + Sync;

/// A family κ ↦ φ_κ together with the set U = [−k′, k′] of frequencies
/// the approximating combinations draw from.
#[derive(Clone)]
pub struct SupershiftFamily {
    pub label: String,
    phi: Arc<FamilyFn>,
    /// k′: the combinations use φ_{κ_l} with real |κ_l| ≤ k′.
    pub freq_bound: f64,
    plane_waves: bool,
}

impl std::fmt::Debug for SupershiftFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SupershiftFamily")
            .field("label", &self.label)
            .field("freq_bound", &self.freq_bound)
            .finish_non_exhaustive()
    }
}

impl SupershiftFamily {
    pub fn new<F>(label: impl Into<String>, freq_bound: f64, phi: F) -> Self
    where
        F: Fn(Complex64) -> HolomorphicSignal + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            phi: Arc::new(phi),
            freq_bound,
            plane_waves: false,
        }
    }

    /// φ_κ(z) = e^{iκz} with U = [−1, 1].
    pub fn plane_waves() -> Self {
        Self {
            label: "plane-waves".into(),
            phi: Arc::new(HolomorphicSignal::plane_wave),
            freq_bound: 1.0,
            plane_waves: true,
        }
    }

    pub fn phi(&self, kappa: Complex64) -> HolomorphicSignal {
        (self.phi)(kappa)
    }

    pub fn in_u(&self, kappa: Complex64) -> bool {
        kappa.im == 0.0 && kappa.re.abs() <= self.freq_bound
    }

    /// Σ_l C_l(n;κ/k′)·φ_{k′k_l(n)}, which tends to φ_κ as n → ∞.
    ///
    /// For plane waves this is F_n(k′·;κ/k′) evaluated in extended
    /// precision; other families use compensated double summation.
    pub fn combination(&self, n: u32, kappa: Complex64) -> Result<HolomorphicSignal> {
        let kp = self.freq_bound;
        // k = ±1 leaves the single term φ_κ itself
        if kappa.im == 0.0 && kappa.re.abs() == kp {
            return Ok(self.phi(kappa));
        }
        let seq = SuperoscSequence::new(n, kappa / kp)?;
        if self.plane_waves {
            let base = seq.signal();
            let growth = crate::contour_quad::GrowthWitness::imag(seq.abs_sum(), kp);
            let label = format!("{}:n={n},k={kappa}", self.label);
            return Ok(HolomorphicSignal::new(label, growth, move |z| base.eval(z * kp)));
        }
        let coeffs = seq.coefficients_f64();
        let members: Vec<HolomorphicSignal> =
            seq.freqs().iter().map(|&f| self.phi(Complex64::new(kp * f, 0.0))).collect();
        let a: f64 = coeffs
            .iter()
            .zip(&members)
            .map(|(c, m)| c.norm() * m.growth.a)
            .sum();
        let b = members.iter().map(|m| m.growth.b).fold(0.0, f64::max);
        let kind = if members.iter().all(|m| m.growth.kind == crate::contour_quad::GrowthKind::ImagPart) {
            crate::contour_quad::GrowthKind::ImagPart
        } else {
            crate::contour_quad::GrowthKind::Modulus
        };
        let growth = crate::contour_quad::GrowthWitness { a, b, kind };
        let label = format!("{}:n={n},k={kappa}", self.label);
        Ok(HolomorphicSignal::new(label, growth, move |z| {
            let vals = members.iter().map(|m| m.eval(z)).collect::<Result<Vec<_>>>()?;
            Ok(compensated_combination(&coeffs, &vals))
        }))
    }
}
