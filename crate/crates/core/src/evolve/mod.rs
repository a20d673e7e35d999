//! Ψ(t,x;F) = ∫ G(t,x,y) F(y) dy along the rotated contour, on single
//! points and on rectangular grids.

mod experiments;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour_quad::{
    epsilon_regularized_integral, rotated_integral_with, truncated_integral, GrowthKind, GrowthWitness, QuadraturePlan,
    QuadratureResult, RealLineOptions,
};
use crate::error::{Error, Result};
use crate::greens::{GreensKernel, KernelSlice};
use crate::initial_data::HolomorphicSignal;

pub use experiments::{
    analyticity_probe, continuous_dependence_check, initial_limit_check, psi_by_frequencies, supershift_experiment,
    ContinuityReport, InitialLimitReport, MoreraReport, SupershiftReport, SupershiftSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Absolute quadrature tolerance per point.
    pub tol: f64,
    pub max_panels: usize,
    /// Upper bound on the rotation angle; the kernel's sector may force a
    /// smaller one.
    pub angle: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_panels: 4000,
            angle: None,
        }
    }
}

fn angle_at(kernel: &GreensKernel, x: f64, opts: &EvolveOptions) -> Result<f64> {
    let a = kernel.sector.angle_for(x)?;
    Ok(opts.angle.map_or(a, |b| a.min(b)))
}

/// Largest log-height the integrand's modulus may reach along the ray
/// before the angle is reduced; each unit costs a factor e of cancellation.
const PEAK_LOG: f64 = 4.6;
const MIN_ANGLE: f64 = 0.02;

/// Ψ(t, x; F) with its quadrature error estimate.
///
/// The contour passes through x − γ/(2a), the stationary point of
/// e^{ia(z−x)²}·e^{iγz}, so the kernel's own plane-wave factor adds no
/// growth along the ray. A frequency bound b on F still lifts the modulus
/// to e^{b² tan α/(8a)}; α is reduced until that stays below e^{PEAK_LOG}.
pub fn wavefunction(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    t: f64,
    x: f64,
    opts: &EvolveOptions,
) -> Result<QuadratureResult> {
    let slice = kernel.slice(t, x)?;
    let mut angle = angle_at(kernel, x, opts)?;
    let b = f.growth.b;
    if f.growth.kind == GrowthKind::ImagPart && b > 0.0 {
        let cap = (8.0 * slice.a * PEAK_LOG / (b * b)).atan();
        angle = angle.min(cap.max(MIN_ANGLE));
    }
    let growth = slice.growth.product(&f.growth);
    let mut plan = QuadraturePlan::new(slice.a, x)
        .with_angle(angle)
        .with_pivot(x - slice.linear_phase() / (2.0 * slice.a))
        .with_tol(opts.tol)
        .with_max_panels(opts.max_panels);
    plan.center = Some(0.0);
    rotated_integral_with(|z| Ok(slice.gtilde(z)? * f.eval(z)?), &growth, &plan)
}

/// Bound for G̃(t,x,·) on the real line only, for the real-line
/// representations. Pöschl–Teller witnesses are modulus bounds that grow
/// in |y| although G̃ stays bounded on ℝ, so the bound is sampled there.
fn real_line_kernel(slice: &KernelSlice) -> Result<GrowthWitness> {
    if slice.growth.kind == GrowthKind::ImagPart {
        return Ok(GrowthWitness::imag(slice.growth.a, 0.0));
    }
    let mut amp = 0.0f64;
    for j in 0..=1200 {
        let y = slice.x - 30.0 + 0.05 * j as f64;
        amp = amp.max(slice.gtilde(Complex64::new(y, 0.0))?.norm());
    }
    Ok(GrowthWitness::imag(1.25 * amp, 0.0))
}

fn product_signal(slice: KernelSlice, f: &HolomorphicSignal, growth: GrowthWitness) -> HolomorphicSignal {
    let g = f.clone();
    HolomorphicSignal::new(format!("G~*{}", f.label), growth, move |z| Ok(slice.gtilde(z)? * g.eval(z)?))
}

fn real_line_setup(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    t: f64,
    x: f64,
    opts: &RealLineOptions,
) -> Result<(f64, HolomorphicSignal, RealLineOptions)> {
    let slice = kernel.slice(t, x)?;
    let a = slice.a;
    let kernel_freq = if slice.growth.kind == GrowthKind::ImagPart { slice.growth.b } else { 0.0 };
    let f_line = match f.growth.kind {
        GrowthKind::ImagPart => GrowthWitness::imag(f.growth.a, 0.0),
        GrowthKind::Modulus => f.growth,
    };
    let growth = real_line_kernel(&slice)?.product(&f_line);
    let opts = RealLineOptions {
        freq_hint: opts.freq_hint.or(Some(f.growth.b + kernel_freq)),
        ..*opts
    };
    Ok((a, product_signal(slice, f, growth), opts))
}

/// Ψ(t, x; F) as lim_{ε→0} ∫_ℝ e^{−εy²} G(t,x,y) F(y) dy, evaluated at one ε.
pub fn epsilon_regularized_wavefunction(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    t: f64,
    x: f64,
    eps: f64,
    opts: &RealLineOptions,
) -> Result<QuadratureResult> {
    let (a, g, opts) = real_line_setup(kernel, f, t, x, opts)?;
    epsilon_regularized_integral(&g, a, x, 0.0, eps, &opts)
}

/// ∫_{−R₁}^{R₂} G(t,x,y) F(y) dy.
pub fn truncated_wavefunction(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    t: f64,
    x: f64,
    r1: f64,
    r2: f64,
    opts: &RealLineOptions,
) -> Result<QuadratureResult> {
    let (a, g, opts) = real_line_setup(kernel, f, t, x, opts)?;
    truncated_integral(&g, a, x, r1, r2, &opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub t: f64,
    pub x: f64,
    pub error: String,
}

/// Ψ on a rectangular grid. `values` and `quad_errors` are row-major with
/// one row per t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub quad_errors: Vec<f64>,
    /// Points whose evaluation failed; their value is NaN.
    pub failures: Vec<PointFailure>,
    pub potential: String,
    pub initial: String,
    pub tol: f64,
}

impl WaveField {
    pub fn at(&self, it: usize, ix: usize) -> Complex64 {
        self.values[it * self.xs.len() + ix]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    pub fn max_quad_error(&self) -> f64 {
        self.quad_errors.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    /// max over the grid of |self − other|; NaN if either has a failed point.
    pub fn distance(&self, other: &WaveField) -> Result<f64> {
        if self.ts != other.ts || self.xs != other.xs {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            let d = (a - b).norm();
            if d.is_nan() {
                return Ok(f64::NAN);
            }
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// CSV with columns t,x,re_psi,im_psi,abs_psi,quad_err.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,re_psi,im_psi,abs_psi,quad_err\n");
        for (it, &t) in self.ts.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                let k = it * self.xs.len() + ix;
                let v = self.values[k];
                out.push_str(&format!(
                    "{t:.16e},{x:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    v.re,
                    v.im,
                    v.norm(),
                    self.quad_errors[k]
                ));
            }
        }
        out
    }

    /// Whitespace-separated blocks, one per t, separated by blank lines.
    pub fn to_gnuplot(&self) -> String {
        let mut out = format!("# potential: {}\n# initial: {}\n# t x re_psi im_psi abs_psi\n", self.potential, self.initial);
        for (it, &t) in self.ts.iter().enumerate() {
            if it > 0 {
                out.push('\n');
            }
            for (ix, &x) in self.xs.iter().enumerate() {
                let v = self.at(it, ix);
                out.push_str(&format!("{t:.16e} {x:.16e} {:.16e} {:.16e} {:.16e}\n", v.re, v.im, v.norm()));
            }
        }
        out
    }

    /// Grid description for a JSON manifest.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "potential": self.potential,
            "initial": self.initial,
            "grid": { "t": self.ts, "x": self.xs },
            "tol": self.tol,
            "points": self.values.len(),
            "max_quad_error": self.max_quad_error(),
            "failures": self.failures,
        })
    }
}

#[cfg(feature = "parallel")]
fn map_points<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Ψ on ts × xs. Points are independent, so the result does not depend on
/// scheduling; a failing point is recorded and the rest carry on.
pub fn wavefield(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    ts: &[f64],
    xs: &[f64],
    opts: &EvolveOptions,
) -> WaveField {
    let nx = xs.len();
    let results = map_points(ts.len() * nx, |k| wavefunction(kernel, f, ts[k / nx], xs[k % nx], opts));
    let mut values = Vec::with_capacity(results.len());
    let mut quad_errors = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(q) => {
                values.push(q.value);
                quad_errors.push(q.err_estimate);
            }
            Err(e) => {
                values.push(Complex64::new(f64::NAN, f64::NAN));
                quad_errors.push(f64::NAN);
                failures.push(PointFailure {
                    t: ts[k / nx],
                    x: xs[k % nx],
                    error: e.to_string(),
                });
            }
        }
    }
    WaveField {
        ts: ts.to_vec(),
        xs: xs.to_vec(),
        values,
        quad_errors,
        failures,
        potential: kernel.potential.label(),
        initial: f.label.clone(),
        tol: opts.tol,
    }
}

/// n equally spaced points from lo to hi inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldResidual {
    /// max over interior points of |i∂ₜΨ + ∂²ₓΨ − VΨ| / max(|Ψ|, floor).
    pub max_residual: f64,
    /// (t, x) where the maximum is attained.
    pub at: Option<(f64, f64)>,
    /// Discretization error of the residual itself, from comparing with the
    /// stencil of twice the spacing; absent on grids too small for it.
    pub fd_error_estimate: Option<f64>,
    pub grid_too_coarse: bool,
    /// Interior points skipped because a stencil value was not finite.
    pub skipped: usize,
}

fn uniform_step(v: &[f64], what: &str) -> Result<f64> {
    if v.len() < 3 {
        return Err(Error::InvalidInput(format!("{what} grid needs at least 3 points, got {}", v.len())));
    }
    let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
    if !(h > 0.0) || v.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(v[0].abs())) {
        return Err(Error::InvalidInput(format!("{what} grid must be increasing and uniform")));
    }
    Ok(h)
}

/// Residual of the Schrödinger equation on the field's own grid by
/// central differences.
pub fn schrodinger_residual_field(field: &WaveField, kernel: &GreensKernel) -> Result<FieldResidual> {
    let ht = uniform_step(&field.ts, "t")?;
    let hx = uniform_step(&field.xs, "x")?;
    let (nt, nx) = (field.ts.len(), field.xs.len());
    let floor = 1e-12 * field.max_abs();
    let i = Complex64::i();
    // residual at (it, ix) using neighbours s grid steps away
    let residual = |it: usize, ix: usize, s: usize| -> Option<Complex64> {
        let (t, x) = (field.ts[it], field.xs[ix]);
        let c = field.at(it, ix);
        let dt = (field.at(it + s, ix) - field.at(it - s, ix)) / (2.0 * s as f64 * ht);
        let dxx = (field.at(it, ix + s) - 2.0 * c + field.at(it, ix - s)) / (s as f64 * hx).powi(2);
        let r = i * dt + dxx - kernel.potential_value(t, x) * c;
        r.is_finite().then_some(r)
    };
    let mut out = FieldResidual {
        max_residual: 0.0,
        at: None,
        fd_error_estimate: None,
        grid_too_coarse: false,
        skipped: 0,
    };
    if floor == 0.0 {
        return Ok(out);
    }
    let mut fd_est: Option<f64> = None;
    for it in 1..nt - 1 {
        for ix in 1..nx - 1 {
            let Some(r) = residual(it, ix, 1) else {
                out.skipped += 1;
                continue;
            };
            let scale = field.at(it, ix).norm().max(floor);
            let rel = r.norm() / scale;
            if rel > out.max_residual || out.at.is_none() {
                out.max_residual = rel;
                out.at = Some((field.ts[it], field.xs[ix]));
            }
            // second-order stencils: R_h − R_{2h} ≈ −3·(error of R_h)
            if it >= 2 && it + 2 < nt && ix >= 2 && ix + 2 < nx {
                if let Some(r2) = residual(it, ix, 2) {
                    let e = (r - r2).norm() / (3.0 * scale);
                    fd_est = Some(fd_est.map_or(e, |m| m.max(e)));
                }
            }
        }
    }
    out.fd_error_estimate = fd_est;
    if let Some(e) = fd_est {
        if e > out.max_residual {
            out.grid_too_coarse = true;
            log::warn!(
                "finite-difference error estimate {e:.3e} exceeds the residual {:.3e}; refine the grid",
                out.max_residual
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{make_kernel, KernelOptions, Potential};
    use crate::ode_coeff::TimeProfile;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free() -> GreensKernel {
        make_kernel(Potential::Free, &KernelOptions::default()).unwrap()
    }

    #[test]
    fn free_evolution_of_a_constant() {
        let k = free();
        let one = HolomorphicSignal::constant(c(1.0, 0.0));
        for (t, x) in [(0.1, 0.0), (0.5, 2.0), (3.0, -4.0)] {
            let r = wavefunction(&k, &one, t, x, &EvolveOptions::default()).unwrap();
            assert!((r.value - 1.0).norm() < 1e-10, "{t} {x}: {}", r.value);
        }
    }

    #[test]
    fn free_plane_wave_at_a_point() {
        let k = free();
        let f = HolomorphicSignal::plane_wave(c(3.0, 0.0));
        let r = wavefunction(&k, &f, 0.5, 1.0, &EvolveOptions::default()).unwrap();
        assert!((r.value - c(0.0, -1.5).exp()).norm() < 1e-10);
        assert!(r.err_estimate <= 1e-10);
    }

    #[test]
    fn one_point_field_equals_wavefunction() {
        let k = free();
        let f = HolomorphicSignal::plane_wave(c(2.0, 0.0));
        let opts = EvolveOptions::default();
        let w = wavefield(&k, &f, &[0.3], &[0.4], &opts);
        assert_eq!(w.values[0], wavefunction(&k, &f, 0.3, 0.4, &opts).unwrap().value);
        assert_eq!(w.to_csv().lines().count(), 2);
    }

    #[test]
    fn grid_order_does_not_change_values() {
        let h = make_kernel(Potential::Harmonic(TimeProfile::Constant(1.0)), &KernelOptions::default()).unwrap();
        let f = HolomorphicSignal::plane_wave(c(1.5, 0.0));
        let opts = EvolveOptions::default();
        let xs = [-1.0, 0.25, 0.5, 2.0];
        let rev: Vec<f64> = xs.iter().rev().copied().collect();
        let a = wavefield(&h, &f, &[0.2, 0.3], &xs, &opts);
        let b = wavefield(&h, &f, &[0.3, 0.2], &rev, &opts);
        for it in 0..2 {
            for ix in 0..4 {
                assert_eq!(a.at(it, ix), b.at(1 - it, 3 - ix));
            }
        }
    }

    #[test]
    fn failures_are_collected_per_point() {
        let h = make_kernel(Potential::Harmonic(TimeProfile::Constant(1.0)), &KernelOptions::default()).unwrap();
        let f = HolomorphicSignal::plane_wave(c(1.0, 0.0));
        // T = π/4 for unit λ: the second row lies beyond it
        let w = wavefield(&h, &f, &[0.5, 1.0], &[0.0, 1.0], &EvolveOptions::default());
        assert_eq!(w.failures.len(), 2);
        assert!(w.values[..2].iter().all(|v| v.is_finite()));
        assert!(w.values[2..].iter().all(|v| v.re.is_nan()));
    }

    #[test]
    fn plane_wave_field_solves_the_free_equation() {
        let k = free();
        let f = HolomorphicSignal::plane_wave(c(2.0, 0.0));
        let opts = EvolveOptions { tol: 1e-12, ..Default::default() };
        let w = wavefield(&k, &f, &linspace(0.3, 0.306, 7), &linspace(0.5, 0.506, 7), &opts);
        let r = schrodinger_residual_field(&w, &k).unwrap();
        assert!(r.max_residual <= 1e-4, "{r:?}");
        assert!(r.fd_error_estimate.is_some());
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let k = free();
        let zero = HolomorphicSignal::constant(c(0.0, 0.0));
        let w = wavefield(&k, &zero, &linspace(0.1, 0.2, 3), &linspace(0.0, 1.0, 3), &EvolveOptions::default());
        assert_eq!(schrodinger_residual_field(&w, &k).unwrap().max_residual, 0.0);
    }

    #[test]
    fn nonuniform_grids_are_rejected() {
        let k = free();
        let one = HolomorphicSignal::constant(c(1.0, 0.0));
        let w = wavefield(&k, &one, &[0.1, 0.2, 0.4], &[0.0, 0.1, 0.2], &EvolveOptions::default());
        assert!(schrodinger_residual_field(&w, &k).is_err());
    }

    #[test]
    fn gnuplot_blocks_per_time() {
        let k = free();
        let one = HolomorphicSignal::constant(c(1.0, 0.0));
        let w = wavefield(&k, &one, &[0.1, 0.2], &[0.0, 0.5, 1.0], &EvolveOptions::default());
        let g = w.to_gnuplot();
        assert_eq!(g.split("\n\n").count(), 2);
        assert_eq!(w.manifest()["points"], 6);
    }
}
