//! Quadrature for integrals of the form ∫ e^{ia(y−y₁)²} f(y) dy.
//!
//! Three representations are provided:
//!
//! * [`rotated_integral`]: the absolutely convergent contour form
//!   e^{iα}∫ e^{ia(p + ye^{iα} − y₁)²} f(p + ye^{iα}) dy, truncated at a
//!   certified radius and integrated with adaptive Gauss–Kronrod panels.
//!   The pivot p defaults to y₁; p = 0 is the ray through the origin.
//! * [`epsilon_regularized_integral`]: the real-line integral damped by
//!   e^{−ε(y−y₀)²}.
//! * [`truncated_integral`]: the proper integral over [−R₁, R₂].
//!
//! The real-line forms use panels sized to the local oscillation frequency.

pub mod rules;
mod sum;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::HolomorphicSignal;
use crate::special_fn::lambda_real;
use rules::{WG, WGK, XGK};
pub use sum::{ComplexSum, NeumaierSum};

/// Which growth bound a witness certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthKind {
    /// |f(z)| ≤ A·e^{B|z|}
    Modulus,
    /// |f(z)| ≤ A·e^{B|Im z|}
    ImagPart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub a: f64,
    pub b: f64,
    pub kind: GrowthKind,
}

impl GrowthWitness {
    pub fn modulus(a: f64, b: f64) -> Self {
        Self::checked(a, b, GrowthKind::Modulus)
    }

    pub fn imag(a: f64, b: f64) -> Self {
        Self::checked(a, b, GrowthKind::ImagPart)
    }

    fn checked(a: f64, b: f64, kind: GrowthKind) -> Self {
        assert!(a >= 0.0 && b >= 0.0, "growth constants must be nonnegative");
        Self { a, b, kind }
    }

    /// Witness for the product of two functions; mixed kinds fall back to
    /// the modulus bound since |Im z| ≤ |z|.
    pub fn product(&self, other: &Self) -> Self {
        let kind = if self.kind == GrowthKind::ImagPart && other.kind == GrowthKind::ImagPart {
            GrowthKind::ImagPart
        } else {
            GrowthKind::Modulus
        };
        Self {
            a: self.a * other.a,
            b: self.b + other.b,
            kind,
        }
    }

    /// The bound evaluated at z.
    pub fn bound(&self, z: Complex64) -> f64 {
        match self.kind {
            GrowthKind::Modulus => self.a * (self.b * z.norm()).exp(),
            GrowthKind::ImagPart => self.a * (self.b * z.im.abs()).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePlan {
    /// Gaussian rate a > 0.
    pub a: f64,
    /// Center y₁ of the quadratic phase.
    pub y1: f64,
    /// Rotation angle α ∈ (0, π/2).
    pub angle: f64,
    /// Point p on the real axis the contour passes through. Defaults to y₁;
    /// for p ≠ y₁ the integrand peaks at e^{a(p−y₁)² tan(α)/2} along the
    /// ray while the integral does not grow, so the result loses that
    /// many digits to cancellation.
    pub pivot: f64,
    /// Node-clustering center along the ray; `None` selects the modulus peak.
    pub center: Option<f64>,
    pub tol: f64,
    pub max_panels: usize,
}

impl QuadraturePlan {
    pub fn new(a: f64, y1: f64) -> Self {
        Self {
            a,
            y1,
            angle: FRAC_PI_4,
            pivot: y1,
            center: None,
            tol: 1e-10,
            max_panels: 4000,
        }
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    pub fn with_pivot(mut self, pivot: f64) -> Self {
        self.pivot = pivot;
        self
    }

    /// Changes y₁ and moves the pivot along with it.
    pub fn with_y1(mut self, y1: f64) -> Self {
        self.y1 = y1;
        self.pivot = y1;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    /// Where |e^{ia(p + ye^{iα} − y₁)²}| peaks along the ray:
    /// y = (y₁ − p)/(2 cos α).
    pub fn peak(&self) -> f64 {
        (self.y1 - self.pivot) / (2.0 * self.angle.cos())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidInput(format!("Gaussian rate a must be positive, got {}", self.a)));
        }
        if !(self.angle > 0.0 && self.angle < PI / 2.0) {
            return Err(Error::InvalidInput(format!("angle must lie in (0, π/2), got {}", self.angle)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_panels == 0 {
            return Err(Error::InvalidInput("max_panels must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub err_estimate: f64,
    pub truncation_y: f64,
    pub panels_used: usize,
}

/// Bound on 2A∫_Y^∞ e^{−cy² + by} dy, written with Λ so that it stays
/// finite for large arguments.
fn gaussian_tail(amp: f64, c: f64, b: f64, y: f64) -> f64 {
    let sc = c.sqrt();
    let u = sc * y - b / (2.0 * sc);
    let lam = lambda_real(u).unwrap_or(f64::INFINITY);
    let expo = -c * y * y + b * y;
    2.0 * amp * (PI.sqrt() / (2.0 * sc)) * expo.exp() * lam
}

/// Smallest Y (to bisection accuracy) with 2A∫_Y^∞ e^{−cy² + by} dy ≤ tol.
fn solve_tail(amp: f64, c: f64, b: f64, tol: f64) -> f64 {
    if amp == 0.0 || gaussian_tail(amp, c, b, 0.0) <= tol {
        return 0.0;
    }
    let mut hi = b / c + 1.0 / c.sqrt();
    while gaussian_tail(amp, c, b, hi) > tol {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gaussian_tail(amp, c, b, mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

/// Radius Y with A·∫_{|y|>Y} e^{−a sin(2α) y² + (B + 2a|y₁| sin α)|y|} dy ≤ tol.
///
/// For an imaginary-part witness the linear rate is B·sin α + 2a|y₁| sin α,
/// since |Im(ye^{iα})| = |y| sin α.
pub fn truncation_radius(w: &GrowthWitness, a: f64, angle: f64, y1: f64, tol: f64) -> f64 {
    let c = a * (2.0 * angle).sin();
    let drift = 2.0 * a * y1.abs() * angle.sin();
    let b = match w.kind {
        GrowthKind::Modulus => w.b + drift,
        GrowthKind::ImagPart => w.b * angle.sin() + drift,
    };
    solve_tail(w.a, c, b, tol)
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    err: f64,
    /// err is at the roundoff floor 50ε∫|f| and cannot shrink by bisection.
    at_floor: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F>(f: &F, lo: f64, hi: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let fc = f(mid)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut vals = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(mid - dx)?;
        let f2 = f(mid + dx)?;
        vals[j] = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((vals[j].0 - mean).norm() + (vals[j].1 - mean).norm());
    }
    let scale = half.abs();
    let value = kron * half;
    resabs *= scale;
    resasc *= scale;
    let mut err = ((kron - gauss) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let mut at_floor = false;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        at_floor = err <= floor;
        err = err.max(floor);
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Overflow(format!("non-finite integrand on [{lo}, {hi}]")));
    }
    Ok(Panel {
        lo,
        hi,
        value,
        err,
        at_floor,
    })
}

/// Global adaptive bisection over the given breakpoints.
fn adaptive<F>(f: &F, breaks: &[f64], tol: f64, max_panels: usize) -> Result<(Complex64, f64, usize)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(f, w[0], w[1])?);
        }
    }
    let total_err = |h: &BinaryHeap<Panel>| h.iter().map(|p| p.err).sum::<f64>();
    let mut err = total_err(&heap);
    while err > tol {
        if heap.len() >= max_panels {
            return Err(Error::NonConvergence {
                panels: heap.len(),
                err_estimate: err,
                tol,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // cannot split further; accept the panel as it is
            heap.push(worst);
            return Err(Error::NonConvergence {
                panels: heap.len(),
                err_estimate: err,
                tol,
            });
        }
        let left = gk15(f, worst.lo, mid)?;
        let right = gk15(f, mid, worst.hi)?;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // refresh to shed accumulated rounding in the running total
            err = total_err(&heap);
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let mut acc = ComplexSum::new();
    acc.extend(panels.iter().map(|p| p.value));
    let err = panels.iter().map(|p| p.err).sum();
    Ok((acc.value(), err, panels.len()))
}

/// e^{iα}∫_ℝ e^{ia(p + ye^{iα} − y₁)²} f(p + ye^{iα}) dy.
pub fn rotated_integral(f: &HolomorphicSignal, plan: &QuadraturePlan) -> Result<QuadratureResult> {
    rotated_integral_with(|z| f.eval(z), &f.growth, plan)
}

/// As [`rotated_integral`] for a bare closure.
pub fn rotated_integral_with<F>(f: F, growth: &GrowthWitness, plan: &QuadraturePlan) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    plan.validate()?;
    let rot = Complex64::from_polar(1.0, plan.angle);
    let p = Complex64::new(plan.pivot, 0.0);
    let shift = plan.pivot - plan.y1;

    // Moving the pivot off the origin scales the witness by e^{B|p|}
    // (e^{B|Im p|} = 1 for the imaginary-part kind).
    let amp = match growth.kind {
        GrowthKind::Modulus => growth.a * (growth.b * plan.pivot.abs()).exp(),
        GrowthKind::ImagPart => growth.a,
    };
    let shifted = GrowthWitness { a: amp, ..*growth };
    let trunc_tol = 0.1 * plan.tol;
    let y_max = truncation_radius(&shifted, plan.a, plan.angle, shift, trunc_tol).max(1e-300);

    let c = plan.a * (2.0 * plan.angle).sin();
    let sigma = 1.0 / c.sqrt();
    let center = plan.center.unwrap_or_else(|| plan.peak()).clamp(-y_max, y_max);
    let mut breaks = vec![-y_max, y_max, center];
    let mut step = sigma;
    while step < 2.0 * y_max {
        for cand in [center - step, center + step] {
            if cand > -y_max && cand < y_max {
                breaks.push(cand);
            }
        }
        step *= 2.0;
    }
    breaks.push(center + 0.5 * sigma);
    breaks.push(center - 0.5 * sigma);
    breaks.retain(|y| (-y_max..=y_max).contains(y));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let a = plan.a;
    let integrand = |y: f64| -> Result<Complex64> {
        let w = shift + y * rot;
        let g = (Complex64::i() * a * w * w).exp();
        if g.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(g * f(p + y * rot)?)
    };
    let quad_tol = plan.tol - trunc_tol;
    let (value, err, panels) = adaptive(&integrand, &breaks, quad_tol, plan.max_panels)?;
    Ok(QuadratureResult {
        value: rot * value,
        err_estimate: err + trunc_tol,
        truncation_y: y_max,
        panels_used: panels,
    })
}

/// Options for the real-line representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealLineOptions {
    pub tol: f64,
    pub max_panels: usize,
    /// Oscillation frequency of f on the real line; defaults to the witness B.
    pub freq_hint: Option<f64>,
    /// Explicit integration window, overriding the tail-based choice.
    pub window: Option<(f64, f64)>,
}

impl Default for RealLineOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_panels: 20_000_000,
            freq_hint: None,
            window: None,
        }
    }
}

/// Composite Kronrod panels on [lo, hi] sized to the local frequency
/// 2a|y − y₁| + ω, each refined by bisection until its share of tol is met.
fn oscillatory_panels<F>(f: &F, lo: f64, hi: f64, a: f64, y1: f64, omega: f64, opts: &RealLineOptions) -> Result<(Complex64, f64, usize)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if hi <= lo {
        return Ok((Complex64::new(0.0, 0.0), 0.0, 0));
    }
    let len = hi - lo;
    let mut acc = ComplexSum::new();
    let mut err = 0.0;
    let mut count = 0usize;
    let mut y = lo;
    while y < hi {
        // h·(f0 + 2a·h) = π keeps each panel within half a local period
        let f0 = 2.0 * a * (y - y1).abs() + omega + 1.0;
        let h_front = (-f0 + (f0 * f0 + 8.0 * a * PI).sqrt()) / (4.0 * a);
        // on the far side of y₁ the frequency grows towards y₁ first; f0 bounds it
        let h = h_front.min(PI / f0.max(1.0)).max(1e-6).min(hi - y);
        let next = if hi - (y + h) < 1e-3 * h { hi } else { y + h };
        let mut stack = vec![(y, next, 0u32)];
        while let Some((p, q, depth)) = stack.pop() {
            let panel = gk15(f, p, q)?;
            count += 1;
            if count > opts.max_panels {
                return Err(Error::NonConvergence {
                    panels: count,
                    err_estimate: f64::INFINITY,
                    tol: opts.tol,
                });
            }
            let share = opts.tol * (q - p) / len;
            if panel.err > share && !panel.at_floor && depth < 30 {
                let m = 0.5 * (p + q);
                stack.push((m, q, depth + 1));
                stack.push((p, m, depth + 1));
                continue;
            }
            acc.add(panel.value);
            err += panel.err;
        }
        y = next;
    }
    Ok((acc.value(), err, count))
}

/// ∫_ℝ e^{−ε(y−y₀)²} e^{ia(y−y₁)²} f(y) dy.
///
/// The window is chosen so that the Gaussian tail of the damped integrand
/// stays below a tenth of the tolerance.
pub fn epsilon_regularized_integral(
    f: &HolomorphicSignal,
    a: f64,
    y1: f64,
    y0: f64,
    eps: f64,
    opts: &RealLineOptions,
) -> Result<QuadratureResult> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    // |f(y)| ≤ A for an imaginary-part witness, ≤ A e^{B|y0|} e^{B|y−y0|} otherwise
    let (amp, b) = match f.growth.kind {
        GrowthKind::ImagPart => (f.growth.a, 0.0),
        GrowthKind::Modulus => (f.growth.a * (f.growth.b * y0.abs()).exp(), f.growth.b),
    };
    let trunc_tol = 0.1 * opts.tol;
    let (lo, hi, half_width) = match opts.window {
        Some((lo, hi)) => (lo, hi, 0.5 * (hi - lo)),
        None => {
            let w = solve_tail(amp, eps, b, trunc_tol);
            (y0 - w, y0 + w, w)
        }
    };
    let omega = opts.freq_hint.unwrap_or(f.growth.b);
    let integrand = |y: f64| -> Result<Complex64> {
        let d = y - y0;
        let e = y - y1;
        let g = Complex64::new(-eps * d * d, a * e * e).exp();
        if g.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(g * f.eval(Complex64::new(y, 0.0))?)
    };
    let inner = RealLineOptions {
        tol: opts.tol - trunc_tol,
        ..*opts
    };
    let (value, err, panels) = oscillatory_panels(&integrand, lo, hi, a, y1, omega, &inner)?;
    Ok(QuadratureResult {
        value,
        err_estimate: err + if opts.window.is_some() { 0.0 } else { trunc_tol },
        truncation_y: half_width,
        panels_used: panels,
    })
}

/// ∫_{−R₁}^{R₂} e^{ia(y−y₁)²} f(y) dy.
pub fn truncated_integral(
    f: &HolomorphicSignal,
    a: f64,
    y1: f64,
    r1: f64,
    r2: f64,
    opts: &RealLineOptions,
) -> Result<QuadratureResult> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("a must be positive, got {a}")));
    }
    if r1 < 0.0 || r2 < 0.0 {
        return Err(Error::InvalidInput(format!("truncation radii must be nonnegative, got {r1}, {r2}")));
    }
    if f.growth.kind == GrowthKind::Modulus {
        log::warn!(
            "truncated integral of {} has only a modulus growth witness; the R → ∞ limit is not guaranteed",
            f.label
        );
    }
    let omega = opts.freq_hint.unwrap_or(f.growth.b);
    let integrand = |y: f64| -> Result<Complex64> {
        let e = y - y1;
        Ok(Complex64::new(0.0, a * e * e).exp() * f.eval(Complex64::new(y, 0.0))?)
    };
    let (value, err, panels) = oscillatory_panels(&integrand, -r1, r2, a, y1, omega, opts)?;
    Ok(QuadratureResult {
        value,
        err_estimate: err,
        truncation_y: r1.max(r2),
        panels_used: panels,
    })
}
