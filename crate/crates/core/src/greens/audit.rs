//! Sampled checks of the kernel hypotheses: Schrödinger equation, positive
//! and unbounded rate a(t), growth bound, small-time limit and derivative
//! envelopes.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GreensKernel, KernelSlice};
use crate::error::Result;

/// |·| below which residuals are measured absolutely.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// Finite-difference steps. Residuals above `refine_above` are recomputed
/// with Richardson extrapolation over (h, h/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub h_t: f64,
    pub h_x: f64,
    pub refine_above: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            h_t: 1e-4,
            h_x: 1e-4,
            refine_above: 1e-6,
        }
    }
}

/// Kernel slices on a five-point (t, x) stencil.
struct Stencil {
    c: KernelSlice,
    tp: KernelSlice,
    tm: KernelSlice,
    xp: KernelSlice,
    xm: KernelSlice,
    h_t: f64,
    h_x: f64,
}

struct Derivs {
    g: Complex64,
    dt: Complex64,
    dx: Complex64,
    dxx: Complex64,
}

impl Stencil {
    fn new(k: &GreensKernel, t: f64, x: f64, h_t: f64, h_x: f64) -> Result<Self> {
        Ok(Self {
            c: k.slice(t, x)?,
            tp: k.slice(t + h_t, x)?,
            tm: k.slice(t - h_t, x)?,
            xp: k.slice(t, x + h_x)?,
            xm: k.slice(t, x - h_x)?,
            h_t,
            h_x,
        })
    }

    fn derivs<F>(&self, f: F) -> Result<Derivs>
    where
        F: Fn(&KernelSlice) -> Result<Complex64>,
    {
        let g = f(&self.c)?;
        let (xp, xm) = (f(&self.xp)?, f(&self.xm)?);
        Ok(Derivs {
            g,
            dt: (f(&self.tp)? - f(&self.tm)?) / (2.0 * self.h_t),
            dx: (xp - xm) / (2.0 * self.h_x),
            dxx: (xp - 2.0 * g + xm) / (self.h_x * self.h_x),
        })
    }
}

fn richardson(coarse: &Derivs, fine: &Derivs) -> Derivs {
    let ex = |c: Complex64, f: Complex64| (4.0 * f - c) / 3.0;
    Derivs {
        g: fine.g,
        dt: ex(coarse.dt, fine.dt),
        dx: ex(coarse.dx, fine.dx),
        dxx: ex(coarse.dxx, fine.dxx),
    }
}

fn relative_residual(d: &Derivs, v: f64) -> f64 {
    let r = Complex64::i() * d.dt + d.dxx - v * d.g;
    r.norm() / d.g.norm().max(RESIDUAL_FLOOR)
}

/// Halvings of (h_t, h_x) needed to resolve the phase of e^{ia(z−x)²}:
/// rate ≈ a|z−x|²/t in t and 2a|z−x| in x, each step held below 0.02/rate.
fn halvings(slice: &KernelSlice, z: Complex64, h_t: f64, h_x: f64) -> (u32, u32) {
    let d2 = (z - slice.x).norm_sqr();
    let rate_t = slice.a * d2 / slice.t + 1.0;
    let rate_x = 2.0 * slice.a * d2.sqrt() + 1.0;
    let need = |h: f64, rate: f64| (h * rate / 0.02).log2().ceil().clamp(0.0, 20.0) as u32;
    (need(h_t, rate_t), need(h_x, rate_x))
}

/// Stencil pairs (h, h/2) per step refinement level at one (t, x).
struct StencilCache<'a> {
    kernel: &'a GreensKernel,
    t: f64,
    x: f64,
    h_t: f64,
    h_x: f64,
    v: f64,
    levels: HashMap<(u32, u32), (Stencil, Stencil)>,
}

impl<'a> StencilCache<'a> {
    fn new(kernel: &'a GreensKernel, t: f64, x: f64, steps: &FdSteps) -> Self {
        Self {
            kernel,
            t,
            x,
            h_t: steps.h_t.min(0.25 * t),
            h_x: steps.h_x,
            v: kernel.potential_value(t, x),
            levels: HashMap::new(),
        }
    }

    fn get(&mut self, level: (u32, u32)) -> Result<&(Stencil, Stencil)> {
        if !self.levels.contains_key(&level) {
            let h_t = self.h_t / 2f64.powi(level.0 as i32);
            let h_x = self.h_x / 2f64.powi(level.1 as i32);
            let coarse = Stencil::new(self.kernel, self.t, self.x, h_t, h_x)?;
            let fine = Stencil::new(self.kernel, self.t, self.x, 0.5 * h_t, 0.5 * h_x)?;
            self.levels.insert(level, (coarse, fine));
        }
        Ok(&self.levels[&level])
    }

    fn base(&mut self) -> Result<&Stencil> {
        Ok(&self.get((0, 0))?.0)
    }

    fn residual(&mut self, z: Complex64, refine_above: f64) -> Result<f64> {
        let (h_t, h_x) = (self.h_t, self.h_x);
        let level = halvings(&self.base()?.c, z, h_t, h_x);
        let v = self.v;
        let (coarse, fine) = self.get(level)?;
        let dc = coarse.derivs(|s| s.value(z))?;
        let r = relative_residual(&dc, v);
        if r <= refine_above {
            return Ok(r);
        }
        let df = fine.derivs(|s| s.value(z))?;
        Ok(relative_residual(&richardson(&dc, &df), v))
    }
}

/// |i∂ₜG + ∂²ₓG − V(t,x)G| / max(|G|, floor) by central differences.
///
/// The steps are halved until they resolve the local phase rate of the
/// kernel, and residuals above `steps.refine_above` are Richardson
/// extrapolated.
pub fn pde_residual(kernel: &GreensKernel, t: f64, x: f64, z: Complex64, steps: &FdSteps) -> Result<f64> {
    StencilCache::new(kernel, t, x, steps).residual(z, steps.refine_above)
}

/// Sample points and thresholds of an audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSamples {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub zs: Vec<Complex64>,
    /// Decreasing times for the small-time limit.
    pub limit_ts: Vec<f64>,
    pub steps: FdSteps,
    pub residual_threshold: f64,
    pub limit_threshold: f64,
    pub growth_slack: f64,
}

impl AuditSamples {
    /// Times inside the horizon, x ∈ [−1.5, 1.5] and points of the double
    /// sector of radius 6.
    pub fn default_for(kernel: &GreensKernel) -> Self {
        let t_top = 1.0f64.min(0.9 * kernel.horizon).min(kernel.t_max);
        let ts = [0.1, 0.25, 0.5, 0.75, 1.0].iter().map(|f| f * t_top).collect();
        let alpha = kernel.sector.angle;
        let mut zs = Vec::new();
        for j in 0..=12 {
            let r = 0.5 * j as f64;
            for th in [0.0, 0.5 * alpha, alpha] {
                for base in [0.0, std::f64::consts::PI] {
                    let z = Complex64::from_polar(r, base + th);
                    if kernel.sector.contains(z) && (j > 0 || th == 0.0 && base == 0.0) {
                        zs.push(z);
                    }
                }
            }
        }
        Self {
            ts,
            xs: vec![-1.5, -0.5, 0.0, 0.7, 1.5],
            zs,
            limit_ts: vec![1e-2, 1e-3, 1e-4],
            steps: FdSteps::default(),
            residual_threshold: 1e-4,
            limit_threshold: 1e-2,
            growth_slack: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub t: f64,
    pub x: f64,
    pub z_re: f64,
    pub z_im: f64,
}

impl WitnessPoint {
    fn new(t: f64, x: f64, z: Complex64) -> Self {
        Self { t, x, z_re: z.re, z_im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub max_violation: f64,
    pub threshold: f64,
    pub witness_point: Option<WitnessPoint>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub potential: String,
    pub checks: Vec<AuditCheck>,
    pub pass: bool,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The failed checks.
    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Running maximum with its witness.
#[derive(Default)]
struct Worst {
    value: f64,
    at: Option<WitnessPoint>,
}

impl Worst {
    fn offer(&mut self, v: f64, t: f64, x: f64, z: Complex64) {
        // NaN counts as a violation
        if !(v <= self.value) {
            self.value = v;
            self.at = Some(WitnessPoint::new(t, x, z));
        }
    }
}

fn log_grid(kernel: &GreensKernel) -> Vec<f64> {
    (1..=6)
        .map(|k| 10f64.powi(-k))
        .filter(|&t| t < kernel.horizon && t <= kernel.t_max)
        .collect()
}

/// Samples the kernel hypotheses. Failed items are reported with their
/// witness point, not returned as errors.
pub fn assumption_audit(kernel: &GreensKernel, samples: &AuditSamples) -> Result<AuditReport> {
    let mut checks = Vec::new();
    let steps = samples.steps;
    let z0 = Complex64::new(0.0, 0.0);

    // (i) Schrödinger equation and (ii) growth bound on the (t, x, z) grid
    let mut residual = Worst::default();
    let mut growth = Worst::default();
    for &t in &samples.ts {
        for &x in &samples.xs {
            let mut cache = StencilCache::new(kernel, t, x, &steps);
            let center = cache.base()?.c.clone();
            for &z in &samples.zs {
                residual.offer(cache.residual(z, steps.refine_above)?, t, x, z);
                let g = center.gtilde(z)?;
                growth.offer(g.norm() / center.growth.bound(z), t, x, z);
            }
        }
    }
    checks.push(AuditCheck {
        name: "pde-residual".into(),
        max_violation: residual.value,
        threshold: samples.residual_threshold,
        witness_point: residual.at,
        pass: residual.value <= samples.residual_threshold,
        note: None,
    });
    checks.push(AuditCheck {
        name: "growth-bound".into(),
        max_violation: growth.value,
        threshold: 1.0 + samples.growth_slack,
        witness_point: growth.at,
        pass: growth.value <= 1.0 + samples.growth_slack,
        note: Some("max |G̃|/(A₀e^{B₀|·|}) with the witness's own norm (|z| or |Im z|)".into()),
    });

    // (ii) a(t) > 0 on the sample times, increasing without bound as t ↓ 0
    let mut ts_all = samples.ts.clone();
    let grid = log_grid(kernel);
    ts_all.extend(&grid);
    let mut neg = Worst::default();
    for &t in &ts_all {
        neg.offer((-kernel.rate(t)?).max(0.0), t, 0.0, z0);
    }
    checks.push(AuditCheck {
        name: "rate-positive".into(),
        max_violation: neg.value,
        threshold: 0.0,
        witness_point: neg.at,
        pass: neg.value == 0.0,
        note: None,
    });
    let rates = grid.iter().map(|&t| kernel.rate(t)).collect::<Result<Vec<_>>>()?;
    let mut drop = Worst::default();
    for w in 1..rates.len() {
        drop.offer((rates[w - 1] - rates[w]).max(0.0), grid[w], 0.0, z0);
    }
    let growth_ratio = match (rates.first(), rates.last()) {
        (Some(&first), Some(&last)) if rates.len() > 1 => last / first,
        _ => f64::INFINITY,
    };
    let ratio_needed = 10f64.powi(rates.len() as i32 / 2);
    checks.push(AuditCheck {
        name: "rate-unbounded".into(),
        max_violation: drop.value,
        threshold: 0.0,
        witness_point: drop.at,
        pass: drop.value == 0.0 && growth_ratio >= ratio_needed,
        note: Some(format!(
            "a(t) on t = 1e-1..1e-6 must increase as t decreases; a(t_min)/a(t_max) = {growth_ratio:.3e}"
        )),
    });

    // (iii) G̃/√a → 1/√(iπ)
    let target = Complex64::from_polar(1.0 / std::f64::consts::PI.sqrt(), -std::f64::consts::FRAC_PI_4);
    let mut per_t = Vec::new();
    let mut last = Worst::default();
    for &t in &samples.limit_ts {
        let mut w = Worst::default();
        for &x in &samples.xs {
            let s = kernel.slice(t, x)?;
            let root = s.a.sqrt();
            for &z in &samples.zs {
                w.offer((s.gtilde(z)? / root - target).norm(), t, x, z);
            }
        }
        per_t.push(w.value);
        last = w;
    }
    let decreasing = per_t.windows(2).all(|p| p[1] < p[0]);
    checks.push(AuditCheck {
        name: "initial-limit".into(),
        max_violation: last.value,
        threshold: samples.limit_threshold,
        witness_point: last.at,
        pass: decreasing && last.value <= samples.limit_threshold,
        note: Some(format!(
            "max |G̃/√a − 1/√(iπ)| per limit time: {}",
            per_t.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        )),
    });

    // (iv) derivative envelopes A₁e^{B₁|z|} fitted on |z| ≤ 3, tested beyond
    let mut env = Worst::default();
    let mut finite = true;
    for &t in &samples.ts {
        for &x in &samples.xs {
            let h_t = steps.h_t.min(0.25 * t);
            let st = Stencil::new(kernel, t, x, h_t, steps.h_x)?;
            let b1 = st.c.growth.b + 1.0;
            let mut fit = [0.0f64; 3];
            let mut held = Vec::new();
            for &z in &samples.zs {
                let d = st.derivs(|s| s.gtilde(z))?;
                let mags = [d.dx.norm(), d.dxx.norm(), d.dt.norm()];
                finite &= mags.iter().all(|m| m.is_finite());
                let w = (-b1 * z.norm()).exp();
                if z.norm() <= 3.0 {
                    for k in 0..3 {
                        fit[k] = fit[k].max(mags[k] * w);
                    }
                } else {
                    held.push((z, mags.map(|m| m * w)));
                }
            }
            for (z, scaled) in held {
                for k in 0..3 {
                    let ratio = if fit[k] > 0.0 { scaled[k] / fit[k] } else if scaled[k] > 0.0 { f64::INFINITY } else { 0.0 };
                    env.offer(ratio, t, x, z);
                }
            }
        }
    }
    checks.push(AuditCheck {
        name: "derivative-envelope".into(),
        max_violation: env.value,
        threshold: 1.0,
        witness_point: env.at,
        pass: finite && env.value <= 1.0,
        note: Some(
            "pointwise sampled envelopes with B₁ = B₀ + 1 stand in for the local integrability of A₁, which sampling cannot establish"
                .into(),
        ),
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(AuditReport {
        potential: kernel.potential.label(),
        checks,
        pass,
    })
}
