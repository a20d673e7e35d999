use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{wavefield, wavefunction, EvolveOptions, WaveField};
use crate::contour_quad::rules::GaussLegendre;
use crate::contour_quad::ComplexSum;
use crate::error::{Error, Result};
use crate::greens::GreensKernel;
use crate::initial_data::{
    compensated_combination, default_metric_constant, supershift_metric, HolomorphicSignal, SuperoscSequence,
    SupershiftFamily,
};

fn first_failure(field: &WaveField) -> Result<()> {
    match field.failures.first() {
        None => Ok(()),
        Some(p) => Err(Error::InvalidInput(format!(
            "evaluation failed at t = {}, x = {}: {}",
            p.t, p.x, p.error
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialLimitReport {
    pub ts: Vec<f64>,
    /// max_x |Ψ(t,x) − F(x)| per t.
    pub max_errors: Vec<f64>,
    pub decreasing: bool,
    pub threshold: f64,
    pub pass: bool,
}

/// max_x |Ψ(t,x) − F(x)| along a time sequence decreasing to 0.
pub fn initial_limit_check(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    xs: &[f64],
    ts: &[f64],
    opts: &EvolveOptions,
    threshold: f64,
) -> Result<InitialLimitReport> {
    if ts.is_empty() || ts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("times must be nonempty and strictly decreasing".into()));
    }
    let field = wavefield(kernel, f, ts, xs, opts);
    first_failure(&field)?;
    let mut max_errors = Vec::with_capacity(ts.len());
    for it in 0..ts.len() {
        let mut worst = 0.0f64;
        for (ix, &x) in xs.iter().enumerate() {
            worst = worst.max((field.at(it, ix) - f.eval(Complex64::new(x, 0.0))?).norm());
        }
        max_errors.push(worst);
    }
    let decreasing = max_errors.windows(2).all(|w| w[1] <= w[0]);
    let pass = decreasing && max_errors.last().is_some_and(|&e| e <= threshold);
    Ok(InitialLimitReport {
        ts: ts.to_vec(),
        max_errors,
        decreasing,
        threshold,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupershiftSpec {
    pub ns: Vec<u32>,
    pub kappa: Complex64,
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    /// Weight C of the initial-data metric; defaults to 2(1 + |κ|).
    pub metric_constant: Option<f64>,
    /// Points where the initial-data metric is sampled.
    pub metric_samples: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupershiftReport {
    pub potential: String,
    pub family: String,
    pub kappa: Complex64,
    pub ns: Vec<u32>,
    /// d_n = max over the grid of |Ψ(t,x;F_n) − Ψ(t,x;φ_κ)|.
    pub distances: Vec<f64>,
    /// sup over the samples of |F_n − φ_κ|e^{−C|z|}.
    pub metrics: Vec<f64>,
    pub metric_constant: f64,
    /// Largest quadrature error estimate per n, including the φ_κ field.
    pub quad_errors: Vec<f64>,
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub strictly_decreasing: bool,
}

impl SupershiftReport {
    /// One row per n: n,d_n,metric_n,quad_err.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d_n,metric_n,quad_err\n");
        for (k, n) in self.ns.iter().enumerate() {
            out.push_str(&format!(
                "{n},{:.16e},{:.16e},{:.16e}\n",
                self.distances[k], self.metrics[k], self.quad_errors[k]
            ));
        }
        out
    }
}

/// Distance between Ψ(·,·;F_n) and Ψ(·,·;φ_κ) on a grid for each n.
///
/// Ψ(F_n) is integrated node by node against the combination Σ C_l φ_{κ_l}
/// itself, which by linearity equals Σ C_l Ψ(φ_{κ_l}) evaluated on shared
/// nodes; for plane waves the combination is summed in extended precision.
pub fn supershift_experiment(
    kernel: &GreensKernel,
    family: &SupershiftFamily,
    spec: &SupershiftSpec,
    opts: &EvolveOptions,
) -> Result<SupershiftReport> {
    if family.in_u(spec.kappa) {
        log::info!("κ = {} lies in U; the combinations are trivial", spec.kappa);
    }
    let c = spec.metric_constant.unwrap_or_else(|| default_metric_constant(spec.kappa));
    let phi = family.phi(spec.kappa);
    let target = wavefield(kernel, &phi, &spec.ts, &spec.xs, opts);
    first_failure(&target)?;
    let mut distances = Vec::with_capacity(spec.ns.len());
    let mut metrics = Vec::with_capacity(spec.ns.len());
    let mut quad_errors = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let f_n = family.combination(n, spec.kappa)?;
        let field = wavefield(kernel, &f_n, &spec.ts, &spec.xs, opts);
        first_failure(&field)?;
        distances.push(field.distance(&target)?);
        metrics.push(supershift_metric(&f_n, &phi, c, &spec.metric_samples)?);
        quad_errors.push(field.max_quad_error().max(target.max_quad_error()));
        log::debug!("n = {n}: d = {:.6e}", distances.last().unwrap());
    }
    let strictly_decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(SupershiftReport {
        potential: kernel.potential.label(),
        family: family.label.clone(),
        kappa: spec.kappa,
        ns: spec.ns.clone(),
        distances,
        metrics,
        metric_constant: c,
        quad_errors,
        ts: spec.ts.clone(),
        xs: spec.xs.clone(),
        strictly_decreasing,
    })
}

/// Σ_l C_l Ψ(t,x;φ_{k′k_l}) with one quadrature per frequency. Costs n + 1
/// quadratures and sums in double precision, so it is only a cross-check
/// for small n.
pub fn psi_by_frequencies(
    kernel: &GreensKernel,
    family: &SupershiftFamily,
    n: u32,
    kappa: Complex64,
    t: f64,
    x: f64,
    opts: &EvolveOptions,
) -> Result<Complex64> {
    let kp = family.freq_bound;
    let seq = SuperoscSequence::new(n, kappa / kp)?;
    let mut values = Vec::with_capacity(n as usize + 1);
    for f in seq.freqs() {
        let phi = family.phi(Complex64::new(kp * f, 0.0));
        values.push(wavefunction(kernel, &phi, t, x, opts)?.value);
    }
    Ok(compensated_combination(&seq.coefficients_f64(), &values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoreraReport {
    /// ∮ Ψ(t,x;e^{iκ·}) dκ over the triangle.
    pub integral: Complex64,
    pub perimeter: f64,
    pub max_abs_psi: f64,
    pub max_quad_err: f64,
    /// |integral| ≤ tol·perimeter·max|Ψ|.
    pub certified: bool,
}

/// Morera check of κ ↦ Ψ(t,x;e^{iκ·}): the integral over the triangle's
/// boundary with m Gauss–Legendre nodes per edge.
pub fn analyticity_probe(
    kernel: &GreensKernel,
    t: f64,
    x: f64,
    triangle: [Complex64; 3],
    m: usize,
    opts: &EvolveOptions,
) -> Result<MoreraReport> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one node per edge".into()));
    }
    let [p, q, r] = triangle;
    let perimeter = (q - p).norm() + (r - q).norm() + (p - r).norm();
    let area2 = ((q - p).conj() * (r - p)).im;
    if area2 == 0.0 {
        return Ok(MoreraReport {
            integral: Complex64::new(0.0, 0.0),
            perimeter,
            max_abs_psi: 0.0,
            max_quad_err: 0.0,
            certified: true,
        });
    }
    let mut sum = ComplexSum::new();
    let (mut max_abs, mut max_err) = (0.0f64, 0.0f64);
    for (a, b) in [(p, q), (q, r), (r, p)] {
        for (s, w) in GaussLegendre::new(m).on_interval(0.0, 1.0) {
            let kappa = a + s * (b - a);
            let res = wavefunction(kernel, &HolomorphicSignal::plane_wave(kappa), t, x, opts)?;
            max_abs = max_abs.max(res.value.norm());
            max_err = max_err.max(res.err_estimate);
            sum.add(w * (b - a) * res.value);
        }
    }
    let integral = sum.value();
    Ok(MoreraReport {
        integral,
        perimeter,
        max_abs_psi: max_abs,
        max_quad_err: max_err,
        certified: integral.norm() <= opts.tol * perimeter * max_abs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// sup_z |F_n(z) − F(z)|e^{−C|z|} on the samples.
    pub metrics: Vec<f64>,
    /// max over the grid of |Ψ(F_n) − Ψ(F)|.
    pub field_distances: Vec<f64>,
    /// field distance / metric where the metric is nonzero.
    pub ratios: Vec<f64>,
    /// Smallest K with field distance ≤ K·metric for every n.
    pub fitted_constant: f64,
    /// max/min of the ratios.
    pub spread: f64,
    pub pass: bool,
}

/// Largest allowed max/min ratio of field distance to initial-data metric.
pub const CONTINUITY_SPREAD: f64 = 3.0;

/// Compares the initial-data metric with the distance of the evolved
/// fields for each F_n, and fits the constant in distance ≤ K·metric.
#[allow(clippy::too_many_arguments)]
pub fn continuous_dependence_check(
    kernel: &GreensKernel,
    f: &HolomorphicSignal,
    fns: &[HolomorphicSignal],
    c: f64,
    samples: &[Complex64],
    ts: &[f64],
    xs: &[f64],
    opts: &EvolveOptions,
) -> Result<ContinuityReport> {
    let base = wavefield(kernel, f, ts, xs, opts);
    first_failure(&base)?;
    let mut metrics = Vec::with_capacity(fns.len());
    let mut field_distances = Vec::with_capacity(fns.len());
    let mut ratios = Vec::new();
    let mut consistent = true;
    for g in fns {
        let m = supershift_metric(g, f, c, samples)?;
        let field = wavefield(kernel, g, ts, xs, opts);
        first_failure(&field)?;
        let d = field.distance(&base)?;
        if m > 0.0 {
            ratios.push(d / m);
        } else if d > 0.0 {
            // equal initial data on the samples but different fields
            consistent = false;
        }
        metrics.push(m);
        field_distances.push(d);
    }
    let fitted_constant = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if ratios.is_empty() {
        1.0
    } else if lo > 0.0 {
        fitted_constant / lo
    } else if fitted_constant == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(ContinuityReport {
        metrics,
        field_distances,
        ratios,
        fitted_constant,
        spread,
        pass: consistent && spread <= CONTINUITY_SPREAD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::linspace;
    use crate::greens::{make_kernel, KernelOptions, Potential};
    use crate::initial_data::disk_samples;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free() -> GreensKernel {
        make_kernel(Potential::Free, &KernelOptions::default()).unwrap()
    }

    #[test]
    fn initial_limit_for_the_free_plane_wave() {
        let f = HolomorphicSignal::plane_wave(c(2.0, 0.0));
        let r = initial_limit_check(&free(), &f, &linspace(-1.0, 1.0, 5), &[1e-2, 1e-3, 1e-4], &EvolveOptions::default(), 1e-2)
            .unwrap();
        assert!(r.pass, "{r:?}");
        // |e^{−4it} − 1| = 2 sin 2t
        assert!((r.max_errors[1] - 2.0 * (2e-3f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn initial_limit_rejects_increasing_times() {
        let one = HolomorphicSignal::constant(c(1.0, 0.0));
        assert!(initial_limit_check(&free(), &one, &[0.0], &[1e-3, 1e-2], &EvolveOptions::default(), 1e-2).is_err());
    }

    #[test]
    fn free_supershift_against_the_closed_form_oracle() {
        // free Ψ(F_n) = Σ C_l e^{ik_l x − ik_l² t}, summed in extended precision
        let fam = SupershiftFamily::plane_waves();
        let kernel = free();
        let opts = EvolveOptions::default();
        let n = 20;
        let seq = SuperoscSequence::real(n, 3.0).unwrap();
        let f_n = fam.combination(n, c(3.0, 0.0)).unwrap();
        for (t, x) in [(0.1, -1.0), (0.3, 0.5), (0.5, 1.0)] {
            let got = wavefunction(&kernel, &f_n, t, x, &opts).unwrap();
            let want = seq.free_evolution(1.0, t, x).unwrap();
            assert!((got.value - want).norm() < 1e-8, "({t}, {x}): {} vs {want}", got.value);
        }
        let by_freq = psi_by_frequencies(&kernel, &fam, 6, c(3.0, 0.0), 0.2, 0.3, &opts).unwrap();
        let want = SuperoscSequence::real(6, 3.0).unwrap().free_evolution(1.0, 0.2, 0.3).unwrap();
        assert!((by_freq - want).norm() < 1e-8);
    }

    #[test]
    fn supershift_of_a_member_of_u_is_exact() {
        let fam = SupershiftFamily::plane_waves();
        let spec = SupershiftSpec {
            ns: vec![5, 10],
            kappa: c(1.0, 0.0),
            ts: vec![0.2],
            xs: vec![-0.5, 0.5],
            metric_constant: None,
            metric_samples: disk_samples(1.0, 2, 8),
        };
        let r = supershift_experiment(&free(), &fam, &spec, &EvolveOptions::default()).unwrap();
        assert_eq!(r.distances, vec![0.0, 0.0]);
        assert_eq!(r.metrics, vec![0.0, 0.0]);
        assert!(!r.strictly_decreasing);
        assert_eq!(r.to_csv().lines().count(), 3);
    }

    #[test]
    fn morera_for_the_free_particle() {
        let opts = EvolveOptions::default();
        let r = analyticity_probe(&free(), 0.3, 0.5, [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], 32, &opts).unwrap();
        assert!(r.integral.norm() <= 1e-8, "{r:?}");
        let same = analyticity_probe(&free(), 0.3, 0.5, [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], 32, &opts).unwrap();
        assert_eq!(same.integral, c(0.0, 0.0));
    }

    #[test]
    fn continuity_with_identical_and_scaled_data() {
        let kernel = free();
        let opts = EvolveOptions::default();
        let f = HolomorphicSignal::plane_wave(c(2.0, 0.0));
        let samples = disk_samples(2.0, 3, 12);
        let (ts, xs) = (vec![0.2, 0.4], vec![-0.5, 0.0, 0.5]);
        let same = continuous_dependence_check(&kernel, &f, &[f.clone(), f.clone()], 6.0, &samples, &ts, &xs, &opts).unwrap();
        assert_eq!(same.metrics, vec![0.0, 0.0]);
        assert_eq!(same.field_distances, vec![0.0, 0.0]);
        assert!(same.pass);

        let g = HolomorphicSignal::plane_wave(c(1.0, 0.0));
        let diff = HolomorphicSignal::linear_combination(c(1.0, 0.0), &g, c(-1.0, 0.0), &f);
        let g10 = HolomorphicSignal::linear_combination(c(1.0, 0.0), &f, c(10.0, 0.0), &diff);
        let r = continuous_dependence_check(&kernel, &f, &[g, g10], 6.0, &samples, &ts, &xs, &opts).unwrap();
        assert!((r.field_distances[1] / r.field_distances[0] - 10.0).abs() < 1e-8, "{r:?}");
        assert!((r.metrics[1] / r.metrics[0] - 10.0).abs() < 1e-12);
        assert!(r.pass && r.spread < 1.0 + 1e-8);
    }
}
