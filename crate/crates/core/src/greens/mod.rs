//! Green's kernels G(t,x,z) = e^{ia(t)(z−x)²}·G̃(t,x,z) for the free
//! particle, a uniform electric field λ(t)x, a harmonic oscillator λ(t)x²
//! and the Pöschl–Teller well −l(l+1)/cosh²x.

mod audit;
mod poschl_teller;

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::contour_quad::GrowthWitness;
use crate::error::{Error, Result};
use crate::ode_coeff::{solve_electric, solve_harmonic, ElectricCoeffs, HarmonicCoeffs, TimeProfile};
use crate::special_fn::{lambda_real, r_kernel_scaled, LegendreFactor, DEFAULT_POLE_MARGIN};

pub use audit::{assumption_audit, pde_residual, AuditCheck, AuditReport, AuditSamples, FdSteps, WitnessPoint};
pub use poschl_teller::{legendre_bound, SectorDomain};

#[derive(Debug, Clone)]
pub enum Potential {
    Free,
    /// V = λ(t)x
    Electric(TimeProfile),
    /// V = λ(t)x²
    Harmonic(TimeProfile),
    /// V = −l(l+1)/cosh²x
    PoschlTeller(u32),
}

impl Potential {
    pub fn label(&self) -> String {
        match self {
            Self::Free => "free".into(),
            Self::Electric(p) => format!("electric:{p}"),
            Self::Harmonic(p) => format!("harmonic:{p}"),
            Self::PoschlTeller(l) => format!("poschl-teller:l={l}"),
        }
    }

    /// V(t, x).
    pub fn value(&self, t: f64, x: f64) -> f64 {
        match self {
            Self::Free => 0.0,
            Self::Electric(p) => p.eval(t) * x,
            Self::Harmonic(p) => p.eval(t) * x * x,
            Self::PoschlTeller(l) => -((l * (l + 1)) as f64) / x.cosh().powi(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// End of the coefficient ODE integration.
    pub t_max: f64,
    pub ode_tol: f64,
    /// Sector angle α.
    pub angle: f64,
    pub pole_margin: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            ode_tol: 1e-13,
            angle: FRAC_PI_4,
            pole_margin: DEFAULT_POLE_MARGIN,
        }
    }
}

#[derive(Debug)]
struct PtData {
    factors: Vec<LegendreFactor>,
    /// (A_l^m, B_l^m) with |Q_l^m(z)| ≤ A e^{B|z|} away from the poles.
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
enum Coeffs {
    Free,
    Electric(ElectricCoeffs),
    Harmonic(HarmonicCoeffs),
    PoschlTeller(Arc<PtData>),
}

/// G(t,x,z) together with its decomposition data. Immutable after
/// construction; evaluation is thread-safe.
#[derive(Debug, Clone)]
pub struct GreensKernel {
    pub potential: Potential,
    /// T: the decomposition holds on (0, T).
    pub horizon: f64,
    /// Coefficients are available up to t_max.
    pub t_max: f64,
    pub sector: SectorDomain,
    coeffs: Coeffs,
}

pub fn make_kernel(potential: Potential, opts: &KernelOptions) -> Result<GreensKernel> {
    if !(opts.angle > 0.0 && opts.angle < PI / 2.0) {
        return Err(Error::InvalidInput(format!("sector angle must lie in (0, π/2), got {}", opts.angle)));
    }
    if !(opts.pole_margin >= 0.0 && opts.pole_margin < PI / 2.0) {
        return Err(Error::InvalidInput(format!("pole margin must lie in [0, π/2), got {}", opts.pole_margin)));
    }
    let excluded = matches!(potential, Potential::PoschlTeller(_));
    let sector = SectorDomain {
        angle: opts.angle,
        pole_margin: opts.pole_margin,
        excluded_poles: excluded,
    };
    let (coeffs, horizon, t_max) = match &potential {
        Potential::Free => (Coeffs::Free, f64::INFINITY, f64::INFINITY),
        Potential::Electric(p) => {
            let c = solve_electric(p.clone(), opts.t_max, opts.ode_tol)?;
            (Coeffs::Electric(c), f64::INFINITY, opts.t_max)
        }
        Potential::Harmonic(p) => {
            let c = solve_harmonic(p.clone(), opts.t_max, opts.ode_tol)?;
            let h = c.effective_horizon();
            (Coeffs::Harmonic(c), h, opts.t_max)
        }
        Potential::PoschlTeller(l) => {
            if *l < 1 {
                return Err(Error::InvalidInput("Pöschl–Teller needs l >= 1".into()));
            }
            let factors = (1..=*l).map(|m| LegendreFactor::new(*l, m)).collect::<Result<Vec<_>>>()?;
            let bounds = factors
                .iter()
                .map(|q| {
                    let b = q.m as f64 + 1.0;
                    (legendre_bound(q, b, opts.pole_margin), b)
                })
                .collect();
            (Coeffs::PoschlTeller(Arc::new(PtData { factors, bounds })), f64::INFINITY, f64::INFINITY)
        }
    };
    Ok(GreensKernel {
        potential,
        horizon,
        t_max,
        sector,
        coeffs,
    })
}

/// √(iπs) for s > 0 on the principal branch.
fn sqrt_i_pi(s: f64) -> Complex64 {
    Complex64::from_polar((PI * s).sqrt(), FRAC_PI_4)
}

impl GreensKernel {
    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || t >= self.horizon {
            return Err(Error::HorizonExceeded { t, horizon: self.horizon });
        }
        if t > self.t_max {
            return Err(Error::HorizonExceeded { t, horizon: self.t_max });
        }
        Ok(())
    }

    /// a(t).
    pub fn rate(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        match &self.coeffs {
            Coeffs::Harmonic(h) => {
                let s = h.state(t)?;
                Ok(s[2] / (4.0 * s[0]))
            }
            _ => Ok(1.0 / (4.0 * t)),
        }
    }

    /// Everything that depends on (t, x) only.
    pub fn slice(&self, t: f64, x: f64) -> Result<KernelSlice> {
        self.check_time(t)?;
        let i = Complex64::i();
        let free_pre = 1.0 / (2.0 * sqrt_i_pi(t));
        let free_amp = 1.0 / (2.0 * (PI * t).sqrt());
        let (a, pre, lin, pt, growth) = match &self.coeffs {
            Coeffs::Free => (1.0 / (4.0 * t), free_pre, Complex64::new(0.0, 0.0), None, GrowthWitness::imag(free_amp, 0.0)),
            Coeffs::Electric(e) => {
                let (alpha, alpha_p, beta) = e.values(t)?;
                let pre = free_pre * (i * (beta + x * t * alpha_p)).exp();
                (1.0 / (4.0 * t), pre, i * alpha, None, GrowthWitness::imag(free_amp, alpha.abs()))
            }
            Coeffs::Harmonic(h) => {
                let [alpha, alpha_p, beta, _] = h.state(t)?;
                let pre = (Complex64::new(0.0, -(beta - alpha_p) * x * x / (4.0 * alpha))).exp() / (2.0 * sqrt_i_pi(alpha));
                let c = x * (1.0 - beta) / (2.0 * alpha);
                let growth = GrowthWitness::imag(1.0 / (2.0 * (PI * alpha).sqrt()), c.abs());
                (beta / (4.0 * alpha), pre, Complex64::new(0.0, -c), None, growth)
            }
            Coeffs::PoschlTeller(data) => {
                let mut amp = free_amp;
                let mut b0 = 0.0f64;
                let mut coefs = Vec::with_capacity(data.factors.len());
                for (q, &(am, bm)) in data.factors.iter().zip(&data.bounds) {
                    let m = q.m as f64;
                    let w = q.weight();
                    coefs.push(0.5 * w * q.eval_real(x));
                    amp += w * am * am * ((m + bm) * x.abs()).exp() * lambda_real(-m * (t / 2.0).sqrt())?;
                    b0 = b0.max(m + bm);
                }
                let pt = PtSlice {
                    data: Arc::clone(data),
                    coefs,
                };
                (1.0 / (4.0 * t), free_pre, Complex64::new(0.0, 0.0), Some(pt), GrowthWitness::modulus(amp, b0))
            }
        };
        Ok(KernelSlice {
            t,
            x,
            a,
            pre,
            lin,
            pt,
            growth,
            pole_margin: self.sector.pole_margin,
        })
    }

    /// G̃(t, x, z).
    pub fn gtilde(&self, t: f64, x: f64, z: Complex64) -> Result<Complex64> {
        self.slice(t, x)?.gtilde(z)
    }

    /// (A₀(t,x), B₀(t,x)) as a growth witness for z ↦ G̃(t,x,z).
    pub fn growth(&self, t: f64, x: f64) -> Result<GrowthWitness> {
        Ok(self.slice(t, x)?.growth)
    }

    pub fn potential_value(&self, t: f64, x: f64) -> f64 {
        self.potential.value(t, x)
    }

    /// Harmonic coefficients, when the kernel has them.
    pub fn harmonic_coeffs(&self) -> Option<&HarmonicCoeffs> {
        match &self.coeffs {
            Coeffs::Harmonic(h) => Some(h),
            _ => None,
        }
    }

    pub fn electric_coeffs(&self) -> Option<&ElectricCoeffs> {
        match &self.coeffs {
            Coeffs::Electric(e) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct PtSlice {
    data: Arc<PtData>,
    /// m(l−m)!/(2(l+m)!)·Q_l^m(x)
    coefs: Vec<f64>,
}

/// The kernel at fixed (t, x).
#[derive(Debug, Clone)]
pub struct KernelSlice {
    pub t: f64,
    pub x: f64,
    /// a(t)
    pub a: f64,
    pre: Complex64,
    lin: Complex64,
    pt: Option<PtSlice>,
    /// (A₀, B₀) at (t, x).
    pub growth: GrowthWitness,
    pole_margin: f64,
}

impl KernelSlice {
    /// G̃(t, x, z).
    pub fn gtilde(&self, z: Complex64) -> Result<Complex64> {
        let mut g = if self.lin == Complex64::new(0.0, 0.0) {
            self.pre
        } else {
            self.pre * (self.lin * z).exp()
        };
        if let Some(pt) = &self.pt {
            crate::special_fn::check_pole_margin(z, self.pole_margin)?;
            for (q, &c) in pt.data.factors.iter().zip(&pt.coefs) {
                if c == 0.0 {
                    continue;
                }
                // Q decays like e^{−m|Re z|} while R grows like e^{m|Re(z−x)|}
                let m = q.m as f64;
                let d = z - self.x;
                let scale = (m * (d.re.abs() - z.re.abs())).exp();
                g += c * q.eval_scaled(z) * r_kernel_scaled(m * m * self.t, m * d)? * scale;
            }
        }
        Ok(g)
    }

    /// γ when G̃ carries the plane-wave factor e^{iγz} (free, electric and
    /// harmonic kernels), else 0.
    pub fn linear_phase(&self) -> f64 {
        if self.lin.re == 0.0 {
            self.lin.im
        } else {
            0.0
        }
    }

    /// G(t, x, z) = e^{ia(z−x)²}·G̃(t, x, z).
    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        let d = z - self.x;
        Ok((Complex64::i() * self.a * d * d).exp() * self.gtilde(z)?)
    }
}

/// G(t, x, z).
pub fn greens_value(kernel: &GreensKernel, t: f64, x: f64, z: Complex64) -> Result<Complex64> {
    kernel.slice(t, x)?.value(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kernel(p: Potential) -> GreensKernel {
        make_kernel(p, &KernelOptions::default()).unwrap()
    }

    /// √ω/√(2iπ sin 2ωt)·exp(−ω(y−x)²/(2i tan 2ωt) − iωxy tan ωt)
    fn reduced_harmonic(w: f64, t: f64, x: f64, y: Complex64) -> Complex64 {
        let i = Complex64::i();
        let d = y - x;
        let pre = w.sqrt() / sqrt_i_pi(2.0 * (2.0 * w * t).sin());
        pre * (-(w * d * d) / (2.0 * i * (2.0 * w * t).tan()) - i * w * x * y * (w * t).tan()).exp()
    }

    fn reduced_inverted(w: f64, t: f64, x: f64, y: Complex64) -> Complex64 {
        let i = Complex64::i();
        let d = y - x;
        let pre = w.sqrt() / sqrt_i_pi(2.0 * (2.0 * w * t).sinh());
        pre * (-(w * d * d) / (2.0 * i * (2.0 * w * t).tanh()) + i * w * x * y * (w * t).tanh()).exp()
    }

    #[test]
    fn free_kernel_values() {
        let k = kernel(Potential::Free);
        let v = greens_value(&k, 0.25, 0.0, c(0.0, 0.0)).unwrap();
        let want = c(1.0, -1.0) / (2.0 * PI).sqrt();
        assert!((v - want).norm() < 1e-15);
        for (t, x, y) in [(0.3, 1.0, -2.0), (2.0, -4.0, 7.5), (0.01, 0.0, 0.3)] {
            let g = greens_value(&k, t, x, c(y, 0.0)).unwrap();
            assert!((g.norm() - 1.0 / (2.0 * (PI * t).sqrt())).abs() < 1e-13 * g.norm());
        }
    }

    #[test]
    fn decomposition_is_consistent() {
        for p in [Potential::Free, Potential::Harmonic(TimeProfile::Constant(1.0)), Potential::PoschlTeller(2)] {
            let k = kernel(p);
            let s = k.slice(0.3, 0.4).unwrap();
            for z in [c(0.5, 0.2), c(-1.0, -0.6), c(2.0, 0.0)] {
                let d = z - 0.4;
                let want = (Complex64::i() * s.a * d * d).exp() * s.gtilde(z).unwrap();
                assert_eq!(s.value(z).unwrap(), want);
            }
        }
    }

    #[test]
    fn zero_field_is_the_free_kernel() {
        let free = kernel(Potential::Free);
        let e = kernel(Potential::Electric(TimeProfile::Constant(0.0)));
        for (t, x, z) in [(0.3, 1.0, c(-2.0, 0.4)), (5.0, -3.0, c(1.0, 1.0))] {
            assert_eq!(greens_value(&free, t, x, z).unwrap(), greens_value(&e, t, x, z).unwrap());
        }
    }

    #[test]
    fn harmonic_matches_the_reduced_kernel() {
        let k = kernel(Potential::Harmonic(TimeProfile::Constant(1.0)));
        assert!((k.horizon - PI / 4.0).abs() < 1e-10);
        let (t, x, z) = (0.3, 0.7, c(-0.2, 0.0));
        let g = greens_value(&k, t, x, z).unwrap();
        assert!((g - reduced_harmonic(1.0, t, x, z)).norm() < 1e-9);
        for j in 1..40 {
            let t = j as f64 * (PI / 4.0) / 40.0;
            let z = c(-1.0 + 0.05 * j as f64, 0.3);
            let g = greens_value(&k, t, 0.4, z).unwrap();
            let want = reduced_harmonic(1.0, t, 0.4, z);
            assert!((g - want).norm() <= 1e-9 * want.norm().max(1.0), "t = {t}");
        }
        assert!(matches!(greens_value(&k, 0.8, 0.0, z), Err(Error::HorizonExceeded { .. })));
    }

    #[test]
    fn inverted_oscillator_matches_the_hyperbolic_kernel() {
        let k = kernel(Potential::Harmonic(TimeProfile::Constant(-1.0)));
        assert!(k.horizon.is_infinite());
        for (t, x, z) in [(0.2, 0.5, c(1.0, 0.2)), (1.5, -1.0, c(0.3, -0.1))] {
            let g = greens_value(&k, t, x, z).unwrap();
            let want = reduced_inverted(1.0, t, x, z);
            assert!((g - want).norm() <= 1e-9 * want.norm(), "{g} vs {want}");
        }
    }

    #[test]
    fn poschl_teller_matches_reference_values() {
        // (l, t, x, z, G) from a 50-digit transcription of the kernel formula
        let cases = [
            (1, 0.5, 0.0, c(1.0, 0.0), c(0.37442610434654313, 0.18779544935733517)),
            (1, 0.5, 0.0, c(1.0, 0.5), c(0.28306872303113138, 0.081920822017845615)),
            (2, 0.3, 0.4, c(-0.7, 0.2), c(-0.17604527471365676, 0.75892265349558646)),
            (2, 0.05, -1.2, c(0.3, -0.4), c(-459.21650053136613, -236.97923789711809)),
        ];
        for (l, t, x, z, want) in cases {
            let k = kernel(Potential::PoschlTeller(l));
            let g = greens_value(&k, t, x, z).unwrap();
            assert!((g - want).norm() <= 1e-12 * want.norm(), "l={l} t={t}: {g} vs {want}");
        }
    }

    #[test]
    fn poschl_teller_rejects_poles_and_bounds_its_factors() {
        let k = kernel(Potential::PoschlTeller(2));
        assert!(matches!(greens_value(&k, 0.3, 0.0, c(0.0, PI / 2.0 + 0.05)), Err(Error::PoleMargin { .. })));
        let s = k.slice(0.4, 0.3).unwrap();
        for j in 0..200 {
            let z = Complex64::from_polar(0.03 * j as f64, if j % 2 == 0 { 0.6 } else { PI + 0.6 });
            assert!(s.gtilde(z).unwrap().norm() <= s.growth.bound(z));
        }
    }

    #[test]
    fn small_time_limit_of_the_reduced_kernel() {
        let target = 1.0 / sqrt_i_pi(1.0);
        for p in [Potential::Free, Potential::Electric(TimeProfile::Constant(1.0)), Potential::Harmonic(TimeProfile::Constant(1.0))] {
            let k = kernel(p);
            let mut prev = f64::INFINITY;
            for t in [1e-2, 1e-3, 1e-4] {
                let s = k.slice(t, 0.5).unwrap();
                let d = (s.gtilde(c(1.0, 0.5)).unwrap() / s.a.sqrt() - target).norm();
                assert!(d <= prev);
                prev = d;
            }
            assert!(prev < 1e-3);
        }
    }

    #[test]
    fn invalid_options_are_rejected() {
        let bad = KernelOptions {
            angle: 2.0,
            ..KernelOptions::default()
        };
        assert!(make_kernel(Potential::Free, &bad).is_err());
        assert!(make_kernel(Potential::PoschlTeller(0), &KernelOptions::default()).is_err());
        let k = kernel(Potential::Free);
        assert!(k.slice(0.0, 0.0).is_err());
        assert!(k.slice(-1.0, 0.0).is_err());
    }
}
