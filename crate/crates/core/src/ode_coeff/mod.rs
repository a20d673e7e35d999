//! Time-dependent coefficients of the electric-field and harmonic-oscillator
//! propagators.
//!
//! Electric field, tα″ + 2α′ = −λ and β′ = −t²α′² with α(0) = β(0) = 0:
//! the singular equation is replaced by the exact first-order form
//! α′(t) = −t^{−2}∫₀ᵗ sλ(s) ds = −∫₀¹ uλ(tu) du.
//!
//! Harmonic oscillator, α″ = −4λα and β″ = −4λβ with α(0) = β′(0) = 0,
//! α′(0) = β(0) = 1.

mod dopri;
mod profile;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::contour_quad::rules::GaussLegendre;
use crate::error::{Error, Result};
pub use dopri::StepControl;
use dopri::{integrate, Mesh};
pub use profile::{CubicSpline, TimeProfile};

/// Gauss–Legendre rule for ∫₀¹ uλ(tu) du: 4 panels of 16 points.
fn moment_rule() -> &'static [(f64, f64)] {
    static RULE: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(16);
        (0..4)
            .flat_map(|p| {
                let lo = p as f64 / 4.0;
                gl.on_interval(lo, lo + 0.25).collect::<Vec<_>>()
            })
            .collect()
    })
}

/// Coefficients (α, α′, β) of the electric-field propagator.
#[derive(Debug, Clone)]
pub struct ElectricCoeffs {
    pub lambda: TimeProfile,
    mesh: Arc<Mesh<2>>,
}

impl ElectricCoeffs {
    fn rhs(lambda: &TimeProfile) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |t, _y| {
            let ap = alpha_prime_electric(lambda, t);
            [ap, -t * t * ap * ap]
        }
    }

    pub fn t_max(&self) -> f64 {
        self.mesh.t_end()
    }

    fn state(&self, t: f64) -> Result<[f64; 2]> {
        if !(0.0..=self.t_max() * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.t_max(),
            });
        }
        if t == 0.0 {
            return Ok([0.0, 0.0]);
        }
        Ok(self.mesh.eval(&Self::rhs(&self.lambda), t))
    }

    pub fn alpha(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s[0])
    }

    pub fn alpha_prime(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.t_max() * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.t_max(),
            });
        }
        Ok(alpha_prime_electric(&self.lambda, t))
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s[1])
    }

    /// (α, α′, β) at t.
    pub fn values(&self, t: f64) -> Result<(f64, f64, f64)> {
        let s = self.state(t)?;
        Ok((s[0], alpha_prime_electric(&self.lambda, t), s[1]))
    }

    /// |tα″ + 2α′ + λ| with α″ from a central difference of α′.
    pub fn residual(&self, t: f64, h: f64) -> Result<f64> {
        let app = (self.alpha_prime(t + h)? - self.alpha_prime(t - h)?) / (2.0 * h);
        Ok((t * app + 2.0 * self.alpha_prime(t)? + self.lambda.eval(t)).abs())
    }
}

fn alpha_prime_electric(lambda: &TimeProfile, t: f64) -> f64 {
    if let Some(c) = lambda.as_constant() {
        return -0.5 * c;
    }
    -moment_rule().iter().map(|&(u, w)| w * u * lambda.eval(t * u)).sum::<f64>()
}

/// Solves the electric-field coefficient equations on [0, t_max].
pub fn solve_electric(lambda: TimeProfile, t_max: f64, tol: f64) -> Result<ElectricCoeffs> {
    validate(t_max, tol)?;
    let ctl = StepControl {
        rtol: tol,
        ..StepControl::default()
    };
    let mesh = integrate(&ElectricCoeffs::rhs(&lambda), 0.0, [0.0, 0.0], t_max, &ctl);
    Ok(ElectricCoeffs {
        lambda,
        mesh: Arc::new(mesh),
    })
}

fn validate(t_max: f64, tol: f64) -> Result<()> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!("t_max must be positive and finite, got {t_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum HarmonicRepr {
    Numerical { lambda: TimeProfile, mesh: Arc<Mesh<4>> },
    /// λ ≡ ω² (negative for the inverted oscillator, zero for the free case).
    ClosedForm { omega_sq: f64 },
}

/// Coefficients (α, α′, β, β′) of the harmonic-oscillator propagator.
#[derive(Debug, Clone)]
pub struct HarmonicCoeffs {
    repr: HarmonicRepr,
    t_max: f64,
    /// First positive zero of α, or +∞ if α > 0 on (0, t_max].
    pub horizon: f64,
    /// First positive zero of β, or +∞.
    pub beta_zero: f64,
}

fn harmonic_rhs(lambda: &TimeProfile) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    move |t, y| {
        let l4 = 4.0 * lambda.eval(t);
        [y[1], -l4 * y[0], y[3], -l4 * y[2]]
    }
}

impl HarmonicCoeffs {
    /// Exact coefficients for λ ≡ ω², valid on [0, t_max].
    pub fn closed_form(omega_sq: f64, t_max: f64) -> Self {
        let (horizon, beta_zero) = if omega_sq > 0.0 {
            let w = omega_sq.sqrt();
            (PI / (2.0 * w), PI / (4.0 * w))
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        let clip = |x: f64| if x <= t_max { x } else { f64::INFINITY };
        Self {
            repr: HarmonicRepr::ClosedForm { omega_sq },
            t_max,
            horizon: clip(horizon),
            beta_zero: clip(beta_zero),
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// min(first zero of α, first zero of β): beyond the zero of β the
    /// Gaussian rate β/(4α) turns negative.
    pub fn effective_horizon(&self) -> f64 {
        self.horizon.min(self.beta_zero)
    }

    /// [α, α′, β, β′] at t ∈ [0, t_max].
    pub fn state(&self, t: f64) -> Result<[f64; 4]> {
        if !(0.0..=self.t_max * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::HorizonExceeded { t, horizon: self.t_max });
        }
        Ok(self.state_unchecked(t))
    }

    fn state_unchecked(&self, t: f64) -> [f64; 4] {
        match &self.repr {
            HarmonicRepr::Numerical { lambda, mesh } => {
                if t == 0.0 {
                    [0.0, 1.0, 1.0, 0.0]
                } else {
                    mesh.eval(&harmonic_rhs(lambda), t)
                }
            }
            HarmonicRepr::ClosedForm { omega_sq } => closed_state(*omega_sq, t),
        }
    }

    pub fn alpha(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s[0])
    }

    pub fn alpha_prime(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s[1])
    }

    pub fn beta(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s[2])
    }

    pub fn beta_prime(&self, t: f64) -> Result<f64> {
        self.state(t).map(|s| s[3])
    }

    pub fn lambda(&self, t: f64) -> f64 {
        match &self.repr {
            HarmonicRepr::Numerical { lambda, .. } => lambda.eval(t),
            HarmonicRepr::ClosedForm { omega_sq } => *omega_sq,
        }
    }
}

fn closed_state(omega_sq: f64, t: f64) -> [f64; 4] {
    if omega_sq > 0.0 {
        let w = omega_sq.sqrt();
        let (s, c) = (2.0 * w * t).sin_cos();
        [s / (2.0 * w), c, c, -2.0 * w * s]
    } else if omega_sq < 0.0 {
        let w = (-omega_sq).sqrt();
        let (s, c) = ((2.0 * w * t).sinh(), (2.0 * w * t).cosh());
        [s / (2.0 * w), c, c, 2.0 * w * s]
    } else {
        [t, 1.0, 1.0, 0.0]
    }
}

/// Solves the harmonic coefficient equations on [0, t_max] and locates the
/// first zeros of α and β by bisection on the dense output.
pub fn solve_harmonic(lambda: TimeProfile, t_max: f64, tol: f64) -> Result<HarmonicCoeffs> {
    validate(t_max, tol)?;
    let ctl = StepControl {
        rtol: tol,
        ..StepControl::default()
    };
    let rhs = harmonic_rhs(&lambda);
    let mesh = integrate(&rhs, 0.0, [0.0, 1.0, 1.0, 0.0], t_max, &ctl);
    let zero_of = |idx: usize| -> f64 {
        for w in 1..mesh.times.len() {
            let (a, b) = (mesh.states[w - 1][idx], mesh.states[w][idx]);
            // α starts at 0 and is positive right after; β starts at 1
            if w == 1 && idx == 0 {
                continue;
            }
            if a > 0.0 && b <= 0.0 {
                let (mut lo, mut hi) = (mesh.times[w - 1], mesh.times[w]);
                if b == 0.0 {
                    return hi;
                }
                while hi - lo > 1e-14 * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if mesh.eval(&rhs, mid)[idx] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        f64::INFINITY
    };
    let horizon = zero_of(0);
    let beta_zero = zero_of(2);
    drop(rhs);
    Ok(HarmonicCoeffs {
        repr: HarmonicRepr::Numerical {
            lambda,
            mesh: Arc::new(mesh),
        },
        t_max,
        horizon,
        beta_zero,
    })
}

/// max over the grid of |α′β − αβ′ − 1|.
pub fn wronskian_drift(coeffs: &HarmonicCoeffs, grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in grid {
        let s = coeffs.state(t)?;
        worst = worst.max((s[1] * s[2] - s[0] * s[3] - 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn electric_constant_field() {
        // tα″ + 2α′ = −c gives α = −ct/2 and β = −c²t³/12
        let c = 1.7;
        let e = solve_electric(TimeProfile::Constant(c), 1.0, 1e-13).unwrap();
        for t in grid(0.0, 1.0, 50) {
            let (a, ap, b) = e.values(t).unwrap();
            assert!((a + c * t / 2.0).abs() < 1e-12);
            assert!((ap + c / 2.0).abs() < 1e-15);
            assert!((b + c * c * t.powi(3) / 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn electric_linear_field() {
        let e = solve_electric(TimeProfile::custom(|t| t), 1.0, 1e-13).unwrap();
        for t in grid(0.0, 1.0, 50) {
            let (a, ap, b) = e.values(t).unwrap();
            assert!((a + t * t / 6.0).abs() < 1e-12, "t = {t}");
            assert!((ap + t / 3.0).abs() < 1e-14);
            assert!((b + t.powi(5) / 45.0).abs() < 1e-12);
        }
    }

    #[test]
    fn electric_zero_field() {
        let e = solve_electric(TimeProfile::Constant(0.0), 2.0, 1e-12).unwrap();
        assert_eq!(e.values(1.3).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn electric_residual_and_small_time_limit() {
        let e = solve_electric(TimeProfile::Sinusoid { a: 1.0, b: 0.5, omega: 3.0 }, 1.0, 1e-12).unwrap();
        for t in grid(0.05, 0.95, 30) {
            assert!(e.residual(t, 1e-4).unwrap() < 1e-6);
        }
        for t in [1e-2, 1e-3, 1e-4] {
            assert!((t * e.alpha_prime(t).unwrap()).abs() <= t);
        }
    }

    #[test]
    fn harmonic_unit_frequency() {
        let h = solve_harmonic(TimeProfile::Constant(1.0), 2.0, 1e-13).unwrap();
        for t in grid(0.0, PI / 2.0, 100) {
            let s = h.state(t).unwrap();
            assert!((s[0] - (2.0 * t).sin() / 2.0).abs() < 1e-10);
            assert!((s[2] - (2.0 * t).cos()).abs() < 1e-10);
        }
        assert!((h.horizon - PI / 2.0).abs() < 1e-10);
        assert!((h.beta_zero - PI / 4.0).abs() < 1e-10);
        assert!((h.effective_horizon() - PI / 4.0).abs() < 1e-10);
        assert!(wronskian_drift(&h, &grid(0.01, 1.5, 200)).unwrap() < 1e-10);
    }

    #[test]
    fn harmonic_free_and_inverted() {
        let free = solve_harmonic(TimeProfile::Constant(0.0), 3.0, 1e-13).unwrap();
        assert!(free.horizon.is_infinite() && free.beta_zero.is_infinite());
        let s = free.state(2.5).unwrap();
        assert!((s[0] - 2.5).abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-14);

        let inv = solve_harmonic(TimeProfile::Constant(-1.0), 2.0, 1e-13).unwrap();
        assert!(inv.horizon.is_infinite());
        for t in grid(0.0, 2.0, 20) {
            let s = inv.state(t).unwrap();
            assert!((s[0] - (2.0 * t).sinh() / 2.0).abs() < 1e-10 * (2.0 * t).cosh());
            assert!((s[2] - (2.0 * t).cosh()).abs() < 1e-10 * (2.0 * t).cosh());
        }
    }

    #[test]
    fn closed_form_wronskian() {
        for w2 in [1.0, 0.0, -1.0, 2.3] {
            let c = HarmonicCoeffs::closed_form(w2, 0.7);
            assert!(wronskian_drift(&c, &grid(0.0, 0.7, 50)).unwrap() < 1e-14);
        }
        let free = HarmonicCoeffs::closed_form(0.0, 10.0);
        assert_eq!(wronskian_drift(&free, &grid(0.0, 10.0, 10)).unwrap(), 0.0);
    }

    #[test]
    fn driven_frequency_keeps_the_wronskian() {
        let p = TimeProfile::Sinusoid { a: 1.0, b: 0.5, omega: 1.0 };
        let h = solve_harmonic(p.clone(), 1.5, 1e-13).unwrap();
        let g = grid(0.0, h.horizon.min(1.5), 300);
        assert!(wronskian_drift(&h, &g).unwrap() <= 1e-10);
        // independent re-run at a tighter tolerance
        let tight = solve_harmonic(p, 1.5, 1e-14).unwrap();
        for &t in &g {
            assert!((h.alpha(t).unwrap() - tight.alpha(t).unwrap()).abs() < 1e-11);
        }
        for &t in &g[1..g.len() - 1] {
            assert!(h.alpha(t).unwrap() > 0.0);
        }
    }

    #[test]
    fn queries_beyond_t_max_fail() {
        let h = solve_harmonic(TimeProfile::Constant(1.0), 1.0, 1e-12).unwrap();
        assert!(matches!(h.alpha(1.5), Err(Error::HorizonExceeded { .. })));
        assert!(solve_electric(TimeProfile::Constant(1.0), -1.0, 1e-12).is_err());
    }
}
