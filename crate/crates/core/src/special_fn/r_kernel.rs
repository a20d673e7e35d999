//! The auxiliary function
//! R(t,z) = e^{z}Λ(z/(2√(it)) − √(it)) − e^{−z}Λ(z/(2√(it)) + √(it))
//! entering the Pöschl–Teller propagator, and its partial derivatives.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use super::erf::{exp_checked, lambda_right};
use crate::error::{Error, Result};

/// √(it) on the principal branch, √t·e^{iπ/4}.
pub fn sqrt_it(t: f64) -> Complex64 {
    Complex64::from_polar(t.sqrt(), FRAC_PI_4)
}

fn check_args(t: f64, z: Complex64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("R(t,z) needs t > 0, got {t}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite argument {z}")));
    }
    Ok(())
}

/// R(t, z).
///
/// When an argument of Λ has negative real part, the reflection
/// Λ(w) = 2e^{w²} − Λ(−w) is applied. The two reflection terms share the
/// exponent z²/(4it) + it, so they cancel exactly when both arguments are
/// reflected.
pub fn r_kernel(t: f64, z: Complex64) -> Result<Complex64> {
    r_kernel_shifted(t, z, 0.0)
}

/// R(t, z)·e^{−|Re z|}, which stays finite where R itself overflows.
pub fn r_kernel_scaled(t: f64, z: Complex64) -> Result<Complex64> {
    r_kernel_shifted(t, z, z.re.abs())
}

fn r_kernel_shifted(t: f64, z: Complex64, shift: f64) -> Result<Complex64> {
    check_args(t, z)?;
    let s = sqrt_it(t);
    let q = z / (2.0 * s);
    let wm = q - s;
    let wp = q + s;
    let ez = exp_checked(z - shift, "R(t,z)")?;
    let emz = exp_checked(-z - shift, "R(t,z)")?;

    let mut value = Complex64::new(0.0, 0.0);
    let mut reflected = 0i32;
    if wm.re >= 0.0 {
        value += ez * lambda_right(wm);
    } else {
        value -= ez * lambda_right(-wm);
        reflected += 1;
    }
    if wp.re >= 0.0 {
        value -= emz * lambda_right(wp);
    } else {
        value += emz * lambda_right(-wp);
        reflected -= 1;
    }
    if reflected != 0 {
        let gauss = exp_checked(z * z / (Complex64::new(0.0, 4.0 * t)) + Complex64::new(-shift, t), "R(t,z)")?;
        value += 2.0 * reflected as f64 * gauss;
    }
    Ok(value)
}

/// (∂_z R, ∂_t R) from the closed-form identities
/// ∂_z R = zR/(2it) − 2 sinh z/√(iπt),
/// ∂_t R = i(1 + z²/(4t²))R + z sinh z/(t√(iπt)) + 2i cosh z/√(iπt).
pub fn r_kernel_derivatives(t: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let r = r_kernel(t, z)?;
    let root = std::f64::consts::PI.sqrt() * sqrt_it(t);
    let i = Complex64::i();
    let (sh, ch) = (z.sinh(), z.cosh());
    let dz = z * r / (2.0 * i * t) - 2.0 * sh / root;
    let dt = i * (1.0 + z * z / (4.0 * t * t)) * r + z * sh / (t * root) + 2.0 * i * ch / root;
    Ok((dz, dt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // (t, z, R) from a 50-digit evaluation of the defining formula.
    const R_REF: &[(f64, f64, f64, f64, f64)] = &[
        (0.1, 1.0, 0.0, 0.55450633668312082, 0.62868178975352227),
        (0.5, 1.0, 0.3, 0.68138834051009148, 1.7210501053285503),
        (0.25, 2.0, 0.0, 1.2362418326280618, 1.6226075860755574),
        (0.001, 1.0, 0.0, 0.059266624247759438, 0.059340880926209042),
        (0.04, 3.0, -0.5, 1.3272306481379559, 0.6679703384833103),
        (2.0, 0.5, 1.0, -1.8689335452757318, 1.8682899305818155),
        (0.4, -0.7, 0.2, 0.82169788538003063, 1.2776596740435915),
        (0.01, -2.0, 2.0, 0.27293793256094802, -0.11878740337201453),
    ];

    #[test]
    fn matches_reference_values() {
        for &(t, x, y, re, im) in R_REF {
            let got = r_kernel(t, c(x, y)).unwrap();
            let want = c(re, im);
            let err = (got - want).norm() / want.norm();
            assert!(err < 1e-11, "R({t}, {x}{y:+}i) = {got}, rel err {err:e}");
        }
    }

    #[test]
    fn scaled_form_agrees_and_survives_large_arguments() {
        for z in [c(0.3, 0.1), c(-2.0, 0.5), c(7.0, -1.0)] {
            let scaled = r_kernel_scaled(0.4, z).unwrap() * z.re.abs().exp();
            let direct = r_kernel(0.4, z).unwrap();
            assert!((scaled - direct).norm() <= 1e-13 * direct.norm());
        }
        assert!(r_kernel(0.4, c(1500.0, 0.0)).is_err());
        let v = r_kernel_scaled(0.4, c(1500.0, 0.0)).unwrap();
        // |R| ≤ 2Λ(−√(t/2))e^{|Re z|} on the real line
        assert!(v.is_finite() && v.norm() <= 2.0 * crate::special_fn::lambda_real(-(0.2f64).sqrt()).unwrap());
    }

    #[test]
    fn even_in_z() {
        for &(t, x, y, _, _) in R_REF {
            let z = c(x, y);
            let a = r_kernel(t, z).unwrap();
            let b = r_kernel(t, -z).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn small_time_asymptotics() {
        let mut prev = f64::INFINITY;
        for t in [1e-3, 1e-4, 1e-5] {
            let r = r_kernel(t, c(1.0, 0.0)).unwrap();
            let lead = 4.0 * 1f64.sinh() * sqrt_it(t) / std::f64::consts::PI.sqrt();
            let dev = (r / lead - 1.0).norm();
            assert!(dev < 3.0 * t.sqrt(), "t = {t}: deviation {dev}");
            assert!(dev < prev);
            prev = dev;
        }
    }

    #[test]
    fn derivative_identities_match_central_differences() {
        let h = 1e-5;
        for &(t, x, y) in &[(0.5, 1.0, 0.3), (0.25, 2.0, 0.0), (0.3, -0.4, 0.6), (1.2, 0.8, -0.5)] {
            let z = c(x, y);
            let (dz, dt) = r_kernel_derivatives(t, z).unwrap();
            let fd_z = (r_kernel(t, z + h).unwrap() - r_kernel(t, z - h).unwrap()) / (2.0 * h);
            let fd_t = (r_kernel(t + h, z).unwrap() - r_kernel(t - h, z).unwrap()) / (2.0 * h);
            assert!((dz - fd_z).norm() <= 1e-6 * dz.norm(), "∂z at ({t}, {z})");
            assert!((dt - fd_t).norm() <= 1e-6 * dt.norm(), "∂t at ({t}, {z})");
        }
        let (dz0, _) = r_kernel_derivatives(0.7, c(0.0, 0.0)).unwrap();
        assert!(dz0.norm() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(r_kernel(0.0, c(1.0, 0.0)).is_err());
        assert!(r_kernel(-1.0, c(1.0, 0.0)).is_err());
    }
}
