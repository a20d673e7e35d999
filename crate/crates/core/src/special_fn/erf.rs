//! Complex error function and the scaled complementary error function
//! Λ(z) = e^{z²}·erfc(z) (the Faddeeva function rotated by a quarter turn,
//! Λ(z) = w(iz)).
//!
//! Λ is evaluated on the closed right half-plane and continued to the left
//! half-plane by the reflection Λ(−z) = 2e^{z²} − Λ(z):
//!
//! * |z| ≥ 6: Laplace continued fraction, Lentz's algorithm.
//! * |z| < 6: Taylor expansion about the nearest node of a 0.25-spaced grid
//!   in the first quadrant. Node values come from the integral
//!   Λ(z) = (2/√π)∫₀^∞ e^{−s²−2zs} ds, evaluated once with composite
//!   Gauss–Legendre; the Taylor coefficients follow from Λ' = 2zΛ − 2/√π.
//!
//! The fourth quadrant is handled by Λ(z̄) = conj Λ(z).

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::contour_quad::rules::GaussLegendre;
use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;

/// Largest real part of an exponent that still yields a finite double.
pub(crate) const EXP_LIMIT: f64 = 709.78;

const CF_RADIUS: f64 = 6.0;
const GRID_STEP: f64 = 0.25;
const GRID_N: usize = 25; // nodes 0, 0.25, ..., 6.0 on each axis

/// `exp(z)`, reporting overflow instead of returning infinities.
pub(crate) fn exp_checked(z: Complex64, what: &str) -> Result<Complex64> {
    if z.re > EXP_LIMIT {
        return Err(Error::Overflow(format!("exp({}{:+}i) in {what}", z.re, z.im)));
    }
    Ok(z.exp())
}

/// Λ(z) = e^{z²}(1 − erf(z)).
pub fn lambda_fn(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite argument {z}")));
    }
    if z.re >= 0.0 {
        return Ok(lambda_right(z));
    }
    let e = exp_checked(z * z, "Λ reflection")?;
    Ok(2.0 * e - lambda_right(-z))
}

/// Λ on the closed right half-plane; infallible there.
pub(crate) fn lambda_right(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.0);
    if z.im < 0.0 {
        return lambda_first_quadrant(z.conj()).conj();
    }
    lambda_first_quadrant(z)
}

fn lambda_first_quadrant(z: Complex64) -> Complex64 {
    if z.norm() >= CF_RADIUS {
        continued_fraction(z)
    } else {
        taylor_from_grid(z)
    }
}

/// Λ(z) = (1/√π) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).
fn continued_fraction(z: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    if f.norm() < TINY {
        f = Complex64::new(TINY, 0.0);
    }
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..2000 {
        let a = 0.5 * k as f64;
        d = z + a * d;
        if d.norm() < TINY {
            d = Complex64::new(TINY, 0.0);
        }
        c = z + a / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    FRAC_1_SQRT_PI / f
}

fn grid() -> &'static [Complex64] {
    static GRID: OnceLock<Vec<Complex64>> = OnceLock::new();
    GRID.get_or_init(|| {
        let rule = GaussLegendre::new(24);
        let mut breaks = vec![0.0, 1.0 / 128.0, 1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 0.125];
        let mut s = 0.25;
        while s <= 7.0 + 1e-12 {
            breaks.push(s);
            s += 0.25;
        }
        let mut values = Vec::with_capacity(GRID_N * GRID_N);
        for iy in 0..GRID_N {
            for ix in 0..GRID_N {
                let z0 = Complex64::new(ix as f64 * GRID_STEP, iy as f64 * GRID_STEP);
                let mut acc = Complex64::new(0.0, 0.0);
                for w in breaks.windows(2) {
                    let mut panel = Complex64::new(0.0, 0.0);
                    for (s, wt) in rule.on_interval(w[0], w[1]) {
                        panel += wt * (-(s * s) - 2.0 * z0 * s).exp();
                    }
                    acc += panel;
                }
                values.push(FRAC_2_SQRT_PI * acc);
            }
        }
        // ∫₀^∞ e^{−s²} ds = √π/2
        values[0] = Complex64::new(1.0, 0.0);
        values
    })
}

fn taylor_from_grid(z: Complex64) -> Complex64 {
    let ix = ((z.re / GRID_STEP).round() as usize).min(GRID_N - 1);
    let iy = ((z.im / GRID_STEP).round() as usize).min(GRID_N - 1);
    let z0 = Complex64::new(ix as f64 * GRID_STEP, iy as f64 * GRID_STEP);
    let h = z - z0;
    let c0 = grid()[iy * GRID_N + ix];
    if h.norm() == 0.0 {
        return c0;
    }
    // (k+1) c_{k+1} = 2 z0 c_k + 2 c_{k-1}, with the inhomogeneity in c_1
    let mut prev = c0;
    let mut cur = 2.0 * z0 * c0 - FRAC_2_SQRT_PI;
    let mut hk = h;
    let mut sum = c0 + cur * h;
    let mut small = 0;
    for k in 1..80 {
        let next = (2.0 * z0 * cur + 2.0 * prev) / (k as f64 + 1.0);
        prev = cur;
        cur = next;
        hk *= h;
        let term = cur * hk;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    sum
}

/// erf(z) for complex z.
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite argument {z}")));
    }
    if z.re < 0.0 {
        return erf_complex(-z).map(|v| -v);
    }
    if z.norm() < 1.0 {
        return Ok(erf_series(z));
    }
    let z2 = z * z;
    if -z2.re > EXP_LIMIT {
        return Err(Error::Overflow(format!("e^(-z²) for erf({}{:+}i)", z.re, z.im)));
    }
    // 1 − erfc(z) = 1 − e^{−z²}Λ(z)
    Ok(1.0 - (-z2).exp() * lambda_right(z))
}

fn erf_series(z: Complex64) -> Complex64 {
    // (2/√π) Σ (−1)^n z^{2n+1} / (n! (2n+1))
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..60 {
        term *= -z2 / n as f64;
        let t = term / (2 * n + 1) as f64;
        sum += t;
        if t.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    FRAC_2_SQRT_PI * sum
}

/// Real-argument convenience used by bounds: Λ(ξ) for real ξ.
pub fn lambda_real(xi: f64) -> Result<f64> {
    lambda_fn(Complex64::new(xi, 0.0)).map(|v| v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // Reference values from a 50-digit evaluation of e^{z²}·erfc(z).
    const LAMBDA_REF: &[(f64, f64, f64, f64)] = &[
        (0.0, 0.0, 1.0, 0.0),
        (1.0, 0.0, 0.427583576155807, 0.0),
        (-1.0, 0.0, 5.0089800807622835, 0.0),
        (0.5, 0.5, 0.53315670791217491, -0.23048823138445841),
        (2.0, 3.0, 0.092710766426443334, -0.12831696222826158),
        (3.9, 0.1, 0.14023429453599239, -0.0033910183041488398),
        (0.01, 4.2, 0.00035197028551599024, -0.1385198156216091),
        (4.5, 4.5, 0.063431388245511477, -0.061887048497703051),
        (6.5, 0.2, 0.085728927673194001, -0.0025788311562360681),
        (0.2, 7.5, 0.0020604741773023759, -0.075856113825185593),
        (9.0, 1.0, 0.061569850723632369, -0.0067600578371657501),
        (0.0, 5.5, 7.2877240958196924e-14, -0.10436743643678121),
        (0.0, 3.0, 0.00012340980408667955, -0.20115731703760039),
        (0.001, 0.001, 0.99887162233541125, -0.0011263806715998665),
        (-0.7, 1.2, -0.36503957021206037, -1.0607254808827828),
        (-2.0, 0.5, -35.635303512001889, -77.380142375345435),
        (-1.5, -2.5, -0.098535764947462406, 0.19759688490253617),
        (2.0, -6.0, 0.029170144290321642, 0.085259670601562234),
        (12.0, 3.0, 0.044140079126478106, -0.010963942552981765),
        (25.0, 1.0, 0.022513693583265217, -0.00089911486563682045),
        (0.1, 0.0, 0.89645697996912664, 0.0),
        (3.0, 0.0, 0.17900115118138995, 0.0),
        (5.99, 0.01, 0.092927170568133623, -0.00015108718915643764),
        (6.01, 0.01, 0.092625965028152777, -0.0001501214104099706),
        (0.0, 9.9, 2.7214341400936947e-43, -0.057284143816628955),
        (7.0, 7.0, 0.040501640057114687, -0.040090583461840795),
    ];

    const ERF_REF: &[(f64, f64, f64, f64)] = &[
        (1.0, 0.0, 0.84270079294971487, 0.0),
        (0.0, 1.0, 0.0, 1.6504257587975429),
        (0.3, 0.2, 0.34123748147213859, 0.20852883788276888),
        (2.0, 1.0, 1.0036063427256518, -0.011259006028815025),
        (-1.5, 0.5, -1.0076054862213703, 0.041697093665554598),
        (0.0, 0.05, 0.0, 0.056466009436252986),
        (3.0, 3.0, 0.86782649757545114, -0.012152181790312257),
        (10.0, 0.5, 1.0, -1.566474141739088e-45),
        (0.7, -5.0, 2720498083.0712892, -4228141064.4749629),
        (1.0e-8, 1.0e-8, 1.1283791670955127e-8, 1.1283791670955125e-8),
        (25.0, 0.0, 1.0, 0.0),
        (4.2, 0.3, 1.0000000026515462, 1.6396666003925204e-9),
    ];

    #[test]
    fn lambda_matches_reference_values() {
        for &(x, y, re, im) in LAMBDA_REF {
            let got = lambda_fn(c(x, y)).unwrap();
            let err = rel(got, c(re, im));
            assert!(err <= 1e-12, "Λ({x}{y:+}i) = {got}, rel err {err:e}");
        }
    }

    #[test]
    fn lambda_at_zero_is_one() {
        let v = lambda_fn(c(0.0, 0.0)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn erf_matches_reference_values() {
        for &(x, y, re, im) in ERF_REF {
            let got = erf_complex(c(x, y)).unwrap();
            let want = c(re, im);
            let err = if want.norm() == 0.0 { got.norm() } else { rel(got, want) };
            assert!(err <= 1e-12, "erf({x}{y:+}i) = {got}, rel err {err:e}");
        }
        assert_eq!(erf_complex(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn erf_overflow_is_reported() {
        assert!(matches!(erf_complex(c(0.0, 30.0)), Err(Error::Overflow(_))));
        assert!(matches!(lambda_fn(c(-30.0, 0.0)), Err(Error::Overflow(_))));
    }

    #[test]
    fn lambda_decreases_on_the_real_axis() {
        let l1 = lambda_real(1.0).unwrap();
        let l5 = lambda_real(5.0).unwrap();
        let l10 = lambda_real(10.0).unwrap();
        assert!(l10 < l5 && l5 < l1);
        let mut prev = lambda_real(-4.0).unwrap();
        let mut xi = -4.0;
        while xi < 30.0 {
            xi += 0.05;
            let cur = lambda_real(xi).unwrap();
            assert!(cur < prev, "not decreasing at {xi}");
            prev = cur;
        }
        assert!(lambda_real(1e6).unwrap() < 1e-6);
    }

    #[test]
    fn continuity_across_the_algorithm_switch() {
        for k in 0..64 {
            let theta = k as f64 * std::f64::consts::FRAC_PI_2 / 63.0;
            let inner = lambda_fn(Complex64::from_polar(CF_RADIUS - 1e-13, theta)).unwrap();
            let outer = lambda_fn(Complex64::from_polar(CF_RADIUS + 1e-13, theta)).unwrap();
            assert!(rel(inner, outer) < 2e-12, "jump at angle {theta}");
        }
    }
}
