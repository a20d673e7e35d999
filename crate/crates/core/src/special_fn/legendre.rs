//! Q_l^m(z) = P_l^m(tanh z) written as (−1)^m sech^m(z)·P_l^{(m)}(tanh z),
//! which avoids the branch of (1 − ξ²)^{m/2} for complex ξ.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_POLE_MARGIN: f64 = 0.1;

/// Distance from z to the nearest pole iπ(k + ½) of sech.
pub fn pole_distance(z: Complex64) -> f64 {
    let k = (z.im / PI - 0.5).round();
    let dy = z.im - PI * (k + 0.5);
    z.re.hypot(dy)
}

pub(crate) fn check_pole_margin(z: Complex64, margin: f64) -> Result<()> {
    let distance = pole_distance(z);
    if distance <= margin {
        return Err(Error::PoleMargin {
            re: z.re,
            im: z.im,
            margin,
            distance,
        });
    }
    Ok(())
}

/// (sech z, tanh z) without forming cosh z for large |Re z|.
pub(crate) fn sech_tanh(z: Complex64) -> (Complex64, Complex64) {
    let (w, sign) = if z.re >= 0.0 { (z, 1.0) } else { (-z, -1.0) };
    let e = (-w).exp();
    let e2 = e * e;
    let denom = 1.0 + e2;
    (2.0 * e / denom, sign * (1.0 - e2) / denom)
}

/// Associated Legendre factor Q_l^m with Condon–Shortley phase.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreFactor {
    pub l: u32,
    pub m: u32,
    /// Coefficients of (−1)^m P_l^{(m)}(ξ) in ascending powers of ξ.
    poly: Vec<f64>,
}

impl LegendreFactor {
    pub fn new(l: u32, m: u32) -> Result<Self> {
        if l < 1 || m < 1 || m > l {
            return Err(Error::InvalidInput(format!("need 1 <= m <= l, got l = {l}, m = {m}")));
        }
        // P_l(ξ) = 2^{−l} Σ_k (−1)^k C(l,k) C(2l−2k, l) ξ^{l−2k}
        let l_us = l as usize;
        let mut p = vec![0.0; l_us + 1];
        for k in 0..=l_us / 2 {
            let c = binomial(l_us, k) * binomial(2 * l_us - 2 * k, l_us) / 2f64.powi(l as i32);
            p[l_us - 2 * k] = if k % 2 == 0 { c } else { -c };
        }
        for _ in 0..m {
            p = (1..p.len()).map(|j| j as f64 * p[j]).collect();
        }
        if m % 2 == 1 {
            p.iter_mut().for_each(|c| *c = -*c);
        }
        Ok(Self { l, m, poly: p })
    }

    /// Q_l^m(z) with the default pole margin.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_margin(z, DEFAULT_POLE_MARGIN)
    }

    pub fn eval_with_margin(&self, z: Complex64, margin: f64) -> Result<Complex64> {
        check_pole_margin(z, margin)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let (sech, tanh) = sech_tanh(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.poly.iter().rev() {
            acc = acc * tanh + c;
        }
        acc * sech.powu(self.m)
    }

    /// Q_l^m(z)·e^{m|Re z|}, bounded as |Re z| → ∞.
    pub(crate) fn eval_scaled(&self, z: Complex64) -> Complex64 {
        let w = if z.re >= 0.0 { z } else { -z };
        let e = (-w).exp();
        let sech_scaled = 2.0 * Complex64::from_polar(1.0, -w.im) / (1.0 + e * e);
        let (_, tanh) = sech_tanh(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.poly.iter().rev() {
            acc = acc * tanh + c;
        }
        acc * sech_scaled.powu(self.m)
    }

    /// Q_l^m on the real line.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval_unchecked(Complex64::new(x, 0.0)).re
    }

    /// Weight m(l−m)!/(l+m)! of this factor in the Pöschl–Teller sum.
    pub fn weight(&self) -> f64 {
        let mut w = self.m as f64;
        for j in (self.l - self.m + 1)..=(self.l + self.m) {
            w /= j as f64;
        }
        w
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Q_l^m(z) = P_l^m(tanh z).
pub fn q_lm(l: u32, m: u32, z: Complex64) -> Result<Complex64> {
    LegendreFactor::new(l, m)?.eval(z)
}

/// |Σ_m m(l−m)!/(l+m)!·Q_l^m(z) sinh(m(z−x)) Q_l^m(x) − l(l+1)/4·(tanh z − tanh x)|.
pub fn legendre_identity_residual(l: u32, x: f64, z: Complex64) -> Result<f64> {
    let xc = Complex64::new(x, 0.0);
    check_pole_margin(z, DEFAULT_POLE_MARGIN)?;
    let mut lhs = Complex64::new(0.0, 0.0);
    for m in 1..=l {
        let q = LegendreFactor::new(l, m)?;
        lhs += q.weight() * q.eval_unchecked(z) * (m as f64 * (z - xc)).sinh() * q.eval_real(x);
    }
    let rhs = (l * (l + 1)) as f64 / 4.0 * (sech_tanh(z).1 - x.tanh());
    Ok((lhs - rhs).norm())
}
