use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::extended::{decompose, exp_fixed, Dyadic, Fixed};
use super::HolomorphicSignal;
use crate::contour_quad::{ComplexSum, GrowthWitness};
use crate::error::{Error, Result};

/// Largest fixed-point precision tried before giving up.
pub const MAX_BITS: u64 = 20_000;

/// Target relative error of the extended-precision path, as a power of two.
const TARGET_BITS: f64 = 62.0;

/// F_n(z; k) = Σ_{l=0}^{n} C_l(n;k) e^{i(1 − 2l/n)z} with
/// C_l(n;k) = binom(n,l)·((1+k)/2)^{n−l}·((1−k)/2)^l.
///
/// The coefficients are stored exactly as Gaussian integers times a
/// common power of two; k is read as the exact dyadic rational of its
/// double representation.
#[derive(Debug, Clone)]
pub struct SuperoscSequence {
    pub n: u32,
    pub k: Complex64,
    ints: Vec<(BigInt, BigInt)>,
    exp: i64,
    p_abs: f64,
    q_abs: f64,
}

impl SuperoscSequence {
    pub fn new(n: u32, k: Complex64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if !k.re.is_finite() || !k.im.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite k = {k}")));
        }
        let (mr, er) = decompose(k.re);
        let (mi, ei) = decompose(k.im);
        let e = 0i64.min(if mr.is_zero() { 0 } else { er }).min(if mi.is_zero() { 0 } else { ei });
        // k = (Kr + i Ki)·2^e with e ≤ 0
        let kr = mr << (er - e).max(0) as usize;
        let ki = mi << (ei - e).max(0) as usize;
        let unit = BigInt::one() << (-e) as usize;
        // (1 ± k)/2 = (2^{−e} ± K)·2^{e−1}
        let p = (&unit + &kr, ki.clone());
        let q = (&unit - &kr, -ki);
        let nn = n as usize;
        let mut p_pows = vec![(BigInt::one(), BigInt::zero())];
        let mut q_pows = vec![(BigInt::one(), BigInt::zero())];
        for _ in 0..nn {
            p_pows.push(gauss_mul(p_pows.last().unwrap(), &p));
            q_pows.push(gauss_mul(q_pows.last().unwrap(), &q));
        }
        let mut binom = BigInt::one();
        let mut ints = Vec::with_capacity(nn + 1);
        for l in 0..=nn {
            let prod = gauss_mul(&p_pows[nn - l], &q_pows[l]);
            ints.push((&binom * &prod.0, &binom * &prod.1));
            binom = binom * BigInt::from(nn - l) / BigInt::from(l + 1);
        }
        let half = |z: Complex64| z * 0.5;
        Ok(Self {
            n,
            k,
            ints,
            exp: n as i64 * (e - 1),
            p_abs: half(1.0 + k).norm(),
            q_abs: half(1.0 - k).norm(),
        })
    }

    pub fn real(n: u32, k: f64) -> Result<Self> {
        Self::new(n, Complex64::new(k, 0.0))
    }

    /// k_l(n) = 1 − 2l/n.
    pub fn freq(&self, l: u32) -> f64 {
        1.0 - 2.0 * l as f64 / self.n as f64
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..=self.n).map(|l| self.freq(l)).collect()
    }

    /// Exact coefficients C_0, …, C_n.
    pub fn coefficients(&self) -> Vec<Dyadic> {
        self.ints
            .iter()
            .map(|(re, im)| Dyadic {
                re: re.clone(),
                im: im.clone(),
                exp: self.exp,
            })
            .collect()
    }

    pub fn coefficients_f64(&self) -> Vec<Complex64> {
        self.coefficients().iter().map(Dyadic::to_complex64).collect()
    }

    /// Σ_l |C_l| = (|1+k|/2 + |1−k|/2)^n.
    pub fn abs_sum(&self) -> f64 {
        (self.p_abs + self.q_abs).powi(self.n as i32)
    }

    /// Growth witness |F_n(z)| ≤ Σ|C_l|·e^{|Im z|}, valid since |k_l| ≤ 1.
    pub fn growth(&self) -> GrowthWitness {
        GrowthWitness::imag(self.abs_sum(), 1.0)
    }

    /// log2 of Σ_l |C_l e^{ik_l z}| = |e^{iz}|·(|p| + |q||u|)^n, u = e^{−2iz/n}.
    fn log2_abs_terms(&self, z: Complex64) -> f64 {
        let u_abs = (2.0 * z.im / self.n as f64).exp();
        -z.im * std::f64::consts::LOG2_E + self.n as f64 * (self.p_abs + self.q_abs * u_abs).log2()
    }

    /// Condition number Σ|C_l e^{ik_l z}| / |F_n(z)| of the sum at z.
    pub fn condition(&self, z: Complex64) -> Result<f64> {
        let v = self.eval(z)?;
        Ok((self.log2_abs_terms(z) - v.norm().log2()).exp2())
    }

    /// F_n(z) in extended precision, rounded to double only at the end.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_bits(z).map(|(v, _)| v)
    }

    /// F_n(z) together with the number of fractional bits that were used.
    pub fn eval_with_bits(&self, z: Complex64) -> Result<(Complex64, u64)> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite argument {z}")));
        }
        let n = self.n as f64;
        let log2n = (n + 1.0).log2();
        let terms = self.log2_abs_terms(z);
        // first guess assumes |F_n(z)| ≈ |e^{iz}|
        let guess = (terms + z.im * std::f64::consts::LOG2_E).max(0.0);
        let mut bits = (TARGET_BITS + log2n + guess + 16.0).min(MAX_BITS as f64) as u64;
        loop {
            let value = self.horner(z, bits);
            let log2_val = value.norm().log2();
            let log2_cond = if value.norm() > 0.0 { terms - log2_val } else { f64::INFINITY };
            // relative error about (n+1)·cond·2^{−bits}
            let needed = TARGET_BITS + log2n + log2_cond.max(0.0) + 4.0;
            if (bits as f64) >= needed {
                return Ok((value, bits));
            }
            if needed > MAX_BITS as f64 {
                return Err(Error::PrecisionExhausted {
                    condition: log2_cond.exp2(),
                    bits: MAX_BITS,
                });
            }
            bits = (needed.ceil() as u64 + 16).max(2 * bits).min(MAX_BITS);
        }
    }

    /// e^{iz}·2^{exp}·Σ C_l' u^l by Horner in fixed point, with u = e^{−2iz/n}.
    fn horner(&self, z: Complex64, bits: u64) -> Complex64 {
        let w = Complex64::new(0.0, -2.0) * z / self.n as f64;
        let u = exp_fixed(w, bits);
        let lift = |c: &(BigInt, BigInt)| Fixed {
            re: &c.0 << bits as usize,
            im: &c.1 << bits as usize,
        };
        let mut acc = lift(&self.ints[self.n as usize]);
        for c in self.ints[..self.n as usize].iter().rev() {
            acc = acc.mul(&u, bits).add(&lift(c));
        }
        let s = Dyadic {
            re: acc.re,
            im: acc.im,
            exp: self.exp - bits as i64,
        };
        scale_by_exp(&s, Complex64::i() * z)
    }

    /// Σ_l C_l e^{isk_l x − is²k_l² t}: the free-particle evolution of
    /// F_n(s·;k) at (t, x), summed in fixed point.
    ///
    /// The phase is split as E₀·U^l·W^{l²}, so rounding the three exponents
    /// perturbs x and t consistently across all terms instead of
    /// independently per term.
    pub fn free_evolution(&self, s: f64, t: f64, x: f64) -> Result<Complex64> {
        let n = self.n as f64;
        let w_u = Complex64::new(0.0, (-2.0 * s * x + 4.0 * s * s * t) / n);
        let w_w = Complex64::new(0.0, -4.0 * s * s * t / (n * n));
        let e0 = Complex64::new(0.0, s * x - s * s * t);
        let log2n = (n + 1.0).log2();
        let terms = self.abs_sum().log2();
        let mut bits = (TARGET_BITS + log2n + terms + 32.0).min(MAX_BITS as f64) as u64;
        loop {
            let u = exp_fixed(w_u, bits);
            let w = exp_fixed(w_w, bits);
            let w2 = w.mul(&w, bits);
            // T_l = U^l W^{l²}, V_l = U W^{2l+1}
            let mut t_l = Fixed::one(bits);
            let mut v_l = u.mul(&w, bits);
            let mut acc = Fixed {
                re: BigInt::zero(),
                im: BigInt::zero(),
            };
            for c in &self.ints {
                let term = Fixed {
                    re: &c.0 * &t_l.re - &c.1 * &t_l.im,
                    im: &c.0 * &t_l.im + &c.1 * &t_l.re,
                };
                acc = acc.add(&term);
                t_l = t_l.mul(&v_l, bits);
                v_l = v_l.mul(&w2, bits);
            }
            let sum = Dyadic {
                re: acc.re,
                im: acc.im,
                exp: self.exp - bits as i64,
            };
            let value = scale_by_exp(&sum, e0);
            let log2_cond = if value.norm() > 0.0 { terms - value.norm().log2() } else { f64::INFINITY };
            let needed = TARGET_BITS + 2.0 * log2n + log2_cond.max(0.0) + 4.0;
            if (bits as f64) >= needed {
                return Ok(value);
            }
            if needed > MAX_BITS as f64 {
                return Err(Error::PrecisionExhausted {
                    condition: log2_cond.exp2(),
                    bits: MAX_BITS,
                });
            }
            bits = (needed.ceil() as u64 + 16).max(2 * bits).min(MAX_BITS);
        }
    }

    /// Plain double-precision Σ C_l e^{ik_l z}, for comparison only.
    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        self.coefficients_f64()
            .iter()
            .enumerate()
            .map(|(l, c)| c * (Complex64::i() * self.freq(l as u32) * z).exp())
            .sum()
    }

    /// F_n as a signal, evaluated in extended precision.
    pub fn signal(&self) -> HolomorphicSignal {
        let seq = self.clone();
        HolomorphicSignal::new(format!("superosc:n={},k={}", self.n, self.k), self.growth(), move |z| seq.eval(z))
    }
}

/// e^{w}·s, splitting the power of two of s so that neither factor
/// overflows on its own.
fn scale_by_exp(s: &Dyadic, w: Complex64) -> Complex64 {
    let log2_s = s.log2_norm();
    if !log2_s.is_finite() {
        return Complex64::new(0.0, 0.0);
    }
    let shift = log2_s.round() as i64;
    let mantissa = Dyadic {
        re: s.re.clone(),
        im: s.im.clone(),
        exp: s.exp - shift,
    }
    .to_complex64();
    (w + Complex64::new(shift as f64 * std::f64::consts::LN_2, 0.0)).exp() * mantissa
}

fn gauss_mul(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// C_l(n;k) for real k, exactly.
pub fn superosc_coefficients(n: u32, k: f64) -> Result<Vec<Dyadic>> {
    Ok(SuperoscSequence::real(n, k)?.coefficients())
}

/// F_n(z; k) in extended precision.
pub fn eval_f_n(n: u32, k: f64, z: Complex64) -> Result<Complex64> {
    SuperoscSequence::real(n, k)?.eval(z)
}

/// F_n(z; k) summed term by term in double precision.
pub fn eval_f_n_f64(n: u32, k: f64, z: Complex64) -> Result<Complex64> {
    Ok(SuperoscSequence::real(n, k)?.eval_f64(z))
}

/// Σ c_l·v_l with compensated double-precision summation.
pub fn compensated_combination(coeffs: &[Complex64], values: &[Complex64]) -> Complex64 {
    let mut acc = ComplexSum::new();
    for (c, v) in coeffs.iter().zip(values) {
        acc.add(c * v);
    }
    acc.value()
}
