//! Exact dyadic numbers and binary fixed-point complex arithmetic on BigInt.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// (re + i·im)·2^exp with integer parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub re: BigInt,
    pub im: BigInt,
    pub exp: i64,
}

impl Dyadic {
    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(scaled_to_f64(&self.re, self.exp), scaled_to_f64(&self.im, self.exp))
    }

    /// log2 of the modulus, accurate to a few ulps.
    pub fn log2_norm(&self) -> f64 {
        let r = log2_abs(&self.re);
        let i = log2_abs(&self.im);
        let m = r.max(i);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + 0.5 * ((2.0 * (r - m)).exp2() + (2.0 * (i - m)).exp2()).log2() + self.exp as f64
    }
}

fn log2_abs(v: &BigInt) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    let shift = bits.saturating_sub(60);
    let top = (v.abs() >> shift).to_f64().unwrap_or(f64::MAX);
    top.log2() + shift as f64
}

/// v·2^e as the nearest f64 (saturating to ±inf, flushing to 0).
pub fn scaled_to_f64(v: &BigInt, e: i64) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let bits = v.bits() as i64;
    let shift = (bits - 64).max(0);
    let top = (v >> shift as usize).to_f64().unwrap_or(0.0);
    ldexp(top, e + shift)
}

pub fn ldexp(x: f64, mut e: i64) -> f64 {
    let mut y = x;
    while e > 1000 {
        y *= 2f64.powi(1000);
        e -= 1000;
        if y.is_infinite() {
            return y;
        }
    }
    while e < -1000 {
        y *= 2f64.powi(-1000);
        e += 1000;
        if y == 0.0 {
            return y;
        }
    }
    y * 2f64.powi(e as i32)
}

/// Exact decomposition x = m·2^e with integer m.
pub fn decompose(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = if exponent == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    (BigInt::from(sign) * BigInt::from(mantissa), exponent - 1075)
}

/// x·2^bits rounded toward zero, exact when x·2^bits is an integer.
pub fn to_fixed(x: f64, bits: u64) -> BigInt {
    let (m, e) = decompose(x);
    let s = e + bits as i64;
    if s >= 0 {
        m << s as usize
    } else {
        shr_round(&m, (-s) as u64)
    }
}

/// Right shift with rounding to nearest.
pub fn shr_round(v: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return v.clone();
    }
    let half = BigInt::one() << (s - 1) as usize;
    let (q, _) = (v + half).div_mod_floor(&(BigInt::one() << s as usize));
    q
}

/// Complex number stored as (re + i·im)·2^{−bits}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixed {
    pub re: BigInt,
    pub im: BigInt,
}

impl Fixed {
    pub fn from_complex(z: Complex64, bits: u64) -> Self {
        Self {
            re: to_fixed(z.re, bits),
            im: to_fixed(z.im, bits),
        }
    }

    pub fn one(bits: u64) -> Self {
        Self {
            re: BigInt::one() << bits as usize,
            im: BigInt::zero(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn mul(&self, o: &Self, bits: u64) -> Self {
        let rr = &self.re * &o.re - &self.im * &o.im;
        let ii = &self.re * &o.im + &self.im * &o.re;
        Self {
            re: shr_round(&rr, bits),
            im: shr_round(&ii, bits),
        }
    }

    pub fn div_small(&self, d: u64) -> Self {
        let d = BigInt::from(d);
        Self {
            re: &self.re / &d,
            im: &self.im / &d,
        }
    }

    /// Rescale from `from` fractional bits to `to` fractional bits.
    pub fn rescale(&self, from: u64, to: u64) -> Self {
        if to >= from {
            let s = (to - from) as usize;
            Self {
                re: &self.re << s,
                im: &self.im << s,
            }
        } else {
            let s = from - to;
            Self {
                re: shr_round(&self.re, s),
                im: shr_round(&self.im, s),
            }
        }
    }

    #[cfg(test)]
    pub fn to_complex64(&self, bits: u64) -> Complex64 {
        let e = -(bits as i64);
        Complex64::new(scaled_to_f64(&self.re, e), scaled_to_f64(&self.im, e))
    }
}

/// e^w to `bits` fractional bits, for w given exactly as a double.
///
/// The argument is halved r times so that |w/2^r| < 2^{−8}, the Taylor
/// series is summed, and the result squared r times; r + 16 guard bits
/// absorb the error growth of the squarings.
pub fn exp_fixed(w: Complex64, bits: u64) -> Fixed {
    let norm = w.norm();
    let r = if norm > 0.0 { (norm.log2().ceil() as i64 + 8).max(0) as u64 } else { 0 };
    let work = bits + r + 16 + (w.re.abs() / std::f64::consts::LN_2).ceil() as u64;
    let reduced = Fixed::from_complex(Complex64::new(ldexp(w.re, -(r as i64)), ldexp(w.im, -(r as i64))), work);
    let mut sum = Fixed::one(work);
    let mut term = Fixed::one(work);
    for k in 1..10_000u64 {
        term = term.mul(&reduced, work).div_small(k);
        if term.re.is_zero() && term.im.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    for _ in 0..r {
        sum = sum.mul(&sum, work);
    }
    sum.rescale(work, bits)
}
