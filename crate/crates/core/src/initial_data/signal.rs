use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::contour_quad::{GrowthKind, GrowthWitness};
use crate::error::Result;

type EvalFn = dyn Fn(Complex64) -> Result<Complex64> + Send + Sync;

/// A holomorphic function with a declared exponential growth witness.
#[derive(Clone)]
pub struct HolomorphicSignal {
    eval: Arc<EvalFn>,
    pub growth: GrowthWitness,
    pub label: String,
}

impl fmt::Debug for HolomorphicSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolomorphicSignal")
            .field("label", &self.label)
            .field("growth", &self.growth)
            .finish_non_exhaustive()
    }
}

impl HolomorphicSignal {
    pub fn new<F>(label: impl Into<String>, growth: GrowthWitness, eval: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            growth,
            label: label.into(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        (self.eval)(z)
    }

    /// The constant function c.
    pub fn constant(c: Complex64) -> Self {
        Self::new(format!("const:{c}"), GrowthWitness::imag(c.norm(), 0.0), move |_| Ok(c))
    }

    /// φ_κ(z) = e^{iκz}. For real κ the witness is the imaginary-part bound
    /// |φ_κ(z)| ≤ e^{|κ||Im z|}; for complex κ the modulus bound e^{|κ||z|}.
    pub fn plane_wave(kappa: Complex64) -> Self {
        let growth = if kappa.im == 0.0 {
            GrowthWitness::imag(1.0, kappa.re.abs())
        } else {
            GrowthWitness::modulus(1.0, kappa.norm())
        };
        let i_kappa = Complex64::i() * kappa;
        Self::new(format!("plane:k={kappa}"), growth, move |z| Ok((i_kappa * z).exp()))
    }

    /// c₁f₁ + c₂f₂ with the sum of the witnesses (the weaker kind wins).
    pub fn linear_combination(c1: Complex64, f1: &Self, c2: Complex64, f2: &Self) -> Self {
        let growth = combine_growth(c1.norm(), &f1.growth, c2.norm(), &f2.growth);
        let (g1, g2) = (f1.clone(), f2.clone());
        Self::new(
            format!("({c1})*{} + ({c2})*{}", f1.label, f2.label),
            growth,
            move |z| Ok(c1 * g1.eval(z)? + c2 * g2.eval(z)?),
        )
    }

    /// c·f.
    pub fn scaled(&self, c: Complex64) -> Self {
        let g = self.clone();
        let growth = GrowthWitness {
            a: self.growth.a * c.norm(),
            ..self.growth
        };
        Self::new(format!("({c})*{}", self.label), growth, move |z| Ok(c * g.eval(z)?))
    }
}

fn combine_growth(s1: f64, w1: &GrowthWitness, s2: f64, w2: &GrowthWitness) -> GrowthWitness {
    let kind = if w1.kind == GrowthKind::ImagPart && w2.kind == GrowthKind::ImagPart {
        GrowthKind::ImagPart
    } else {
        GrowthKind::Modulus
    };
    GrowthWitness {
        a: s1 * w1.a + s2 * w2.a,
        b: w1.b.max(w2.b),
        kind,
    }
}
