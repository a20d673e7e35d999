//! wasm-bindgen entry points for the page in `www/`, which loads the
//! generated bindings from `www/pkg/`.
//!
//! The plain functions return `Err(String)` so they can be tested natively;
//! the exported wrappers turn those into JS exceptions.

use supershift_core::evolve::{linspace, wavefield, wavefunction, EvolveOptions};
use supershift_core::greens::{make_kernel, GreensKernel, KernelOptions, Potential};
use supershift_core::initial_data::{HolomorphicSignal, SupershiftFamily};
use supershift_core::ode_coeff::TimeProfile;
use supershift_core::Complex64;
use wasm_bindgen::prelude::*;

/// `kind` is free, electric, harmonic or poschl-teller; `param` is the
/// constant λ, or l for Pöschl–Teller.
pub fn kernel(kind: &str, param: f64) -> Result<GreensKernel, String> {
    let p = match kind {
        "free" => Potential::Free,
        "electric" => Potential::Electric(TimeProfile::Constant(param)),
        "harmonic" => Potential::Harmonic(TimeProfile::Constant(param)),
        "poschl-teller" => {
            if !(param >= 1.0 && param.fract() == 0.0 && param <= 32.0) {
                return Err(format!("l must be an integer in 1..=32, got {param}"));
            }
            Potential::PoschlTeller(param as u32)
        }
        other => return Err(format!("unknown potential `{other}`")),
    };
    make_kernel(p, &KernelOptions::default()).map_err(|e| e.to_string())
}

fn real(k: f64) -> Complex64 {
    Complex64::new(k, 0.0)
}

/// Ψ(t,·) for the plane wave e^{ikx} on `count` points of [x0, x1],
/// interleaved as re, im pairs.
pub fn plane_wave_row(kind: &str, param: f64, k: f64, t: f64, x0: f64, x1: f64, count: usize) -> Result<Vec<f64>, String> {
    let kernel = kernel(kind, param)?;
    row(&kernel, &HolomorphicSignal::plane_wave(real(k)), t, x0, x1, count)
}

fn row(kernel: &GreensKernel, f: &HolomorphicSignal, t: f64, x0: f64, x1: f64, count: usize) -> Result<Vec<f64>, String> {
    if count == 0 || count > 2000 {
        return Err(format!("count must lie in 1..=2000, got {count}"));
    }
    let field = wavefield(kernel, f, &[t], &linspace(x0, x1, count), &EvolveOptions::default());
    if let Some(p) = field.failures.first() {
        return Err(format!("x = {}: {}", p.x, p.error));
    }
    Ok(field.values.iter().flat_map(|v| [v.re, v.im]).collect())
}

/// Ψ(t,·;F_n) and Ψ(t,·;e^{iκ·}) side by side: re, im of the first, then
/// re, im of the second, per point.
#[allow(clippy::too_many_arguments)]
pub fn supershift_rows(
    kind: &str,
    param: f64,
    n: u32,
    kappa: f64,
    t: f64,
    x0: f64,
    x1: f64,
    count: usize,
) -> Result<Vec<f64>, String> {
    if !(1..=200).contains(&n) {
        return Err(format!("n must lie in 1..=200, got {n}"));
    }
    let kernel = kernel(kind, param)?;
    let fam = SupershiftFamily::plane_waves();
    let f_n = fam.combination(n, real(kappa)).map_err(|e| e.to_string())?;
    let a = row(&kernel, &f_n, t, x0, x1, count)?;
    let b = row(&kernel, &fam.phi(real(kappa)), t, x0, x1, count)?;
    Ok(a.chunks(2).zip(b.chunks(2)).flat_map(|(p, q)| [p[0], p[1], q[0], q[1]]).collect())
}

/// Ψ(t,x) for one point: re, im and the quadrature error estimate.
pub fn point(kind: &str, param: f64, k: f64, t: f64, x: f64) -> Result<Vec<f64>, String> {
    let kernel = kernel(kind, param)?;
    let r = wavefunction(&kernel, &HolomorphicSignal::plane_wave(real(k)), t, x, &EvolveOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(vec![r.value.re, r.value.im, r.err_estimate])
}

/// Kernel horizon T; times must stay below it.
#[wasm_bindgen]
pub fn horizon(kind: &str, param: f64) -> Result<f64, JsError> {
    kernel(kind, param).map(|k| k.horizon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = planeWaveRow)]
pub fn plane_wave_row_js(kind: &str, param: f64, k: f64, t: f64, x0: f64, x1: f64, count: usize) -> Result<Vec<f64>, JsError> {
    plane_wave_row(kind, param, k, t, x0, x1, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = supershiftRows)]
#[allow(clippy::too_many_arguments)]
pub fn supershift_rows_js(
    kind: &str,
    param: f64,
    n: u32,
    kappa: f64,
    t: f64,
    x0: f64,
    x1: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    supershift_rows(kind, param, n, kappa, t, x0, x1, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = evolvePoint)]
pub fn point_js(kind: &str, param: f64, k: f64, t: f64, x: f64) -> Result<Vec<f64>, JsError> {
    point(kind, param, k, t, x).map_err(|e| JsError::new(&e))
}
