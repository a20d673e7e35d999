//! Dormand–Prince 5(4) with step-size control.
//!
//! Dense output re-integrates a single step from the nearest accepted mesh
//! point, which keeps the local accuracy of the method at every query time
//! (interpolants lose relative accuracy where the solution starts at zero).

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-13,
            atol: 1e-20,
            h_max: 0.01,
            max_steps: 1_000_000,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One step of size h; returns the fifth-order solution and the error estimate vector.
pub fn step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y5 = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

/// Accepted mesh of an adaptive integration from t = 0.
#[derive(Debug, Clone)]
pub struct Mesh<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
}

impl<const N: usize> Mesh<N> {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// State at t ∈ [0, t_end] by one step from the mesh point at or below t.
    pub fn eval<F>(&self, f: &F, t: f64) -> [f64; N]
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let idx = match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => return self.states[i],
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let t0 = self.times[idx];
        step(f, t0, &self.states[idx], t - t0).0
    }
}

/// Integrates y' = f(t, y) from (t0, y0) to t_end.
pub fn integrate<const N: usize, F>(f: &F, t0: f64, y0: [f64; N], t_end: f64, ctl: &StepControl) -> Mesh<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut times = vec![t0];
    let mut states = vec![y0];
    let mut t = t0;
    let mut y = y0;
    let mut h = (1e-3 * (t_end - t0)).min(ctl.h_max).max(1e-12);
    let mut steps = 0;
    while t < t_end && steps < ctl.max_steps {
        steps += 1;
        if t + h > t_end {
            h = t_end - t;
        }
        let (y_new, err) = step(f, t, &y, h);
        let mut norm = 0.0f64;
        for i in 0..N {
            let sc = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            norm = norm.max((err[i] / sc).abs());
        }
        if norm <= 1.0 || h <= 1e-14 * t_end.abs().max(1.0) {
            t += h;
            y = y_new;
            times.push(t);
            states.push(y);
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(ctl.h_max);
    }
    Mesh { times, states }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_is_reproduced() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let mesh = integrate(&f, 0.0, [1.0], 2.0, &StepControl::default());
        assert!((mesh.states.last().unwrap()[0] - 2f64.exp()).abs() < 1e-12);
        for t in [0.013, 0.5, 1.37, 2.0] {
            assert!((mesh.eval(&f, t)[0] - t.exp()).abs() < 1e-12 * t.exp());
        }
    }

    #[test]
    fn oscillator_dense_output() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mesh = integrate(&f, 0.0, [0.0, 1.0], 10.0, &StepControl::default());
        for k in 0..=97 {
            let t = k as f64 * 0.1031;
            let s = mesh.eval(&f, t);
            assert!((s[0] - t.sin()).abs() < 1e-11, "t = {t}");
            assert!((s[1] - t.cos()).abs() < 1e-11);
        }
    }
}
