//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion over all of them. Run with `--nocapture` to see the lines on
//! success.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supershift_core::contour_quad::{
    epsilon_regularized_integral, rotated_integral, truncated_integral, QuadraturePlan, RealLineOptions,
};
use supershift_core::evolve::{
    analyticity_probe, continuous_dependence_check, initial_limit_check, linspace, schrodinger_residual_field,
    supershift_experiment, wavefield, EvolveOptions, SupershiftSpec,
};
use supershift_core::greens::{greens_value, make_kernel, GreensKernel, KernelOptions, Potential};
use supershift_core::initial_data::{
    default_metric_constant, disk_samples, eval_f_n, eval_f_n_f64, HolomorphicSignal, SupershiftFamily,
};
use supershift_core::ode_coeff::{solve_electric, solve_harmonic, wronskian_drift, TimeProfile};
use supershift_core::special_fn::{lambda_fn, legendre_identity_residual, r_kernel, r_kernel_derivatives};
use supershift_core::Complex64;

const FRESNEL_TOL: f64 = 1e-10;
const EPS_VS_ROTATED_TOL: f64 = 1e-4;
const TRUNCATION_TOL: f64 = 5e-2;
const FREE_GRID_TOL: f64 = 1e-8;
const ODE_TOL: f64 = 1e-10;
const HORIZON_TOL: f64 = 1e-8;
const WRONSKIAN_TOL: f64 = 1e-10;
const REDUCED_KERNEL_TOL: f64 = 1e-9;
const LAMBDA_REFLECTION_TOL: f64 = 1e-10;
const R_SYMMETRY_TOL: f64 = 1e-12;
const R_DERIVATIVE_TOL: f64 = 1e-6;
const LEGENDRE_TOL: f64 = 1e-10;
const PT_RESIDUAL_TOL: f64 = 1e-3;
const INITIAL_LIMIT_TOL: f64 = 1e-2;
const SUPERSHIFT_D40_TOL: f64 = 1e-2;
const CONTINUITY_SPREAD: f64 = 3.0;
const MORERA_FREE_TOL: f64 = 1e-6;
const MORERA_HARMONIC_TOL: f64 = 1e-5;
const CANCELLATION_FAIL_ABOVE: f64 = 1e-2;
const EXTENDED_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kernel(p: Potential) -> GreensKernel {
    make_kernel(p, &KernelOptions::default()).expect("kernel")
}

fn harmonic_unit() -> Potential {
    Potential::Harmonic(TimeProfile::Constant(1.0))
}

fn one() -> HolomorphicSignal {
    HolomorphicSignal::constant(c(1.0, 0.0))
}

fn cosine() -> HolomorphicSignal {
    let p = HolomorphicSignal::plane_wave(c(1.0, 0.0));
    let m = HolomorphicSignal::plane_wave(c(-1.0, 0.0));
    HolomorphicSignal::linear_combination(c(0.5, 0.0), &p, c(0.5, 0.0), &m)
}

fn fresnel_constant() -> Outcome {
    let r = rotated_integral(&one(), &QuadraturePlan::new(1.0, 0.0).with_tol(1e-12)).unwrap();
    let rot_err = (r.value - Complex64::from_polar(PI.sqrt(), FRAC_PI_4)).norm();
    let opts = RealLineOptions {
        tol: 1e-12,
        ..Default::default()
    };
    let mut eps_err = 0.0f64;
    for eps in [1e-1, 1e-2, 1e-3] {
        let v = epsilon_regularized_integral(&one(), 1.0, 0.0, 0.0, eps, &opts).unwrap().value;
        let want = (c(PI, 0.0) / c(eps, -1.0)).sqrt();
        eps_err = eps_err.max((v - want).norm());
    }
    outcome(
        rot_err <= FRESNEL_TOL && eps_err <= FRESNEL_TOL,
        format!("rotated err {rot_err:.2e}, eps-regularized max err {eps_err:.2e}"),
    )
}

fn representation_equivalence() -> Outcome {
    let fs = [
        ("1", one()),
        ("e^{2iz}", HolomorphicSignal::plane_wave(c(2.0, 0.0))),
        ("cos z", cosine()),
    ];
    let eps_opts = RealLineOptions {
        tol: 1e-8,
        ..Default::default()
    };
    let trunc_opts = RealLineOptions {
        tol: 1e-10,
        ..Default::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, f) in &fs {
        let rot = rotated_integral(f, &QuadraturePlan::new(1.0, 0.0).with_tol(1e-12)).unwrap().value;
        let eps = epsilon_regularized_integral(f, 1.0, 0.0, 0.0, 1e-5, &eps_opts).unwrap().value;
        let trunc = truncated_integral(f, 1.0, 0.0, 40.0, 40.0, &trunc_opts).unwrap().value;
        let (de, dt) = ((eps - rot).norm(), (trunc - rot).norm());
        pass &= de <= EPS_VS_ROTATED_TOL && dt <= TRUNCATION_TOL;
        parts.push(format!("{name}: eps {de:.2e}, R=40 {dt:.2e}"));
    }
    outcome(pass, parts.join("; "))
}

fn free_end_to_end() -> Outcome {
    let k = kernel(Potential::Free);
    let (ts, xs) = (linspace(0.1, 1.0, 21), linspace(-5.0, 5.0, 51));
    let w = wavefield(&k, &HolomorphicSignal::plane_wave(c(3.0, 0.0)), &ts, &xs, &EvolveOptions::default());
    let mut worst = 0.0f64;
    for (it, &t) in ts.iter().enumerate() {
        for (ix, &x) in xs.iter().enumerate() {
            worst = worst.max((w.at(it, ix) - c(0.0, 3.0 * x - 9.0 * t).exp()).norm());
        }
    }
    outcome(
        w.failures.is_empty() && worst <= FREE_GRID_TOL,
        format!("max error {worst:.2e} on 21x51, {} failures", w.failures.len()),
    )
}

fn coefficient_closed_forms() -> Outcome {
    let h = solve_harmonic(TimeProfile::Constant(1.0), 2.0, 1e-13).unwrap();
    let grid = linspace(0.0, FRAC_PI_2, 201);
    let mut harm = 0.0f64;
    for &t in &grid {
        harm = harm.max((h.alpha(t).unwrap() - (2.0 * t).sin() / 2.0).abs());
        harm = harm.max((h.beta(t).unwrap() - (2.0 * t).cos()).abs());
    }
    let horizon_err = (h.horizon - FRAC_PI_2).abs();
    let drift = wronskian_drift(&h, &grid).unwrap();

    // the pair (−t²/6, −t⁵/45) belongs to λ(t) = t; λ ≡ 1 gives (−t/2, −t³/12)
    let lin = solve_electric(TimeProfile::custom(|t| t), 1.0, 1e-13).unwrap();
    let unit = solve_electric(TimeProfile::Constant(1.0), 1.0, 1e-13).unwrap();
    let (mut e_lin, mut e_unit) = (0.0f64, 0.0f64);
    for t in linspace(0.0, 1.0, 101) {
        e_lin = e_lin.max((lin.alpha(t).unwrap() + t * t / 6.0).abs());
        e_lin = e_lin.max((lin.beta(t).unwrap() + t.powi(5) / 45.0).abs());
        e_unit = e_unit.max((unit.alpha(t).unwrap() + t / 2.0).abs());
        e_unit = e_unit.max((unit.beta(t).unwrap() + t.powi(3) / 12.0).abs());
    }
    outcome(
        harm <= ODE_TOL && horizon_err <= HORIZON_TOL && drift <= WRONSKIAN_TOL && e_lin <= ODE_TOL && e_unit <= ODE_TOL,
        format!(
            "harmonic {harm:.2e}, |T − π/2| {horizon_err:.2e}, Wronskian drift {drift:.2e}, \
             electric λ=t {e_lin:.2e}, electric λ≡1 {e_unit:.2e}"
        ),
    )
}

/// √ω/√(2iπ sin 2ωt)·exp(−ω(y−x)²/(2i tan 2ωt) − iωxy tan ωt)
fn reduced_harmonic(w: f64, t: f64, x: f64, y: Complex64) -> Complex64 {
    let i = Complex64::i();
    let d = y - x;
    let pre = w.sqrt() / Complex64::from_polar((2.0 * PI * (2.0 * w * t).sin()).sqrt(), FRAC_PI_4);
    pre * (-(w * d * d) / (2.0 * i * (2.0 * w * t).tan()) - i * w * x * y * (w * t).tan()).exp()
}

fn harmonic_kernel_identity() -> Outcome {
    let k = kernel(harmonic_unit());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.gen_range(1e-3..FRAC_PI_4);
        let x = rng.gen_range(-2.0..2.0);
        let theta = rng.gen_range(0.0..FRAC_PI_4) + if rng.gen_bool(0.5) { PI } else { 0.0 };
        let z = x + Complex64::from_polar(rng.gen_range(0.0..3.0), theta);
        let want = reduced_harmonic(1.0, t, x, z);
        let got = greens_value(&k, t, x, z).unwrap();
        worst = worst.max((got - want).norm() / want.norm().max(1.0));
    }
    outcome(worst <= REDUCED_KERNEL_TOL, format!("max scaled difference {worst:.2e} over 100 points"))
}

fn special_functions() -> Outcome {
    let lam0 = lambda_fn(c(0.0, 0.0)).unwrap();
    let mut refl = 0.0f64;
    for w in [c(0.3, 0.2), c(-1.0, 0.5), c(1.7, -2.2), c(0.0, 3.0), c(-2.5, -0.4)] {
        let lhs = lambda_fn(w).unwrap() + lambda_fn(-w).unwrap();
        refl = refl.max((lhs - 2.0 * (w * w).exp()).norm() / (w * w).exp().norm().max(1.0));
    }
    let mut sym = 0.0f64;
    let mut deriv = 0.0f64;
    for (t, z) in [(0.3, c(0.5, 0.1)), (1.0, c(-1.2, 0.4)), (0.05, c(2.0, -0.3)), (2.0, c(0.1, 0.0))] {
        let r = r_kernel(t, z).unwrap();
        sym = sym.max((r - r_kernel(t, -z).unwrap()).norm() / r.norm().max(1.0));
        let (dz, dt) = r_kernel_derivatives(t, z).unwrap();
        let h = 1e-5;
        let fd_z = (r_kernel(t, z + h).unwrap() - r_kernel(t, z - h).unwrap()) / (2.0 * h);
        let fd_t = (r_kernel(t + h, z).unwrap() - r_kernel(t - h, z).unwrap()) / (2.0 * h);
        deriv = deriv.max((fd_z - dz).norm() / dz.norm().max(1.0));
        deriv = deriv.max((fd_t - dt).norm() / dt.norm().max(1.0));
    }
    let mut leg = 0.0f64;
    for l in 1..=4 {
        for (x, z) in [(0.3, c(0.5, 0.2)), (-1.0, c(1.5, -0.7)), (2.0, c(-0.4, 1.0))] {
            leg = leg.max(legendre_identity_residual(l, x, z).unwrap());
        }
    }
    outcome(
        lam0 == c(1.0, 0.0)
            && refl <= LAMBDA_REFLECTION_TOL
            && sym <= R_SYMMETRY_TOL
            && deriv <= R_DERIVATIVE_TOL
            && leg <= LEGENDRE_TOL,
        format!(
            "Λ(0) = {lam0}, reflection {refl:.2e}, R symmetry {sym:.2e}, R derivatives {deriv:.2e}, Legendre {leg:.2e}"
        ),
    )
}

fn poschl_teller_residual() -> Outcome {
    let opts = EvolveOptions {
        tol: 1e-12,
        ..Default::default()
    };
    let f = HolomorphicSignal::plane_wave(c(1.0, 0.0));
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [1, 2] {
        let k = kernel(Potential::PoschlTeller(l));
        let w = wavefield(&k, &f, &linspace(0.3, 0.32, 5), &linspace(0.2, 0.22, 5), &opts);
        let r = schrodinger_residual_field(&w, &k).unwrap();
        pass &= w.failures.is_empty() && r.max_residual <= PT_RESIDUAL_TOL;
        parts.push(format!("l={l}: {:.2e}", r.max_residual));
    }
    outcome(pass, parts.join(", "))
}

fn initial_value_limit() -> Outcome {
    let f = HolomorphicSignal::plane_wave(c(2.0, 0.0));
    let cases = [
        (Potential::Free, linspace(-3.0, 3.0, 13)),
        (Potential::Electric(TimeProfile::Constant(1.0)), linspace(-3.0, 3.0, 13)),
        (harmonic_unit(), linspace(-3.0, 3.0, 13)),
        (Potential::PoschlTeller(1), linspace(-2.0, 2.0, 9)),
        (Potential::PoschlTeller(2), linspace(-2.0, 2.0, 9)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, xs) in cases {
        let label = p.label();
        let k = kernel(p);
        let r = initial_limit_check(&k, &f, &xs, &[1e-2, 1e-3, 1e-4], &EvolveOptions::default(), INITIAL_LIMIT_TOL).unwrap();
        pass &= r.pass;
        parts.push(format!("{label} {:.1e}", r.max_errors[2]));
    }
    outcome(pass, parts.join(", "))
}

fn supershift_persistence() -> Outcome {
    let fam = SupershiftFamily::plane_waves();
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, kappa, t_hi) in [(Potential::Free, 3.0, 0.5), (harmonic_unit(), 2.0, 0.4)] {
        let label = p.label();
        let k = kernel(p);
        let spec = SupershiftSpec {
            ns: vec![10, 20, 40],
            kappa: c(kappa, 0.0),
            ts: linspace(0.1, t_hi, 5),
            xs: linspace(-1.0, 1.0, 9),
            metric_constant: None,
            metric_samples: disk_samples(2.0, 8, 32),
        };
        let r = supershift_experiment(&k, &fam, &spec, &EvolveOptions::default()).unwrap();
        let metrics_down = r.metrics.windows(2).all(|w| w[1] < w[0]);
        pass &= r.strictly_decreasing && metrics_down && r.distances[2] <= SUPERSHIFT_D40_TOL;
        parts.push(format!(
            "{label} κ={kappa}: d_n = [{:.3e}, {:.3e}, {:.3e}], metric decreasing {metrics_down}",
            r.distances[0], r.distances[1], r.distances[2]
        ));
    }
    outcome(pass, parts.join("; "))
}

fn continuous_dependence() -> Outcome {
    let k = kernel(Potential::Free);
    let fam = SupershiftFamily::plane_waves();
    let kappa = c(3.0, 0.0);
    let fns: Vec<_> = [10, 20, 40].iter().map(|&n| fam.combination(n, kappa).unwrap()).collect();
    let r = continuous_dependence_check(
        &k,
        &fam.phi(kappa),
        &fns,
        default_metric_constant(kappa),
        &disk_samples(2.0, 8, 32),
        &linspace(0.1, 0.5, 5),
        &linspace(-1.0, 1.0, 9),
        &EvolveOptions::default(),
    )
    .unwrap();
    outcome(
        r.pass && r.spread <= CONTINUITY_SPREAD,
        format!("fitted constant {:.4e}, spread {:.3}", r.fitted_constant, r.spread),
    )
}

fn analyticity() -> Outcome {
    let opts = EvolveOptions::default();
    let free = analyticity_probe(&kernel(Potential::Free), 0.3, 0.5, [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], 64, &opts)
        .unwrap();
    let harm = analyticity_probe(&kernel(harmonic_unit()), 0.2, 0.5, [c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0)], 64, &opts)
        .unwrap();
    let (a, b) = (free.integral.norm(), harm.integral.norm());
    outcome(
        a <= MORERA_FREE_TOL && b <= MORERA_HARMONIC_TOL,
        format!("free |∮| {a:.2e}, harmonic |∮| {b:.2e}"),
    )
}

fn cancellation_certificate() -> Outcome {
    let (n, k, x) = (60u32, 3.0, c(1.0, 0.0));
    let s = x / n as f64;
    let want = (s.cos() + c(0.0, k) * s.sin()).powu(n);
    let rel = |v: Complex64| (v - want).norm() / want.norm();
    let double = rel(eval_f_n_f64(n, k, x).unwrap());
    let extended = rel(eval_f_n(n, k, x).unwrap());
    outcome(
        double > CANCELLATION_FAIL_ABOVE && extended <= EXTENDED_TOL,
        format!("double precision rel err {double:.2e}, extended {extended:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("Fresnel constant", fresnel_constant),
        ("representation equivalence", representation_equivalence),
        ("free-particle end-to-end", free_end_to_end),
        ("coefficient ODE closed forms", coefficient_closed_forms),
        ("harmonic kernel identity", harmonic_kernel_identity),
        ("special functions", special_functions),
        ("Pöschl–Teller PDE residual", poschl_teller_residual),
        ("initial-value limit", initial_value_limit),
        ("supershift persistence", supershift_persistence),
        ("continuous dependence", continuous_dependence),
        ("analyticity probe", analyticity),
        ("cancellation certificate", cancellation_certificate),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} ({:.1} s)", i + 1, o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}
