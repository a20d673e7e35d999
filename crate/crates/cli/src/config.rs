//! Experiment configuration: a TOML file, optionally overridden by inline
//! flags, resolved into kernels, signals and grids.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use supershift_core::evolve::{linspace, EvolveOptions};
use supershift_core::greens::{make_kernel, GreensKernel, KernelOptions, Potential};
use supershift_core::initial_data::{HolomorphicSignal, SupershiftFamily};
use supershift_core::ode_coeff::TimeProfile;
use supershift_core::Complex64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Evolve,
    Supershift,
    Verify,
    GreensAudit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Evolve => "evolve",
            Self::Supershift => "supershift",
            Self::Verify => "verify",
            Self::GreensAudit => "greens-audit",
        }
    }
}

/// λ(t) for the electric and harmonic potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum LambdaSpec {
    Constant(f64),
    /// a + b·sin(ωt)
    Sinusoid { a: f64, b: f64, omega: f64 },
    /// Knots interpolated by a natural cubic spline.
    Table { t: Vec<f64>, value: Vec<f64> },
}

impl LambdaSpec {
    fn profile(&self) -> Result<TimeProfile, CliError> {
        Ok(match self {
            Self::Constant(c) => TimeProfile::Constant(*c),
            Self::Sinusoid { a, b, omega } => TimeProfile::Sinusoid {
                a: *a,
                b: *b,
                omega: *omega,
            },
            Self::Table { t, value } => TimeProfile::table(t.clone(), value.clone())
                .map_err(|e| CliError::Config(format!("potential.lambda.table: {e}")))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    Electric { lambda: LambdaSpec },
    Harmonic { lambda: LambdaSpec },
    PoschlTeller { l: u32 },
}

impl PotentialSpec {
    pub fn potential(&self) -> Result<Potential, CliError> {
        Ok(match self {
            Self::Free => Potential::Free,
            Self::Electric { lambda } => Potential::Electric(lambda.profile()?),
            Self::Harmonic { lambda } => Potential::Harmonic(lambda.profile()?),
            Self::PoschlTeller { l } => {
                if *l == 0 {
                    return Err(CliError::Config("potential.l must be at least 1".into()));
                }
                Potential::PoschlTeller(*l)
            }
        })
    }

    /// Parses `free`, `electric:c=1`, `electric:a=0,b=1,omega=2`,
    /// `harmonic:omega=1` (λ = ω²), `harmonic:c=1` and `poschl-teller:l=2`.
    pub fn parse_inline(s: &str) -> Result<Self, CliError> {
        let (kind, params) = split_spec(s, "--potential")?;
        let lambda = |params: &Params| -> Result<LambdaSpec, CliError> {
            if let Some(w) = params.get("omega").filter(|_| !params.has("a")) {
                return Ok(LambdaSpec::Constant(w * w));
            }
            if params.has("a") || params.has("b") {
                return Ok(LambdaSpec::Sinusoid {
                    a: params.get("a").unwrap_or(0.0),
                    b: params.get("b").unwrap_or(0.0),
                    omega: params.require("omega")?,
                });
            }
            Ok(LambdaSpec::Constant(params.require("c")?))
        };
        let spec = match kind {
            "free" => Self::Free,
            "electric" => Self::Electric { lambda: lambda(&params)? },
            "harmonic" => Self::Harmonic { lambda: lambda(&params)? },
            "poschl-teller" | "pt" => Self::PoschlTeller {
                l: params.require_u32("l")?,
            },
            other => return Err(CliError::Config(format!("--potential: unknown kind `{other}`"))),
        };
        params.finish(&spec_keys(kind))?;
        Ok(spec)
    }
}

fn spec_keys(kind: &str) -> Vec<&'static str> {
    match kind {
        "electric" | "harmonic" => vec!["c", "a", "b", "omega"],
        "poschl-teller" | "pt" => vec!["l"],
        "plane" | "cos" => vec!["k"],
        "const" => vec!["re", "im"],
        "superosc" => vec!["n", "k"],
        _ => vec![],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// e^{ikz}
    Plane { k: f64 },
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// cos(kz)
    Cos { k: f64 },
    /// The superoscillating F_n(z; k).
    Superosc { n: u32, k: f64 },
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::Plane { k: 1.0 }
    }
}

impl InitialSpec {
    pub fn signal(&self) -> Result<HolomorphicSignal, CliError> {
        let c = |re| Complex64::new(re, 0.0);
        Ok(match *self {
            Self::Plane { k } => HolomorphicSignal::plane_wave(c(k)),
            Self::Constant { re, im } => HolomorphicSignal::constant(Complex64::new(re, im)),
            Self::Cos { k } => HolomorphicSignal::linear_combination(
                c(0.5),
                &HolomorphicSignal::plane_wave(c(k)),
                c(0.5),
                &HolomorphicSignal::plane_wave(c(-k)),
            ),
            Self::Superosc { n, k } => SupershiftFamily::plane_waves().combination(n, c(k))?,
        })
    }

    /// Parses `plane:k=3`, `const:re=1,im=0`, `cos:k=1` and `superosc:n=20,k=3`.
    pub fn parse_inline(s: &str) -> Result<Self, CliError> {
        let (kind, params) = split_spec(s, "--initial")?;
        let spec = match kind {
            "plane" => Self::Plane { k: params.require("k")? },
            "const" => Self::Constant {
                re: params.require("re")?,
                im: params.get("im").unwrap_or(0.0),
            },
            "cos" => Self::Cos { k: params.require("k")? },
            "superosc" => Self::Superosc {
                n: params.require_u32("n")?,
                k: params.require("k")?,
            },
            other => return Err(CliError::Config(format!("--initial: unknown kind `{other}`"))),
        };
        params.finish(&spec_keys(kind))?;
        Ok(spec)
    }
}

struct Params {
    flag: &'static str,
    pairs: Vec<(String, String)>,
}

impl Params {
    fn has(&self, key: &str) -> bool {
        self.pairs.iter().any(|(k, _)| k == key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn get(&self, key: &str) -> Option<f64> {
        self.raw(key).and_then(|v| v.parse().ok())
    }

    fn require(&self, key: &str) -> Result<f64, CliError> {
        let raw = self
            .raw(key)
            .ok_or_else(|| CliError::Config(format!("{}: missing parameter `{key}`", self.flag)))?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("{}: `{key}={raw}` is not a number", self.flag)))
    }

    fn require_u32(&self, key: &str) -> Result<u32, CliError> {
        let raw = self
            .raw(key)
            .ok_or_else(|| CliError::Config(format!("{}: missing parameter `{key}`", self.flag)))?;
        raw.parse()
            .map_err(|_| CliError::Config(format!("{}: `{key}={raw}` is not a nonnegative integer", self.flag)))
    }

    fn finish(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (k, v) in &self.pairs {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Config(format!("{}: unknown parameter `{k}`", self.flag)));
            }
            if v.parse::<f64>().is_err() {
                return Err(CliError::Config(format!("{}: `{k}={v}` is not a number", self.flag)));
            }
        }
        Ok(())
    }
}

fn split_spec<'a>(s: &'a str, flag: &'static str) -> Result<(&'a str, Params), CliError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut pairs = Vec::new();
    for item in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{flag}: expected key=value, got `{item}`")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok((kind.trim(), Params { flag, pairs }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.count)
    }

    /// Parses `start:stop:count`.
    pub fn parse_inline(s: &str, flag: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("{flag}: expected start:stop:count, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Self {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            stop: parts[1].trim().parse().map_err(|_| bad())?,
            count: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }

    fn validate(&self, field: &str) -> Result<(), CliError> {
        if self.count == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Config(format!("{field}: need finite bounds and count >= 1")));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(CliError::Config(format!("{field}: stop must exceed start")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t: Range,
    pub x: Range,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            t: Range {
                start: 0.1,
                stop: 0.5,
                count: 5,
            },
            x: Range {
                start: -2.0,
                stop: 2.0,
                count: 21,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub tol: f64,
    /// Upper bound on the contour rotation angle; the kernel default is π/4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let d = EvolveOptions::default();
        Self {
            tol: d.tol,
            angle: None,
            max_panels: d.max_panels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupershiftSection {
    /// Target frequency κ; the combinations use plane waves with |κ_l| ≤ 1.
    pub kappa: f64,
    #[serde(default = "default_ns")]
    pub ns: Vec<u32>,
    /// Weight C of the initial-data metric; default 2(1 + |κ|).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_c: Option<f64>,
    /// The metric is sampled on the disk of this radius.
    #[serde(default = "default_metric_radius")]
    pub metric_radius: f64,
}

fn default_ns() -> Vec<u32> {
    vec![10, 20, 40]
}

fn default_metric_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    /// Relative Schrödinger residual allowed on the finite-difference patch.
    pub residual_threshold: f64,
    /// Spacing of the 5 × 5 residual patch.
    pub residual_step: f64,
    /// Bound on max_x |Ψ(t,x) − F(x)| at the smallest limit time.
    pub limit_threshold: f64,
    pub limit_times: Vec<f64>,
    /// Bound on the distance to a closed-form solution, where one exists.
    pub closed_form_tol: f64,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            residual_threshold: 1e-4,
            residual_step: 5e-4,
            limit_threshold: 1e-2,
            limit_times: vec![1e-2, 1e-3, 1e-4],
            closed_form_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// File stem; defaults to the experiment name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            prefix: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supershift: Option<SupershiftSection>,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Inline flags; each one present replaces the corresponding config field.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub potential: Option<String>,
    pub initial: Option<String>,
    pub t: Option<String>,
    pub x: Option<String>,
    pub tol: Option<f64>,
    pub angle: Option<f64>,
    pub max_panels: Option<usize>,
    pub out: Option<PathBuf>,
    pub prefix: Option<String>,
    pub kappa: Option<f64>,
    pub ns: Option<Vec<u32>>,
    pub metric_c: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// The config file (if any) with the inline flags applied on top.
    pub fn resolve(kind: ExperimentKind, o: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &o.config {
            Some(path) => Self::load(path)?,
            None => {
                let p = o
                    .potential
                    .as_deref()
                    .ok_or_else(|| CliError::Config("missing field `potential` (give --potential or --config)".into()))?;
                Self {
                    experiment: None,
                    potential: PotentialSpec::parse_inline(p)?,
                    initial: InitialSpec::default(),
                    grid: GridSpec::default(),
                    quadrature: QuadratureSpec::default(),
                    supershift: None,
                    verify: VerifySpec::default(),
                    output: OutputSpec::default(),
                }
            }
        };
        if let Some(k) = cfg.experiment {
            if k != kind {
                return Err(CliError::Config(format!(
                    "experiment: config is for `{}` but the subcommand is `{}`",
                    k.name(),
                    kind.name()
                )));
            }
        }
        cfg.experiment = Some(kind);
        if let Some(p) = &o.potential {
            cfg.potential = PotentialSpec::parse_inline(p)?;
        }
        if let Some(s) = &o.initial {
            cfg.initial = InitialSpec::parse_inline(s)?;
        }
        if let Some(s) = &o.t {
            cfg.grid.t = Range::parse_inline(s, "--t")?;
        }
        if let Some(s) = &o.x {
            cfg.grid.x = Range::parse_inline(s, "--x")?;
        }
        if let Some(v) = o.tol {
            cfg.quadrature.tol = v;
        }
        if o.angle.is_some() {
            cfg.quadrature.angle = o.angle;
        }
        if let Some(v) = o.max_panels {
            cfg.quadrature.max_panels = v;
        }
        if let Some(d) = &o.out {
            cfg.output.dir = d.clone();
        }
        if o.prefix.is_some() {
            cfg.output.prefix = o.prefix.clone();
        }
        if o.kappa.is_some() || o.ns.is_some() || o.metric_c.is_some() {
            let base = cfg.supershift.take();
            let kappa = o
                .kappa
                .or(base.as_ref().map(|s| s.kappa))
                .ok_or_else(|| CliError::Config("missing field `supershift.kappa` (give --k)".into()))?;
            cfg.supershift = Some(SupershiftSection {
                kappa,
                ns: o.ns.clone().or(base.as_ref().map(|s| s.ns.clone())).unwrap_or_else(default_ns),
                metric_c: o.metric_c.or(base.as_ref().and_then(|s| s.metric_c)),
                metric_radius: base.map_or_else(default_metric_radius, |s| s.metric_radius),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid.t.validate("grid.t")?;
        self.grid.x.validate("grid.x")?;
        if self.grid.t.start <= 0.0 {
            return Err(CliError::Config("grid.t: times must be positive".into()));
        }
        if !(self.quadrature.tol > 0.0) {
            return Err(CliError::Config(format!("quadrature.tol must be positive, got {}", self.quadrature.tol)));
        }
        if self.quadrature.max_panels == 0 {
            return Err(CliError::Config("quadrature.max_panels must be positive".into()));
        }
        if let Some(a) = self.quadrature.angle {
            if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
                return Err(CliError::Config(format!("quadrature.angle must lie in (0, π/2), got {a}")));
            }
        }
        if self.experiment == Some(ExperimentKind::Supershift) {
            let s = self
                .supershift
                .as_ref()
                .ok_or_else(|| CliError::Config("missing section `supershift` (give --k)".into()))?;
            if s.ns.is_empty() {
                return Err(CliError::Config("supershift.ns must not be empty".into()));
            }
        }
        Ok(())
    }

    pub fn prefix(&self) -> String {
        self.output
            .prefix
            .clone()
            .unwrap_or_else(|| self.experiment.map_or("run", |k| k.name()).to_string())
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            tol: self.quadrature.tol,
            max_panels: self.quadrature.max_panels,
            angle: self.quadrature.angle,
        }
    }

    /// Latest time any pipeline of this config evaluates.
    fn latest_time(&self) -> f64 {
        self.grid.t.start.max(self.grid.t.stop)
    }

    /// The kernel without reference to the grid.
    pub fn bare_kernel(&self) -> Result<GreensKernel, CliError> {
        let opts = KernelOptions {
            t_max: KernelOptions::default().t_max.max(1.01 * self.latest_time()),
            ..Default::default()
        };
        Ok(make_kernel(self.potential.potential()?, &opts)?)
    }

    /// The kernel, checked against the grid's time range.
    pub fn kernel(&self) -> Result<GreensKernel, CliError> {
        let kernel = self.bare_kernel()?;
        let t_last = self.latest_time();
        if t_last >= kernel.horizon {
            return Err(CliError::Config(format!(
                "grid.t: t = {t_last} is beyond the horizon T = {:.12} of {}",
                kernel.horizon,
                kernel.potential.label()
            )));
        }
        Ok(kernel)
    }
}
