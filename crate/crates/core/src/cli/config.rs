//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! Keys may also be written fully qualified (`illposed.M = 20`) anywhere in the
//! file. Environment variables `ILAB_<SECTION>_<KEY>` override the file; command
//! line flags override both.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::illposed::{select_parameters, EvolutionMode, IllposedParams, KineticIntegrator, ParamRequest};
use crate::penrose::DispersionKernel;
use crate::profiles::{EquilibriumKind, EquilibriumParams, RadialEquilibrium, ShearProfile};
use crate::semigroup::Integrator;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Hydro,
    Kie,
    Vdb,
}

impl ModelChoice {
    pub fn kernel(self) -> Option<DispersionKernel> {
        match self {
            ModelChoice::Hydro => None,
            ModelChoice::Kie => Some(DispersionKernel::Kie),
            ModelChoice::Vdb => Some(DispersionKernel::Vdb),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelChoice::Hydro => "hydro",
            ModelChoice::Kie => "kie",
            ModelChoice::Vdb => "vdb",
        }
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hydro" => Ok(Self::Hydro),
            "kie" => Ok(Self::Kie),
            "vdb" => Ok(Self::Vdb),
            o => Err(Error::InvalidParameter(format!("unknown model '{o}' (expected hydro, kie or vdb)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSection {
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
    pub model: ModelChoice,
}

#[derive(Debug, Clone)]
pub struct ProfileSection {
    /// `tanh`, `couette` or `table`.
    pub kind: String,
    pub d1: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EquilibriumSection {
    /// `shell` or `maxwellian`.
    pub kind: String,
    pub a: f64,
    pub width: f64,
    pub dim: usize,
    pub v_max: f64,
    pub m: u32,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct RayleighSection {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub im_floor: f64,
    pub samples: usize,
    pub max_depth: u32,
    pub nz: usize,
    pub n: i64,
}

#[derive(Debug, Clone)]
pub struct PenroseSection {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub re_floor: f64,
    pub gl_points: usize,
    pub samples: usize,
    pub max_depth: u32,
    pub nv: usize,
    pub n: i64,
}

#[derive(Debug, Clone)]
pub struct SemigroupSection {
    pub nz: usize,
    pub nv: usize,
    pub dt: f64,
    pub s_end: f64,
    pub integrator: Integrator,
    /// Modes evolved by `semigroup evolve`.
    pub n_list: Vec<i64>,
    /// Modes checked by `semigroup verify`.
    pub verify_n_list: Vec<i64>,
    pub delta: f64,
    pub delta_prime: f64,
    /// γ = gamma_factor · γ₀ in `semigroup verify`.
    pub gamma_factor: f64,
    pub kmax: usize,
    pub s_samples: usize,
    pub trials: usize,
    pub coupling: bool,
}

#[derive(Debug, Clone)]
pub struct IllposedSection {
    pub s: f64,
    pub alpha: f64,
    pub k: f64,
    pub d: f64,
    pub m: u32,
    pub big_m: u32,
    pub beta: f64,
    pub k0: f64,
    pub gamma: f64,
    pub delta0_prime: f64,
    pub amplitude: f64,
    pub eps: Vec<f64>,
    pub n0: usize,
    pub ny: usize,
    pub nz: usize,
    pub nv: usize,
    /// 0 selects the model default.
    pub dt: f64,
    pub samples: usize,
    pub integrator: KineticIntegrator,
    pub mode: EvolutionMode,
}

#[derive(Debug, Clone)]
pub struct OutputSection {
    pub dir: String,
}

/// Full experiment configuration; every field has a default.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub profile: ProfileSection,
    pub equilibrium: EquilibriumSection,
    pub rayleigh: RayleighSection,
    pub penrose: PenroseSection,
    pub semigroup: SemigroupSection,
    pub illposed: IllposedSection,
    pub output: OutputSection,
    /// Line of the last assignment of each key (file input only).
    lines: BTreeMap<String, usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            run: RunSection { seed: 42, threads: 0, model: ModelChoice::Hydro },
            profile: ProfileSection { kind: "tanh".into(), d1: 0.3, coefficients: vec![] },
            equilibrium: EquilibriumSection { kind: "shell".into(), a: 0.8, width: 0.2, dim: 1, v_max: 8.0, m: 4, nodes: 4096 },
            rayleigh: RayleighSection {
                re_min: -1.0,
                re_max: 1.0,
                im_min: 0.01,
                im_max: 1.0,
                im_floor: 1e-3,
                samples: 400,
                max_depth: 10,
                nz: 128,
                n: 1,
            },
            penrose: PenroseSection {
                re_min: 0.01,
                re_max: 4.0,
                im_min: -6.0,
                im_max: 6.0,
                re_floor: 1e-3,
                gl_points: 64,
                samples: 400,
                max_depth: 10,
                nv: 512,
                n: 1,
            },
            semigroup: SemigroupSection {
                nz: 96,
                nv: 512,
                dt: 0.01,
                s_end: 3.0,
                integrator: Integrator::Rk4,
                n_list: vec![1, 2, 4],
                verify_n_list: vec![1, 2, 4, 8],
                delta: 0.8,
                delta_prime: 0.02,
                gamma_factor: 1.1,
                kmax: 6,
                s_samples: 40,
                trials: 4,
                coupling: true,
            },
            illposed: IllposedSection {
                s: 2.0,
                alpha: 1.0,
                k: 1.0,
                d: 1.0,
                m: 4,
                big_m: 20,
                beta: 0.02,
                k0: 1.0,
                gamma: 0.5,
                delta0_prime: 0.1,
                amplitude: 1e-3,
                eps: vec![0.25, 0.125, 0.0625, 0.03125],
                n0: 1,
                ny: 16,
                nz: 256,
                nv: 2048,
                dt: 0.0,
                samples: 1000,
                integrator: KineticIntegrator::Rk4,
                mode: EvolutionMode::Linear,
            },
            output: OutputSection { dir: "ilab-out".into() },
            lines: BTreeMap::new(),
        }
    }
}

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "run.seed",
    "run.threads",
    "run.model",
    "profile.kind",
    "profile.d1",
    "profile.coefficients",
    "equilibrium.kind",
    "equilibrium.a",
    "equilibrium.width",
    "equilibrium.dim",
    "equilibrium.v_max",
    "equilibrium.m",
    "equilibrium.nodes",
    "rayleigh.re_min",
    "rayleigh.re_max",
    "rayleigh.im_min",
    "rayleigh.im_max",
    "rayleigh.im_floor",
    "rayleigh.samples",
    "rayleigh.max_depth",
    "rayleigh.nz",
    "rayleigh.n",
    "penrose.re_min",
    "penrose.re_max",
    "penrose.im_min",
    "penrose.im_max",
    "penrose.re_floor",
    "penrose.gl_points",
    "penrose.samples",
    "penrose.max_depth",
    "penrose.nv",
    "penrose.n",
    "semigroup.nz",
    "semigroup.nv",
    "semigroup.dt",
    "semigroup.s_end",
    "semigroup.integrator",
    "semigroup.n_list",
    "semigroup.verify_n_list",
    "semigroup.delta",
    "semigroup.delta_prime",
    "semigroup.gamma_factor",
    "semigroup.kmax",
    "semigroup.s_samples",
    "semigroup.trials",
    "semigroup.coupling",
    "illposed.s",
    "illposed.alpha",
    "illposed.k",
    "illposed.d",
    "illposed.m",
    "illposed.M",
    "illposed.beta",
    "illposed.k0",
    "illposed.gamma",
    "illposed.delta0_prime",
    "illposed.amplitude",
    "illposed.eps",
    "illposed.n0",
    "illposed.ny",
    "illposed.nz",
    "illposed.nv",
    "illposed.dt",
    "illposed.samples",
    "illposed.integrator",
    "illposed.mode",
    "output.dir",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("{key}: cannot parse '{v}' as {}", std::any::type_name::<T>()))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String> {
    let v = v.trim().trim_start_matches('[').trim_end_matches(']');
    if v.trim().is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|x| parse_frac::<T>(key, x)).collect()
}

/// Numbers, or `p/q` fractions for floating lists such as `eps = 1/4, 1/8`.
fn parse_frac<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    let t = v.trim();
    if let Some((a, b)) = t.split_once('/') {
        let a: f64 = parse_num(key, a)?;
        let b: f64 = parse_num(key, b)?;
        return parse_num(key, &format!("{:e}", a / b));
    }
    parse_num(key, t)
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("{key}: expected a boolean, got '{v}'")),
    }
}

fn parse_enum<T: std::str::FromStr<Err = Error>>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|e| format!("{key}: {e}"))
}

fn parse_integrator(key: &str, v: &str) -> std::result::Result<Integrator, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "rk4" => Ok(Integrator::Rk4),
        "exact_expm" | "expm" => Ok(Integrator::ExactExpm),
        o => Err(format!("{key}: unknown integrator '{o}' (expected rk4 or exact_expm)")),
    }
}

fn unquote(v: &str) -> &str {
    let t = v.trim();
    if t.len() >= 2 && ((t.starts_with('"') && t.ends_with('"')) || (t.starts_with('\'') && t.ends_with('\''))) {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn integrator_name(i: Integrator) -> &'static str {
    match i {
        Integrator::Rk4 => "rk4",
        Integrator::ExactExpm => "exact_expm",
    }
}

impl ExperimentConfig {
    /// Assigns one fully qualified key.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = unquote(value);
        macro_rules! num {
            ($f:expr) => {
                $f = parse_num(key, v)?
            };
        }
        match key {
            "run.seed" => num!(self.run.seed),
            "run.threads" => num!(self.run.threads),
            "run.model" => self.run.model = parse_enum(key, v)?,
            "profile.kind" => self.profile.kind = v.to_ascii_lowercase(),
            "profile.d1" => num!(self.profile.d1),
            "profile.coefficients" => self.profile.coefficients = parse_list(key, v)?,
            "equilibrium.kind" => self.equilibrium.kind = v.to_ascii_lowercase(),
            "equilibrium.a" => num!(self.equilibrium.a),
            "equilibrium.width" => num!(self.equilibrium.width),
            "equilibrium.dim" => num!(self.equilibrium.dim),
            "equilibrium.v_max" => num!(self.equilibrium.v_max),
            "equilibrium.m" => num!(self.equilibrium.m),
            "equilibrium.nodes" => num!(self.equilibrium.nodes),
            "rayleigh.re_min" => num!(self.rayleigh.re_min),
            "rayleigh.re_max" => num!(self.rayleigh.re_max),
            "rayleigh.im_min" => num!(self.rayleigh.im_min),
            "rayleigh.im_max" => num!(self.rayleigh.im_max),
            "rayleigh.im_floor" => num!(self.rayleigh.im_floor),
            "rayleigh.samples" => num!(self.rayleigh.samples),
            "rayleigh.max_depth" => num!(self.rayleigh.max_depth),
            "rayleigh.nz" => num!(self.rayleigh.nz),
            "rayleigh.n" => num!(self.rayleigh.n),
            "penrose.re_min" => num!(self.penrose.re_min),
            "penrose.re_max" => num!(self.penrose.re_max),
            "penrose.im_min" => num!(self.penrose.im_min),
            "penrose.im_max" => num!(self.penrose.im_max),
            "penrose.re_floor" => num!(self.penrose.re_floor),
            "penrose.gl_points" => num!(self.penrose.gl_points),
            "penrose.samples" => num!(self.penrose.samples),
            "penrose.max_depth" => num!(self.penrose.max_depth),
            "penrose.nv" => num!(self.penrose.nv),
            "penrose.n" => num!(self.penrose.n),
            "semigroup.nz" => num!(self.semigroup.nz),
            "semigroup.nv" => num!(self.semigroup.nv),
            "semigroup.dt" => num!(self.semigroup.dt),
            "semigroup.s_end" => num!(self.semigroup.s_end),
            "semigroup.integrator" => self.semigroup.integrator = parse_integrator(key, v)?,
            "semigroup.n_list" => self.semigroup.n_list = parse_list(key, v)?,
            "semigroup.verify_n_list" => self.semigroup.verify_n_list = parse_list(key, v)?,
            "semigroup.delta" => num!(self.semigroup.delta),
            "semigroup.delta_prime" => num!(self.semigroup.delta_prime),
            "semigroup.gamma_factor" => num!(self.semigroup.gamma_factor),
            "semigroup.kmax" => num!(self.semigroup.kmax),
            "semigroup.s_samples" => num!(self.semigroup.s_samples),
            "semigroup.trials" => num!(self.semigroup.trials),
            "semigroup.coupling" => self.semigroup.coupling = parse_bool(key, v)?,
            "illposed.s" => num!(self.illposed.s),
            "illposed.alpha" => num!(self.illposed.alpha),
            "illposed.k" => num!(self.illposed.k),
            "illposed.d" => num!(self.illposed.d),
            "illposed.m" => num!(self.illposed.m),
            "illposed.M" | "illposed.big_m" => num!(self.illposed.big_m),
            "illposed.beta" => num!(self.illposed.beta),
            "illposed.k0" => num!(self.illposed.k0),
            "illposed.gamma" => num!(self.illposed.gamma),
            "illposed.delta0_prime" => num!(self.illposed.delta0_prime),
            "illposed.amplitude" => num!(self.illposed.amplitude),
            "illposed.eps" => self.illposed.eps = parse_list(key, v)?,
            "illposed.n0" => num!(self.illposed.n0),
            "illposed.ny" => num!(self.illposed.ny),
            "illposed.nz" => num!(self.illposed.nz),
            "illposed.nv" => num!(self.illposed.nv),
            "illposed.dt" => num!(self.illposed.dt),
            "illposed.samples" => num!(self.illposed.samples),
            "illposed.integrator" => self.illposed.integrator = parse_enum(key, v)?,
            "illposed.mode" => self.illposed.mode = parse_enum(key, v)?,
            "output.dir" => self.output.dir = v.to_string(),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Parses configuration text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<String> = None;
        let mut unknown = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Config { line: line_no, msg: format!("malformed section header '{line}'") });
                }
                let name = line[1..line.len() - 1].trim();
                if !["run", "profile", "equilibrium", "rayleigh", "penrose", "semigroup", "illposed", "output"]
                    .contains(&name)
                {
                    return Err(Error::Config { line: line_no, msg: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config { line: line_no, msg: format!("expected 'key = value', got '{line}'") });
            };
            let k = k.trim();
            let key = if k.contains('.') {
                k.to_string()
            } else if let Some(s) = &section {
                format!("{s}.{k}")
            } else {
                return Err(Error::Config { line: line_no, msg: format!("key '{k}' outside any section") });
            };
            match cfg.set(&key, v) {
                Ok(()) => {
                    cfg.lines.insert(canonical(&key), line_no);
                }
                Err(msg) if msg.starts_with("unknown key") => unknown.push((line_no, key)),
                Err(msg) => return Err(Error::Config { line: line_no, msg }),
            }
        }
        if let Some((line, _)) = unknown.first() {
            let list = unknown.iter().map(|(l, k)| format!("{k} (line {l})")).collect::<Vec<_>>().join(", ");
            return Err(Error::Config { line: *line, msg: format!("unknown keys: {list}") });
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Applies `ILAB_<SECTION>_<KEY>` variables from `vars`.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let mut sorted: Vec<(String, String)> = vars.into_iter().filter(|(k, _)| k.starts_with("ILAB_")).collect();
        sorted.sort();
        for (name, value) in sorted {
            let rest = &name["ILAB_".len()..];
            let Some((sec, key)) = rest.split_once('_') else {
                return Err(Error::Config { line: 0, msg: format!("environment variable {name} names no key") });
            };
            let sec = sec.to_ascii_lowercase();
            let key = key.to_ascii_lowercase();
            let full = format!("{sec}.{key}");
            self.set(&full, &value).map_err(|msg| Error::Config { line: 0, msg: format!("{name}: {msg}") })?;
        }
        Ok(())
    }

    fn line_of(&self, keys: &[&str]) -> usize {
        keys.iter().filter_map(|k| self.lines.get(*k)).copied().max().unwrap_or(0)
    }

    /// Semantic checks; errors carry the line of the most relevant key.
    pub fn validate(&self) -> Result<()> {
        let err = |keys: &[&str], msg: String| Error::Config { line: self.line_of(keys), msg };
        self.shear_profile().map_err(|e| err(&["profile.kind", "profile.d1", "profile.coefficients"], e.to_string()))?;
        if !["shell", "maxwellian"].contains(&self.equilibrium.kind.as_str()) {
            return Err(err(&["equilibrium.kind"], format!("unknown equilibrium kind '{}'", self.equilibrium.kind)));
        }
        for (key, list) in [("semigroup.n_list", &self.semigroup.n_list), ("semigroup.verify_n_list", &self.semigroup.verify_n_list)] {
            if list.is_empty() || list.contains(&0) {
                return Err(err(&[key], format!("{key} must be nonempty and exclude 0")));
            }
        }
        if !(self.semigroup.dt > 0.0 && self.semigroup.s_end > 0.0) {
            return Err(err(&["semigroup.dt", "semigroup.s_end"], "semigroup.dt and s_end must be positive".into()));
        }
        if self.rayleigh.n == 0 || self.penrose.n == 0 {
            return Err(err(&["rayleigh.n", "penrose.n"], "mode index must be nonzero".into()));
        }
        if self.illposed.n0 == 0 {
            return Err(err(&["illposed.n0"], "illposed.n0 must be positive".into()));
        }
        self.illposed_request(C64::new(1.0, 0.0)).and_then(|r| select_parameters(&r)).map_err(|e| {
            err(
                &["illposed.M", "illposed.beta", "illposed.s", "illposed.alpha", "illposed.k", "illposed.d", "illposed.eps"],
                e.to_string(),
            )
        })?;
        Ok(())
    }

    pub fn shear_profile(&self) -> Result<ShearProfile> {
        match self.profile.kind.as_str() {
            "tanh" | "tanh_channel" => ShearProfile::tanh_channel(self.profile.d1),
            "couette" => Ok(ShearProfile::couette()),
            "table" | "chebyshev_table" => ShearProfile::chebyshev_table(self.profile.coefficients.clone()),
            o => Err(Error::InvalidParameter(format!("unknown profile kind '{o}'"))),
        }
    }

    pub fn equilibrium(&self) -> Result<RadialEquilibrium> {
        let e = &self.equilibrium;
        let p = EquilibriumParams { dim: e.dim, v_max: e.v_max, m: e.m, nodes: e.nodes };
        let kind = match e.kind.as_str() {
            "maxwellian" => EquilibriumKind::Maxwellian,
            "shell" => EquilibriumKind::Shell { a: e.a, width: e.width },
            o => return Err(Error::InvalidParameter(format!("unknown equilibrium kind '{o}'"))),
        };
        RadialEquilibrium::new(kind, p)
    }

    pub fn illposed_request(&self, lambda0: C64) -> Result<ParamRequest> {
        let p = &self.illposed;
        Ok(ParamRequest {
            s: p.s,
            alpha: p.alpha,
            k: p.k,
            d: p.d,
            m: p.m,
            big_m: p.big_m,
            beta: p.beta,
            lambda0,
            k0: p.k0,
            gamma: p.gamma,
            delta0_prime: p.delta0_prime,
            amplitude: p.amplitude,
            eps_list: p.eps.clone(),
        })
    }

    pub fn illposed_params(&self, lambda0: C64) -> Result<IllposedParams> {
        select_parameters(&self.illposed_request(lambda0)?)
    }

    /// Reads a key back in canonical text form.
    pub fn get(&self, key: &str) -> String {
        let f = |x: f64| format!("{x:e}");
        match key {
            "run.seed" => self.run.seed.to_string(),
            "run.threads" => self.run.threads.to_string(),
            "run.model" => self.run.model.as_str().into(),
            "profile.kind" => self.profile.kind.clone(),
            "profile.d1" => f(self.profile.d1),
            "profile.coefficients" => {
                fmt_list(&self.profile.coefficients.iter().map(|x| f(*x)).collect::<Vec<_>>())
            }
            "equilibrium.kind" => self.equilibrium.kind.clone(),
            "equilibrium.a" => f(self.equilibrium.a),
            "equilibrium.width" => f(self.equilibrium.width),
            "equilibrium.dim" => self.equilibrium.dim.to_string(),
            "equilibrium.v_max" => f(self.equilibrium.v_max),
            "equilibrium.m" => self.equilibrium.m.to_string(),
            "equilibrium.nodes" => self.equilibrium.nodes.to_string(),
            "rayleigh.re_min" => f(self.rayleigh.re_min),
            "rayleigh.re_max" => f(self.rayleigh.re_max),
            "rayleigh.im_min" => f(self.rayleigh.im_min),
            "rayleigh.im_max" => f(self.rayleigh.im_max),
            "rayleigh.im_floor" => f(self.rayleigh.im_floor),
            "rayleigh.samples" => self.rayleigh.samples.to_string(),
            "rayleigh.max_depth" => self.rayleigh.max_depth.to_string(),
            "rayleigh.nz" => self.rayleigh.nz.to_string(),
            "rayleigh.n" => self.rayleigh.n.to_string(),
            "penrose.re_min" => f(self.penrose.re_min),
            "penrose.re_max" => f(self.penrose.re_max),
            "penrose.im_min" => f(self.penrose.im_min),
            "penrose.im_max" => f(self.penrose.im_max),
            "penrose.re_floor" => f(self.penrose.re_floor),
            "penrose.gl_points" => self.penrose.gl_points.to_string(),
            "penrose.samples" => self.penrose.samples.to_string(),
            "penrose.max_depth" => self.penrose.max_depth.to_string(),
            "penrose.nv" => self.penrose.nv.to_string(),
            "penrose.n" => self.penrose.n.to_string(),
            "semigroup.nz" => self.semigroup.nz.to_string(),
            "semigroup.nv" => self.semigroup.nv.to_string(),
            "semigroup.dt" => f(self.semigroup.dt),
            "semigroup.s_end" => f(self.semigroup.s_end),
            "semigroup.integrator" => integrator_name(self.semigroup.integrator).into(),
            "semigroup.n_list" => fmt_list(&self.semigroup.n_list),
            "semigroup.verify_n_list" => fmt_list(&self.semigroup.verify_n_list),
            "semigroup.delta" => f(self.semigroup.delta),
            "semigroup.delta_prime" => f(self.semigroup.delta_prime),
            "semigroup.gamma_factor" => f(self.semigroup.gamma_factor),
            "semigroup.kmax" => self.semigroup.kmax.to_string(),
            "semigroup.s_samples" => self.semigroup.s_samples.to_string(),
            "semigroup.trials" => self.semigroup.trials.to_string(),
            "semigroup.coupling" => self.semigroup.coupling.to_string(),
            "illposed.s" => f(self.illposed.s),
            "illposed.alpha" => f(self.illposed.alpha),
            "illposed.k" => f(self.illposed.k),
            "illposed.d" => f(self.illposed.d),
            "illposed.m" => self.illposed.m.to_string(),
            "illposed.M" => self.illposed.big_m.to_string(),
            "illposed.beta" => f(self.illposed.beta),
            "illposed.k0" => f(self.illposed.k0),
            "illposed.gamma" => f(self.illposed.gamma),
            "illposed.delta0_prime" => f(self.illposed.delta0_prime),
            "illposed.amplitude" => f(self.illposed.amplitude),
            "illposed.eps" => fmt_list(&self.illposed.eps.iter().map(|x| f(*x)).collect::<Vec<_>>()),
            "illposed.n0" => self.illposed.n0.to_string(),
            "illposed.ny" => self.illposed.ny.to_string(),
            "illposed.nz" => self.illposed.nz.to_string(),
            "illposed.nv" => self.illposed.nv.to_string(),
            "illposed.dt" => f(self.illposed.dt),
            "illposed.samples" => self.illposed.samples.to_string(),
            "illposed.integrator" => {
                match self.illposed.integrator {
                    KineticIntegrator::Rk4 => "rk4",
                    KineticIntegrator::Strang => "strang",
                }
                .into()
            }
            "illposed.mode" => {
                match self.illposed.mode {
                    EvolutionMode::Linear => "linear",
                    EvolutionMode::Nonlinear => "nonlinear",
                }
                .into()
            }
            "output.dir" => self.output.dir.clone(),
            _ => String::new(),
        }
    }

    /// The effective configuration in the input format; parses back to the same values.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for key in KEYS {
            let (sec, k) = key.split_once('.').unwrap();
            if sec != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{sec}]");
                current = sec;
            }
            let _ = writeln!(out, "{k} = {}", self.get(key));
        }
        out
    }
}

fn canonical(key: &str) -> String {
    if key == "illposed.big_m" { "illposed.M".into() } else { key.to_string() }
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    &line[..cut]
}

/// Reads, overlays the environment and validates.
pub fn parse_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_env(std::env::vars())?;
    cfg.validate()?;
    Ok(cfg)
}
