//! INI run configuration.
//!
//! ```ini
//! [physical]
//! beta = 1.0
//! epsilon = 1.0
//! dim = 3
//! dispersion_exponent = 1.0
//! n0 = 0.0
//! source = gaussian
//! source_width = 1.0
//!
//! [numerics]
//! samples = 200000
//! seed = 1
//!
//! [experiment]
//! s_grid = 0.5, 1, 2
//!
//! [function.f]
//! profile = gaussian
//! width = 1.0
//!
//! [output]
//! dir = out
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::Ini;
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use spinboson::momentum::{Component, Dispersion, RadialProfile, SourceProfile, TestFunction};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub kind: String,
    pub width: f64,
    pub exponent_at_zero: f64,
    pub exponent_at_infinity: f64,
    pub cutoff: f64,
    pub scale: f64,
    pub amplitude: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            kind: "gaussian".into(),
            width: 1.0,
            exponent_at_zero: 0.0,
            exponent_at_infinity: -2.0,
            cutoff: 1.0,
            scale: 1.0,
            amplitude: 1.0,
        }
    }
}

impl ProfileSpec {
    fn build(&self, field: &str) -> Result<Option<RadialProfile>, CliError> {
        let p = match self.kind.as_str() {
            "zero" => return Ok(None),
            "gaussian" => RadialProfile::gaussian(self.width),
            "power_bump" => RadialProfile::power_bump(self.exponent_at_zero, self.cutoff),
            "point_source" => RadialProfile::point_source_flat(),
            "algebraic" => RadialProfile::algebraic(self.exponent_at_zero, self.exponent_at_infinity, self.scale),
            other => {
                return Err(CliError::Config(format!(
                    "{field}: unknown profile '{other}' (gaussian, power_bump, point_source, algebraic, zero)"
                )))
            }
        }
        .with_amplitude(self.amplitude);
        p.validate().map_err(|e| CliError::Config(format!("{field}: {e}")))?;
        Ok(Some(p))
    }

    fn render(&self, out: &mut String, prefix: &str) {
        let _ = writeln!(out, "{prefix}profile = {}", self.kind);
        for (k, v) in [
            ("width", self.width),
            ("exponent_at_zero", self.exponent_at_zero),
            ("exponent_at_infinity", self.exponent_at_infinity),
            ("cutoff", self.cutoff),
            ("scale", self.scale),
            ("amplitude", self.amplitude),
        ] {
            let _ = writeln!(out, "{prefix}{k} = {v:?}");
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub profile: ProfileSpec,
    pub coeff: Complex64,
    pub time_phase: f64,
    pub shift: Vec<f64>,
    /// Name of another declared function to add to this one.
    pub plus: Option<String>,
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec {
            profile: ProfileSpec::default(),
            coeff: Complex64::new(1.0, 0.0),
            time_phase: 0.0,
            shift: Vec::new(),
            plus: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Physical {
    pub beta: f64,
    pub epsilon: f64,
    pub dim: usize,
    pub dispersion_exponent: f64,
    pub n0: f64,
    pub source: ProfileSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsBlock {
    pub samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub kernel_nodes: usize,
    pub refine_tol: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub variance_cells: usize,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub csv: bool,
    pub cache: bool,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: Physical,
    pub numerics: NumericsBlock,
    pub experiment: BTreeMap<String, String>,
    pub functions: BTreeMap<String, FunctionSpec>,
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut functions = BTreeMap::new();
        functions.insert("f".to_string(), FunctionSpec::default());
        functions.insert("g".to_string(), FunctionSpec::default());
        RunConfig {
            physical: Physical {
                beta: 1.0,
                epsilon: 1.0,
                dim: 3,
                dispersion_exponent: 1.0,
                n0: 0.0,
                source: ProfileSpec::default(),
            },
            numerics: NumericsBlock {
                samples: 200_000,
                seed: 1,
                chunk_size: 4096,
                kernel_nodes: 2048,
                refine_tol: 1e-9,
                abs_tol: 1e-10,
                rel_tol: 1e-12,
                variance_cells: 64,
                workers: None,
            },
            experiment: BTreeMap::new(),
            functions,
            output: OutputBlock {
                dir: PathBuf::from("out"),
                csv: true,
                cache: true,
                cache_dir: None,
            },
        }
    }
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn parse_f64(field: &str, v: &str) -> Result<f64, CliError> {
    v.trim().parse::<f64>().map_err(|_| cfg_err(field, format!("expected a number, got '{v}'")))
}

fn parse_usize(field: &str, v: &str) -> Result<usize, CliError> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| cfg_err(field, format!("expected a non-negative integer, got '{v}'")))
}

fn parse_bool(field: &str, v: &str) -> Result<bool, CliError> {
    match v.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(cfg_err(field, format!("expected true/false, got '{v}'"))),
    }
}

pub fn parse_list(field: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(field, s))
        .collect()
}

fn parse_complex(field: &str, v: &str) -> Result<Complex64, CliError> {
    let parts = parse_list(field, v)?;
    match parts.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(cfg_err(field, "expected 're' or 're, im'")),
    }
}

fn profile_key(spec: &mut ProfileSpec, field: &str, key: &str, v: &str) -> Result<bool, CliError> {
    match key {
        "profile" => spec.kind = v.trim().to_string(),
        "width" => spec.width = parse_f64(field, v)?,
        "exponent_at_zero" => spec.exponent_at_zero = parse_f64(field, v)?,
        "exponent_at_infinity" => spec.exponent_at_infinity = parse_f64(field, v)?,
        "cutoff" => spec.cutoff = parse_f64(field, v)?,
        "scale" => spec.scale = parse_f64(field, v)?,
        "amplitude" => spec.amplitude = parse_f64(field, v)?,
        _ => return Ok(false),
    }
    Ok(true)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        let mut cfg = RunConfig::default();
        let mut declared = BTreeMap::new();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            for (key, v) in props.iter() {
                let field = format!("{section}.{key}");
                let field = field.as_str();
                match section {
                    "physical" => {
                        let p = &mut cfg.physical;
                        match key {
                            "beta" => p.beta = parse_f64(field, v)?,
                            "epsilon" => p.epsilon = parse_f64(field, v)?,
                            "dim" => p.dim = parse_usize(field, v)?,
                            "dispersion_exponent" => p.dispersion_exponent = parse_f64(field, v)?,
                            "n0" => p.n0 = parse_f64(field, v)?,
                            "source" => p.source.kind = v.trim().to_string(),
                            _ => {
                                let k = key.strip_prefix("source_").unwrap_or("");
                                if k == "profile" || !profile_key(&mut p.source, field, k, v)? {
                                    return Err(cfg_err(field, "unknown key"));
                                }
                            }
                        }
                    }
                    "numerics" => {
                        let n = &mut cfg.numerics;
                        match key {
                            "samples" => n.samples = parse_usize(field, v)?,
                            "seed" => {
                                n.seed = v.trim().parse().map_err(|_| cfg_err(field, "expected an unsigned integer"))?
                            }
                            "chunk_size" => n.chunk_size = parse_usize(field, v)?,
                            "kernel_nodes" => n.kernel_nodes = parse_usize(field, v)?,
                            "refine_tol" => n.refine_tol = parse_f64(field, v)?,
                            "abs_tol" => n.abs_tol = parse_f64(field, v)?,
                            "rel_tol" => n.rel_tol = parse_f64(field, v)?,
                            "variance_cells" => n.variance_cells = parse_usize(field, v)?,
                            "workers" => n.workers = Some(parse_usize(field, v)?),
                            _ => return Err(cfg_err(field, "unknown key")),
                        }
                    }
                    "experiment" => {
                        cfg.experiment.insert(key.to_string(), v.trim().to_string());
                    }
                    "output" => {
                        let o = &mut cfg.output;
                        match key {
                            "dir" => o.dir = PathBuf::from(v.trim()),
                            "csv" => o.csv = parse_bool(field, v)?,
                            "cache" => o.cache = parse_bool(field, v)?,
                            "cache_dir" => o.cache_dir = Some(PathBuf::from(v.trim())),
                            _ => return Err(cfg_err(field, "unknown key")),
                        }
                    }
                    s if s.starts_with("function.") => {
                        let name = &s["function.".len()..];
                        let spec: &mut FunctionSpec = declared.entry(name.to_string()).or_default();
                        match key {
                            "coeff" => spec.coeff = parse_complex(field, v)?,
                            "time_phase" => spec.time_phase = parse_f64(field, v)?,
                            "shift" => spec.shift = parse_list(field, v)?,
                            "plus" => spec.plus = Some(v.trim().to_string()),
                            _ => {
                                if !profile_key(&mut spec.profile, field, key, v)? {
                                    return Err(cfg_err(field, "unknown key"));
                                }
                            }
                        }
                    }
                    "" => return Err(cfg_err(key, "key outside any section")),
                    other => return Err(CliError::Config(format!("unknown section [{other}]"))),
                }
            }
        }
        for (name, spec) in declared {
            cfg.functions.insert(name, spec);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physical;
        if !(p.beta > 0.0 && p.beta.is_finite()) {
            return Err(cfg_err("physical.beta", format!("must be > 0, got {}", p.beta)));
        }
        if !(p.epsilon >= 0.0 && p.epsilon.is_finite()) {
            return Err(cfg_err("physical.epsilon", format!("must be >= 0, got {}", p.epsilon)));
        }
        if !(p.n0 >= 0.0 && p.n0.is_finite()) {
            return Err(cfg_err("physical.n0", format!("must be >= 0, got {}", p.n0)));
        }
        Dispersion::new(p.dim, p.dispersion_exponent).map_err(|e| cfg_err("physical.dim", e))?;
        let n = &self.numerics;
        if n.chunk_size == 0 {
            return Err(cfg_err("numerics.chunk_size", "must be positive"));
        }
        if n.kernel_nodes < 2 {
            return Err(cfg_err("numerics.kernel_nodes", "must be at least 2"));
        }
        if n.variance_cells == 0 {
            return Err(cfg_err("numerics.variance_cells", "must be positive"));
        }
        if n.workers == Some(0) {
            return Err(cfg_err("numerics.workers", "must be positive"));
        }
        for (name, spec) in &self.functions {
            if !spec.shift.is_empty() && (p.dim != 3 || spec.shift.len() != 3) {
                return Err(cfg_err(&format!("function.{name}.shift"), "spatial shifts need d = 3 and three coordinates"));
            }
            if let Some(other) = &spec.plus {
                if !self.functions.contains_key(other) {
                    return Err(cfg_err(&format!("function.{name}.plus"), format!("unknown function '{other}'")));
                }
            }
        }
        Ok(())
    }

    /// Requires the Monte Carlo sample size of the sampling subcommands.
    pub fn require_mc_samples(&self) -> Result<(), CliError> {
        if self.numerics.samples < 1000 {
            return Err(cfg_err(
                "numerics.samples",
                format!("Monte Carlo subcommands need at least 1000 samples, got {}", self.numerics.samples),
            ));
        }
        Ok(())
    }

    pub fn dispersion(&self) -> Dispersion {
        Dispersion::new(self.physical.dim, self.physical.dispersion_exponent).expect("validated")
    }

    pub fn source(&self) -> Result<SourceProfile, CliError> {
        let disp = self.dispersion();
        match self.physical.source.build("physical.source")? {
            None => Ok(SourceProfile::zero(disp)),
            Some(rho) => SourceProfile::new(rho, disp).map_err(|e| cfg_err("physical.source", e)),
        }
    }

    pub fn function(&self, name: &str) -> Result<TestFunction, CliError> {
        self.function_depth(name, 0)
    }

    fn function_depth(&self, name: &str, depth: usize) -> Result<TestFunction, CliError> {
        if depth > self.functions.len() {
            return Err(CliError::Config(format!("function '{name}': cyclic 'plus' chain")));
        }
        let spec = self
            .functions
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown test function '{name}'")))?;
        let field = format!("function.{name}");
        let dim = self.physical.dim;
        let base = match spec.profile.build(&field)? {
            None => TestFunction::zero(dim),
            Some(profile) => {
                let mut c = Component::new(dim, profile);
                c.coeff = spec.coeff;
                c.time_phase = spec.time_phase;
                if !spec.shift.is_empty() {
                    c.shift = spec.shift.clone();
                }
                TestFunction::new(dim, vec![c]).map_err(|e| cfg_err(&field, e))?
            }
        };
        match &spec.plus {
            None => Ok(base),
            Some(other) => {
                let rest = self.function_depth(other, depth + 1)?;
                base.plus(&rest).map_err(|e| cfg_err(&field, e))
            }
        }
    }

    pub fn exp_str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.experiment.get(key).map(String::as_str).unwrap_or(default)
    }

    pub fn exp_f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.experiment.get(key) {
            Some(v) => parse_f64(&format!("experiment.{key}"), v),
            None => Ok(default),
        }
    }

    pub fn exp_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.experiment.get(key) {
            Some(v) => parse_list(&format!("experiment.{key}"), v),
            None => Ok(default.to_vec()),
        }
    }

    pub fn exp_names(&self, key: &str, default: &str) -> Vec<String> {
        self.exp_str(key, default)
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// Canonical text of the effective configuration.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let p = &self.physical;
        let _ = writeln!(out, "[physical]");
        let _ = writeln!(out, "beta = {:?}", p.beta);
        let _ = writeln!(out, "epsilon = {:?}", p.epsilon);
        let _ = writeln!(out, "dim = {}", p.dim);
        let _ = writeln!(out, "dispersion_exponent = {:?}", p.dispersion_exponent);
        let _ = writeln!(out, "n0 = {:?}", p.n0);
        p.source.render(&mut out, "source_");
        let n = &self.numerics;
        let _ = writeln!(out, "[numerics]");
        let _ = writeln!(out, "samples = {}", n.samples);
        let _ = writeln!(out, "seed = {}", n.seed);
        let _ = writeln!(out, "chunk_size = {}", n.chunk_size);
        let _ = writeln!(out, "kernel_nodes = {}", n.kernel_nodes);
        let _ = writeln!(out, "refine_tol = {:?}", n.refine_tol);
        let _ = writeln!(out, "abs_tol = {:?}", n.abs_tol);
        let _ = writeln!(out, "rel_tol = {:?}", n.rel_tol);
        let _ = writeln!(out, "variance_cells = {}", n.variance_cells);
        let _ = writeln!(out, "[experiment]");
        for (k, v) in &self.experiment {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (name, spec) in &self.functions {
            let _ = writeln!(out, "[function.{name}]");
            spec.profile.render(&mut out, "");
            let _ = writeln!(out, "coeff = {:?}, {:?}", spec.coeff.re, spec.coeff.im);
            let _ = writeln!(out, "time_phase = {:?}", spec.time_phase);
            if !spec.shift.is_empty() {
                let s: Vec<String> = spec.shift.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(out, "shift = {}", s.join(", "));
            }
            if let Some(o) = &spec.plus {
                let _ = writeln!(out, "plus = {o}");
            }
        }
        out
    }

    /// Git-style content hash: `sha256("blob <len>\0" ++ text)`.
    pub fn content_hash(&self) -> String {
        let text = self.canonical();
        let mut h = Sha256::new();
        h.update(format!("blob {}\0", text.len()).as_bytes());
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }
}
