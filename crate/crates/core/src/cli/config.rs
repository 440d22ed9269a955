//! Experiment configuration: defaults, `key = value` files, validation and
//! the hash stamped on every output table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::faults::FaultKind;
use crate::mesh::Domain;
use crate::quadrature::QuadConfig;
use crate::residuals::{RwgTrace, SOLVER_TOL};
use crate::solutions::ManufacturedSolution;

/// Matrix that receives the injected fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    V,
    W,
    E,
}

impl Target {
    pub fn label(&self) -> &'static str {
        match self {
            Target::V => "V",
            Target::W => "W",
            Target::E => "E",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V" | "v" => Ok(Target::V),
            "W" | "w" => Ok(Target::W),
            "E" | "e" => Ok(Target::E),
            _ => Err(Error::Config(format!("unknown target {s:?} (expected V, W or E)"))),
        }
    }
}

/// Energy form used for the Maxwell manufactured-solution error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyMode {
    /// Modulus of the bilinear form of the clean electric matrix.
    CleanElectric,
    /// The positive definite matrix of the electric operator at `k = i`.
    ImaginaryWavenumber,
}

impl EnergyMode {
    pub fn label(&self) -> &'static str {
        match self {
            EnergyMode::CleanElectric => "clean",
            EnergyMode::ImaginaryWavenumber => "k-i",
        }
    }
}

impl FromStr for EnergyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" => Ok(EnergyMode::CleanElectric),
            "k-i" | "ki" => Ok(EnergyMode::ImaginaryWavenumber),
            _ => Err(Error::Config(format!("unknown energy mode {s:?} (expected clean or k-i)"))),
        }
    }
}

/// Largest sphere level without `--full`.
pub const SPHERE_LEVEL_CAP: usize = 4;
/// Largest cube panel count without `--full`.
pub const CUBE_PANEL_CAP: usize = 1536;
/// Largest sphere level and cube panel count accepted at all.
pub const SPHERE_LEVEL_MAX: usize = 6;
pub const CUBE_PANEL_MAX: usize = 12 * 32 * 32;

/// A fully resolved experiment. Levels are sphere refinement levels or cube
/// divisions per edge, depending on the solution's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub solution: String,
    pub levels: Vec<usize>,
    pub quad: QuadConfig,
    /// Overrides the solution's wavenumber (Maxwell) or the `k = i` of the
    /// basis-norm study.
    pub wavenumber: Option<Complex64>,
    pub fault: FaultKind,
    pub target: Target,
    pub seed: u64,
    pub solver_tol: f64,
    /// Degree of the quadrature rule used to project traces.
    pub trace_order: usize,
    /// Values below `machine_floor × trace scale` count as roundoff.
    pub machine_floor: f64,
    pub fluctuation_band: f64,
    pub maxwell_energy: EnergyMode,
    /// Map from tangential traces to RWG coefficients.
    pub rwg_trace: RwgTrace,
    pub full: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            solution: "1a".into(),
            levels: Vec::new(),
            quad: QuadConfig::DEFAULT,
            wavenumber: None,
            fault: FaultKind::None,
            target: Target::V,
            seed: 0,
            solver_tol: SOLVER_TOL,
            trace_order: 6,
            machine_floor: 1e-6,
            fluctuation_band: crate::rates::FLUCTUATION_BAND,
            maxwell_energy: EnergyMode::CleanElectric,
            rwg_trace: RwgTrace::Interpolant,
            full: false,
        }
    }
}

/// Default refinement levels for a solution.
pub fn default_levels(domain: Domain, maxwell: bool, full: bool) -> Vec<usize> {
    match (domain, maxwell, full) {
        (Domain::Sphere, _, false) => vec![2, 3, 4],
        (Domain::Sphere, _, true) => vec![2, 3, 4, 5],
        (Domain::Cube, false, false) => vec![2, 4, 8],
        (Domain::Cube, false, true) => vec![2, 4, 8, 16],
        (Domain::Cube, true, false) => vec![1, 2, 4, 8],
        (Domain::Cube, true, true) => vec![1, 2, 4, 8, 16],
    }
}

/// Panel count of the mesh at `level`.
pub fn panel_count(domain: Domain, level: usize) -> usize {
    match domain {
        Domain::Sphere => 8 * 4usize.pow(level.min(20) as u32),
        Domain::Cube => 12 * level * level,
    }
}

/// Raw settings collected from a config file and the command line. Later
/// insertions win.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

const KEYS: &[&str] = &[
    "solution",
    "levels",
    "fault",
    "target",
    "seed",
    "quad_regular",
    "quad_singular",
    "wavenumber",
    "solver_tol",
    "trace_order",
    "machine_floor",
    "fluctuation_band",
    "maxwell_energy",
    "rwg_trace",
    "full",
];

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.values.insert(key, value.into().trim().to_string());
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse_file_contents(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", no + 1)))?;
            self.set(k, v).map_err(|e| Error::Parse(format!("config line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.parse_file_contents(&text)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parses, fills in defaults and validates.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::default();
        if let Some(v) = self.get("solution") {
            c.solution = v.to_string();
        }
        if let Some(v) = self.get("full") {
            c.full = parse_bool(v)?;
        }
        if let Some(v) = self.get("fault") {
            c.fault = v.parse()?;
        }
        if let Some(v) = self.get("target") {
            c.target = v.parse()?;
        }
        if let Some(v) = self.get("seed") {
            c.seed = parse_num(v, "seed")?;
        }
        if let Some(v) = self.get("quad_regular") {
            c.quad.regular = parse_num(v, "quad_regular")?;
        }
        if let Some(v) = self.get("quad_singular") {
            c.quad.singular = parse_num(v, "quad_singular")?;
        }
        if let Some(v) = self.get("wavenumber") {
            c.wavenumber = Some(parse_complex(v)?);
        }
        if let Some(v) = self.get("solver_tol") {
            c.solver_tol = parse_num(v, "solver_tol")?;
        }
        if let Some(v) = self.get("trace_order") {
            c.trace_order = parse_num(v, "trace_order")?;
        }
        if let Some(v) = self.get("machine_floor") {
            c.machine_floor = parse_num(v, "machine_floor")?;
        }
        if let Some(v) = self.get("fluctuation_band") {
            c.fluctuation_band = parse_num(v, "fluctuation_band")?;
        }
        if let Some(v) = self.get("maxwell_energy") {
            c.maxwell_energy = v.parse()?;
        }
        if let Some(v) = self.get("rwg_trace") {
            c.rwg_trace = v.parse()?;
        }
        let sol = ManufacturedSolution::by_name(&c.solution)?;
        c.levels = match self.get("levels") {
            Some(v) => parse_levels(v)?,
            None => default_levels(sol.domain, sol.is_maxwell(), c.full),
        };
        c.validate()?;
        Ok(c)
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("expected a boolean, got {v:?}"))),
    }
}

fn parse_num<T: FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

/// Accepts `re im`, `re,im` or a single real number.
pub fn parse_complex(v: &str) -> Result<Complex64> {
    let parts: Vec<&str> = v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse_num(re, "wavenumber")?, 0.0)),
        [re, im] => Ok(Complex64::new(parse_num(re, "wavenumber")?, parse_num(im, "wavenumber")?)),
        _ => Err(Error::Config(format!("wavenumber: expected `re im`, got {v:?}"))),
    }
}

fn parse_levels(v: &str) -> Result<Vec<usize>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(s, "levels"))
        .collect()
}

impl ExperimentConfig {
    /// The manufactured solution, with the wavenumber override applied.
    pub fn manufactured_solution(&self) -> Result<ManufacturedSolution> {
        let sol = ManufacturedSolution::by_name(&self.solution)?;
        match (self.wavenumber, sol.is_maxwell()) {
            (Some(k), true) => sol.at_wavenumber(k),
            _ => Ok(sol),
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        Ok(ManufacturedSolution::by_name(&self.solution)?.domain)
    }

    pub fn validate(&self) -> Result<()> {
        let sol = ManufacturedSolution::by_name(&self.solution)?;
        self.quad.validate()?;
        if self.levels.is_empty() {
            return Err(Error::Config("no levels given".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("levels must be strictly increasing".into()));
        }
        for &l in &self.levels {
            match sol.domain {
                Domain::Sphere => {
                    let cap = if self.full { SPHERE_LEVEL_MAX } else { SPHERE_LEVEL_CAP };
                    if l > cap {
                        return Err(Error::Config(format!(
                            "sphere level {l} exceeds the cap {cap}{}",
                            if self.full { "" } else { " (pass --full for larger meshes)" }
                        )));
                    }
                }
                Domain::Cube => {
                    if l == 0 {
                        return Err(Error::Config("cube levels are divisions and must be at least 1".into()));
                    }
                    let cap = if self.full { CUBE_PANEL_MAX } else { CUBE_PANEL_CAP };
                    if panel_count(Domain::Cube, l) > cap {
                        return Err(Error::Config(format!(
                            "cube divisions {l} give {} panels, above the cap {cap}{}",
                            panel_count(Domain::Cube, l),
                            if self.full { "" } else { " (pass --full for larger meshes)" }
                        )));
                    }
                }
            }
        }
        if let Some(k) = self.wavenumber {
            if !(k.re.is_finite() && k.im.is_finite()) || k.norm() == 0.0 {
                return Err(Error::Config("wavenumber must be finite and nonzero".into()));
            }
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return Err(Error::Config("solver_tol must lie in (0, 1)".into()));
        }
        if !(1..=crate::quadrature::MAX_TRIANGLE_ORDER).contains(&self.trace_order) {
            return Err(Error::Config(format!("trace_order must lie in 1..={}", crate::quadrature::MAX_TRIANGLE_ORDER)));
        }
        if !(self.machine_floor >= 0.0) || !(self.fluctuation_band > 0.0) {
            return Err(Error::Config("machine_floor must be >= 0 and fluctuation_band > 0".into()));
        }
        Ok(())
    }

    /// Canonical `key=value` listing of every setting that affects results.
    pub fn canonical(&self) -> String {
        let levels: Vec<String> = self.levels.iter().map(|l| l.to_string()).collect();
        let k = match self.wavenumber {
            Some(k) => format!("{:e} {:e}", k.re, k.im),
            None => "default".into(),
        };
        format!(
            "solution={}\nlevels={}\nfault={}\ntarget={}\nseed={}\nquad_regular={}\nquad_singular={}\n\
             wavenumber={}\nsolver_tol={:e}\ntrace_order={}\nmachine_floor={:e}\nfluctuation_band={:e}\n\
             maxwell_energy={}\nrwg_trace={}\nfull={}\n",
            self.solution,
            levels.join(","),
            self.fault,
            self.target,
            self.seed,
            self.quad.regular,
            self.quad.singular,
            k,
            self.solver_tol,
            self.trace_order,
            self.machine_floor,
            self.fluctuation_band,
            self.maxwell_energy.label(),
            self.rwg_trace.label(),
            self.full
        )
    }

    /// First 16 hex digits of the SHA-256 of `command` and the canonical
    /// settings.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.canonical().as_bytes());
        let digest = h.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
