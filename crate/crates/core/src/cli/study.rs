//! Experiment drivers shared by the command-line tool and the tests: basis
//! norms, Calderón residual studies with optional faults and MMS solves,
//! spectra, and the fault-detection summary.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::config::{EnergyMode, ExperimentConfig, Target};
use super::table::{format_rate, format_value, Cell, Table};
use crate::error::{Error, Result};
use crate::faults::{apply_fault, FaultKind, FaultSpec};
use crate::galerkin::GalerkinMatrix;
use crate::laplace_ops::{assemble_v, assemble_w, LaplaceMatrices};
use crate::linalg::{self, sym_eigvals};
use crate::maxwell_ops::{assemble_e, energy_matrix_k_i, MaxwellMatrices};
use crate::mesh::{make_cube_mesh, make_sphere_mesh, Domain, Mesh, MeshwidthMode};
use crate::rates::{classify, fit_rate, ClassifyOptions, RateSeries, Verdict, VerdictKind};
use crate::residuals::{
    laplace_residuals, laplace_traces, maxwell_residuals, mms_laplace, mms_maxwell, MaxwellEnergy, MmsErrors,
    ResidualSet,
};
use crate::solutions::{ManufacturedSolution, Side};
use crate::spaces::FunctionSpace;

/// Mesh at `level`: a sphere refinement level or the cube divisions.
pub fn build_mesh(domain: Domain, level: usize) -> Result<Mesh> {
    match domain {
        Domain::Sphere => Ok(make_sphere_mesh(level)),
        Domain::Cube => make_cube_mesh(level),
    }
}

fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::Sphere => "unit sphere",
        Domain::Cube => "unit cube",
    }
}

/// Optional files written while a study runs. A path containing `{level}`
/// is written for every level; otherwise only the finest level is written.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub mesh_out: Option<PathBuf>,
    pub dump_matrix: Option<(String, PathBuf)>,
}

impl Artifacts {
    fn path_for(path: &Path, level: usize, finest: bool) -> Option<PathBuf> {
        let s = path.to_string_lossy();
        if s.contains("{level}") {
            Some(PathBuf::from(s.replace("{level}", &level.to_string())))
        } else if finest {
            Some(path.to_path_buf())
        } else {
            None
        }
    }

    fn mesh(&self, mesh: &Mesh, level: usize, finest: bool) -> Result<()> {
        if let Some(p) = self.mesh_out.as_deref().and_then(|p| Self::path_for(p, level, finest)) {
            mesh.write_off(BufWriter::new(File::create(&p)?))?;
            log::info!("wrote mesh of level {level} to {}", p.display());
        }
        Ok(())
    }

    fn matrix(&self, m: &GalerkinMatrix, level: usize, finest: bool) -> Result<()> {
        if let Some((tag, path)) = &self.dump_matrix {
            if tag.eq_ignore_ascii_case(m.operator.name()) {
                if let Some(p) = Self::path_for(path, level, finest) {
                    m.write_csv(BufWriter::new(File::create(&p)?))?;
                    log::info!("wrote {} of level {level} to {}", m.operator.name(), p.display());
                }
            }
        }
        Ok(())
    }
}

/// One measured quantity over the levels of a study.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    pub expected: Option<f64>,
    /// Print the rates between consecutive levels next to the values.
    pub consecutive: bool,
    pub verdict: Option<Verdict>,
}

impl Column {
    fn new(name: &str, expected: Option<f64>, consecutive: bool) -> Self {
        Self { name: name.into(), values: Vec::new(), expected, consecutive, verdict: None }
    }
}

/// Values of a convergence study, one row per level.
#[derive(Debug, Clone)]
pub struct Study {
    pub title: String,
    pub levels: Vec<usize>,
    pub elements: Vec<usize>,
    pub hs: Vec<f64>,
    pub columns: Vec<Column>,
    pub notes: Vec<String>,
}

impl Study {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Least-squares rate of a column, if defined.
    pub fn fitted(&self, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        let s = RateSeries::new(self.hs.clone(), c.values.clone()).ok()?;
        fit_rate(&s).ok()
    }

    /// Rates between consecutive levels of a column.
    pub fn consecutive(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        let s = RateSeries::new(self.hs.clone(), c.values.clone()).ok()?;
        crate::rates::consecutive_rates(&s).ok()
    }

    pub fn verdict(&self, name: &str) -> Option<VerdictKind> {
        self.column(name)?.verdict.as_ref().map(|v| v.kind)
    }

    pub fn has_fail(&self) -> bool {
        self.columns.iter().any(|c| matches!(c.verdict.as_ref().map(|v| v.kind), Some(VerdictKind::Fail)))
    }

    fn classify_columns(&mut self, floor: f64, band: f64) {
        let opts = ClassifyOptions { machine_floor: floor, fluctuation_band: band };
        let hs = self.hs.clone();
        for c in &mut self.columns {
            if let (Some(expected), Ok(s)) = (c.expected, RateSeries::new(hs.clone(), c.values.clone())) {
                c.verdict = Some(classify(&s, expected, opts));
            }
        }
    }

    pub fn to_table(&self) -> Table {
        let mut header = vec!["N".to_string(), "h".to_string()];
        for c in &self.columns {
            header.push(c.name.clone());
            if c.consecutive {
                header.push(format!("ooc {}", c.name));
            }
        }
        let mut t = Table::new(self.title.clone(), header);
        for (i, (n, h)) in self.elements.iter().zip(&self.hs).enumerate() {
            let mut row = vec![Cell::text(n.to_string()), Cell::value(*h)];
            for c in &self.columns {
                row.push(Cell::value(c.values[i]));
                if c.consecutive {
                    let r = if i == 0 { None } else { self.consecutive(&c.name).map(|r| r[i - 1]) };
                    row.push(r.map(Cell::rate).unwrap_or_else(Cell::empty));
                }
            }
            t.push(row);
        }
        let mut ooc = vec![Cell::text("ooc"), Cell::empty()];
        let mut eoc = vec![Cell::text("eoc"), Cell::empty()];
        let mut verdict = vec![Cell::text("verdict"), Cell::empty()];
        for c in &self.columns {
            ooc.push(self.fitted(&c.name).map(Cell::rate).unwrap_or_else(|| Cell::text("n/a")));
            eoc.push(c.expected.map(|e| Cell::text(format_rate(e))).unwrap_or_else(Cell::empty));
            verdict.push(match &c.verdict {
                Some(v) => Cell::pair(v.kind.name(), v.kind.symbol()),
                None => Cell::empty(),
            });
            if c.consecutive {
                ooc.push(Cell::empty());
                eoc.push(Cell::empty());
                verdict.push(Cell::empty());
            }
        }
        t.push(ooc);
        t.push(eoc);
        if self.columns.iter().any(|c| c.verdict.is_some()) {
            t.push(verdict);
        }
        t.notes = self.notes.clone();
        t
    }
}

fn meshwidth(mesh: &Mesh) -> f64 {
    mesh.meshwidth(MeshwidthMode::Max)
}

// ---------------------------------------------------------------- basis norms

/// Maximal diagonal entries of V and W (Laplace solutions) or of E at
/// `k = i` (Maxwell solutions), per level.
pub fn basis_norms(cfg: &ExperimentConfig, art: &Artifacts) -> Result<Study> {
    let sol = ManufacturedSolution::by_name(&cfg.solution)?;
    let domain = sol.domain;
    let finest = *cfg.levels.last().expect("validated levels");
    let mut study = Study {
        title: String::new(),
        levels: cfg.levels.clone(),
        elements: Vec::new(),
        hs: Vec::new(),
        columns: Vec::new(),
        notes: Vec::new(),
    };
    if sol.is_maxwell() {
        let k = cfg.wavenumber.unwrap_or(Complex64::i());
        study.title = format!("Maximal diagonal entry of E (k = {} {:+}i), {}", k.re, k.im, domain_name(domain));
        study.columns.push(Column::new("max diag E", Some(1.0), true));
        for &l in &cfg.levels {
            let mesh = Arc::new(build_mesh(domain, l)?);
            art.mesh(&mesh, l, l == finest)?;
            let rwg = FunctionSpace::rwg(&mesh);
            let snc = FunctionSpace::snc(&mesh);
            let e = assemble_e(&rwg, &snc, k, &cfg.quad)?;
            art.matrix(&e, l, l == finest)?;
            study.elements.push(mesh.panel_count());
            study.hs.push(meshwidth(&mesh));
            study.columns[0].values.push(e.max_abs_diagonal());
            study.notes.push(format!("level {l}: {} edges", mesh.edge_count()));
        }
    } else {
        study.title = format!("Maximal diagonal entries of V and W, {}", domain_name(domain));
        study.columns.push(Column::new("max diag V", Some(3.0), true));
        study.columns.push(Column::new("max diag W", Some(1.0), true));
        for &l in &cfg.levels {
            let mesh = Arc::new(build_mesh(domain, l)?);
            art.mesh(&mesh, l, l == finest)?;
            let v = assemble_v(&FunctionSpace::p0(&mesh), &cfg.quad)?;
            let w = assemble_w(&FunctionSpace::p1(&mesh), &cfg.quad)?;
            art.matrix(&v, l, l == finest)?;
            art.matrix(&w, l, l == finest)?;
            study.elements.push(mesh.panel_count());
            study.hs.push(meshwidth(&mesh));
            study.columns[0].values.push(v.max_abs_diagonal());
            study.columns[1].values.push(w.max_abs_diagonal());
        }
    }
    Ok(study)
}

// ---------------------------------------------------------------- Laplace

/// Clean Laplace matrices on one level.
pub struct LaplaceLevel {
    pub level: usize,
    pub mesh: Arc<Mesh>,
    pub h: f64,
    pub p0: FunctionSpace,
    pub p1: FunctionSpace,
    pub mats: LaplaceMatrices,
}

pub fn prepare_laplace(cfg: &ExperimentConfig, sol: &ManufacturedSolution, art: &Artifacts) -> Result<Vec<LaplaceLevel>> {
    let finest = *cfg.levels.last().expect("validated levels");
    cfg.levels
        .iter()
        .map(|&l| {
            let mesh = Arc::new(build_mesh(sol.domain, l)?);
            art.mesh(&mesh, l, l == finest)?;
            let p0 = FunctionSpace::p0(&mesh);
            let p1 = FunctionSpace::p1(&mesh);
            log::info!("assembling Laplace matrices on {} panels", mesh.panel_count());
            let mats = LaplaceMatrices::assemble(&p0, &p1, &cfg.quad)?;
            Ok(LaplaceLevel { level: l, h: meshwidth(&mesh), mesh, p0, p1, mats })
        })
        .collect()
}

/// Residual and (optionally) MMS study with a fault on one matrix.
#[derive(Debug, Clone)]
pub struct FaultedRun {
    pub study: Study,
    /// Aggregate verdict of the residual columns the fault can reach.
    pub calderon: VerdictKind,
    /// Aggregate verdict of the MMS error the fault can reach.
    pub mms: Option<VerdictKind>,
}

impl FaultedRun {
    /// Whether the two tests reach the same conclusion.
    pub fn agree(&self) -> Option<bool> {
        self.mms.map(|m| detects(self.calderon) == detects(m))
    }
}

/// Whether a verdict reports a problem.
pub fn detects(kind: VerdictKind) -> bool {
    matches!(kind, VerdictKind::Fail | VerdictKind::Fluctuating | VerdictKind::SolverFailure)
}

/// Combines column verdicts: any failure dominates, then solver failures,
/// then fluctuation; all-roundoff stays roundoff.
pub fn aggregate(kinds: &[VerdictKind]) -> VerdictKind {
    use VerdictKind::*;
    for k in [Fail, SolverFailure, Fluctuating] {
        if kinds.contains(&k) {
            return k;
        }
    }
    if !kinds.is_empty() && kinds.iter().all(|k| *k == MachinePrecision) {
        MachinePrecision
    } else {
        Pass
    }
}

fn fault_title(fault: FaultKind, target: Target) -> String {
    match fault {
        FaultKind::None => "no fault".into(),
        f => format!("fault {f} on {target}"),
    }
}

fn push_residuals(study: &mut Study, set: &ResidualSet, names: [&str; 2], scale: &mut f64) {
    for (j, name) in names.iter().enumerate() {
        let r = set.get(name).expect("named residual");
        study.columns[2 * j].values.push(r.norms.inf);
        study.columns[2 * j + 1].values.push(r.norms.two);
    }
    *scale = scale.max(set.trace_scale);
}

fn residual_columns(label: [&str; 2], expected_inf: [f64; 2]) -> Vec<Column> {
    let mut cols = Vec::new();
    for j in 0..2 {
        cols.push(Column::new(&format!("|{}|inf", label[j]), Some(expected_inf[j]), false));
        cols.push(Column::new(&format!("|{}|2", label[j]), Some(expected_inf[j] - 1.0), false));
    }
    cols
}

fn note_solves(study: &mut Study, level: usize, mms: &MmsErrors) {
    for (name, s) in &mms.errors {
        if s.path != linalg::SolverPath::Cg && s.path != linalg::SolverPath::Gmres {
            study.notes.push(format!(
                "level {level}: {name} solved by {} after {} iterations",
                s.path.name(),
                s.iterations
            ));
        }
    }
}

/// Runs the Laplace residual (and MMS) study with `fault` on `target`.
pub fn run_laplace(
    cfg: &ExperimentConfig,
    sol: &ManufacturedSolution,
    levels: &[LaplaceLevel],
    fault: FaultKind,
    target: Target,
    with_mms: bool,
    art: &Artifacts,
) -> Result<FaultedRun> {
    if fault != FaultKind::None && target == Target::E {
        return Err(Error::Config("Laplace solutions take faults on V or W".into()));
    }
    let side = match sol.side {
        Side::Interior => "interior",
        Side::Exterior => "exterior",
    };
    let mut study = Study {
        title: format!(
            "Calderón residuals{} — Example {} ({}, {side}), {}",
            if with_mms { " and MMS errors" } else { "" },
            sol.name,
            domain_name(sol.domain),
            fault_title(fault, target)
        ),
        levels: levels.iter().map(|l| l.level).collect(),
        elements: Vec::new(),
        hs: Vec::new(),
        columns: residual_columns(["rho_D", "rho_N"], [3.0, 2.0]),
        notes: Vec::new(),
    };
    if with_mms {
        study.columns.push(Column::new("e_N", Some(0.5), true));
        study.columns.push(Column::new("e_D", Some(1.5), true));
    }
    let finest = levels.last().map(|l| l.level);
    let mut scale: f64 = 0.0;
    let mut solver_failure = false;
    for lv in levels {
        let spec = FaultSpec::new(fault, cfg.seed, lv.h);
        let mut mats = lv.mats.clone();
        match target {
            Target::V => mats.v = apply_fault(&lv.mats.v, &spec)?,
            Target::W => {
                mats.w = apply_fault(&lv.mats.w, &spec)?;
                mats.wm = apply_fault(&lv.mats.wm, &spec)?;
            }
            Target::E => {}
        }
        let last = Some(lv.level) == finest;
        for m in [&mats.v, &mats.k, &mats.kp, &mats.w, &mats.wm, &mats.wtilde, &mats.m01] {
            art.matrix(m, lv.level, last)?;
        }
        let set = laplace_residuals(sol, &lv.p0, &lv.p1, &mats, cfg.trace_order, lv.h)?;
        study.elements.push(lv.mesh.panel_count());
        study.hs.push(lv.h);
        push_residuals(&mut study, &set, ["rho_D", "rho_N"], &mut scale);
        if with_mms {
            match mms_laplace(sol, &lv.p0, &lv.p1, &lv.mats, &mats.v, &mats.wm, cfg.trace_order, cfg.solver_tol) {
                Ok(m) => {
                    study.columns[4].values.push(m.get("e_N").expect("e_N").error);
                    study.columns[5].values.push(m.get("e_D").expect("e_D").error);
                    note_solves(&mut study, lv.level, &m);
                }
                Err(Error::Singular) => {
                    solver_failure = true;
                    study.columns[4].values.push(f64::NAN);
                    study.columns[5].values.push(f64::NAN);
                    study.notes.push(format!("level {}: MMS system is singular", lv.level));
                }
                Err(e) => return Err(e),
            }
        }
    }
    study.classify_columns(cfg.machine_floor * scale, cfg.fluctuation_band);
    if solver_failure {
        for c in study.columns.iter_mut().skip(4) {
            c.verdict = Some(Verdict {
                kind: VerdictKind::SolverFailure,
                fitted_rate: None,
                consecutive_rates: Vec::new(),
                expected_rate: c.expected.unwrap_or(0.0),
            });
        }
    }
    let kinds = |names: &[&str]| -> Vec<VerdictKind> { names.iter().filter_map(|n| study.verdict(n)).collect() };
    let (res_cols, mms_cols): (&[&str], &[&str]) = match (fault, target) {
        (FaultKind::None, _) => (&["|rho_D|inf", "|rho_D|2", "|rho_N|inf", "|rho_N|2"], &["e_N", "e_D"]),
        (_, Target::V) => (&["|rho_D|inf", "|rho_D|2"], &["e_N"]),
        _ => (&["|rho_N|inf", "|rho_N|2"], &["e_D"]),
    };
    let calderon = aggregate(&kinds(res_cols));
    let mms = with_mms.then(|| aggregate(&kinds(mms_cols)));
    Ok(FaultedRun { study, calderon, mms })
}

// ---------------------------------------------------------------- Maxwell

/// Clean Maxwell matrices on one level.
pub struct MaxwellLevel {
    pub level: usize,
    pub mesh: Arc<Mesh>,
    pub h: f64,
    pub rwg: FunctionSpace,
    pub snc: FunctionSpace,
    pub mats: MaxwellMatrices,
    /// `A + D` at `k = i`, when that energy form is selected.
    pub energy: Option<DMatrix<f64>>,
}

pub fn prepare_maxwell(cfg: &ExperimentConfig, sol: &ManufacturedSolution, art: &Artifacts) -> Result<Vec<MaxwellLevel>> {
    let k = sol.wavenumber().ok_or_else(|| Error::Config(format!("{} is not a Maxwell solution", sol.name)))?;
    let finest = *cfg.levels.last().expect("validated levels");
    cfg.levels
        .iter()
        .map(|&l| {
            let mesh = Arc::new(build_mesh(sol.domain, l)?);
            art.mesh(&mesh, l, l == finest)?;
            let rwg = FunctionSpace::rwg(&mesh);
            let snc = FunctionSpace::snc(&mesh);
            log::info!("assembling Maxwell matrices on {} panels ({} edges)", mesh.panel_count(), mesh.edge_count());
            let mats = MaxwellMatrices::assemble(&rwg, &snc, k, &cfg.quad)?;
            let energy = match cfg.maxwell_energy {
                EnergyMode::CleanElectric => None,
                EnergyMode::ImaginaryWavenumber => Some(energy_matrix_k_i(&rwg, &snc, &cfg.quad)?),
            };
            Ok(MaxwellLevel { level: l, h: meshwidth(&mesh), mesh, rwg, snc, mats, energy })
        })
        .collect()
}

/// Runs the Maxwell residual (and MMS) study with `fault` on E.
pub fn run_maxwell(
    cfg: &ExperimentConfig,
    sol: &ManufacturedSolution,
    levels: &[MaxwellLevel],
    fault: FaultKind,
    with_mms: bool,
    art: &Artifacts,
) -> Result<FaultedRun> {
    let k = sol.wavenumber().expect("Maxwell solution");
    let mut study = Study {
        title: format!(
            "Calderón residuals{} — Example {} ({}, k = {} {:+}i), {}",
            if with_mms { " and MMS errors" } else { "" },
            sol.name,
            domain_name(sol.domain),
            k.re,
            k.im,
            fault_title(fault, Target::E)
        ),
        levels: levels.iter().map(|l| l.level).collect(),
        elements: Vec::new(),
        hs: Vec::new(),
        columns: residual_columns(["rho_1", "rho_2"], [2.0, 2.0]),
        notes: Vec::new(),
    };
    if with_mms {
        study.columns.push(Column::new("e_R", Some(1.5), true));
    }
    let finest = levels.last().map(|l| l.level);
    let mut scale: f64 = 0.0;
    let mut solver_failure = false;
    for lv in levels {
        let spec = FaultSpec::new(fault, cfg.seed, lv.h);
        let mut mats = lv.mats.clone();
        mats.e = apply_fault(&lv.mats.e, &spec)?;
        let last = Some(lv.level) == finest;
        for m in [&mats.e, &mats.h, &mats.m] {
            art.matrix(m, lv.level, last)?;
        }
        let set = maxwell_residuals(sol, &lv.rwg, &mats, cfg.rwg_trace, cfg.trace_order, lv.h)?;
        study.elements.push(lv.mesh.panel_count());
        study.hs.push(lv.h);
        push_residuals(&mut study, &set, ["rho_1", "rho_2"], &mut scale);
        if with_mms {
            let energy = match &lv.energy {
                Some(m) => MaxwellEnergy::ImaginaryWavenumber(m),
                None => MaxwellEnergy::CleanElectric,
            };
            match mms_maxwell(sol, &lv.rwg, &lv.mats, &mats.e, energy, cfg.rwg_trace, cfg.trace_order, cfg.solver_tol) {
                Ok(m) => {
                    study.columns[4].values.push(m.get("e_R").expect("e_R").error);
                    note_solves(&mut study, lv.level, &m);
                }
                Err(Error::Singular) => {
                    solver_failure = true;
                    study.columns[4].values.push(f64::NAN);
                    study.notes.push(format!("level {}: MMS system is singular", lv.level));
                }
                Err(e) => return Err(e),
            }
        }
    }
    study.classify_columns(cfg.machine_floor * scale, cfg.fluctuation_band);
    if solver_failure {
        study.columns[4].verdict = Some(Verdict {
            kind: VerdictKind::SolverFailure,
            fitted_rate: None,
            consecutive_rates: Vec::new(),
            expected_rate: 1.5,
        });
    }
    let res: Vec<VerdictKind> =
        ["|rho_1|inf", "|rho_1|2", "|rho_2|inf", "|rho_2|2"].iter().filter_map(|n| study.verdict(n)).collect();
    let calderon = aggregate(&res);
    let mms = with_mms.then(|| aggregate(&study.verdict("e_R").into_iter().collect::<Vec<_>>()));
    Ok(FaultedRun { study, calderon, mms })
}

/// Residual study (MMS optional) for the configured solution, fault and
/// target.
pub fn run_study(cfg: &ExperimentConfig, with_mms: bool, art: &Artifacts) -> Result<FaultedRun> {
    let sol = cfg.manufactured_solution()?;
    if sol.is_maxwell() {
        if cfg.fault != FaultKind::None && cfg.target != Target::E {
            return Err(Error::Config("Maxwell solutions take faults on E only".into()));
        }
        let levels = prepare_maxwell(cfg, &sol, art)?;
        run_maxwell(cfg, &sol, &levels, cfg.fault, with_mms, art)
    } else {
        let levels = prepare_laplace(cfg, &sol, art)?;
        run_laplace(cfg, &sol, &levels, cfg.fault, cfg.target, with_mms, art)
    }
}

// ---------------------------------------------------------------- spectra

/// Outcome of a CG run on one system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Eigenvalues of a clean and a faulted symmetric matrix on the coarsest
/// level, with CG run on the MMS system of each.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub title: String,
    pub level: usize,
    pub clean: Vec<f64>,
    pub faulted: Vec<f64>,
    pub cg_clean: CgOutcome,
    pub cg_faulted: CgOutcome,
}

pub fn spectrum(cfg: &ExperimentConfig, art: &Artifacts) -> Result<Spectrum> {
    let sol = cfg.manufactured_solution()?;
    if sol.is_maxwell() || cfg.target == Target::E {
        return Err(Error::Config("spectra are computed for the symmetric Laplace matrices V and W".into()));
    }
    let level = cfg.levels[0];
    let mut one = cfg.clone();
    one.levels = vec![level];
    let lv = prepare_laplace(&one, &sol, art)?.remove(0);
    let (d, n) = laplace_traces(&sol, &lv.p0, &lv.p1, cfg.trace_order)?;
    let s = match sol.side {
        Side::Interior => 0.5,
        Side::Exterior => -0.5,
    };
    let mul = |m: &GalerkinMatrix, x: &DVector<Complex64>| m.to_complex() * x;
    let (clean, rhs) = match cfg.target {
        Target::V => (&lv.mats.v, mul(&lv.mats.m01, &d) * Complex64::new(s, 0.0) + mul(&lv.mats.k, &d)),
        _ => (&lv.mats.wm, mul(&lv.mats.m10, &n) * Complex64::new(s, 0.0) - mul(&lv.mats.kp, &n)),
    };
    let faulted = apply_fault(clean, &FaultSpec::new(cfg.fault, cfg.seed, lv.h))?;
    art.matrix(&faulted, level, true)?;
    let cg = |m: &GalerkinMatrix| -> Result<CgOutcome> {
        let r = linalg::cg_complex_rhs(m.real()?, &rhs, cfg.solver_tol, 5 * rhs.len())?;
        Ok(CgOutcome { converged: r.converged, iterations: r.iterations, relative_residual: r.relative_residual })
    };
    Ok(Spectrum {
        title: format!(
            "Eigenvalues of {} — Example {} ({}, {} panels), clean and {}",
            clean.operator.name(),
            sol.name,
            domain_name(sol.domain),
            lv.mesh.panel_count(),
            fault_title(cfg.fault, cfg.target)
        ),
        level,
        clean: sym_eigvals(clean.real()?)?,
        faulted: sym_eigvals(faulted.real()?)?,
        cg_clean: cg(clean)?,
        cg_faulted: cg(&faulted)?,
    })
}

impl Spectrum {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(self.title.clone(), vec!["index".into(), "clean".into(), "faulted".into()]);
        for (i, (a, b)) in self.clean.iter().zip(&self.faulted).enumerate() {
            t.push(vec![Cell::text(i.to_string()), Cell::value(*a), Cell::value(*b)]);
        }
        let describe = |name: &str, ev: &[f64], cg: &CgOutcome| {
            format!(
                "{name}: min eigenvalue {}, {} negative; CG {} after {} iterations (relative residual {})",
                format_value(ev[0]),
                ev.iter().filter(|v| **v < 0.0).count(),
                if cg.converged { "converged" } else { "did not converge" },
                cg.iterations,
                format_value(cg.relative_residual)
            )
        };
        t.notes.push(describe("clean", &self.clean, &self.cg_clean));
        t.notes.push(describe("faulted", &self.faulted, &self.cg_faulted));
        t
    }
}

// ---------------------------------------------------------------- summary

/// One cell row of the fault-detection summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solution: String,
    pub target: Target,
    pub fault: FaultKind,
    pub calderon: VerdictKind,
    pub mms: VerdictKind,
}

impl SummaryRow {
    pub fn agree(&self) -> bool {
        detects(self.calderon) == detects(self.mms)
    }
}

/// Solutions covered by the summary report.
pub const SUMMARY_SOLUTIONS: [&str; 3] = ["1a", "2", "m3"];

/// Runs every fault on every applicable target for `solutions`, each on
/// its default levels (respecting `full`), reusing the clean matrices.
pub fn summary(base: &ExperimentConfig, solutions: &[&str], art: &Artifacts) -> Result<(Vec<SummaryRow>, Vec<Study>)> {
    let mut rows = Vec::new();
    let mut studies = Vec::new();
    for name in solutions {
        let mut cfg = base.clone();
        cfg.solution = name.to_string();
        cfg.wavenumber = None;
        let sol = cfg.manufactured_solution()?;
        cfg.levels = super::config::default_levels(sol.domain, sol.is_maxwell(), cfg.full);
        cfg.validate()?;
        if sol.is_maxwell() {
            let levels = prepare_maxwell(&cfg, &sol, art)?;
            for fault in FaultKind::ALL {
                let run = run_maxwell(&cfg, &sol, &levels, fault, true, art)?;
                rows.push(SummaryRow {
                    solution: name.to_string(),
                    target: Target::E,
                    fault,
                    calderon: run.calderon,
                    mms: run.mms.expect("MMS requested"),
                });
                studies.push(run.study);
            }
        } else {
            let levels = prepare_laplace(&cfg, &sol, art)?;
            for target in [Target::V, Target::W] {
                for fault in FaultKind::ALL {
                    let run = run_laplace(&cfg, &sol, &levels, fault, target, true, art)?;
                    rows.push(SummaryRow {
                        solution: name.to_string(),
                        target,
                        fault,
                        calderon: run.calderon,
                        mms: run.mms.expect("MMS requested"),
                    });
                    studies.push(run.study);
                }
            }
        }
    }
    Ok((rows, studies))
}

pub fn summary_table(rows: &[SummaryRow]) -> Table {
    let mut t = Table::new(
        "Summary of fault detection: Calderón test vs MMS test",
        vec!["example".into(), "operator".into(), "fault".into(), "Calderón test".into(), "MMS".into(), "agree".into()],
    );
    for r in rows {
        t.push(vec![
            Cell::text(r.solution.clone()),
            Cell::text(r.target.label()),
            Cell::text(r.fault.label()),
            Cell::pair(r.calderon.name(), r.calderon.symbol()),
            Cell::pair(r.mms.name(), r.mms.symbol()),
            Cell::text(if r.agree() { "yes" } else { "no" }),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::Settings;

    #[test]
    fn aggregation_precedence() {
        use VerdictKind::*;
        assert_eq!(aggregate(&[Pass, Fail, Fluctuating]), Fail);
        assert_eq!(aggregate(&[Pass, Fluctuating]), Fluctuating);
        assert_eq!(aggregate(&[MachinePrecision, MachinePrecision]), MachinePrecision);
        assert_eq!(aggregate(&[MachinePrecision, Pass]), Pass);
        assert!(detects(Fail) && detects(Fluctuating) && !detects(MachinePrecision));
    }

    #[test]
    fn single_level_rates_are_not_applicable() {
        let mut s = Settings::default();
        s.set("levels", "1").unwrap();
        let cfg = s.resolve().unwrap();
        let study = basis_norms(&cfg, &Artifacts::default()).unwrap();
        assert_eq!(study.fitted("max diag V"), None);
        let csv = study.to_table().to_csv("x");
        assert!(csv.contains("ooc,,n/a,,n/a,"));
    }

    #[test]
    fn artifact_paths() {
        let p = Path::new("out/m{level}.off");
        assert_eq!(Artifacts::path_for(p, 3, false), Some(PathBuf::from("out/m3.off")));
        let q = Path::new("out/m.off");
        assert_eq!(Artifacts::path_for(q, 3, false), None);
        assert_eq!(Artifacts::path_for(q, 3, true), Some(PathBuf::from("out/m.off")));
    }
}
