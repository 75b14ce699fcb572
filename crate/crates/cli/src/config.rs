//! Experiment configuration: one TOML document per run.
//!
//! Only `[system]` is mandatory. Every budget table is optional and falls
//! back to the defaults listed on its fields, so a minimal config is three
//! lines long. Unknown keys are rejected everywhere; a typo must fail the
//! run, not silently fall back to a default experiment.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pressure_lab_core::expr::Expr;
use pressure_lab_core::pressure::bowen::BowenBudget;
use pressure_lab_core::pressure::grassmann::SigmaBudget;
use pressure_lab_core::pressure::sft::SftModel;
use pressure_lab_core::{Potential, SystemDef};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Seed for every sampled search. Required for smooth systems; the
    /// `--seed` flag overrides it. Subshift pressure is exact linear
    /// algebra and runs without one.
    pub seed: Option<u64>,
    /// Output directory, overridden by `--out`. Default `pressure-lab-out`.
    pub output: Option<PathBuf>,
    pub system: SystemSpec,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub orbits: OrbitsSection,
    #[serde(default)]
    pub bowen: BowenSection,
    #[serde(default)]
    pub sigma: SigmaSection,
    #[serde(default)]
    pub domination: DominationSection,
    #[serde(default)]
    pub transition: TransitionSection,
    #[serde(default)]
    pub pressure: PressureSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

/// Which map the experiment runs on.
///
/// Deserialized through an intermediate table because serde's internal
/// tagging silently drops `deny_unknown_fields`; the conversion rejects
/// parameters that do not belong to the chosen kind.
#[derive(Debug, Deserialize)]
#[serde(try_from = "SystemTable")]
pub enum SystemSpec {
    /// The automorphism [[2,1],[1,1]] of the unit torus.
    Cat,
    /// Integer toral automorphism; the matrix must have determinant +-1.
    Linear { matrix: [[i64; 2]; 2] },
    /// Standard map on [0, 2 pi)^2 with kick strength `k`.
    Standard { k: f64 },
    /// Vertical sinusoidal kick composed with the horizontal shear.
    Kick { amplitude: f64 },
    /// Subshift of finite type from 0/1 adjacency rows.
    Sft { rows: Vec<Vec<u8>> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemTable {
    kind: String,
    matrix: Option<[[i64; 2]; 2]>,
    k: Option<f64>,
    amplitude: Option<f64>,
    rows: Option<Vec<Vec<u8>>>,
}

impl TryFrom<SystemTable> for SystemSpec {
    type Error = String;

    fn try_from(t: SystemTable) -> Result<Self, String> {
        let mut extras = Vec::new();
        if t.matrix.is_some() {
            extras.push("matrix");
        }
        if t.k.is_some() {
            extras.push("k");
        }
        if t.amplitude.is_some() {
            extras.push("amplitude");
        }
        if t.rows.is_some() {
            extras.push("rows");
        }
        let expect = |extras: &[&str], wanted: &[&str]| -> Result<(), String> {
            let stray: Vec<&&str> = extras.iter().filter(|e| !wanted.contains(e)).collect();
            if stray.is_empty() {
                Ok(())
            } else {
                Err(format!("[system] kind `{}` does not take {:?}", t.kind, stray))
            }
        };
        let missing = |field: &str| format!("[system] kind `{}` needs `{field}`", t.kind);
        match t.kind.as_str() {
            "cat" => {
                expect(&extras, &[])?;
                Ok(SystemSpec::Cat)
            }
            "linear" => {
                expect(&extras, &["matrix"])?;
                Ok(SystemSpec::Linear { matrix: t.matrix.ok_or_else(|| missing("matrix"))? })
            }
            "standard" => {
                expect(&extras, &["k"])?;
                Ok(SystemSpec::Standard { k: t.k.ok_or_else(|| missing("k"))? })
            }
            "kick" => {
                expect(&extras, &["amplitude"])?;
                Ok(SystemSpec::Kick {
                    amplitude: t.amplitude.ok_or_else(|| missing("amplitude"))?,
                })
            }
            "sft" => {
                expect(&extras, &["rows"])?;
                Ok(SystemSpec::Sft { rows: t.rows.ok_or_else(|| missing("rows"))? })
            }
            other => Err(format!(
                "[system] kind must be cat, linear, standard, kick, or sft; got `{other}`"
            )),
        }
    }
}

/// Weight function; defaults to zero, making pressure plain entropy.
#[derive(Debug, Default, Deserialize)]
#[serde(try_from = "PotentialTable")]
pub enum PotentialSpec {
    #[default]
    Zero,
    Constant { value: f64 },
    /// Trigonometric polynomial in x and y, e.g. "0.3*cos(x) + 0.1*sin(2*y)".
    Expression { formula: String },
    /// phi_m(x) = -(1/m) log ||D_x f^m||, the geometric family.
    Geometric { m: u32 },
    /// Per-symbol weights, subshifts only; one entry per symbol.
    Symbol { weights: Vec<f64> },
    /// Per-edge weight table, subshifts only; square, rows = symbols.
    Edge { table: Vec<Vec<f64>> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialTable {
    kind: String,
    value: Option<f64>,
    formula: Option<String>,
    m: Option<u32>,
    weights: Option<Vec<f64>>,
    table: Option<Vec<Vec<f64>>>,
}

impl TryFrom<PotentialTable> for PotentialSpec {
    type Error = String;

    fn try_from(t: PotentialTable) -> Result<Self, String> {
        let mut extras = Vec::new();
        if t.value.is_some() {
            extras.push("value");
        }
        if t.formula.is_some() {
            extras.push("formula");
        }
        if t.m.is_some() {
            extras.push("m");
        }
        if t.weights.is_some() {
            extras.push("weights");
        }
        if t.table.is_some() {
            extras.push("table");
        }
        let expect = |extras: &[&str], wanted: &[&str]| -> Result<(), String> {
            let stray: Vec<&&str> = extras.iter().filter(|e| !wanted.contains(e)).collect();
            if stray.is_empty() {
                Ok(())
            } else {
                Err(format!("[potential] kind `{}` does not take {:?}", t.kind, stray))
            }
        };
        let missing = |field: &str| format!("[potential] kind `{}` needs `{field}`", t.kind);
        match t.kind.as_str() {
            "zero" => {
                expect(&extras, &[])?;
                Ok(PotentialSpec::Zero)
            }
            "constant" => {
                expect(&extras, &["value"])?;
                Ok(PotentialSpec::Constant { value: t.value.ok_or_else(|| missing("value"))? })
            }
            "expression" => {
                expect(&extras, &["formula"])?;
                Ok(PotentialSpec::Expression {
                    formula: t.formula.ok_or_else(|| missing("formula"))?,
                })
            }
            "geometric" => {
                expect(&extras, &["m"])?;
                Ok(PotentialSpec::Geometric { m: t.m.ok_or_else(|| missing("m"))? })
            }
            "symbol" => {
                expect(&extras, &["weights"])?;
                Ok(PotentialSpec::Symbol {
                    weights: t.weights.ok_or_else(|| missing("weights"))?,
                })
            }
            "edge" => {
                expect(&extras, &["table"])?;
                Ok(PotentialSpec::Edge { table: t.table.ok_or_else(|| missing("table"))? })
            }
            other => Err(format!(
                "[potential] kind must be zero, constant, expression, geometric, symbol, or edge; got `{other}`"
            )),
        }
    }
}

/// Periodic-orbit search budget (also feeds domination and transition).
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitsSection {
    /// Highest minimal period searched. Default 3.
    pub max_period: u32,
    /// Newton seeds per axis. Default 48.
    pub grid_density: u32,
    /// Catalog cap; hitting it counts as budget exhaustion. Default 20000.
    pub max_orbits: usize,
}

impl Default for OrbitsSection {
    fn default() -> Self {
        OrbitsSection { max_period: 3, grid_density: 48, max_orbits: 20_000 }
    }
}

/// Spanning-set estimator budget.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BowenSection {
    /// First horizon of the difference record. Default 4.
    pub n_lo: u32,
    /// Last horizon. Default 8.
    pub n_hi: u32,
    /// Dynamical ball radius. Default 0.05.
    pub epsilon: f64,
    /// Sample grid points per axis. Default 512.
    pub grid_density: u32,
    /// Spanning-set size cap; exceeding it truncates the record and counts
    /// as budget exhaustion. Default 4000000.
    pub max_cover: usize,
}

impl Default for BowenSection {
    fn default() -> Self {
        BowenSection { n_lo: 4, n_hi: 8, epsilon: 0.05, grid_density: 512, max_cover: 4_000_000 }
    }
}

impl BowenSection {
    pub fn budget(&self) -> BowenBudget {
        BowenBudget {
            n_lo: self.n_lo,
            n_hi: self.n_hi,
            epsilon: self.epsilon,
            grid_density: self.grid_density,
            max_cover: self.max_cover,
        }
    }
}

/// Grassmann supremum search budget.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmaSection {
    /// Horizons 1..=n_max are evaluated. Default 8.
    pub n_max: u32,
    /// Basepoints per axis. Default 64.
    pub base_grid: u32,
    /// Angle samples on [0, pi). Default 256.
    pub angle_grid: u32,
    /// Grid cells refined per horizon. Default 8.
    pub refine_top: usize,
    /// Golden-section iterations per refined cell. Default 20.
    pub refine_steps: u32,
}

impl Default for SigmaSection {
    fn default() -> Self {
        SigmaSection { n_max: 8, base_grid: 64, angle_grid: 256, refine_top: 8, refine_steps: 20 }
    }
}

impl SigmaSection {
    pub fn budget(&self, seed: u64) -> SigmaBudget {
        SigmaBudget {
            n_max: self.n_max,
            base_grid: self.base_grid,
            angle_grid: self.angle_grid,
            refine_top: self.refine_top,
            refine_steps: self.refine_steps,
            seed,
        }
    }
}

/// Dominated-splitting scan parameters.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominationSection {
    /// Domination orders N tested on every catalog orbit. Default [1,2,4,8].
    pub n_values: Vec<u32>,
    /// Ratio-record length; 0 picks max(4 * max N, 64). Default 0.
    pub horizon: u32,
    /// Length of the singular-value gap series. Default 30.
    pub gap_length: u32,
    /// Basepoint of the gap series; default is the first catalog orbit.
    pub gap_start: Option<[f64; 2]>,
}

impl Default for DominationSection {
    fn default() -> Self {
        DominationSection { n_values: vec![1, 2, 4, 8], horizon: 0, gap_length: 30, gap_start: None }
    }
}

/// Pressure-curve diagnostics for the geometric family t * phi_m.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionSection {
    /// Geometric potential order. Default 1.
    pub m: u32,
    /// Grid start, must be >= 0. Default 0.
    pub t_min: f64,
    /// Grid end, must exceed t_min. Default 3.
    pub t_max: f64,
    /// Grid points including both endpoints. Default 61.
    pub t_steps: u32,
    /// Equilibrium screen tolerance; 0 demands exact hits. Default 1e-6.
    pub candidate_tol: f64,
}

impl Default for TransitionSection {
    fn default() -> Self {
        TransitionSection { m: 1, t_min: 0.0, t_max: 3.0, t_steps: 61, candidate_tol: 1e-6 }
    }
}

impl TransitionSection {
    pub fn t_grid(&self) -> Result<Vec<f64>> {
        if !(2..=100_000).contains(&self.t_steps) {
            bail!("transition.t_steps must lie in 2..=100000");
        }
        if !self.t_min.is_finite() || !self.t_max.is_finite() || self.t_min < 0.0 {
            bail!("transition grid endpoints must be finite and t_min >= 0");
        }
        if self.t_max <= self.t_min {
            bail!("transition.t_max must exceed transition.t_min");
        }
        let last = (self.t_steps - 1) as f64;
        Ok((0..self.t_steps)
            .map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / last)
            .collect())
    }
}

/// Method selection for the `pressure` command.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureSection {
    /// periodic | bowen | grassmann | transfer. Default: periodic on smooth
    /// systems, transfer on subshifts (the only method defined there).
    pub method: Option<PressureMethod>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    Periodic,
    Bowen,
    Grassmann,
    Transfer,
}

impl PressureMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PressureMethod::Periodic => "periodic",
            PressureMethod::Bowen => "bowen",
            PressureMethod::Grassmann => "grassmann",
            PressureMethod::Transfer => "transfer",
        }
    }
}

/// Cross-validation slack.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Allowed spread between estimator routes. Default 0.1.
    pub tolerance: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection { tolerance: 0.1 }
    }
}

/// Raw config bytes plus the parsed document; the bytes feed the manifest
/// hash so it fingerprints exactly what the user wrote.
pub struct LoadedConfig {
    pub raw: Vec<u8>,
    pub file: ConfigFile,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let raw = fs::read(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let text = std::str::from_utf8(&raw).context("config is not valid UTF-8")?;
    let file: ConfigFile = toml::from_str(text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    Ok(LoadedConfig { raw, file })
}

/// A config names either a smooth torus map or a subshift; most commands
/// accept only the smooth half.
pub enum BuiltSystem {
    Smooth(SystemDef),
    Shift(SftModel),
}

pub fn build_system(spec: &SystemSpec) -> Result<BuiltSystem> {
    Ok(match spec {
        SystemSpec::Cat => BuiltSystem::Smooth(SystemDef::cat_map()),
        SystemSpec::Linear { matrix } => {
            BuiltSystem::Smooth(SystemDef::linear_torus(*matrix).context("bad [system] matrix")?)
        }
        SystemSpec::Standard { k } => {
            BuiltSystem::Smooth(SystemDef::standard_map(*k).context("bad [system] k")?)
        }
        SystemSpec::Kick { amplitude } => BuiltSystem::Smooth(
            SystemDef::vertical_kick(*amplitude).context("bad [system] amplitude")?,
        ),
        SystemSpec::Sft { rows } => {
            BuiltSystem::Shift(SftModel::from_rows(rows).context("bad [system] rows")?)
        }
    })
}

/// Potential for a smooth system. Symbol and edge weights are rejected
/// here; they only make sense on subshifts.
pub fn build_potential(spec: &PotentialSpec) -> Result<Potential> {
    Ok(match spec {
        PotentialSpec::Zero => Potential::zero(),
        PotentialSpec::Constant { value } => {
            if !value.is_finite() {
                bail!("[potential] value must be finite");
            }
            Potential::Constant(*value)
        }
        PotentialSpec::Expression { formula } => {
            Potential::Expression(Expr::parse(formula).context("bad [potential] formula")?)
        }
        PotentialSpec::Geometric { m } => {
            if !(1..=64).contains(m) {
                bail!("[potential] geometric order m must lie in 1..=64");
            }
            Potential::Geometric { m: *m }
        }
        PotentialSpec::Symbol { .. } | PotentialSpec::Edge { .. } => {
            bail!("symbol and edge potentials apply to subshifts only")
        }
    })
}

/// Fold the potential into a subshift model; the transfer matrix carries
/// the weights itself.
pub fn weight_shift(model: SftModel, spec: &PotentialSpec) -> Result<SftModel> {
    Ok(match spec {
        PotentialSpec::Zero => model,
        PotentialSpec::Constant { value } => {
            if !value.is_finite() {
                bail!("[potential] value must be finite");
            }
            let n = model.symbols();
            model
                .with_symbol_potential(&vec![*value; n])
                .context("bad constant weights")?
        }
        PotentialSpec::Symbol { weights } => {
            model.with_symbol_potential(weights).context("bad [potential] weights")?
        }
        PotentialSpec::Edge { table } => {
            model.with_edge_potential(table).context("bad [potential] table")?
        }
        PotentialSpec::Expression { .. } | PotentialSpec::Geometric { .. } => {
            bail!("expression and geometric potentials apply to smooth systems only")
        }
    })
}

/// One-line description of the configured potential for summaries.
pub fn describe_potential(spec: &PotentialSpec) -> String {
    match spec {
        PotentialSpec::Zero => "constant 0".to_string(),
        PotentialSpec::Constant { value } => format!("constant {value}"),
        PotentialSpec::Expression { formula } => format!("expression {formula}"),
        PotentialSpec::Geometric { m } => format!("geometric m={m}"),
        PotentialSpec::Symbol { weights } => format!("symbol weights {weights:?}"),
        PotentialSpec::Edge { table } => format!("edge weights {table:?}"),
    }
}
