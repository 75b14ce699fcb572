//! Command pipelines: turn a parsed config into core calls, collect the
//! artifact set in memory, then write everything in one pass.
//!
//! Computation strictly precedes file creation. A config that fails
//! validation, or a budget the library rejects, must leave no artifacts
//! behind; only write errors can produce a partial set.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use pressure_lab_core::domination::{self, Verdict};
use pressure_lab_core::export;
use pressure_lab_core::orbits::find_periodic_orbits_capped;
use pressure_lab_core::pressure::bowen::bowen_levels;
use pressure_lab_core::pressure::grassmann::{grassmann_pressure, sigma_k};
use pressure_lab_core::pressure::sft::sft_pressure;
use pressure_lab_core::pressure::{cross_validate, periodic_pressure, ValidationBudget};
use pressure_lab_core::transition::transition_report;
use pressure_lab_core::{OrbitCatalog, OrbitClass, Potential, SystemDef, Vec2};

use crate::config::{self, BuiltSystem, ConfigFile, PressureMethod};
use crate::manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Orbits,
    Pressure,
    Sigma,
    Domination,
    Transition,
    Validate,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Orbits => "orbits",
            CommandKind::Pressure => "pressure",
            CommandKind::Sigma => "sigma",
            CommandKind::Domination => "domination",
            CommandKind::Transition => "transition",
            CommandKind::Validate => "validate",
        }
    }
}

/// Resolved invocation, independent of the argument parser.
pub struct Invocation<'a> {
    pub command: CommandKind,
    pub config_path: &'a Path,
    pub out_override: Option<&'a Path>,
    pub seed_override: Option<u64>,
    pub threads: Option<usize>,
    pub quiet: bool,
}

pub enum Outcome {
    Complete,
    /// Partial results were written; the string says which budget ran out.
    Exhausted(String),
}

/// Everything a command produces, still in memory.
#[derive(Debug)]
struct Bundle {
    /// (file name, contents); includes summary.txt, excludes the manifest.
    files: Vec<(&'static str, String)>,
    summary: String,
    exhausted: Option<String>,
}

pub fn execute(inv: &Invocation) -> Result<Outcome> {
    let loaded = config::load(inv.config_path)?;
    let threads = resolve_threads(inv.threads)?;
    let seed = inv.seed_override.or(loaded.file.seed);

    let bundle = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .context("cannot build the worker pool")?;
            pool.install(|| compute(inv.command, &loaded.file, seed))?
        }
        None => compute(inv.command, &loaded.file, seed)?,
    };

    let out_dir: PathBuf = inv
        .out_override
        .map(Path::to_path_buf)
        .or_else(|| loaded.file.output.clone())
        .unwrap_or_else(|| PathBuf::from("pressure-lab-out"));
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
    for (name, contents) in &bundle.files {
        fs::write(out_dir.join(name), contents)
            .with_context(|| format!("cannot write {}", out_dir.join(name).display()))?;
    }
    let names: Vec<String> = bundle.files.iter().map(|(n, _)| n.to_string()).collect();
    let config_path = inv.config_path.display().to_string();
    let manifest_text =
        manifest::render(inv.command.as_str(), &config_path, &loaded.raw, seed, &names)?;
    fs::write(out_dir.join("run_manifest.toml"), manifest_text)
        .with_context(|| format!("cannot write {}", out_dir.join("run_manifest.toml").display()))?;

    if !inv.quiet {
        print!("{}", bundle.summary);
    }
    Ok(match bundle.exhausted {
        Some(why) => Outcome::Exhausted(why),
        None => Outcome::Complete,
    })
}

/// `--threads`, else the PRESSURE_LAB_THREADS variable, else the default
/// pool. The count never influences results, only wall time.
fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(t) = flag {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        return Ok(Some(t));
    }
    match std::env::var("PRESSURE_LAB_THREADS") {
        Ok(raw) => {
            let t: usize = raw
                .trim()
                .parse()
                .context("PRESSURE_LAB_THREADS must be a positive integer")?;
            if t == 0 {
                bail!("PRESSURE_LAB_THREADS must be at least 1");
            }
            Ok(Some(t))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("PRESSURE_LAB_THREADS is not valid unicode"),
    }
}

fn compute(kind: CommandKind, file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    match kind {
        CommandKind::Orbits => run_orbits(file, seed),
        CommandKind::Pressure => run_pressure(file, seed),
        CommandKind::Sigma => run_sigma(file, seed),
        CommandKind::Domination => run_domination(file, seed),
        CommandKind::Transition => run_transition(file, seed),
        CommandKind::Validate => run_validate(file, seed),
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| anyhow!("this command samples; set `seed` in the config or pass --seed"))
}

/// Smooth system plus potential, or a clear refusal for subshift configs.
fn smooth(file: &ConfigFile) -> Result<(SystemDef, Potential)> {
    match config::build_system(&file.system)? {
        BuiltSystem::Smooth(sys) => {
            let pot = config::build_potential(&file.potential)?;
            Ok((sys, pot))
        }
        BuiltSystem::Shift(_) => {
            bail!("this command needs a smooth system; subshifts support only `pressure`")
        }
    }
}

fn catalog_for(file: &ConfigFile, sys: &SystemDef, seed: u64) -> Result<OrbitCatalog> {
    let o = &file.orbits;
    find_periodic_orbits_capped(sys, o.max_period, o.grid_density, seed, o.max_orbits)
        .context("orbit search")
}

fn catalog_exhaustion(catalog: &OrbitCatalog, cap: usize) -> Option<String> {
    (!catalog.exhaustive()).then(|| format!("orbit catalog hit its cap of {cap} orbits"))
}

fn header(command: &str, system: &str, potential: &str, seed: Option<u64>) -> String {
    let seed_line = match seed {
        Some(s) => format!("seed: {s}"),
        None => "seed: none".to_string(),
    };
    format!("command: {command}\nsystem: {system}\npotential: {potential}\n{seed_line}\n\n")
}

fn run_orbits(file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    let (sys, _) = smooth(file)?;
    let seed = require_seed(seed)?;
    let catalog = catalog_for(file, &sys, seed)?;
    let mut classes = [0usize; 3];
    for orbit in catalog.orbits() {
        let slot = match orbit.classification() {
            OrbitClass::Saddle => 0,
            OrbitClass::Elliptic => 1,
            OrbitClass::Parabolic => 2,
        };
        classes[slot] += 1;
    }
    let stats = catalog.stats();
    let summary = format!(
        "{}orbits: {}\nmax period searched: {}\nexhaustive: {}\nseeds tried: {}\nseeds discarded: {}\nduplicates merged: {}\nsaddles: {}\nelliptic: {}\nparabolic: {}\n",
        header("orbits", &sys.describe(), &config::describe_potential(&file.potential), Some(seed)),
        catalog.len(),
        catalog.max_period(),
        catalog.exhaustive(),
        stats.seeds_tried,
        stats.seeds_discarded,
        stats.duplicates_merged,
        classes[0],
        classes[1],
        classes[2],
    );
    let exhausted = catalog_exhaustion(&catalog, file.orbits.max_orbits);
    Ok(Bundle {
        files: vec![
            ("orbits.csv", export::catalog_csv(&catalog)),
            ("summary.txt", summary.clone()),
        ],
        summary,
        exhausted,
    })
}

fn run_pressure(file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    match config::build_system(&file.system)? {
        BuiltSystem::Shift(model) => {
            match file.pressure.method {
                None | Some(PressureMethod::Transfer) => {}
                Some(other) => {
                    bail!("method `{}` needs a smooth system", other.as_str())
                }
            }
            let model = config::weight_shift(model, &file.potential)?;
            let desc = format!(
                "subshift on {} symbols with {} allowed edges",
                model.symbols(),
                model.edge_count()
            );
            let est = sft_pressure(&model).context("transfer matrix")?;
            let summary = format!(
                "{}{}",
                header("pressure", &desc, &config::describe_potential(&file.potential), seed),
                export::estimate_summary(&est)
            );
            Ok(Bundle {
                files: vec![
                    ("pressure.csv", export::series_csv("n", "value", &est.series)),
                    ("summary.txt", summary.clone()),
                ],
                summary,
                exhausted: None,
            })
        }
        BuiltSystem::Smooth(sys) => {
            let pot = config::build_potential(&file.potential)?;
            let method = file.pressure.method.unwrap_or(PressureMethod::Periodic);
            let head = |s: Option<u64>| {
                header(
                    "pressure",
                    &sys.describe(),
                    &config::describe_potential(&file.potential),
                    s,
                )
            };
            match method {
                PressureMethod::Periodic => {
                    let seed = require_seed(seed)?;
                    let catalog = catalog_for(file, &sys, seed)?;
                    let est = periodic_pressure(&catalog, &sys, &pot)?;
                    let summary =
                        format!("{}{}", head(Some(seed)), export::estimate_summary(&est));
                    let exhausted = catalog_exhaustion(&catalog, file.orbits.max_orbits);
                    Ok(Bundle {
                        files: vec![
                            ("pressure.csv", export::series_csv("n", "value", &est.series)),
                            ("summary.txt", summary.clone()),
                        ],
                        summary,
                        exhausted,
                    })
                }
                PressureMethod::Bowen => {
                    // Spanning sets use deterministic grids; no seed needed.
                    let (est, levels) = bowen_levels(&sys, &pot, &file.bowen.budget())?;
                    let summary = format!("{}{}", head(seed), export::estimate_summary(&est));
                    let exhausted = levels
                        .last()
                        .is_none_or(|l| l.n < file.bowen.n_hi)
                        .then(|| "spanning set exceeded max_cover; record truncated".to_string());
                    Ok(Bundle {
                        files: vec![
                            ("pressure.csv", export::series_csv("n", "value", &est.series)),
                            ("levels.csv", export::bowen_levels_csv(&levels)),
                            ("summary.txt", summary.clone()),
                        ],
                        summary,
                        exhausted,
                    })
                }
                PressureMethod::Grassmann => {
                    let seed = require_seed(seed)?;
                    let est = grassmann_pressure(&sys, &pot, &file.sigma.budget(seed))?;
                    let summary =
                        format!("{}{}", head(Some(seed)), export::estimate_summary(&est));
                    Ok(Bundle {
                        files: vec![
                            ("pressure.csv", export::series_csv("n", "value", &est.series)),
                            ("summary.txt", summary.clone()),
                        ],
                        summary,
                        exhausted: None,
                    })
                }
                PressureMethod::Transfer => {
                    bail!("method `transfer` needs a subshift system")
                }
            }
        }
    }
}

fn run_sigma(file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    let (sys, pot) = smooth(file)?;
    let seed = require_seed(seed)?;
    let budget = file.sigma.budget(seed);
    let n_list: Vec<u32> = (1..=file.sigma.n_max.max(1)).collect();
    let s1 = sigma_k(&sys, &pot, 1, &n_list, &budget)?;
    let s2 = sigma_k(&sys, &pot, 2, &n_list, &budget)?;
    let summary = format!(
        "{}{}\n{}\ncombined upper bound: {}\n",
        header("sigma", &sys.describe(), &config::describe_potential(&file.potential), Some(seed)),
        export::estimate_summary(&s1),
        export::estimate_summary(&s2),
        export::fmt_f64(s1.value.max(s2.value)),
    );
    Ok(Bundle {
        files: vec![
            ("sigma1.csv", export::series_csv("n", "sup", &s1.series)),
            ("sigma2.csv", export::series_csv("n", "sup", &s2.series)),
            ("summary.txt", summary.clone()),
        ],
        summary,
        exhausted: None,
    })
}

fn run_domination(file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    let (sys, _) = smooth(file)?;
    let seed = require_seed(seed)?;
    let d = &file.domination;
    if d.n_values.is_empty() {
        bail!("domination.n_values must not be empty");
    }
    let max_n = *d.n_values.iter().max().expect("nonempty");
    let horizon = if d.horizon == 0 { domination::default_horizon(max_n) } else { d.horizon };
    let catalog = catalog_for(file, &sys, seed)?;
    let reports: Vec<_> = catalog
        .orbits()
        .iter()
        .map(|orbit| domination::n_domination_scan(&sys, orbit, &d.n_values, horizon))
        .collect::<Result<_, _>>()?;
    let start = match d.gap_start {
        Some([x, y]) => Vec2::new(x, y),
        None => catalog
            .orbits()
            .first()
            .map(|o| o.representative())
            .unwrap_or(Vec2::ZERO),
    };
    let gaps = domination::domination_gap(&sys, start, d.gap_length)?;

    let mut tallies = String::new();
    for &n in &d.n_values {
        let (mut yes, mut no, mut unknown) = (0usize, 0usize, 0usize);
        for r in &reports {
            for &(m, v) in &r.tested {
                if m == n {
                    match v {
                        Verdict::True => yes += 1,
                        Verdict::False => no += 1,
                        Verdict::Indeterminate => unknown += 1,
                    }
                }
            }
        }
        tallies.push_str(&format!(
            "N={n}: {yes} dominated, {no} not dominated, {unknown} indeterminate\n"
        ));
    }
    let summary = format!(
        "{}orbits tested: {}\nhorizon: {}\n{}gap series start: ({}, {})\ngap series length: {}\n",
        header(
            "domination",
            &sys.describe(),
            &config::describe_potential(&file.potential),
            Some(seed)
        ),
        reports.len(),
        horizon,
        tallies,
        export::fmt_f64(start.x),
        export::fmt_f64(start.y),
        gaps.len(),
    );
    let exhausted = catalog_exhaustion(&catalog, file.orbits.max_orbits);
    Ok(Bundle {
        files: vec![
            ("domination.csv", export::domination_csv(&reports)),
            ("gap.csv", export::gap_csv(&gaps)),
            ("summary.txt", summary.clone()),
        ],
        summary,
        exhausted,
    })
}

fn run_transition(file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    let (sys, _) = smooth(file)?;
    let seed = require_seed(seed)?;
    let sec = &file.transition;
    let grid = sec.t_grid()?;
    let catalog = catalog_for(file, &sys, seed)?;
    let report = transition_report(&catalog, &sys, sec.m, &grid, sec.candidate_tol)?;
    let pot = Potential::Geometric { m: sec.m };
    let summary = format!(
        "{}{}",
        // The command always runs the geometric family; the header shows
        // the potential actually used, not the configured one.
        header("transition", &sys.describe(), &pot.describe(), Some(seed)),
        export::transition_summary(&report),
    );
    let exhausted = catalog_exhaustion(&catalog, file.orbits.max_orbits);
    Ok(Bundle {
        files: vec![
            ("curve.csv", export::curve_csv(&report.curve)),
            (
                "candidates.csv",
                export::candidates_csv(&catalog, &sys, &pot, &report.candidates),
            ),
            ("summary.txt", summary.clone()),
        ],
        summary,
        exhausted,
    })
}

fn run_validate(file: &ConfigFile, seed: Option<u64>) -> Result<Bundle> {
    let (sys, pot) = smooth(file)?;
    let seed = require_seed(seed)?;
    let budget = ValidationBudget {
        max_period: file.orbits.max_period,
        orbit_grid: file.orbits.grid_density,
        seed,
        bowen: file.bowen.budget(),
        sigma: file.sigma.budget(seed),
        tolerance: file.validate.tolerance,
    };
    let cv = cross_validate(&sys, &pot, &budget)?;
    let mut table = String::from("method,bound,value\n");
    for est in &cv.estimates {
        table.push_str(&format!(
            "{},{},{}\n",
            est.method.as_str(),
            est.bound.as_str(),
            export::fmt_f64(est.value),
        ));
    }
    let mut summary = header(
        "validate",
        &sys.describe(),
        &config::describe_potential(&file.potential),
        Some(seed),
    );
    for est in &cv.estimates {
        summary.push_str(&export::estimate_summary(est));
        summary.push('\n');
    }
    summary.push_str(&format!(
        "spread: {}\nconsistent: {}\n",
        export::fmt_f64(cv.spread),
        cv.consistent,
    ));
    for v in &cv.violations {
        summary.push_str(&format!("violation: {v}\n"));
    }
    // Mirrors the flag wording in the periodic estimator; the catalog
    // itself is internal to cross_validate.
    let exhausted = cv.estimates[0]
        .flags
        .iter()
        .any(|f| f.contains("hit its cap"))
        .then(|| "orbit catalog hit the default cap".to_string())
        .or_else(|| {
            cv.estimates[2]
                .series
                .last()
                .is_none_or(|p| p.n + 1 < file.bowen.n_hi)
                .then(|| "spanning set exceeded max_cover; record truncated".to_string())
        });
    Ok(Bundle {
        files: vec![
            ("validation.csv", table),
            ("summary.txt", summary.clone()),
        ],
        summary,
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_config(extra: &str) -> ConfigFile {
        let doc = format!("seed = 5\n[system]\nkind = \"cat\"\n{extra}");
        toml::from_str(&doc).unwrap()
    }

    #[test]
    fn orbits_bundle_has_catalog_and_summary() {
        let bundle = run_orbits(&cat_config(""), Some(5)).unwrap();
        assert_eq!(bundle.files[0].0, "orbits.csv");
        assert!(bundle.files[0].1.starts_with("index,period"));
        assert!(bundle.summary.contains("command: orbits"));
        assert!(bundle.summary.contains("exhaustive: true"));
        assert!(bundle.exhausted.is_none());
    }

    #[test]
    fn tiny_orbit_cap_reports_exhaustion() {
        let file = cat_config("[orbits]\nmax_period = 3\nmax_orbits = 2\n");
        let bundle = run_orbits(&file, Some(5)).unwrap();
        assert!(bundle.exhausted.is_some());
        assert!(bundle.summary.contains("exhaustive: false"));
    }

    #[test]
    fn seed_is_required_for_sampling_commands() {
        let file = cat_config("");
        for kind in [
            CommandKind::Orbits,
            CommandKind::Sigma,
            CommandKind::Domination,
            CommandKind::Transition,
            CommandKind::Validate,
        ] {
            let err = compute(kind, &file, None).unwrap_err();
            assert!(err.to_string().contains("seed"), "{kind:?}: {err}");
        }
        // Deterministic methods run without one.
        let bowen = cat_config("[pressure]\nmethod = \"bowen\"\n[bowen]\nn_lo = 3\nn_hi = 5\ngrid_density = 128\n");
        assert!(run_pressure(&bowen, None).is_ok());
    }

    #[test]
    fn shift_pressure_needs_no_seed_and_rejects_other_commands() {
        let doc = "[system]\nkind = \"sft\"\nrows = [[1, 1], [1, 0]]\n";
        let file: ConfigFile = toml::from_str(doc).unwrap();
        let bundle = run_pressure(&file, None).unwrap();
        assert!(bundle.summary.contains("method: sft"));
        let err = compute(CommandKind::Orbits, &file, Some(1)).unwrap_err();
        assert!(err.to_string().contains("smooth"));
    }

    #[test]
    fn pressure_method_mismatches_are_rejected() {
        let smooth_cfg = cat_config("[pressure]\nmethod = \"transfer\"\n");
        assert!(run_pressure(&smooth_cfg, Some(1)).is_err());
        let doc = "[system]\nkind = \"sft\"\nrows = [[1, 1], [1, 1]]\n[pressure]\nmethod = \"bowen\"\n";
        let shift_cfg: ConfigFile = toml::from_str(doc).unwrap();
        assert!(run_pressure(&shift_cfg, None).is_err());
    }

    #[test]
    fn thread_env_fallback_parses_or_rejects() {
        // Only the flag path is exercised directly; the env path is covered
        // by the binary tests to keep this process's environment untouched.
        assert_eq!(resolve_threads(Some(3)).unwrap(), Some(3));
        assert!(resolve_threads(Some(0)).is_err());
    }
}
