//! Run orchestration behind the `homindex` binary: TOML config parsing with
//! strict validation, command dispatch into the library, and serialized
//! reports (JSON report document plus optional CSV grid export).
//!
//! A run is fully determined by its resolved config and seed: reports are
//! byte-identical across worker counts (timing excluded), so the echoed
//! config in the report reproduces the run.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::bundles::{self, HypothesisReport, IndexBundleW1};
use crate::error::{Error, Result};
use crate::fredholm;
use crate::hamiltonian::{HamiltonianFamily, ParameterPoint, ScanConfig, Tolerances, WrapReport};
use crate::scenarios::{self, MoebiusConfig};
use crate::{acceptance, numerics};

/// The commands the binary exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Parity of the built-in diagonal path over [-1, 1].
    Parity,
    /// Closed-loop parity of the truncated loop, with segment decomposition.
    LoopParity,
    /// w1 of the asymptotic stable bundles of a scenario along the first
    /// torus coordinate.
    W1,
    /// Kernel scan over the scenario's parameter torus.
    Scan,
    /// The full acceptance suite.
    Verify,
    /// End-to-end bifurcation pipeline report for a scenario.
    ScenarioReport,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Parity => "parity",
            Command::LoopParity => "loop-parity",
            Command::W1 => "w1",
            Command::Scan => "scan",
            Command::Verify => "verify",
            Command::ScenarioReport => "scenario-report",
        }
    }
}

/// Scenario selection plus its parameters; only the fields that apply to the
/// chosen scenario are consulted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    /// "moebius" or "pejsachowicz".
    pub name: String,
    /// Torus dimension (pejsachowicz).
    pub m: Option<usize>,
    /// Asymptotic strength at +infinity (moebius).
    pub a_plus: Option<f64>,
    /// Asymptotic strength at -infinity (moebius).
    pub a_minus: Option<f64>,
    /// Sigmoid rate of the finite-time interpolation (moebius).
    pub profile_rate: Option<f64>,
    /// Extra inert torus coordinates (moebius).
    pub inert_dims: Option<usize>,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<Box<dyn HamiltonianFamily>> {
        match self.name.as_str() {
            "moebius" => {
                let defaults = MoebiusConfig::default();
                let config = MoebiusConfig {
                    a_plus: self.a_plus.unwrap_or(defaults.a_plus),
                    a_minus: self.a_minus.unwrap_or(defaults.a_minus),
                    profile_rate: self.profile_rate.unwrap_or(defaults.profile_rate),
                    inert_dims: self.inert_dims.unwrap_or(defaults.inert_dims),
                };
                Ok(Box::new(scenarios::moebius_family(config)?))
            }
            "pejsachowicz" => {
                let m = self.m.unwrap_or(1);
                Ok(Box::new(scenarios::pejsachowicz_family(m)?))
            }
            other => Err(Error::ValidationError(format!(
                "unknown scenario name {other:?} (expected \"moebius\" or \"pejsachowicz\")"
            ))),
        }
    }

    fn torus_dim(&self) -> usize {
        match self.name.as_str() {
            "pejsachowicz" => self.m.unwrap_or(1),
            _ => 1 + self.inert_dims.unwrap_or(0),
        }
    }
}

fn default_horizon() -> f64 {
    20.0
}
fn default_tol_angle() -> f64 {
    1e-3
}
fn default_window_n() -> usize {
    4
}
fn default_samples() -> usize {
    64
}

/// A fully resolved run configuration. One flat document per run, no
/// inheritance; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    /// 0 lets the runtime choose the worker count.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_tol_angle")]
    pub tol_angle: f64,
    #[serde(default = "default_window_n")]
    pub window_n: usize,
    /// Path samples, loop samples per segment, or loop-transport samples,
    /// depending on the command.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Grid resolution per torus coordinate; empty means a per-scenario
    /// default (256 on the circle, 64 per coordinate above).
    #[serde(default)]
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Also export the scan grid as CSV (one row per cell).
    #[serde(default)]
    pub grid_csv: bool,
    #[serde(default)]
    pub scenario: Option<ScenarioSpec>,
}

/// Parses a TOML config document, validates it, and resolves defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut config: RunConfig =
        toml::from_str(text).map_err(|e| Error::ConfigError(e.to_string()))?;
    resolve_and_validate(&mut config)?;
    Ok(config)
}

/// Validates ranges and cross-field constraints and fills derived defaults.
/// Safe to call again after flag overrides.
pub fn resolve_and_validate(config: &mut RunConfig) -> Result<()> {
    if !(config.horizon > 0.0 && config.horizon <= 1e4) {
        return Err(Error::ValidationError(format!(
            "horizon {} outside (0, 1e4]",
            config.horizon
        )));
    }
    if !(config.tol_angle > 0.0 && config.tol_angle < 0.5) {
        return Err(Error::ValidationError(format!(
            "tol_angle {} outside (0, 0.5)",
            config.tol_angle
        )));
    }
    if config.window_n == 0 || config.window_n > 50 {
        return Err(Error::ValidationError(format!(
            "window_n {} outside 1..=50",
            config.window_n
        )));
    }
    if config.command == Command::LoopParity && !config.window_n.is_multiple_of(2) {
        return Err(Error::ValidationError(format!(
            "window_n {} must be even for loop-parity (the cyclic conjugator needs determinant +1)",
            config.window_n
        )));
    }
    if config.samples < 2 || config.samples > 100_000 {
        return Err(Error::ValidationError(format!(
            "samples {} outside 2..=100000",
            config.samples
        )));
    }
    if config.command == Command::LoopParity && config.samples < 8 {
        return Err(Error::ValidationError(
            "loop-parity needs at least 8 samples per segment".into(),
        ));
    }
    if config.workers > 1024 {
        return Err(Error::ValidationError(format!(
            "workers {} outside 0..=1024",
            config.workers
        )));
    }
    let needs_scenario = matches!(
        config.command,
        Command::W1 | Command::Scan | Command::ScenarioReport
    );
    if needs_scenario {
        let spec = config.scenario.as_ref().ok_or_else(|| {
            Error::ValidationError(format!(
                "command {:?} needs a [scenario] section",
                config.command.as_str()
            ))
        })?;
        spec.build()?; // validates name and parameters
        let m = spec.torus_dim();
        if m > 8 {
            return Err(Error::ValidationError(format!(
                "torus dimension {m} too large (limit 8)"
            )));
        }
        if config.resolution.is_empty() {
            config.resolution = if m == 1 { vec![256] } else { vec![64; m] };
        } else if config.resolution.len() == 1 && m > 1 {
            config.resolution = vec![config.resolution[0]; m];
        } else if config.resolution.len() != m {
            return Err(Error::ValidationError(format!(
                "{} resolutions given for a {}-torus",
                config.resolution.len(),
                m
            )));
        }
        if config.resolution.iter().any(|r| !(2..=4096).contains(r)) {
            return Err(Error::ValidationError(
                "each resolution must be in 2..=4096".into(),
            ));
        }
        let total: usize = config.resolution.iter().product();
        if total > 1 << 22 {
            return Err(Error::ValidationError(format!(
                "grid of {total} cells is too large (limit 2^22)"
            )));
        }
    }
    Ok(())
}

/// Results payload of a run, tagged by command.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Parity {
        window_n: usize,
        samples: usize,
        parity: i32,
        spectral_flow: i32,
    },
    LoopParity {
        window_n: usize,
        samples_per_segment: usize,
        parity: i32,
        segments: Vec<SegmentParity>,
    },
    W1 {
        loop_samples: usize,
        #[serde(flatten)]
        w1: IndexBundleW1,
    },
    Scan {
        resolutions: Vec<usize>,
        cells: usize,
        flagged_count: usize,
        flagged: Vec<Vec<usize>>,
        wrap: WrapReport,
        cell_errors: Vec<(Vec<usize>, String)>,
        csv_path: Option<String>,
    },
    Hypotheses {
        kernel_free_sample: Option<Vec<f64>>,
        w1_plus: Option<String>,
        w1_minus: Option<String>,
        w1_index: Option<String>,
        w1_error: Option<String>,
        predicts_bifurcation: bool,
        flagged_count: usize,
        flagged_nonempty: bool,
        confirmed: bool,
        wrap: WrapReport,
    },
    Verify {
        criteria: Vec<CriterionSummary>,
        passed: usize,
        failed: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentParity {
    pub name: String,
    pub parity: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionSummary {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub details: String,
}

/// The report document of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Results,
    pub diagnostics: Vec<String>,
    pub timing_seconds: f64,
}

impl Report {
    /// Deterministic body: the full report minus timing and the worker
    /// count. Byte-identical for identical config and seed, regardless of
    /// how many workers executed the run.
    pub fn body_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("timing_seconds");
            if let Some(config) = map.get_mut("config").and_then(|c| c.as_object_mut()) {
                config.remove("workers");
            }
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    pub fn full_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Process exit code this report asks for: 0 on success, 4 when a
    /// hypothesis check concluded negatively, 1 when verification failed.
    pub fn exit_code(&self) -> i32 {
        match &self.results {
            Results::Hypotheses {
                predicts_bifurcation,
                ..
            } => {
                if *predicts_bifurcation {
                    0
                } else {
                    4
                }
            }
            Results::Verify { failed, .. } => {
                if *failed == 0 {
                    0
                } else {
                    1
                }
            }
            _ => 0,
        }
    }

    /// One-paragraph human summary for stdout.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        match &self.results {
            Results::Parity {
                parity,
                spectral_flow,
                window_n,
                ..
            } => {
                let _ = writeln!(
                    out,
                    "parity over [-1, 1] at window {window_n}: {parity:+} (spectral flow mod 2: {spectral_flow:+})"
                );
            }
            Results::LoopParity {
                parity, segments, ..
            } => {
                let decomposition: Vec<String> = segments
                    .iter()
                    .map(|s| format!("{}: {:+}", s.name, s.parity))
                    .collect();
                let _ = writeln!(
                    out,
                    "closed-loop parity: {parity:+} with segments [{}]",
                    decomposition.join(", ")
                );
            }
            Results::W1 { w1, .. } => {
                let _ = writeln!(
                    out,
                    "w1(E^s(+inf)) = {}, w1(E^s(-inf)) = {}, w1(index bundle) = {}",
                    w1.w1_plus, w1.w1_minus, w1.w1_index
                );
            }
            Results::Scan {
                flagged_count,
                cells,
                wrap,
                cell_errors,
                ..
            } => {
                let _ = writeln!(
                    out,
                    "scan: {flagged_count} flagged of {cells} cells; wraps torus: {}; cell errors: {}",
                    wrap.nontrivial,
                    cell_errors.len()
                );
            }
            Results::Hypotheses {
                kernel_free_sample,
                w1_index,
                predicts_bifurcation,
                flagged_nonempty,
                ..
            } => {
                let _ = writeln!(
                    out,
                    "kernel-free sample: {}; w1(index) = {}; predicts bifurcation: {}; scan confirms nonempty candidate set: {}",
                    kernel_free_sample.is_some(),
                    w1_index.as_deref().unwrap_or("unavailable"),
                    predicts_bifurcation,
                    flagged_nonempty
                );
            }
            Results::Verify {
                criteria,
                passed,
                failed,
            } => {
                for c in criteria {
                    let _ = writeln!(
                        out,
                        "criterion {:2} [{}] {} — {}",
                        c.id,
                        if c.passed { "pass" } else { "FAIL" },
                        c.name,
                        c.details
                    );
                }
                let _ = writeln!(out, "{passed} passed, {failed} failed");
            }
        }
        out
    }
}

/// The canonical embedded loop: the first torus coordinate runs once around
/// the circle, all other coordinates stay at 0.
pub fn first_coordinate_loop(m: usize) -> impl Fn(f64) -> ParameterPoint {
    use std::f64::consts::PI;
    move |tau: f64| {
        let mut angles = vec![0.0; m];
        angles[0] = -PI + 2.0 * PI * tau;
        ParameterPoint::new(angles)
    }
}

/// Executes a resolved config and assembles the report. Output files (report
/// document, optional CSV) are written into `out_dir` when set.
pub fn run(config: &RunConfig) -> Result<Report> {
    let mut config = config.clone();
    resolve_and_validate(&mut config)?;
    let started = std::time::Instant::now();

    let outcome = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Numerical(format!("worker pool: {e}")))?;
        pool.install(|| dispatch(&config))?
    } else {
        dispatch(&config)?
    };
    let (results, diagnostics) = outcome;

    let report = Report {
        command: config.command.as_str().to_string(),
        config: config.clone(),
        results,
        diagnostics,
        timing_seconds: started.elapsed().as_secs_f64(),
    };

    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), report.full_json())?;
    }
    Ok(report)
}

fn dispatch(config: &RunConfig) -> Result<(Results, Vec<String>)> {
    let mut diagnostics = Vec::new();
    let results = match config.command {
        Command::Parity => {
            let path = fredholm::tilde_l1_path(config.window_n, config.samples)?;
            let parity = fredholm::parity_segment(&path)?;
            let flow = fredholm::spectral_flow_mod2(&path)?;
            if parity != flow {
                diagnostics.push("parity and spectral flow disagree".into());
            }
            Results::Parity {
                window_n: config.window_n,
                samples: config.samples,
                parity: parity.value(),
                spectral_flow: flow.value(),
            }
        }
        Command::LoopParity => {
            let path = fredholm::tilde_loop(config.window_n, config.samples)?;
            let loop_parity = fredholm::closed_loop_parity(&path)?;
            Results::LoopParity {
                window_n: config.window_n,
                samples_per_segment: config.samples,
                parity: loop_parity.parity.value(),
                segments: loop_parity
                    .segments
                    .into_iter()
                    .map(|(name, parity)| SegmentParity {
                        name,
                        parity: parity.value(),
                    })
                    .collect(),
            }
        }
        Command::W1 => {
            let spec = config.scenario.as_ref().expect("validated");
            let family = spec.build()?;
            let loop_map = first_coordinate_loop(family.torus_dim());
            let tols = tolerances_from(config);
            let w1 =
                bundles::index_bundle_w1_loop(family.as_ref(), loop_map, config.samples, &tols)?;
            Results::W1 {
                loop_samples: config.samples,
                w1,
            }
        }
        Command::Scan => {
            let spec = config.scenario.as_ref().expect("validated");
            let family = spec.build()?;
            let scan_config = ScanConfig {
                resolutions: config.resolution.clone(),
                horizon: config.horizon,
                tolerances: tolerances_from(config),
            };
            let scan = crate::hamiltonian::scan_bifurcation_set(family.as_ref(), &scan_config)?;
            diagnostics.extend(scan.warnings.iter().cloned());
            for (index, message) in scan.cell_errors.iter().take(16) {
                diagnostics.push(format!("cell {index:?}: {message}"));
            }
            let csv_path = if config.grid_csv {
                let dir = config
                    .out_dir
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("."));
                std::fs::create_dir_all(&dir)?;
                let path = dir.join("cells.csv");
                std::fs::write(&path, scan_csv(&scan))?;
                Some(path.display().to_string())
            } else {
                None
            };
            Results::Scan {
                resolutions: scan.resolutions.clone(),
                cells: scan.cells.len(),
                flagged_count: scan.flagged_count(),
                flagged: scan.flagged.clone(),
                wrap: scan.wrap.clone(),
                cell_errors: scan.cell_errors.clone(),
                csv_path,
            }
        }
        Command::ScenarioReport => {
            let spec = config.scenario.as_ref().expect("validated");
            let family = spec.build()?;
            let loop_map = first_coordinate_loop(family.torus_dim());
            let scan_config = ScanConfig {
                resolutions: config.resolution.clone(),
                horizon: config.horizon,
                tolerances: tolerances_from(config),
            };
            let report = bundles::check_theorem_hypotheses(
                family.as_ref(),
                loop_map,
                &scan_config,
                config.samples,
            )?;
            diagnostics.extend(report.scan.warnings.iter().cloned());
            hypotheses_results(&report)
        }
        Command::Verify => {
            let criteria = acceptance::run_all(config.seed);
            let passed = criteria.iter().filter(|c| c.passed).count();
            let failed = criteria.len() - passed;
            Results::Verify {
                criteria: criteria
                    .into_iter()
                    .map(|c| CriterionSummary {
                        id: c.id,
                        name: c.name.to_string(),
                        passed: c.passed,
                        details: c.details,
                    })
                    .collect(),
                passed,
                failed,
            }
        }
    };
    Ok((results, diagnostics))
}

fn hypotheses_results(report: &HypothesisReport) -> Results {
    Results::Hypotheses {
        kernel_free_sample: report
            .kernel_free_sample
            .as_ref()
            .map(|p| p.angles().to_vec()),
        w1_plus: report.w1.as_ref().map(|w| w.w1_plus.to_string()),
        w1_minus: report.w1.as_ref().map(|w| w.w1_minus.to_string()),
        w1_index: report.w1.as_ref().map(|w| w.w1_index.to_string()),
        w1_error: report.w1_error.clone(),
        predicts_bifurcation: report.predicts_bifurcation,
        flagged_count: report.scan.flagged_count(),
        flagged_nonempty: report.flagged_nonempty,
        confirmed: report.predicts_bifurcation && report.flagged_nonempty,
        wrap: report.scan.wrap.clone(),
    }
}

fn tolerances_from(config: &RunConfig) -> Tolerances {
    Tolerances {
        kernel_angle: config.tol_angle,
        ..Tolerances::default()
    }
}

/// Plain CSV of the scan grid: torus coordinates, smallest principal angle,
/// detected kernel dimension. One row per cell, lexicographic order.
pub fn scan_csv(scan: &crate::hamiltonian::ScanResult) -> String {
    let m = scan.resolutions.len();
    let mut out = String::new();
    for j in 0..m {
        let _ = write!(out, "theta_{},", j + 1);
    }
    out.push_str("smallest_angle,kernel_dim\n");
    for cell in &scan.cells {
        for angle in cell.point.angles() {
            let _ = write!(out, "{angle},");
        }
        let _ = writeln!(out, "{},{}", cell.smallest_angle, cell.kernel_dim);
    }
    out
}

// Keep a compile-time assertion that Frame alignment tolerances the CLI
// relies on stay exported.
const _: f64 = numerics::ALIGN_GAP_LIMIT;
