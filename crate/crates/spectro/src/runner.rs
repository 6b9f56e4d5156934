//! Batch front-end: JSON run configurations, orchestration, and
//! deterministic file outputs.
//!
//! All randomness flows from the single master seed via named sub-streams,
//! so a manifest re-run as input reproduces identical outputs. Files are
//! written to a temporary name and atomically renamed; no output is left
//! partially written on error.

use crate::error::{Error, Result};
use crate::estimate::{
    assemble_estimate, coherence_table, find_peak, sample_raw_multi, uniform_grid, PeakReport,
    SampleMode,
};
use crate::evolve::{
    diagonalize, diagonalize_capped, Engine, ExactEngine, TrotterEngine, TrotterPlan,
    DEFAULT_DIAG_CAP,
};
use crate::filter::GaussianFilter;
use crate::models::{build_fermi_hubbard_1d, build_heisenberg, build_tfim};
use crate::momentum::{
    estimate_site_spectra, extract_dispersion, site_family, spatial_fourier_with,
    write_dispersion_csv,
};
use crate::noise::{
    apply_global_noise_raw, benchmark_decay, fit_lambda, mitigate, write_benchmark_csv,
    GlobalDepolarizingModel, LocalDepolarizingModel, NoiseModel, NoisyTrotterEngine,
};
use crate::pauli::{parse_pauli_sum, Pauli, PauliString, PauliSum};
use crate::resources::{required_ns, required_t, required_tau};
use crate::state::{prepare_state, BaseState, Gate, StatePrepSpec, StateVector};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Schema tag expected in run configurations.
pub const SCHEMA: &str = "spectro-run/1";

/// Auto-sampling guard: refuse to schedule more draws than this.
pub const MAX_AUTO_SAMPLES: u64 = 100_000_000;

/// Coherence tables are written alongside Trotter runs only up to this size;
/// exact runs reuse their own diagonalization at any supported size.
pub const TROTTER_COHERENCE_CAP: usize = 10;

fn config_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Heisenberg {
        n: usize,
        j: f64,
        h_z: f64,
        periodic: bool,
    },
    Tfim {
        n: usize,
        j: f64,
        h_x: f64,
        h_z: f64,
        periodic: bool,
    },
    FermiHubbard {
        n_sites: usize,
        t_hop: f64,
        u: f64,
    },
    PauliFile {
        path: String,
    },
}

impl ModelSpec {
    fn build(&self, base_dir: &Path) -> Result<PauliSum> {
        match self {
            ModelSpec::Heisenberg {
                n,
                j,
                h_z,
                periodic,
            } => build_heisenberg(*n, *j, *h_z, *periodic),
            ModelSpec::Tfim {
                n,
                j,
                h_x,
                h_z,
                periodic,
            } => build_tfim(*n, *j, *h_x, *h_z, *periodic),
            ModelSpec::FermiHubbard { n_sites, t_hop, u } => {
                build_fermi_hubbard_1d(*n_sites, *t_hop, *u)
            }
            ModelSpec::PauliFile { path } => {
                let full = base_dir.join(path);
                let text = fs::read_to_string(&full).map_err(|e| {
                    config_err("model.path", format!("cannot read {}: {e}", full.display()))
                })?;
                parse_pauli_sum(&text)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum BaseSpec {
    AllPlus,
    AllZero,
    /// Amplitudes as (re, im) pairs over the full computational basis.
    Custom(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    pub site: usize,
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl OpSpec {
    fn to_gate(&self) -> Result<Gate> {
        let angle = || {
            self.angle.ok_or_else(|| {
                config_err(
                    "state_prep.ops",
                    format!("gate '{}' needs an angle", self.gate),
                )
            })
        };
        match self.gate.as_str() {
            "x" => Ok(Gate::X),
            "y" => Ok(Gate::Y),
            "z" => Ok(Gate::Z),
            "rx" => Ok(Gate::Rx(angle()?)),
            "ry" => Ok(Gate::Ry(angle()?)),
            "rz" => Ok(Gate::Rz(angle()?)),
            other => Err(config_err(
                "state_prep.ops",
                format!("unknown gate '{other}' (expected x, y, z, rx, ry, rz)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StatePrepConfig {
    pub base: BaseSpec,
    #[serde(default)]
    pub ops: Vec<OpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

impl StatePrepConfig {
    fn to_spec(&self) -> Result<StatePrepSpec> {
        let base = match &self.base {
            BaseSpec::AllPlus => BaseState::AllPlus,
            BaseSpec::AllZero => BaseState::AllZero,
            BaseSpec::Custom(pairs) => BaseState::Custom(
                pairs
                    .iter()
                    .map(|&(re, im)| num_complex::Complex64::new(re, im))
                    .collect(),
            ),
        };
        let mut spec = StatePrepSpec::new(base);
        for op in &self.ops {
            spec = spec.with_op(op.site, op.to_gate()?);
        }
        if let Some(beta) = self.beta {
            spec = spec.with_beta(beta);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// One Pauli letter at one site.
    SitePauli { letter: char, site: usize },
    /// The per-site family of one letter (dispersion runs).
    SiteFamily { letter: char },
    /// A general operator from a Pauli-sum file.
    PauliFile { path: String },
}

fn parse_letter(letter: char) -> Result<Pauli> {
    match Pauli::from_char(letter) {
        Some(Pauli::I) | None => Err(config_err(
            "observable.letter",
            format!("'{letter}' is not a non-identity Pauli letter"),
        )),
        Some(p) => Ok(p),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    /// Explicit τ and cutoff T.
    Fixed { tau: f64, cutoff: f64 },
    /// Derive τ, T and N_s from the resource formulas. `gamma` and
    /// `gamma_j_weight` fall back to the ED coherence table when omitted.
    Auto {
        eps: f64,
        delta_fail: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_j_weight: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OmegaSpec {
    pub min: f64,
    pub max: f64,
    /// Grid step; an auto filter defaults it to ε/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Required for fixed filters; an auto filter fills it in when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EngineSpec {
    Exact,
    Trotter { steps_per_unit_time: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModelSpec {
    Global { lambda: f64 },
    Local { p_gate: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub model: NoiseModelSpec,
    #[serde(default)]
    pub mitigate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<usize>>,
    /// State used for the identity-equivalent benchmark circuits; defaults
    /// to the run's state_prep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark_state_prep: Option<StatePrepConfig>,
}

/// A full run configuration. Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub model: ModelSpec,
    pub state_prep: StatePrepConfig,
    pub observable: ObservableSpec,
    pub filter: FilterSpec,
    pub omega: OmegaSpec,
    pub sampling: SamplingSpec,
    pub engine: EngineSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    /// Peak-search windows; the full grid when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<(f64, f64)>>,
    /// Blank the k = 0 row in dispersion extraction (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remove_k_zero: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if config.schema != SCHEMA {
            return Err(config_err(
                "schema",
                format!("expected \"{SCHEMA}\", got \"{}\"", config.schema),
            ));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if let Some(resolution) = self.omega.resolution {
            if !(resolution > 0.0) {
                return Err(config_err("omega.resolution", "must be > 0"));
            }
        }
        if !(self.omega.min < self.omega.max) {
            return Err(config_err("omega", "needs min < max"));
        }
        match &self.filter {
            FilterSpec::Fixed { tau, cutoff } => {
                GaussianFilter::new(*tau, *cutoff).map_err(|e| config_err("filter", e))?;
                if self.omega.resolution.is_none() {
                    return Err(config_err(
                        "omega.resolution",
                        "required with a fixed filter (an auto filter defaults it to eps/2)",
                    ));
                }
                match self.sampling.n_samples {
                    None => {
                        return Err(config_err(
                            "sampling.n_samples",
                            "required with a fixed filter",
                        ))
                    }
                    Some(0) => return Err(config_err("sampling.n_samples", "must be >= 1")),
                    _ => {}
                }
            }
            FilterSpec::Auto {
                eps,
                delta_fail,
                gamma,
                gamma_j_weight,
            } => {
                if !(*eps > 0.0) {
                    return Err(config_err("filter.eps", "must be > 0"));
                }
                if !(*delta_fail > 0.0 && *delta_fail < 1.0) {
                    return Err(config_err("filter.delta_fail", "must lie in (0, 1)"));
                }
                // When both knobs are given the τ-formula preconditions are
                // checkable immediately.
                if let (Some(g), Some(w)) = (gamma, gamma_j_weight) {
                    required_tau(*g, *eps, *w).map_err(|e| config_err("filter", e))?;
                }
            }
        }
        if self.sampling.shots == Some(0) {
            return Err(config_err("sampling.shots", "must be >= 1 when present"));
        }
        if let EngineSpec::Trotter {
            steps_per_unit_time,
        } = self.engine
        {
            if !(steps_per_unit_time > 0.0) {
                return Err(config_err("engine.steps_per_unit_time", "must be > 0"));
            }
        }
        if let Some(noise) = &self.noise {
            match &noise.model {
                NoiseModelSpec::Global { lambda } => {
                    GlobalDepolarizingModel::new(*lambda)
                        .map_err(|e| config_err("noise.model.lambda", e))?;
                }
                NoiseModelSpec::Local { p_gate } => {
                    LocalDepolarizingModel::new(*p_gate)
                        .map_err(|e| config_err("noise.model.p_gate", e))?;
                }
            }
            if let Some(depths) = &noise.depths {
                if depths.is_empty() {
                    return Err(config_err("noise.depths", "must be nonempty when present"));
                }
            }
        }
        if let Some(windows) = &self.windows {
            for (a, b) in windows {
                if !(a < b) {
                    return Err(config_err("windows", format!("[{a}, {b}] is empty")));
                }
            }
        }
        Ok(())
    }
}

/// Filter, sample count and shot mode after resolving an auto branch.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSampling {
    pub tau: f64,
    pub cutoff: f64,
    pub n_samples: u64,
    pub shots: Option<u64>,
    pub seed: u64,
    /// Present when the filter was derived from the resource formulas.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auto: Option<AutoResolution>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AutoResolution {
    pub eps: f64,
    pub delta_fail: f64,
    pub gamma: f64,
    pub gamma_j_weight: f64,
    pub target_delta: Option<f64>,
}

/// Everything a run needs after config resolution.
struct Prepared {
    hamiltonian: PauliSum,
    psi0: StateVector,
    engine: Box<dyn Engine>,
    exact_ed: Option<crate::evolve::EDResult>,
    sampling: ResolvedSampling,
    grid: Vec<f64>,
}

fn resolve_auto_parameters(
    config: &RunConfig,
    hamiltonian: &PauliSum,
    psi0: &StateVector,
    observable: Option<&PauliSum>,
) -> Result<(GaussianFilter, u64, Option<AutoResolution>)> {
    match &config.filter {
        FilterSpec::Fixed { tau, cutoff } => {
            let f = GaussianFilter::new(*tau, *cutoff).map_err(|e| config_err("filter", e))?;
            Ok((f, self_samples(config)?, None))
        }
        FilterSpec::Auto {
            eps,
            delta_fail,
            gamma,
            gamma_j_weight,
        } => {
            let (gamma, weight, target_delta) = match (gamma, gamma_j_weight) {
                (Some(g), Some(w)) => (*g, *w, None),
                _ => {
                    // Derive the missing knobs from the ED oracle.
                    let o = observable.ok_or_else(|| {
                        config_err(
                            "filter",
                            "auto filter with a per-site family needs explicit gamma and gamma_j_weight",
                        )
                    })?;
                    let ed = diagonalize(hamiltonian).map_err(|e| {
                        match e {
                        Error::ResourceCap { .. } => config_err(
                            "filter",
                            "auto filter needs the ED oracle but the system exceeds the dense cap; \
                             supply gamma and gamma_j_weight manually",
                        ),
                        other => other,
                    }
                    })?;
                    let table = coherence_table(&ed, psi0, o)?;
                    let target = table
                        .transitions()
                        .iter()
                        .filter(|t| t.delta > 0.0 && t.gap.is_finite())
                        .max_by(|a, b| {
                            a.gamma
                                .re
                                .abs()
                                .partial_cmp(&b.gamma.re.abs())
                                .expect("finite weights")
                        })
                        .filter(|t| t.gamma.re.abs() > 0.0)
                        .ok_or_else(|| {
                            config_err(
                                "filter",
                                "the ED coherence table exposes no usable transition; \
                                 supply gamma and gamma_j_weight manually",
                            )
                        })?;
                    (
                        gamma.unwrap_or(target.gap),
                        gamma_j_weight.unwrap_or(target.gamma.re.abs().min(1.0)),
                        Some(target.delta),
                    )
                }
            };
            let tau = required_tau(gamma, *eps, weight).map_err(|e| config_err("filter", e))?;
            let cutoff = required_t(tau, *eps).map_err(|e| config_err("filter", e))?;
            let n_samples = match config.sampling.n_samples {
                Some(n) => n,
                None => {
                    let n = required_ns(*eps, weight, tau, *delta_fail)
                        .map_err(|e| config_err("filter", e))?;
                    if n > MAX_AUTO_SAMPLES {
                        return Err(config_err(
                            "sampling.n_samples",
                            format!(
                                "auto-derived N_s = {n} exceeds the {MAX_AUTO_SAMPLES} guard; \
                                 set n_samples explicitly"
                            ),
                        ));
                    }
                    n
                }
            };
            let f = GaussianFilter::new(tau, cutoff).map_err(|e| config_err("filter", e))?;
            Ok((
                f,
                n_samples,
                Some(AutoResolution {
                    eps: *eps,
                    delta_fail: *delta_fail,
                    gamma,
                    gamma_j_weight: weight,
                    target_delta,
                }),
            ))
        }
    }
}

fn self_samples(config: &RunConfig) -> Result<u64> {
    config
        .sampling
        .n_samples
        .ok_or_else(|| config_err("sampling.n_samples", "required with a fixed filter"))
}

fn prepare(config: &RunConfig, base_dir: &Path, observable: Option<&PauliSum>) -> Result<Prepared> {
    let hamiltonian = config.model.build(base_dir)?;
    let n = hamiltonian.n_qubits();
    let psi0 = prepare_state(&config.state_prep.to_spec()?, n)?;
    let (filter, n_samples, auto) =
        resolve_auto_parameters(config, &hamiltonian, &psi0, observable)?;
    // An auto filter defaults the grid step to half the target precision.
    let resolution = match (config.omega.resolution, &auto) {
        (Some(r), _) => r,
        (None, Some(a)) => a.eps / 2.0,
        (None, None) => unreachable!("validation requires a resolution for fixed filters"),
    };
    let grid = uniform_grid(config.omega.min, config.omega.max, resolution)?;

    let mut exact_ed = None;
    let engine: Box<dyn Engine> = match (&config.engine, &config.noise) {
        (
            EngineSpec::Exact,
            Some(NoiseSpec {
                model: NoiseModelSpec::Local { .. },
                ..
            }),
        ) => {
            return Err(config_err(
                "engine",
                "local per-gate noise needs a trotter engine",
            ));
        }
        (EngineSpec::Exact, _) => {
            let ed = diagonalize(&hamiltonian)?;
            exact_ed = Some(ed.clone());
            Box::new(ExactEngine::new(ed, &psi0)?)
        }
        (
            EngineSpec::Trotter {
                steps_per_unit_time,
            },
            noise,
        ) => {
            let p = TrotterPlan::new(&hamiltonian, *steps_per_unit_time)?;
            match noise {
                Some(NoiseSpec {
                    model: NoiseModelSpec::Local { p_gate },
                    ..
                }) => Box::new(NoisyTrotterEngine::new(
                    p,
                    &psi0,
                    LocalDepolarizingModel::new(*p_gate)?,
                )?),
                _ => Box::new(TrotterEngine::new(p, psi0.clone())?),
            }
        }
    };
    Ok(Prepared {
        hamiltonian,
        psi0,
        engine,
        exact_ed,
        sampling: ResolvedSampling {
            tau: filter.tau(),
            cutoff: filter.cutoff(),
            n_samples,
            shots: config.sampling.shots,
            seed: config.sampling.seed,
            auto,
        },
        grid,
    })
}

fn sample_mode(sampling: &ResolvedSampling) -> SampleMode {
    match sampling.shots {
        None => SampleMode::Exact,
        Some(s) => SampleMode::Shots(s),
    }
}

/// Write `content` to `dir/name` atomically (temp file + rename).
fn write_atomic(dir: &Path, name: &str, content: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let final_path = dir.join(name);
    let tmp_path = dir.join(format!("{name}.tmp"));
    fs::write(&tmp_path, content)?;
    fs::rename(&tmp_path, &final_path)?;
    Ok(final_path)
}

fn single_observable(config: &RunConfig, n: usize, base_dir: &Path) -> Result<PauliSum> {
    match &config.observable {
        ObservableSpec::SitePauli { letter, site } => {
            let p = parse_letter(*letter)?;
            Ok(PauliSum::from_string(
                1.0,
                PauliString::single(n, *site, p)?,
            ))
        }
        ObservableSpec::PauliFile { path } => {
            let full = base_dir.join(path);
            let text = fs::read_to_string(&full).map_err(|e| {
                config_err(
                    "observable.path",
                    format!("cannot read {}: {e}", full.display()),
                )
            })?;
            let o = parse_pauli_sum(&text)?;
            if o.n_qubits() != n {
                return Err(config_err(
                    "observable",
                    format!("operator on {} qubits, system has {n}", o.n_qubits()),
                ));
            }
            Ok(o)
        }
        ObservableSpec::SiteFamily { .. } => Err(config_err(
            "observable",
            "per-site families drive dispersion runs; this verb needs a single observable",
        )),
    }
}

fn manifest_json(
    command: &str,
    config: &RunConfig,
    resolved: Option<&ResolvedSampling>,
    files: &[PathBuf],
) -> serde_json::Value {
    // Echo the config with the resolved filter and sample count substituted,
    // so the manifest re-runs to identical outputs.
    let mut resolved_config = config.clone();
    if let Some(resolved) = resolved {
        resolved_config.filter = FilterSpec::Fixed {
            tau: resolved.tau,
            cutoff: resolved.cutoff,
        };
        resolved_config.sampling.n_samples = Some(resolved.n_samples);
        if resolved_config.omega.resolution.is_none() {
            if let Some(auto) = &resolved.auto {
                resolved_config.omega.resolution = Some(auto.eps / 2.0);
            }
        }
    }
    serde_json::json!({
        "schema": SCHEMA,
        "command": command,
        "resolved": resolved,
        "resolved_config": resolved_config,
        "files": files.iter().map(|p| p.file_name().expect("named file").to_string_lossy().into_owned()).collect::<Vec<_>>(),
    })
}

/// Artifacts written by a run.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// The `spectrum` verb: estimate `Ĝ(ω)` for one observable; write the
/// spectrum CSV, peak reports, the ED coherence table when feasible, and the
/// manifest.
pub fn run_spectrum(config: &RunConfig, base_dir: &Path, out_dir: &Path) -> Result<RunArtifacts> {
    if config.noise.is_some() {
        return Err(config_err(
            "noise",
            "the spectrum verb runs noiseless; use noise-bench for noisy and mitigated spectra",
        ));
    }
    let probe = config.model.build(base_dir)?;
    let observable = single_observable(config, probe.n_qubits(), base_dir)?;
    let prepared = prepare(config, base_dir, Some(&observable))?;
    let f = GaussianFilter::new(prepared.sampling.tau, prepared.sampling.cutoff)?;
    let raw = sample_raw_multi(
        prepared.engine.as_ref(),
        std::slice::from_ref(&observable),
        &f,
        prepared.sampling.n_samples as usize,
        sample_mode(&prepared.sampling),
        prepared.sampling.seed,
    )?
    .remove(0);
    let estimate = assemble_estimate(&raw, &prepared.grid)?;

    let mut files = Vec::new();
    let mut csv = Vec::new();
    estimate.write_csv(&mut csv)?;
    files.push(write_atomic(out_dir, "spectrum.csv", &csv)?);

    let full_range = (
        prepared.grid[0],
        *prepared.grid.last().expect("nonempty grid"),
    );
    let windows = config.windows.clone().unwrap_or_else(|| vec![full_range]);
    let peaks: Vec<PeakReport> = windows
        .iter()
        .map(|&w| find_peak(&estimate, w))
        .collect::<Result<_>>()?;
    let peaks_json = serde_json::to_string_pretty(&peaks).expect("peak reports serialize");
    files.push(write_atomic(out_dir, "peaks.json", peaks_json.as_bytes())?);

    // ED oracle output when feasible.
    let n = prepared.hamiltonian.n_qubits();
    let table = if let Some(ed) = &prepared.exact_ed {
        Some(coherence_table(ed, &prepared.psi0, &observable)?)
    } else if n <= TROTTER_COHERENCE_CAP {
        let ed = diagonalize_capped(&prepared.hamiltonian, DEFAULT_DIAG_CAP)?;
        Some(coherence_table(&ed, &prepared.psi0, &observable)?)
    } else {
        None
    };
    if let Some(table) = table {
        let mut csv = Vec::new();
        table.write_csv(&mut csv)?;
        files.push(write_atomic(out_dir, "coherence.csv", &csv)?);
    }

    let manifest = manifest_json("spectrum", config, Some(&prepared.sampling), &files);
    files.push(write_atomic(
        out_dir,
        "manifest.json",
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serializes")
            .as_bytes(),
    )?);
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

/// The `dispersion` verb: per-site spectra, momentum transform, and ridge
/// extraction.
pub fn run_dispersion(config: &RunConfig, base_dir: &Path, out_dir: &Path) -> Result<RunArtifacts> {
    if config.noise.is_some() {
        return Err(config_err(
            "noise",
            "the dispersion verb runs noiseless; use noise-bench for noisy spectra",
        ));
    }
    let letter = match &config.observable {
        ObservableSpec::SiteFamily { letter } => parse_letter(*letter)?,
        _ => {
            return Err(config_err(
                "observable",
                "dispersion runs need a per-site family observable",
            ))
        }
    };
    let prepared = prepare(config, base_dir, None)?;
    let n = prepared.hamiltonian.n_qubits();
    let family = site_family(n, letter)?;
    let f = GaussianFilter::new(prepared.sampling.tau, prepared.sampling.cutoff)?;
    let sites = estimate_site_spectra(
        prepared.engine.as_ref(),
        &family,
        &f,
        &prepared.grid,
        prepared.sampling.n_samples as usize,
        sample_mode(&prepared.sampling),
        prepared.sampling.seed,
    )?;
    let remove_k_zero = config.remove_k_zero.unwrap_or(true);
    // Raw serialization keeps every row; the extraction honors the flag.
    let raw_momentum = spatial_fourier_with(&sites, false)?;
    let momentum = spatial_fourier_with(&sites, remove_k_zero)?;
    let window = config
        .windows
        .as_ref()
        .and_then(|w| w.first().copied())
        .unwrap_or((
            prepared.grid[0],
            *prepared.grid.last().expect("nonempty grid"),
        ));
    let dispersion = extract_dispersion(&momentum, window)?;

    let mut files = Vec::new();
    let mut csv = Vec::new();
    raw_momentum.write_csv(&mut csv)?;
    files.push(write_atomic(out_dir, "momentum.csv", &csv)?);
    let mut csv = Vec::new();
    write_dispersion_csv(&dispersion, &mut csv)?;
    files.push(write_atomic(out_dir, "dispersion.csv", &csv)?);
    let manifest = manifest_json("dispersion", config, Some(&prepared.sampling), &files);
    files.push(write_atomic(
        out_dir,
        "manifest.json",
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serializes")
            .as_bytes(),
    )?);
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

/// The `noise-bench` verb: identity-equivalent decay benchmark, decay fit,
/// and (with the mitigation flag) noisy and mitigated spectra sharing one
/// set of sampled times.
pub fn run_noise_benchmark(
    config: &RunConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<RunArtifacts> {
    let noise = config
        .noise
        .as_ref()
        .ok_or_else(|| config_err("noise", "noise-bench needs a noise model"))?;
    let steps_per_unit_time = match config.engine {
        EngineSpec::Trotter {
            steps_per_unit_time,
        } => steps_per_unit_time,
        EngineSpec::Exact => {
            return Err(config_err(
                "engine",
                "noise-bench needs a trotter engine (the benchmark repeats one Trotter step)",
            ))
        }
    };
    let hamiltonian = config.model.build(base_dir)?;
    let n = hamiltonian.n_qubits();
    let observable = single_observable(config, n, base_dir)?;
    let plan = TrotterPlan::new(&hamiltonian, steps_per_unit_time)?;
    let model = match &noise.model {
        NoiseModelSpec::Global { lambda } => {
            NoiseModel::Global(GlobalDepolarizingModel::new(*lambda)?)
        }
        NoiseModelSpec::Local { p_gate } => {
            NoiseModel::Local(LocalDepolarizingModel::new(*p_gate)?)
        }
    };
    let bench_prep = noise
        .benchmark_state_prep
        .as_ref()
        .unwrap_or(&config.state_prep)
        .to_spec()?;
    let bench_state = prepare_state(&bench_prep, n)?;
    let depths = noise
        .depths
        .clone()
        .unwrap_or_else(|| (1..=8).collect::<Vec<_>>());
    let rows = benchmark_decay(&plan, &bench_state, &model, &observable, &depths)?;
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(m, v)| (2.0 * m as f64 * plan.dt(), v))
        .collect();
    let fit = fit_lambda(&samples)?;

    let mut files = Vec::new();
    let mut csv = Vec::new();
    write_benchmark_csv(&rows, &mut csv)?;
    files.push(write_atomic(out_dir, "benchmark.csv", &csv)?);
    files.push(write_atomic(
        out_dir,
        "decay_fit.json",
        serde_json::to_string_pretty(&fit.summary_json())
            .expect("fit serializes")
            .as_bytes(),
    )?);

    if noise.mitigate {
        let prepared = prepare(config, base_dir, Some(&observable))?;
        let f = GaussianFilter::new(prepared.sampling.tau, prepared.sampling.cutoff)?;
        let mode = sample_mode(&prepared.sampling);
        let raw_noisy = match &model {
            NoiseModel::Local(_) => sample_raw_multi(
                prepared.engine.as_ref(),
                std::slice::from_ref(&observable),
                &f,
                prepared.sampling.n_samples as usize,
                mode,
                prepared.sampling.seed,
            )?
            .remove(0),
            NoiseModel::Global(g) => {
                // Analytic degradation of the noiseless signal.
                let raw = sample_raw_multi(
                    prepared.engine.as_ref(),
                    std::slice::from_ref(&observable),
                    &f,
                    prepared.sampling.n_samples as usize,
                    mode,
                    prepared.sampling.seed,
                )?
                .remove(0);
                apply_global_noise_raw(&raw, g)
            }
        };
        let raw_mitigated = mitigate(&raw_noisy, &fit);
        let noisy = assemble_estimate(&raw_noisy, &prepared.grid)?;
        let mitigated = assemble_estimate(&raw_mitigated, &prepared.grid)?;
        let mut csv = Vec::new();
        noisy.write_csv(&mut csv)?;
        files.push(write_atomic(out_dir, "spectrum_noisy.csv", &csv)?);
        let mut csv = Vec::new();
        mitigated.write_csv(&mut csv)?;
        files.push(write_atomic(out_dir, "spectrum_mitigated.csv", &csv)?);

        let manifest = manifest_json("noise-bench", config, Some(&prepared.sampling), &files);
        files.push(write_atomic(
            out_dir,
            "manifest.json",
            serde_json::to_string_pretty(&manifest)
                .expect("manifest serializes")
                .as_bytes(),
        )?);
        return Ok(RunArtifacts {
            out_dir: out_dir.to_path_buf(),
            files,
        });
    }

    // No spectra requested: the manifest echoes the config as given.
    let manifest = manifest_json("noise-bench", config, None, &files);
    files.push(write_atomic(
        out_dir,
        "manifest.json",
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serializes")
            .as_bytes(),
    )?);
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level_config_json(outputs: Option<&str>) -> String {
        let outputs = match outputs {
            Some(dir) => format!(", \"outputs\": \"{dir}\""),
            None => String::new(),
        };
        format!(
            r#"{{
              "schema": "spectro-run/1",
              "model": {{"type": "pauli_file", "path": "hamiltonian.txt"}},
              "state_prep": {{"base": "all_plus"}},
              "observable": {{"type": "site_pauli", "letter": "X", "site": 0}},
              "filter": {{"type": "fixed", "tau": 3.0, "cutoff": 6.0}},
              "omega": {{"min": 0.0, "max": 2.0, "resolution": 0.01}},
              "sampling": {{"n_samples": 2000, "seed": 7}},
              "engine": {{"type": "exact"}},
              "windows": [[0.5, 1.5]]{outputs}
            }}"#
        )
    }

    fn write_two_level_inputs(dir: &Path) {
        fs::write(dir.join("hamiltonian.txt"), "0.5 Z\n").unwrap();
    }

    #[test]
    fn config_parses_and_validates() {
        let config = RunConfig::from_json(&two_level_config_json(None)).unwrap();
        assert_eq!(config.sampling.seed, 7);
        assert!(matches!(config.engine, EngineSpec::Exact));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = two_level_config_json(None).replace(
            "\"windows\": [[0.5, 1.5]]",
            "\"windows\": [[0.5, 1.5]], \"surprise\": 1",
        );
        match RunConfig::from_json(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("surprise"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn schema_and_field_validation() {
        let bad_schema = two_level_config_json(None).replace("spectro-run/1", "spectro-run/9");
        assert!(matches!(
            RunConfig::from_json(&bad_schema),
            Err(Error::Config(_))
        ));

        let zero_res =
            two_level_config_json(None).replace("\"resolution\": 0.01", "\"resolution\": 0.0");
        match RunConfig::from_json(&zero_res) {
            Err(Error::Config(msg)) => assert!(msg.contains("omega.resolution"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }

        let no_ns = two_level_config_json(None).replace("\"n_samples\": 2000, ", "");
        match RunConfig::from_json(&no_ns) {
            Err(Error::Config(msg)) => assert!(msg.contains("n_samples"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }

        // Auto-filter knobs must satisfy the τ-formula preconditions.
        let bad_auto = two_level_config_json(None).replace(
            r#""filter": {"type": "fixed", "tau": 3.0, "cutoff": 6.0}"#,
            r#""filter": {"type": "auto", "eps": 0.5, "delta_fail": 0.05, "gamma": 1.0, "gamma_j_weight": 0.5}"#,
        );
        match RunConfig::from_json(&bad_auto) {
            Err(Error::Config(msg)) => assert!(msg.contains("0.2"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_run_writes_files_and_reruns_identically() {
        let dir = tempfile::tempdir().unwrap();
        write_two_level_inputs(dir.path());
        let config = RunConfig::from_json(&two_level_config_json(None)).unwrap();
        let out_a = dir.path().join("a");
        let out_b = dir.path().join("b");
        let arts = run_spectrum(&config, dir.path(), &out_a).unwrap();
        let names: Vec<String> = arts
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "spectrum.csv",
                "peaks.json",
                "coherence.csv",
                "manifest.json"
            ]
        );
        run_spectrum(&config, dir.path(), &out_b).unwrap();
        for name in &names {
            let a = fs::read(out_a.join(name)).unwrap();
            let b = fs::read(out_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
        // The located peak sits at the Δ = 1 transition.
        let peaks: Vec<PeakReport> =
            serde_json::from_str(&fs::read_to_string(out_a.join("peaks.json")).unwrap()).unwrap();
        assert!((peaks[0].delta_hat - 1.0).abs() < 0.05);
        // No stray temp files.
        assert!(fs::read_dir(&out_a).unwrap().count() == 4);
    }

    #[test]
    fn manifest_round_trip_reproduces_outputs() {
        let dir = tempfile::tempdir().unwrap();
        write_two_level_inputs(dir.path());
        // Auto filter: the manifest must echo resolved τ, T, N_s, and feeding
        // it back must reproduce the spectrum bit for bit.
        let text = two_level_config_json(None).replace(
            r#""filter": {"type": "fixed", "tau": 3.0, "cutoff": 6.0}"#,
            r#""filter": {"type": "auto", "eps": 0.35, "delta_fail": 0.3}"#,
        );
        let text = text.replace("\"n_samples\": 2000, ", "");
        // The grid defaults to ε/2 under an auto filter.
        let text = text.replace("\"resolution\": 0.01", "\"resolution\": null");
        let config = RunConfig::from_json(&text).unwrap();
        let out_a = dir.path().join("auto");
        run_spectrum(&config, dir.path(), &out_a).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_a.join("manifest.json")).unwrap())
                .unwrap();
        assert!(manifest["resolved"]["auto"]["gamma"].as_f64().unwrap() > 0.0);
        let echoed = serde_json::to_string(&manifest["resolved_config"]).unwrap();
        let config_b = RunConfig::from_json(&echoed).unwrap();
        let out_b = dir.path().join("echo");
        run_spectrum(&config_b, dir.path(), &out_b).unwrap();
        assert_eq!(
            fs::read(out_a.join("spectrum.csv")).unwrap(),
            fs::read(out_b.join("spectrum.csv")).unwrap()
        );
    }

    #[test]
    fn dispersion_run_produces_momentum_tables() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{
          "schema": "spectro-run/1",
          "model": {"type": "heisenberg", "n": 4, "j": -1.0, "h_z": -0.05, "periodic": true},
          "state_prep": {"base": "all_zero", "ops": [{"site": 2, "gate": "ry", "angle": 1.5707963267948966}]},
          "observable": {"type": "site_family", "letter": "Y"},
          "filter": {"type": "fixed", "tau": 2.0, "cutoff": 4.0},
          "omega": {"min": 0.2, "max": 9.0, "resolution": 0.05},
          "sampling": {"n_samples": 600, "seed": 3},
          "engine": {"type": "exact"}
        }"#;
        let config = RunConfig::from_json(text).unwrap();
        let out = dir.path().join("out");
        let arts = run_dispersion(&config, dir.path(), &out).unwrap();
        let names: Vec<_> = arts
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["momentum.csv", "dispersion.csv", "manifest.json"]);
        let dispersion = fs::read_to_string(out.join("dispersion.csv")).unwrap();
        assert!(dispersion.starts_with("k_index,k,omega_star,intensity"));
        assert_eq!(dispersion.lines().count(), 1 + 4);
        let momentum = fs::read_to_string(out.join("momentum.csv")).unwrap();
        assert!(momentum.starts_with("k_index,k,omega,intensity"));
        // A uniform (translation-invariant) quench leaves only k = 0.
        let uniform = text.replace(
            r#""ops": [{"site": 2, "gate": "ry", "angle": 1.5707963267948966}]"#,
            r#""ops": [{"site": 0, "gate": "ry", "angle": 0.6}, {"site": 1, "gate": "ry", "angle": 0.6}, {"site": 2, "gate": "ry", "angle": 0.6}, {"site": 3, "gate": "ry", "angle": 0.6}]"#,
        );
        let config = RunConfig::from_json(&uniform).unwrap();
        let out2 = dir.path().join("uniform");
        run_dispersion(&config, dir.path(), &out2).unwrap();
        let dispersion = fs::read_to_string(out2.join("dispersion.csv")).unwrap();
        for line in dispersion.lines().skip(2) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[2], "", "k ≠ 0 row should be absent: {line}");
        }
    }

    #[test]
    fn verb_preconditions_are_field_level_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_two_level_inputs(dir.path());
        let config = RunConfig::from_json(&two_level_config_json(None)).unwrap();
        // spectrum with a family observable.
        let mut family = config.clone();
        family.observable = ObservableSpec::SiteFamily { letter: 'Y' };
        assert!(matches!(
            run_spectrum(&family, dir.path(), &dir.path().join("x")),
            Err(Error::Config(_))
        ));
        // dispersion with a single-site observable.
        assert!(matches!(
            run_dispersion(&config, dir.path(), &dir.path().join("x")),
            Err(Error::Config(_))
        ));
        // noise-bench without noise.
        assert!(matches!(
            run_noise_benchmark(&config, dir.path(), &dir.path().join("x")),
            Err(Error::Config(_))
        ));
        // local noise demands a trotter engine.
        let mut local = config.clone();
        local.noise = Some(NoiseSpec {
            model: NoiseModelSpec::Local { p_gate: 0.01 },
            mitigate: false,
            depths: None,
            benchmark_state_prep: None,
        });
        assert!(matches!(
            run_noise_benchmark(&local, dir.path(), &dir.path().join("x")),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn noise_bench_run_emits_fit_and_mitigated_spectra() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{
          "schema": "spectro-run/1",
          "model": {"type": "tfim", "n": 3, "j": 1.0, "h_x": 2.0, "h_z": 0.1, "periodic": true},
          "state_prep": {"base": "all_plus", "ops": [{"site": 1, "gate": "ry", "angle": 1.5707963267948966}]},
          "observable": {"type": "site_pauli", "letter": "Y", "site": 1},
          "filter": {"type": "fixed", "tau": 1.5, "cutoff": 2.5},
          "omega": {"min": -5.0, "max": 5.0, "resolution": 0.25},
          "sampling": {"n_samples": 60, "seed": 5},
          "engine": {"type": "trotter", "steps_per_unit_time": 2.5},
          "noise": {
            "model": {"type": "local", "p_gate": 0.004},
            "mitigate": true,
            "depths": [1, 2, 3, 4, 5, 6],
            "benchmark_state_prep": {
              "base": "all_zero",
              "ops": [
                {"site": 0, "gate": "rx", "angle": -1.5707963267948966},
                {"site": 1, "gate": "rx", "angle": -1.5707963267948966},
                {"site": 2, "gate": "rx", "angle": -1.5707963267948966}
              ]
            }
          }
        }"#;
        let config = RunConfig::from_json(text).unwrap();
        let out = dir.path().join("noise");
        let arts = run_noise_benchmark(&config, dir.path(), &out).unwrap();
        let names: Vec<_> = arts
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "benchmark.csv",
                "decay_fit.json",
                "spectrum_noisy.csv",
                "spectrum_mitigated.csv",
                "manifest.json"
            ]
        );
        let fit: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("decay_fit.json")).unwrap()).unwrap();
        assert!(fit["lambda_hat"].as_f64().unwrap() > 0.0);
        assert_eq!(fit["n_samples"].as_u64().unwrap(), 6);
        // Mitigation off: no mitigated CSV.
        let no_mit = text.replace("\"mitigate\": true", "\"mitigate\": false");
        let config = RunConfig::from_json(&no_mit).unwrap();
        let out2 = dir.path().join("nomit");
        let arts = run_noise_benchmark(&config, dir.path(), &out2).unwrap();
        assert!(arts
            .files
            .iter()
            .all(|p| !p.ends_with("spectrum_mitigated.csv")));
        assert!(!out2.join("spectrum_mitigated.csv").exists());
    }
}
