//! TOML experiment files.
//!
//! Every section is optional and defaults to the library defaults; unknown
//! keys are rejected. Validation errors point at the offending line when
//! the key appears in the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wavegauge_core::asymptotics::{HllMode, IntegrateOptions, WaveSystem};
use wavegauge_core::diagnostics::WeightSpec;
use wavegauge_core::evolution::{Boundary, Mode, RunConfig, MAX_CFL};
use wavegauge_core::grid::Symmetry;
use wavegauge_core::initdata::{Profile, SolverOptions};

use crate::error::{LabError, LabResult};
use crate::sysfile::parse_system;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Evolve,
    Asymptotic,
    Classify,
    Check,
    Initdata,
    OracleCompare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Asymptotic => "asymptotic",
            Command::Classify => "classify",
            Command::Check => "check",
            Command::Initdata => "initdata",
            Command::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryName {
    Full,
    Octant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    Sommerfeld,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Einstein,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Gaussian,
    Shell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HllName {
    Zero,
    Mass,
    SelfCoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub extent: f64,
    pub symmetry: SymmetryName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub mode: ModeName,
    pub cfl: f64,
    pub dissipation: f64,
    pub t_final: f64,
    pub boundary: BoundaryName,
    pub output_dt: f64,
    pub energy_order: usize,
    pub ks_monitor: bool,
    pub wavec_monitor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub epsilon: f64,
    pub profile: ProfileKind,
    pub width: f64,
    /// Gaussian centre.
    pub center: [f64; 3],
    /// Shell radius.
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    pub gamma: f64,
    pub mu: f64,
    pub gamma_p: f64,
    pub mu_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub max_outer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticSection {
    /// `"einstein"` or a system file, relative to the config file.
    pub system: String,
    /// Amplitude of the single `asymptotic` run.
    pub epsilon: f64,
    /// Amplitudes swept by `classify`.
    pub epsilons: Vec<f64>,
    /// Unknowns seeded with Gaussian data; empty seeds all of them.
    pub seeded: Vec<String>,
    pub omega: [f64; 3],
    pub nq: usize,
    pub l_max: f64,
    pub dl_max: f64,
    pub growth_step: f64,
    pub blowup_factor: f64,
    pub q_cfl: f64,
    pub record_dl: f64,
    /// ADM mass and transport law of the Einstein system.
    pub mass: f64,
    pub hll: HllName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub n_polar: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Write the final state of `evolve` as a grid file.
    pub snapshot: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        let c = RunConfig::default();
        Self {
            n: c.n,
            extent: c.extent,
            symmetry: match c.symmetry {
                Symmetry::Full => SymmetryName::Full,
                Symmetry::Octant => SymmetryName::Octant,
            },
        }
    }
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let c = RunConfig::default();
        Self {
            mode: ModeName::Einstein,
            cfl: c.cfl,
            dissipation: c.dissipation,
            t_final: c.t_final,
            boundary: BoundaryName::Sommerfeld,
            output_dt: c.output_dt,
            energy_order: c.energy_order,
            ks_monitor: c.ks_monitor,
            wavec_monitor: c.wavec_monitor,
        }
    }
}

impl Default for DataSection {
    fn default() -> Self {
        let c = RunConfig::default();
        let (width, center) = match c.profile {
            Profile::Gaussian { center, width } => (width, center),
            Profile::Shell { width, .. } => (width, [0.0; 3]),
        };
        Self {
            epsilon: c.epsilon,
            profile: ProfileKind::Gaussian,
            width,
            center,
            r0: 4.0,
        }
    }
}

impl Default for WeightsSection {
    fn default() -> Self {
        let w = WeightSpec::default();
        Self {
            gamma: w.gamma,
            mu: w.mu,
            gamma_p: w.gamma_p,
            mu_p: w.mu_p,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverOptions::default();
        Self {
            tol: s.tol,
            max_iter: s.max_iter,
            max_outer: s.max_outer,
        }
    }
}

impl Default for AsymptoticSection {
    fn default() -> Self {
        let o = IntegrateOptions::default();
        Self {
            system: "einstein".into(),
            epsilon: 0.01,
            epsilons: vec![0.02, 0.04, 0.06, 0.08, 0.1],
            seeded: Vec::new(),
            omega: [1.0, 0.0, 0.0],
            nq: 401,
            l_max: o.l_max,
            dl_max: o.dl_max,
            growth_step: o.growth_step,
            blowup_factor: o.blowup_factor,
            q_cfl: o.q_cfl,
            record_dl: o.record_dl,
            mass: 0.01,
            hll: HllName::Mass,
        }
    }
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { n_polar: 48 }
    }
}

/// One experiment as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub weights: WeightsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub asymptotic: AsymptoticSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            grid: Default::default(),
            evolution: Default::default(),
            data: Default::default(),
            weights: Default::default(),
            solver: Default::default(),
            asymptotic: Default::default(),
            oracle: Default::default(),
            output: Default::default(),
        }
    }

    pub fn profile(&self) -> Profile {
        match self.data.profile {
            ProfileKind::Gaussian => Profile::Gaussian {
                center: self.data.center,
                width: self.data.width,
            },
            ProfileKind::Shell => Profile::Shell {
                r0: self.data.r0,
                width: self.data.width,
            },
        }
    }

    pub fn run_config(&self) -> RunConfig {
        let e = &self.evolution;
        let w = &self.weights;
        RunConfig {
            n: self.grid.n,
            extent: self.grid.extent,
            symmetry: match self.grid.symmetry {
                SymmetryName::Full => Symmetry::Full,
                SymmetryName::Octant => Symmetry::Octant,
            },
            cfl: e.cfl,
            dissipation: e.dissipation,
            t_final: e.t_final,
            boundary: match e.boundary {
                BoundaryName::Sommerfeld => Boundary::Sommerfeld,
                BoundaryName::Periodic => Boundary::Periodic,
            },
            output_dt: e.output_dt,
            energy_order: e.energy_order,
            ks_monitor: e.ks_monitor,
            wavec_monitor: e.wavec_monitor,
            weights: WeightSpec {
                gamma: w.gamma,
                mu: w.mu,
                gamma_p: w.gamma_p,
                mu_p: w.mu_p,
            },
            epsilon: self.data.epsilon,
            profile: self.profile(),
            mode: match e.mode {
                ModeName::Einstein => Mode::Einstein,
                ModeName::Linear => Mode::Linear,
            },
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            max_outer: self.solver.max_outer,
        }
    }

    pub fn integrate_options(&self) -> IntegrateOptions {
        let a = &self.asymptotic;
        IntegrateOptions {
            l_max: a.l_max,
            dl_max: a.dl_max,
            growth_step: a.growth_step,
            blowup_factor: a.blowup_factor,
            q_cfl: a.q_cfl,
            record_dl: a.record_dl,
        }
    }

    pub fn hll_mode(&self) -> HllMode {
        match self.asymptotic.hll {
            HllName::Zero => HllMode::Zero,
            HllName::Mass => HllMode::MassProfile,
            HllName::SelfCoupled => HllMode::SelfCoupled,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}

/// The system an `asymptotic` or `classify` run works on.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    Einstein,
    File {
        path: PathBuf,
        text: String,
        system: WaveSystem,
    },
}

/// A parsed and validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub system: Option<SystemSource>,
    /// SHA-256 of the resolved spec and any system file it references.
    pub hash: String,
}

impl Experiment {
    /// Replace the seed (the `--seed` flag) and rehash.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.spec.seed = seed;
        self.hash = config_hash(&self.spec, self.system.as_ref());
        self
    }
}

pub fn config_hash(spec: &ExperimentSpec, system: Option<&SystemSource>) -> String {
    let mut h = Sha256::new();
    h.update(
        serde_json::to_string(spec)
            .expect("spec serializes")
            .as_bytes(),
    );
    if let Some(SystemSource::File { text, .. }) = system {
        h.update(b"\0system\0");
        h.update(text.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Line of `key` inside `[section]` (top level for an empty section).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn invalid(text: &str, section: &str, key: &str, msg: String) -> LabError {
    let dotted = if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    };
    match locate(text, section, key) {
        Some(l) => LabError::Config(format!("line {l}: {dotted}: {msg}")),
        None => LabError::Config(format!("{dotted}: {msg}")),
    }
}

fn check_spec(spec: &ExperimentSpec, text: &str) -> LabResult<()> {
    let e = &spec.evolution;
    if !(e.cfl > 0.0 && e.cfl <= MAX_CFL) {
        return Err(invalid(
            text,
            "evolution",
            "cfl",
            format!(
                "{} is out of range: CFL factor ≤ 0.25 (and > 0) required",
                e.cfl
            ),
        ));
    }
    if !(0.0..=0.1).contains(&spec.data.epsilon) {
        return Err(invalid(
            text,
            "data",
            "epsilon",
            format!("{} is outside [0, 0.1]", spec.data.epsilon),
        ));
    }
    if !(spec.data.width > 0.0) {
        return Err(invalid(text, "data", "width", "must be positive".into()));
    }
    match spec.command {
        Command::Evolve | Command::Check | Command::Initdata | Command::OracleCompare => {
            spec.run_config()
                .validate()
                .map_err(|err| LabError::Config(err.to_string()))?;
        }
        Command::Asymptotic | Command::Classify => {}
    }
    if spec.command == Command::OracleCompare {
        if spec.evolution.mode != ModeName::Linear {
            return Err(invalid(
                text,
                "evolution",
                "mode",
                "oracle-compare needs mode = \"linear\"".into(),
            ));
        }
        if spec.oracle.n_polar < 2 {
            return Err(invalid(text, "oracle", "n_polar", "need at least 2".into()));
        }
    }
    let a = &spec.asymptotic;
    if matches!(spec.command, Command::Asymptotic | Command::Classify) {
        if a.nq < 5 {
            return Err(invalid(
                text,
                "asymptotic",
                "nq",
                "need at least 5 points".into(),
            ));
        }
        let o = spec.integrate_options();
        let positive = [
            ("l_max", o.l_max),
            ("dl_max", o.dl_max),
            ("growth_step", o.growth_step),
            ("blowup_factor", o.blowup_factor),
            ("q_cfl", o.q_cfl),
            ("record_dl", o.record_dl),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(
                    text,
                    "asymptotic",
                    k,
                    format!("{v} must be positive"),
                ));
            }
        }
        let n2: f64 = a.omega.iter().map(|w| w * w).sum();
        if (n2 - 1.0).abs() > 1e-9 {
            return Err(invalid(
                text,
                "asymptotic",
                "omega",
                "must be a unit vector".into(),
            ));
        }
        if spec.command == Command::Classify {
            if a.system == "einstein" {
                return Err(invalid(
                    text,
                    "asymptotic",
                    "system",
                    "classify needs a system file".into(),
                ));
            }
            if a.epsilons.is_empty() || a.epsilons.iter().any(|e| !(*e > 0.0)) {
                return Err(invalid(
                    text,
                    "asymptotic",
                    "epsilons",
                    "need positive amplitudes".into(),
                ));
            }
        }
    }
    Ok(())
}

fn load_system(spec: &ExperimentSpec, base: &Path, text: &str) -> LabResult<Option<SystemSource>> {
    if !matches!(spec.command, Command::Asymptotic | Command::Classify) {
        return Ok(None);
    }
    let name = &spec.asymptotic.system;
    if name == "einstein" {
        return Ok(Some(SystemSource::Einstein));
    }
    let path = base.join(name);
    let body = std::fs::read_to_string(&path).map_err(|e| {
        invalid(
            text,
            "asymptotic",
            "system",
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    let system =
        parse_system(&body).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    for s in &spec.asymptotic.seeded {
        if !system.unknowns.contains(s) {
            return Err(invalid(
                text,
                "asymptotic",
                "seeded",
                format!("no unknown `{s}` in the system"),
            ));
        }
    }
    Ok(Some(SystemSource::File {
        path,
        text: body,
        system,
    }))
}

/// Parse, fill defaults, validate and hash. Relative paths resolve
/// against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> LabResult<Experiment> {
    let spec: ExperimentSpec =
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string().trim_end().to_string()))?;
    check_spec(&spec, text)?;
    let system = load_system(&spec, base, text)?;
    let hash = config_hash(&spec, system.as_ref());
    Ok(Experiment { spec, system, hash })
}

pub fn parse_config(path: &Path) -> LabResult<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base).map_err(|e| match e {
        LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}
