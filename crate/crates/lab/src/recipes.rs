//! Canned experiment sets. Each recipe is a list of named specs (plus any
//! system files they reference) that can be written out as config files
//! and run.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use wavegauge_core::asymptotics::WaveSystem;

use crate::config::{
    config_hash, parse_config, Command, Experiment, ExperimentSpec, ModeName, SystemSource,
};
use crate::error::{LabError, LabResult};
use crate::output::write_json;
use crate::sysfile::{format_system, parse_system};

pub const RECIPES: [&str; 3] = ["acceptance-suite", "decay-study", "weak-null-zoo"];

/// One spec of a recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct RecipeItem {
    pub name: String,
    pub spec: ExperimentSpec,
    /// `(file name, contents)` of the system file the spec references.
    pub system: Option<(String, String)>,
}

impl RecipeItem {
    fn new(name: &str, spec: ExperimentSpec) -> Self {
        Self {
            name: name.into(),
            spec,
            system: None,
        }
    }

    fn with_system(mut self, file: &str, system: &WaveSystem, comment: &str) -> Self {
        self.spec.asymptotic.system = file.into();
        self.system = Some((file.into(), format_system(system, comment)));
        self
    }

    /// The experiment this item describes, with the same hash as the
    /// emitted config file.
    pub fn experiment(&self) -> LabResult<Experiment> {
        let system = match &self.system {
            Some((file, text)) => Some(SystemSource::File {
                path: PathBuf::from(file),
                text: text.clone(),
                system: parse_system(text)?,
            }),
            None if matches!(self.spec.command, Command::Asymptotic | Command::Classify) => {
                Some(SystemSource::Einstein)
            }
            None => None,
        };
        let hash = config_hash(&self.spec, system.as_ref());
        Ok(Experiment {
            spec: self.spec.clone(),
            system,
            hash,
        })
    }
}

/// Linear Gaussian pulse on an octant of half-width 6, evolved to `t = 2`
/// at `n`, `2n` and `4n` cells.
pub fn oracle_spec() -> ExperimentSpec {
    let mut s = ExperimentSpec::new(Command::OracleCompare);
    s.evolution.mode = ModeName::Linear;
    s.grid.n = 24;
    s.grid.extent = 6.0;
    s.evolution.t_final = 2.0;
    s.oracle.n_polar = 48;
    s
}

/// Small-data Einstein-scalar run to `t = 10` on an octant of width 16.
pub fn headline_spec(n: usize, epsilon: f64) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(Command::Evolve);
    s.grid.n = n;
    s.data.epsilon = epsilon;
    s
}

/// [`headline_spec`] recording the wave-coordinate ratios at every step.
/// The smaller CFL factor gives more than 100 snapshots by `t = 10`.
pub fn wavec_spec(n: usize, epsilon: f64) -> ExperimentSpec {
    let mut s = headline_spec(n, epsilon);
    s.evolution.wavec_monitor = true;
    s.evolution.cfl = 0.15;
    s.evolution.output_dt = 0.07;
    s
}

fn classify_spec() -> ExperimentSpec {
    let mut s = ExperimentSpec::new(Command::Classify);
    s.asymptotic.epsilons = vec![0.02, 0.04, 0.06, 0.08, 0.1];
    s.asymptotic.l_max = 450.0;
    s.asymptotic.nq = 101;
    s
}

fn zoo() -> Vec<RecipeItem> {
    vec![
        RecipeItem::new("zoo-q0", classify_spec()).with_system(
            "q0.sys",
            &WaveSystem::scalar_q0(),
            "box phi = m^{ab} d_a phi d_b phi",
        ),
        RecipeItem::new("zoo-weak-null", classify_spec()).with_system(
            "weak_null.sys",
            &WaveSystem::weak_null_example(),
            "box phi1 = phi3 d_t^2 phi1 + (d_t phi2)^2, box phi2 = box phi3 = 0",
        ),
        RecipeItem::new("zoo-dt-squared", classify_spec()).with_system(
            "dt_squared.sys",
            &WaveSystem::scalar_dt_squared(),
            "box phi = (d_t phi)^2",
        ),
    ]
}

/// `box phi2 = (d_t phi1)^2` with only `phi1` seeded.
pub fn model_pair_item() -> RecipeItem {
    let mut s = ExperimentSpec::new(Command::Asymptotic);
    s.asymptotic.epsilon = 0.1;
    s.asymptotic.seeded = vec!["phi1".into()];
    s.asymptotic.omega = [0.0, 1.0, 0.0];
    s.asymptotic.nq = 201;
    s.asymptotic.l_max = 20.0;
    RecipeItem::new("model-pair", s).with_system(
        "model_pair.sys",
        &WaveSystem::model_pair(),
        "box phi1 = 0, box phi2 = (d_t phi1)^2",
    )
}

/// Einstein characteristic system along an oblique direction.
pub fn einstein_asymptotic_spec(nq: usize) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(Command::Asymptotic);
    s.asymptotic.epsilon = 1e-2;
    s.asymptotic.omega = [0.0, 0.6, 0.8];
    s.asymptotic.nq = nq;
    s.asymptotic.l_max = 10.0;
    s
}

pub const DECAY_EPSILONS: [f64; 3] = [5e-4, 1e-3, 2e-3];

pub fn recipe(name: &str) -> LabResult<Vec<RecipeItem>> {
    match name {
        "weak-null-zoo" => Ok(zoo()),
        "decay-study" => Ok(DECAY_EPSILONS
            .iter()
            .map(|&e| RecipeItem::new(&format!("decay-eps{e:e}"), headline_spec(48, e)))
            .collect()),
        "acceptance-suite" => {
            let mut v = vec![
                RecipeItem::new("oracle", oracle_spec()),
                RecipeItem::new("headline-n48", headline_spec(48, 1e-3)),
                RecipeItem::new("headline-n32-wavec", wavec_spec(32, 1e-3)),
                RecipeItem::new("headline-half-eps", headline_spec(48, 5e-4)),
                model_pair_item(),
                RecipeItem::new("einstein-nq201", einstein_asymptotic_spec(201)),
                RecipeItem::new("einstein-nq401", einstein_asymptotic_spec(401)),
            ];
            v.extend(zoo());
            Ok(v)
        }
        other => Err(LabError::Config(format!(
            "unknown recipe `{other}` (known: {})",
            RECIPES.join(", ")
        ))),
    }
}

/// Write `<name>.toml` for every item, and the system files, into `dir`.
pub fn emit(items: &[RecipeItem], dir: &Path) -> LabResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut out = Vec::new();
    for it in items {
        if let Some((file, text)) = &it.system {
            let p = dir.join(file);
            std::fs::write(&p, text).map_err(|e| LabError::io(&p, e))?;
            out.push(p);
        }
        let p = dir.join(format!("{}.toml", it.name));
        let text = format!("# recipe item {}\n{}", it.name, it.spec.to_toml());
        std::fs::write(&p, text).map_err(|e| LabError::io(&p, e))?;
        out.push(p);
    }
    out.dedup();
    Ok(out)
}

/// Emit the specs of `name` into `dir` and run each from its file into
/// `dir/<item>/`. Returns the per-item summaries and whether any failed.
/// The acceptance suite is evaluated by [`crate::acceptance::run_all`]
/// instead, which shares runs between criteria.
pub fn run_recipe(name: &str, dir: &Path, seed: Option<u64>) -> LabResult<(Value, bool)> {
    let items = recipe(name)?;
    emit(&items, dir)?;
    if name == "acceptance-suite" {
        let results = crate::acceptance::run_all();
        let failed = results.iter().any(|c| !c.pass);
        for c in &results {
            println!("{}", c.line());
        }
        let body = json!({
            "recipe": name,
            "criteria": results.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        });
        write_json(
            &dir.join("acceptance.json"),
            body.clone(),
            &suite_hash(&items)?,
        )?;
        return Ok((body, failed));
    }
    let mut runs = Vec::new();
    let mut failed = false;
    for it in &items {
        let mut exp = parse_config(&dir.join(format!("{}.toml", it.name)))?;
        if let Some(s) = seed {
            exp = exp.with_seed(s);
        }
        let o = crate::commands::run(&exp, &dir.join(&it.name))?;
        failed |= o.failed;
        runs.push(json!({"item": it.name, "config_sha256": exp.hash, "failed": o.failed, "summary": o.summary}));
    }
    let body = json!({ "recipe": name, "runs": runs });
    write_json(&dir.join("recipe.json"), body.clone(), &suite_hash(&items)?)?;
    Ok((body, failed))
}

/// Hash of the item hashes, for files that summarise a whole recipe.
fn suite_hash(items: &[RecipeItem]) -> LabResult<String> {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for it in items {
        h.update(it.experiment()?.hash.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}
