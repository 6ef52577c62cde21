//! Execution of one experiment into an output directory.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use wavegauge_core::asymptotics::{
    build_einstein_system, classify_weak_null, has_lblb_self_coupling, integrate,
    sharp_decay_targets, CharHistory, CharProfile, CharSystem, ComponentRate, Verdict,
};
use wavegauge_core::evolution::{evolve, oracle_compare, scalar_slice, Mode, RunResult};
use wavegauge_core::initdata::{
    build_cauchy_data, constraint_residual, generate_small_data, initial_energy, FullSlice,
};

use crate::analysis::RunFits;
use crate::config::{Command, Experiment, SystemSource};
use crate::error::{LabError, LabResult};
use crate::output::{num, write_csv, write_json, GridSnapshot, Table};

/// Files written by a run and whether it hit a numerical failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub failed: bool,
    pub summary: Value,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failed)
    }
}

struct Ctx<'a> {
    exp: &'a Experiment,
    out: &'a Path,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.files.push(p.clone());
        p
    }

    fn hash(&self) -> &str {
        &self.exp.hash
    }

    /// Summary common to every command.
    fn summary(&self, body: Value) -> Value {
        let mut v = json!({
            "command": self.exp.spec.command.name(),
            "seed": self.exp.spec.seed,
            "config": self.exp.spec,
        });
        if let (Value::Object(o), Value::Object(b)) = (&mut v, body) {
            o.extend(b);
        }
        v
    }

    fn write_summary(&mut self, body: Value) -> LabResult<Value> {
        let v = self.summary(body);
        let p = self.path("summary.json");
        write_json(&p, v.clone(), self.hash())?;
        Ok(v)
    }
}

/// Run `exp`, writing into `out` (created if missing). Numerical errors
/// are recorded in `summary.json` and reported through
/// [`RunOutcome::failed`]; only IO and format problems return `Err`.
pub fn run(exp: &Experiment, out: &Path) -> LabResult<RunOutcome> {
    std::fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let mut ctx = Ctx {
        exp,
        out,
        files: Vec::new(),
    };
    let result = match exp.spec.command {
        Command::Evolve => run_evolve(&mut ctx),
        Command::Initdata => run_initdata(&mut ctx),
        Command::Check => run_check(&mut ctx),
        Command::Asymptotic => run_asymptotic(&mut ctx),
        Command::Classify => run_classify(&mut ctx),
        Command::OracleCompare => run_oracle(&mut ctx),
    };
    match result {
        Ok((summary, failed)) => Ok(RunOutcome {
            files: ctx.files,
            failed,
            summary,
        }),
        Err(LabError::Numerical(e)) => {
            let summary = ctx.write_summary(json!({ "failure": { "error": e.to_string() } }))?;
            Ok(RunOutcome {
                files: ctx.files,
                failed: true,
                summary,
            })
        }
        Err(e) => Err(e),
    }
}

/// Initial slice for an evolve-type spec: scalar data on flat space in
/// linear mode, solved constraint data otherwise.
pub fn initial_slice(exp: &Experiment) -> LabResult<FullSlice> {
    let spec = &exp.spec;
    let cfg = spec.run_config();
    let grid = cfg.grid();
    match cfg.mode {
        Mode::Linear => {
            let psi = grid.sample(|x| cfg.epsilon * cfg.profile.value(x));
            let mut s = scalar_slice(grid, cfg.symmetry, psi, vec![0.0; grid.len()])?;
            s.epsilon = cfg.epsilon;
            Ok(s)
        }
        Mode::Einstein => {
            let data = generate_small_data(
                grid,
                cfg.symmetry,
                cfg.profile,
                cfg.epsilon,
                &spec.solver_options(),
            )?;
            Ok(build_cauchy_data(&data)?)
        }
    }
}

pub fn series_table(run: &RunResult) -> Table {
    let n = run.config.energy_order;
    let mut header = vec!["t".to_string()];
    header.extend((0..=n).map(|k| format!("E{k}")));
    header.extend(
        [
            "gauge_res_sup",
            "gauge_floor",
            "dh_TU_sup",
            "dh_LL_sup",
            "dh_LbLb_sup",
            "dh_sup",
            "dpsi_sup",
            "h_LT_sup",
            "ks_ratio",
            "wavec_ratio",
            "wavec_ratio_z",
            "max_deviation",
        ]
        .map(String::from),
    );
    let mut t = Table::new(header);
    for r in &run.series.records {
        let mut row = vec![Some(r.t)];
        row.extend((0..=n).map(|k| r.energies.get(k).copied()));
        let m = r.null;
        row.extend([
            Some(r.gauge_sup),
            Some(r.gauge_floor),
            m.map(|m| m.tu),
            m.map(|m| m.ll),
            m.map(|m| m.lblb),
            m.map(|m| m.full),
            m.map(|m| m.dpsi),
            m.map(|m| m.h_lt),
            r.ks,
            r.wavec.map(|w| w.ratio),
            r.wavec.map(|w| w.ratio_z),
            Some(r.max_deviation),
        ]);
        t.push(row);
    }
    t
}

fn run_evolve(ctx: &mut Ctx) -> LabResult<(Value, bool)> {
    let exp = ctx.exp;
    let cfg = exp.spec.run_config();
    let slice = initial_slice(exp)?;
    let run = evolve(&cfg, &slice)?;
    let p = ctx.path("series.csv");
    write_csv(&p, &series_table(&run), ctx.hash())?;
    if exp.spec.output.snapshot {
        let p = ctx.path("final.grid");
        GridSnapshot::from_state(&run.final_state, run.mass, cfg.epsilon).write(&p, ctx.hash())?;
    }
    let failure = run
        .failure
        .as_ref()
        .map(|f| json!({"step": f.step, "t": num(f.t), "error": f.error.to_string()}));
    let summary = ctx.write_summary(json!({
        "mass": num(run.mass),
        "dt": num(run.dt),
        "steps": run.steps,
        "records": run.series.len(),
        "gauge_initial": num(run.gauge_initial),
        "gauge_scale": num(run.gauge_scale),
        "failure": failure,
        "fits": RunFits::from_run(&run).to_json(),
    }))?;
    Ok((summary, run.failure.is_some()))
}

fn constraint_report(exp: &Experiment) -> LabResult<(Value, Option<FullSlice>)> {
    let spec = &exp.spec;
    let cfg = spec.run_config();
    if cfg.mode == Mode::Linear {
        return Ok((json!({"mode": "linear"}), Some(initial_slice(exp)?)));
    }
    let data = generate_small_data(
        cfg.grid(),
        cfg.symmetry,
        cfg.profile,
        cfg.epsilon,
        &spec.solver_options(),
    )?;
    let res = constraint_residual(&data)?;
    let e0 = initial_energy(&data, cfg.energy_order, cfg.weights.gamma)?;
    let slice = build_cauchy_data(&data);
    let report = json!({
        "mode": "einstein",
        "mass": num(data.mass),
        "hamiltonian_sup": num(res.hamiltonian_sup),
        "momentum_sup": num(res.momentum_sup),
        "initial_energy": num(e0),
        "constraints_satisfied": slice.is_ok(),
    });
    Ok((report, slice.ok()))
}

fn run_initdata(ctx: &mut Ctx) -> LabResult<(Value, bool)> {
    let (report, slice) = constraint_report(ctx.exp)?;
    let failed = slice.is_none();
    if let Some(s) = slice {
        let p = ctx.path("data.grid");
        GridSnapshot::from_slice(&s).write(&p, ctx.hash())?;
    }
    let summary = ctx.write_summary(json!({ "initdata": report }))?;
    Ok((summary, failed))
}

/// Validate the data a run would start from, without evolving.
fn run_check(ctx: &mut Ctx) -> LabResult<(Value, bool)> {
    let (report, slice) = constraint_report(ctx.exp)?;
    let summary = ctx.write_summary(json!({ "check": report }))?;
    Ok((summary, slice.is_none()))
}

pub fn char_system(exp: &Experiment) -> LabResult<CharSystem> {
    let a = &exp.spec.asymptotic;
    Ok(match &exp.system {
        Some(SystemSource::File { system, .. }) => CharSystem::from_wave_system(system, a.omega)?,
        _ => build_einstein_system(a.mass, exp.spec.hll_mode(), a.omega)?,
    })
}

fn rates_json(rates: &[ComponentRate]) -> Value {
    Value::Array(
        rates
            .iter()
            .map(|r| {
                json!({
                    "label": r.label,
                    "ln_slope": num(r.ln_slope),
                    "r2": num(r.r2),
                    "growth": num(r.growth),
                    "grows": r.grows(),
                    "zero": r.zero,
                })
            })
            .collect(),
    )
}

pub fn history_table(h: &CharHistory) -> Table {
    let mut header = vec!["l".to_string()];
    header.extend(h.labels.iter().map(|l| format!("sup_{l}")));
    let mut t = Table::new(header);
    for s in &h.samples {
        let mut row = vec![Some(s.l)];
        row.extend(s.sup.iter().map(|v| Some(*v)));
        t.push(row);
    }
    t
}

fn run_asymptotic(ctx: &mut Ctx) -> LabResult<(Value, bool)> {
    let exp = ctx.exp;
    let a = &exp.spec.asymptotic;
    let sys = char_system(exp)?;
    let seeded: Vec<usize> = if a.seeded.is_empty() {
        (0..sys.len()).collect()
    } else {
        a.seeded.iter().filter_map(|s| sys.index_of(s)).collect()
    };
    let data = CharProfile::gaussian_seed(sys.len(), &seeded, a.epsilon, a.nq);
    let h = integrate(&sys, &data, &exp.spec.integrate_options())?;
    let p = ctx.path("history.csv");
    write_csv(&p, &history_table(&h), ctx.hash())?;
    let rates = sharp_decay_targets(&h).ok();
    let einstein = matches!(exp.system, Some(SystemSource::Einstein));
    let summary = ctx.write_summary(json!({
        "labels": h.labels,
        "blowup": h.blowup.map(num),
        "blowup_uncertainty": h.blowup.map(|_| num(h.blowup_uncertainty)),
        "rates": rates.as_deref().map(rates_json),
        "lblb_self_coupling": einstein.then(|| has_lblb_self_coupling(&sys)),
    }))?;
    Ok((summary, false))
}

pub fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::NullCondition => json!({"verdict": v.name()}),
        Verdict::WeakNullGlobal { rates } => {
            json!({"verdict": v.name(), "rates": rates_json(rates)})
        }
        Verdict::BlowUp { table, slope, r2 } => json!({
            "verdict": v.name(),
            "blowup_table": table.iter().map(|(e, l)| json!({"epsilon": num(*e), "l_star": num(*l)})).collect::<Vec<_>>(),
            "slope_vs_inverse_epsilon": num(*slope),
            "r2": num(*r2),
        }),
    }
}

fn run_classify(ctx: &mut Ctx) -> LabResult<(Value, bool)> {
    let exp = ctx.exp;
    let a = &exp.spec.asymptotic;
    let Some(SystemSource::File { system, .. }) = &exp.system else {
        return Err(LabError::Config("classify needs a system file".into()));
    };
    let v = classify_weak_null(system, &a.epsilons, a.l_max.exp(), a.nq)?;
    if let Verdict::BlowUp { table, .. } = &v {
        let mut t = Table::new(["epsilon", "l_star"]);
        for (e, l) in table {
            t.push(vec![Some(*e), Some(*l)]);
        }
        let p = ctx.path("blowup.csv");
        write_csv(&p, &t, ctx.hash())?;
    }
    let summary = ctx.write_summary(verdict_json(&v))?;
    Ok((summary, false))
}

fn run_oracle(ctx: &mut Ctx) -> LabResult<(Value, bool)> {
    let exp = ctx.exp;
    let r = oracle_compare(&exp.spec.run_config(), exp.spec.oracle.n_polar)?;
    let mut t = Table::new(["n", "dx", "samples", "linf", "l2"]);
    for l in &r.levels {
        t.push(vec![
            Some(l.n as f64),
            Some(l.dx),
            Some(l.samples as f64),
            Some(l.linf),
            Some(l.l2),
        ]);
    }
    let p = ctx.path("convergence.csv");
    write_csv(&p, &t, ctx.hash())?;
    let summary = ctx.write_summary(json!({
        "amplitude": num(r.amplitude),
        "order_linf": num(r.order_linf),
        "order_l2": num(r.order_l2),
        "finest_linf_relative": r.levels.last().map(|l| num(l.linf / r.amplitude)),
    }))?;
    Ok((summary, false))
}
