//! The full stability experiment: build, perturb, evolve, measure.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::concentration::{concentration_profile, ConcentrationOptions, ConcentrationPoint};
use super::config::ExperimentConfig;
use super::perturb::{perturb, perturbation};
use super::shift::{optimal_shift, ShiftResult};
use crate::dynamics::{default_softening, evolve, force_solver, integrator, write_snapshot, EvolveOptions, ForceParams};
use crate::ensemble::{ParticleEnsemble, Vec3};
use crate::error::{Error, Result};
use crate::functionals::{
    dd_identity_residual, Evaluation, FunctionalReport, PairMethod, PairOptions, SteadyConstants,
};
use crate::steady::{build_steady, sampler, BuildOptions, CasimirFunction, SteadyState};

/// Metric at the zero shift and at the optimized shift.
#[derive(Debug, Clone, Serialize)]
pub struct MetricRecord {
    /// Functionals of `f^a` at the optimized shift.
    pub report: FunctionalReport,
    pub d0: f64,
    pub field0: f64,
    pub total0: f64,
    pub total_opt: f64,
    pub shift: ShiftResult,
    pub identity_residual: f64,
}

impl MetricRecord {
    pub fn csv_header() -> Vec<&'static str> {
        let mut h = FunctionalReport::CSV_HEADER.to_vec();
        h.extend(["d0", "field0", "total0", "total_opt"]);
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut row = self.report.csv_row();
        row.extend([self.d0, self.field0, self.total0, self.total_opt].iter().map(|v| format!("{v:e}")));
        row
    }
}

/// Measures one state against the steady state.
pub fn measure(
    ens: &ParticleEnsemble,
    steady: &SteadyState,
    consts: &SteadyConstants,
    pair: &PairOptions,
    shift_opts: &super::shift::ShiftOptions,
    start: Option<Vec3>,
) -> Result<MetricRecord> {
    let eval = Evaluation::new(ens, steady, consts, pair)?;
    let zero = eval.report(&Vec3::zeros());
    let shift = optimal_shift(ens, &eval, steady.radius, consts.i00, start, shift_opts)?;
    let report = eval.report(&shift.vector());
    Ok(MetricRecord {
        d0: zero.d_value,
        field0: zero.field_distance,
        total0: zero.total(),
        total_opt: report.total(),
        identity_residual: dd_identity_residual(&report, consts).max(dd_identity_residual(&zero, consts)),
        report,
        shift,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub records: Vec<MetricRecord>,
    /// Metric of the initial data at the optimized shift.
    pub initial_total: f64,
    /// Running supremum of the shifted metric over the run.
    pub sup_total_opt: f64,
    pub max_identity_residual: f64,
    pub concentration_initial: Vec<ConcentrationPoint>,
    pub concentration_final: Vec<ConcentrationPoint>,
    pub halted: Option<String>,
    pub t_dyn: f64,
    pub dt: f64,
    pub softening: f64,
    pub steady_summary: Value,
}

pub fn steady_from_spec(cfg: &ExperimentConfig) -> Result<SteadyState> {
    let casimir = match (&cfg.steady.casimir, cfg.steady.k) {
        (Some(desc), _) => CasimirFunction::from_params(desc)?,
        (None, Some(k)) => CasimirFunction::polytropic(k)?,
        (None, None) => return Err(Error::Config("steady.k: required unless steady.casimir is given".into())),
    };
    build_steady(&casimir, cfg.steady.mass, &BuildOptions::default())
}

struct Outputs {
    dir: PathBuf,
    metrics: csv::Writer<File>,
    files: Vec<String>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir.join("snapshots")).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("metrics.csv");
        let mut metrics = csv::Writer::from_path(&path)?;
        metrics.write_record(MetricRecord::csv_header())?;
        Ok(Outputs { dir: dir.to_path_buf(), metrics, files: vec!["metrics.csv".into()] })
    }

    fn snapshot(&mut self, ens: &ParticleEnsemble, step: usize) -> Result<()> {
        let name = format!("snapshots/step_{step:08}.csv");
        write_snapshot(&self.dir.join(&name), ens)?;
        self.files.push(name);
        Ok(())
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))
}

fn write_concentration(path: &Path, rows: &[(f64, &[ConcentrationPoint])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "radius", "mass", "c_x", "c_y", "c_z"])?;
    for (t, points) in rows {
        for p in *points {
            w.write_record(
                [*t, p.radius, p.mass, p.center[0], p.center[1], p.center[2]].iter().map(|v| format!("{v:e}")),
            )?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn manifest(cfg: &ExperimentConfig, status: &str, extra: Value) -> Value {
    let mut m = json!({
        "status": status,
        "code_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seed": cfg.seed,
        "threads": rayon::current_num_threads(),
    });
    if let (Value::Object(m), Value::Object(extra)) = (&mut m, extra) {
        m.extend(extra);
    }
    m
}

/// Runs the experiment described by `cfg`, persisting outputs to
/// `cfg.output_dir` when set. On failure the manifest records the error and
/// the outputs written so far are kept.
pub fn stability_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let pert = perturbation(&cfg.perturbation.kind, &cfg.perturbation.params)?;
    let smp = sampler(&cfg.sampler)?;
    let scheme = integrator(&cfg.integrator.scheme)?;
    let started = Instant::now();

    let mut out = match &cfg.output_dir {
        Some(dir) => {
            let o = Outputs::create(dir)?;
            write_json(&dir.join("manifest.json"), &manifest(cfg, "running", json!({})))?;
            Some(o)
        }
        None => None,
    };
    let result = run(cfg, pert.as_ref(), smp.as_ref(), scheme.as_ref(), &mut out);
    if let (Some(o), Some(dir)) = (out.as_mut(), &cfg.output_dir) {
        o.metrics.flush().map_err(|e| Error::io(dir, e))?;
        let wall = started.elapsed().as_secs_f64();
        let extra = match &result {
            Ok(rep) => json!({
                "wall_clock_seconds": wall,
                "t_dyn": rep.t_dyn,
                "dt": rep.dt,
                "softening": rep.softening,
                "method": cfg.integrator.method,
                "theta": cfg.integrator.theta,
                "steady": rep.steady_summary,
                "tolerances": { "shift_ftol": cfg.shift.ftol, "shift_max_iter": cfg.shift.max_iter },
                "summary": {
                    "initial_total": rep.initial_total,
                    "sup_total_opt": rep.sup_total_opt,
                    "max_identity_residual": rep.max_identity_residual,
                    "records": rep.records.len(),
                    "halted": rep.halted,
                },
                "files": o.files,
            }),
            Err(e) => json!({ "wall_clock_seconds": wall, "error": e.to_string(), "files": o.files }),
        };
        let status = match &result {
            Ok(rep) if rep.halted.is_none() => "complete",
            Ok(_) => "halted",
            Err(_) => "failed",
        };
        write_json(&dir.join("manifest.json"), &manifest(cfg, status, extra))?;
    }
    result
}

fn run(
    cfg: &ExperimentConfig,
    pert: &dyn super::perturb::Perturbation,
    smp: &dyn crate::steady::PhaseSampler,
    scheme: &dyn crate::dynamics::Integrator,
    out: &mut Option<Outputs>,
) -> Result<ExperimentReport> {
    let steady = Arc::new(steady_from_spec(cfg)?);
    let consts = SteadyConstants::new(&steady)?;
    let t_dyn = steady.t_dyn();
    let dt = cfg.integrator.dt.unwrap_or(cfg.integrator.dt_tdyn * t_dyn);
    let softening = cfg.integrator.softening.unwrap_or_else(|| default_softening(steady.radius, cfg.n));
    let forces = force_solver(
        &cfg.integrator.method,
        &ForceParams {
            softening,
            theta: cfg.integrator.theta,
            steady: Some(steady.clone()),
        },
    )?;
    let pair = PairOptions {
        softening,
        method: if cfg.integrator.method == "tree" {
            PairMethod::Tree { theta: cfg.integrator.theta }
        } else {
            PairMethod::Direct
        },
        continuum: cfg.field_estimate == super::config::FieldEstimate::Continuum,
    };
    let mut ens = perturb(&steady, pert, smp, cfg.n, cfg.seed)?;
    ens.softening = softening;
    log::info!(
        "steady state: M = {}, R = {:.6e}, E0 = {:.6e}, h_M = {:.6e}, T_dyn = {:.6e}",
        steady.mass,
        steady.radius,
        steady.e0,
        steady.h_m,
        t_dyn
    );
    let radii: Vec<f64> = cfg.concentration_radii.iter().map(|r| r * steady.radius).collect();
    let conc_opts = ConcentrationOptions::default();
    let concentration_initial = concentration_profile(&ens, &radii, &conc_opts)?;

    let opts = EvolveOptions::covering(cfg.horizon_tdyn * t_dyn, dt, cfg.cadence_tdyn * t_dyn)?;
    let mut records: Vec<MetricRecord> = Vec::new();
    let mut last_shift: Option<Vec3> = None;
    let snapshot_all = cfg.snapshot_every_record;
    let traj = evolve(ens, &opts, forces.as_ref(), scheme, |state, step| {
        let rec = measure(state, &steady, &consts, &pair, &cfg.shift, None)?;
        // The previous optimum is a second starting point; keep the better.
        let rec = match last_shift {
            Some(prev) => {
                let alt = measure(state, &steady, &consts, &pair, &cfg.shift, Some(prev))?;
                if alt.total_opt < rec.total_opt {
                    alt
                } else {
                    rec
                }
            }
            None => rec,
        };
        last_shift = Some(rec.shift.vector());
        log::info!(
            "t = {:.3} T_dyn: total0 = {:.4e}, total_opt = {:.4e}, |a| = {:.3e}",
            state.time / t_dyn,
            rec.total0,
            rec.total_opt,
            rec.shift.vector().norm()
        );
        if let Some(o) = out.as_mut() {
            o.metrics.write_record(rec.csv_row())?;
            o.metrics.flush().map_err(|e| Error::io(&o.dir, e))?;
            if snapshot_all || step == 0 {
                o.snapshot(state, step)?;
            }
        }
        records.push(rec);
        Ok(())
    })?;
    let final_step = traj.records.last().map(|r| r.step).unwrap_or(0);
    if let Some(o) = out.as_mut() {
        if !snapshot_all && final_step > 0 {
            o.snapshot(&traj.state, final_step)?;
        }
    }
    let concentration_final = concentration_profile(&traj.state, &radii, &conc_opts)?;
    if let Some(o) = out.as_mut() {
        let path = o.dir.join("concentration.csv");
        write_concentration(&path, &[(0.0, &concentration_initial), (traj.state.time, &concentration_final)])?;
        o.files.push("concentration.csv".into());
    }
    let initial_total = records.first().map(|r| r.total_opt).unwrap_or(f64::NAN);
    let sup_total_opt = records.iter().map(|r| r.total_opt).fold(f64::NEG_INFINITY, f64::max);
    let max_identity_residual = records.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
    Ok(ExperimentReport {
        records,
        initial_total,
        sup_total_opt,
        max_identity_residual,
        concentration_initial,
        concentration_final,
        halted: traj.halted,
        t_dyn,
        dt,
        softening,
        steady_summary: json!({
            "M": steady.mass, "R": steady.radius, "E0": steady.e0, "h_M": steady.h_m,
            "casimir": steady.casimir.params(),
        }),
    })
}
