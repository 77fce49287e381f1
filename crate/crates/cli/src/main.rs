use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use vplab::dynamics::{
    evolve, force_solver, integrator, read_snapshot, write_snapshot, DiagnosticsRecord, EvolveOptions, ForceParams,
};
use vplab::stability::{concentration_profile, stability_experiment, ExperimentConfig};
use vplab::steady::{build_steady, export_steady, sampler, BuildOptions, CasimirFunction, SteadyState};
use vplab::verify::{self, VerifyOptions};

#[derive(Parser)]
#[command(name = "vplab", version, about = "Steady states and stability experiments for gravitational Vlasov-Poisson")]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true, env = "VPLAB_THREADS")]
    threads: Option<usize>,
    /// Log filter, e.g. `info` or `vplab=debug`; overridden by RUST_LOG.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a steady state and write its JSON header and radial table.
    BuildSteady {
        #[command(flatten)]
        steady: SteadyArgs,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// File stem for `<stem>.json` and `<stem>.csv`.
        #[arg(long, default_value = "steady")]
        stem: String,
    },
    /// Sample markers from a steady state into a snapshot CSV.
    Sample {
        #[command(flatten)]
        steady: SteadyArgs,
        #[arg(short = 'n', long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Phase-space sampler (rejection, quasi-random).
        #[arg(long, default_value = "rejection")]
        sampler: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a snapshot and record conserved quantities.
    Evolve {
        /// Reference steady state: sets the time and length units and the frozen field.
        #[command(flatten)]
        steady: SteadyArgs,
        /// Input snapshot CSV.
        #[arg(long)]
        input: PathBuf,
        /// Output directory for diagnostics.csv and final.csv.
        #[arg(long)]
        out: PathBuf,
        /// Force solver (direct, tree, shell, frozen).
        #[arg(long, default_value = "tree")]
        method: String,
        /// Integrator (leapfrog, leapfrog-dkd).
        #[arg(long, default_value = "leapfrog")]
        scheme: String,
        /// Plummer softening in units of R; defaults to a size-dependent value.
        #[arg(long)]
        softening: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Time step in units of T_dyn.
        #[arg(long, default_value_t = 0.005)]
        dt_tdyn: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon_tdyn: f64,
        #[arg(long, default_value_t = 1.0)]
        cadence_tdyn: f64,
    },
    /// Run a stability experiment from a JSON config.
    Stability {
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Verify {
        /// `all`, a suite name, or comma-separated criterion ids.
        #[arg(long, default_value = "all")]
        suite: String,
        /// List the criteria without running them.
        #[arg(long)]
        list: bool,
        /// Multiplier on the polytrope constant (fault injection).
        #[arg(long, default_value_t = 1.0)]
        ck_scale: f64,
    },
    /// Mass in the best-placed ball of each radius for a snapshot.
    Concentration {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated radii.
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SteadyArgs {
    /// Polytropic index, 0 < k < 3/2.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// JSON Casimir description (`{"kind": ...}`); replaces `--k`.
    #[arg(long)]
    casimir: Option<String>,
}

impl SteadyArgs {
    fn build(&self) -> Result<SteadyState> {
        let casimir = match &self.casimir {
            Some(text) => {
                let desc: serde_json::Value = serde_json::from_str(text).map_err(vplab::Error::from)?;
                CasimirFunction::from_params(&desc)?
            }
            None => CasimirFunction::polytropic(self.k)?,
        };
        Ok(build_steady(&casimir, self.mass, &BuildOptions::default())?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).parse_default_env().init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| c.downcast_ref::<vplab::Error>().is_some_and(vplab::Error::is_usage));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::BuildSteady { steady, out, stem } => {
            let s = steady.build()?;
            let (json_path, csv_path) = export_steady(&s, &out, &stem)?;
            println!("E0 = {:.10e}", s.e0);
            println!("R = {:.10e}", s.radius);
            println!("h_M = {:.10e}", s.h_m);
            println!("virial residual = {:.3e}", s.virial_residual());
            println!("wrote {} and {}", json_path.display(), csv_path.display());
        }
        Command::Sample { steady, n, seed, sampler: name, out } => {
            let smp = sampler(&name)?;
            let s = steady.build()?;
            let ens = smp.sample(&s, n, seed)?;
            write_snapshot(&out, &ens)?;
            println!("wrote {n} markers to {}", out.display());
        }
        Command::Evolve {
            steady,
            input,
            out,
            method,
            scheme,
            softening,
            theta,
            dt_tdyn,
            horizon_tdyn,
            cadence_tdyn,
        } => {
            let s = Arc::new(steady.build()?);
            let mut ens = read_snapshot(&input)?;
            let eps = softening.map_or_else(|| vplab::dynamics::default_softening(s.radius, ens.len()), |f| f * s.radius);
            ens.softening = eps;
            let forces = force_solver(&method, &ForceParams { softening: eps, theta, steady: Some(s.clone()) })?;
            let scheme = integrator(&scheme)?;
            let t_dyn = s.t_dyn();
            let opts = EvolveOptions::covering(horizon_tdyn * t_dyn, dt_tdyn * t_dyn, cadence_tdyn * t_dyn)?;
            let traj = evolve(ens, &opts, forces.as_ref(), scheme.as_ref(), |_, _| Ok(()))?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut w = csv::Writer::from_path(out.join("diagnostics.csv"))?;
            w.write_record(DiagnosticsRecord::CSV_HEADER)?;
            for r in &traj.records {
                w.write_record(r.csv_row())?;
            }
            w.flush()?;
            write_snapshot(&out.join("final.csv"), &traj.state)?;
            let (first, last) = (&traj.records[0], &traj.records[traj.records.len() - 1]);
            println!("steps = {}, t = {:.6e}", opts.steps, last.t);
            println!("relative energy drift = {:.3e}", ((last.energy - first.energy) / first.energy).abs());
            if let Some(reason) = traj.halted {
                eprintln!("halted: {reason}");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Stability { config, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if out.is_some() {
                cfg.output_dir = out;
            }
            let rep = stability_experiment(&cfg)?;
            println!("records = {}", rep.records.len());
            println!("initial total = {:.6e}", rep.initial_total);
            println!("sup total at optimal shift = {:.6e}", rep.sup_total_opt);
            println!("max identity residual = {:.3e}", rep.max_identity_residual);
            if let Some(reason) = rep.halted {
                eprintln!("halted: {reason}");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { suite, list, ck_scale } => {
            let selected = verify::select(&suite)?;
            if list {
                for c in &selected {
                    println!("{:>2} [{}] {}: {}", c.id, c.suite, c.name, c.description);
                }
                return Ok(ExitCode::SUCCESS);
            }
            let results = verify::run(&selected, &VerifyOptions { ck_scale }, |r| {
                println!("{}", r.line());
                let _ = io::stdout().flush();
            });
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Concentration { input, radii, out } => {
            let ens = read_snapshot(&input)?;
            let profile = concentration_profile(&ens, &radii, &Default::default())?;
            let sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
                None => Box::new(io::stdout()),
            };
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["radius", "mass", "c_x", "c_y", "c_z"])?;
            for p in &profile {
                w.write_record(
                    [p.radius, p.mass, p.center[0], p.center[1], p.center[2]].iter().map(|v| format!("{v:e}")),
                )?;
            }
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
