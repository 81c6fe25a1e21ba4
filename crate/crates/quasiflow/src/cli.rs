//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use quasiflow_core::bifurcation::{self, BisectOptions, BisectionResult, Setup};
use quasiflow_core::flow::{self, EvolveConfig};
use quasiflow_core::stationary::{self, StationaryProfile};
use quasiflow_core::{energy, spectral, Params, RadialGrid};

use crate::acceptance;
use crate::error::CliError;
use crate::input::{self, ProfileSpec, PROFILE_FILE};
use crate::record::{self, CheckRow, GridSpec, RunRecord, RunRow, SweepRow};
use crate::sweep;

#[derive(Debug, Parser)]
#[command(name = "quasiflow", version, about = "Radial quasi-linear parabolic flow: evolution, ground states, spectra and blow-up thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Model {
    /// Spatial dimension N.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Exponent p of the nonlinearity.
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    /// Outer radius of the computational ball.
    #[arg(long, default_value_t = 15.0)]
    rmax: f64,
    /// Number of grid cells.
    #[arg(long, default_value_t = 1500)]
    nr: usize,
    /// Accept exponents outside the range covered by the theory.
    #[arg(long)]
    exploratory: bool,
    /// Output directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

impl Model {
    fn params(&self, kappa: f64, lambda: f64) -> Result<Params, CliError> {
        let params = if self.exploratory {
            Params::exploratory(self.dim, self.p, kappa, lambda)?
        } else {
            Params::new(self.dim, self.p, kappa, lambda)?
        };
        Ok(params)
    }

    fn grid(&self) -> Result<Arc<RadialGrid>, CliError> {
        Ok(Arc::new(RadialGrid::new(self.dim, self.rmax, self.nr)?))
    }

    fn grid_spec(&self) -> GridSpec {
        GridSpec {
            rmax: self.rmax,
            nr: self.nr,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct Flow {
    /// Initial profile: gauss:σ, bump:σ or file:path (columns r,value).
    #[arg(long, default_value = "gauss:4")]
    profile: ProfileSpec,
    /// Time horizon of each evolution.
    #[arg(long, default_value_t = 200.0)]
    tmax: f64,
    /// Spacing of stored snapshots.
    #[arg(long, default_value_t = 1.0)]
    cadence: f64,
}

#[derive(Debug, Clone, Args)]
struct Search {
    /// Initial amplitude bracket lo:hi.
    #[arg(long, default_value = "0.05:10", value_parser = input::parse_bracket)]
    bracket: (f64, f64),
    /// Cap on bracket-narrowing steps.
    #[arg(long, default_value_t = 12)]
    iters: usize,
    /// Stop once the bracket is this narrow.
    #[arg(long, default_value_t = 1e-2)]
    width: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve λφ₀ and classify the run.
    Evolve {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Amplitude of the initial profile.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[command(flatten)]
        flow: Flow,
    },
    /// Compute the ground state by shooting.
    Shoot {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Width of the final shooting bracket.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Spectrum of the linearization around the ground state.
    Spectrum {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Bracket the threshold amplitude λ₀ by bisection.
    Bisect {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[command(flatten)]
        flow: Flow,
        #[command(flatten)]
        search: Search,
    },
    /// Bracket λ₀ for several κ at once.
    SweepKappa {
        #[command(flatten)]
        model: Model,
        /// Ascending comma-separated values of κ.
        #[arg(long, default_value = "0,1", value_parser = input::parse_kappas)]
        kappas: Vec<f64>,
        #[command(flatten)]
        flow: Flow,
        #[command(flatten)]
        search: Search,
    },
    /// Re-check stored ground states and run acceptance criteria.
    Verify {
        /// Record written by `shoot`; may be repeated.
        #[arg(long)]
        stored: Vec<PathBuf>,
        /// Criteria to run: comma-separated numbers or `all`. Defaults to
        /// all when no stored profile is given.
        #[arg(long)]
        criteria: Option<String>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                crate::error::EXIT_PRECONDITION
            } else {
                0
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    let start = Instant::now();
    match command {
        Command::Evolve {
            model,
            kappa,
            lambda,
            flow,
        } => evolve(&model, kappa, lambda, &flow, start),
        Command::Shoot { model, kappa, tol } => shoot(&model, kappa, tol, start),
        Command::Spectrum { model, kappa, tol } => spectrum(&model, kappa, tol, start),
        Command::Bisect {
            model,
            kappa,
            flow,
            search,
        } => bisect(&model, kappa, &flow, &search, start),
        Command::SweepKappa {
            model,
            kappas,
            flow,
            search,
        } => sweep_kappa(&model, &kappas, &flow, &search, start),
        Command::Verify {
            stored,
            criteria,
            out,
        } => verify(&stored, criteria.as_deref(), &out, start),
    }
}

fn finish(mut record: RunRecord, out: &Path, start: Instant) -> Result<(), CliError> {
    record.wall_time = start.elapsed().as_secs_f64();
    let path = out.join(format!("{}.json", record.command));
    record::write_atomic(&path, &record::serialize_run(&record)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_file(out: &Path, name: &str, bytes: &[u8], record: &mut RunRecord) -> Result<(), CliError> {
    record::write_atomic(&out.join(name), bytes)?;
    record.series_files.push(name.to_owned());
    Ok(())
}

fn setup(model: &Model, kappa: f64, flow: &Flow) -> Result<Setup, CliError> {
    let params = model.params(kappa, 0.0)?;
    let grid = model.grid()?;
    let kind = flow.profile.to_kind(&grid)?;
    let mut setup = Setup::new(params, kind, grid, flow.tmax);
    setup.cadence = flow.cadence;
    Ok(setup)
}

fn evolve(model: &Model, kappa: f64, lambda: f64, flow: &Flow, start: Instant) -> Result<i32, CliError> {
    let params = model.params(kappa, lambda)?;
    let setup = setup(model, kappa, flow)?;
    let u0 = flow::initial_profile(&setup.profile, lambda, setup.grid.clone())?;
    let config = EvolveConfig::for_grid(&setup.grid);
    let traj = flow::evolve(&params, &u0, flow.tmax, flow.cadence, &config)?;

    let mut record = RunRecord::new("evolve", &params, model.grid_spec());
    record.profile = Some(flow.profile.to_string());
    record.classification = Some(traj.classification.to_string());
    record.scalar("t_end", traj.t_end);
    record.scalar("max_sup_norm", traj.max_sup_norm());
    record.scalar("final_sup_norm", traj.final_snapshot().field.sup_norm());
    record.scalar("initial_energy", traj.series[0].energy);
    if let Some(t0) = traj.blowup_certificate {
        record.scalar("certificate_time", t0);
    }
    record.scalar("energy_increase", energy::energy_increase(&traj));
    record.scalar("monotonicity_increase", flow::monotonicity_check(&traj).max_increase);
    if let Ok(reports) = energy::energy_identity_residual(&traj) {
        let worst = reports.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
        record.scalar("energy_identity_residual", worst);
    }
    write_file(&model.out, "evolve_series.csv", &record::series_csv(&traj.series), &mut record)?;
    println!("classification: {}", traj.classification);
    finish(record, &model.out, start)?;
    Ok(0)
}

fn shoot(model: &Model, kappa: f64, tol: f64, start: Instant) -> Result<i32, CliError> {
    let params = model.params(kappa, 0.0)?;
    let profile = stationary::shoot(&params, model.grid()?, tol)?;
    let mut record = RunRecord::new("shoot", &params, model.grid_spec());
    profile_scalars(&profile, &mut record);
    let rows = profile
        .grid()
        .nodes()
        .iter()
        .zip(profile.w.values())
        .zip(&profile.dw)
        .map(|((&r, &w), &dw)| [r, w, dw]);
    write_file(&model.out, PROFILE_FILE, &record::csv_bytes(["r", "w", "dw"], rows), &mut record)?;
    println!("w0 = {}", profile.w0);
    finish(record, &model.out, start)?;
    Ok(0)
}

fn profile_scalars(profile: &StationaryProfile, record: &mut RunRecord) {
    record.scalar("w0", profile.w0);
    record.scalar("shoot_tolerance", profile.shoot_tolerance);
    record.scalar("matching_radius", profile.matching_radius);
    record.scalar("decay_rate", profile.decay_rate);
    record.scalar("ode_residual", profile.ode_residual_sup);
    let pohozaev = stationary::pohozaev_residual(profile);
    record.scalar("pohozaev_relative", pohozaev.relative);
    record.scalar("pohozaev_rhs_over_l2", pohozaev.rhs.abs() / pohozaev.l2_sq.max(1e-300));
    if let Ok(h) = stationary::first_integral_residual_1d(profile) {
        record.scalar("first_integral_deviation", h.sup_deviation);
        record.scalar("first_integral_h0", h.h0);
    }
}

fn spectrum(model: &Model, kappa: f64, tol: f64, start: Instant) -> Result<i32, CliError> {
    let params = model.params(kappa, 0.0)?;
    let profile = stationary::shoot(&params, model.grid()?, tol)?;
    let s = spectral::nondegeneracy_report(&profile)?;
    let mut record = RunRecord::new("spectrum", &params, model.grid_spec());
    record.scalar("w0", profile.w0);
    record.scalar("mu1", s.mu1);
    record.scalar("mu2_radial", s.mu2_radial);
    record.scalar("mu_ell1", s.mu_ell1);
    record.scalar("zero_mode_corr", s.zero_mode_corr);
    record.scalar("gap", s.gap);
    record.scalar("gap_sector", s.gap_sector as f64);
    let rows = profile
        .grid()
        .nodes()
        .iter()
        .zip(s.psi1.values())
        .map(|(&r, &v)| [r, v]);
    write_file(&model.out, "spectrum_psi1.csv", &record::csv_bytes(["r", "psi1"], rows), &mut record)?;
    println!("mu1 = {}, mu_ell1 = {}, gap = {}", s.mu1, s.mu_ell1, s.gap);
    finish(record, &model.out, start)?;
    Ok(0)
}

fn run_rows(result: &BisectionResult) -> Vec<RunRow> {
    result
        .runs
        .iter()
        .map(|r| RunRow {
            lambda: r.lambda,
            classification: r.classification.to_string(),
            tmax: r.tmax,
            t_end: r.t_end,
            max_sup_norm: r.max_sup_norm,
            certificate: r.certificate,
        })
        .collect()
}

fn options(search: &Search) -> BisectOptions {
    BisectOptions {
        iters: search.iters,
        target_width: search.width,
    }
}

fn bisect(model: &Model, kappa: f64, flow: &Flow, search: &Search, start: Instant) -> Result<i32, CliError> {
    let setup = setup(model, kappa, flow)?;
    let result = bifurcation::bisect_lambda(&setup, search.bracket, &options(search))?;
    let mut record = RunRecord::new("bisect", &setup.params, model.grid_spec());
    record.profile = Some(flow.profile.to_string());
    record.scalar("lambda_lo", result.lambda_lo);
    record.scalar("lambda_hi", result.lambda_hi);
    record.scalar("iterations", result.iterations as f64);
    record.scalar("evolutions", result.runs.len() as f64);
    if let Some(n) = result.evolutions_to_target {
        record.scalar("evolutions_to_target", n as f64);
    }
    record.runs = run_rows(&result);
    println!("lambda0 in [{}, {}]", result.lambda_lo, result.lambda_hi);
    finish(record, &model.out, start)?;
    Ok(0)
}

fn sweep_kappa(
    model: &Model,
    kappas: &[f64],
    flow: &Flow,
    search: &Search,
    start: Instant,
) -> Result<i32, CliError> {
    let setup = setup(model, kappas[0], flow)?;
    let threads = sweep::worker_count(kappas.len());
    let entries = sweep::parallel_kappa_sweep(&setup, kappas, search.bracket, &options(search), threads);
    let mut record = RunRecord::new("sweep-kappa", &setup.params, model.grid_spec());
    record.profile = Some(flow.profile.to_string());
    let mut failed = false;
    for entry in &entries {
        let row = match &entry.result {
            Ok(r) => {
                println!("kappa {}: lambda0 in [{}, {}]", entry.kappa, r.lambda_lo, r.lambda_hi);
                SweepRow {
                    kappa: entry.kappa,
                    lambda_lo: Some(r.lambda_lo),
                    lambda_hi: Some(r.lambda_hi),
                    error: None,
                }
            }
            Err(e) => {
                failed = true;
                println!("kappa {}: {e}", entry.kappa);
                SweepRow {
                    kappa: entry.kappa,
                    lambda_lo: None,
                    lambda_hi: None,
                    error: Some(e.to_string()),
                }
            }
        };
        record.sweep.push(row);
    }
    let monotone = bifurcation::sweep_is_monotone(&entries);
    record.checks.push(CheckRow {
        name: "midpoints nondecreasing in kappa".into(),
        passed: monotone,
        detail: String::new(),
    });
    finish(record, &model.out, start)?;
    Ok(if failed { crate::error::EXIT_NUMERICAL } else { 0 })
}

fn parse_criteria(spec: Option<&str>, have_stored: bool) -> Result<Vec<u8>, CliError> {
    match spec {
        None if have_stored => Ok(Vec::new()),
        None | Some("all") => Ok(acceptance::ALL.to_vec()),
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u8>()
                    .ok()
                    .filter(|id| acceptance::ALL.contains(id))
                    .ok_or_else(|| CliError::Precondition(format!("unknown criterion `{s}`")))
            })
            .collect(),
    }
}

fn verify(stored: &[PathBuf], criteria: Option<&str>, out: &Path, start: Instant) -> Result<i32, CliError> {
    let ids = parse_criteria(criteria, !stored.is_empty())?;
    let mut checks = Vec::new();
    let mut first_params = None;
    for path in stored {
        let (_, profile) = input::load_stored_profile(path)?;
        first_params.get_or_insert(profile.params);
        for check in acceptance::certify_profile(&profile) {
            checks.push(CheckRow {
                name: format!("{}: {}", path.display(), check.name),
                ..check
            });
        }
    }
    for outcome in acceptance::run_criteria(&ids) {
        println!("{outcome}");
        checks.push(outcome.into());
    }
    for c in checks.iter().filter(|c| !c.name.starts_with("criterion")) {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let params = first_params.unwrap_or(Params::new(2, 3.0, 1.0, 0.0)?);
    let mut record = RunRecord::new("verify", &params, GridSpec { rmax: 15.0, nr: 1500 });
    let all_passed = checks.iter().all(|c| c.passed);
    record.checks = checks;
    finish(record, out, start)?;
    Ok(if all_passed { 0 } else { crate::error::EXIT_NUMERICAL })
}
