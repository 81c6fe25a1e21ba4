//! Acceptance criteria and certificate checks on stored ground states.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use quasiflow_core::bifurcation::{self, BifurcationError, BisectOptions, BisectionResult, Setup};
use quasiflow_core::flow::{self, Classification, EvolveConfig, ProfileKind, Trajectory};
use quasiflow_core::stationary::{self, StationaryProfile};
use quasiflow_core::{energy, spectral, Field, Params, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::record::{self, CheckRow, GridSpec, RunRecord};

pub const ALL: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

const RMAX: f64 = 15.0;
const NR: usize = 1500;
const SHOOT_TOL: f64 = 1e-10;
const TMAX: f64 = 200.0;
const BRACKET: (f64, f64) = (0.05, 10.0);
const WIDTH: f64 = 4.0;
/// Name of the check in criterion 6 that measures the time spent near `w`.
pub const PLATEAU_CHECK: &str = "plateau within [0.5, 1.5] w0 lasts >= 20";

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<CheckRow>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRow> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {} {verdict}: {}", self.id, self.title)?;
        for c in &self.checks {
            let mark = if c.passed { "ok" } else { "FAILED" };
            write!(f, "\n    [{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

impl From<Outcome> for CheckRow {
    fn from(o: Outcome) -> Self {
        let failed: Vec<&str> = o.failed_checks().map(|c| c.name.as_str()).collect();
        CheckRow {
            name: format!("criterion {}: {}", o.id, o.title),
            passed: o.passed(),
            detail: if failed.is_empty() {
                String::new()
            } else {
                format!("failed: {}", failed.join("; "))
            },
        }
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckRow {
    CheckRow {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn error_check(name: &str, e: impl fmt::Display) -> CheckRow {
    check(name, false, format!("error: {e}"))
}

/// Shared work between criteria: ground states and threshold searches.
#[derive(Default)]
pub struct Context {
    profiles: HashMap<(usize, u64, usize), Result<Arc<StationaryProfile>, String>>,
    bisections: HashMap<u64, Result<BisectionResult, BifurcationError>>,
}

impl Context {
    fn grid(dim: usize, nr: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, RMAX, nr).expect("valid grid"))
    }

    fn profile(&mut self, dim: usize, p: f64, nr: usize) -> Result<Arc<StationaryProfile>, String> {
        self.profiles
            .entry((dim, p.to_bits(), nr))
            .or_insert_with(|| {
                let params = Params::new(dim, p, 1.0, 0.0).map_err(|e| e.to_string())?;
                stationary::shoot(&params, Self::grid(dim, nr), SHOOT_TOL)
                    .map(Arc::new)
                    .map_err(|e| e.to_string())
            })
            .clone()
    }

    fn threshold_setup(kappa: f64) -> Setup {
        let params = Params::new(2, 3.0, kappa, 0.0).expect("valid parameters");
        Setup::new(params, ProfileKind::Gaussian { width: WIDTH }, Self::grid(2, NR), TMAX)
    }

    fn bisection(&mut self, kappa: f64) -> &Result<BisectionResult, BifurcationError> {
        self.bisections.entry(kappa.to_bits()).or_insert_with(|| {
            let options = BisectOptions {
                iters: 12,
                target_width: 1e-2,
            };
            bifurcation::bisect_lambda(&Self::threshold_setup(kappa), BRACKET, &options)
        })
    }
}

/// Runs the requested criteria in order, sharing intermediate results.
pub fn run_criteria(ids: &[u8]) -> Vec<Outcome> {
    let mut ctx = Context::default();
    ids.iter().map(|&id| run_criterion(&mut ctx, id)).collect()
}

pub fn run_criterion(ctx: &mut Context, id: u8) -> Outcome {
    let (title, checks) = match id {
        1 => ("one-dimensional ground-state value", ground_state_value(ctx)),
        2 => ("first integral of the one-dimensional profile", first_integral(ctx)),
        3 => ("Pohozaev identity", pohozaev(ctx)),
        4 => ("energy identity and Lyapunov property", energy_identity()),
        5 => ("spectral picture in one dimension", spectral_picture(ctx)),
        6 => ("trichotomy reproduction", trichotomy(ctx)),
        7 => ("stabilizing effect of kappa", stabilizing(ctx)),
        8 => ("property suites", properties()),
        9 => ("admissibility sign change for p = 3", admissibility()),
        _ => ("unknown criterion", vec![check("known id", false, format!("{id}"))]),
    };
    Outcome { id, title, checks }
}

fn ground_state_value(ctx: &mut Context) -> Vec<CheckRow> {
    [(3.0, 2f64.sqrt()), (5.0, 3f64.powf(0.25))]
        .into_iter()
        .map(|(p, exact)| {
            let name = format!("|w0 - ((p+1)/2)^(1/(p-1))| <= 1e-6 for p = {p}");
            match ctx.profile(1, p, NR) {
                Ok(prof) => {
                    let err = (prof.w0 - exact).abs();
                    check(name, err <= 1e-6, format!("w0 = {:.12}, error {err:.2e}", prof.w0))
                }
                Err(e) => error_check(&name, e),
            }
        })
        .collect()
}

fn first_integral(ctx: &mut Context) -> Vec<CheckRow> {
    let report = ctx
        .profile(1, 3.0, NR)
        .and_then(|p| stationary::first_integral_residual_1d(&p).map_err(|e| e.to_string()));
    match report {
        Ok(r) => vec![
            check(
                "sup |H(r) - H(0)| <= 1e-6",
                r.sup_deviation <= 1e-6,
                format!("{:.2e}", r.sup_deviation),
            ),
            check("|H(0)| <= 1e-6", r.h0.abs() <= 1e-6, format!("{:.2e}", r.h0.abs())),
        ],
        Err(e) => vec![error_check("first integral", e)],
    }
}

fn pohozaev(ctx: &mut Context) -> Vec<CheckRow> {
    let mut out = Vec::new();
    match ctx.profile(2, 3.0, NR) {
        Ok(prof) => {
            let r = stationary::pohozaev_residual(&prof);
            let scaled = r.rhs.abs() / r.l2_sq;
            out.push(check(
                "N = 2: |∫(w^(p+1)/(p+1) - w²/2)| <= 1e-4 ∫w²",
                scaled <= 1e-4,
                format!("{scaled:.2e}"),
            ));
        }
        Err(e) => out.push(error_check("N = 2 profile", e)),
    }
    match ctx.profile(3, 3.0, NR) {
        Ok(prof) => {
            let r = stationary::pohozaev_residual(&prof);
            out.push(check(
                "N = 3: relative residual <= 1e-3",
                r.relative <= 1e-3,
                format!("{:.2e}", r.relative),
            ));
        }
        Err(e) => out.push(error_check("N = 3 profile", e)),
    }
    out
}

fn vanishing_run(nr: usize, cadence: f64) -> Result<Trajectory, String> {
    let params = Params::new(2, 3.0, 1.0, 0.05).map_err(|e| e.to_string())?;
    let mut setup = Setup::new(
        params,
        ProfileKind::Gaussian { width: WIDTH },
        Context::grid(2, nr),
        TMAX,
    );
    setup.cadence = cadence;
    setup.run(0.05, TMAX).map_err(|e| e.to_string())
}

fn worst_identity_residual(traj: &Trajectory) -> Result<f64, String> {
    let reports = energy::energy_identity_residual(traj).map_err(|e| e.to_string())?;
    Ok(reports.iter().map(|r| r.identity_residual).fold(0.0, f64::max))
}

fn energy_identity() -> Vec<CheckRow> {
    let runs = vanishing_run(NR, 1.0).and_then(|c| Ok((c, vanishing_run(2 * NR, 0.5)?)));
    let (coarse, fine) = match runs {
        Ok(r) => r,
        Err(e) => return vec![error_check("vanishing runs", e)],
    };
    let mut out = vec![check(
        "lambda = 0.05 vanishes",
        coarse.classification == Classification::Vanish && fine.classification == Classification::Vanish,
        format!("{} / {}", coarse.classification, fine.classification),
    )];
    match (worst_identity_residual(&coarse), worst_identity_residual(&fine)) {
        (Ok(rc), Ok(rf)) => {
            out.push(check(
                "all snapshot-pair residuals <= 0.05",
                rc <= 0.05 && rf <= 0.05,
                format!("coarse {rc:.3e}, fine {rf:.3e}"),
            ));
            let ratio = rf / rc;
            out.push(check(
                "residual halves (±50%) when h and cadence halve",
                (0.25..=0.75).contains(&ratio),
                format!("fine/coarse = {ratio:.3}"),
            ));
        }
        (Err(e), _) | (_, Err(e)) => out.push(error_check("identity residuals", e)),
    }
    let rise = energy::energy_increase(&coarse).max(energy::energy_increase(&fine));
    out.push(check(
        "I nonincreasing across accepted steps to 1e-8 relative",
        rise <= 1e-8,
        format!("largest relative increase {rise:.2e}"),
    ));
    out
}

fn spectral_picture(ctx: &mut Context) -> Vec<CheckRow> {
    let report = |ctx: &mut Context, nr| {
        ctx.profile(1, 3.0, nr)
            .and_then(|p| spectral::nondegeneracy_report(&p).map_err(|e| e.to_string()))
    };
    let (coarse, fine) = match (report(ctx, NR), report(ctx, 2 * NR)) {
        (Ok(c), Ok(f)) => (c, f),
        (Err(e), _) | (_, Err(e)) => return vec![error_check("spectrum", e)],
    };
    let ratio = coarse.mu_ell1.abs() / fine.mu_ell1.abs();
    vec![
        check("mu1 < -0.1", coarse.mu1 < -0.1, format!("mu1 = {:.6}", coarse.mu1)),
        check(
            "|smallest l = 1 eigenvalue| <= 1e-2",
            coarse.mu_ell1.abs() <= 1e-2,
            format!("{:.3e}", coarse.mu_ell1),
        ),
        check(
            "l = 1 eigenvalue shrinks about 4x under h -> h/2",
            (3.0..=5.0).contains(&ratio),
            format!("ratio {ratio:.3}"),
        ),
        check(
            "zero-mode correlation with w' >= 0.999",
            coarse.zero_mode_corr >= 0.999,
            format!("{:.12}", coarse.zero_mode_corr),
        ),
        check(
            "deflated gap > 0",
            coarse.gap > 0.0,
            format!("{:.6} in sector l = {}", coarse.gap, coarse.gap_sector),
        ),
    ]
}

fn endpoint_checks(result: &BisectionResult) -> Vec<CheckRow> {
    let at = |lambda: f64| result.runs.iter().find(|r| r.lambda == lambda);
    let mut out = Vec::new();
    match at(BRACKET.0) {
        Some(r) => out.push(check(
            "lambda = 0.05 vanishes",
            r.classification == Classification::Vanish,
            format!("{} at t = {:.2}", r.classification, r.t_end),
        )),
        None => out.push(check("lambda = 0.05 vanishes", false, "bracket end was moved")),
    }
    match at(BRACKET.1) {
        Some(r) => out.push(check(
            "lambda = 10 blows up with I < 0 certificate",
            r.classification == Classification::BlowUp && r.certificate.is_some(),
            format!("{} at t = {:.3}, certificate {:?}", r.classification, r.t_end, r.certificate),
        )),
        None => out.push(check("lambda = 10 blows up", false, "bracket end was moved")),
    }
    out
}

fn trichotomy(ctx: &mut Context) -> Vec<CheckRow> {
    let result = match ctx.bisection(1.0) {
        Ok(r) => r.clone(),
        Err(e) => return vec![error_check("bisection", e)],
    };
    let mut out = endpoint_checks(&result);
    out.push(check(
        "bracket width <= 1e-2 within 14 evolutions",
        result.evolutions_to_target.is_some_and(|n| n <= 14) && result.width() <= 1e-2,
        format!(
            "[{:.9}, {:.9}] width {:.3e} after {:?} evolutions",
            result.lambda_lo,
            result.lambda_hi,
            result.width(),
            result.evolutions_to_target
        ),
    ));
    let setup = Context::threshold_setup(1.0);
    match bifurcation::threshold_run(&setup, &result, TMAX, SHOOT_TOL) {
        Ok((report, traj)) => out.push(check(
            PLATEAU_CHECK,
            report.plateau_duration() >= 20.0,
            format!(
                "lambda {:.9}: {} run, plateau [{:.2}, {:.2}] lasts {:.2}, closest sup distance {:.3e} at t = {:.1}, monotone {}",
                report.lambda,
                report.run.classification,
                report.plateau.0,
                report.plateau.1,
                report.plateau_duration(),
                report.closest_sup_distance,
                report.closest_time,
                !flow::monotonicity_check(&traj).flagged,
            ),
        )),
        Err(e) => out.push(error_check(PLATEAU_CHECK, e)),
    }
    out
}

fn stabilizing(ctx: &mut Context) -> Vec<CheckRow> {
    let one = ctx.bisection(1.0).clone();
    let zero = ctx.bisection(0.0).clone();
    match (zero, one) {
        (Ok(z), Ok(o)) => vec![check(
            "lambda0(0) bracket lies entirely below lambda0(1) bracket",
            z.is_ordered() && o.is_ordered() && z.lambda_hi < o.lambda_lo,
            format!(
                "kappa 0: [{:.9}, {:.9}], kappa 1: [{:.9}, {:.9}]",
                z.lambda_lo, z.lambda_hi, o.lambda_lo, o.lambda_hi
            ),
        )],
        (Err(e), _) | (_, Err(e)) => vec![error_check("bisection", e)],
    }
}

fn properties() -> Vec<CheckRow> {
    vec![
        comparison_pairs(),
        monotone_runs(),
        supersolution(),
        stencil_orders(),
        quadrature_order(),
        record_round_trip(),
    ]
}

fn comparison_pairs() -> CheckRow {
    let name = "comparison: ordering violation <= 1e-6 on 10 random ordered pairs";
    let grid = Context::grid(2, NR);
    let params = Params::new(2, 3.0, 1.0, 0.0).expect("valid parameters");
    let config = EvolveConfig::for_grid(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let a_low: f64 = rng.gen_range(0.1..1.5);
        let a_high = a_low * rng.gen_range(1.0..1.5);
        let s_low: f64 = rng.gen_range(1.0..4.0);
        let s_high = s_low * rng.gen_range(1.0..1.5);
        let low = Field::from_fn(grid.clone(), |r| a_low * (-(r * r) / (s_low * s_low)).exp());
        let high = Field::from_fn(grid.clone(), |r| a_high * (-(r * r) / (s_high * s_high)).exp());
        match flow::order_check(&low, &high, &params, 5.0, &config) {
            Ok(rep) => worst = worst.max(rep.relative_violation()),
            Err(e) => return error_check(name, e),
        }
    }
    check(name, worst <= 1e-6, format!("worst relative violation {worst:.2e}"))
}

fn monotone_runs() -> CheckRow {
    let name = "radial monotonicity preserved on classified runs";
    let setup = Context::threshold_setup(1.0);
    let mut worst = 0.0_f64;
    let mut classes = Vec::new();
    for lambda in [0.5, 1.5, 1.8, 4.0] {
        match setup.run(lambda, TMAX) {
            Ok(traj) => {
                let rep = flow::monotonicity_check(&traj);
                if rep.flagged {
                    return check(name, false, format!("lambda {lambda}: increase {:.2e}", rep.max_increase));
                }
                worst = worst.max(rep.max_increase / rep.sup_norm.max(f64::MIN_POSITIVE));
                classes.push(format!("{lambda}: {}", traj.classification));
            }
            Err(e) => return error_check(name, e),
        }
    }
    check(
        name,
        true,
        format!("{}; worst relative increase {worst:.2e}", classes.join(", ")),
    )
}

fn supersolution() -> CheckRow {
    let name = "constant 0.9 dominates a bump starting below it";
    let grid = Context::grid(2, NR);
    let params = Params::new(2, 3.0, 1.0, 0.0).expect("valid parameters");
    let config = EvolveConfig::for_grid(&grid);
    let low = match flow::initial_profile(&ProfileKind::Bump { width: 5.0 }, 2.4, grid.clone()) {
        Ok(f) => f,
        Err(e) => return error_check(name, e),
    };
    let high = Field::constant(grid, 0.9);
    match flow::order_check(&low, &high, &params, 20.0, &config) {
        Ok(rep) => check(
            name,
            rep.max_violation <= 1e-6 * rep.scale,
            format!("start {:.3}, violation {:.2e}", low.sup_norm(), rep.max_violation),
        ),
        Err(e) => error_check(name, e),
    }
}

fn gaussian_stencil_errors(dim: usize, n: usize) -> (f64, f64) {
    let g = Arc::new(RadialGrid::new(dim, 6.0, n).expect("valid grid"));
    let f = Field::from_fn(g.clone(), |r| (-r * r).exp());
    let lap = f.radial_laplacian();
    let grad = f.gradient_sq();
    let (mut el, mut eg) = (0.0_f64, 0.0_f64);
    for i in 0..g.cells() {
        let r = g.r(i);
        let e = (-r * r).exp();
        el = el.max((lap.values()[i] - (4.0 * r * r - 2.0 * dim as f64) * e).abs());
        eg = eg.max((grad.values()[i] - 4.0 * r * r * e * e).abs());
    }
    (el, eg)
}

fn stencil_orders() -> CheckRow {
    let mut ratios = Vec::new();
    for dim in 1..=3 {
        let (l1, g1) = gaussian_stencil_errors(dim, 200);
        let (l2, g2) = gaussian_stencil_errors(dim, 400);
        ratios.push(l1 / l2);
        ratios.push(g1 / g2);
    }
    let ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let text: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    check(
        "stencils: error ratio in [3.5, 4.5] under h -> h/2",
        ok,
        format!("laplacian/gradient ratios for N = 1..3: {}", text.join(", ")),
    )
}

fn quadrature_error(dim: usize, n: usize) -> f64 {
    // (1 + |x|) e^{-|x|²} has a kink at the origin, so the N = 1 rule is not
    // superconvergent
    let g = Arc::new(RadialGrid::new(dim, 8.0, n).expect("valid grid"));
    let got = Field::from_fn(g.clone(), |r| (-r * r).exp() * (1.0 + r)).integrate();
    let pi = std::f64::consts::PI;
    // ω_N ∫ r^N e^{-r²} dr = ω_N Γ((N+1)/2) / 2
    let moment = match dim {
        1 => 1.0,
        2 => pi * pi.sqrt() / 2.0,
        _ => 2.0 * pi,
    };
    let exact = pi.powf(dim as f64 / 2.0) + moment;
    (got - exact).abs()
}

fn quadrature_order() -> CheckRow {
    let ratios: Vec<f64> = (1..=3)
        .map(|dim| quadrature_error(dim, 100) / quadrature_error(dim, 200))
        .collect();
    let ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let text: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    check(
        "quadrature: error ratio in [3.5, 4.5] under h -> h/2",
        ok,
        format!("N = 1..3: {}", text.join(", ")),
    )
}

fn short_record() -> Result<RunRecord, String> {
    let grid = Context::grid(2, 300);
    let params = Params::new(2, 3.0, 1.0, 0.3).map_err(|e| e.to_string())?;
    let u0 = flow::initial_profile(&ProfileKind::Gaussian { width: WIDTH }, 0.3, grid.clone())
        .map_err(|e| e.to_string())?;
    let traj = flow::evolve(&params, &u0, 5.0, 1.0, &EvolveConfig::for_grid(&grid))
        .map_err(|e| e.to_string())?;
    let mut rec = RunRecord::new("evolve", &params, GridSpec { rmax: RMAX, nr: 300 });
    rec.classification = Some(traj.classification.to_string());
    rec.scalar("t_end", traj.t_end);
    rec.scalar("final_sup_norm", traj.final_snapshot().field.sup_norm());
    rec.scalar("final_energy", traj.series.last().map_or(f64::NAN, |s| s.energy));
    Ok(rec)
}

fn record_round_trip() -> CheckRow {
    let name = "records: JSON round trip is lossless and runs are deterministic";
    let result = (|| -> Result<bool, String> {
        let first = short_record()?;
        let second = short_record()?;
        let bytes = record::serialize_run(&first).map_err(|e| e.to_string())?;
        let back = record::load_run(&bytes).map_err(|e| e.to_string())?;
        let again = record::serialize_run(&back).map_err(|e| e.to_string())?;
        Ok(back == first && again == bytes && first == second)
    })();
    match result {
        Ok(ok) => check(name, ok, ""),
        Err(e) => error_check(name, e),
    }
}

fn admissibility() -> Vec<CheckRow> {
    let grid = Context::grid(2, NR);
    [(1.95, true), (2.05, false)]
        .into_iter()
        .map(|(width, positive)| {
            let name = format!(
                "p3 condition is {} at sigma = {width}",
                if positive { "positive" } else { "negative" }
            );
            match flow::initial_profile(&ProfileKind::Gaussian { width }, 1.0, grid.clone()) {
                Ok(phi) => {
                    let v = energy::p3_condition(&phi);
                    check(name, (v > 0.0) == positive && v != 0.0, format!("{v:.6e}"))
                }
                Err(e) => error_check(&name, e),
            }
        })
        .collect()
}

/// Certificates for a stored ground state.
pub fn certify_profile(profile: &StationaryProfile) -> Vec<CheckRow> {
    let w = profile.w.values();
    let n = w.len() - 1;
    let mut out = vec![
        check(
            "positive",
            w[..n].iter().all(|&v| v > 0.0),
            format!("min interior value {:.3e}", w[..n].iter().copied().fold(f64::INFINITY, f64::min)),
        ),
        check(
            "radially decreasing",
            w.windows(2).all(|p| p[1] <= p[0]),
            String::new(),
        ),
    ];
    let residual = stationary::ode_residual(profile);
    out.push(check(
        "ODE residual <= 1e-4 w0",
        residual <= 1e-4 * profile.w0,
        format!("{residual:.3e}"),
    ));
    let poh = stationary::pohozaev_residual(profile);
    if profile.params.dim == 2 {
        let scaled = poh.rhs.abs() / poh.l2_sq;
        out.push(check("Pohozaev <= 1e-4 ∫w²", scaled <= 1e-4, format!("{scaled:.3e}")));
    } else {
        out.push(check(
            "Pohozaev relative residual <= 1e-3",
            poh.relative <= 1e-3,
            format!("{:.3e}", poh.relative),
        ));
    }
    if let Ok(h) = stationary::first_integral_residual_1d(profile) {
        out.push(check(
            "first integral within 1e-6",
            h.sup_deviation <= 1e-6 && h.h0.abs() <= 1e-6,
            format!("deviation {:.2e}, H(0) {:.2e}", h.sup_deviation, h.h0),
        ));
        let p = profile.params.p;
        let exact = ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
        out.push(check(
            "w0 matches the closed form within 1e-6",
            (profile.w0 - exact).abs() <= 1e-6,
            format!("{:.12} vs {exact:.12}", profile.w0),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        let outcomes = run_criteria(&[1, 2, 9]);
        for o in &outcomes {
            assert!(o.passed(), "{o}");
        }
    }

    #[test]
    fn certificate_flags_a_perturbed_profile() {
        let mut ctx = Context::default();
        let prof = ctx.profile(1, 3.0, 600).unwrap();
        assert!(certify_profile(&prof).iter().all(|c| c.passed));
        let bumped = prof.w.map(|v| v + 0.01);
        let bad = StationaryProfile::from_parts(
            prof.params,
            bumped,
            prof.dw.clone(),
            prof.shoot_tolerance,
            prof.matching_radius,
        )
        .unwrap();
        assert!(certify_profile(&bad).iter().any(|c| !c.passed));
    }

    #[test]
    fn outcome_summary_names_failures() {
        let o = Outcome {
            id: 6,
            title: "t",
            checks: vec![check("a", true, ""), check("b", false, "x")],
        };
        assert!(!o.passed());
        let row: CheckRow = o.into();
        assert_eq!(row.name, "criterion 6: t");
        assert_eq!(row.detail, "failed: b");
    }
}
