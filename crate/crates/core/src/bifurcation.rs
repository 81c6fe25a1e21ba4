//! The amplitude threshold `λ₀` separating decay from blow-up for data
//! `λ φ₀`, located by bisection on run classifications, and its dependence
//! on `κ`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::energy;
use crate::flow::{self, Classification, EvolveConfig, FlowError, ProfileError, ProfileKind, Trajectory};
use crate::params::{Params, ParamsError};
use crate::radial::{Field, RadialGrid};
use crate::stationary::{self, StationaryError};

/// How many times each bracket end may be moved outward by a factor 2.
pub const MAX_EXPANSIONS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum BifurcationError {
    /// No (Vanish, BlowUp) pair was found after expanding the bracket.
    BracketFailure {
        lo: f64,
        hi: f64,
        lo_class: Classification,
        hi_class: Classification,
    },
    /// For `p = 3` the data must satisfy `∫(φ₀²|∇φ₀|² - ¼φ₀⁴) < 0`.
    AdmissibilityError { p3_condition: f64 },
    BadBracket { lo: f64, hi: f64 },
    Params(ParamsError),
    Profile(ProfileError),
    Flow(FlowError),
    Stationary(StationaryError),
}

impl fmt::Display for BifurcationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BifurcationError::BracketFailure {
                lo,
                hi,
                lo_class,
                hi_class,
            } => write!(
                f,
                "no threshold bracket: lambda = {lo} gave {lo_class}, lambda = {hi} gave {hi_class}"
            ),
            BifurcationError::AdmissibilityError { p3_condition } => write!(
                f,
                "p = 3 needs the initial profile to satisfy \
                 int(phi0^2 |grad phi0|^2 - phi0^4/4) < 0, got {p3_condition}"
            ),
            BifurcationError::BadBracket { lo, hi } => {
                write!(f, "bracket [{lo}, {hi}] must satisfy 0 < lo < hi")
            }
            BifurcationError::Params(e) => write!(f, "{e}"),
            BifurcationError::Profile(e) => write!(f, "{e}"),
            BifurcationError::Flow(e) => write!(f, "{e}"),
            BifurcationError::Stationary(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BifurcationError {}

impl From<FlowError> for BifurcationError {
    fn from(e: FlowError) -> Self {
        BifurcationError::Flow(e)
    }
}

impl From<ProfileError> for BifurcationError {
    fn from(e: ProfileError) -> Self {
        BifurcationError::Profile(e)
    }
}

impl From<StationaryError> for BifurcationError {
    fn from(e: StationaryError) -> Self {
        BifurcationError::Stationary(e)
    }
}

impl From<ParamsError> for BifurcationError {
    fn from(e: ParamsError) -> Self {
        BifurcationError::Params(e)
    }
}

/// Everything a threshold search shares across its runs.
#[derive(Debug, Clone)]
pub struct Setup {
    /// `lambda` is ignored.
    pub params: Params,
    pub profile: ProfileKind,
    pub grid: Arc<RadialGrid>,
    pub tmax: f64,
    pub cadence: f64,
    pub config: EvolveConfig,
}

impl Setup {
    pub fn new(params: Params, profile: ProfileKind, grid: Arc<RadialGrid>, tmax: f64) -> Self {
        let config = EvolveConfig::for_grid(&grid);
        Setup {
            params,
            profile,
            grid,
            tmax,
            cadence: 1.0,
            config,
        }
    }

    pub fn with_kappa(&self, kappa: f64) -> Self {
        Setup {
            params: self.params.with_kappa(kappa),
            ..self.clone()
        }
    }

    /// `φ₀` at unit amplitude.
    pub fn shape(&self) -> Result<Field, ProfileError> {
        flow::initial_profile(&self.profile, 1.0, self.grid.clone())
    }

    /// Evolves `λ φ₀` up to `tmax`.
    pub fn run(&self, lambda: f64, tmax: f64) -> Result<Trajectory, BifurcationError> {
        let params = self.params.with_lambda(lambda);
        let u0 = flow::initial_profile(&self.profile, lambda, self.grid.clone())?;
        Ok(flow::evolve(&params, &u0, tmax, self.cadence, &self.config)?)
    }
}

/// `p3_condition(φ₀)` when `p = 3`, as an error if it is not negative.
pub fn check_admissible(setup: &Setup) -> Result<(), BifurcationError> {
    if setup.params.p == 3.0 {
        let value = energy::p3_condition(&setup.shape()?);
        if !(value < 0.0) {
            return Err(BifurcationError::AdmissibilityError {
                p3_condition: value,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub lambda: f64,
    pub classification: Classification,
    pub tmax: f64,
    pub t_end: f64,
    pub max_sup_norm: f64,
    pub certificate: Option<f64>,
}

impl RunSummary {
    fn of(lambda: f64, tmax: f64, traj: &Trajectory) -> Self {
        RunSummary {
            lambda,
            classification: traj.classification,
            tmax,
            t_end: traj.t_end,
            max_sup_norm: traj.max_sup_norm(),
            certificate: traj.blowup_certificate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectOptions {
    /// Cap on bracket-narrowing steps.
    pub iters: usize,
    /// Stop once the bracket is at most this wide.
    pub target_width: f64,
}

impl Default for BisectOptions {
    fn default() -> Self {
        BisectOptions {
            iters: 12,
            target_width: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionResult {
    /// Parameters with `lambda` unset (zero).
    pub params: Params,
    /// Largest amplitude seen to vanish.
    pub lambda_lo: f64,
    /// Smallest amplitude seen to blow up.
    pub lambda_hi: f64,
    /// Steps that narrowed the bracket.
    pub iterations: usize,
    /// Amplitudes left undecided even after the longer retry.
    pub undecided: Vec<f64>,
    /// Every evolution in the order it was run.
    pub runs: Vec<RunSummary>,
    /// Number of evolutions until the bracket first reached the target
    /// width, if it did.
    pub evolutions_to_target: Option<usize>,
}

impl BisectionResult {
    pub fn width(&self) -> f64 {
        self.lambda_hi - self.lambda_lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lambda_lo + self.lambda_hi)
    }

    /// Every vanishing amplitude lies below every blow-up amplitude.
    pub fn is_ordered(&self) -> bool {
        let vanish = self
            .runs
            .iter()
            .filter(|r| r.classification == Classification::Vanish)
            .fold(f64::NEG_INFINITY, |m, r| m.max(r.lambda));
        let blowup = self
            .runs
            .iter()
            .filter(|r| r.classification == Classification::BlowUp)
            .fold(f64::INFINITY, |m, r| m.min(r.lambda));
        vanish < blowup
    }
}

struct Search<'a> {
    setup: &'a Setup,
    runs: Vec<RunSummary>,
}

impl Search<'_> {
    fn classify(&mut self, lambda: f64, tmax: f64) -> Result<Classification, BifurcationError> {
        let traj = self.setup.run(lambda, tmax)?;
        self.runs.push(RunSummary::of(lambda, tmax, &traj));
        Ok(traj.classification)
    }

    /// Classification with one retry at twice the horizon.
    fn decide(&mut self, lambda: f64) -> Result<Classification, BifurcationError> {
        let tmax = self.setup.tmax;
        match self.classify(lambda, tmax)? {
            Classification::Undecided => self.classify(lambda, 2.0 * tmax),
            c => Ok(c),
        }
    }
}

/// Bisection on `λ` between a vanishing and a blowing-up amplitude.
///
/// The ends of `bracket` are moved outward by a factor 2 (at most
/// [`MAX_EXPANSIONS`] times each) until the low end vanishes and the high end
/// blows up. An undecided midpoint is retried once with twice the horizon;
/// if it stays undecided it is recorded and the next trial point is taken at
/// a quarter or three quarters of the bracket, alternately.
pub fn bisect_lambda(
    setup: &Setup,
    bracket: (f64, f64),
    options: &BisectOptions,
) -> Result<BisectionResult, BifurcationError> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(BifurcationError::BadBracket { lo, hi });
    }
    setup.params.validate()?;
    check_admissible(setup)?;
    let mut search = Search {
        setup,
        runs: Vec::new(),
    };

    let mut lo_class = search.decide(lo)?;
    let mut expansions = 0;
    while lo_class != Classification::Vanish && expansions < MAX_EXPANSIONS {
        if lo_class == Classification::BlowUp && lo < hi {
            hi = lo;
        }
        lo *= 0.5;
        lo_class = search.decide(lo)?;
        expansions += 1;
    }
    let mut hi_class = if hi == bracket.1 {
        search.decide(hi)?
    } else {
        Classification::BlowUp
    };
    expansions = 0;
    while hi_class != Classification::BlowUp && expansions < MAX_EXPANSIONS {
        if hi_class == Classification::Vanish {
            lo = lo.max(hi);
        }
        hi *= 2.0;
        hi_class = search.decide(hi)?;
        expansions += 1;
    }
    if lo_class != Classification::Vanish || hi_class != Classification::BlowUp {
        return Err(BifurcationError::BracketFailure {
            lo,
            hi,
            lo_class,
            hi_class,
        });
    }

    let mut iterations = 0;
    let mut undecided = Vec::new();
    let mut bias = 0usize;
    let mut skips = 0usize;
    let mut evolutions_to_target = (hi - lo <= options.target_width).then_some(search.runs.len());
    while iterations < options.iters && hi - lo > options.target_width && skips <= options.iters {
        let fraction = match bias {
            0 => 0.5,
            k if k % 2 == 1 => 0.25,
            _ => 0.75,
        };
        let lambda = lo + fraction * (hi - lo);
        match search.decide(lambda)? {
            Classification::Vanish => {
                lo = lambda;
                iterations += 1;
                bias = 0;
            }
            Classification::BlowUp => {
                hi = lambda;
                iterations += 1;
                bias = 0;
            }
            _ => {
                undecided.push(lambda);
                bias += 1;
                skips += 1;
            }
        }
        if evolutions_to_target.is_none() && hi - lo <= options.target_width {
            evolutions_to_target = Some(search.runs.len());
        }
    }

    Ok(BisectionResult {
        params: setup.params.with_lambda(0.0),
        lambda_lo: lo,
        lambda_hi: hi,
        iterations,
        undecided,
        runs: search.runs,
        evolutions_to_target,
    })
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub lambda: f64,
    pub run: RunSummary,
    /// `w(0)` of the ground state at the same parameters.
    pub w0: f64,
    /// Longest time interval with `sup u ∈ [w0/2, 3 w0/2]`.
    pub plateau: (f64, f64),
    /// `min_t sup_r |u(t) - w|` over the snapshots.
    pub closest_sup_distance: f64,
    /// Time of the closest approach.
    pub closest_time: f64,
    /// Time average of `‖u(t) - w‖_{H¹}` over the plateau.
    pub h1_distance: f64,
}

impl ThresholdReport {
    pub fn plateau_duration(&self) -> f64 {
        self.plateau.1 - self.plateau.0
    }
}

/// Longest interval on which the sup-norm stays in `[lo, hi]`.
pub fn longest_band(traj: &Trajectory, lo: f64, hi: f64) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut start: Option<f64> = None;
    let mut last_t = 0.0;
    for s in &traj.series {
        let inside = s.sup_norm >= lo && s.sup_norm <= hi;
        match (inside, start) {
            (true, None) => start = Some(s.t),
            (false, Some(t0)) => {
                if last_t - t0 > best.1 - best.0 {
                    best = (t0, last_t);
                }
                start = None;
            }
            _ => {}
        }
        last_t = s.t;
    }
    if let Some(t0) = start {
        if last_t - t0 > best.1 - best.0 {
            best = (t0, last_t);
        }
    }
    best
}

/// Evolves at the bracket midpoint and measures how long and how closely
/// the run shadows the ground state.
pub fn threshold_run(
    setup: &Setup,
    result: &BisectionResult,
    tmax: f64,
    shoot_tol: f64,
) -> Result<(ThresholdReport, Trajectory), BifurcationError> {
    let lambda = result.midpoint();
    let traj = setup.run(lambda, tmax)?;
    let ground = stationary::shoot(&setup.params, setup.grid.clone(), shoot_tol)?;
    let w0 = ground.w0;
    let plateau = longest_band(&traj, 0.5 * w0, 1.5 * w0);
    let target = ground.w.values();
    let (mut closest_sup_distance, mut closest_time) = (f64::INFINITY, 0.0);
    for snap in &traj.snapshots {
        let d = snap
            .field
            .values()
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if d < closest_sup_distance {
            closest_sup_distance = d;
            closest_time = snap.t;
        }
    }
    let h1_distance = if plateau.1 > plateau.0 {
        flow::time_averaged_h1_distance(&traj, &ground.w, plateau.0, plateau.1)
    } else {
        f64::NAN
    };
    let report = ThresholdReport {
        lambda,
        run: RunSummary::of(lambda, tmax, &traj),
        w0,
        plateau,
        closest_sup_distance,
        closest_time,
        h1_distance,
    };
    Ok((report, traj))
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub kappa: f64,
    pub result: Result<BisectionResult, BifurcationError>,
}

/// Checks the per-κ preconditions of a sweep: for `κ = 0` the exponent must
/// be below the semilinear critical value `(N+2)/(N-2)`.
pub fn sweep_params(setup: &Setup, kappa: f64) -> Result<Setup, BifurcationError> {
    let params = setup.params.with_kappa(kappa);
    params.validate()?;
    if kappa == 0.0 && params.strict {
        if let Some(bound) = params.semilinear_critical_exponent() {
            if params.p >= bound {
                return Err(BifurcationError::Params(ParamsError::ExponentSupercritical {
                    p: params.p,
                    bound,
                }));
            }
        }
    }
    Ok(setup.with_kappa(kappa))
}

/// One bisection per `κ`, run in order. Failures are recorded per entry.
pub fn kappa_sweep(
    setup: &Setup,
    kappas: &[f64],
    bracket: (f64, f64),
    options: &BisectOptions,
) -> Vec<SweepEntry> {
    kappas
        .iter()
        .map(|&kappa| SweepEntry {
            kappa,
            result: sweep_params(setup, kappa).and_then(|s| bisect_lambda(&s, bracket, options)),
        })
        .collect()
}

/// Midpoints are nondecreasing in `κ` up to the bracket widths.
pub fn sweep_is_monotone(entries: &[SweepEntry]) -> bool {
    let ok: Vec<&BisectionResult> = entries.iter().filter_map(|e| e.result.as_ref().ok()).collect();
    ok.windows(2).all(|w| w[0].lambda_lo <= w[1].lambda_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(sigma: f64, kappa: f64) -> Setup {
        let grid = Arc::new(RadialGrid::new(2, 15.0, 300).unwrap());
        let params = Params::new(2, 3.0, kappa, 0.0).unwrap();
        Setup::new(params, ProfileKind::Gaussian { width: sigma }, grid, 100.0)
    }

    #[test]
    fn narrow_gaussian_is_inadmissible() {
        let err = bisect_lambda(&setup(1.0, 1.0), (0.05, 10.0), &BisectOptions::default()).unwrap_err();
        match err {
            BifurcationError::AdmissibilityError { p3_condition } => assert!(p3_condition > 0.0),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn vanishing_bracket_fails() {
        let s = setup(4.0, 1.0);
        // both ends far below the threshold and expansion cannot reach it
        let err = bisect_lambda(&s, (1e-6, 2e-6), &BisectOptions::default()).unwrap_err();
        assert!(matches!(err, BifurcationError::BracketFailure { .. }), "{err:?}");
    }

    #[test]
    fn bad_bracket() {
        let s = setup(4.0, 1.0);
        assert!(matches!(
            bisect_lambda(&s, (2.0, 1.0), &BisectOptions::default()),
            Err(BifurcationError::BadBracket { .. })
        ));
    }

    #[test]
    fn bisection_narrows_and_stays_ordered() {
        let s = setup(4.0, 1.0);
        let options = BisectOptions {
            iters: 6,
            target_width: 0.0,
        };
        let result = bisect_lambda(&s, (0.05, 10.0), &options).unwrap();
        assert!(result.is_ordered());
        assert!(result.lambda_lo < result.lambda_hi);
        let narrowed = result.iterations as i32;
        let bound = (10.0 - 0.05) / 2f64.powi(narrowed);
        if result.undecided.is_empty() {
            assert!(result.width() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn longest_band_picks_longest_interval() {
        use crate::flow::SeriesPoint;
        let s = setup(4.0, 1.0);
        let mut traj = s.run(0.01, 1.0).unwrap();
        let sups = [0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 5.0];
        traj.series = sups
            .iter()
            .enumerate()
            .map(|(i, &sup_norm)| SeriesPoint {
                t: i as f64,
                sup_norm,
                energy: 0.0,
                dt: 1.0,
            })
            .collect();
        assert_eq!(longest_band(&traj, 0.5, 2.0), (4.0, 7.0));
    }

    #[test]
    fn supercritical_semilinear_sweep_entry_fails() {
        let grid = Arc::new(RadialGrid::new(3, 15.0, 300).unwrap());
        let params = Params::new(3, 6.0, 1.0, 0.0).unwrap();
        let s = Setup::new(params, ProfileKind::Gaussian { width: 4.0 }, grid, 10.0);
        assert!(sweep_params(&s, 0.0).is_err());
        assert!(sweep_params(&s, 1.0).is_ok());
    }
}
