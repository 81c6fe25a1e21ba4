//! Time integration of the radial flow
//! `u_t = (1 + 2κu²)Δu + 2κu|∇u|² - u + |u|^{p-1}u` with Dirichlet data at
//! `rmax`, run classification, and the order-preservation harness.
//!
//! Each step is IMEX: the diffusion `a(uⁿ)Δu` is implicit with the
//! coefficient frozen at the old state (one tridiagonal solve), the remaining
//! terms are explicit. Step sizes are controlled by step doubling.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::energy;
use crate::math;
use crate::params::Params;
use crate::radial::{self, Field, RadialGrid};
use crate::tridiag;

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    /// The step size fell below `dt_min` without an accepted step.
    StiffnessBreakdown { t: f64, dt: f64 },
    InvalidProfile(ProfileError),
    NonMonotoneData,
    NegativeData,
    BadHorizon(f64),
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::StiffnessBreakdown { t, dt } => {
                write!(f, "step size {dt:e} below minimum at t = {t}")
            }
            FlowError::InvalidProfile(e) => write!(f, "invalid initial profile: {e}"),
            FlowError::NonMonotoneData => write!(f, "initial data is not radially non-increasing"),
            FlowError::NegativeData => write!(f, "initial data has negative values"),
            FlowError::BadHorizon(t) => write!(f, "time horizon / cadence must be positive, got {t}"),
        }
    }
}

impl core::error::Error for FlowError {}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileError {
    NegativeAmplitude(f64),
    NonPositiveWidth(f64),
    TableLength { expected: usize, got: usize },
    TableNotFinite,
    TableNegative { index: usize },
    TableIncreasing { index: usize },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::NegativeAmplitude(a) => write!(f, "amplitude {a} must be non-negative and finite"),
            ProfileError::NonPositiveWidth(w) => write!(f, "width {w} must be positive and finite"),
            ProfileError::TableLength { expected, got } => {
                write!(f, "table has {got} values, grid has {expected} nodes")
            }
            ProfileError::TableNotFinite => write!(f, "table contains non-finite values"),
            ProfileError::TableNegative { index } => write!(f, "table value at node {index} is negative"),
            ProfileError::TableIncreasing { index } => {
                write!(f, "table is not non-increasing: value rises at node {index}")
            }
        }
    }
}

impl core::error::Error for ProfileError {}

/// Shape of the initial datum `φ₀`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `e^{-r²/σ²}`
    Gaussian { width: f64 },
    /// `e^{-σ²/(σ²-r²)}` for `r < σ`, zero outside.
    Bump { width: f64 },
    /// Node values, validated as non-negative and non-increasing.
    Table(Vec<f64>),
}

/// `amplitude · φ₀` sampled on the grid, with the Dirichlet value at `rmax`.
pub fn initial_profile(
    kind: &ProfileKind,
    amplitude: f64,
    grid: Arc<RadialGrid>,
) -> Result<Field, ProfileError> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(ProfileError::NegativeAmplitude(amplitude));
    }
    let n = grid.cells();
    let values = match kind {
        ProfileKind::Gaussian { width } | ProfileKind::Bump { width }
            if !(width.is_finite() && *width > 0.0) =>
        {
            return Err(ProfileError::NonPositiveWidth(*width));
        }
        ProfileKind::Gaussian { width } => {
            let s2 = width * width;
            let mut v: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&r| amplitude * math::exp(-r * r / s2))
                .collect();
            v[n] = 0.0;
            v
        }
        ProfileKind::Bump { width } => {
            let s2 = width * width;
            let mut v: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&r| {
                    if r < *width {
                        amplitude * math::exp(-s2 / (s2 - r * r))
                    } else {
                        0.0
                    }
                })
                .collect();
            v[n] = 0.0;
            v
        }
        ProfileKind::Table(table) => {
            if table.len() != grid.len() {
                return Err(ProfileError::TableLength {
                    expected: grid.len(),
                    got: table.len(),
                });
            }
            if table.iter().any(|v| !v.is_finite()) {
                return Err(ProfileError::TableNotFinite);
            }
            if let Some(index) = table.iter().position(|&v| v < 0.0) {
                return Err(ProfileError::TableNegative { index });
            }
            if let Some(i) = table.windows(2).position(|w| w[1] > w[0]) {
                return Err(ProfileError::TableIncreasing { index: i + 1 });
            }
            table.iter().map(|v| amplitude * v).collect()
        }
    };
    Ok(Field::new(grid, values).expect("profile values are finite"))
}

/// Pointwise `(1+2κu²)Δu + 2κu|∇u|² - u + |u|^{p-1}u`, zero at `rmax`.
pub fn rhs(u: &Field, params: &Params) -> Field {
    let grid = u.grid().clone();
    let mut lap = vec![0.0; grid.len()];
    let mut grad = vec![0.0; grid.len()];
    radial::laplacian_into(&grid, u.values(), &mut lap);
    radial::gradient_into(&grid, u.values(), &mut grad);
    let k = params.kappa;
    let mut out: Vec<f64> = u
        .values()
        .iter()
        .zip(lap.iter().zip(&grad))
        .map(|(&v, (&l, &g))| {
            params.diffusivity(v) * l + 2.0 * k * v * g * g - v + math::signed_pow(v, params.p)
        })
        .collect();
    let n = grid.cells();
    out[n] = 0.0;
    Field::new(grid, out).expect("rhs of a finite field overflowed")
}

/// Step-size controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub rtol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_initial: f64,
    /// Consecutive accepts before the step grows by `growth`.
    pub accepts_before_growth: usize,
    pub growth: f64,
}

impl StepConfig {
    /// `dt_max = h/2`, `dt_min = 1e-10`, `rtol = 1e-6`.
    pub fn for_grid(grid: &RadialGrid) -> Self {
        let dt_max = 0.5 * grid.h();
        StepConfig {
            rtol: 1e-6,
            dt_min: 1e-10,
            dt_max,
            dt_initial: 0.01 * dt_max,
            accepts_before_growth: 5,
            growth: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub field: Field,
    pub t: f64,
    pub dt: f64,
    pub steps: usize,
    pub streak: usize,
}

impl FlowState {
    pub fn new(field: Field, config: &StepConfig) -> Self {
        FlowState {
            field,
            t: 0.0,
            dt: config.dt_initial.clamp(config.dt_min, config.dt_max),
            steps: 0,
            streak: 0,
        }
    }
}

/// Reusable IMEX stepper with its scratch buffers.
#[derive(Debug, Clone)]
pub struct Integrator {
    grid: Arc<RadialGrid>,
    params: Params,
    config: StepConfig,
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    grad: Vec<f64>,
    scratch: Vec<f64>,
    full: Vec<f64>,
    half: Vec<f64>,
    two_half: Vec<f64>,
}

impl Integrator {
    pub fn new(grid: Arc<RadialGrid>, params: Params, config: StepConfig) -> Self {
        let m = grid.len();
        Integrator {
            grid,
            params,
            config,
            sub: vec![0.0; m],
            diag: vec![0.0; m],
            sup: vec![0.0; m],
            grad: vec![0.0; m],
            scratch: Vec::with_capacity(m),
            full: vec![0.0; m],
            half: vec![0.0; m],
            two_half: vec![0.0; m],
        }
    }

    pub fn config(&self) -> &StepConfig {
        &self.config
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// One IMEX substep of size `dt` from `u` into `out`. Returns false if the
    /// result is not finite.
    fn imex(&mut self, u: &[f64], dt: f64, out: &mut [f64]) -> bool {
        let grid = &*self.grid;
        let n = grid.cells();
        let h = grid.h();
        let h2 = h * h;
        let dim = grid.dim() as f64;
        let nm1 = dim - 1.0;
        let k = self.params.kappa;
        let p = self.params.p;
        radial::gradient_into(grid, u, &mut self.grad);

        for i in 0..=n {
            let v = u[i];
            let g = self.grad[i];
            out[i] = v + dt * (2.0 * k * v * g * g - v + math::signed_pow(v, p));
        }
        let a0 = self.params.diffusivity(u[0]);
        let c0 = dt * a0 * 2.0 * dim / h2;
        self.sub[0] = 0.0;
        self.diag[0] = 1.0 + c0;
        self.sup[0] = -c0;
        for i in 1..n {
            let a = self.params.diffusivity(u[i]);
            let r = i as f64 * h;
            let adv = nm1 / (2.0 * r * h);
            self.sub[i] = -dt * a * (1.0 / h2 - adv);
            self.diag[i] = 1.0 + 2.0 * dt * a / h2;
            self.sup[i] = -dt * a * (1.0 / h2 + adv);
        }
        self.sub[n] = 0.0;
        self.diag[n] = 1.0;
        self.sup[n] = 0.0;
        out[n] = 0.0;
        if tridiag::solve_in_place(&self.sub, &self.diag, &self.sup, out, &mut self.scratch).is_err()
        {
            return false;
        }
        out.iter().all(|v| v.is_finite())
    }

    /// Advances `state` by one accepted step, never past `t_limit`.
    pub fn step(&mut self, state: &mut FlowState, t_limit: f64) -> Result<(), FlowError> {
        let cfg = self.config;
        let mut full = core::mem::take(&mut self.full);
        let mut half = core::mem::take(&mut self.half);
        let mut two_half = core::mem::take(&mut self.two_half);
        let result = loop {
            let remaining = t_limit - state.t;
            let clamped = remaining < state.dt;
            let dt = if clamped { remaining } else { state.dt };
            if dt < cfg.dt_min && !clamped {
                break Err(FlowError::StiffnessBreakdown { t: state.t, dt });
            }
            let u = state.field.values();
            let ok = self.imex(u, dt, &mut full)
                && self.imex(u, 0.5 * dt, &mut half)
                && {
                    let h = core::mem::take(&mut half);
                    let ok = self.imex(&h, 0.5 * dt, &mut two_half);
                    half = h;
                    ok
                };
            let accepted = ok && {
                let scale = radial::sup_norm(&two_half).max(1.0);
                let err = full
                    .iter()
                    .zip(&two_half)
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                err <= cfg.rtol * scale
            };
            if accepted {
                state.field.values_mut().copy_from_slice(&two_half);
                state.t = if clamped { t_limit } else { state.t + dt };
                state.steps += 1;
                state.streak += 1;
                if state.streak >= cfg.accepts_before_growth {
                    state.dt = (state.dt * cfg.growth).min(cfg.dt_max);
                    state.streak = 0;
                }
                break Ok(());
            }
            state.dt = 0.5 * dt;
            state.streak = 0;
            if state.dt < cfg.dt_min {
                break Err(FlowError::StiffnessBreakdown {
                    t: state.t,
                    dt: state.dt,
                });
            }
        };
        self.full = full;
        self.half = half;
        self.two_half = two_half;
        result
    }
}

/// One accepted adaptive step with default controls for the field's grid.
pub fn step(state: &FlowState, params: &Params, config: &StepConfig) -> Result<FlowState, FlowError> {
    let mut integrator = Integrator::new(state.field.grid().clone(), *params, *config);
    let mut next = state.clone();
    integrator.step(&mut next, f64::INFINITY)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Vanish,
    Converge,
    BlowUp,
    Undecided,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Vanish => "Vanish",
            Classification::Converge => "Converge",
            Classification::BlowUp => "BlowUp",
            Classification::Undecided => "Undecided",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Detector thresholds. The convergence window values are engineering
/// choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criteria {
    pub vanish_below: f64,
    pub blowup_above: f64,
    pub window: f64,
    pub sup_rel_change: f64,
    pub l2_rel_change: f64,
    /// `I` below this counts as a blow-up certificate.
    pub certificate_level: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria {
            vanish_below: 1e-8,
            blowup_above: 1e3,
            window: 10.0,
            sup_rel_change: 1e-6,
            l2_rel_change: 1e-5,
            certificate_level: -1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: f64,
    pub sup_norm: f64,
    pub energy: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: Params,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesPoint>,
    pub classification: Classification,
    pub t_end: f64,
    pub blowup_certificate: Option<f64>,
    /// Set when the integrator stopped on [`FlowError::StiffnessBreakdown`].
    pub breakdown: bool,
}

impl Trajectory {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has an initial snapshot")
    }

    pub fn max_sup_norm(&self) -> f64 {
        self.series.iter().fold(0.0, |m, s| m.max(s.sup_norm))
    }
}

/// Classification of a (possibly unfinished) run from its recorded history.
/// `Undecided` means no detector has fired.
pub fn classify(
    series: &[SeriesPoint],
    snapshots: &[Snapshot],
    breakdown: bool,
    criteria: &Criteria,
) -> Classification {
    let Some(last) = series.last() else {
        return Classification::Undecided;
    };
    if last.sup_norm <= criteria.vanish_below {
        return Classification::Vanish;
    }
    if last.sup_norm >= criteria.blowup_above {
        return Classification::BlowUp;
    }
    if breakdown && series.iter().any(|s| s.energy < criteria.certificate_level) {
        return Classification::BlowUp;
    }
    if converged(series, snapshots, criteria) {
        return Classification::Converge;
    }
    Classification::Undecided
}

fn converged(series: &[SeriesPoint], snapshots: &[Snapshot], criteria: &Criteria) -> bool {
    let Some(last) = series.last() else {
        return false;
    };
    let start = last.t - criteria.window;
    if start < -1e-12 || !(1.0..criteria.blowup_above).contains(&last.sup_norm) {
        return false;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series.iter().rev() {
        if s.t < start - 1e-9 {
            break;
        }
        lo = lo.min(s.sup_norm);
        hi = hi.max(s.sup_norm);
    }
    if (hi - lo) / last.sup_norm > criteria.sup_rel_change {
        return false;
    }
    let Some(now) = snapshots.last() else {
        return false;
    };
    if (now.t - last.t).abs() > 1e-9 {
        return false;
    }
    let Some(then) = snapshots.iter().rev().find(|s| s.t <= start + 1e-9) else {
        return false;
    };
    let diff: Vec<f64> = now
        .field
        .values()
        .iter()
        .zip(then.field.values())
        .map(|(a, b)| a - b)
        .collect();
    let diff = Field::from_parts_unchecked(now.field.grid().clone(), diff);
    let norm = now.field.l2_norm();
    norm > 0.0 && diff.l2_norm() / norm <= criteria.l2_rel_change
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub step: StepConfig,
    pub criteria: Criteria,
}

impl EvolveConfig {
    pub fn for_grid(grid: &RadialGrid) -> Self {
        EvolveConfig {
            step: StepConfig::for_grid(grid),
            criteria: Criteria::default(),
        }
    }
}

fn check_data(u0: &Field) -> Result<(), FlowError> {
    let v = u0.values();
    if v.iter().any(|&x| x < 0.0) {
        return Err(FlowError::NegativeData);
    }
    if v.windows(2).any(|w| w[1] > w[0]) {
        return Err(FlowError::NonMonotoneData);
    }
    Ok(())
}

/// Integrates from `u0` until `tmax` or until a detector fires, recording
/// the series at every accepted step and snapshots every `cadence`.
pub fn evolve(
    params: &Params,
    u0: &Field,
    tmax: f64,
    cadence: f64,
    config: &EvolveConfig,
) -> Result<Trajectory, FlowError> {
    check_data(u0)?;
    evolve_unchecked(params, u0, tmax, cadence, config)
}

/// As [`evolve`] without validating that the data is non-negative and
/// radially non-increasing.
pub fn evolve_unchecked(
    params: &Params,
    u0: &Field,
    tmax: f64,
    cadence: f64,
    config: &EvolveConfig,
) -> Result<Trajectory, FlowError> {
    if !(tmax.is_finite() && tmax > 0.0) {
        return Err(FlowError::BadHorizon(tmax));
    }
    if !(cadence.is_finite() && cadence > 0.0) {
        return Err(FlowError::BadHorizon(cadence));
    }
    let grid = u0.grid().clone();
    let mut field = u0.clone();
    let n = grid.cells();
    field.values_mut()[n] = 0.0;

    let criteria = config.criteria;
    let mut integrator = Integrator::new(grid, *params, config.step);
    let mut state = FlowState::new(field, &config.step);
    let e0 = energy::energy(&state.field, params);
    let mut series = vec![SeriesPoint {
        t: 0.0,
        sup_norm: state.field.sup_norm(),
        energy: e0,
        dt: state.dt,
    }];
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: state.field.clone(),
    }];
    let mut certificate = (e0 < criteria.certificate_level).then_some(0.0);
    let mut breakdown = false;
    let mut classification = classify(&series, &snapshots, false, &criteria);
    let mut snap_index = 1usize;

    while classification == Classification::Undecided && state.t < tmax {
        let next_snap = (snap_index as f64 * cadence).min(tmax);
        match integrator.step(&mut state, next_snap) {
            Ok(()) => {}
            Err(FlowError::StiffnessBreakdown { .. }) => {
                breakdown = true;
                classification = classify(&series, &snapshots, true, &criteria);
                break;
            }
            Err(e) => return Err(e),
        }
        let e = energy::energy(&state.field, params);
        if certificate.is_none() && e < criteria.certificate_level {
            certificate = Some(state.t);
        }
        series.push(SeriesPoint {
            t: state.t,
            sup_norm: state.field.sup_norm(),
            energy: e,
            dt: state.dt,
        });
        if state.t >= next_snap {
            snapshots.push(Snapshot {
                t: state.t,
                field: state.field.clone(),
            });
            snap_index += 1;
        }
        classification = classify(&series, &snapshots, false, &criteria);
    }
    let t_end = state.t;
    if snapshots.last().map(|s| s.t) != Some(t_end) {
        snapshots.push(Snapshot {
            t: t_end,
            field: state.field.clone(),
        });
    }
    Ok(Trajectory {
        params: *params,
        snapshots,
        series,
        classification,
        t_end,
        blowup_certificate: certificate,
        breakdown,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderReport {
    /// `max_t max_r (u_low - u_high)_+`
    pub max_violation: f64,
    /// Largest sup-norm seen on either run.
    pub scale: f64,
    pub t_end: f64,
    pub steps: usize,
}

impl OrderReport {
    /// Violation relative to the sup-norm scale.
    pub fn relative_violation(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_violation / self.scale
        } else {
            self.max_violation
        }
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.max_violation <= rel_tol * self.scale.max(f64::MIN_POSITIVE)
    }
}

fn positive_gap(low: &[f64], high: &[f64]) -> f64 {
    low.iter()
        .zip(high)
        .fold(0.0_f64, |m, (a, b)| m.max(a - b))
}

/// Co-evolves ordered data `u0_low <= u0_high` on a shared time grid and
/// reports the worst ordering violation over every accepted step.
pub fn order_check(
    u0_low: &Field,
    u0_high: &Field,
    params: &Params,
    tmax: f64,
    config: &EvolveConfig,
) -> Result<OrderReport, FlowError> {
    if !(tmax.is_finite() && tmax > 0.0) {
        return Err(FlowError::BadHorizon(tmax));
    }
    let grid = u0_low.grid().clone();
    let n = grid.cells();
    let mut low = u0_low.clone();
    let mut high = u0_high.clone();
    low.values_mut()[n] = 0.0;
    high.values_mut()[n] = 0.0;
    let mut max_violation = positive_gap(low.values(), high.values());
    let mut scale = low.sup_norm().max(high.sup_norm());

    let mut inner = config.step;
    inner.accepts_before_growth = usize::MAX;
    let mut int_low = Integrator::new(grid.clone(), *params, inner);
    let mut int_high = Integrator::new(grid, *params, inner);
    let mut t = 0.0;
    let mut dt = config.step.dt_initial;
    let mut steps = 0;
    let mut streak = 0;
    while t < tmax {
        // lockstep: a step counts only if both runs accept it unchanged
        let dt_try = dt.min(tmax - t);
        let t_next = if dt_try < dt { tmax } else { t + dt_try };
        let mut s_low = FlowState {
            field: low.clone(),
            t,
            dt: dt_try,
            steps: 0,
            streak: 0,
        };
        let mut s_high = FlowState {
            field: high.clone(),
            ..s_low.clone()
        };
        let ok_low = int_low.step(&mut s_low, t_next).is_ok() && s_low.dt == dt_try;
        let ok_high = ok_low && int_high.step(&mut s_high, t_next).is_ok() && s_high.dt == dt_try;
        if ok_high {
            low = s_low.field;
            high = s_high.field;
            t = t_next;
            steps += 1;
            streak += 1;
            if streak >= config.step.accepts_before_growth {
                dt = (dt * config.step.growth).min(config.step.dt_max);
                streak = 0;
            }
            max_violation = max_violation.max(positive_gap(low.values(), high.values()));
            scale = scale.max(low.sup_norm()).max(high.sup_norm());
            if scale >= config.criteria.blowup_above {
                break;
            }
        } else {
            dt = 0.5 * dt_try;
            streak = 0;
            if dt < config.step.dt_min {
                return Err(FlowError::StiffnessBreakdown { t, dt });
            }
        }
    }
    Ok(OrderReport {
        max_violation,
        scale,
        t_end: t,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    /// `max u_{i+1} - u_i` over snapshots and nodes.
    pub max_increase: f64,
    pub sup_norm: f64,
    /// True when the increase exceeds `1e-8 · sup_norm`.
    pub flagged: bool,
}

pub fn monotonicity_check(traj: &Trajectory) -> MonotonicityReport {
    let mut max_increase = f64::NEG_INFINITY;
    let mut sup = 0.0_f64;
    for s in &traj.snapshots {
        let v = s.field.values();
        sup = sup.max(s.field.sup_norm());
        for w in v.windows(2) {
            max_increase = max_increase.max(w[1] - w[0]);
        }
    }
    let max_increase = max_increase.max(0.0);
    MonotonicityReport {
        max_increase,
        sup_norm: sup,
        flagged: max_increase > 1e-8 * sup,
    }
}

/// `min_t min_r u / max_t ‖u‖_∞`, which is `>= 0` when positivity holds.
pub fn min_value_ratio(traj: &Trajectory) -> f64 {
    let scale = traj.max_sup_norm().max(f64::MIN_POSITIVE);
    let min = traj
        .snapshots
        .iter()
        .flat_map(|s| s.field.values().iter().copied())
        .fold(f64::INFINITY, f64::min);
    min / scale
}

/// `max_t max_{r >= rmax/2} u / max_t ‖u‖_∞`: the uniform-decay diagnostic.
pub fn uniform_decay_ratio(traj: &Trajectory) -> f64 {
    let grid = traj.snapshots[0].field.grid();
    let start = grid.index_at_or_below(0.5 * grid.rmax());
    let far = traj
        .snapshots
        .iter()
        .flat_map(|s| s.field.values()[start..].iter().copied())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    far / traj.max_sup_norm().max(f64::MIN_POSITIVE)
}

/// `∫_{t0}^{t1} ‖u(t) - target‖²_{H¹} dt` by the trapezoid rule over
/// snapshots in the window.
pub fn time_averaged_h1_distance(traj: &Trajectory, target: &Field, t0: f64, t1: f64) -> f64 {
    let pts: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= t0 - 1e-9 && s.t <= t1 + 1e-9)
        .map(|s| {
            let d: Vec<f64> = s
                .field
                .values()
                .iter()
                .zip(target.values())
                .map(|(a, b)| a - b)
                .collect();
            let d = Field::from_parts_unchecked(s.field.grid().clone(), d);
            (s.t, d.h1_norm_sq())
        })
        .collect();
    pts.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dim: usize, rmax: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, rmax, n).unwrap())
    }

    #[test]
    fn profile_examples() {
        let g = grid(2, 10.0, 200);
        let z = initial_profile(&ProfileKind::Gaussian { width: 1.0 }, 0.0, g.clone()).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
        let b = initial_profile(&ProfileKind::Bump { width: 2.0 }, 1.0, g.clone()).unwrap();
        assert!((b.values()[0] - (-1.0f64).exp()).abs() < 1e-15);
        for (i, &r) in g.nodes().iter().enumerate() {
            assert_eq!(b.values()[i] > 0.0, r < 2.0, "r = {r}");
        }
        let mut table = vec![0.0; g.len()];
        table[0] = 2.0;
        table[1] = 1.0;
        table[2] = 3.0;
        assert_eq!(
            initial_profile(&ProfileKind::Table(table), 1.0, g.clone()),
            Err(ProfileError::TableIncreasing { index: 2 })
        );
        assert!(matches!(
            initial_profile(&ProfileKind::Gaussian { width: 0.0 }, 1.0, g.clone()),
            Err(ProfileError::NonPositiveWidth(_))
        ));
        assert!(matches!(
            initial_profile(&ProfileKind::Gaussian { width: 1.0 }, -1.0, g),
            Err(ProfileError::NegativeAmplitude(_))
        ));
    }

    #[test]
    fn rhs_on_constants() {
        let g = grid(2, 5.0, 100);
        let p3 = Params::new(2, 3.0, 1.0, 0.0).unwrap();
        let one = rhs(&Field::constant(g.clone(), 1.0), &p3);
        assert!(one.values()[..100].iter().all(|v| v.abs() < 1e-12));
        let c = 0.6;
        let r = rhs(&Field::constant(g, c), &p3);
        for v in &r.values()[..100] {
            assert!((v - (c * c * c - c)).abs() < 1e-12);
        }
        assert_eq!(r.values()[100], 0.0);
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = grid(2, 10.0, 200);
        let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
        let cfg = StepConfig::for_grid(&g);
        let mut state = FlowState::new(Field::zeros(g), &cfg);
        for _ in 0..20 {
            state = step(&state, &params, &cfg).unwrap();
        }
        assert!(state.field.values().iter().all(|&v| v == 0.0));
        assert!(state.t > 0.0);
    }

    #[test]
    fn one_is_a_fixed_point_in_the_interior() {
        let g = grid(1, 10.0, 200);
        let params = Params::new(1, 3.0, 1.0, 0.0).unwrap();
        let cfg = StepConfig::for_grid(&g);
        let mut state = FlowState::new(Field::constant(g, 1.0), &cfg);
        let mut integrator = Integrator::new(state.field.grid().clone(), params, cfg);
        let mut u = vec![0.0; 201];
        let v = state.field.values().to_vec();
        assert!(integrator.imex(&v, 1e-3, &mut u));
        // away from the Dirichlet layer the constant is untouched
        for x in &u[..150] {
            assert!((x - 1.0).abs() < 1e-14, "{x}");
        }
        integrator.step(&mut state, 1.0).unwrap();
    }

    #[test]
    fn small_data_decays_like_the_linear_flow() {
        // u_t ≈ Δu - u at small amplitude: sup decays as e^{-t} times the
        // heat-kernel factor (1 + 4t/σ²)^{-N/2} for Gaussian data.
        let g = grid(2, 20.0, 800);
        let params = Params::new(2, 3.0, 1.0, 1e-3).unwrap();
        let sigma = 2.0;
        let u0 = initial_profile(&ProfileKind::Gaussian { width: sigma }, 1e-3, g.clone()).unwrap();
        let cfg = EvolveConfig::for_grid(&g);
        let traj = evolve(&params, &u0, 2.0, 0.5, &cfg).unwrap();
        for s in &traj.snapshots {
            let t = s.t;
            let exact = 1e-3 * (-t).exp() / (1.0 + 4.0 * t / (sigma * sigma));
            let got = s.field.sup_norm();
            // first-order in time with dt = h/2
            assert!((got - exact).abs() <= 1e-2 * exact, "t {t}: {got} vs {exact}");
        }
    }

    #[test]
    fn zero_data_vanishes_immediately() {
        let g = grid(2, 15.0, 300);
        let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
        let traj = evolve(&params, &Field::zeros(g.clone()), 200.0, 1.0, &EvolveConfig::for_grid(&g))
            .unwrap();
        assert_eq!(traj.classification, Classification::Vanish);
        assert_eq!(traj.t_end, 0.0);
        assert_eq!(traj.blowup_certificate, None);
    }

    fn series(points: &[(f64, f64)]) -> Vec<SeriesPoint> {
        points
            .iter()
            .map(|&(t, s)| SeriesPoint {
                t,
                sup_norm: s,
                energy: 0.0,
                dt: 0.1,
            })
            .collect()
    }

    #[test]
    fn classify_thresholds() {
        let c = Criteria::default();
        assert_eq!(
            classify(&series(&[(0.0, 0.0), (1.0, 0.0)]), &[], false, &c),
            Classification::Vanish
        );
        assert_eq!(
            classify(&series(&[(0.0, 10.0), (1.0, 999.0), (1.1, 1000.0)]), &[], false, &c),
            Classification::BlowUp
        );
        assert_eq!(
            classify(&series(&[(0.0, 10.0), (1.0, 999.0)]), &[], false, &c),
            Classification::Undecided
        );
        assert_eq!(classify(&[], &[], false, &c), Classification::Undecided);
    }

    #[test]
    fn classify_breakdown_needs_certificate() {
        let c = Criteria::default();
        let mut s = series(&[(0.0, 2.0), (1.0, 50.0)]);
        assert_eq!(classify(&s, &[], true, &c), Classification::Undecided);
        s[1].energy = -3.0;
        assert_eq!(classify(&s, &[], true, &c), Classification::BlowUp);
        assert_eq!(classify(&s, &[], false, &c), Classification::Undecided);
    }

    #[test]
    fn classify_converge_on_steady_history() {
        let g = grid(2, 10.0, 100);
        let w = Field::from_fn(g.clone(), |r| 2.0 * (-r * r).exp());
        let c = Criteria::default();
        let pts: Vec<(f64, f64)> = (0..=120).map(|k| (k as f64 * 0.1, 2.0)).collect();
        let snaps: Vec<Snapshot> = (0..=12)
            .map(|k| Snapshot {
                t: k as f64,
                field: w.clone(),
            })
            .collect();
        assert_eq!(
            classify(&series(&pts), &snaps, false, &c),
            Classification::Converge
        );
        // a drifting sup norm is not convergence
        let drift: Vec<(f64, f64)> = (0..=120).map(|k| (k as f64 * 0.1, 2.0 + 1e-3 * k as f64)).collect();
        assert_eq!(
            classify(&series(&drift), &snaps, false, &c),
            Classification::Undecided
        );
        // sub-unit plateaus are not positive stationary states
        let low: Vec<(f64, f64)> = (0..=120).map(|k| (k as f64 * 0.1, 0.5)).collect();
        assert_eq!(
            classify(&series(&low), &snaps, false, &c),
            Classification::Undecided
        );
    }

    #[test]
    fn identical_data_has_no_violation() {
        let g = grid(2, 10.0, 200);
        let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
        let u = initial_profile(&ProfileKind::Gaussian { width: 2.0 }, 0.5, g.clone()).unwrap();
        let r = order_check(&u, &u, &params, 2.0, &EvolveConfig::for_grid(&g)).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert!(r.t_end >= 2.0);
    }

    #[test]
    fn monotonicity_detector_flags_bad_seed() {
        let g = grid(2, 10.0, 200);
        let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
        let z = evolve(&params, &Field::zeros(g.clone()), 1.0, 0.5, &EvolveConfig::for_grid(&g)).unwrap();
        let r = monotonicity_check(&z);
        assert_eq!(r.max_increase, 0.0);
        assert!(!r.flagged);

        let bad = Field::from_fn(g.clone(), |r| 0.3 * (-(r - 3.0) * (r - 3.0)).exp());
        assert_eq!(
            evolve(&params, &bad, 1.0, 0.5, &EvolveConfig::for_grid(&g)),
            Err(FlowError::NonMonotoneData)
        );
        let traj = evolve_unchecked(&params, &bad, 1.0, 0.5, &EvolveConfig::for_grid(&g)).unwrap();
        let r = monotonicity_check(&traj);
        assert!(r.flagged && r.max_increase > 0.0);
    }

    #[test]
    fn rejects_bad_horizon() {
        let g = grid(2, 10.0, 100);
        let params = Params::new(2, 3.0, 1.0, 0.0).unwrap();
        let z = Field::zeros(g.clone());
        assert!(matches!(
            evolve(&params, &z, -1.0, 1.0, &EvolveConfig::for_grid(&g)),
            Err(FlowError::BadHorizon(_))
        ));
        assert!(matches!(
            evolve(&params, &z, 1.0, 0.0, &EvolveConfig::for_grid(&g)),
            Err(FlowError::BadHorizon(_))
        ));
    }
}
