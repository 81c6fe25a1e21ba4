//! The positive radial ground state `w` of
//!
//! ```text
//! -Δw - κ w Δ(w²) + w = w^p
//! ```
//!
//! found by shooting on `s = w(0)`, and the identities that certify it.
//!
//! In radial form the equation reads
//! `(1+2κw²)(w'' + (N-1)/r w') + 2κ w (w')² - w + w^p = 0`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::ode::{Control, Dopri, State, Tolerance};
use crate::params::Params;
use crate::radial::{self, Field, RadialGrid};

/// Relative spread between the bracketing shots tolerated on the kept branch.
const MATCH_SPREAD: f64 = 1e-6;
/// Radius up to which a bisection shot may run before it counts as unresolved.
const SHOT_RANGE: f64 = 200.0;
/// Largest step of the fixed-step traces.
const TRACE_STEP: f64 = 2.5e-3;
const ADAPTIVE_TOL: Tolerance = Tolerance {
    rtol: 1e-13,
    atol: 1e-16,
};

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryError {
    /// The initial shooting bracket does not straddle the ground state.
    NoBracket {
        s_lo: f64,
        s_hi: f64,
        lo: Shot,
        hi: Shot,
    },
    BadTolerance(f64),
    DimensionMismatch { params: usize, grid: usize },
    /// `w` is not positive (or underflows) on the fitting window.
    DegenerateWindow { r0: f64, r1: f64 },
    NotOneDimensional(usize),
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for StationaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StationaryError::NoBracket { s_lo, s_hi, lo, hi } => write!(
                f,
                "shooting bracket [{s_lo}, {s_hi}] does not straddle the ground state \
                 (low end: {lo:?}, high end: {hi:?})"
            ),
            StationaryError::BadTolerance(t) => {
                write!(f, "shooting tolerance {t} outside [1e-12, 1e-4]")
            }
            StationaryError::DimensionMismatch { params, grid } => {
                write!(f, "params have dimension {params} but the grid has {grid}")
            }
            StationaryError::DegenerateWindow { r0, r1 } => {
                write!(f, "profile is not positive on the window [{r0}, {r1}]")
            }
            StationaryError::NotOneDimensional(n) => {
                write!(f, "first integral only holds for N = 1, got N = {n}")
            }
            StationaryError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} derivative values, got {got}")
            }
        }
    }
}

impl core::error::Error for StationaryError {}

/// Outcome of a single shot from `w(0) = s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shot {
    /// `w` reaches zero while decreasing.
    Overshoot,
    /// `w'` turns positive while `w > 0`.
    Undershoot,
    /// Neither event happened within the integration range.
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct StationaryProfile {
    /// Parameters of the equation (`lambda` is ignored).
    pub params: Params,
    pub w: Field,
    /// `w'` at the nodes, taken from the ODE state rather than differenced.
    pub dw: Vec<f64>,
    pub w0: f64,
    /// Fitted exponential decay rate on `[rmax/2, 3 rmax/4]`; NaN when the
    /// window is degenerate.
    pub decay_rate: f64,
    pub ode_residual_sup: f64,
    pub shoot_tolerance: f64,
    /// Radius beyond which the profile is the matched linear tail.
    pub matching_radius: f64,
    /// Bracket `(s_lo, s_hi)` after each bisection step, starting with the
    /// initial one.
    pub bracket_history: Vec<(f64, f64)>,
}

impl StationaryProfile {
    /// Wraps an arbitrary field as a profile, differencing it for `w'`.
    /// Useful for checking the certificates on candidate or perturbed data.
    pub fn from_field(params: Params, w: Field) -> Self {
        let grid = w.grid().clone();
        let mut dw = alloc::vec![0.0; grid.len()];
        radial::gradient_into(&grid, w.values(), &mut dw);
        let mut profile = StationaryProfile {
            params,
            w0: w.values()[0],
            w,
            dw,
            decay_rate: f64::NAN,
            ode_residual_sup: 0.0,
            shoot_tolerance: 0.0,
            matching_radius: grid.rmax(),
            bracket_history: Vec::new(),
        };
        profile.decay_rate = decay_rate(&profile).unwrap_or(f64::NAN);
        profile.ode_residual_sup = ode_residual(&profile);
        profile
    }

    /// Rebuilds a profile from stored values and derivatives, e.g. one read
    /// back from disk.
    pub fn from_parts(
        params: Params,
        w: Field,
        dw: Vec<f64>,
        shoot_tolerance: f64,
        matching_radius: f64,
    ) -> Result<Self, StationaryError> {
        if params.dim != w.grid().dim() {
            return Err(StationaryError::DimensionMismatch {
                params: params.dim,
                grid: w.grid().dim(),
            });
        }
        if dw.len() != w.values().len() {
            return Err(StationaryError::LengthMismatch {
                expected: w.values().len(),
                got: dw.len(),
            });
        }
        let mut profile = StationaryProfile {
            params,
            w0: w.values()[0],
            w,
            dw,
            decay_rate: f64::NAN,
            ode_residual_sup: 0.0,
            shoot_tolerance,
            matching_radius,
            bracket_history: Vec::new(),
        };
        profile.decay_rate = decay_rate(&profile).unwrap_or(f64::NAN);
        profile.ode_residual_sup = ode_residual(&profile);
        Ok(profile)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.w.grid()
    }
}

fn ode_rhs(params: &Params, r: f64, y: &State) -> State {
    let (w, v) = (y[0], y[1]);
    let k2 = 2.0 * params.kappa;
    let a = 1.0 + k2 * w * w;
    let source = w - math::signed_pow(w, params.p) - k2 * w * v * v;
    if r == 0.0 {
        [v, source / (params.dim as f64 * a)]
    } else {
        [v, source / a - (params.dim as f64 - 1.0) / r * v]
    }
}

fn event(y: &State) -> Option<Shot> {
    if y[0] <= 0.0 {
        Some(Shot::Overshoot)
    } else if y[1] > 0.0 {
        Some(Shot::Undershoot)
    } else {
        None
    }
}

/// Classifies the shot from `w(0) = s` with the adaptive integrator.
pub fn classify_shot(params: &Params, s: f64) -> Shot {
    let mut solver = Dopri::new(|r, y: &State| ode_rhs(params, r, y), ADAPTIVE_TOL, 1e-3);
    let mut outcome = Shot::Unresolved;
    solver.run(0.0, [s, 0.0], SHOT_RANGE, |_, y| match event(y) {
        Some(e) => {
            outcome = e;
            Control::Stop
        }
        None => Control::Continue,
    });
    outcome
}

/// Fixed-step integration so that the result depends smoothly on `s`.
struct Tracer<'a> {
    params: &'a Params,
    substeps: usize,
    step: f64,
}

impl<'a> Tracer<'a> {
    fn new(params: &'a Params, grid_h: f64) -> Self {
        let substeps = libm::ceil(grid_h / TRACE_STEP).max(1.0) as usize;
        Tracer {
            params,
            substeps,
            step: grid_h / substeps as f64,
        }
    }

    fn classify(&self, s: f64) -> Shot {
        let params = self.params;
        let mut solver = Dopri::new(|r, y: &State| ode_rhs(params, r, y), ADAPTIVE_TOL, self.step);
        let mut y = [s, 0.0];
        let total = libm::ceil(SHOT_RANGE / self.step) as usize;
        for i in 0..total {
            y = solver.fixed_step(i as f64 * self.step, &y, self.step);
            if let Some(e) = event(&y) {
                return e;
            }
        }
        Shot::Unresolved
    }

    /// `(w, w')` at the first `len` nodes.
    fn trace(&self, s: f64, len: usize) -> Vec<State> {
        let params = self.params;
        let mut solver = Dopri::new(|r, y: &State| ode_rhs(params, r, y), ADAPTIVE_TOL, self.step);
        let mut out = Vec::with_capacity(len);
        let mut y = [s, 0.0];
        out.push(y);
        let mut k = 0usize;
        for _ in 1..len {
            for _ in 0..self.substeps {
                y = solver.fixed_step(k as f64 * self.step, &y, self.step);
                k += 1;
            }
            out.push(y);
        }
        out
    }
}

fn goes_low(shot: Shot) -> bool {
    shot == Shot::Undershoot
}

/// Computes the ground state on `grid` by bisection on `s = w(0)` until the
/// bracket is narrower than `tol`.
///
/// The low end of the initial bracket sits just below `((p+1)/2)^{1/(p-1)}`
/// so that the one-dimensional case, where `w(0)` equals this value, is
/// still bracketed. After the adaptive bisection reaches `tol`, the bracket
/// is refined further with fixed-step shots; the profile is the midpoint
/// shot, kept while the two bracketing shots agree and continued beyond by
/// the linear tail `C r^{-(N-1)/2} e^{-βr}` matched in value and slope.
pub fn shoot(
    params: &Params,
    grid: Arc<RadialGrid>,
    tol: f64,
) -> Result<StationaryProfile, StationaryError> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(StationaryError::BadTolerance(tol));
    }
    if grid.dim() != params.dim {
        return Err(StationaryError::DimensionMismatch {
            params: params.dim,
            grid: grid.dim(),
        });
    }
    let floor = params.energy_threshold();
    let (mut lo, mut hi) = (floor * (1.0 - 1e-6), 10.0);
    let (lo_shot, hi_shot) = (classify_shot(params, lo), classify_shot(params, hi));
    if !goes_low(lo_shot) || goes_low(hi_shot) {
        return Err(StationaryError::NoBracket {
            s_lo: lo,
            s_hi: hi,
            lo: lo_shot,
            hi: hi_shot,
        });
    }
    let mut history = alloc::vec![(lo, hi)];
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if goes_low(classify_shot(params, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push((lo, hi));
    }
    let w0 = 0.5 * (lo + hi);

    let tracer = Tracer::new(params, grid.h());
    let (flo, fhi) = refine_bracket(&tracer, w0, hi - lo);
    let s_mid = 0.5 * (flo + fhi);

    let len = grid.len();
    let mid = tracer.trace(s_mid, len);
    let low = tracer.trace(flo, len);
    let high = tracer.trace(fhi, len);
    let spread_tol = MATCH_SPREAD.max(10.0 * (fhi - flo) / w0);
    let mut m = 0;
    for i in 1..len {
        let [w, dw] = mid[i];
        let spread = (high[i][0] - low[i][0]).abs();
        if !(w > 0.0 && dw < 0.0) || spread > spread_tol * w {
            break;
        }
        m = i;
    }

    let mut values = Vec::with_capacity(len);
    let mut dw = Vec::with_capacity(len);
    for state in &mid[..=m] {
        values.push(state[0]);
        dw.push(state[1]);
    }
    let nm1_half = (params.dim as f64 - 1.0) / 2.0;
    let r_m = grid.r(m);
    let (w_m, dw_m) = (mid[m][0], mid[m][1]);
    let beta = if m == 0 { 1.0 } else { -dw_m / w_m - nm1_half / r_m };
    for i in m + 1..len {
        let r = grid.r(i);
        let algebraic = if m == 0 { 1.0 } else { math::powf(r_m / r, nm1_half) };
        let w = w_m * algebraic * math::exp(-beta * (r - r_m));
        values.push(w);
        dw.push(-w * (beta + nm1_half / r));
    }

    let w = Field::from_parts_unchecked(grid.clone(), values);
    let mut profile = StationaryProfile {
        params: *params,
        w,
        dw,
        w0,
        decay_rate: f64::NAN,
        ode_residual_sup: 0.0,
        shoot_tolerance: tol,
        matching_radius: r_m,
        bracket_history: history,
    };
    profile.decay_rate = decay_rate(&profile).unwrap_or(f64::NAN);
    profile.ode_residual_sup = ode_residual(&profile);
    Ok(profile)
}

/// Bisects the fixed-step shooting map down to rounding, starting around
/// `center`. The fixed-step threshold differs from the adaptive one only
/// by the integration error, so a few doublings of `width` recover a
/// bracket.
fn refine_bracket(tracer: &Tracer<'_>, center: f64, width: f64) -> (f64, f64) {
    let mut half = width.max(1e-14);
    let (mut lo, mut hi) = (center - half, center + half);
    for _ in 0..60 {
        if goes_low(tracer.classify(lo)) && !goes_low(tracer.classify(hi)) {
            break;
        }
        half *= 2.0;
        lo = center - half;
        hi = center + half;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if goes_low(tracer.classify(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// `sup |(1+2κw²)Δw + 2κw|w'|² - w + w^p|` over all nodes but the outer
/// boundary, with the grid stencils.
pub fn ode_residual(profile: &StationaryProfile) -> f64 {
    let grid = profile.grid();
    let values = profile.w.values();
    let mut lap = alloc::vec![0.0; grid.len()];
    let mut grad = alloc::vec![0.0; grid.len()];
    radial::laplacian_into(grid, values, &mut lap);
    radial::gradient_into(grid, values, &mut grad);
    let params = &profile.params;
    let k2 = 2.0 * params.kappa;
    (0..grid.cells())
        .map(|i| {
            let w = values[i];
            ((1.0 + k2 * w * w) * lap[i] + k2 * w * grad[i] * grad[i] - w
                + math::signed_pow(w, params.p))
            .abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIntegralReport {
    /// `sup_r |H(r) - H(0)|`.
    pub sup_deviation: f64,
    /// `H(0) = w0^{p+1}/(p+1) - w0²/2`, zero for a decaying solution.
    pub h0: f64,
}

/// Conserved quantity `H = ½(1+2κw²)(w')² + w^{p+1}/(p+1) - w²/2` of the
/// one-dimensional equation.
pub fn first_integral_residual_1d(
    profile: &StationaryProfile,
) -> Result<FirstIntegralReport, StationaryError> {
    let params = &profile.params;
    if params.dim != 1 {
        return Err(StationaryError::NotOneDimensional(params.dim));
    }
    let p = params.p;
    let h = |w: f64, dw: f64| {
        0.5 * (1.0 + 2.0 * params.kappa * w * w) * dw * dw + math::powf(w.abs(), p + 1.0) / (p + 1.0)
            - 0.5 * w * w
    };
    let values = profile.w.values();
    let h0 = h(values[0], profile.dw[0]);
    let sup_deviation = values
        .iter()
        .zip(&profile.dw)
        .map(|(&w, &dw)| (h(w, dw) - h0).abs())
        .fold(0.0, f64::max);
    Ok(FirstIntegralReport { sup_deviation, h0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevReport {
    /// `(N-2)/(2N) ∫(1+2κw²)|∇w|²`.
    pub lhs: f64,
    /// `∫(w^{p+1}/(p+1) - w²/2)`.
    pub rhs: f64,
    /// `∫w²`, the natural scale when `lhs` vanishes (`N = 2`).
    pub l2_sq: f64,
    /// `|lhs - rhs| / max(|rhs|, 1e-12)`.
    pub relative: f64,
}

pub fn pohozaev_residual(profile: &StationaryProfile) -> PohozaevReport {
    let params = &profile.params;
    let grid = profile.grid();
    let values = profile.w.values();
    let n = params.dim as f64;
    let p = params.p;
    let grad: Vec<f64> = values
        .iter()
        .zip(&profile.dw)
        .map(|(&w, &dw)| params.diffusivity(w) * dw * dw)
        .collect();
    let pot: Vec<f64> = values
        .iter()
        .map(|&w| math::powf(w.abs(), p + 1.0) / (p + 1.0) - 0.5 * w * w)
        .collect();
    let lhs = (n - 2.0) / (2.0 * n) * radial::integrate_slice(grid, &grad);
    let rhs = radial::integrate_slice(grid, &pot);
    let l2 = profile.w.l2_norm();
    let l2_sq = l2 * l2;
    PohozaevReport {
        lhs,
        rhs,
        l2_sq,
        relative: (lhs - rhs).abs() / rhs.abs().max(1e-12),
    }
}

/// Least-squares slope of `-ln w` on `[rmax/2, 3 rmax/4]`.
pub fn decay_rate(profile: &StationaryProfile) -> Result<f64, StationaryError> {
    let rmax = profile.grid().rmax();
    decay_rate_on(profile, 0.5 * rmax, 0.75 * rmax)
}

/// Least-squares slope of `-ln w` over the nodes in `[r0, r1]`.
pub fn decay_rate_on(profile: &StationaryProfile, r0: f64, r1: f64) -> Result<f64, StationaryError> {
    let grid = profile.grid();
    let values = profile.w.values();
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, &r) in grid.nodes().iter().enumerate() {
        if r < r0 || r > r1 {
            continue;
        }
        let w = values[i];
        if !(w > f64::MIN_POSITIVE) || !w.is_finite() {
            return Err(StationaryError::DegenerateWindow { r0, r1 });
        }
        let y = -math::ln(w);
        n += 1.0;
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
    }
    let denom = n * sxx - sx * sx;
    if n < 2.0 || denom <= 0.0 {
        return Err(StationaryError::DegenerateWindow { r0, r1 });
    }
    Ok((n * sxy - sx * sy) / denom)
}
