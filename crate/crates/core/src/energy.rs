//! The Lyapunov functional
//! `I_κ(u) = ½∫((1+2κu²)|∇u|² + u²) - 1/(p+1) ∫|u|^{p+1}`,
//! its local version on balls, the discrete dissipation identity along a
//! trajectory, and the blow-up certificate `I < 0`.

use alloc::vec::Vec;
use core::fmt;

use crate::flow::Trajectory;
use crate::math;
use crate::params::Params;
use crate::radial::{self, Field};

#[derive(Debug, Clone, PartialEq)]
pub enum EnergyError {
    RadiusOutOfRange { radius: f64, rmax: f64 },
    TooFewSnapshots(usize),
    NonUniformCadence { index: usize },
}

impl fmt::Display for EnergyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyError::RadiusOutOfRange { radius, rmax } => {
                write!(f, "ball radius {radius} outside (0, {rmax}]")
            }
            EnergyError::TooFewSnapshots(n) => write!(f, "need at least 3 snapshots, got {n}"),
            EnergyError::NonUniformCadence { index } => {
                write!(f, "snapshot spacing changes at snapshot {index}")
            }
        }
    }
}

impl core::error::Error for EnergyError {}

fn density(u: &Field, params: &Params) -> Vec<f64> {
    let mut grad = alloc::vec![0.0; u.values().len()];
    radial::gradient_into(u.grid(), u.values(), &mut grad);
    let p = params.p;
    u.values()
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| {
            0.5 * (params.diffusivity(v) * g * g + v * v) - math::powf(v.abs(), p + 1.0) / (p + 1.0)
        })
        .collect()
}

/// `I_κ(u)`.
pub fn energy(u: &Field, params: &Params) -> f64 {
    radial::integrate_slice(u.grid(), &density(u, params))
}

/// `I_κ` restricted to the ball `r <= R`; `R` is rounded down to a node.
pub fn energy_local(u: &Field, radius: f64, params: &Params) -> Result<f64, EnergyError> {
    let grid = u.grid();
    if !(radius > 0.0 && radius <= grid.rmax() * (1.0 + 1e-12)) {
        return Err(EnergyError::RadiusOutOfRange {
            radius,
            rmax: grid.rmax(),
        });
    }
    let k = grid.index_at_or_below(radius);
    let w = grid.ball_weights(k);
    let d = density(u, params);
    Ok(w.iter().zip(&d).map(|(a, b)| a * b).sum())
}

/// `∫(φ₀²|∇φ₀|² - ¼φ₀⁴)`. Negative values admit a threshold for `p = 3`.
pub fn p3_condition(phi0: &Field) -> f64 {
    let mut grad = alloc::vec![0.0; phi0.values().len()];
    radial::gradient_into(phi0.grid(), phi0.values(), &mut grad);
    let integrand: Vec<f64> = phi0
        .values()
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| v * v * g * g - 0.25 * v * v * v * v)
        .collect();
    radial::integrate_slice(phi0.grid(), &integrand)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub i_kappa: f64,
    /// `‖(u(t+Δ) - u(t))/Δ‖²`
    pub dissipation: f64,
    /// `|ΔI/Δ + dissipation| / max(|I|, 1)`
    pub identity_residual: f64,
}

/// Compares `ΔI/Δt` with `-‖Δu/Δt‖²` over consecutive snapshots.
pub fn energy_identity_residual(traj: &Trajectory) -> Result<Vec<EnergyReport>, EnergyError> {
    let snaps = &traj.snapshots;
    // the final snapshot may close a run early, off the cadence grid
    let uniform_len = if snaps.len() >= 3 {
        let cadence = snaps[1].t - snaps[0].t;
        let last_gap = snaps[snaps.len() - 1].t - snaps[snaps.len() - 2].t;
        if (last_gap - cadence).abs() > 1e-9 * cadence.max(1.0) {
            snaps.len() - 1
        } else {
            snaps.len()
        }
    } else {
        snaps.len()
    };
    if uniform_len < 3 {
        return Err(EnergyError::TooFewSnapshots(uniform_len));
    }
    let snaps = &snaps[..uniform_len];
    let cadence = snaps[1].t - snaps[0].t;
    for (k, w) in snaps.windows(2).enumerate() {
        if ((w[1].t - w[0].t) - cadence).abs() > 1e-9 * cadence.max(1.0) {
            return Err(EnergyError::NonUniformCadence { index: k + 1 });
        }
    }
    let energies: Vec<f64> = snaps.iter().map(|s| energy(&s.field, &traj.params)).collect();
    let reports = snaps
        .windows(2)
        .zip(energies.windows(2))
        .map(|(s, e)| {
            let dt = s[1].t - s[0].t;
            let du: Vec<f64> = s[1]
                .field
                .values()
                .iter()
                .zip(s[0].field.values())
                .map(|(a, b)| (a - b) / dt)
                .collect();
            let dissipation: f64 = s[0]
                .field
                .grid()
                .weights()
                .iter()
                .zip(&du)
                .map(|(w, v)| w * v * v)
                .sum();
            let slope = (e[1] - e[0]) / dt;
            EnergyReport {
                t: s[0].t,
                i_kappa: e[0],
                dissipation,
                identity_residual: (slope + dissipation).abs() / e[0].abs().max(1.0),
            }
        })
        .collect();
    Ok(reports)
}

/// Largest relative increase of `I` between consecutive accepted steps,
/// `max (I_{k+1} - I_k) / max(1, |I_k|)`; non-positive for a Lyapunov run.
pub fn energy_increase(traj: &Trajectory) -> f64 {
    traj.series
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy) / w[0].energy.abs().max(1.0))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// First recorded time with `I(u(t)) < -1e-8`.
pub fn blowup_certificate(traj: &Trajectory) -> Option<f64> {
    traj.series.iter().find(|s| s.energy < -1e-8).map(|s| s.t)
}
