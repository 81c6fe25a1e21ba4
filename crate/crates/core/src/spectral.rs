//! Spectrum of the linearization around the ground state,
//!
//! ```text
//! ℒφ = -div((1+2κw²)∇φ) + (1 - p w^{p-1} - 4κ w Δw - 2κ|∇w|²) φ,
//! ```
//!
//! one spherical-harmonic sector `ℓ` at a time. In sector `ℓ` the angular
//! part adds `ℓ(ℓ+N-2)/r² (1+2κw²)`. The translation modes `∂w/∂x_i` live in
//! `ℓ = 1` and have radial part `w'`.
//!
//! Assembly is finite-volume around the nodes: cell volumes
//! `∫ r^{N-1} dr` over `[r_{i-½}, r_{i+½}]` and fluxes through the cell faces,
//! so the discrete operator is symmetric in the cell-volume inner product.
//! Sector `ℓ = 0` keeps the origin node (regularity there is the natural
//! condition of the flux form); sectors `ℓ >= 1` vanish at the origin. All
//! sectors vanish at `rmax`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::radial::{Field, RadialGrid};
use crate::stationary::StationaryProfile;
use crate::tridiag::{SymTridiag, TridiagError};

pub const MAX_EIGENPAIRS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    TooManyEigenpairs(usize),
    Solver(TridiagError),
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::TooManyEigenpairs(k) => {
                write!(f, "requested {k} eigenpairs, at most {MAX_EIGENPAIRS} supported")
            }
            SpectralError::Solver(e) => write!(f, "eigensolver: {e}"),
        }
    }
}

impl core::error::Error for SpectralError {}

impl From<TridiagError> for SpectralError {
    fn from(e: TridiagError) -> Self {
        SpectralError::Solver(e)
    }
}

/// Discretized `ℒ` restricted to one angular sector.
///
/// The operator acts on nodal values `first..first+len` as
/// `(Aφ)_i = lower_i φ_{i-1} + diag_i φ_i + upper_i φ_{i+1}`, and
/// `weights_i A_{i,i+1} = weights_{i+1} A_{i+1,i}`.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub ell: usize,
    grid: Arc<RadialGrid>,
    /// Index of the first unknown node (0 for `ℓ = 0`, 1 otherwise).
    pub first: usize,
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    /// Cell volumes `∫ r^{N-1} dr`, without the sphere measure.
    pub weights: Vec<f64>,
}

impl SectorOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Largest `|w_i A_{i,i+1} - w_{i+1} A_{i+1,i}|`, relative to the largest
    /// flux coefficient.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect = 0.0_f64;
        let mut scale = f64::MIN_POSITIVE;
        for i in 0..self.len().saturating_sub(1) {
            let a = self.weights[i] * self.upper[i];
            let b = self.weights[i + 1] * self.lower[i + 1];
            defect = defect.max((a - b).abs());
            scale = scale.max(a.abs()).max(b.abs());
        }
        defect / scale
    }

    /// `Aφ` for `φ` given on the unknown nodes.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * phi[i];
                if i > 0 {
                    s += self.lower[i] * phi[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * phi[i + 1];
                }
                s
            })
            .collect()
    }

    /// Discrete `L²` inner product on the unknown nodes, sphere measure
    /// included.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.grid.sphere_measure()
            * self
                .weights
                .iter()
                .zip(f.iter().zip(g))
                .map(|(w, (a, b))| w * a * b)
                .sum::<f64>()
    }

    /// `W^{1/2} A W^{-1/2}`, the symmetric form.
    pub fn symmetric(&self) -> SymTridiag {
        let off = (0..self.len().saturating_sub(1))
            .map(|i| self.upper[i] * math::sqrt(self.weights[i] / self.weights[i + 1]))
            .collect();
        SymTridiag::new(self.diag.clone(), off)
    }

    /// Restriction of a full-grid field to the unknown nodes.
    pub fn restrict(&self, values: &[f64]) -> Vec<f64> {
        values[self.first..self.first + self.len()].to_vec()
    }

    fn extend(&self, phi: &[f64]) -> Field {
        let mut values = alloc::vec![0.0; self.grid.len()];
        values[self.first..self.first + phi.len()].copy_from_slice(phi);
        Field::from_parts_unchecked(self.grid.clone(), values)
    }
}

/// Assembles sector `ell` of the linearization around `profile`.
pub fn assemble_sector(profile: &StationaryProfile, ell: usize) -> SectorOperator {
    let params = &profile.params;
    let grid = profile.grid().clone();
    let w = profile.w.values();
    let dw = &profile.dw;
    let h = grid.h();
    let dim = grid.dim();
    let nm1 = dim as f64 - 1.0;
    let k2 = 2.0 * params.kappa;
    let p = params.p;
    let n = grid.cells();
    let first = if ell == 0 { 0 } else { 1 };
    let angular = ell as f64 * (ell as f64 + dim as f64 - 2.0);

    let face_r = |i: usize| (i as f64 + 0.5) * h;
    let flux = |i: usize| {
        // face between nodes i and i+1
        let wm = 0.5 * (w[i] + w[i + 1]);
        math::powf(face_r(i), nm1) * (1.0 + k2 * wm * wm) / h
    };
    let volume = |i: usize| {
        let outer = math::powf(face_r(i), dim as f64);
        let inner = if i == 0 {
            0.0
        } else {
            math::powf(face_r(i - 1), dim as f64)
        };
        (outer - inner) / dim as f64
    };

    let len = n - first;
    let mut lower = alloc::vec![0.0; len];
    let mut diag = alloc::vec![0.0; len];
    let mut upper = alloc::vec![0.0; len];
    let mut weights = alloc::vec![0.0; len];
    for (k, i) in (first..n).enumerate() {
        let vol = volume(i);
        let right = flux(i);
        let left = if i == 0 { 0.0 } else { flux(i - 1) };
        weights[k] = vol;
        if k > 0 {
            lower[k] = -left / vol;
        }
        if k + 1 < len {
            upper[k] = -right / vol;
        }
        let (wi, gi) = (w[i], dw[i]);
        let a = 1.0 + k2 * wi * wi;
        let lap_w = (wi - math::signed_pow(wi, p) - k2 * wi * gi * gi) / a;
        let potential = 1.0 - p * math::powf(wi.abs(), p - 1.0) - 2.0 * k2 * wi * lap_w - k2 * gi * gi;
        let centrifugal = if i == 0 {
            0.0
        } else {
            angular / (grid.r(i) * grid.r(i)) * a
        };
        diag[k] = (right + left) / vol + potential + centrifugal;
    }
    SectorOperator {
        ell,
        grid,
        first,
        lower,
        diag,
        upper,
        weights,
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Eigenfunction on the full grid, unit norm in the cell-volume `L²`
    /// product and positive at its first nonzero extremum.
    pub vector: Field,
    /// `‖Sy - μy‖` in the symmetric form, relative to `‖S‖_∞`.
    pub residual: f64,
}

/// The `k <= 6` algebraically smallest eigenpairs of a sector.
pub fn eig_smallest(op: &SectorOperator, k: usize) -> Result<Vec<Eigenpair>, SpectralError> {
    if k > MAX_EIGENPAIRS {
        return Err(SpectralError::TooManyEigenpairs(k));
    }
    let sym = op.symmetric();
    let scale = sym.norm_inf().max(f64::MIN_POSITIVE);
    let pairs = sym.smallest_eigenpairs(k)?;
    let omega = op.grid.sphere_measure();
    Ok(pairs
        .into_iter()
        .map(|(value, y)| {
            let sy = sym.matvec(&y);
            let residual = math::sqrt(
                sy.iter()
                    .zip(&y)
                    .map(|(a, b)| (a - value * b) * (a - value * b))
                    .sum::<f64>(),
            ) / scale;
            // y has unit Euclidean norm, so W^{-1/2} y / sqrt(ω) has unit L² norm
            let mut phi: Vec<f64> = y
                .iter()
                .zip(&op.weights)
                .map(|(v, w)| v / math::sqrt(w * omega))
                .collect();
            let peak = phi
                .iter()
                .copied()
                .fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
            if peak < 0.0 {
                phi.iter_mut().for_each(|v| *v = -*v);
            }
            Eigenpair {
                value,
                vector: op.extend(&phi),
                residual,
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Smallest eigenvalue of the radial sector.
    pub mu1: f64,
    /// Its eigenfunction, unit `L²` norm, positive.
    pub psi1: Field,
    /// Smallest eigenvalue of the `ℓ = 1` sector (the translation mode).
    pub mu_ell1: f64,
    /// `|⟨v, w'⟩| / (‖v‖ ‖w'‖)` for the lowest `ℓ = 1` eigenvector `v`.
    pub zero_mode_corr: f64,
    /// Smallest eigenvalue once `ψ₁` and `w'` are removed: the minimum of the
    /// second eigenvalues of `ℓ = 0, 1` and the first of `ℓ = 2` (for
    /// `N >= 2`).
    pub gap: f64,
    pub gap_sector: usize,
    /// Second eigenvalue of the radial sector.
    pub mu2_radial: f64,
}

pub fn nondegeneracy_report(profile: &StationaryProfile) -> Result<SpectrumResult, SpectralError> {
    let radial = eig_smallest(&assemble_sector(profile, 0), 2)?;
    let translation_op = assemble_sector(profile, 1);
    let translation = eig_smallest(&translation_op, 2)?;

    let v = translation_op.restrict(translation[0].vector.values());
    let dw = translation_op.restrict(&profile.dw);
    let vv = translation_op.inner(&v, &v);
    let gg = translation_op.inner(&dw, &dw);
    let zero_mode_corr = if vv > 0.0 && gg > 0.0 {
        translation_op.inner(&v, &dw).abs() / math::sqrt(vv * gg)
    } else {
        0.0
    };

    let mut gap = radial[1].value;
    let mut gap_sector = 0;
    if translation[1].value < gap {
        gap = translation[1].value;
        gap_sector = 1;
    }
    if profile.params.dim >= 2 {
        let quadrupole = eig_smallest(&assemble_sector(profile, 2), 1)?;
        if quadrupole[0].value < gap {
            gap = quadrupole[0].value;
            gap_sector = 2;
        }
    }

    Ok(SpectrumResult {
        mu1: radial[0].value,
        psi1: radial[0].vector.clone(),
        mu_ell1: translation[0].value,
        zero_mode_corr,
        gap,
        gap_sector,
        mu2_radial: radial[1].value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use crate::stationary::shoot;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn grid(dim: usize, rmax: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, rmax, n).unwrap())
    }

    fn free(dim: usize, rmax: f64, n: usize) -> StationaryProfile {
        let params = Params::new(dim, 3.0, 1.0, 0.0).unwrap();
        StationaryProfile::from_field(params, Field::zeros(grid(dim, rmax, n)))
    }

    fn ground(dim: usize, n: usize) -> StationaryProfile {
        let params = Params::new(dim, 3.0, 1.0, 0.0).unwrap();
        shoot(&params, grid(dim, 15.0, n), 1e-10).unwrap()
    }

    #[test]
    fn free_operator_spectrum() {
        let rmax = 40.0;
        let op = assemble_sector(&free(1, rmax, 4000), 0);
        let pairs = eig_smallest(&op, 4).unwrap();
        for (k, pair) in pairs.iter().enumerate() {
            // even modes cos((k+½)πr/R)
            let exact = 1.0 + ((k as f64 + 0.5) * PI / rmax).powi(2);
            assert!(pair.value >= 1.0);
            assert!((pair.value - exact).abs() < 1e-5, "{k}: {} vs {exact}", pair.value);
            assert!(pair.residual < 1e-8);
        }
        let op = assemble_sector(&free(1, rmax, 4000), 1);
        let odd = eig_smallest(&op, 1).unwrap();
        assert!((odd[0].value - (1.0 + (PI / rmax).powi(2))).abs() < 1e-5);
    }

    #[test]
    fn free_operator_three_dimensional() {
        // radial modes sin(kπr/R)/r
        let rmax = 20.0;
        let op = assemble_sector(&free(3, rmax, 2000), 0);
        let pairs = eig_smallest(&op, 3).unwrap();
        for (k, pair) in pairs.iter().enumerate() {
            let exact = 1.0 + ((k + 1) as f64 * PI / rmax).powi(2);
            assert!((pair.value - exact).abs() < 1e-4, "{k}: {} vs {exact}", pair.value);
        }
    }

    #[test]
    fn weighted_symmetry_and_normalization() {
        let w = ground(2, 1500);
        for ell in 0..3 {
            let op = assemble_sector(&w, ell);
            assert!(op.symmetry_defect() <= 1e-12);
            let pairs = eig_smallest(&op, 2).unwrap();
            for pair in &pairs {
                let v = op.restrict(pair.vector.values());
                assert!((op.inner(&v, &v) - 1.0).abs() < 1e-10);
                assert!(pair.residual < 1e-8);
            }
        }
    }

    #[test]
    fn diagonal_matrix() {
        let mut op = assemble_sector(&free(1, 15.0, 64), 0);
        for (i, d) in op.diag.iter_mut().enumerate() {
            *d = ((i * 37) % 61) as f64;
        }
        op.lower.iter_mut().for_each(|v| *v = 0.0);
        op.upper.iter_mut().for_each(|v| *v = 0.0);
        let mut sorted = op.diag.clone();
        sorted.sort_by(f64::total_cmp);
        let pairs = eig_smallest(&op, 5).unwrap();
        for (pair, want) in pairs.iter().zip(&sorted) {
            assert!((pair.value - want).abs() < 1e-10);
        }
        assert!(matches!(
            eig_smallest(&op, 7),
            Err(SpectralError::TooManyEigenpairs(7))
        ));
    }

    #[test]
    fn one_dimensional_picture() {
        let w = ground(1, 1500);
        let s = nondegeneracy_report(&w).unwrap();
        assert!(s.mu1 < -0.1);
        assert!(s.mu1 <= s.mu_ell1);
        assert!(s.mu_ell1.abs() <= 1e-2, "{}", s.mu_ell1);
        assert!(s.zero_mode_corr >= 0.999);
        assert!(s.gap > 0.0);
        let psi = s.psi1.values();
        assert!(psi[..psi.len() - 1].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn zero_mode_converges_at_second_order() {
        let coarse = nondegeneracy_report(&ground(1, 1500)).unwrap().mu_ell1;
        let fine = nondegeneracy_report(&ground(1, 3000)).unwrap().mu_ell1;
        let ratio = coarse.abs() / fine.abs();
        assert!((3.0..=5.0).contains(&ratio), "{coarse} {fine} {ratio}");
    }

    #[test]
    fn gap_positive_in_higher_dimensions() {
        for dim in 2..=3 {
            let s = nondegeneracy_report(&ground(dim, 1500)).unwrap();
            assert!(s.mu1 < 0.0);
            assert!(s.mu_ell1.abs() < 1e-2, "N={dim}: {}", s.mu_ell1);
            assert!(s.zero_mode_corr > 0.999);
            assert!(s.gap > 0.0, "N={dim}: gap {} in sector {}", s.gap, s.gap_sector);
        }
    }

    #[test]
    fn scaled_profile_loses_translation_mode() {
        let w = ground(1, 1500);
        let exact = nondegeneracy_report(&w).unwrap();
        let scaled = StationaryProfile::from_field(w.params, w.w.scaled(1.1));
        let s = nondegeneracy_report(&scaled).unwrap();
        // the kernel disappears; the eigenvector itself stays close to w'
        assert!(s.mu_ell1.abs() > 1e-2, "{}", s.mu_ell1);
        assert!(exact.mu_ell1.abs() < 1e-4);
        assert!(1.0 - s.zero_mode_corr > 1e4 * (1.0 - exact.zero_mode_corr));
        assert!(s.zero_mode_corr > 0.99, "{}", s.zero_mode_corr);
    }

    #[test]
    fn lowest_eigenvalue_grows_with_ell() {
        let w = ground(3, 1500);
        let mut last = f64::NEG_INFINITY;
        for ell in 0..4 {
            let mu = eig_smallest(&assemble_sector(&w, ell), 1).unwrap()[0].value;
            assert!(mu >= last);
            last = mu;
        }
    }

    #[test]
    fn translation_mode_is_nearly_annihilated() {
        let w = ground(2, 1500);
        let op = assemble_sector(&w, 1);
        let dw = op.restrict(&w.dw);
        let image = op.apply(&dw);
        let rel = math::sqrt(op.inner(&image, &image) / op.inner(&dw, &dw));
        assert!(rel < 1e-2, "{rel}");
    }

    proptest! {
        #[test]
        fn self_adjoint_on_compact_support(
            f in proptest::collection::vec(-1.0f64..1.0, 40),
            g in proptest::collection::vec(-1.0f64..1.0, 40),
            ell in 0usize..3,
        ) {
            let w = free(2, 15.0, 200);
            let op = assemble_sector(&w, ell);
            let mut phi = alloc::vec![0.0; op.len()];
            let mut psi = alloc::vec![0.0; op.len()];
            phi[10..50].copy_from_slice(&f);
            psi[20..60].copy_from_slice(&g);
            let a = op.inner(&op.apply(&phi), &psi);
            let b = op.inner(&phi, &op.apply(&psi));
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }
}
