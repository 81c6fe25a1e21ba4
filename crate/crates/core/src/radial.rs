//! Uniform radial meshes, radially symmetric fields, and the finite-difference
//! stencils and quadrature every other module is built on.
//!
//! A radial function `f(|x|)` on `R^N` is sampled at `r_i = i h`, `i = 0..=n`.
//! Even symmetry at the origin is imposed through a ghost node `f_{-1} = f_1`,
//! and the outer node `r_n = rmax` carries the Dirichlet value.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    ZeroDimension,
    TooFewCells(usize),
    BadRadius(f64),
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::ZeroDimension => write!(f, "spatial dimension must be at least 1"),
            GridError::TooFewCells(n) => {
                write!(f, "grid needs at least {MIN_CELLS} cells, got {n}")
            }
            GridError::BadRadius(r) => write!(f, "truncation radius must be positive and finite, got {r}"),
        }
    }
}

impl core::error::Error for GridError {}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldError {
    Length { expected: usize, got: usize },
    NonFinite { index: usize },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::Length { expected, got } => {
                write!(f, "field has {got} values, grid has {expected} nodes")
            }
            FieldError::NonFinite { index } => write!(f, "non-finite field value at node {index}"),
        }
    }
}

impl core::error::Error for FieldError {}

/// Uniform mesh on `[0, rmax]` for radial functions on `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    rmax: f64,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, rmax: f64, n: usize) -> Result<Self, GridError> {
        if dim == 0 {
            return Err(GridError::ZeroDimension);
        }
        if n < MIN_CELLS {
            return Err(GridError::TooFewCells(n));
        }
        if !rmax.is_finite() || rmax <= 0.0 {
            return Err(GridError::BadRadius(rmax));
        }
        let h = rmax / n as f64;
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let weights = product_trapezoid_weights(dim, h, n);
        Ok(RadialGrid {
            dim,
            rmax,
            n,
            h,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    /// Number of cells; there are `n + 1` nodes.
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Quadrature weights including the sphere measure, so that
    /// `sum_i weights[i] * f_i` approximates the integral over the ball.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature weights for the ball of radius `r_k`: the same rule as
    /// [`weights`](Self::weights) restricted to the first `k` cells.
    pub fn ball_weights(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.n);
        let mut w = self.weights[..=k].to_vec();
        if k < self.n {
            let (left, _) = cell_hat_integrals(self.dim, self.h, k);
            w[k] -= self.sphere_measure() * left;
        }
        w
    }

    /// Surface measure of the unit sphere in `R^dim`.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    /// Index of the last node with `r_i <= radius` (rounding-tolerant).
    pub fn index_at_or_below(&self, radius: f64) -> usize {
        let x = radius / self.h;
        let i = libm::floor(x + 1e-9) as usize;
        i.min(self.n)
    }
}

/// `omega_{N-1} = 2 pi^{N/2} / Gamma(N/2)`.
pub fn sphere_measure(dim: usize) -> f64 {
    2.0 * math::powf(core::f64::consts::PI, dim as f64 / 2.0) / math::gamma_half(dim)
}

/// Weights of the piecewise-linear interpolant integrated exactly against
/// `omega r^{N-1}`.
fn product_trapezoid_weights(dim: usize, h: f64, n: usize) -> Vec<f64> {
    let omega = sphere_measure(dim);
    let mut w = alloc::vec![0.0; n + 1];
    for j in 0..n {
        let (left, right) = cell_hat_integrals(dim, h, j);
        w[j] += omega * left;
        w[j + 1] += omega * right;
    }
    w
}

/// `int r^{N-1} hat(r) dr` over cell `[r_j, r_{j+1}]` for the hats of its left
/// and right node. Every term in the binomial expansion is positive, so there
/// is no cancellation even for large `j`.
fn cell_hat_integrals(dim: usize, h: f64, j: usize) -> (f64, f64) {
    let m = dim - 1;
    let a = j as f64 * h;
    let mut left = 0.0;
    let mut right = 0.0;
    let mut binom = 1.0;
    let mut hk = 1.0;
    for k in 0..=m {
        let term = binom * math::powi(a, (m - k) as i32) * hk;
        let kf = k as f64;
        left += term / ((kf + 1.0) * (kf + 2.0));
        right += term / (kf + 2.0);
        binom = binom * (m - k) as f64 / (k + 1) as f64;
        hk *= h;
    }
    (h * left, h * right)
}

/// Radial samples of a function on a [`RadialGrid`]. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = alloc::vec![0.0; grid.len()];
        Field { grid, values }
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Self {
        let values = alloc::vec![c; grid.len()];
        Field { grid, values }
    }

    /// Samples `f(r)` at every node. Panics if `f` returns a non-finite value.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().iter().map(|&r| f(r)).collect();
        Field::new(grid, values).expect("sampled function must be finite")
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Field::new(self.grid.clone(), values).expect("mapped field must be finite")
    }

    pub fn scaled(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    pub fn radial_laplacian(&self) -> Field {
        let mut out = alloc::vec![0.0; self.values.len()];
        laplacian_into(&self.grid, &self.values, &mut out);
        Field::from_parts_unchecked(self.grid.clone(), out)
    }

    /// Derivative in `r` (central differences, zero at the origin).
    pub fn radial_derivative(&self) -> Field {
        let mut out = alloc::vec![0.0; self.values.len()];
        gradient_into(&self.grid, &self.values, &mut out);
        Field::from_parts_unchecked(self.grid.clone(), out)
    }

    pub fn gradient_sq(&self) -> Field {
        let mut d = self.radial_derivative();
        for v in d.values_mut() {
            *v *= *v;
        }
        d
    }

    pub fn integrate(&self) -> f64 {
        integrate_slice(&self.grid, &self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: f64 = self
            .grid
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v * v)
            .sum();
        math::sqrt(sq)
    }

    /// `int (f^2 + |f'|^2)`.
    pub fn h1_norm_sq(&self) -> f64 {
        let d = self.radial_derivative();
        self.grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(d.values()))
            .map(|(w, (f, g))| w * (f * f + g * g))
            .sum()
    }
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn integrate_slice(grid: &RadialGrid, values: &[f64]) -> f64 {
    grid.weights().iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Central-difference `f'' + (N-1)/r f'`. At the origin the regular limit
/// `N f''(0)` with the ghost node `f_{-1} = f_1`; at `rmax` one-sided
/// second-order stencils.
pub fn laplacian_into(grid: &RadialGrid, f: &[f64], out: &mut [f64]) {
    let n = grid.cells();
    let h = grid.h();
    let h2 = h * h;
    let nm1 = (grid.dim() - 1) as f64;
    out[0] = grid.dim() as f64 * 2.0 * (f[1] - f[0]) / h2;
    for i in 1..n {
        let r = i as f64 * h;
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2
            + nm1 / r * (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    let d2 = (2.0 * f[n] - 5.0 * f[n - 1] + 4.0 * f[n - 2] - f[n - 3]) / h2;
    let d1 = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h);
    out[n] = d2 + nm1 / grid.rmax() * d1;
}

pub fn gradient_into(grid: &RadialGrid, f: &[f64], out: &mut [f64]) {
    let n = grid.cells();
    let h = grid.h();
    out[0] = 0.0;
    for i in 1..n {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    out[n] = (3.0 * f[n] - 4.0 * f[n - 1] + f[n - 2]) / (2.0 * h);
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid(dim: usize, rmax: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, rmax, n).unwrap())
    }

    #[test]
    fn make_grid_examples() {
        let g = RadialGrid::new(1, 20.0, 2000).unwrap();
        assert!((g.h() - 0.01).abs() < 1e-15);
        let g = RadialGrid::new(2, 15.0, 1500).unwrap();
        assert!((g.r(750) - 7.5).abs() < 1e-12);
        assert_eq!(g.r(0), 0.0);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(RadialGrid::new(3, 10.0, 15), Err(GridError::TooFewCells(15)));
        assert_eq!(RadialGrid::new(0, 10.0, 100), Err(GridError::ZeroDimension));
        assert!(matches!(
            RadialGrid::new(2, f64::NAN, 100),
            Err(GridError::BadRadius(_))
        ));
        assert!(matches!(
            RadialGrid::new(2, f64::INFINITY, 100),
            Err(GridError::BadRadius(_))
        ));
    }

    #[test]
    fn field_rejects_bad_values() {
        let g = grid(1, 1.0, 16);
        assert!(matches!(
            Field::new(g.clone(), alloc::vec![0.0; 3]),
            Err(FieldError::Length { .. })
        ));
        let mut v = alloc::vec![0.0; 17];
        v[4] = f64::NAN;
        assert_eq!(Field::new(g, v), Err(FieldError::NonFinite { index: 4 }));
    }

    #[test]
    fn laplacian_of_constant_and_quadratics() {
        for dim in 1..=4 {
            let g = grid(dim, 5.0, 100);
            let c = Field::constant(g.clone(), 3.7).radial_laplacian();
            assert!(c.values()[..100].iter().all(|v| v.abs() < 1e-9));
            let q = Field::from_fn(g, |r| r * r).radial_laplacian();
            for v in q.values() {
                assert!((v - 2.0 * dim as f64).abs() < 1e-8, "dim {dim}: {v}");
            }
        }
    }

    #[test]
    fn gradient_examples() {
        let g = grid(2, 4.0, 400);
        assert!(Field::constant(g.clone(), 2.0)
            .gradient_sq()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-20));
        let lin = Field::from_fn(g.clone(), |r| r).gradient_sq();
        for v in &lin.values()[1..] {
            assert!((v - 1.0).abs() < 1e-10);
        }
        let s = Field::from_fn(g.clone(), math::sin).gradient_sq();
        let h = g.h();
        for (i, v) in s.values().iter().enumerate().skip(1) {
            let c = libm::cos(g.r(i));
            assert!((v - c * c).abs() < h * h, "node {i}");
        }
    }

    #[test]
    fn integrate_examples() {
        let disk = Field::constant(grid(2, 1.0, 100), 1.0).integrate();
        assert!((disk - PI).abs() < 1e-10);
        let line = Field::constant(grid(1, 5.0, 100), 1.0).integrate();
        assert!((line - 10.0).abs() < 1e-12);
        // O(h^2) quadrature: refine until the error is below 1e-6
        let gauss = Field::from_fn(grid(3, 8.0, 16000), |r| math::exp(-r * r)).integrate();
        assert!((gauss - PI.powf(1.5)).abs() < 1e-6, "{gauss}");
    }

    #[test]
    fn integrate_exact_on_constants() {
        for dim in 1..=6 {
            for &(rmax, n) in &[(1.0, 16), (15.0, 1500), (20.0, 4000)] {
                let g = grid(dim, rmax, n);
                let exact = sphere_measure(dim) * math::powi(rmax, dim as i32) / dim as f64;
                let got = Field::constant(g, 1.0).integrate();
                assert!(
                    (got - exact).abs() <= 1e-10 * math::powi(rmax, dim as i32),
                    "dim {dim} rmax {rmax}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn ball_weights_restrict_the_rule() {
        let g = grid(3, 10.0, 100);
        assert_eq!(g.ball_weights(100), g.weights().to_vec());
        let w = g.ball_weights(50);
        let vol: f64 = w.iter().sum();
        let exact = 4.0 / 3.0 * PI * 125.0;
        assert!((vol - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn norm_examples() {
        let g = grid(1, 5.0, 500);
        let z = Field::zeros(g.clone());
        assert_eq!((z.sup_norm(), z.l2_norm(), z.h1_norm_sq()), (0.0, 0.0, 0.0));
        let one = Field::constant(g, 1.0);
        assert_eq!(one.sup_norm(), 1.0);
        assert!((one.l2_norm() - 10f64.sqrt()).abs() < 1e-12);

        // f = e^{-r}: f^2 + f'^2 = 2 e^{-2r}, integral over both half-lines = 2.
        let g = grid(1, 30.0, 6000);
        let e = Field::from_fn(g, |r| math::exp(-r));
        let got = e.h1_norm_sq();
        // the even extension has a kink at the origin, which costs O(h)
        assert!((got - 2.0).abs() < 2.0 * 0.005, "{got}");
    }

    fn gaussian_errors(dim: usize, n: usize) -> (f64, f64) {
        let g = grid(dim, 6.0, n);
        let f = Field::from_fn(g.clone(), |r| math::exp(-r * r));
        let lap = f.radial_laplacian();
        let gsq = f.gradient_sq();
        let mut el = 0.0_f64;
        let mut eg = 0.0_f64;
        for i in 0..g.cells() {
            let r = g.r(i);
            let e = math::exp(-r * r);
            let exact_lap = (4.0 * r * r - 2.0 * dim as f64) * e;
            let exact_g = 4.0 * r * r * e * e;
            el = el.max((lap.values()[i] - exact_lap).abs());
            eg = eg.max((gsq.values()[i] - exact_g).abs());
        }
        (el, eg)
    }

    #[test]
    fn stencils_converge_at_second_order() {
        for dim in 1..=3 {
            let (l1, g1) = gaussian_errors(dim, 200);
            let (l2, g2) = gaussian_errors(dim, 400);
            let rl = l1 / l2;
            let rg = g1 / g2;
            assert!((3.5..=4.5).contains(&rl), "dim {dim} laplacian ratio {rl}");
            assert!((3.5..=4.5).contains(&rg), "dim {dim} gradient ratio {rg}");
        }
    }

    #[test]
    fn green_compatibility() {
        for dim in 1..=3 {
            for &n in &[200, 400, 800] {
                let g = grid(dim, 8.0, n);
                let f = Field::from_fn(g.clone(), |r| math::exp(-r * r) * (64.0 - r * r));
                let q = Field::from_fn(g.clone(), |r| math::exp(-0.5 * r * r) * (64.0 - r * r));
                let lf = f.radial_laplacian();
                let lq = q.radial_laplacian();
                let a: f64 = integrate_slice(
                    &g,
                    &q.values().iter().zip(lf.values()).map(|(x, y)| x * y).collect::<Vec<_>>(),
                );
                let b: f64 = integrate_slice(
                    &g,
                    &f.values().iter().zip(lq.values()).map(|(x, y)| x * y).collect::<Vec<_>>(),
                );
                let d = (a - b).abs() / a.abs();
                assert!(d <= g.h(), "dim {dim} n {n}: {d}");
            }
        }
    }
}
