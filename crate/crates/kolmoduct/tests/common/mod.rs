//! Shared oracles for integration tests: pointwise evaluation on a periodic
//! tensor grid, quadrature projection back to the mode lattice, and dense
//! linear-algebra references. Everything here is deliberately independent of
//! the spectral operators under test — fields are expanded mode by mode in
//! physical space and recombined pointwise.
#![allow(dead_code)]

use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::spectral::SpectralField;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Uniform grid over one streamwise period and one *full* wall-normal period
/// `[0, 4 N pi)`, so trapezoid sums are spectrally exact for trig
/// polynomials. The physical duct is the lower half; every basis mode is
/// `4 N pi`-periodic and odd about the walls, so nothing is lost.
pub struct TorusGrid {
    pub geom: GeometryParams,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl TorusGrid {
    pub fn new(geom: GeometryParams, nx: usize, ny: usize) -> Self {
        let period = 2.0 * std::f64::consts::PI / geom.kx;
        let y_period = 4.0 * f64::from(geom.n_walls) * std::f64::consts::PI;
        TorusGrid {
            geom,
            xs: (0..nx).map(|j| period * j as f64 / nx as f64).collect(),
            ys: (0..ny).map(|k| y_period * k as f64 / ny as f64).collect(),
        }
    }

    /// Evaluate `(d/dx)^p (Lap)^q f` (and optionally one `d/dy`) pointwise.
    /// `dy` applies a single y-derivative after the Laplacians.
    pub fn eval_derivative(
        &self,
        f: &SpectralField,
        dx_order: u32,
        lap_order: u32,
        dy: bool,
    ) -> Vec<Complex64> {
        let denom = f64::from(self.geom.denom());
        let kx = self.geom.kx;
        let nx = self.xs.len();
        let ny = self.ys.len();
        let mut out = vec![ZERO; nx * ny];
        for (m, c, a) in f.iter() {
            if a == ZERO {
                continue;
            }
            let kappa = f64::from(c) / denom;
            let beta = (m as f64 * kx) * (m as f64 * kx) + kappa * kappa;
            let factor = a
                * Complex64::new(0.0, m as f64 * kx).powu(dx_order)
                * Complex64::new(-beta, 0.0).powu(lap_order);
            for (k, &y) in self.ys.iter().enumerate() {
                let yfac = if dy {
                    kappa * (kappa * y).cos()
                } else {
                    (kappa * y).sin()
                };
                if yfac == 0.0 {
                    continue;
                }
                let row = factor * yfac;
                for (j, &x) in self.xs.iter().enumerate() {
                    out[k * nx + j] += row * Complex64::from_polar(1.0, m as f64 * kx * x);
                }
            }
        }
        out
    }

    pub fn eval(&self, f: &SpectralField) -> Vec<Complex64> {
        self.eval_derivative(f, 0, 0, false)
    }

    /// Quadrature projection of pointwise values back onto the lattice.
    pub fn project(&self, values: &[Complex64], mx_max: i64, c_max: u32) -> SpectralField {
        let nx = self.xs.len();
        let ny = self.ys.len();
        let denom = f64::from(self.geom.denom());
        let kx = self.geom.kx;
        let mut out = SpectralField::zeros(self.geom, mx_max, c_max);
        for m in -mx_max..=mx_max {
            // x-DFT at this harmonic
            let mut xrow = vec![ZERO; ny];
            for (k, slot) in xrow.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (j, &x) in self.xs.iter().enumerate() {
                    acc += values[k * nx + j] * Complex64::from_polar(1.0, -(m as f64) * kx * x);
                }
                *slot = acc / nx as f64;
            }
            for c in 1..=c_max {
                let kappa = f64::from(c) / denom;
                let mut acc = ZERO;
                for (k, &y) in self.ys.iter().enumerate() {
                    acc += xrow[k] * (kappa * y).sin();
                }
                // <sin^2> over the full period is 1/2.
                out.set(m, c, acc * 2.0 / ny as f64);
            }
        }
        out
    }

    /// Pointwise advection bracket built from analytic per-mode derivatives.
    pub fn advection_pointwise(&self, f: &SpectralField, g: &SpectralField) -> Vec<Complex64> {
        let fx = self.eval_derivative(f, 1, 0, false);
        let fy = self.eval_derivative(f, 0, 0, true);
        let g_lap_y = self.eval_derivative(g, 0, 1, true);
        let g_lap_x = self.eval_derivative(g, 1, 1, false);
        fx.iter()
            .zip(&fy)
            .zip(g_lap_y.iter().zip(&g_lap_x))
            .map(|((fx, fy), (gy, gx))| fx * gy - fy * gx)
            .collect()
    }

    /// Pointwise action of the linearized operator about the basic flow.
    pub fn linear_pointwise(&self, phys: &PhysicalParams, f: &SpectralField) -> Vec<Complex64> {
        let lap = self.eval_derivative(f, 0, 1, false);
        let bilap = self.eval_derivative(f, 0, 2, false);
        let dx = self.eval_derivative(f, 1, 0, false);
        let lap_dx = self.eval_derivative(f, 1, 1, false);
        let nx = self.xs.len();
        let mut out = vec![ZERO; nx * self.ys.len()];
        for (k, &y) in self.ys.iter().enumerate() {
            let cosy = y.cos();
            for j in 0..nx {
                let i = k * nx + j;
                out[i] = -phys.lambda / phys.reynolds * lap[i] + bilap[i] / phys.reynolds
                    - cosy / (1.0 + phys.lambda) * (lap_dx[i] + dx[i]);
            }
        }
        out
    }
}

/// Random real field with coefficients decaying away from the lowest modes.
pub fn random_real_field(
    geom: GeometryParams,
    mx_max: i64,
    c_max: u32,
    scale: f64,
    seed: u64,
) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(geom, mx_max, c_max);
    for m in -mx_max..=mx_max {
        for c in 1..=c_max {
            let damp = scale / (1.0 + f64::from(c) + m.unsigned_abs() as f64);
            f.set(
                m,
                c,
                Complex64::new(
                    rng.gen_range(-1.0..1.0) * damp,
                    rng.gen_range(-1.0..1.0) * damp,
                ),
            );
        }
    }
    f.hermitize();
    f
}

/// Dense solve of `apply_linear_truncated` restricted to one streamwise
/// block, as an independent reference for the chain solver.
pub fn dense_block_solve(
    phys: &PhysicalParams,
    geom: GeometryParams,
    m: i64,
    rhs: &[Complex64],
) -> Vec<Complex64> {
    use kolmoduct::spectral::{apply_linear_truncated, SpectralField};
    let c_max = rhs.len() as u32;
    let n = rhs.len();
    let mut a = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for col in 0..n {
        let unit = SpectralField::single_mode(
            geom,
            m.abs().max(1),
            c_max,
            m,
            col as u32 + 1,
            Complex64::new(1.0, 0.0),
        );
        let image = apply_linear_truncated(phys, &unit);
        for (row, slot) in a.column_mut(col).iter_mut().enumerate() {
            *slot = image.get(m, row as u32 + 1);
        }
    }
    let b = nalgebra::DVector::<Complex64>::from_column_slice(rhs);
    let solved = a.lu().solve(&b).expect("dense block solve failed");
    solved.iter().copied().collect()
}

pub fn max_coeff_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let mut worst = 0.0_f64;
    for (m, c, v) in a.iter() {
        worst = worst.max((v - b.get(m, c)).norm());
    }
    for (m, c, v) in b.iter() {
        worst = worst.max((v - a.get(m, c)).norm());
    }
    worst
}
