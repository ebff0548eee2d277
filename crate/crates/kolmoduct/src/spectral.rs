//! Galerkin representation on the `(m, c)` mode lattice and the exact
//! spectral operators: Laplacian, bilinear advection, inner products, the
//! linearized operator about the basic flow, and its blockwise inverse.
//!
//! Products of basis functions are folded with the two identities
//! `sin a cos b = (sin(a+b) + sin(a-b))/2` and `sin(-a) = -sin a`, so both
//! nonlinear and linear couplings stay on the integer `c` lattice with no
//! aliasing; the operators below are exact Galerkin projections, not
//! pseudo-spectral approximations.

use crate::domain::{GeometryParams, PhysicalParams};
use crate::linstab::EigenSolution;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("fields live on different geometries")]
    GeometryMismatch,
    #[error("block m = {m} is singular or near-singular (condition estimate {condition:.3e})")]
    SingularBlock { m: i64, condition: f64 },
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Complex Galerkin coefficients `a_{m,c}` on modes
/// `e^{i m kx x} sin(c y / (2N))` for `|m| <= mx_max`, `1 <= c <= c_max`.
///
/// A field representing a real stream function satisfies
/// `a_{-m,c} = conj(a_{m,c})`; intermediate complex fields (the complex
/// eigenfunction, centre-manifold blocks) are stored in the same container
/// without that constraint. Use [`SpectralField::hermitize`] to re-impose it
/// after mutations that must stay real.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    geom: GeometryParams,
    mx_max: i64,
    c_max: u32,
    coeff: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(geom: GeometryParams, mx_max: i64, c_max: u32) -> Self {
        assert!(mx_max >= 0 && c_max >= 1);
        let rows = (2 * mx_max + 1) as usize;
        Self {
            geom,
            mx_max,
            c_max,
            coeff: vec![ZERO; rows * c_max as usize],
        }
    }

    /// The friction-modified basic flow `sin y / (1 + lambda)`.
    pub fn basic_flow(geom: GeometryParams, lambda: f64, mx_max: i64, c_max: u32) -> Self {
        let mut f = Self::zeros(geom, mx_max, c_max);
        f.set(0, geom.denom(), Complex64::new(1.0 / (1.0 + lambda), 0.0));
        f
    }

    /// A single unit mode; `m = 0` modes are real by construction.
    pub fn single_mode(
        geom: GeometryParams,
        mx_max: i64,
        c_max: u32,
        m: i64,
        c: u32,
        amp: Complex64,
    ) -> Self {
        let mut f = Self::zeros(geom, mx_max, c_max);
        f.set(m, c, amp);
        f
    }

    pub fn geom(&self) -> &GeometryParams {
        &self.geom
    }

    pub fn mx_max(&self) -> i64 {
        self.mx_max
    }

    pub fn c_max(&self) -> u32 {
        self.c_max
    }

    #[inline]
    fn idx(&self, m: i64, c: u32) -> usize {
        debug_assert!(m.abs() <= self.mx_max && (1..=self.c_max).contains(&c));
        (m + self.mx_max) as usize * self.c_max as usize + (c - 1) as usize
    }

    /// Coefficient at `(m, c)`; zero outside the lattice.
    #[inline]
    pub fn get(&self, m: i64, c: u32) -> Complex64 {
        if m.abs() > self.mx_max || c == 0 || c > self.c_max {
            ZERO
        } else {
            self.coeff[self.idx(m, c)]
        }
    }

    #[inline]
    pub fn set(&mut self, m: i64, c: u32, v: Complex64) {
        let i = self.idx(m, c);
        self.coeff[i] = v;
    }

    #[inline]
    pub fn add_at(&mut self, m: i64, c: u32, v: Complex64) {
        let i = self.idx(m, c);
        self.coeff[i] += v;
    }

    pub fn row(&self, m: i64) -> &[Complex64] {
        let start = (m + self.mx_max) as usize * self.c_max as usize;
        &self.coeff[start..start + self.c_max as usize]
    }

    fn row_mut(&mut self, m: i64) -> &mut [Complex64] {
        let start = (m + self.mx_max) as usize * self.c_max as usize;
        &mut self.coeff[start..start + self.c_max as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u32, Complex64)> + '_ {
        let c_max = self.c_max;
        let mx = self.mx_max;
        self.coeff.iter().enumerate().map(move |(i, &v)| {
            let m = (i / c_max as usize) as i64 - mx;
            let c = (i % c_max as usize) as u32 + 1;
            (m, c, v)
        })
    }

    pub fn scale(&mut self, w: Complex64) {
        for v in &mut self.coeff {
            *v *= w;
        }
    }

    pub fn scaled(&self, w: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(w);
        out
    }

    /// Adds `w * other`; `other` must fit inside this lattice.
    pub fn add_scaled(&mut self, other: &Self, w: Complex64) {
        assert_eq!(self.geom, other.geom, "lattice geometry mismatch");
        assert!(other.mx_max <= self.mx_max && other.c_max <= self.c_max);
        let c_self = self.c_max as usize;
        let c_other = other.c_max as usize;
        for m in -other.mx_max..=other.mx_max {
            let start = (m + self.mx_max) as usize * c_self;
            let dst = &mut self.coeff[start..start + c_other];
            for (d, s) in dst.iter_mut().zip(other.row(m)) {
                *d += w * s;
            }
        }
    }

    /// Copy into a (usually larger) lattice.
    pub fn embedded(&self, mx_max: i64, c_max: u32) -> Self {
        let mut out = Self::zeros(self.geom, mx_max.max(self.mx_max), c_max.max(self.c_max));
        out.add_scaled(self, Complex64::new(1.0, 0.0));
        out
    }

    /// Drop coefficients outside the requested lattice.
    pub fn truncated(&self, mx_max: i64, c_max: u32) -> Self {
        let mut out = Self::zeros(self.geom, mx_max, c_max);
        let mxi = mx_max.min(self.mx_max);
        for m in -mxi..=mxi {
            let n = c_max.min(self.c_max) as usize;
            let dst_start = (m + mx_max) as usize * c_max as usize;
            let src = &self.row(m)[..n];
            out.coeff[dst_start..dst_start + n].copy_from_slice(src);
        }
        out
    }

    /// Field of the complex conjugate function: `a'_{m,c} = conj(a_{-m,c})`.
    pub fn conj_field(&self) -> Self {
        let mut out = Self::zeros(self.geom, self.mx_max, self.c_max);
        for m in -self.mx_max..=self.mx_max {
            let src = self.row(-m).to_vec();
            let dst = out.row_mut(m);
            for (d, s) in dst.iter_mut().zip(&src) {
                *d = s.conj();
            }
        }
        out
    }

    /// Real part of the represented function, as a field.
    pub fn real_part(&self) -> Self {
        let mut out = self.conj_field();
        out.add_scaled(self, Complex64::new(1.0, 0.0));
        out.scale(Complex64::new(0.5, 0.0));
        out
    }

    /// Imaginary part of the represented function, as a field.
    pub fn imag_part(&self) -> Self {
        let mut out = self.conj_field();
        out.scale(Complex64::new(-1.0, 0.0));
        out.add_scaled(self, Complex64::new(1.0, 0.0));
        out.scale(Complex64::new(0.0, -0.5));
        out
    }

    /// Re-impose the reality condition `a_{-m,c} = conj(a_{m,c})`.
    pub fn hermitize(&mut self) {
        for m in 1..=self.mx_max {
            for c in 1..=self.c_max {
                let avg = 0.5 * (self.get(m, c) + self.get(-m, c).conj());
                self.set(m, c, avg);
                self.set(-m, c, avg.conj());
            }
        }
        for v in self.row_mut(0) {
            *v = Complex64::new(v.re, 0.0);
        }
    }

    /// Max deviation from the reality condition, relative to the largest
    /// coefficient.
    pub fn reality_defect(&self) -> f64 {
        let scale = self
            .coeff
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.norm()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for m in 0..=self.mx_max {
            for c in 1..=self.c_max {
                worst = worst.max((self.get(m, c) - self.get(-m, c).conj()).norm());
            }
        }
        worst / scale
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeff.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// L2 norm of the represented function (includes the domain measure).
    pub fn norm_l2(&self) -> f64 {
        inner_measure(&self.geom).sqrt() * self.coeff_norm()
    }

    /// Norm of the coefficients in one streamwise block.
    pub fn block_coeff_norm(&self, m: i64) -> f64 {
        if m.abs() > self.mx_max {
            return 0.0;
        }
        self.row(m).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The field translated in x by `delta`: coefficients pick up
    /// `e^{i m kx delta}`.
    pub fn shifted_x(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for m in -self.mx_max..=self.mx_max {
            let phase = Complex64::from_polar(1.0, m as f64 * self.geom.kx * delta);
            for v in out.row_mut(m) {
                *v *= phase;
            }
        }
        out
    }

    /// Pointwise evaluation of the real part at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let denom = f64::from(self.geom.denom());
        let mut total = ZERO;
        for m in -self.mx_max..=self.mx_max {
            let mut ysum = ZERO;
            for (ci, &a) in self.row(m).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                ysum += a * ((ci + 1) as f64 / denom * y).sin();
            }
            total += ysum * Complex64::from_polar(1.0, m as f64 * self.geom.kx * x);
        }
        total.re
    }
}

/// Measure factor of the basis inner product: `<mode, mode> = 2 N pi^2 / kx`.
pub fn inner_measure(geom: &GeometryParams) -> f64 {
    2.0 * f64::from(geom.n_walls) * std::f64::consts::PI * std::f64::consts::PI / geom.kx
}

/// Inner product `<f, g> = integral of f * conj(g)` over one period.
pub fn inner(f: &SpectralField, g: &SpectralField) -> Complex64 {
    assert_eq!(f.geom, g.geom, "lattice geometry mismatch");
    let mx = f.mx_max.min(g.mx_max);
    let cm = f.c_max.min(g.c_max) as usize;
    let mut sum = ZERO;
    for m in -mx..=mx {
        for (a, b) in f.row(m)[..cm].iter().zip(&g.row(m)[..cm]) {
            sum += a * b.conj();
        }
    }
    sum * inner_measure(&f.geom)
}

/// Coefficient-wise multiply by `-beta(m, c)`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    let denom = f64::from(f.geom.denom());
    let kx = f.geom.kx;
    for m in -f.mx_max..=f.mx_max {
        let mk2 = (m as f64 * kx) * (m as f64 * kx);
        for (ci, v) in out.row_mut(m).iter_mut().enumerate() {
            let kappa = (ci + 1) as f64 / denom;
            *v *= -(mk2 + kappa * kappa);
        }
    }
    out
}

fn advect_into(f: &SpectralField, g: &SpectralField, out: &mut SpectralField) {
    let geom = f.geom;
    let kx = geom.kx;
    let denom = f64::from(geom.denom());
    let c_out = out.c_max as usize;
    let out_mx = out.mx_max;
    let kappa: Vec<f64> = (1..=f.c_max.max(g.c_max))
        .map(|c| f64::from(c) / denom)
        .collect();

    for m2 in -g.mx_max..=g.mx_max {
        let row_g = g.row(m2);
        let m2f = m2 as f64;
        let mk2 = m2f * kx * m2f * kx;
        for m1 in -f.mx_max..=f.mx_max {
            let m_out = m1 + m2;
            if m_out.abs() > out_mx {
                continue;
            }
            let m1f = m1 as f64;
            let row_f = f.row(m1);
            let start = (m_out + out_mx) as usize * c_out;
            let dst = &mut out.coeff[start..start + c_out];
            for (c2i, &b) in row_g.iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                let k2 = kappa[c2i];
                let beta2 = mk2 + k2 * k2;
                // i kx beta(m2,c2) * b
                let w = Complex64::new(0.0, kx * beta2) * b;
                let c2 = c2i + 1;
                for (c1i, &a) in row_f.iter().enumerate() {
                    if a == ZERO {
                        continue;
                    }
                    let k1 = kappa[c1i];
                    let amp = w * a;
                    let c1 = c1i + 1;
                    let sum_c = c1 + c2;
                    if sum_c <= c_out {
                        dst[sum_c - 1] += amp * (0.5 * (m2f * k1 - m1f * k2));
                    }
                    let d_factor = 0.5 * (m2f * k1 + m1f * k2);
                    if c1 > c2 {
                        let t = c1 - c2;
                        if t <= c_out {
                            dst[t - 1] -= amp * d_factor;
                        }
                    } else if c2 > c1 {
                        let t = c2 - c1;
                        if t <= c_out {
                            dst[t - 1] += amp * d_factor;
                        }
                    }
                }
            }
        }
    }
}

/// Exact Galerkin projection of the advection bracket
/// `N(f, g) = dx f * dy(Lap g) - dy f * dx(Lap g)` onto a lattice wide enough
/// to hold every generated mode (pure convolution, no truncation).
pub fn advection(f: &SpectralField, g: &SpectralField) -> SpectralField {
    assert_eq!(f.geom, g.geom, "lattice geometry mismatch");
    let mut out = SpectralField::zeros(f.geom, f.mx_max + g.mx_max, f.c_max + g.c_max);
    advect_into(f, g, &mut out);
    out
}

/// Advection with the output truncated to the requested lattice.
pub fn advection_truncated(
    f: &SpectralField,
    g: &SpectralField,
    mx_max: i64,
    c_max: u32,
) -> SpectralField {
    assert_eq!(f.geom, g.geom, "lattice geometry mismatch");
    let mut out = SpectralField::zeros(f.geom, mx_max, c_max);
    advect_into(f, g, &mut out);
    out
}

/// Coupling constant of the `cos y (Lap + 1) dx` term: a source mode `(m, c)`
/// feeds `(m, c + 2N)` and `(m, c - 2N)` with `+k` (sign flipped when the
/// lower target folds through zero, dropped when `c = 2N`).
#[inline]
fn linear_coupling(phys: &PhysicalParams, geom: &GeometryParams, m: i64, c: u32) -> Complex64 {
    let beta = geom.beta(m, c);
    Complex64::new(
        0.0,
        m as f64 * geom.kx * (beta - 1.0) / (2.0 * (1.0 + phys.lambda)),
    )
}

fn apply_linear_into(phys: &PhysicalParams, f: &SpectralField, out: &mut SpectralField) {
    let geom = f.geom;
    let denom = geom.denom();
    for m in -f.mx_max..=f.mx_max {
        if m.abs() > out.mx_max {
            continue;
        }
        for ci in 0..f.c_max {
            let a = f.row(m)[ci as usize];
            if a == ZERO {
                continue;
            }
            let c = ci + 1;
            let beta = geom.beta(m, c);
            if c <= out.c_max {
                out.add_at(m, c, beta * (beta + phys.lambda) / phys.reynolds * a);
            }
            if m == 0 {
                continue;
            }
            let k = linear_coupling(phys, &geom, m, c) * a;
            if c + denom <= out.c_max {
                out.add_at(m, c + denom, k);
            }
            match c.cmp(&denom) {
                std::cmp::Ordering::Greater => {
                    if c - denom <= out.c_max {
                        out.add_at(m, c - denom, k);
                    }
                }
                std::cmp::Ordering::Less => {
                    if denom - c <= out.c_max {
                        out.add_at(m, denom - c, -k);
                    }
                }
                std::cmp::Ordering::Equal => {}
            }
        }
    }
}

/// The linearized operator about the basic flow, on a lattice widened by one
/// coupling stride so no generated mode is dropped.
pub fn apply_linear(phys: &PhysicalParams, f: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(f.geom, f.mx_max, f.c_max + f.geom.denom());
    apply_linear_into(phys, f, &mut out);
    out
}

/// The linearized operator projected back onto the lattice of `f` (this is
/// the operator that [`solve_blocks`] inverts).
pub fn apply_linear_truncated(phys: &PhysicalParams, f: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(f.geom, f.mx_max, f.c_max);
    apply_linear_into(phys, f, &mut out);
    out
}

/// Wall-normal index chains of one streamwise block. Within fixed `m` the
/// `c +- 2N` couplings split the lattice into independent chains; residues
/// `r` and `2N - r` join at the bottom through the sine fold, residue `N`
/// folds onto itself, and residue `2N` loses its bottom coupling.
fn coupling_chains(denom: u32, c_max: u32) -> Vec<Vec<u32>> {
    let mut chains = Vec::new();
    let mut visited = vec![false; denom as usize + 1];
    for r in 1..=denom {
        if visited[r as usize] {
            continue;
        }
        visited[r as usize] = true;
        let partner = denom - r;
        let mut chain: Vec<u32> = Vec::new();
        if partner != 0 && partner != r {
            visited[partner as usize] = true;
            let hi = r.max(partner);
            let lo = r.min(partner);
            let mut upper: Vec<u32> = (hi..=c_max).step_by(denom as usize).collect();
            upper.reverse();
            chain.extend(upper);
            chain.extend((lo..=c_max).step_by(denom as usize));
        } else {
            chain.extend((r..=c_max).step_by(denom as usize));
        }
        if !chain.is_empty() {
            chains.push(chain);
        }
    }
    chains
}

/// Complex tridiagonal solve with partial pivoting (LU with one fill-in
/// superdiagonal), applied to several right-hand sides at once. Returns
/// `None` on an exactly singular pivot.
fn tridiag_solve(
    dl: &mut [Complex64],
    d: &mut [Complex64],
    du: &mut [Complex64],
    rhs: &mut [&mut [Complex64]],
) -> Option<()> {
    let n = d.len();
    let mut du2 = vec![ZERO; n.saturating_sub(2)];
    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            if d[i] == ZERO {
                return None;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            for b in rhs.iter_mut() {
                let bi = b[i];
                b[i + 1] -= fact * bi;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            du[i] = temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            for b in rhs.iter_mut() {
                b.swap(i, i + 1);
                let bi = b[i];
                b[i + 1] -= fact * bi;
            }
        }
    }
    if d[n - 1] == ZERO {
        return None;
    }
    for b in rhs.iter_mut() {
        b[n - 1] /= d[n - 1];
        if n >= 2 {
            let t = b[n - 2] - du[n - 2] * b[n - 1];
            b[n - 2] = t / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            let t = b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2];
            b[i] = t / d[i];
        }
    }
    Some(())
}

/// Condition estimate above which a block is reported singular.
const BLOCK_CONDITION_CAP: f64 = 1e12;

/// Solves `L x = rhs` on the listed streamwise blocks; all other blocks of
/// the result are zero.
///
/// Conditioning is estimated per chain by pushing a generic probe vector
/// through the same factorization (one inverse-power step); a chain whose
/// estimated condition number exceeds `1e12` fails naming the block.
pub fn solve_blocks(
    phys: &PhysicalParams,
    rhs: &SpectralField,
    blocks: &[i64],
) -> Result<SpectralField, SpectralError> {
    let geom = rhs.geom;
    let denom = geom.denom();
    let mut out = SpectralField::zeros(geom, rhs.mx_max, rhs.c_max);
    let chains = coupling_chains(denom, rhs.c_max);
    for &m in blocks {
        assert!(m.abs() <= rhs.mx_max, "block m = {m} outside the lattice");
        for chain in &chains {
            let n = chain.len();
            let mut diag: Vec<Complex64> = chain
                .iter()
                .map(|&c| {
                    let beta = geom.beta(m, c);
                    Complex64::new(beta * (beta + phys.lambda) / phys.reynolds, 0.0)
                })
                .collect();
            // Self-fold of the middle residue: source c = N maps back onto
            // itself with flipped sign.
            if m != 0 {
                for (i, &c) in chain.iter().enumerate() {
                    if 2 * c == denom {
                        diag[i] -= linear_coupling(phys, &geom, m, c);
                    }
                }
            }
            let entry = |target: u32, source: u32| -> Complex64 {
                if m == 0 {
                    return ZERO;
                }
                let k = linear_coupling(phys, &geom, m, source);
                if target == source + denom || source == target + denom {
                    k
                } else {
                    debug_assert_eq!(target + source, denom);
                    -k
                }
            };
            let scale = chain
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    diag[i].norm().max(if m == 0 {
                        0.0
                    } else {
                        linear_coupling(phys, &geom, m, c).norm()
                    })
                })
                .fold(f64::MIN_POSITIVE, f64::max);
            let mut sub: Vec<Complex64> = (1..n).map(|i| entry(chain[i], chain[i - 1])).collect();
            let mut sup: Vec<Complex64> = (1..n).map(|i| entry(chain[i - 1], chain[i])).collect();
            let mut b: Vec<Complex64> = chain.iter().map(|&c| rhs.get(m, c)).collect();
            let mut probe: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.31))
                .collect();
            let probe_norm = (probe.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
            let solved = tridiag_solve(&mut sub, &mut diag, &mut sup, &mut [&mut b, &mut probe]);
            if solved.is_none() {
                return Err(SpectralError::SingularBlock {
                    m,
                    condition: f64::INFINITY,
                });
            }
            let growth = (probe.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt() / probe_norm;
            let condition = growth * scale;
            if condition > BLOCK_CONDITION_CAP {
                return Err(SpectralError::SingularBlock { m, condition });
            }
            for (&c, &v) in chain.iter().zip(&b) {
                out.set(m, c, v);
            }
        }
    }
    Ok(out)
}

/// The eigenfunction, conjugate eigenfunction, and their real/imaginary
/// parts, mapped from coefficient space onto the lattice.
#[derive(Debug, Clone)]
pub struct EigenFields {
    /// Complex eigenfunction (lives in the m = +1 block).
    pub psi: SpectralField,
    /// Complex conjugate-problem eigenfunction, unit coefficient scale.
    pub psi_star: SpectralField,
    pub psi1: SpectralField,
    pub psi2: SpectralField,
    pub psi1_star: SpectralField,
    pub psi2_star: SpectralField,
}

impl EigenFields {
    /// `psi_theta = cos(theta) psi1 - sin(theta) psi2`: equals `psi1`
    /// translated by `x -> x + theta / kx`.
    pub fn psi_theta(&self, theta: f64) -> SpectralField {
        let mut out = self.psi1.scaled(Complex64::new(theta.cos(), 0.0));
        out.add_scaled(&self.psi2, Complex64::new(-theta.sin(), 0.0));
        out
    }
}

/// Builds the eigen/conjugate fields from the coefficient solution. The
/// wall-normal extent grows as needed to hold the whole coefficient chain.
pub fn eigenfields(eig: &EigenSolution, mx_max: i64, c_max: u32) -> EigenFields {
    let geom = eig.geom;
    let needed = geom.denom() * eig.depth as u32 + geom.j_mode;
    let c_max = c_max.max(needed);
    let mx_max = mx_max.max(1);
    let mut psi = SpectralField::zeros(geom, mx_max, c_max);
    let mut psi_star = SpectralField::zeros(geom, mx_max, c_max);
    for n in -eig.half_width()..=eig.half_width() {
        let (mode, sign, quarter_turn) = geom.eigen_to_lattice(n);
        let phase = Complex64::i().powu(u32::from(quarter_turn)) * sign;
        psi.add_at(mode.m, mode.c, phase * eig.phi(n));
        psi_star.add_at(mode.m, mode.c, phase * eig.phi_star(n));
    }
    EigenFields {
        psi1: psi.real_part(),
        psi2: psi.imag_part(),
        psi1_star: psi_star.real_part(),
        psi2_star: psi_star.imag_part(),
        psi,
        psi_star,
    }
}

/// Real-part samples of a field on a tensor grid; `y` spans the duct.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
}

pub fn sample_grid(f: &SpectralField, nx: usize, ny: usize, x_range: (f64, f64)) -> FieldGrid {
    assert!(nx >= 2 && ny >= 2);
    let geom = f.geom;
    let denom = f64::from(geom.denom());
    let y_top = 2.0 * f64::from(geom.n_walls) * std::f64::consts::PI;
    let xs: Vec<f64> = (0..nx)
        .map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (nx - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..ny)
        .map(|i| y_top * i as f64 / (ny - 1) as f64)
        .collect();
    let mut values = vec![0.0; nx * ny];
    let mut ysum = vec![ZERO; (2 * f.mx_max + 1) as usize];
    for (iy, &y) in ys.iter().enumerate() {
        for (mi, s) in ysum.iter_mut().enumerate() {
            let m = mi as i64 - f.mx_max;
            let mut acc = ZERO;
            for (ci, &a) in f.row(m).iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                acc += a * ((ci + 1) as f64 / denom * y).sin();
            }
            *s = acc;
        }
        for (ix, &x) in xs.iter().enumerate() {
            let mut total = ZERO;
            for (mi, &s) in ysum.iter().enumerate() {
                let m = mi as i64 - f.mx_max;
                total += s * Complex64::from_polar(1.0, m as f64 * geom.kx * x);
            }
            values[iy * nx + ix] = total.re;
        }
    }
    FieldGrid { xs, ys, values }
}
