//! Real spectral problem of the basic flow: continued-fraction dispersion
//! relation, the eigenvalue curve `sigma(R)`, critical Reynolds numbers,
//! eigenfunction and conjugate-eigenfunction coefficients, plus an independent
//! tridiagonal-determinant oracle over the same three-term recurrence.
//!
//! All root finding happens in the shifted variable `s = sigma + lambda +
//! beta_0 > 0` ("spectral excess"). The dispersion relation degenerates to
//! `s -> 0` as `R -> 0` like `R^2`, and carrying `s` instead of `sigma`
//! avoids the catastrophic cancellation that would otherwise cap the
//! attainable accuracy there. `sigma` itself is reported alongside.

use crate::domain::{Admissibility, DomainError, GeometryParams, PhysicalParams};
use thiserror::Error;

/// Relative tolerance for continued-fraction depth doubling.
pub const CF_TOL: f64 = 1e-13;
/// Tolerance on the dispersion residual at an accepted root.
pub const ROOT_TOL: f64 = 1e-11;
/// Coefficient decay cutoff relative to `max |phi_n|`.
pub const PHI_DECAY_TOL: f64 = 1e-14;
/// Hard cap on the stored eigenfunction half-width.
pub const PHI_HALF_WIDTH_CAP: usize = 128;

const CF_DEPTH_MIN: usize = PHI_HALF_WIDTH_CAP + 32;
const CF_DEPTH_MAX: usize = 1 << 21;
const SIGMA_HI_CAP: f64 = 1e6;
const REYNOLDS_CAP: f64 = 1e9;
const EXCESS_FLOOR: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum LinstabError {
    #[error("continued fraction did not converge by depth {depth}: heads ({prev_plus}, {prev_minus}) vs ({head_plus}, {head_minus})")]
    CfNoConvergence {
        depth: usize,
        prev_plus: f64,
        prev_minus: f64,
        head_plus: f64,
        head_minus: f64,
    },
    #[error("sigma = {sigma} outside the allowed range sigma > {lower}")]
    SigmaOutOfRange { sigma: f64, lower: f64 },
    #[error("no sign change found while bracketing {context}; last value {last}")]
    NoBracket { context: &'static str, last: f64 },
    #[error("dispersion residual {residual} at sigma = {sigma} above tolerance")]
    ResidualNotMet { sigma: f64, residual: f64 },
    #[error("geometry outside the instability window: {0}")]
    NotAdmissible(Admissibility),
    #[error("determinant scan found no sign change at half-width {half_width}")]
    NoSignChange { half_width: usize },
    #[error("determinant half-width must be >= 8, got {0}")]
    HalfWidthTooSmall(usize),
    #[error("determinant root did not stabilise under half-width doubling (cap {cap})")]
    OracleNoConvergence { cap: usize },
    #[error("wavenumber grid must be sorted ascending")]
    UnsortedGrid,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Values of the one-sided continued fractions `gamma_{+n}`, `gamma_{-n}`.
#[derive(Debug, Clone)]
pub struct ContinuedFractionEval {
    /// `gamma_plus[n-1]` is `gamma_{+n}`.
    pub gamma_plus: Vec<f64>,
    /// `gamma_minus[n-1]` is `gamma_{-n}`.
    pub gamma_minus: Vec<f64>,
    pub depth_used: usize,
    pub converged: bool,
}

/// Partial denominator of the descending fraction:
/// `D_{side*n} = 2 (1+lambda) beta_n (s + (beta_n - beta_0)) / (R kx (beta_n - 1))`.
pub(crate) fn partial_denominator(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
    n: i64,
) -> f64 {
    let beta = geom.beta_eigen(n);
    let gap = geom.beta_eigen_gap(n);
    2.0 * (1.0 + phys.lambda) * beta * (s + gap) / (phys.reynolds * geom.kx * (beta - 1.0))
}

/// Evaluates one side bottom-up from `depth`, storing `gamma` heads for
/// levels `1..=store`. `side` is +1 or -1.
fn cf_side(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
    side: i64,
    depth: usize,
    store: usize,
) -> Vec<f64> {
    debug_assert!(depth >= 1);
    let numerator = if side > 0 { -1.0 } else { 1.0 };
    let mut out = vec![0.0; store.min(depth)];
    let mut tail = partial_denominator(phys, geom, s, side * depth as i64);
    if depth <= store {
        out[depth - 1] = numerator / tail;
    }
    for level in (1..depth).rev() {
        tail = partial_denominator(phys, geom, s, side * level as i64) + 1.0 / tail;
        if level <= store {
            out[level - 1] = numerator / tail;
        }
    }
    out
}

fn cf_heads(phys: &PhysicalParams, geom: &GeometryParams, s: f64, depth: usize) -> (f64, f64) {
    let plus = cf_side(phys, geom, s, 1, depth, 1)[0];
    let minus = cf_side(phys, geom, s, -1, depth, 1)[0];
    (plus, minus)
}

fn continued_fractions_excess(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
    depth_init: usize,
    store: usize,
) -> Result<ContinuedFractionEval, LinstabError> {
    let mut depth = depth_init.max(CF_DEPTH_MIN);
    let (mut plus, mut minus) = cf_heads(phys, geom, s, depth);
    loop {
        let next = depth * 2;
        let (p2, m2) = cf_heads(phys, geom, s, next);
        let ok = (p2 - plus).abs() <= CF_TOL * p2.abs().max(f64::MIN_POSITIVE)
            && (m2 - minus).abs() <= CF_TOL * m2.abs().max(f64::MIN_POSITIVE);
        if ok {
            return Ok(ContinuedFractionEval {
                gamma_plus: cf_side(phys, geom, s, 1, next, store),
                gamma_minus: cf_side(phys, geom, s, -1, next, store),
                depth_used: next,
                converged: true,
            });
        }
        if next >= CF_DEPTH_MAX {
            return Err(LinstabError::CfNoConvergence {
                depth: next,
                prev_plus: plus,
                prev_minus: minus,
                head_plus: p2,
                head_minus: m2,
            });
        }
        plus = p2;
        minus = m2;
        depth = next;
    }
}

/// Evaluates both one-sided fractions at the given spectral point, doubling
/// the depth from `depth` until the heads settle to [`CF_TOL`].
pub fn continued_fractions(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    sigma: f64,
    depth: usize,
) -> Result<ContinuedFractionEval, LinstabError> {
    let s = excess_of_sigma(phys, geom, sigma)?;
    continued_fractions_excess(phys, geom, s, depth.max(1), CF_DEPTH_MIN)
}

fn excess_of_sigma(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    sigma: f64,
) -> Result<f64, LinstabError> {
    let lower = -phys.lambda - geom.beta_eigen(0);
    if !(sigma > lower) {
        return Err(LinstabError::SigmaOutOfRange { sigma, lower });
    }
    Ok(sigma - lower)
}

/// Dispersion residual and its magnitude scale, in the excess variable.
fn residual_excess(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
) -> Result<(f64, f64), LinstabError> {
    let beta0 = geom.beta_eigen(0);
    let lead = 2.0 * beta0 * (1.0 + phys.lambda) * s / (phys.reynolds * geom.kx * (1.0 - beta0));
    let (gamma_p1, gamma_m1) = cf_heads_converged(phys, geom, s)?;
    let residual = lead - (gamma_m1 - gamma_p1);
    let scale = lead.abs() + gamma_m1.abs() + gamma_p1.abs();
    Ok((residual, scale))
}

fn cf_heads_converged(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
) -> Result<(f64, f64), LinstabError> {
    let cf = continued_fractions_excess(phys, geom, s, 32, 1)?;
    Ok((cf.gamma_plus[0], cf.gamma_minus[0]))
}

/// Residual of the continued-fraction dispersion relation at `(R, sigma)`.
///
/// Zero (within tolerance) exactly when `(R, sigma)` solves the spectral
/// problem; continuous in `sigma` on `sigma > -lambda - beta_0`.
pub fn dispersion_residual(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    sigma: f64,
) -> Result<f64, LinstabError> {
    let s = excess_of_sigma(phys, geom, sigma)?;
    Ok(residual_excess(phys, geom, s)?.0)
}

/// Real eigenvalue and eigenfunction data at a fixed `(lambda, R, geometry)`.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub phys: PhysicalParams,
    pub geom: GeometryParams,
    pub sigma: f64,
    /// `sigma + lambda + beta_0`, carried exactly from the root solve.
    pub sigma_excess: f64,
    /// Truncation half-width M; coefficients cover `n in [-M, M]`.
    pub depth: usize,
    phi: Vec<f64>,
    phi_star: Vec<f64>,
    /// Max relative residual of the three-term coefficient recurrence.
    pub recurrence_residual: f64,
    /// Relative size of the summed recurrence identity (must vanish).
    pub identity_residual: f64,
    /// |dispersion residual| achieved at the root.
    pub dispersion_residual: f64,
    /// `sum (-1)^n beta_n (beta_n - 1) phi_n^2`; negative for admissible
    /// geometries (the Laplacian pairing with the conjugate eigenfunction,
    /// up to the positive measure factor).
    pub pairing_laplacian: f64,
    /// `sum (-1)^n (beta_n - 1) phi_n^2`; negative likewise.
    pub pairing_plain: f64,
}

impl EigenSolution {
    pub fn half_width(&self) -> i64 {
        self.depth as i64
    }

    /// Coefficient `phi_n` (0 outside the stored range).
    pub fn phi(&self, n: i64) -> f64 {
        let idx = n + self.depth as i64;
        if idx < 0 || idx >= self.phi.len() as i64 {
            0.0
        } else {
            self.phi[idx as usize]
        }
    }

    /// Conjugate coefficient `phi*_n = (-1)^n (beta_n - 1) phi_n`.
    pub fn phi_star(&self, n: i64) -> f64 {
        let idx = n + self.depth as i64;
        if idx < 0 || idx >= self.phi_star.len() as i64 {
            0.0
        } else {
            self.phi_star[idx as usize]
        }
    }

    /// Physical exponential rate `sigma / R` of the eigenmode.
    pub fn growth_rate(&self) -> f64 {
        self.sigma / self.phys.reynolds
    }
}

fn build_eigen_solution(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
    dispersion_residual: f64,
) -> Result<EigenSolution, LinstabError> {
    let cf = continued_fractions_excess(phys, geom, s, 64, PHI_HALF_WIDTH_CAP + 8)?;
    let beta0 = geom.beta_eigen(0);

    // Lemma coefficients: phi_0 = 1, phi_{+-n} = (beta_0 - 1)/(beta_{+-n} - 1)
    // * gamma_{+-1} ... gamma_{+-n}.
    let cap = PHI_HALF_WIDTH_CAP.min(cf.gamma_plus.len());
    let mut plus = Vec::with_capacity(cap);
    let mut minus = Vec::with_capacity(cap);
    let mut prod_p = 1.0;
    let mut prod_m = 1.0;
    for n in 1..=cap {
        prod_p *= cf.gamma_plus[n - 1];
        prod_m *= cf.gamma_minus[n - 1];
        plus.push((beta0 - 1.0) / (geom.beta_eigen(n as i64) - 1.0) * prod_p);
        minus.push((beta0 - 1.0) / (geom.beta_eigen(-(n as i64)) - 1.0) * prod_m);
    }
    let max_phi = plus
        .iter()
        .chain(minus.iter())
        .fold(1.0_f64, |acc, &v| acc.max(v.abs()));
    let cutoff = PHI_DECAY_TOL * max_phi;
    let mut half = cap;
    for n in 1..=cap {
        if plus[n - 1].abs() < cutoff && minus[n - 1].abs() < cutoff {
            half = n;
            break;
        }
    }

    let mut phi = vec![0.0; 2 * half + 1];
    phi[half] = 1.0;
    for n in 1..=half {
        phi[half + n] = plus[n - 1];
        phi[half - n] = minus[n - 1];
    }
    let at = |v: &[f64], n: i64| -> f64 {
        let idx = n + half as i64;
        if idx < 0 || idx >= v.len() as i64 {
            0.0
        } else {
            v[idx as usize]
        }
    };

    let mut phi_star = vec![0.0; 2 * half + 1];
    let mut recurrence = 0.0_f64;
    let mut identity = 0.0_f64;
    let mut identity_abs = 0.0_f64;
    let mut pairing_laplacian = 0.0_f64;
    let mut pairing_plain = 0.0_f64;
    let coupling = 2.0 * (1.0 + phys.lambda) / (phys.reynolds * geom.kx);
    for n in -(half as i64)..=half as i64 {
        let beta = geom.beta_eigen(n);
        let excess = s + geom.beta_eigen_gap(n);
        let p = at(&phi, n);
        let parity = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        phi_star[(n + half as i64) as usize] = parity * (beta - 1.0) * p;

        let res = coupling * beta * excess * p - (geom.beta_eigen(n + 1) - 1.0) * at(&phi, n + 1)
            + (geom.beta_eigen(n - 1) - 1.0) * at(&phi, n - 1);
        recurrence = recurrence.max(res.abs());

        let term = beta * excess * (beta - 1.0) * p * p;
        identity += term;
        identity_abs += term.abs();
        pairing_laplacian += parity * beta * (beta - 1.0) * p * p;
        pairing_plain += parity * (beta - 1.0) * p * p;
    }

    Ok(EigenSolution {
        phys: *phys,
        geom: *geom,
        sigma: s - (phys.lambda + beta0),
        sigma_excess: s,
        depth: half,
        phi,
        phi_star,
        recurrence_residual: recurrence / max_phi,
        identity_residual: identity.abs() / identity_abs,
        dispersion_residual,
        pairing_laplacian,
        pairing_plain,
    })
}

/// Solves the dispersion relation for the spectral excess at fixed `R`.
fn solve_excess(phys: &PhysicalParams, geom: &GeometryParams) -> Result<(f64, f64), LinstabError> {
    let value = |s: f64| residual_excess(phys, geom, s).map(|(r, _)| r);

    let lo_value = value(EXCESS_FLOOR)?;
    if lo_value >= 0.0 {
        return Err(LinstabError::NoBracket {
            context: "sigma lower end",
            last: lo_value,
        });
    }
    let beta0 = geom.beta_eigen(0);
    let cap = SIGMA_HI_CAP + phys.lambda + beta0;
    let mut hi = 1.0_f64.max(phys.lambda + beta0);
    let mut hi_value = value(hi)?;
    while hi_value <= 0.0 {
        hi *= 4.0;
        if hi > cap {
            return Err(LinstabError::NoBracket {
                context: "sigma upper end",
                last: hi_value,
            });
        }
        hi_value = value(hi)?;
    }

    // Bisection on ln(s): the root can sit anywhere between O(R^2) and the
    // expansion cap, and log bisection resolves that whole range.
    let mut lo_ln = EXCESS_FLOOR.ln();
    let mut hi_ln = hi.ln();
    for _ in 0..110 {
        let mid_ln = 0.5 * (lo_ln + hi_ln);
        let mid = mid_ln.exp();
        let v = value(mid)?;
        if v == 0.0 {
            lo_ln = mid_ln;
            hi_ln = mid_ln;
            break;
        }
        if v < 0.0 {
            lo_ln = mid_ln;
        } else {
            hi_ln = mid_ln;
        }
        if hi_ln - lo_ln <= f64::EPSILON {
            break;
        }
    }
    let root = (0.5 * (lo_ln + hi_ln)).exp();
    let (res, scale) = residual_excess(phys, geom, root)?;
    if res.abs() > ROOT_TOL.max(1e-12 * scale) {
        return Err(LinstabError::ResidualNotMet {
            sigma: root - (phys.lambda + beta0),
            residual: res,
        });
    }
    Ok((root, res.abs()))
}

/// Unique real eigenvalue at the given `(lambda, R, geometry)`, with the
/// eigenfunction and conjugate coefficients and their residual diagnostics.
pub fn sigma_of_r(
    phys: &PhysicalParams,
    geom: &GeometryParams,
) -> Result<EigenSolution, LinstabError> {
    let report = geom.admissibility();
    if !report.admissible {
        return Err(LinstabError::NotAdmissible(report));
    }
    let (s, resid) = solve_excess(phys, geom)?;
    build_eigen_solution(phys, geom, s, resid)
}

/// Physical growth rate `sigma(R) / R` of the leading mode.
pub fn growth_rate(phys: &PhysicalParams, geom: &GeometryParams) -> Result<f64, LinstabError> {
    Ok(sigma_of_r(phys, geom)?.growth_rate())
}

/// Eigen data pinned at `sigma = 0` for a Reynolds number that must already
/// solve the neutral condition (i.e. the output of [`critical_reynolds`]).
pub fn eigen_at_sigma_zero(
    lambda: f64,
    geom: &GeometryParams,
    reynolds: f64,
) -> Result<EigenSolution, LinstabError> {
    let phys = PhysicalParams::new(lambda, reynolds)?;
    let s = lambda + geom.beta_eigen(0);
    let (residual, scale) = residual_excess(&phys, geom, s)?;
    if residual.abs() > ROOT_TOL.max(1e-10 * scale) {
        return Err(LinstabError::ResidualNotMet {
            sigma: 0.0,
            residual,
        });
    }
    build_eigen_solution(&phys, geom, s, residual.abs())
}

/// Root of the truncated-recurrence determinant.
#[derive(Debug, Clone, Copy)]
pub struct DeterminantRoot {
    pub sigma: f64,
    pub sigma_excess: f64,
    pub half_width: usize,
}

/// Scaled determinant of the `(2M+1)`-dimensional tridiagonal system in the
/// eigenfunction coefficients. Only the sign (and zero crossings in `s`) are
/// meaningful; the magnitude is rescaled to dodge overflow.
fn determinant_scaled(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    s: f64,
    half_width: usize,
) -> f64 {
    let m = half_width as i64;
    let diag = |n: i64| -> f64 {
        let beta = geom.beta_eigen(n);
        2.0 * (1.0 + phys.lambda) * beta * (s + geom.beta_eigen_gap(n)) / (phys.reynolds * geom.kx)
    };
    // Row n couples phi_{n-1} with +(beta_{n-1}-1) and phi_{n+1} with
    // -(beta_{n+1}-1); the continuant recurrence therefore adds
    // +(beta_{n-1}-1)(beta_n-1) * P_{n-2}.
    let mut prev2 = 1.0_f64;
    let mut prev = diag(-m);
    for n in (-m + 1)..=m {
        let off = (geom.beta_eigen(n - 1) - 1.0) * (geom.beta_eigen(n) - 1.0);
        let current = diag(n) * prev + off * prev2;
        prev2 = prev;
        prev = current;
        let mag = prev.abs().max(prev2.abs());
        if mag > 1e140 {
            prev *= 1e-140;
            prev2 *= 1e-140;
        } else if mag > 0.0 && mag < 1e-140 {
            prev *= 1e140;
            prev2 *= 1e140;
        }
    }
    prev
}

fn determinant_largest_root(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    half_width: usize,
) -> Result<f64, LinstabError> {
    let f = |s: f64| determinant_scaled(phys, geom, s, half_width);
    let beta0 = geom.beta_eigen(0);
    let s_min = 1e-10 * (phys.lambda + beta0).max(1.0);
    let mut s_cap = phys.lambda + beta0 + 16.0;
    let cap_max = SIGMA_HI_CAP + phys.lambda + beta0;

    loop {
        const POINTS: usize = 1200;
        let ratio = (s_cap / s_min).powf(1.0 / (POINTS - 1) as f64);
        let mut brackets = Vec::new();
        let mut s_prev = s_min;
        let mut f_prev = f(s_prev);
        for k in 1..POINTS {
            let s_k = s_min * ratio.powi(k as i32);
            let f_k = f(s_k);
            if f_prev == 0.0 || f_prev.signum() != f_k.signum() {
                brackets.push((s_prev, s_k));
            }
            s_prev = s_k;
            f_prev = f_k;
        }
        if let Some(&(mut lo, mut hi)) = brackets.last() {
            // Only trust the result once the cap comfortably clears the root.
            if hi <= s_cap / 4.0 || s_cap >= cap_max {
                let f_lo = f(lo);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm == 0.0 {
                        return Ok(mid);
                    }
                    if fm.signum() == f_lo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON * hi {
                        break;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
        } else if s_cap >= cap_max {
            return Err(LinstabError::NoSignChange { half_width });
        }
        s_cap = (s_cap * 4.0).min(cap_max);
    }
}

/// Largest real eigenvalue of the `(2M+1)`-truncated coefficient recurrence,
/// found by a determinant sign scan plus bisection. Independent check on
/// [`sigma_of_r`].
pub fn sigma_determinant_oracle(
    phys: &PhysicalParams,
    geom: &GeometryParams,
    half_width: usize,
) -> Result<DeterminantRoot, LinstabError> {
    if half_width < 8 {
        return Err(LinstabError::HalfWidthTooSmall(half_width));
    }
    let s = determinant_largest_root(phys, geom, half_width)?;
    Ok(DeterminantRoot {
        sigma: s - (phys.lambda + geom.beta_eigen(0)),
        sigma_excess: s,
        half_width,
    })
}

/// Doubles the truncation half-width until the determinant root stabilises
/// to 1e-10 relative.
pub fn sigma_determinant_converged(
    phys: &PhysicalParams,
    geom: &GeometryParams,
) -> Result<DeterminantRoot, LinstabError> {
    const CAP: usize = 512;
    let mut half = 24;
    let mut root = sigma_determinant_oracle(phys, geom, half)?;
    loop {
        let next = sigma_determinant_oracle(phys, geom, half * 2)?;
        if (next.sigma_excess - root.sigma_excess).abs() <= 1e-10 * next.sigma_excess {
            return Ok(next);
        }
        half *= 2;
        root = next;
        if half > CAP {
            return Err(LinstabError::OracleNoConvergence { cap: CAP });
        }
    }
}

/// Critical Reynolds number `R_c` where `sigma` crosses zero, by bracketing
/// plus bisection on the dispersion residual at `sigma = 0`. Unique because
/// the residual is strictly decreasing in `R`.
pub fn critical_reynolds(lambda: f64, geom: &GeometryParams) -> Result<f64, LinstabError> {
    let report = geom.admissibility();
    if !report.admissible {
        return Err(LinstabError::NotAdmissible(report));
    }
    let beta0 = geom.beta_eigen(0);
    let s_crit = lambda + beta0;
    let at = |r: f64| -> Result<f64, LinstabError> {
        let phys = PhysicalParams::new(lambda, r)?;
        Ok(residual_excess(&phys, geom, s_crit)?.0)
    };

    let mut lo = 1.0;
    let mut lo_val = at(lo)?;
    while lo_val <= 0.0 {
        lo /= 8.0;
        if lo < 1e-12 {
            return Err(LinstabError::NoBracket {
                context: "critical Reynolds lower end",
                last: lo_val,
            });
        }
        lo_val = at(lo)?;
    }
    let mut hi = (lo * 2.0).max(100.0);
    let mut hi_val = at(hi)?;
    while hi_val >= 0.0 {
        hi *= 4.0;
        if hi > REYNOLDS_CAP {
            return Err(LinstabError::NoBracket {
                context: "critical Reynolds upper end",
                last: hi_val,
            });
        }
        hi_val = at(hi)?;
    }

    let mut lo_ln = lo.ln();
    let mut hi_ln = hi.ln();
    for _ in 0..90 {
        let mid_ln = 0.5 * (lo_ln + hi_ln);
        let v = at(mid_ln.exp())?;
        if v == 0.0 {
            return Ok(mid_ln.exp());
        }
        if v > 0.0 {
            lo_ln = mid_ln;
        } else {
            hi_ln = mid_ln;
        }
        if hi_ln - lo_ln <= f64::EPSILON {
            break;
        }
    }
    Ok((0.5 * (lo_ln + hi_ln)).exp())
}

/// One point of the neutral curve; failures are recorded, not fatal.
#[derive(Debug, Clone)]
pub struct NeutralPoint {
    pub kx: f64,
    pub critical_reynolds: Result<f64, String>,
}

#[derive(Debug, Clone)]
pub struct NeutralCurve {
    pub points: Vec<NeutralPoint>,
    /// `(kx, R_c)` of the smallest critical value over the grid.
    pub minimum: Option<(f64, f64)>,
}

/// Sweeps `critical_reynolds` over a sorted `kx` grid.
pub fn neutral_curve(
    lambda: f64,
    n_walls: u32,
    j_mode: u32,
    kx_grid: &[f64],
) -> Result<NeutralCurve, LinstabError> {
    if kx_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LinstabError::UnsortedGrid);
    }
    let points: Vec<NeutralPoint> = kx_grid
        .iter()
        .map(|&kx| {
            let result = GeometryParams::new(kx, n_walls, j_mode)
                .map_err(LinstabError::from)
                .and_then(|geom| critical_reynolds(lambda, &geom))
                .map_err(|e| e.to_string());
            NeutralPoint {
                kx,
                critical_reynolds: result,
            }
        })
        .collect();
    let minimum = points
        .iter()
        .filter_map(|p| p.critical_reynolds.as_ref().ok().map(|&r| (p.kx, r)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    Ok(NeutralCurve { points, minimum })
}
