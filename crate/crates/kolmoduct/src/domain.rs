//! Parameter objects, admissibility checks, and the canonical mode-index
//! lattice shared by all other modules.
//!
//! Fields are expanded over modes `e^{i m kx x} sin(c y / (2N))` with integer
//! streamwise index `m` and positive integer wall-normal numerator `c`. The
//! sine factor vanishes at `y = 0` and `y = 2N pi` for every `c`, so the slip
//! condition is automatic, and every y-wavenumber generated by nonlinear
//! interaction stays on the integer `c` lattice.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("friction number lambda must be finite and >= 0, got {0}")]
    BadLambda(f64),
    #[error("Reynolds number must be finite and > 0, got {0}")]
    BadReynolds(f64),
    #[error("streamwise wavenumber kx must be finite and > 0, got {0}")]
    BadWavenumber(f64),
    #[error("wall count N must be >= 2, got {0}")]
    BadWallCount(u32),
    #[error("mode family j must satisfy 1 <= j <= N-1, got j={j} with N={n_walls}")]
    BadModeFamily { j: u32, n_walls: u32 },
    #[error("wall-normal numerator c must be >= 1")]
    ZeroWallNormalIndex,
}

/// Dimensionless friction number and Reynolds number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub lambda: f64,
    pub reynolds: f64,
}

impl PhysicalParams {
    pub fn new(lambda: f64, reynolds: f64) -> Result<Self, DomainError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(DomainError::BadLambda(lambda));
        }
        if !reynolds.is_finite() || reynolds <= 0.0 {
            return Err(DomainError::BadReynolds(reynolds));
        }
        Ok(Self { lambda, reynolds })
    }

    /// Same friction number at a different Reynolds number.
    pub fn at_reynolds(&self, reynolds: f64) -> Result<Self, DomainError> {
        Self::new(self.lambda, reynolds)
    }
}

/// Duct geometry: streamwise wavenumber `kx`, wall count `N` (duct height
/// `2 N pi`), and the unstable mode family `j` with `1 <= j <= N-1`.
///
/// The derived ratio `alpha = j / (2N)` is kept as the exact integer pair and
/// only turned into a float at evaluation time, so admissibility checks near
/// the boundary of the stability window do not drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryParams {
    pub kx: f64,
    pub n_walls: u32,
    pub j_mode: u32,
}

/// One Galerkin mode `e^{i m kx x} sin(c y / (2N))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub m: i64,
    pub c: u32,
}

impl ModeIndex {
    pub fn new(m: i64, c: u32) -> Result<Self, DomainError> {
        if c == 0 {
            return Err(DomainError::ZeroWallNormalIndex);
        }
        Ok(Self { m, c })
    }
}

/// Outcome of the linear-instability admissibility check, with the two
/// boundary values it compares.
#[derive(Debug, Clone, Copy)]
pub struct Admissibility {
    pub admissible: bool,
    /// `beta(1, j)`, required `< 1`.
    pub beta_low: f64,
    /// `beta(1, 2N - j)`, required `> 1`.
    pub beta_high: f64,
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: beta(1, j) = {} (need < 1), beta(1, 2N-j) = {} (need > 1)",
            if self.admissible {
                "admissible"
            } else {
                "not admissible"
            },
            self.beta_low,
            self.beta_high
        )
    }
}

impl GeometryParams {
    pub fn new(kx: f64, n_walls: u32, j_mode: u32) -> Result<Self, DomainError> {
        if !kx.is_finite() || kx <= 0.0 {
            return Err(DomainError::BadWavenumber(kx));
        }
        if n_walls < 2 {
            return Err(DomainError::BadWallCount(n_walls));
        }
        if j_mode == 0 || j_mode >= n_walls {
            return Err(DomainError::BadModeFamily { j: j_mode, n_walls });
        }
        Ok(Self {
            kx,
            n_walls,
            j_mode,
        })
    }

    /// Denominator `2N` of the wall-normal wavenumber lattice.
    pub fn denom(&self) -> u32 {
        2 * self.n_walls
    }

    /// `alpha = j / (2N)`.
    pub fn alpha(&self) -> f64 {
        f64::from(self.j_mode) / f64::from(self.denom())
    }

    /// Wall-normal wavenumber `c / (2N)` of a lattice mode.
    pub fn kappa(&self, c: u32) -> f64 {
        f64::from(c) / f64::from(self.denom())
    }

    /// Total squared wavenumber `beta(m, c) = (m kx)^2 + (c/(2N))^2`.
    ///
    /// Panics if `c == 0`; construct through [`ModeIndex::new`] to validate.
    pub fn beta(&self, m: i64, c: u32) -> f64 {
        assert!(c >= 1, "wall-normal numerator must be >= 1");
        let mk = m as f64 * self.kx;
        let kappa = self.kappa(c);
        mk * mk + kappa * kappa
    }

    pub fn beta_mode(&self, mode: ModeIndex) -> f64 {
        self.beta(mode.m, mode.c)
    }

    /// `beta_n = kx^2 + (n + alpha)^2` along the eigenfunction chain (m = 1).
    pub fn beta_eigen(&self, n: i64) -> f64 {
        let kap = n as f64 + self.alpha();
        self.kx * self.kx + kap * kap
    }

    /// `beta_n - beta_0 = n (n + 2 alpha) = n^2 + n j / N`, formed without
    /// cancellation so small eigenvalue offsets stay fully resolved.
    pub fn beta_eigen_gap(&self, n: i64) -> f64 {
        let n = n as f64;
        n * (n + f64::from(self.j_mode) / f64::from(self.n_walls))
    }

    /// Instability window check: `beta(1, j) < 1 < beta(1, 2N - j)`.
    pub fn admissibility(&self) -> Admissibility {
        let beta_low = self.beta(1, self.j_mode);
        let beta_high = self.beta(1, self.denom() - self.j_mode);
        Admissibility {
            admissible: beta_low < 1.0 && beta_high > 1.0,
            beta_low,
            beta_high,
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility().admissible
    }

    /// Maps the signed eigenfunction index `n` (mode `sin((n + alpha) y)`) to
    /// the canonical lattice mode at m = 1.
    ///
    /// Returns `(mode, sign, quarter_turn)`: `sign` folds `sin(-kappa y) =
    /// -sin(kappa y)` for negative `n + alpha`, and `quarter_turn = n mod 4`
    /// records the `i^n` factor carried by the eigenfunction expansion.
    pub fn eigen_to_lattice(&self, n: i64) -> (ModeIndex, f64, u8) {
        let signed = 2 * i64::from(self.n_walls) * n + i64::from(self.j_mode);
        debug_assert!(signed != 0);
        let sign = if signed > 0 { 1.0 } else { -1.0 };
        let mode = ModeIndex {
            m: 1,
            c: signed.unsigned_abs() as u32,
        };
        (mode, sign, n.rem_euclid(4) as u8)
    }

    /// Inverse of [`Self::eigen_to_lattice`]; `None` for modes off the m = 1
    /// eigenfunction chain.
    pub fn lattice_to_eigen(&self, mode: ModeIndex) -> Option<i64> {
        if mode.m != 1 || mode.c == 0 {
            return None;
        }
        let denom = i64::from(self.denom());
        let c = i64::from(mode.c);
        let j = i64::from(self.j_mode);
        if (c - j).rem_euclid(denom) == 0 {
            Some((c - j) / denom)
        } else if (-c - j).rem_euclid(denom) == 0 {
            Some((-c - j) / denom)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_geom(kx: f64) -> GeometryParams {
        GeometryParams::new(kx, 4, 1).unwrap()
    }

    #[test]
    fn beta_values_at_paper_parameters() {
        let geom = paper_geom(0.7);
        assert_relative_eq!(geom.beta(1, 1), 0.505625, max_relative = 1e-15);
        assert_relative_eq!(geom.beta(1, 7), 1.255625, max_relative = 1e-15);
        assert_relative_eq!(geom.beta(0, 8), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn beta_is_even_in_m() {
        let geom = paper_geom(0.7);
        for m in 0..5 {
            for c in 1..20 {
                assert_eq!(geom.beta(m, c), geom.beta(-m, c));
            }
        }
    }

    #[test]
    fn beta_rejects_zero_numerator() {
        assert!(ModeIndex::new(1, 0).is_err());
        let geom = paper_geom(0.7);
        assert!(std::panic::catch_unwind(|| geom.beta(1, 0)).is_err());
    }

    #[test]
    fn admissibility_window() {
        assert!(paper_geom(0.7).is_admissible());
        assert!(paper_geom(0.63).is_admissible());
        let report = paper_geom(1.2).admissibility();
        assert!(!report.admissible);
        assert!(report.beta_low > 1.0);
    }

    #[test]
    fn eigen_lattice_map_examples() {
        let geom = paper_geom(0.7);

        let (mode, sign, qt) = geom.eigen_to_lattice(0);
        assert_eq!((mode.m, mode.c, sign, qt), (1, 1, 1.0, 0));

        let (mode, sign, qt) = geom.eigen_to_lattice(-1);
        assert_eq!((mode.m, mode.c, sign, qt), (1, 7, -1.0, 3));

        let (mode, sign, qt) = geom.eigen_to_lattice(2);
        assert_eq!((mode.m, mode.c, sign, qt), (1, 17, 1.0, 2));
    }

    #[test]
    fn eigen_lattice_round_trip() {
        let geom = paper_geom(0.7);
        for n in -40..40 {
            let (mode, _, _) = geom.eigen_to_lattice(n);
            assert_eq!(geom.lattice_to_eigen(mode), Some(n));
        }
        assert_eq!(geom.lattice_to_eigen(ModeIndex { m: 1, c: 2 }), None);
        assert_eq!(geom.lattice_to_eigen(ModeIndex { m: 0, c: 1 }), None);
    }

    #[test]
    fn gap_matches_beta_difference() {
        let geom = paper_geom(0.63);
        for n in -20..20 {
            assert_relative_eq!(
                geom.beta_eigen_gap(n),
                geom.beta_eigen(n) - geom.beta_eigen(0),
                max_relative = 1e-12,
            );
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(PhysicalParams::new(-1.0, 100.0).is_err());
        assert!(PhysicalParams::new(20.0, 0.0).is_err());
        assert!(PhysicalParams::new(0.0, 1e-3).is_ok());
        assert!(GeometryParams::new(0.7, 1, 1).is_err());
        assert!(GeometryParams::new(0.7, 4, 4).is_err());
        assert!(GeometryParams::new(0.7, 4, 0).is_err());
        assert!(GeometryParams::new(-0.7, 4, 1).is_err());
    }
}
