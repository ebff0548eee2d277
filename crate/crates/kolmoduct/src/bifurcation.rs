//! Centre-manifold reduction at the critical Reynolds number: normalized
//! conjugate pair, quadratic manifold fields, Landau coefficients, and the
//! circle of secondary steady states.
//!
//! The reduction is carried out in the complex formulation. With `X` the
//! complex amplitude along the critical pair, the reduced equation reads
//! `dX/dt = mu X - (a + b) X |X|^2 + h.o.t.`, so steady secondary states obey
//! `|X|^2 = mu / (a + b)` on the side where that ratio is positive.

use crate::domain::{DomainError, GeometryParams, PhysicalParams};
use crate::linstab::{self, EigenSolution, LinstabError};
use crate::spectral::{
    advection, eigenfields, inner, laplacian, solve_blocks, EigenFields, SpectralError,
    SpectralField,
};
use num_complex::Complex64;
use thiserror::Error;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error)]
pub enum BifurcationError {
    #[error(transparent)]
    Linstab(#[from] LinstabError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("degenerate critical pairing <Lap psi_1, psi_1*> = {pairing:.3e}")]
    DegeneratePairing { pairing: f64 },
    #[error("quadratic interaction leaks into the critical blocks (relative norm {norm:.3e})")]
    CriticalBlockContamination { norm: f64 },
    #[error("Landau coefficient has imaginary residue {residue:.3e} (tolerance {tol:.0e})")]
    ComplexResidue { residue: f64, tol: f64 },
    #[error("no steady branch on this side: mu = {mu:.6e}, a+b = {landau:.6e}, mu/(a+b) < 0")]
    NoSteadyBranch { mu: f64, landau: f64 },
}

/// Conjugate eigenfields rescaled so that `<Lap psi_i, psi*_j> = delta_ij`.
#[derive(Debug, Clone)]
pub struct NormalizedConjugates {
    pub psi1_star: SpectralField,
    pub psi2_star: SpectralField,
    /// Complex conjugate field `psi1* + i psi2*` at the same scale.
    pub psi_star: SpectralField,
    /// Factor applied to the raw (unit coefficient scale) conjugates.
    pub scale: f64,
}

/// Rescales the conjugate pair to the Kronecker normalization. The raw
/// diagonal pairing is nonzero for admissible geometries, so this only fails
/// on degenerate input.
pub fn normalize_pair(fields: &EigenFields) -> Result<NormalizedConjugates, BifurcationError> {
    let pairing = inner(&laplacian(&fields.psi1), &fields.psi1_star);
    let scale_ref = laplacian(&fields.psi1).norm_l2() * fields.psi1_star.norm_l2();
    if pairing.norm() < 1e-12 * scale_ref.max(f64::MIN_POSITIVE) {
        return Err(BifurcationError::DegeneratePairing {
            pairing: pairing.norm(),
        });
    }
    debug_assert!(pairing.im.abs() <= 1e-10 * pairing.norm());
    let scale = 1.0 / pairing.re;
    let w = Complex64::new(scale, 0.0);
    Ok(NormalizedConjugates {
        psi1_star: fields.psi1_star.scaled(w),
        psi2_star: fields.psi2_star.scaled(w),
        psi_star: fields.psi_star.scaled(w),
        scale,
    })
}

/// Quadratic centre-manifold fields in the complex formulation, stored with
/// the manifold sign: `chi = -L^{-1} N(.,.)`.
#[derive(Debug, Clone)]
pub struct QuadraticManifold {
    /// `-L^{-1} N(psi, psi)`; lives in the doubled streamwise block.
    pub chi_pp: SpectralField,
    /// `-L^{-1} [N(psi, conj psi) + N(conj psi, psi)]`; streamwise mean block.
    pub chi_mix: SpectralField,
}

impl QuadraticManifold {
    /// The quadratic correction `sum_{ij} s_i s_j chi_{ij}` for amplitude `X`.
    pub fn correction(&self, x: Complex64) -> SpectralField {
        let mut out = self.chi_pp.scaled(0.25 * x.conj() * x.conj());
        out.add_scaled(&self.chi_pp.conj_field(), 0.25 * x * x);
        out.add_scaled(&self.chi_mix, Complex64::new(0.25 * x.norm_sqr(), 0.0));
        out.hermitize();
        out
    }
}

/// Solves the quadratic manifold equations `L chi = -N` on the streamwise
/// mean and doubled blocks at the critical point. The right sides are
/// verified to have no content in the critical blocks first.
pub fn quadratic_manifold(
    phys_at_rc: &PhysicalParams,
    fields: &EigenFields,
) -> Result<QuadraticManifold, BifurcationError> {
    let psi = &fields.psi;
    let psi_bar = psi.conj_field();
    let n_pp = advection(psi, psi);
    let mut n_mix = advection(psi, &psi_bar);
    n_mix.add_scaled(&advection(&psi_bar, psi), ONE);

    for n in [&n_pp, &n_mix] {
        let leak = (n.block_coeff_norm(1).powi(2) + n.block_coeff_norm(-1).powi(2)).sqrt();
        let scale = n.coeff_norm().max(f64::MIN_POSITIVE);
        if leak > 1e-12 * scale {
            return Err(BifurcationError::CriticalBlockContamination { norm: leak / scale });
        }
    }

    // The input lattice is pre-widened, so bringing the convolution output
    // back onto it loses nothing.
    let n_pp = n_pp.truncated(psi.mx_max(), psi.c_max());
    let n_mix = n_mix.truncated(psi.mx_max(), psi.c_max());

    let chi_pp = solve_blocks(phys_at_rc, &n_pp, &[2])?.scaled(-ONE);
    let chi_mix = solve_blocks(phys_at_rc, &n_mix, &[0])?.scaled(-ONE);
    Ok(QuadraticManifold { chi_pp, chi_mix })
}

fn project_against(field: &SpectralField, psi_star_conj: &SpectralField) -> Complex64 {
    inner(field, psi_star_conj)
}

/// Landau coefficients `(a, b)` of the reduced amplitude equation, from the
/// cubic interaction of the eigenpair with the quadratic manifold.
pub fn landau_coefficients(
    manifold: &QuadraticManifold,
    fields: &EigenFields,
    conjugates: &NormalizedConjugates,
) -> Result<(f64, f64), BifurcationError> {
    let psi = &fields.psi;
    let psi_bar = psi.conj_field();
    // Projection <f, conj psi*> integrates f * psi*; conjugating the second
    // argument of `inner` needs the conjugate field.
    let proj = conjugates.psi_star.conj_field();

    // linv_bb = L^{-1} N(conj psi, conj psi) = -conj(chi_pp),
    // linv_mix = L^{-1} [N(psi, conj psi) + N(conj psi, psi)] = -chi_mix.
    let linv_bb = manifold.chi_pp.conj_field().scaled(-ONE);
    let linv_mix = manifold.chi_mix.scaled(-ONE);

    let a = 0.125
        * (project_against(&advection(psi, &linv_bb), &proj)
            + project_against(&advection(&psi_bar, &linv_mix), &proj));
    let b = 0.125
        * (project_against(&advection(&linv_bb, psi), &proj)
            + project_against(&advection(&linv_mix, &psi_bar), &proj));

    const TOL: f64 = 1e-8;
    for v in [a, b] {
        let residue = v.im.abs() / v.norm().max(f64::MIN_POSITIVE);
        if residue > TOL {
            return Err(BifurcationError::ComplexResidue { residue, tol: TOL });
        }
    }
    Ok((a.re, b.re))
}

/// The nondegeneracy expression of the steady-bifurcation theorem (the
/// conjugated arrangement of the same cubic terms); equals `8 (a + b)` and is
/// evaluated separately as a convention cross-check.
pub fn nondegeneracy_sum(
    manifold: &QuadraticManifold,
    fields: &EigenFields,
    conjugates: &NormalizedConjugates,
) -> Complex64 {
    let psi = &fields.psi;
    let psi_bar = psi.conj_field();
    let proj = &conjugates.psi_star;

    let linv_pp = manifold.chi_pp.scaled(-ONE);
    let linv_mix = manifold.chi_mix.scaled(-ONE);

    inner(&advection(&psi_bar, &linv_pp), proj)
        + inner(&advection(psi, &linv_mix), proj)
        + inner(&advection(&linv_pp, &psi_bar), proj)
        + inner(&advection(&linv_mix, psi), proj)
}

/// Which expansion order the reconstructed secondary field carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionOrder {
    /// Basic flow plus the critical pair.
    Linear,
    /// Adds the quadratic manifold correction.
    Quadratic,
}

/// A point on the circle of secondary steady states.
#[derive(Debug, Clone)]
pub struct SecondaryFlowSpec {
    pub reynolds: f64,
    /// `mu = sigma(R) / R`.
    pub mu: f64,
    /// Amplitude `epsilon = sqrt(mu / (a + b))`.
    pub amplitude: f64,
    /// Phase on the circle; the field at `theta` is the field at `0`
    /// translated by `x -> x + theta / kx`.
    pub theta: f64,
    pub field: SpectralField,
    /// Set when the amplitude leaves the local validity ball of the
    /// expansion (`eps ||psi_theta|| > 0.2 ||psi_0||`).
    pub amplitude_warning: bool,
}

/// Everything derived at the critical point for one `(lambda, geometry)`,
/// bundled so sweeps compute it once.
#[derive(Debug, Clone)]
pub struct BifurcationAnalysis {
    pub lambda: f64,
    pub geom: GeometryParams,
    pub critical_reynolds: f64,
    pub eig: EigenSolution,
    pub fields: EigenFields,
    pub conjugates: NormalizedConjugates,
    pub manifold: QuadraticManifold,
    pub a_coef: f64,
    pub b_coef: f64,
    /// Messages about nearby critical values of other mode families
    /// (within 0.1%), which would break the simple-eigenvalue assumption.
    pub resonance_warnings: Vec<String>,
}

impl BifurcationAnalysis {
    pub fn new(lambda: f64, geom: GeometryParams) -> Result<Self, BifurcationError> {
        let r_c = linstab::critical_reynolds(lambda, &geom)?;
        let phys = PhysicalParams::new(lambda, r_c)?;
        let eig = linstab::eigen_at_sigma_zero(lambda, &geom, r_c)?;
        let fields = eigenfields(&eig, 2, 1);
        // Widen so the quadratic products stay exact.
        let wide_c = 2 * fields.psi.c_max() + geom.denom();
        let fields = EigenFields {
            psi: fields.psi.embedded(2, wide_c),
            psi_star: fields.psi_star.embedded(2, wide_c),
            psi1: fields.psi1.embedded(2, wide_c),
            psi2: fields.psi2.embedded(2, wide_c),
            psi1_star: fields.psi1_star.embedded(2, wide_c),
            psi2_star: fields.psi2_star.embedded(2, wide_c),
        };
        let conjugates = normalize_pair(&fields)?;
        let manifold = quadratic_manifold(&phys, &fields)?;
        let (a_coef, b_coef) = landau_coefficients(&manifold, &fields, &conjugates)?;

        let mut resonance_warnings = Vec::new();
        for j_other in 1..geom.n_walls {
            for m_factor in 1..=2_u32 {
                if (j_other, m_factor) == (geom.j_mode, 1) {
                    continue;
                }
                let Ok(other) =
                    GeometryParams::new(geom.kx * f64::from(m_factor), geom.n_walls, j_other)
                else {
                    continue;
                };
                if !other.is_admissible() {
                    continue;
                }
                if let Ok(rc_other) = linstab::critical_reynolds(lambda, &other) {
                    if (rc_other - r_c).abs() <= 1e-3 * r_c {
                        resonance_warnings.push(format!(
                            "critical value of family (kx={}, j={}) at R={rc_other:.3} \
                             coincides with R_c={r_c:.3} within 0.1%",
                            other.kx, j_other
                        ));
                    }
                }
            }
        }

        Ok(Self {
            lambda,
            geom,
            critical_reynolds: r_c,
            eig,
            fields,
            conjugates,
            manifold,
            a_coef,
            b_coef,
            resonance_warnings,
        })
    }

    /// Cubic coefficient `a + b`; positive means supercritical.
    pub fn landau(&self) -> f64 {
        self.a_coef + self.b_coef
    }

    /// `mu = sigma(R) / R` at the given Reynolds number.
    pub fn mu(&self, reynolds: f64) -> Result<f64, BifurcationError> {
        let phys = PhysicalParams::new(self.lambda, reynolds)?;
        Ok(linstab::sigma_of_r(&phys, &self.geom)?.growth_rate())
    }

    fn amplitude_ratio(&self, mu: f64) -> Result<f64, BifurcationError> {
        let landau = self.landau();
        let ratio = mu / landau;
        if ratio < 0.0 {
            // Growth rates at solver precision count as the critical point.
            if mu.abs() <= 1e-12 {
                return Ok(0.0);
            }
            return Err(BifurcationError::NoSteadyBranch { mu, landau });
        }
        Ok(ratio)
    }

    /// Predicted steady amplitude `sqrt(mu / (a+b))`; errors on the side
    /// with no steady branch.
    pub fn predicted_amplitude(&self, reynolds: f64) -> Result<f64, BifurcationError> {
        let mu = self.mu(reynolds)?;
        Ok(self.amplitude_ratio(mu)?.sqrt())
    }

    /// Constructs the secondary state at phase `theta` and the given order.
    pub fn secondary_flow(
        &self,
        reynolds: f64,
        theta: f64,
        order: CorrectionOrder,
    ) -> Result<SecondaryFlowSpec, BifurcationError> {
        let mu = self.mu(reynolds)?;
        let amplitude = self.amplitude_ratio(mu)?.sqrt();
        // (s1, s2) = eps (cos theta, -sin theta) makes theta an x-shift by
        // +theta/kx; X = s1 + i s2.
        let x = Complex64::from_polar(amplitude, -theta);
        let mut field = SpectralField::basic_flow(
            self.geom,
            self.lambda,
            self.fields.psi.mx_max(),
            self.fields.psi.c_max(),
        );
        field.add_scaled(&self.fields.psi1, Complex64::new(x.re, 0.0));
        field.add_scaled(&self.fields.psi2, Complex64::new(x.im, 0.0));
        if order == CorrectionOrder::Quadratic {
            field.add_scaled(&self.manifold.correction(x), ONE);
        }
        field.hermitize();
        let psi_theta_norm = self.fields.psi1.norm_l2();
        let psi0_norm =
            SpectralField::basic_flow(self.geom, self.lambda, 0, self.geom.denom()).norm_l2();
        Ok(SecondaryFlowSpec {
            reynolds,
            mu,
            amplitude,
            theta,
            field,
            amplitude_warning: amplitude * psi_theta_norm > 0.2 * psi0_norm,
        })
    }

    /// Complex amplitude of a perturbation field along the critical pair:
    /// `X = <Lap phi, conj psi*>` with the normalized conjugates.
    pub fn amplitude_projection(&self, perturbation: &SpectralField) -> Complex64 {
        inner(
            &laplacian(perturbation),
            &self.conjugates.psi_star.conj_field(),
        )
    }

    /// The perturbation of a full flow field against the basic flow.
    pub fn perturbation_of(&self, field: &SpectralField) -> SpectralField {
        let mut pert = field.clone();
        let psi0 = SpectralField::basic_flow(self.geom, self.lambda, field.mx_max(), field.c_max());
        pert.add_scaled(&psi0, -ONE);
        pert
    }
}
