//! Scale-invariance of the bifurcation pipeline: rescaling the eigenpair
//! (breaking the phi_0 = 1 convention) and re-imposing the Kronecker
//! normalization must leave the physical secondary field unchanged.

mod common;

use kolmoduct::bifurcation::{
    landau_coefficients, normalize_pair, quadratic_manifold, BifurcationAnalysis,
};
use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::spectral::EigenFields;
use num_complex::Complex64;

#[test]
fn landau_prediction_invariant_under_eigen_rescale() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let an = BifurcationAnalysis::new(20.0, geom).unwrap();
    let phys = PhysicalParams::new(20.0, an.critical_reynolds).unwrap();
    let r = 1.03 * an.critical_reynolds;
    let mu = an.mu(r).unwrap();

    let eps_ref = an.predicted_amplitude(r).unwrap();
    let reference_field = an.fields.psi1.scaled(Complex64::new(eps_ref, 0.0));

    // Rescale the eigenpair by an arbitrary factor rho: the normalized
    // conjugates scale like 1/rho, a+b like rho^2, epsilon like 1/rho, and
    // the physical field epsilon * psi_theta stays put.
    for rho in [0.37, 5.0] {
        let w = Complex64::new(rho, 0.0);
        let fields = EigenFields {
            psi: an.fields.psi.scaled(w),
            psi_star: an.fields.psi_star.scaled(w),
            psi1: an.fields.psi1.scaled(w),
            psi2: an.fields.psi2.scaled(w),
            psi1_star: an.fields.psi1_star.scaled(w),
            psi2_star: an.fields.psi2_star.scaled(w),
        };
        let conj = normalize_pair(&fields).unwrap();
        let manifold = quadratic_manifold(&phys, &fields).unwrap();
        let (a, b) = landau_coefficients(&manifold, &fields, &conj).unwrap();

        let descaled_landau = (a + b) / (rho * rho);
        assert!(
            (descaled_landau - an.landau()).abs() <= 1e-8 * an.landau(),
            "rho = {rho}: (a+b) / rho^2 = {descaled_landau} vs {}",
            an.landau()
        );

        let eps = (mu / (a + b)).sqrt();
        let mut field = fields.psi1.scaled(Complex64::new(eps, 0.0));
        field.add_scaled(&reference_field, Complex64::new(-1.0, 0.0));
        assert!(
            field.coeff_norm() <= 1e-8 * reference_field.coeff_norm(),
            "rho = {rho}: field differs by {}",
            field.coeff_norm() / reference_field.coeff_norm()
        );
    }
}
