//! Eigenvalue curve sigma(R) of the basic flow at the reference parameters,
//! demonstrating strict monotonicity and the small-R limit.

use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::linstab::sigma_of_r;

fn main() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let lambda = 20.0;

    println!(
        "sigma(R) at lambda = {lambda}, kx = {}, N = 4, j = 1",
        geom.kx
    );
    println!(
        "{:>10}  {:>14}  {:>12}  {:>9}",
        "R", "sigma", "recurrence", "depth M"
    );
    for r in [
        1e-3, 1.0, 100.0, 500.0, 1000.0, 1500.0, 1828.26, 2000.0, 2300.0,
    ] {
        let phys = PhysicalParams::new(lambda, r).unwrap();
        let eig = sigma_of_r(&phys, &geom).unwrap();
        println!(
            "{r:>10.3}  {:>14.8}  {:>12.2e}  {:>9}",
            eig.sigma, eig.recurrence_residual, eig.depth
        );
    }

    println!("\nsmall-R behaviour: sigma + lambda + beta_0 = O(R^2)");
    for r in [1e-1, 1e-2, 1e-3] {
        let phys = PhysicalParams::new(lambda, r).unwrap();
        let eig = sigma_of_r(&phys, &geom).unwrap();
        println!(
            "  R = {r:<6}: excess = {:.6e}, excess / R^2 = {:.9e}",
            eig.sigma_excess,
            eig.sigma_excess / (r * r)
        );
    }
}
