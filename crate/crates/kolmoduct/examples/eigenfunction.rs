//! Eigenfunction and conjugate-eigenfunction coefficients: decay along the
//! chain, the recurrence / summed-identity residuals, and the two negative
//! pairing sums.

use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::linstab::sigma_of_r;

fn main() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let phys = PhysicalParams::new(20.0, 2000.0).unwrap();
    let eig = sigma_of_r(&phys, &geom).unwrap();

    println!("sigma = {:.9} at R = {}", eig.sigma, phys.reynolds);
    println!("coefficients (phi_0 = 1 normalization):");
    println!("{:>4}  {:>14}  {:>14}", "n", "phi_n", "phi*_n");
    for n in -eig.half_width()..=eig.half_width() {
        if eig.phi(n).abs() > 1e-12 {
            println!("{n:>4}  {:>14.6e}  {:>14.6e}", eig.phi(n), eig.phi_star(n));
        }
    }
    println!("\ntruncation half-width M = {}", eig.depth);
    println!("recurrence residual = {:.3e}", eig.recurrence_residual);
    println!("summed identity residual = {:.3e}", eig.identity_residual);
    println!(
        "pairing sums (both negative): laplacian {:.6e}, plain {:.6e}",
        eig.pairing_laplacian, eig.pairing_plain
    );
}
