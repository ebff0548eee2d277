//! Cross-validation of the two independent eigenvalue paths: the
//! continued-fraction dispersion relation against the truncated tridiagonal
//! determinant, over a range of Reynolds numbers and truncation widths.

use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::linstab::{sigma_determinant_converged, sigma_determinant_oracle, sigma_of_r};

fn main() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let lambda = 20.0;

    println!("continued fraction vs determinant oracle");
    println!(
        "{:>8}  {:>14}  {:>14}  {:>10}",
        "R", "sigma (CF)", "sigma (det)", "rel diff"
    );
    for r in [200.0, 900.0, 1760.0, 2000.0, 3000.0] {
        let phys = PhysicalParams::new(lambda, r).unwrap();
        let cf = sigma_of_r(&phys, &geom).unwrap();
        let det = sigma_determinant_converged(&phys, &geom).unwrap();
        let rel = (cf.sigma_excess - det.sigma_excess).abs() / cf.sigma_excess;
        println!(
            "{r:>8}  {:>14.9}  {:>14.9}  {rel:>10.2e}",
            cf.sigma, det.sigma
        );
    }

    println!("\nhalf-width convergence at R = 2000:");
    let phys = PhysicalParams::new(lambda, 2000.0).unwrap();
    let mut last = None;
    for m in [8, 16, 24, 32, 48] {
        let root = sigma_determinant_oracle(&phys, &geom, m).unwrap();
        let delta = last
            .map(|p: f64| format!("{:.2e}", (root.sigma_excess - p).abs() / root.sigma_excess))
            .unwrap_or_else(|| "-".into());
        println!("  M = {m:>3}: sigma = {:.12}  (change {delta})", root.sigma);
        last = Some(root.sigma_excess);
    }
}
