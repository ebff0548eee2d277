//! Linear-nonlinear consistency: the measured growth/decay rate of a tiny
//! eigen perturbation in the full nonlinear march matches sigma(R)/R, and
//! bisecting on the dynamic behaviour recovers the critical Reynolds number.

use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::dynamics::{dynamic_critical_reynolds, measure_modal_growth_rate, SimConfig};
use kolmoduct::linstab::{critical_reynolds, sigma_of_r};

fn main() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let lambda = 20.0;
    let rc = critical_reynolds(lambda, &geom).unwrap();
    println!("R_c from the dispersion relation: {rc:.4}");

    for factor in [0.9, 1.1] {
        let r = rc * factor;
        let phys = PhysicalParams::new(lambda, r).unwrap();
        let eig = sigma_of_r(&phys, &geom).unwrap();
        let mut config = SimConfig::new(phys, geom);
        config.c_max = 192;
        let rate = measure_modal_growth_rate(&config, &eig, 1e-6, 300.0, 2500.0).unwrap();
        println!(
            "R = {r:8.1}: measured rate {rate:+.6e}, sigma/R {:+.6e}, rel. error {:.2e}",
            eig.growth_rate(),
            (rate - eig.growth_rate()).abs() / eig.growth_rate().abs()
        );
    }

    let mut template = SimConfig::new(PhysicalParams::new(lambda, rc).unwrap(), geom);
    template.c_max = 192;
    let dynamic =
        dynamic_critical_reynolds(lambda, geom, &template, 0.9 * rc, 1.1 * rc, 0.005).unwrap();
    println!(
        "dynamic threshold: {dynamic:.2} (off by {:.3}% from the dispersion value)",
        100.0 * (dynamic - rc).abs() / rc
    );
}
