//! Centre-manifold reduction at the critical point: Landau coefficients and
//! the square-root amplitude law of the supercritical branch.

use kolmoduct::bifurcation::BifurcationAnalysis;
use kolmoduct::domain::GeometryParams;

fn main() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let analysis = BifurcationAnalysis::new(20.0, geom).unwrap();

    println!(
        "critical Reynolds number R_c = {:.4}",
        analysis.critical_reynolds
    );
    println!(
        "Landau coefficients: a = {:.6}, b = {:.6}, a + b = {:.6} ({})",
        analysis.a_coef,
        analysis.b_coef,
        analysis.landau(),
        if analysis.landau() > 0.0 {
            "supercritical"
        } else {
            "subcritical"
        }
    );
    for w in &analysis.resonance_warnings {
        println!("warning: {w}");
    }

    println!("\namplitude law epsilon = sqrt(mu / (a+b)):");
    println!("{:>10}  {:>12}  {:>12}", "R/R_c", "mu", "epsilon");
    for delta in [1.005, 1.01, 1.02, 1.03, 1.05] {
        let r = analysis.critical_reynolds * delta;
        let mu = analysis.mu(r).unwrap();
        let eps = analysis.predicted_amplitude(r).unwrap();
        println!("{delta:>10.3}  {mu:>12.4e}  {eps:>12.6e}");
    }

    // Log-log slope of epsilon(R - R_c); the square-root law gives 1/2.
    let deltas = [1.005, 1.01, 1.02, 1.03, 1.05];
    let points: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| {
            let r = analysis.critical_reynolds * d;
            let eps = analysis.predicted_amplitude(r).unwrap();
            (((d - 1.0) * analysis.critical_reynolds).ln(), eps.ln())
        })
        .collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    println!("\nlog-log slope of epsilon vs (R - R_c): {slope:.4} (square-root law: 0.5)");
}
