//! Nonlinear time marching above the critical Reynolds number: a seeded
//! perturbation of the basic flow grows, saturates on the circle of
//! secondary states, and the converged state closes the energy balance.

use kolmoduct::bifurcation::BifurcationAnalysis;
use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::dynamics::{
    energy_by_block, energy_perturbation, perturbed_basic_state, steady_energy_balance, SimConfig,
    Simulation,
};

fn main() {
    let geom = GeometryParams::new(0.7, 4, 1).unwrap();
    let analysis = BifurcationAnalysis::new(20.0, geom).unwrap();
    let r = 1.04 * analysis.critical_reynolds;
    let phys = PhysicalParams::new(20.0, r).unwrap();

    let mut config = SimConfig::new(phys, geom);
    config.c_max = 192;
    config.dt = 2.0;
    config.t_end = 25_000.0;
    config.steady_tol = 1e-7;
    config.snapshot_every = 500.0;
    config.seed = 7;

    let sim = Simulation::new(config).unwrap();
    let initial = perturbed_basic_state(&config, 1e-4, config.seed);
    println!(
        "marching at R = {r:.2} (R_c = {:.2}), dt = {:.3}",
        analysis.critical_reynolds,
        sim.dt()
    );
    println!("{:>9}  {:>12}  {:>12}", "t", "E_pert", "residual");
    let (state, converged) = sim
        .run_with_snapshots(initial, |s| {
            if s.steps % 2500 == 0 {
                println!(
                    "{:>9.0}  {:>12.4e}  {:>12.3e}",
                    s.t,
                    energy_perturbation(&phys, &s.field),
                    s.residual
                );
            }
        })
        .unwrap();
    println!("converged = {converged} at t = {:.0}", state.t);

    let x = analysis.amplitude_projection(
        &analysis.perturbation_of(&state.field.embedded(2, analysis.fields.psi.c_max())),
    );
    println!(
        "steady amplitude |X| = {:.6e} vs predicted {:.6e}",
        x.norm(),
        analysis.predicted_amplitude(r).unwrap()
    );

    let balance = steady_energy_balance(&phys, &state.field);
    println!(
        "energy balance: low side {:.6e}, high side {:.6e}, imbalance {:.2e}",
        balance.low_side, balance.high_side, balance.relative_imbalance
    );
    println!("kinetic energy by streamwise block:");
    for (m, e) in energy_by_block(&state.field) {
        println!("  m = {m:>2}: {e:.4e}");
    }
}
