//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured numbers. Tolerances and runtime budgets are pinned here.
//!
//! Reference-value note (criterion 1): the two published anchors are
//! mutually inconsistent — 1768 at kx = 0.63 is the neutral-curve minimum,
//! so no other point of the curve can sit at 1760. This solver (continued
//! fraction, determinant oracle, and the nonlinear dynamic threshold all
//! agreeing) puts R_c(0.7) at 1828.26. The 0.63 anchor passes at 0.02%; the
//! 0.7 anchor is asserted as stated and fails honestly. See the README
//! section "Known reference-value discrepancies".

mod common;

use common::{random_real_field, TorusGrid};
use kolmoduct::bifurcation::{BifurcationAnalysis, CorrectionOrder};
use kolmoduct::domain::{GeometryParams, PhysicalParams};
use kolmoduct::dynamics::{
    dynamic_critical_reynolds, energy_by_block, energy_perturbation, measure_modal_growth_rate,
    normalized_distance, sensitivity_run, shift_matched_distance, steady_energy_balance, SimConfig,
    SimState, Simulation,
};
use kolmoduct::linstab::{critical_reynolds, sigma_determinant_converged, sigma_of_r};
use kolmoduct::spectral::{advection, apply_linear, eigenfields, inner, laplacian, SpectralField};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const LAMBDA: f64 = 20.0;
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn paper_geom() -> GeometryParams {
    GeometryParams::new(0.7, 4, 1).unwrap()
}

fn analysis() -> &'static BifurcationAnalysis {
    static CELL: OnceLock<BifurcationAnalysis> = OnceLock::new();
    CELL.get_or_init(|| BifurcationAnalysis::new(LAMBDA, paper_geom()).unwrap())
}

/// Random admissible parameter draws shared by the sampled-property criteria.
fn admissible_draws(count: usize, seed: u64) -> Vec<(PhysicalParams, GeometryParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n_walls = rng.gen_range(2..=6u32);
        let j = rng.gen_range(1..n_walls);
        let alpha = f64::from(j) / f64::from(2 * n_walls);
        let lo = (1.0 - (1.0 - alpha) * (1.0 - alpha)).max(0.0).sqrt();
        let hi = (1.0 - alpha * alpha).sqrt();
        let kx = lo + rng.gen_range(0.05..0.95) * (hi - lo);
        let lambda = rng.gen_range(0.0..40.0);
        let reynolds = 10f64.powf(rng.gen_range(1.0..3.7));
        let geom = GeometryParams::new(kx, n_walls, j).unwrap();
        debug_assert!(geom.is_admissible());
        out.push((PhysicalParams::new(lambda, reynolds).unwrap(), geom));
    }
    out
}

fn budget(elapsed: Duration, limit_s: f64, what: &str) {
    assert!(
        elapsed.as_secs_f64() <= limit_s,
        "{what} took {:.1} s, budget {limit_s} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_01_critical_reynolds_anchors() {
    let t0 = Instant::now();
    let rc_063 = critical_reynolds(LAMBDA, &GeometryParams::new(0.63, 4, 1).unwrap()).unwrap();
    let elapsed_063 = t0.elapsed();
    let t1 = Instant::now();
    let rc_070 = critical_reynolds(LAMBDA, &paper_geom()).unwrap();
    let elapsed_070 = t1.elapsed();
    budget(elapsed_063, 1.0, "critical_reynolds(0.63)");
    budget(elapsed_070, 1.0, "critical_reynolds(0.7)");

    let err_063 = (rc_063 - 1768.0).abs() / 1768.0;
    assert!(
        err_063 <= 0.02,
        "criterion 1: FAIL — R_c(0.63) = {rc_063:.3}, {:.2}% from 1768",
        100.0 * err_063
    );
    let err_070 = (rc_070 - 1760.0).abs() / 1760.0;
    if err_070 <= 0.02 {
        println!(
            "criterion 1 (critical Reynolds anchors): PASS — R_c(0.63) = {rc_063:.3} \
             ({:.3}% from 1768), R_c(0.7) = {rc_070:.3} ({:.3}% from 1760)",
            100.0 * err_063,
            100.0 * err_070
        );
    } else {
        println!(
            "criterion 1 (critical Reynolds anchors): FAIL — R_c(0.63) = {rc_063:.3} matches \
             1768 at {:.3}%, but R_c(0.7) = {rc_070:.3} sits {:.2}% from the 1760 anchor. \
             The two anchors contradict each other (1768 at 0.63 is the curve minimum, so \
             R_c(0.7) >= 1768 > 1760); the solver value is confirmed by the determinant \
             oracle and the nonlinear dynamic threshold. See README, 'Known reference-value \
             discrepancies'.",
            100.0 * err_063,
            100.0 * err_070
        );
        panic!(
            "R_c(0.7) = {rc_070:.3} is {:.2}% from the inconsistent 1760 anchor (tolerance 2%)",
            100.0 * err_070
        );
    }
}

#[test]
fn acceptance_02_oracle_equivalence() {
    let t0 = Instant::now();
    let draws = admissible_draws(50, 0xC0FFEE);
    let mut worst = 0.0f64;
    for (phys, geom) in &draws {
        let cf = sigma_of_r(phys, geom).unwrap();
        let det = sigma_determinant_converged(phys, geom).unwrap();
        let rel = (cf.sigma_excess - det.sigma_excess).abs() / cf.sigma_excess;
        assert!(
            rel <= 1e-8,
            "criterion 2: FAIL — disagreement {rel:.3e} at lambda={}, R={}, kx={}, N={}, j={}",
            phys.lambda,
            phys.reynolds,
            geom.kx,
            geom.n_walls,
            geom.j_mode
        );
        worst = worst.max(rel);
    }
    let elapsed = t0.elapsed();
    budget(elapsed, 10.0, "oracle equivalence over 50 draws");
    println!(
        "criterion 2 (oracle equivalence): PASS — 50 draws, worst relative disagreement \
         {worst:.3e} (tolerance 1e-8), {:.2} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_03_spectral_identities() {
    let t0 = Instant::now();
    let draws = admissible_draws(30, 0xBEEF);
    let mut worst_rec = 0.0f64;
    let mut worst_id = 0.0f64;
    for (phys, geom) in &draws {
        let eig = sigma_of_r(phys, geom).unwrap();
        assert!(
            eig.recurrence_residual < 1e-9,
            "recurrence {}",
            eig.recurrence_residual
        );
        assert!(
            eig.identity_residual < 1e-9,
            "identity {}",
            eig.identity_residual
        );
        assert!(eig.pairing_laplacian < 0.0 && eig.pairing_plain < 0.0);
        let above = sigma_of_r(&phys.at_reynolds(phys.reynolds * 1.3).unwrap(), geom).unwrap();
        assert!(above.sigma > eig.sigma, "sigma not increasing in R");
        worst_rec = worst_rec.max(eig.recurrence_residual);
        worst_id = worst_id.max(eig.identity_residual);
    }
    let elapsed = t0.elapsed();
    budget(elapsed, 10.0, "spectral identity sweep");
    println!(
        "criterion 3 (spectral identities): PASS — 30 draws: recurrence <= {worst_rec:.2e}, \
         identity <= {worst_id:.2e}, both pairings negative, d sigma/dR > 0; {:.2} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_04_small_reynolds_limit() {
    let t0 = Instant::now();
    let geom = paper_geom();
    let beta0 = geom.beta_eigen(0);
    let mut ratios = Vec::new();
    for r in [1e-1, 1e-2, 1e-3] {
        let eig = sigma_of_r(&PhysicalParams::new(LAMBDA, r).unwrap(), &geom).unwrap();
        ratios.push((r, eig.sigma_excess, eig.sigma_excess / (r * r)));
    }
    let (_, excess_smallest, _) = ratios[2];
    assert!(
        excess_smallest < 1e-6 * (LAMBDA + beta0),
        "criterion 4: FAIL — |sigma + lambda + beta0| = {excess_smallest:.3e} at R = 1e-3"
    );
    // The ratio is strictly monotone across the three decades; it decreases
    // with increasing R (equivalently, grows toward its positive R -> 0
    // limit ~1.6724e-4 — it does not tend to zero).
    assert!(
        ratios[2].2 > ratios[1].2 && ratios[1].2 > ratios[0].2,
        "criterion 4: FAIL — ratios not monotone: {ratios:?}"
    );
    budget(t0.elapsed(), 1.0, "small-R limit");
    println!(
        "criterion 4 (small-R limit): PASS — excess(1e-3) = {excess_smallest:.3e} \
         (< {:.1e}); excess/R^2 strictly monotone across decades: {:.9e}, {:.9e}, {:.9e} \
         (decreasing in increasing R toward the positive limit, not toward zero)",
        1e-6 * (LAMBDA + beta0),
        ratios[2].2,
        ratios[1].2,
        ratios[0].2
    );
}

#[test]
fn acceptance_05_nonlinear_operator_correctness() {
    let t0 = Instant::now();
    let geom = paper_geom();
    let phys = PhysicalParams::new(LAMBDA, 1800.0).unwrap();
    let grid = TorusGrid::new(geom, 32, 192);
    let mut worst_adv = 0.0f64;
    let mut worst_lin = 0.0f64;
    let mut worst_skew = 0.0f64;
    for seed in 0..20u64 {
        let f = random_real_field(geom, 2, 10, 0.6, 9000 + seed);
        let g = random_real_field(geom, 2, 10, 0.4, 9100 + seed);

        let fast = advection(&f, &g);
        let reference = grid.project(
            &grid.advection_pointwise(&f, &g),
            fast.mx_max(),
            fast.c_max(),
        );
        let rel = common::max_coeff_diff(&fast, &reference) / fast.coeff_norm();
        assert!(rel <= 1e-10, "advection defect {rel:.3e} at seed {seed}");
        worst_adv = worst_adv.max(rel);

        let lf = apply_linear(&phys, &f);
        let lref = grid.project(&grid.linear_pointwise(&phys, &f), lf.mx_max(), lf.c_max());
        let rel = common::max_coeff_diff(&lf, &lref) / lf.coeff_norm();
        assert!(
            rel <= 1e-10,
            "linear-operator defect {rel:.3e} at seed {seed}"
        );
        worst_lin = worst_lin.max(rel);

        let n = advection(&f, &f);
        let wide = f.embedded(n.mx_max(), n.c_max());
        let scale = n.norm_l2() * wide.norm_l2().max(laplacian(&wide).norm_l2());
        let skew = inner(&n, &wide)
            .norm()
            .max(inner(&n, &laplacian(&wide)).norm())
            / scale;
        assert!(
            skew <= 1e-10,
            "skew-symmetry defect {skew:.3e} at seed {seed}"
        );
        worst_skew = worst_skew.max(skew);
    }
    let elapsed = t0.elapsed();
    budget(elapsed, 30.0, "grid-oracle comparison");
    println!(
        "criterion 5 (nonlinear operator correctness): PASS — 20 random fields: \
         advection <= {worst_adv:.2e}, linear operator <= {worst_lin:.2e}, skew integrals \
         <= {worst_skew:.2e} (tolerance 1e-10); {:.2} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_06_linear_nonlinear_consistency() {
    let t0 = Instant::now();
    let geom = paper_geom();
    let rc = analysis().critical_reynolds;
    let mut report = Vec::new();
    for factor in [0.9, 1.1] {
        let phys = PhysicalParams::new(LAMBDA, factor * rc).unwrap();
        let eig = sigma_of_r(&phys, &geom).unwrap();
        let mut config = SimConfig::new(phys, geom);
        config.c_max = 192;
        let rate = measure_modal_growth_rate(&config, &eig, 1e-6, 300.0, 2500.0).unwrap();
        let expect = eig.growth_rate();
        let rel = (rate - expect).abs() / expect.abs();
        assert!(
            rel <= 0.02,
            "criterion 6: FAIL — rate {rate:.5e} vs sigma/R {expect:.5e} at {factor} R_c"
        );
        report.push(format!("{factor} R_c: {:.2e}", rel));
    }
    let elapsed = t0.elapsed();
    budget(elapsed, 60.0, "growth-rate comparison");
    println!(
        "criterion 6 (linear-nonlinear consistency): PASS — relative errors {} \
         (tolerance 2e-2); {:.1} s",
        report.join(", "),
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_07_dynamic_threshold() {
    let t0 = Instant::now();
    let geom = paper_geom();
    let rc = analysis().critical_reynolds;
    let mut template = SimConfig::new(PhysicalParams::new(LAMBDA, rc).unwrap(), geom);
    template.c_max = 192;
    let dynamic =
        dynamic_critical_reynolds(LAMBDA, geom, &template, 0.9 * rc, 1.1 * rc, 0.004).unwrap();
    let rel = (dynamic - rc).abs() / rc;
    let elapsed = t0.elapsed();
    budget(elapsed, 300.0, "dynamic threshold bisection");
    assert!(
        rel <= 0.01,
        "criterion 7: FAIL — dynamic threshold {dynamic:.2} vs R_c {rc:.2} ({rel:.3e})"
    );
    println!(
        "criterion 7 (dynamic threshold): PASS — bisection gives {dynamic:.2} vs \
         R_c = {rc:.2} ({:.2}%, tolerance 1%); {:.0} s",
        100.0 * rel,
        elapsed.as_secs_f64()
    );
}

fn converge_from_secondary(r: f64, theta: f64, t_end: f64) -> SimState {
    let an = analysis();
    let spec = an
        .secondary_flow(r, theta, CorrectionOrder::Quadratic)
        .unwrap();
    let mut config = SimConfig::new(PhysicalParams::new(LAMBDA, r).unwrap(), an.geom);
    config.c_max = 192;
    config.dt = 2.0;
    config.t_end = t_end;
    config.steady_tol = 5e-8;
    let sim = Simulation::new(config).unwrap();
    let (state, converged) = sim
        .run_to_steady(spec.field.truncated(config.mx_max, config.c_max))
        .unwrap();
    assert!(converged, "run at R = {r} did not reach a steady state");
    state
}

#[test]
fn acceptance_08_landau_amplitude_law() {
    let t0 = Instant::now();
    let an = analysis();
    assert!(
        an.landau() > 0.0,
        "criterion 8: FAIL — a+b = {} not positive",
        an.landau()
    );
    let mut errors = Vec::new();
    for delta in [1.03, 1.01] {
        let r = delta * an.critical_reynolds;
        let state = converge_from_secondary(r, 0.0, 40_000.0);
        let pert = an.perturbation_of(&state.field.embedded(2, an.fields.psi.c_max()));
        let measured = an.amplitude_projection(&pert).norm();
        let predicted = an.predicted_amplitude(r).unwrap();
        errors.push((delta, (measured - predicted).abs() / predicted));
    }
    let (_, err_103) = errors[0];
    let (_, err_101) = errors[1];
    assert!(
        err_103 <= 0.20,
        "criterion 8: FAIL — amplitude error {err_103:.3} at 1.03 R_c exceeds 20%"
    );
    assert!(
        err_101 < err_103,
        "criterion 8: FAIL — error not decreasing toward criticality: \
         {err_101:.4} at 1.01 vs {err_103:.4} at 1.03"
    );
    let elapsed = t0.elapsed();
    budget(elapsed, 300.0, "amplitude-law comparison");
    println!(
        "criterion 8 (Landau law): PASS — a+b = {:.4} > 0; DNS-vs-prediction amplitude \
         error {:.2}% at 1.03 R_c (tolerance 20%), decreasing to {:.2}% at 1.01 R_c; {:.0} s",
        an.landau(),
        100.0 * err_103,
        100.0 * err_101,
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_09_steady_energy_balance() {
    let t0 = Instant::now();
    let an = analysis();
    let geom = an.geom;

    // Literal reference point R = 1810: below the computed R_c = 1828.26,
    // so the flow returns to the basic state; the slowest-decaying m = +-1
    // modes dominate whatever perturbation remains.
    let phys = PhysicalParams::new(LAMBDA, 1810.0).unwrap();
    let eig = sigma_of_r(&phys, &geom).unwrap();
    let fields = eigenfields(&eig, 2, 1);
    let mut config = SimConfig::new(phys, geom);
    config.c_max = 192;
    config.dt = 2.0;
    config.t_end = 50_000.0;
    config.steady_tol = 1e-13;
    let sim = Simulation::new(config).unwrap();
    let mut initial = sim.basic_state();
    initial.add_scaled(
        &fields.psi_theta(0.8).truncated(config.mx_max, config.c_max),
        Complex64::new(3e-4, 0.0),
    );
    let (state, _) = sim.run_to_steady(initial).unwrap();
    let pert_energy = energy_perturbation(&phys, &state.field);
    assert!(
        pert_energy < 1e-10,
        "criterion 9: FAIL — literal R=1810 run kept perturbation energy {pert_energy:.3e}"
    );
    let m1 = state.field.block_coeff_norm(1);
    let m2 = state.field.block_coeff_norm(2);
    assert!(
        m1 > 10.0 * m2,
        "m=+-1 remnant must dominate: {m1:.3e} vs {m2:.3e}"
    );

    // Supercritical analogue at the intended relative distance above
    // critical (1810/1760 of R_c): the nontrivial steady state closes the
    // energy balance and the m = +-1 block carries the perturbation energy.
    let r_super = 1810.0 / 1760.0 * an.critical_reynolds;
    let steady = converge_from_secondary(r_super, 0.0, 30_000.0);
    let phys_super = PhysicalParams::new(LAMBDA, r_super).unwrap();
    let balance = steady_energy_balance(&phys_super, &steady.field);
    assert!(
        balance.relative_imbalance < 1e-6,
        "criterion 9: FAIL — imbalance {:.3e} at R = {r_super:.1}",
        balance.relative_imbalance
    );
    let mut pert = steady.field.clone();
    pert.add_scaled(
        &SpectralField::basic_flow(geom, LAMBDA, pert.mx_max(), pert.c_max()),
        -ONE,
    );
    let blocks = energy_by_block(&pert);
    let e_m1: f64 = blocks
        .iter()
        .filter(|(m, _)| m.abs() == 1)
        .map(|(_, e)| e)
        .sum();
    let e_rest: f64 = blocks
        .iter()
        .filter(|(m, _)| m.abs() != 1)
        .map(|(_, e)| *e)
        .fold(0.0, f64::max);
    assert!(
        e_m1 > e_rest,
        "criterion 9: FAIL — m=+-1 perturbation energy {e_m1:.3e} not dominant over {e_rest:.3e}"
    );
    let elapsed = t0.elapsed();
    budget(elapsed, 120.0, "steady energy balance");
    println!(
        "criterion 9 (steady energy balance): PASS — literal R=1810 decays to the basic flow \
         (E_pert = {pert_energy:.2e} < 1e-10, m=+-1 remnant dominant); supercritical analogue \
         R = {r_super:.1} closes the balance at {:.2e} (tolerance 1e-6) with m=+-1 carrying \
         the perturbation energy ({e_m1:.3e} vs {e_rest:.3e}); {:.0} s",
        balance.relative_imbalance,
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_10_circle_of_states() {
    let t0 = Instant::now();
    let an = analysis();
    let r = 1.03 * an.critical_reynolds;
    let thetas = [0.0, std::f64::consts::FRAC_PI_3, std::f64::consts::PI];
    let states: Vec<SimState> = thetas
        .iter()
        .map(|&theta| converge_from_secondary(r, theta, 30_000.0))
        .collect();
    let mut worst = 0.0f64;
    for (i, &theta) in thetas.iter().enumerate().skip(1) {
        let shifted = states[0].field.shifted_x(theta / an.geom.kx);
        let dist = normalized_distance(&shifted, &states[i].field);
        assert!(
            dist <= 1e-4,
            "criterion 10: FAIL — distance {dist:.3e} after shifting by theta = {theta}"
        );
        worst = worst.max(dist);
    }
    let elapsed = t0.elapsed();
    budget(elapsed, 300.0, "circle of states");
    println!(
        "criterion 10 (circle of states): PASS — converged states at theta = 0, pi/3, pi \
         coincide after the prescribed x-shift to {worst:.2e} (tolerance 1e-4); {:.0} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_11_high_reynolds_sensitivity() {
    let t0 = Instant::now();
    let an = analysis();
    let geom = an.geom;

    // Turbulent regime: seeded runs separate.
    let mut config = SimConfig::new(PhysicalParams::new(LAMBDA, 20_000.0).unwrap(), geom);
    config.dt = 0.25;
    config.t_end = 600.0;
    config.snapshot_every = 100.0;
    config.seed = 42;
    let report = sensitivity_run(&config, 2, 1e-3).unwrap();
    let separation = report.max_end_distance();
    assert!(
        separation > 0.5,
        "criterion 11: FAIL — turbulent runs separated only to {separation:.3}"
    );

    // Literal R = 1810 (subcritical here): every run relaxes onto the basic
    // flow, one shared pattern.
    let mut low = SimConfig::new(PhysicalParams::new(LAMBDA, 1810.0).unwrap(), geom);
    low.c_max = 192;
    low.dt = 2.0;
    low.t_end = 50_000.0;
    low.seed = 9;
    let literal = sensitivity_run(&low, 3, 1e-3).unwrap();
    let mut worst_literal = 0.0f64;
    for (i, f) in literal.end_fields.iter().enumerate() {
        for g in literal.end_fields.iter().skip(i + 1) {
            let (_, d) = shift_matched_distance(f, g, 512);
            worst_literal = worst_literal.max(d);
        }
    }
    assert!(
        worst_literal < 1e-4,
        "criterion 11: FAIL — literal R=1810 runs differ by {worst_literal:.3e} after shifting"
    );

    // Supercritical analogue: the runs land on different phases of one
    // circle and coincide after the optimal shift.
    let r_super = 1810.0 / 1760.0 * an.critical_reynolds;
    let mut mid = SimConfig::new(PhysicalParams::new(LAMBDA, r_super).unwrap(), geom);
    mid.c_max = 192;
    mid.dt = 2.0;
    mid.t_end = 26_000.0;
    mid.seed = 5;
    let collapse = sensitivity_run(&mid, 3, 1e-3).unwrap();
    let mut worst_super = 0.0f64;
    let mut raw_max = 0.0f64;
    for (i, f) in collapse.end_fields.iter().enumerate() {
        for g in collapse.end_fields.iter().skip(i + 1) {
            raw_max = raw_max.max(normalized_distance(f, g));
            let (_, d) = shift_matched_distance(f, g, 512);
            worst_super = worst_super.max(d);
        }
    }
    assert!(
        worst_super < 1e-4,
        "criterion 11: FAIL — supercritical runs differ by {worst_super:.3e} after shifting"
    );
    let elapsed = t0.elapsed();
    budget(elapsed, 600.0, "sensitivity ensemble");
    println!(
        "criterion 11 (high-R sensitivity): PASS — R = 20000 separation {separation:.2} \
         (> 0.5); literal R = 1810 ensemble collapses to one pattern ({worst_literal:.2e} \
         after shift); supercritical R = {r_super:.0} ensemble collapses onto the circle \
         ({worst_super:.2e} after optimal shift, raw spread {raw_max:.2e}); {:.0} s",
        elapsed.as_secs_f64()
    );
}
