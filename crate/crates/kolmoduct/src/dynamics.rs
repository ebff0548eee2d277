//! Time integration of the full nonlinear vorticity equation on the Galerkin
//! lattice, steady-state detection, energy-balance diagnostics, and
//! sensitivity experiments.
//!
//! Mode-wise the equation reads
//! `da/dt = -((beta+lambda)/R) a - J_{m,c}/beta + F_{m,c}/beta`
//! with `J` the advection convolution of the full stream function (basic flow
//! included) and `F = 1/R` at the forcing mode `(0, 2N)` only. The stiff
//! diagonal is integrated exactly; the bilinear term gets a second-order
//! exponential two-stage treatment, so the basic flow is an exact discrete
//! fixed point and linear decay is reproduced to machine precision.

use crate::domain::{DomainError, GeometryParams, PhysicalParams};
use crate::linstab::{EigenSolution, LinstabError};
use crate::spectral::{advection_truncated, eigenfields, inner_measure, SpectralField};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const BLOWUP_CAP: f64 = 1e9;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("solution blew up at t = {t:.3}: max |coefficient| = {max_coeff:.3e}")]
    BlowUp { t: f64, max_coeff: f64 },
    #[error("time step must be positive and finite (set dt explicitly for unforced runs)")]
    BadTimeStep,
    #[error("growth-rate fit window contained no usable samples")]
    EmptyFitWindow,
    #[error("no sign change of the measured growth rate in [{r_lo}, {r_hi}]")]
    ThresholdNotBracketed { r_lo: f64, r_hi: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Linstab(#[from] LinstabError),
}

/// Run configuration; identical configs (including `seed`) produce bitwise
/// identical trajectories.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub phys: PhysicalParams,
    pub geom: GeometryParams,
    pub mx_max: i64,
    pub c_max: u32,
    /// Requested step; the effective step also respects the linear time
    /// scale, see [`SimConfig::effective_dt`].
    pub dt: f64,
    pub t_end: f64,
    pub steady_tol: f64,
    /// Time between residual snapshots.
    pub snapshot_every: f64,
    pub seed: u64,
    /// Diagnostic limit: drops the forcing and the linear dissipation so the
    /// advection term evolves alone (requires an explicit `dt`).
    pub unforced_inviscid: bool,
}

impl SimConfig {
    pub fn new(phys: PhysicalParams, geom: GeometryParams) -> Self {
        Self {
            phys,
            geom,
            mx_max: 2,
            c_max: 64 * geom.n_walls,
            dt: f64::INFINITY,
            t_end: 20_000.0,
            steady_tol: 1e-9,
            snapshot_every: 50.0,
            seed: 0,
            unforced_inviscid: false,
        }
    }

    /// `min(dt, 0.5 R / (beta_max + lambda))`.
    pub fn effective_dt(&self) -> f64 {
        let beta_max = self.geom.beta(self.mx_max, self.c_max);
        let stability = if self.unforced_inviscid {
            f64::INFINITY
        } else {
            0.5 * self.phys.reynolds / (beta_max + self.phys.lambda)
        };
        self.dt.min(stability)
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub steps: u64,
    pub field: SpectralField,
    /// `||rhs|| / ||field||` at the most recent snapshot.
    pub residual: f64,
}

/// Right side of the vorticity equation on the lattice of `field`.
pub fn rhs(phys: &PhysicalParams, field: &SpectralField) -> SpectralField {
    rhs_with(phys, field, false)
}

fn rhs_with(
    phys: &PhysicalParams,
    field: &SpectralField,
    unforced_inviscid: bool,
) -> SpectralField {
    let geom = *field.geom();
    let mut out = advection_truncated(field, field, field.mx_max(), field.c_max());
    let denom = f64::from(geom.denom());
    let kx = geom.kx;
    for m in -field.mx_max()..=field.mx_max() {
        let mk2 = (m as f64 * kx) * (m as f64 * kx);
        for c in 1..=field.c_max() {
            let kappa = f64::from(c) / denom;
            let beta = mk2 + kappa * kappa;
            let j = out.get(m, c);
            let mut v = -j / beta;
            if !unforced_inviscid {
                v -= (beta + phys.lambda) / phys.reynolds * field.get(m, c);
                if m == 0 && c == geom.denom() {
                    v += Complex64::new(1.0 / (phys.reynolds * beta), 0.0);
                }
            }
            out.set(m, c, v);
        }
    }
    out
}

/// ETDRK2 integrator with precomputed per-mode exponential weights.
pub struct Simulation {
    pub config: SimConfig,
    dt: f64,
    steps_per_snapshot: u64,
    exp_lin: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

fn phi1(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // (e^z - 1)/z by series
        let mut term = 1.0;
        let mut acc = 1.0;
        for k in 2..=14 {
            term *= z / k as f64;
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

fn phi2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // (e^z - 1 - z)/z^2 by series
        let mut term = 0.5;
        let mut acc = 0.5;
        for k in 3..=15 {
            term *= z / k as f64;
            acc += term;
        }
        acc
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, DynamicsError> {
        let dt = config.effective_dt();
        if !(dt.is_finite() && dt > 0.0) {
            return Err(DynamicsError::BadTimeStep);
        }
        let geom = config.geom;
        let denom = f64::from(geom.denom());
        let rows = (2 * config.mx_max + 1) as usize;
        let slots = rows * config.c_max as usize;
        let mut exp_lin = vec![1.0; slots];
        let mut w1 = vec![dt; slots];
        let mut w2 = vec![dt * 0.5; slots];
        if !config.unforced_inviscid {
            for mi in 0..rows {
                let m = mi as i64 - config.mx_max;
                let mk2 = (m as f64 * geom.kx) * (m as f64 * geom.kx);
                for ci in 0..config.c_max as usize {
                    let kappa = (ci + 1) as f64 / denom;
                    let beta = mk2 + kappa * kappa;
                    let z = -dt * (beta + config.phys.lambda) / config.phys.reynolds;
                    let slot = mi * config.c_max as usize + ci;
                    exp_lin[slot] = z.exp();
                    w1[slot] = dt * phi1(z);
                    w2[slot] = dt * phi2(z);
                }
            }
        }
        let steps_per_snapshot = (config.snapshot_every / dt).round().max(1.0) as u64;
        Ok(Self {
            config,
            dt,
            steps_per_snapshot,
            exp_lin,
            w1,
            w2,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn basic_state(&self) -> SpectralField {
        SpectralField::basic_flow(
            self.config.geom,
            self.config.phys.lambda,
            self.config.mx_max,
            self.config.c_max,
        )
    }

    pub fn rhs(&self, field: &SpectralField) -> SpectralField {
        rhs_with(&self.config.phys, field, self.config.unforced_inviscid)
    }

    /// Nonlinear stage `g = -J/beta (+ F/beta)`; the stiff diagonal is
    /// handled by the exponential weights instead.
    fn nonlinear(&self, field: &SpectralField) -> SpectralField {
        let geom = self.config.geom;
        let mut out = advection_truncated(field, field, field.mx_max(), field.c_max());
        let denom = f64::from(geom.denom());
        for m in -field.mx_max()..=field.mx_max() {
            let mk2 = (m as f64 * geom.kx) * (m as f64 * geom.kx);
            for c in 1..=field.c_max() {
                let kappa = f64::from(c) / denom;
                let beta = mk2 + kappa * kappa;
                let j = out.get(m, c);
                let mut v = -j / beta;
                if !self.config.unforced_inviscid && m == 0 && c == geom.denom() {
                    v += Complex64::new(1.0 / (self.config.phys.reynolds * beta), 0.0);
                }
                out.set(m, c, v);
            }
        }
        out
    }

    fn weighted(&self, field: &SpectralField, weights: &[f64]) -> SpectralField {
        let mut out = field.clone();
        let mut slot = 0;
        for m in -field.mx_max()..=field.mx_max() {
            for c in 1..=field.c_max() {
                let v = out.get(m, c);
                out.set(m, c, v * weights[slot]);
                slot += 1;
            }
        }
        out
    }

    /// One ETDRK2 step; deterministic, reality re-enforced, blow-up checked.
    pub fn step(&self, state: &SimState) -> Result<SimState, DynamicsError> {
        let g0 = self.nonlinear(&state.field);
        let mut predictor = self.weighted(&state.field, &self.exp_lin);
        predictor.add_scaled(&self.weighted(&g0, &self.w1), ONE);
        let g1 = self.nonlinear(&predictor);
        let mut correction = g1;
        correction.add_scaled(&g0, -ONE);
        let mut next = predictor;
        next.add_scaled(&self.weighted(&correction, &self.w2), ONE);
        next.hermitize();

        let max_coeff = next
            .iter()
            .fold(0.0_f64, |acc, (_, _, v)| acc.max(v.norm()));
        let t = state.t + self.dt;
        if !max_coeff.is_finite() || max_coeff > BLOWUP_CAP {
            return Err(DynamicsError::BlowUp { t, max_coeff });
        }
        Ok(SimState {
            t,
            steps: state.steps + 1,
            field: next,
            residual: state.residual,
        })
    }

    fn snapshot_residual(&self, field: &SpectralField) -> f64 {
        self.rhs(field).coeff_norm() / field.coeff_norm().max(f64::MIN_POSITIVE)
    }

    /// Marches to `t_end`, invoking the callback at every snapshot (the
    /// initial state included). Converged means the residual stayed below
    /// `steady_tol` for 10 consecutive snapshots.
    pub fn run_with_snapshots(
        &self,
        initial: SpectralField,
        mut on_snapshot: impl FnMut(&SimState),
    ) -> Result<(SimState, bool), DynamicsError> {
        let mut state = SimState {
            t: 0.0,
            steps: 0,
            residual: self.snapshot_residual(&initial),
            field: initial.truncated(self.config.mx_max, self.config.c_max),
        };
        state.residual = self.snapshot_residual(&state.field);
        on_snapshot(&state);
        let mut quiet_streak = u64::from(state.residual < self.config.steady_tol);
        while state.t < self.config.t_end && quiet_streak < 10 {
            for _ in 0..self.steps_per_snapshot {
                state = self.step(&state)?;
                if state.t >= self.config.t_end {
                    break;
                }
            }
            state.residual = self.snapshot_residual(&state.field);
            if state.residual < self.config.steady_tol {
                quiet_streak += 1;
            } else {
                quiet_streak = 0;
            }
            on_snapshot(&state);
        }
        let converged = quiet_streak >= 10;
        Ok((state, converged))
    }

    /// Marches until the sustained-residual criterion or `t_end`.
    pub fn run_to_steady(&self, initial: SpectralField) -> Result<(SimState, bool), DynamicsError> {
        self.run_with_snapshots(initial, |_| {})
    }
}

/// Two sides of the steady energy balance: modes below the forcing
/// wavenumber feed the ones above it.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBalance {
    /// `sum_{beta < 1} |a|^2 (beta+lambda) beta (1-beta)`.
    pub low_side: f64,
    /// `sum_{beta > 1} |a|^2 (beta+lambda) beta (beta-1)`.
    pub high_side: f64,
    pub relative_imbalance: f64,
}

pub fn steady_energy_balance(phys: &PhysicalParams, field: &SpectralField) -> EnergyBalance {
    let mut low = 0.0;
    let mut high = 0.0;
    let geom = field.geom();
    for (m, c, a) in field.iter() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let beta = geom.beta(m, c);
        let w = a.norm_sqr() * (beta + phys.lambda) * beta;
        if beta < 1.0 {
            low += w * (1.0 - beta);
        } else {
            high += w * (beta - 1.0);
        }
    }
    EnergyBalance {
        low_side: low,
        high_side: high,
        relative_imbalance: (low - high).abs() / low.max(high).max(f64::MIN_POSITIVE),
    }
}

/// `sum beta^power |a|^2`; power 1 is (twice the) kinetic energy density and
/// power 2 the enstrophy density, both per measure factor.
pub fn quadratic_invariant(field: &SpectralField, power: i32) -> f64 {
    let geom = field.geom();
    field
        .iter()
        .map(|(m, c, a)| geom.beta(m, c).powi(power) * a.norm_sqr())
        .sum()
}

/// Kinetic energy `1/2 integral |grad psi|^2`.
pub fn energy_total(field: &SpectralField) -> f64 {
    0.5 * inner_measure(field.geom()) * quadratic_invariant(field, 1)
}

/// Kinetic energy of the deviation from the basic flow.
pub fn energy_perturbation(phys: &PhysicalParams, field: &SpectralField) -> f64 {
    let mut pert = field.clone();
    let psi0 = SpectralField::basic_flow(*field.geom(), phys.lambda, field.mx_max(), field.c_max());
    pert.add_scaled(&psi0, -ONE);
    energy_total(&pert)
}

/// Kinetic energy carried by each streamwise block.
pub fn energy_by_block(field: &SpectralField) -> Vec<(i64, f64)> {
    let geom = field.geom();
    (-field.mx_max()..=field.mx_max())
        .map(|m| {
            let e: f64 = (1..=field.c_max())
                .map(|c| geom.beta(m, c) * field.get(m, c).norm_sqr())
                .sum();
            (m, 0.5 * inner_measure(geom) * e)
        })
        .collect()
}

/// `||f - g|| / max(||f||, ||g||)` over coefficients.
pub fn normalized_distance(f: &SpectralField, g: &SpectralField) -> f64 {
    let mut diff = f.clone();
    diff.add_scaled(g, -ONE);
    diff.coeff_norm() / f.coeff_norm().max(g.coeff_norm()).max(f64::MIN_POSITIVE)
}

/// Minimizes the normalized distance over streamwise shifts of `f`:
/// coarse scan plus golden-section refinement. Returns `(shift, distance)`.
pub fn shift_matched_distance(f: &SpectralField, g: &SpectralField, scan: usize) -> (f64, f64) {
    let period = 2.0 * std::f64::consts::PI / f.geom().kx;
    let eval = |delta: f64| normalized_distance(&f.shifted_x(delta), g);
    let mut best = (0.0, eval(0.0));
    for i in 1..scan {
        let delta = period * i as f64 / scan as f64;
        let d = eval(delta);
        if d < best.1 {
            best = (delta, d);
        }
    }
    // Golden-section refinement within one grid cell either side.
    let mut lo = best.0 - period / scan as f64;
    let mut hi = best.0 + period / scan as f64;
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    let delta = 0.5 * (lo + hi);
    let delta = delta.rem_euclid(period);
    (delta, eval(delta))
}

/// Seeded random perturbation of the basic flow, damped toward high modes.
pub fn perturbed_basic_state(config: &SimConfig, scale: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f =
        SpectralField::basic_flow(config.geom, config.phys.lambda, config.mx_max, config.c_max);
    if scale == 0.0 {
        return f;
    }
    let geom = config.geom;
    for m in 0..=config.mx_max {
        for c in 1..=config.c_max {
            let damp = scale / (1.0 + geom.beta(m, c));
            let re = rng.gen_range(-1.0..1.0) * damp;
            let im = if m == 0 {
                0.0
            } else {
                rng.gen_range(-1.0..1.0) * damp
            };
            f.add_at(m, c, Complex64::new(re, im));
        }
    }
    f.hermitize();
    f
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub blew_up: bool,
    /// Last integrated time (equals the common horizon unless it blew up).
    pub final_t: f64,
}

/// Pairwise trajectory separations and end-state spectra for an ensemble of
/// seeded runs.
#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub times: Vec<f64>,
    /// `(i, j)` with `i < j`, distances sampled at `times`.
    pub pair_distances: Vec<((usize, usize), Vec<f64>)>,
    pub outcomes: Vec<RunOutcome>,
    pub end_fields: Vec<SpectralField>,
    pub end_energy_by_block: Vec<Vec<(i64, f64)>>,
}

impl SensitivityReport {
    pub fn max_end_distance(&self) -> f64 {
        self.pair_distances
            .iter()
            .filter_map(|(_, d)| d.last().copied())
            .fold(0.0, f64::max)
    }
}

/// Runs `n_runs` trajectories from seeded perturbations of the basic flow in
/// lockstep, recording pairwise normalized distances at snapshot times.
/// A run that blows up keeps its last finite state and is excluded from
/// further stepping; the report continues.
pub fn sensitivity_run(
    config: &SimConfig,
    n_runs: usize,
    perturb_scale: f64,
) -> Result<SensitivityReport, DynamicsError> {
    assert!(n_runs >= 2, "sensitivity needs at least two runs");
    let sim = Simulation::new(*config)?;
    let mut states: Vec<SimState> = (0..n_runs)
        .map(|i| SimState {
            t: 0.0,
            steps: 0,
            residual: f64::NAN,
            field: perturbed_basic_state(config, perturb_scale, config.seed + i as u64),
        })
        .collect();
    let mut alive = vec![true; n_runs];
    let mut outcomes: Vec<RunOutcome> = (0..n_runs)
        .map(|i| RunOutcome {
            seed: config.seed + i as u64,
            blew_up: false,
            final_t: 0.0,
        })
        .collect();

    let mut times = Vec::new();
    let mut pairs: Vec<((usize, usize), Vec<f64>)> = Vec::new();
    for i in 0..n_runs {
        for j in (i + 1)..n_runs {
            pairs.push(((i, j), Vec::new()));
        }
    }
    let record = |states: &[SimState],
                  t: f64,
                  times: &mut Vec<f64>,
                  pairs: &mut Vec<((usize, usize), Vec<f64>)>| {
        times.push(t);
        for ((i, j), series) in pairs.iter_mut() {
            series.push(normalized_distance(&states[*i].field, &states[*j].field));
        }
    };
    record(&states, 0.0, &mut times, &mut pairs);

    let mut t = 0.0;
    while t < config.t_end {
        for _ in 0..sim.steps_per_snapshot {
            for (i, state) in states.iter_mut().enumerate() {
                if !alive[i] {
                    continue;
                }
                match sim.step(state) {
                    Ok(next) => {
                        outcomes[i].final_t = next.t;
                        *state = next;
                    }
                    Err(DynamicsError::BlowUp { .. }) => {
                        alive[i] = false;
                        outcomes[i].blew_up = true;
                    }
                    Err(e) => return Err(e),
                }
            }
            t += sim.dt;
            if t >= config.t_end {
                break;
            }
        }
        record(&states, t, &mut times, &mut pairs);
    }

    Ok(SensitivityReport {
        times,
        pair_distances: pairs,
        end_energy_by_block: states.iter().map(|s| energy_by_block(&s.field)).collect(),
        end_fields: states.into_iter().map(|s| s.field).collect(),
        outcomes,
    })
}

/// Measures the exponential rate of the `m = 1` block from a seeded
/// eigen-direction perturbation by a log-linear fit over
/// `[t_transient, t_transient + t_fit]`.
pub fn measure_modal_growth_rate(
    config: &SimConfig,
    eig: &EigenSolution,
    delta: f64,
    t_transient: f64,
    t_fit: f64,
) -> Result<f64, DynamicsError> {
    let sim = Simulation::new(*config)?;
    let fields = eigenfields(eig, config.mx_max, 1);
    let mut initial = sim.basic_state();
    initial.add_scaled(
        &fields.psi1.truncated(config.mx_max, config.c_max),
        Complex64::new(delta, 0.0),
    );
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut state = SimState {
        t: 0.0,
        steps: 0,
        residual: 0.0,
        field: initial,
    };
    let t_end = t_transient + t_fit;
    let record_every = ((t_fit / 40.0) / sim.dt).round().max(1.0) as u64;
    while state.t < t_end {
        state = sim.step(&state)?;
        if state.t >= t_transient && state.steps % record_every == 0 {
            let amp = state.field.block_coeff_norm(1);
            if amp > 0.0 {
                samples.push((state.t, amp.ln()));
            }
        }
    }
    if samples.len() < 4 {
        return Err(DynamicsError::EmptyFitWindow);
    }
    // Least-squares slope.
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &samples {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    Ok(num / den)
}

/// Brackets the instability threshold dynamically: bisection on the sign of
/// the measured modal growth rate of a small eigen perturbation.
pub fn dynamic_critical_reynolds(
    lambda: f64,
    geom: GeometryParams,
    template: &SimConfig,
    mut r_lo: f64,
    mut r_hi: f64,
    rel_tol: f64,
) -> Result<f64, DynamicsError> {
    let probe = |r: f64| -> Result<f64, DynamicsError> {
        let phys = PhysicalParams::new(lambda, r)?;
        let eig = crate::linstab::sigma_of_r(&phys, &geom)?;
        let mut config = *template;
        config.phys = phys;
        config.geom = geom;
        measure_modal_growth_rate(&config, &eig, 1e-4, 400.0, 2600.0)
    };
    let lo_rate = probe(r_lo)?;
    let hi_rate = probe(r_hi)?;
    if !(lo_rate < 0.0 && hi_rate > 0.0) {
        return Err(DynamicsError::ThresholdNotBracketed { r_lo, r_hi });
    }
    while r_hi - r_lo > rel_tol * 0.5 * (r_hi + r_lo) {
        let mid = 0.5 * (r_lo + r_hi);
        if probe(mid)? > 0.0 {
            r_hi = mid;
        } else {
            r_lo = mid;
        }
    }
    Ok(0.5 * (r_lo + r_hi))
}
