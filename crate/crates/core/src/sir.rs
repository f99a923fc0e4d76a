//! Damped SIR difference model: simulation, small-outbreak closed form,
//! parameter mappings to IDEA and Farr's K, trajectory distance, and the
//! (r0, ρ) parameter-space sweep.
//!
//! The model steps `S_{t+1} = S_t − R_e(t)·I_t`, `I_{t+1} = R_e(t)·I_t`
//! with `R_e(t) = r0_sir·(S_t/N)·ρ^t`: standard discrete-generation SIR
//! plus a geometric damping `ρ^t` standing in for improving control. While
//! the outbreak stays small relative to N, the susceptible ratio is ≈ 1 and
//! incidence follows the closed form `i0·r0^t·ρ^(t(t−1)/2)`, which is an
//! IDEA curve with `r0_idea = r0_sir/√ρ`, `d = 1/√ρ − 1`; the models only
//! diverge once susceptible depletion bites.

use rayon::prelude::*;
use serde::Serialize;
use std::io;

use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::idea::IdeaParams;

/// Damped SIR parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    r0_sir: f64,
    rho: f64,
    population: f64,
    i0: f64,
}

impl SirParams {
    /// Validates `r0_sir > 0`, `0 < ρ ≤ 1`, `N > 0`, `0 < i0 ≤ N`.
    pub fn new(r0_sir: f64, rho: f64, population: f64, i0: f64) -> Result<Self> {
        if !(r0_sir > 0.0 && r0_sir.is_finite()) {
            return Err(Error::validation(format!(
                "basic reproduction number must be positive and finite, got {r0_sir}"
            )));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::validation(format!(
                "dampening parameter must lie in (0, 1], got {rho}"
            )));
        }
        if !(population > 0.0 && population.is_finite()) {
            return Err(Error::validation(format!(
                "population must be positive and finite, got {population}"
            )));
        }
        if !(i0 > 0.0 && i0 <= population) {
            return Err(Error::validation(format!(
                "initial cases must satisfy 0 < i0 <= population, got {i0}"
            )));
        }
        Ok(SirParams {
            r0_sir,
            rho,
            population,
            i0,
        })
    }

    pub fn r0_sir(&self) -> f64 {
        self.r0_sir
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }
}

/// Output of [`simulate_damped_sir`]: three aligned series of length
/// `n_generations + 1`, indexed by generation `t = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SirTrajectory {
    incidence: Vec<f64>,
    susceptibles: Vec<f64>,
    effective_r: Vec<f64>,
    depleted_at: Option<usize>,
    population: f64,
}

impl SirTrajectory {
    /// Incident cases `I_t`, `t = 0..=n`. Not clamped: a one-step overshoot
    /// can infect more people than remain susceptible.
    pub fn incidence(&self) -> &[f64] {
        &self.incidence
    }

    /// Susceptibles `S_t`, clamped at 0.
    pub fn susceptibles(&self) -> &[f64] {
        &self.susceptibles
    }

    /// Effective reproduction number `R_e(t) = r0·(S_t/N)·ρ^t`.
    pub fn effective_r(&self) -> &[f64] {
        &self.effective_r
    }

    /// First generation at which susceptibles reached 0, if any.
    pub fn depleted_at(&self) -> Option<usize> {
        self.depleted_at
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    /// Cumulative infected fraction `(N − S_final)/N`.
    pub fn attack_fraction(&self) -> f64 {
        let s_final = *self.susceptibles.last().expect("non-empty trajectory");
        (self.population - s_final) / self.population
    }

    /// Number of generations simulated (series length minus the t=0 state).
    pub fn n_generations(&self) -> usize {
        self.incidence.len() - 1
    }
}

/// Iterates the damped difference equations from `S_0 = N − i0`,
/// `I_0 = i0` for `n_generations` steps.
///
/// The damping exponent starts at 0 for the step producing `I_1`. If a step
/// would drive susceptibles negative they are clamped to 0 and the
/// depletion generation is recorded; incidence itself is not clamped.
pub fn simulate_damped_sir(params: &SirParams, n_generations: u32) -> SirTrajectory {
    let n = n_generations as usize;
    let mut incidence = Vec::with_capacity(n + 1);
    let mut susceptibles = Vec::with_capacity(n + 1);
    let mut effective_r = Vec::with_capacity(n + 1);

    let population = params.population;
    let mut s = population - params.i0;
    let mut i = params.i0;
    let mut damping = 1.0;
    let mut depleted_at = if s <= 0.0 { Some(0) } else { None };
    s = s.max(0.0);

    for t in 0..=n {
        let re = params.r0_sir * (s / population) * damping;
        incidence.push(i);
        susceptibles.push(s);
        effective_r.push(re);
        if t < n {
            let new_i = re * i;
            let mut new_s = s - new_i;
            if new_s <= 0.0 {
                new_s = 0.0;
                if depleted_at.is_none() {
                    depleted_at = Some(t + 1);
                }
            }
            i = new_i;
            s = new_s;
            damping *= params.rho;
        }
    }

    SirTrajectory {
        incidence,
        susceptibles,
        effective_r,
        depleted_at,
        population,
    }
}

/// Incidence the damped model produces while depletion is negligible:
/// `i0 · r0^t · ρ^(t(t−1)/2)`.
///
/// Evaluated in log space so large `t` underflows to 0 rather than passing
/// through an inf·0 intermediate.
pub fn closed_form_small_outbreak(params: &SirParams, t: u32) -> f64 {
    let tf = t as f64;
    let rho_exponent = (u64::from(t) * u64::from(t.saturating_sub(1)) / 2) as f64;
    params.i0 * (tf * params.r0_sir.ln() + rho_exponent * params.rho.ln()).exp()
}

/// The IDEA curve equivalent to a damped SIR parameterization:
/// `r0_idea = r0_sir/√ρ`, `d = 1/√ρ − 1`.
///
/// With `i0 = 1` the equivalence is exact: the IDEA incidence reproduces
/// [`closed_form_small_outbreak`] at every generation.
pub fn map_sir_to_idea(params: &SirParams) -> Result<IdeaParams> {
    let sqrt_rho = params.rho.sqrt();
    IdeaParams::new(params.r0_sir / sqrt_rho, 1.0 / sqrt_rho - 1.0)
}

/// Farr's K implied by the damping parameter: `K = ρ²`.
pub fn map_rho_to_k(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::domain(format!(
            "dampening parameter must lie in (0, 1], got {rho}"
        )));
    }
    Ok(rho * rho)
}

/// The mapped IDEA incidence scaled by `i0`, evaluated at
/// `t = 1..=n_generations`; this is the curve the sweep and the overlay
/// compare the simulation against.
pub fn mapped_idea_curve(params: &SirParams, n_generations: u32) -> Result<Vec<f64>> {
    let idea = map_sir_to_idea(params)?;
    (1..=n_generations)
        .map(|t| Ok(params.i0 * idea.incidence(t)?))
        .collect()
}

/// Euclidean distance `δ = sqrt(Σ (a_k − b_k)²)` between two equal-length
/// incidence lists.
pub fn trajectory_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "trajectory lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::validation("trajectory distance needs length >= 1"));
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let r = x - y;
            r * r
        })
        .sum();
    Ok(sum.sqrt())
}

/// Sweep configuration. [`SweepConfig::new`] applies the defaults
/// `population = 10⁸`, `i0 = 1`, `parallel = true`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub r0_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub population: f64,
    pub i0: f64,
    pub n_generations: u32,
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(r0_grid: Vec<f64>, rho_grid: Vec<f64>, n_generations: u32) -> Self {
        SweepConfig {
            r0_grid,
            rho_grid,
            population: 1e8,
            i0: 1.0,
            n_generations,
            parallel: true,
        }
    }
}

/// Sweep output: matrices indexed `[r0 row][rho column]`, row-major.
///
/// `delta` is the raw Euclidean distance between the simulated and mapped
/// IDEA incidence over `t = 1..=n`; `delta_normalized` divides by the peak
/// simulated incidence (0 stays 0 if both curves vanish);
/// `depletion_fraction` is the attack fraction `(N − S_final)/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub r0_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub delta: Vec<Vec<f64>>,
    pub delta_normalized: Vec<Vec<f64>>,
    pub depletion_fraction: Vec<Vec<f64>>,
}

impl SweepResult {
    /// Writes long-format rows `(r0, rho, delta, delta_normalized,
    /// attack_fraction)`, r0-major, with 12 significant digits.
    pub fn to_long_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r0", "rho", "delta", "delta_normalized", "attack_fraction"])
            .map_err(csv_io)?;
        for (i, &r0) in self.r0_grid.iter().enumerate() {
            for (j, &rho) in self.rho_grid.iter().enumerate() {
                w.write_record([
                    fmt_sig(r0, 12),
                    fmt_sig(rho, 12),
                    fmt_sig(self.delta[i][j], 12),
                    fmt_sig(self.delta_normalized[i][j], 12),
                    fmt_sig(self.depletion_fraction[i][j], 12),
                ])
                .map_err(csv_io)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Serializes the grids and row-major matrices.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sweep result serializes")
    }
}

fn csv_io(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::Io(io_err),
        other => Error::validation(format!("CSV write failed: {other:?}")),
    }
}

struct Cell {
    delta: f64,
    delta_normalized: f64,
    attack_fraction: f64,
}

fn sweep_cell(r0: f64, rho: f64, config: &SweepConfig) -> Result<Cell> {
    let params = SirParams::new(r0, rho, config.population, config.i0)
        .map_err(|e| Error::validation(format!("sweep cell (r0={r0}, rho={rho}): {e}")))?;
    let trajectory = simulate_damped_sir(&params, config.n_generations);
    let idea_curve = mapped_idea_curve(&params, config.n_generations)
        .map_err(|e| Error::validation(format!("sweep cell (r0={r0}, rho={rho}): {e}")))?;
    let sim = &trajectory.incidence()[1..];
    let delta = trajectory_distance(sim, &idea_curve)?;
    let peak = sim.iter().copied().fold(0.0f64, f64::max);
    let delta_normalized = if peak > 0.0 {
        delta / peak
    } else if delta == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(Cell {
        delta,
        delta_normalized,
        attack_fraction: trajectory.attack_fraction(),
    })
}

/// Simulates every `(r0, ρ)` cell, comparing the damped SIR incidence with
/// its mapped IDEA counterpart.
///
/// Cells are independent; the result is identical whether computed
/// sequentially or in parallel, and is laid out r0-major.
pub fn sweep_parameter_space(config: &SweepConfig) -> Result<SweepResult> {
    if config.r0_grid.is_empty() || config.rho_grid.is_empty() {
        return Err(Error::validation("sweep grids must be non-empty"));
    }
    if config.n_generations < 1 {
        return Err(Error::validation("sweep needs at least 1 generation"));
    }

    let row = |&r0: &f64| -> Result<Vec<Cell>> {
        config
            .rho_grid
            .iter()
            .map(|&rho| sweep_cell(r0, rho, config))
            .collect()
    };
    let rows: Vec<Vec<Cell>> = if config.parallel {
        config.r0_grid.par_iter().map(row).collect::<Result<_>>()?
    } else {
        config.r0_grid.iter().map(row).collect::<Result<_>>()?
    };

    let extract = |f: fn(&Cell) -> f64| -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.iter().map(f).collect()).collect()
    };
    Ok(SweepResult {
        r0_grid: config.r0_grid.clone(),
        rho_grid: config.rho_grid.clone(),
        delta: extract(|c| c.delta),
        delta_normalized: extract(|c| c.delta_normalized),
        depletion_fraction: extract(|c| c.attack_fraction),
    })
}

#[cfg(test)]
mod tests {
    // Oracle constants keep their full frozen digits.
    #![allow(clippy::excessive_precision)]
    use super::*;
    use approx::assert_relative_eq;

    fn params(r0: f64, rho: f64, population: f64, i0: f64) -> SirParams {
        SirParams::new(r0, rho, population, i0).unwrap()
    }

    #[test]
    fn param_validation() {
        assert!(SirParams::new(0.0, 0.9, 1e6, 1.0).is_err());
        assert!(SirParams::new(-1.0, 0.9, 1e6, 1.0).is_err());
        assert!(SirParams::new(2.0, 0.0, 1e6, 1.0).is_err());
        assert!(SirParams::new(2.0, 1.1, 1e6, 1.0).is_err());
        assert!(SirParams::new(2.0, -0.5, 1e6, 1.0).is_err());
        assert!(SirParams::new(2.0, 0.9, 0.0, 1.0).is_err());
        assert!(SirParams::new(2.0, 0.9, 1e6, 0.0).is_err());
        assert!(SirParams::new(2.0, 0.9, 1e6, 1e7).is_err());
        assert!(SirParams::new(2.0, 1.0, 1e6, 1e6).is_ok());
    }

    #[test]
    fn undamped_large_population_doubles() {
        let traj = simulate_damped_sir(&params(2.0, 1.0, 1e9, 1.0), 3);
        let expected = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(traj.incidence().len(), 4);
        for (got, want) in traj.incidence().iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-7);
        }
        assert_eq!(traj.depleted_at(), None);
    }

    #[test]
    fn damped_matches_closed_form_example() {
        let traj = simulate_damped_sir(&params(2.0, 0.9, 1e9, 1.0), 3);
        // 2^3 * 0.9^(3*2/2) = 5.832
        assert_relative_eq!(traj.incidence()[3], 5.832, max_relative = 1e-7);
    }

    #[test]
    fn series_lengths_are_n_plus_one() {
        let traj = simulate_damped_sir(&params(2.0, 0.9, 1e6, 1.0), 10);
        assert_eq!(traj.incidence().len(), 11);
        assert_eq!(traj.susceptibles().len(), 11);
        assert_eq!(traj.effective_r().len(), 11);
        assert_eq!(traj.n_generations(), 10);
    }

    #[test]
    fn tiny_population_depletes_and_clamps() {
        let traj = simulate_damped_sir(&params(2.0, 1.0, 2.0, 1.0), 3);
        assert_eq!(traj.depleted_at(), Some(1));
        assert_eq!(traj.susceptibles()[1], 0.0);
        assert_eq!(traj.incidence()[2], 0.0);
        assert_eq!(traj.attack_fraction(), 1.0);
    }

    #[test]
    fn whole_population_initially_infected() {
        let traj = simulate_damped_sir(&params(2.0, 1.0, 5.0, 5.0), 2);
        assert_eq!(traj.depleted_at(), Some(0));
        assert_eq!(traj.susceptibles()[0], 0.0);
        assert_eq!(traj.incidence()[1], 0.0);
    }

    #[test]
    fn overshoot_clamps_susceptibles_but_not_incidence() {
        // R_e(0)*I_0 = 8*0.9 > S_0 = 1: one step infects more than remain.
        let traj = simulate_damped_sir(&params(10.0, 1.0, 10.0, 9.0), 2);
        assert_eq!(traj.susceptibles()[1], 0.0);
        assert!(traj.incidence()[1] > traj.susceptibles()[0]);
        assert_eq!(traj.depleted_at(), Some(1));
    }

    #[test]
    fn closed_form_examples() {
        let p = params(3.5, 0.85, 1e8, 1.0);
        assert_eq!(closed_form_small_outbreak(&p, 0), 1.0);
        assert_relative_eq!(closed_form_small_outbreak(&p, 1), 3.5, max_relative = 1e-14);
        // 3.5^4 * 0.85^6, frozen from a high-precision arithmetic oracle.
        assert_relative_eq!(
            closed_form_small_outbreak(&p, 4),
            56.5959991884765625,
            max_relative = 1e-13
        );

        let scaled = params(3.5, 0.85, 1e8, 7.0);
        assert_eq!(closed_form_small_outbreak(&scaled, 0), 7.0);
    }

    #[test]
    fn mapping_examples() {
        let undamped = map_sir_to_idea(&params(2.0, 1.0, 1e8, 1.0)).unwrap();
        assert_eq!(undamped.r0(), 2.0);
        assert_eq!(undamped.d(), 0.0);

        // Frozen oracle values for r0/sqrt(0.85) and 1/sqrt(0.85) - 1.
        let mapped = map_sir_to_idea(&params(3.5, 0.85, 1e8, 1.0)).unwrap();
        assert_relative_eq!(mapped.r0(), 3.796283011826483, max_relative = 1e-15);
        assert_relative_eq!(mapped.d(), 0.08465228909328086, max_relative = 1e-15);
    }

    #[test]
    fn rho_to_k_examples() {
        assert_eq!(map_rho_to_k(1.0).unwrap(), 1.0);
        assert_eq!(map_rho_to_k(0.5).unwrap(), 0.25);
        assert_relative_eq!(map_rho_to_k(0.85).unwrap(), 0.7225, max_relative = 1e-12);
        for rho in [0.0, -0.1, 1.0000001, f64::NAN] {
            assert!(map_rho_to_k(rho).is_err());
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(trajectory_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(trajectory_distance(&[1.0, 2.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(
            trajectory_distance(&[0.0, 0.0, 0.0], &[3.0, 4.0, 0.0]).unwrap(),
            5.0
        );
        assert!(trajectory_distance(&[1.0], &[1.0, 2.0]).is_err());
        assert!(trajectory_distance(&[], &[]).is_err());
    }

    #[test]
    fn sweep_shape_and_layout() {
        let config = SweepConfig::new(vec![1.5, 3.0], vec![0.8, 1.0], 10);
        let result = sweep_parameter_space(&config).unwrap();
        assert_eq!(result.delta.len(), 2);
        assert_eq!(result.delta[0].len(), 2);
        assert_eq!(result.delta_normalized.len(), 2);
        assert_eq!(result.depletion_fraction.len(), 2);

        let mut buf = Vec::new();
        result.to_long_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "r0,rho,delta,delta_normalized,attack_fraction");
        assert!(lines[1].starts_with("1.5,0.8,"));
        assert!(lines[2].starts_with("1.5,1,"));
        assert!(lines[3].starts_with("3,0.8,"));
    }

    #[test]
    fn sweep_fixed_point_cell_is_tiny() {
        // At (r0=1, rho=1) both curves sit at i0 up to susceptible depletion
        // of order i0/N per generation, so delta is small but not exactly 0.
        let config = SweepConfig::new(vec![1.0], vec![1.0], 15);
        let result = sweep_parameter_space(&config).unwrap();
        assert!(result.delta[0][0] < 1e-5, "delta = {}", result.delta[0][0]);
        assert!(result.delta_normalized[0][0] < 1e-5);
    }

    #[test]
    fn sweep_parallel_matches_sequential_bitwise() {
        let grid_r0: Vec<f64> = (1..=5).map(|i| 1.0 + i as f64).collect();
        let grid_rho: Vec<f64> = (1..=4).map(|i| 0.5 + 0.1 * i as f64).collect();
        let mut config = SweepConfig::new(grid_r0, grid_rho, 12);
        config.parallel = true;
        let parallel = sweep_parameter_space(&config).unwrap();
        config.parallel = false;
        let sequential = sweep_parameter_space(&config).unwrap();
        assert_eq!(parallel, sequential);
    }

    #[test]
    fn sweep_rejects_bad_cells_by_name() {
        let config = SweepConfig::new(vec![2.0, -1.0], vec![0.9], 5);
        let err = sweep_parameter_space(&config).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("r0=-1"), "message: {message}");

        let empty = SweepConfig::new(vec![], vec![0.9], 5);
        assert!(sweep_parameter_space(&empty).is_err());
        let zero_gens = SweepConfig::new(vec![2.0], vec![0.9], 0);
        assert!(sweep_parameter_space(&zero_gens).is_err());
    }

    #[test]
    fn sweep_json_shape() {
        let config = SweepConfig::new(vec![2.0], vec![0.9], 5);
        let json = sweep_parameter_space(&config).unwrap().to_json();
        assert_eq!(json["r0_grid"].as_array().unwrap().len(), 1);
        assert_eq!(json["rho_grid"].as_array().unwrap().len(), 1);
        assert!(json["delta"][0][0].is_f64());
        assert!(json["delta_normalized"][0][0].is_f64());
        assert!(json["depletion_fraction"][0][0].is_f64());
    }

    #[test]
    fn figure_four_scenario_agrees_and_diverges() {
        let good = params(3.5, 0.85, 1e8, 1.0);
        let traj = simulate_damped_sir(&good, 15);
        let idea = mapped_idea_curve(&good, 15).unwrap();
        let sim = &traj.incidence()[1..];
        let delta = trajectory_distance(sim, &idea).unwrap();
        let peak = sim.iter().copied().fold(0.0f64, f64::max);
        assert!(delta / peak < 0.01, "normalized delta {}", delta / peak);

        let diverging = params(5.0, 0.99, 1e8, 1.0);
        let traj = simulate_damped_sir(&diverging, 15);
        let idea = mapped_idea_curve(&diverging, 15).unwrap();
        let sim = &traj.incidence()[1..];
        let delta = trajectory_distance(sim, &idea).unwrap();
        let peak = sim.iter().copied().fold(0.0f64, f64::max);
        assert!(traj.attack_fraction() > 0.5);
        assert!(delta / peak > 0.1, "normalized delta {}", delta / peak);
    }
}
