//! Mass transfer between the two phases as a dynamical system on the phase
//! densities at fixed bulk density:
//!
//! ```text
//! rho'  = 0
//! rho1' = -(rho - rho1)(rho - rho2) [rho2 (mu(rho2) - mu(rho1)) + p(rho1) - p(rho2)]
//! rho2' =  (rho - rho1)(rho - rho2) [rho1 (mu(rho1) - mu(rho2)) - p(rho1) + p(rho2)]
//! ```
//!
//! The mixture free energy `F(rho, rho1, rho2)` decreases along its
//! trajectories. Rest points are the pure states (`rho = rho1` or
//! `rho = rho2`), the degenerate states `rho1 = rho2`, and the Maxwell
//! mixture.

use crate::equilibrium::{maxwell_construction, MixtureState};
use crate::error::{Error, Result};
use crate::thermo::{ThermoParams, DENSITY_GUARD};

/// Phase densities closer than this are considered one phase when
/// classifying a rest point.
pub const PHASE_TOL: f64 = 1e-6;

/// Right-hand side of the transfer system (before the `1/epsilon` scaling).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SourceRate {
    pub drho1_dt: f64,
    pub drho2_dt: f64,
}

impl SourceRate {
    /// The bulk density never changes under relaxation.
    pub const DRHO_DT: f64 = 0.0;

    pub fn max_norm(&self) -> f64 {
        self.drho1_dt.abs().max(self.drho2_dt.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationSettings {
    /// Relaxation time.
    pub epsilon: f64,
    /// Upper bound on the per-substep relative density change, and on
    /// `h |J| / epsilon`.
    pub max_substep_rate: f64,
    /// Phase densities are projected into `[delta, 1/b - delta]`.
    pub projection_delta: f64,
    pub max_substeps: usize,
}

impl Default for RelaxationSettings {
    fn default() -> Self {
        RelaxationSettings {
            epsilon: 1e-3,
            max_substep_rate: 0.1,
            projection_delta: 1e-10,
            max_substeps: 1_000_000,
        }
    }
}

impl RelaxationSettings {
    pub fn with_epsilon(epsilon: f64) -> Self {
        RelaxationSettings {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Validation(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.max_substep_rate > 0.0 && self.max_substep_rate <= 1.0) {
            return Err(Error::Validation(format!(
                "max_substep_rate must lie in (0, 1], got {}",
                self.max_substep_rate
            )));
        }
        if !(self.projection_delta > DENSITY_GUARD) {
            return Err(Error::Validation(format!(
                "projection_delta must exceed {DENSITY_GUARD:e}, got {}",
                self.projection_delta
            )));
        }
        if self.max_substeps == 0 {
            return Err(Error::Validation("max_substeps must be positive".into()));
        }
        Ok(())
    }
}

/// Rest point type of the transfer system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// Only phase 1 present (`rho = rho1`, or both phases indistinguishable).
    Pure1,
    /// Only phase 2 present (`rho = rho2`).
    Pure2,
    /// Both phases present at equal pressure and chemical potential.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub state: MixtureState,
    pub kind: EquilibriumKind,
    /// Max-norm of the unscaled right-hand side at `state`.
    pub residual: f64,
    pub substeps: usize,
    /// Distance to the Maxwell pair, for mixtures below the critical temperature.
    pub maxwell_deviation: Option<f64>,
}

struct Evaluation {
    rate: SourceRate,
    jacobian: [[f64; 2]; 2],
}

fn evaluate(state: &MixtureState, params: &ThermoParams) -> Result<Evaluation> {
    let MixtureState { rho, rho1, rho2 } = *state;
    let q1 = params.potentials(rho1)?;
    let q2 = params.potentials(rho2)?;
    let prefactor = (rho - rho1) * (rho - rho2);
    let g1 = rho2 * (q2.chemical_potential - q1.chemical_potential) + q1.pressure - q2.pressure;
    let g2 = rho1 * (q1.chemical_potential - q2.chemical_potential) - q1.pressure + q2.pressure;
    let rate = SourceRate {
        drho1_dt: -prefactor * g1,
        drho2_dt: prefactor * g2,
    };

    // With p' = rho mu':
    //   dg1/drho1 = (rho1 - rho2) mu'(rho1),  dg1/drho2 = mu(rho2) - mu(rho1)
    //   dg2/drho1 = mu(rho1) - mu(rho2),      dg2/drho2 = (rho2 - rho1) mu'(rho2)
    let dmu1 = q1.pressure_derivative / rho1;
    let dmu2 = q2.pressure_derivative / rho2;
    let dmu = q2.chemical_potential - q1.chemical_potential;
    let jacobian = [
        [
            (rho - rho2) * g1 - prefactor * (rho1 - rho2) * dmu1,
            (rho - rho1) * g1 - prefactor * dmu,
        ],
        [
            -(rho - rho2) * g2 - prefactor * dmu,
            -(rho - rho1) * g2 + prefactor * (rho2 - rho1) * dmu2,
        ],
    ];
    Ok(Evaluation { rate, jacobian })
}

/// `(rho1', rho2')` of the transfer system.
pub fn source_rhs(state: &MixtureState, params: &ThermoParams) -> Result<SourceRate> {
    Ok(evaluate(state, params)?.rate)
}

/// Analytic Jacobian `d(rho1', rho2') / d(rho1, rho2)`.
pub fn source_jacobian(state: &MixtureState, params: &ThermoParams) -> Result<[[f64; 2]; 2]> {
    Ok(evaluate(state, params)?.jacobian)
}

fn row_sum_norm(j: &[[f64; 2]; 2]) -> f64 {
    (j[0][0].abs() + j[0][1].abs()).max(j[1][0].abs() + j[1][1].abs())
}

/// Largest admissible step in units of `h / epsilon`.
fn max_scaled_step(
    state: &MixtureState,
    eval: &Evaluation,
    settings: &RelaxationSettings,
    params: &ThermoParams,
) -> f64 {
    let room = state
        .rho1
        .min(params.max_density() - state.rho2)
        .min(state.rho2 - state.rho1);
    let by_change = settings.max_substep_rate * room / eval.rate.max_norm();
    let jn = row_sum_norm(&eval.jacobian);
    let by_stability = if jn > 0.0 {
        settings.max_substep_rate / jn
    } else {
        f64::INFINITY
    };
    by_change.min(by_stability)
}

/// Keeps `delta <= rho1 <= rho <= rho2 <= 1/b - delta`.
fn project(mut s: MixtureState, delta: f64, params: &ThermoParams) -> MixtureState {
    if s.rho1 > s.rho2 {
        std::mem::swap(&mut s.rho1, &mut s.rho2);
    }
    let hi = params.max_density() - delta;
    s.rho1 = s.rho1.clamp(delta, hi);
    s.rho2 = s.rho2.clamp(delta, hi);
    if s.rho < s.rho1 {
        s.rho1 = s.rho;
    }
    if s.rho > s.rho2 {
        s.rho2 = s.rho;
    }
    s
}

fn advance(s: &MixtureState, rate: &SourceRate, scaled_h: f64) -> MixtureState {
    MixtureState {
        rho: s.rho,
        rho1: s.rho1 + scaled_h * rate.drho1_dt,
        rho2: s.rho2 + scaled_h * rate.drho2_dt,
    }
}

/// One explicit Euler step of length `h` on `(1/epsilon) rhs`, followed by
/// the projection onto admissible states.
pub fn euler_substep(
    state: &MixtureState,
    h: f64,
    settings: &RelaxationSettings,
    params: &ThermoParams,
) -> Result<MixtureState> {
    let rate = source_rhs(state, params)?;
    let next = advance(state, &rate, h / settings.epsilon);
    Ok(project(next, settings.projection_delta, params))
}

/// Advances the phase densities by `dt` with sub-cycled explicit Euler.
///
/// Before each substep the remaining interval is split into the smallest
/// number of equal pieces that respects both the relative-change bound and
/// `h |J| / epsilon <= max_substep_rate`.
pub fn relax_step(
    state: &MixtureState,
    dt: f64,
    settings: &RelaxationSettings,
    params: &ThermoParams,
) -> Result<MixtureState> {
    relax_step_observed(state, dt, settings, params, |_| {})
}

/// [`relax_step`] calling `observer` after every substep.
pub fn relax_step_observed<O>(
    state: &MixtureState,
    dt: f64,
    settings: &RelaxationSettings,
    params: &ThermoParams,
    mut observer: O,
) -> Result<MixtureState>
where
    O: FnMut(&MixtureState),
{
    if !(dt > 0.0) {
        return Err(Error::Validation(format!(
            "relaxation dt must be positive, got {dt}"
        )));
    }
    state.validate()?;
    let mut s = *state;
    let mut remaining = dt;
    let mut used = 0usize;
    while remaining > 0.0 {
        let eval = evaluate(&s, params)?;
        if eval.rate.max_norm() == 0.0 {
            break;
        }
        let h_max = settings.epsilon * max_scaled_step(&s, &eval, settings, params);
        let pieces = (remaining / h_max).ceil().max(1.0);
        if used as f64 + pieces > settings.max_substeps as f64 {
            return Err(Error::StiffnessOverflow {
                required: used as f64 + pieces,
                ceiling: settings.max_substeps,
            });
        }
        let h = remaining / pieces;
        s = project(
            advance(&s, &eval.rate, h / settings.epsilon),
            settings.projection_delta,
            params,
        );
        used += 1;
        observer(&s);
        remaining = if pieces == 1.0 { 0.0 } else { remaining - h };
    }
    Ok(s)
}

/// Integrates the transfer system until `|rhs| < tol`, taking the largest
/// admissible substep each time, and classifies the rest point.
pub fn find_equilibrium(
    state: &MixtureState,
    settings: &RelaxationSettings,
    params: &ThermoParams,
    tol: f64,
    budget: usize,
) -> Result<EquilibriumReport> {
    state.validate()?;
    let mut s = *state;
    let mut substeps = 0usize;
    loop {
        let eval = evaluate(&s, params)?;
        let residual = eval.rate.max_norm();
        if residual < tol {
            let kind = classify_rest_point(&s);
            let maxwell_deviation = match kind {
                EquilibriumKind::Mixture if params.is_subcritical() => {
                    let sat = maxwell_construction(params)?;
                    Some(
                        (s.rho1 - sat.rho1_star)
                            .abs()
                            .max((s.rho2 - sat.rho2_star).abs()),
                    )
                }
                _ => None,
            };
            return Ok(EquilibriumReport {
                state: s,
                kind,
                residual,
                substeps,
                maxwell_deviation,
            });
        }
        if substeps >= budget {
            return Err(Error::NotConverged { residual, budget });
        }
        let scaled = max_scaled_step(&s, &eval, settings, params);
        s = project(
            advance(&s, &eval.rate, scaled),
            settings.projection_delta,
            params,
        );
        substeps += 1;
    }
}

fn classify_rest_point(s: &MixtureState) -> EquilibriumKind {
    if s.rho - s.rho1 <= PHASE_TOL {
        EquilibriumKind::Pure1
    } else if s.rho2 - s.rho <= PHASE_TOL {
        EquilibriumKind::Pure2
    } else {
        EquilibriumKind::Mixture
    }
}
