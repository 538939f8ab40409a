//! Phase equilibrium of two immiscible phases of the same van der Waals
//! fluid: spinodal bounds, the Maxwell saturation pair, volume fractions and
//! the mixture free energy.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{bisect, integrate};
use crate::thermo::{Density, ThermoParams, DENSITY_GUARD};

/// Residual target of the Maxwell Newton iteration.
const MAXWELL_TOL: f64 = 1e-13;
const MAXWELL_MAX_ITER: usize = 60;
/// Accepted error of the equal-area rule evaluated by quadrature.
pub const AREA_RULE_TOL: f64 = 1e-6;

/// Densities bounding the spinodal zone, where `p'(rho) < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinodalBounds {
    pub rho_minus: f64,
    pub rho_plus: f64,
}

impl SpinodalBounds {
    pub fn contains(&self, rho: f64) -> bool {
        self.rho_minus <= rho && rho <= self.rho_plus
    }
}

/// Output of the Maxwell construction at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationData {
    pub rho1_star: f64,
    pub rho2_star: f64,
    pub p_star: f64,
    pub mu_star: f64,
    /// `|int_0^1 mu(rho2* + t (rho1* - rho2*)) dt - mu*|`.
    pub area_rule_residual: f64,
}

/// Stability region of a single-phase density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    PureGas,
    MetastableGas,
    Spinodal,
    MetastableLiquid,
    PureLiquid,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::PureGas => "pure gas",
            Region::MetastableGas => "metastable gas",
            Region::Spinodal => "spinodal",
            Region::MetastableLiquid => "metastable liquid",
            Region::PureLiquid => "pure liquid",
        };
        f.write_str(s)
    }
}

/// Bulk density and the two phase densities at one point.
///
/// Invariant: `rho1 <= rho <= rho2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureState {
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
}

impl MixtureState {
    /// Orders the phase densities and checks that `rho` lies between them.
    pub fn new(rho: f64, rho1: f64, rho2: f64) -> Result<Self> {
        let (rho1, rho2) = if rho1 <= rho2 {
            (rho1, rho2)
        } else {
            (rho2, rho1)
        };
        let state = MixtureState { rho, rho1, rho2 };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho1 <= self.rho && self.rho <= self.rho2) {
            return Err(Error::InvalidMixture(format!(
                "need rho1 <= rho <= rho2, got rho1 = {}, rho = {}, rho2 = {}",
                self.rho1, self.rho, self.rho2
            )));
        }
        Ok(())
    }

    /// `(alpha1, alpha2)`, taking `rho1 == rho2` as pure phase 1.
    pub fn fractions(&self) -> (f64, f64) {
        volume_fractions(self).unwrap_or((1.0, 0.0))
    }
}

/// Roots of `p'(rho) = 0`.
///
/// `p' = 0` is `R T = 2 a rho (1 - b rho)^2`; the right side rises on
/// `(0, 1/(3b))` and falls on `(1/(3b), 1/b)`, which gives one bracket per root.
pub fn spinodal_bounds(params: &ThermoParams) -> Result<SpinodalBounds> {
    if !params.is_subcritical() {
        return Err(Error::NoSpinodal {
            temperature: params.temperature(),
            critical: params.critical_temperature(),
        });
    }
    let dp = |r: f64| params.pressure_derivative(r);
    let mid = params.critical_density();
    let lo = DENSITY_GUARD * 2.0;
    let hi = params.max_density() - DENSITY_GUARD * 2.0;
    let rho_minus = bisect(dp, lo, mid, "spinodal bound rho-")?;
    let rho_plus = bisect(dp, mid, hi, "spinodal bound rho+")?;
    Ok(SpinodalBounds {
        rho_minus,
        rho_plus,
    })
}

/// Saturation densities from equal pressures and chemical potentials.
///
/// Newton on `(p(r1) - p(r2), mu(r1) - mu(r2)) = 0`, falling back to a
/// bisection on the saturation pressure if an iterate leaves the
/// gas/liquid brackets.
pub fn maxwell_construction(params: &ThermoParams) -> Result<SaturationData> {
    let spin = spinodal_bounds(params)?;
    let (rho1, rho2) = match maxwell_newton(params, &spin)? {
        Some(pair) => pair,
        None => maxwell_pressure_bisection(params, &spin)?,
    };
    saturation_from_pair(params, &spin, rho1, rho2)
}

pub(crate) fn maxwell_newton(
    params: &ThermoParams,
    spin: &SpinodalBounds,
) -> Result<Option<(f64, f64)>> {
    let upper = params.max_density();
    let mut r1 = 0.5 * spin.rho_minus;
    let mut r2 = 0.5 * (spin.rho_plus + upper);
    for _ in 0..MAXWELL_MAX_ITER {
        let g = params.potentials(r1)?;
        let l = params.potentials(r2)?;
        let f1 = g.pressure - l.pressure;
        let f2 = g.chemical_potential - l.chemical_potential;
        if f1.abs().max(f2.abs()) < MAXWELL_TOL {
            return Ok(Some((r1, r2)));
        }
        // Jacobian [[p'1, -p'2], [p'1/r1, -p'2/r2]].
        let j11 = g.pressure_derivative;
        let j12 = -l.pressure_derivative;
        let j21 = g.pressure_derivative / r1;
        let j22 = -l.pressure_derivative / r2;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Ok(None);
        }
        let d1 = (f1 * j22 - f2 * j12) / det;
        let d2 = (j11 * f2 - j21 * f1) / det;
        r1 -= d1;
        r2 -= d2;
        let inside = r1 > DENSITY_GUARD
            && r1 < spin.rho_minus
            && r2 > spin.rho_plus
            && r2 < upper - DENSITY_GUARD;
        if !inside {
            return Ok(None);
        }
        if d1.abs().max(d2.abs()) < 1e-15 {
            return Ok(Some((r1, r2)));
        }
    }
    Ok(None)
}

/// For a trial pressure, invert `p` on the gas branch `(0, rho-)` and the
/// liquid branch `(rho+, 1/b)`, then bisect on the chemical potential gap.
pub(crate) fn maxwell_pressure_bisection(
    params: &ThermoParams,
    spin: &SpinodalBounds,
) -> Result<(f64, f64)> {
    let lo_rho = 2.0 * DENSITY_GUARD;
    let hi_rho = params.max_density() - 2.0 * DENSITY_GUARD;
    let p_top = params.pressure(spin.rho_minus)?;
    let p_bottom = params
        .pressure(spin.rho_plus)?
        .max(params.pressure(lo_rho)?);

    let branches = |p_star: f64| -> Result<(f64, f64)> {
        let gas = bisect(
            |r| Ok(params.pressure(r)? - p_star),
            lo_rho,
            spin.rho_minus,
            "gas branch",
        )?;
        let liq = bisect(
            |r| Ok(params.pressure(r)? - p_star),
            spin.rho_plus,
            hi_rho,
            "liquid branch",
        )?;
        Ok((gas, liq))
    };
    let gap = |p_star: f64| -> Result<f64> {
        let (gas, liq) = branches(p_star)?;
        Ok(params.chemical_potential(gas)? - params.chemical_potential(liq)?)
    };
    let p_star = bisect(gap, p_bottom, p_top, "maxwell pressure bisection")?;
    branches(p_star)
}

fn saturation_from_pair(
    params: &ThermoParams,
    spin: &SpinodalBounds,
    rho1: f64,
    rho2: f64,
) -> Result<SaturationData> {
    if !(rho1 < spin.rho_minus && spin.rho_plus < rho2) {
        return Err(Error::ConvergenceFailure {
            what: "maxwell construction (pair outside gas/liquid branches)",
            iterations: MAXWELL_MAX_ITER,
        });
    }
    let p_star = params.pressure(rho1)?;
    let mu_star = params.chemical_potential(rho1)?;
    let area_rule_residual = (mean_chemical_potential(params, rho1, rho2)? - mu_star).abs();
    if area_rule_residual > AREA_RULE_TOL {
        return Err(Error::ConvergenceFailure {
            what: "maxwell construction (equal-area check)",
            iterations: MAXWELL_MAX_ITER,
        });
    }
    Ok(SaturationData {
        rho1_star: rho1,
        rho2_star: rho2,
        p_star,
        mu_star,
        area_rule_residual,
    })
}

/// `int_0^1 mu(rho2 + t (rho1 - rho2)) dt`, by 16-node Gauss-Legendre on
/// panels `[rho1, 2 rho1], [2 rho1, 4 rho1], ...` so that the logarithmic
/// behaviour of `mu` near a small `rho1` is resolved.
pub fn mean_chemical_potential(params: &ThermoParams, rho1: f64, rho2: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut left = rho1;
    while left < rho2 {
        let right = (2.0 * left).min(rho2);
        let right = if rho2 - right < 0.5 * left {
            rho2
        } else {
            right
        };
        total += integrate(|r| params.chemical_potential(r), left, right, 1, 16)?;
        left = right;
    }
    Ok(total / (rho2 - rho1))
}

/// Region of `rho` given saturation and spinodal data at the same
/// temperature. Spinodal bounds belong to the spinodal zone; saturation
/// densities to the metastable side.
pub fn classify(rho: Density, sat: &SaturationData, spin: &SpinodalBounds) -> Region {
    let rho = rho.value();
    if rho < sat.rho1_star {
        Region::PureGas
    } else if rho < spin.rho_minus {
        Region::MetastableGas
    } else if rho <= spin.rho_plus {
        Region::Spinodal
    } else if rho <= sat.rho2_star {
        Region::MetastableLiquid
    } else {
        Region::PureLiquid
    }
}

/// `alpha1 = (rho - rho2) / (rho1 - rho2)`, `alpha2 = 1 - alpha1`.
pub fn volume_fractions(state: &MixtureState) -> Result<(f64, f64)> {
    if state.rho1 == state.rho2 {
        return Err(Error::DegenerateMixture(state.rho1));
    }
    let alpha1 = (state.rho - state.rho2) / (state.rho1 - state.rho2);
    Ok((alpha1, 1.0 - alpha1))
}

/// `F = alpha1 f(rho1) + alpha2 f(rho2)`.
pub fn mixture_free_energy(state: &MixtureState, params: &ThermoParams) -> Result<f64> {
    let (a1, a2) = state.fractions();
    let f1 = params.free_energy(state.rho1)?;
    if a2 == 0.0 {
        return Ok(f1);
    }
    let f2 = params.free_energy(state.rho2)?;
    if a1 == 0.0 {
        return Ok(f2);
    }
    Ok(a1 * f1 + a2 * f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vdw(t: f64) -> ThermoParams {
        ThermoParams::reduced(t).unwrap()
    }

    #[test]
    fn spinodal_at_085() {
        let s = spinodal_bounds(&vdw(0.85)).unwrap();
        assert!((s.rho_minus - 0.581079).abs() < 1e-5);
        assert!((s.rho_plus - 1.488804).abs() < 1e-5);
        let p = vdw(0.85);
        assert!(p.pressure_derivative(s.rho_minus).unwrap().abs() < 1e-10);
        assert!(p.pressure_derivative(s.rho_plus).unwrap().abs() < 1e-10);
    }

    #[test]
    fn no_spinodal_at_or_above_critical() {
        assert!(matches!(
            spinodal_bounds(&vdw(1.0)),
            Err(Error::NoSpinodal { .. })
        ));
        assert!(matches!(
            maxwell_construction(&vdw(1.2)),
            Err(Error::NoSpinodal { .. })
        ));
    }

    #[test]
    fn spinodal_near_critical_matches_scan() {
        let p = vdw(0.99);
        let s = spinodal_bounds(&p).unwrap();
        // Oracle: sign changes of p' on a fine grid.
        let n = 300_000;
        let h = 2.9 / n as f64;
        let mut changes = Vec::new();
        let mut prev = p.pressure_derivative(h).unwrap();
        for i in 2..n {
            let x = i as f64 * h;
            let d = p.pressure_derivative(x).unwrap();
            if d.signum() != prev.signum() {
                changes.push(x - 0.5 * h);
            }
            prev = d;
        }
        assert_eq!(changes.len(), 2);
        assert!((s.rho_minus - changes[0]).abs() < h);
        assert!((s.rho_plus - changes[1]).abs() < h);
        assert!(s.rho_minus < 1.0 && 1.0 < s.rho_plus);
        let wide = spinodal_bounds(&vdw(0.95)).unwrap();
        assert!(wide.rho_plus - wide.rho_minus > s.rho_plus - s.rho_minus);
    }

    #[test]
    fn maxwell_at_085() {
        let p = vdw(0.85);
        let sat = maxwell_construction(&p).unwrap();
        assert!((sat.rho1_star - 0.319729).abs() < 1e-5);
        assert!((sat.rho2_star - 1.807140).abs() < 1e-5);
        assert!((sat.p_star - 0.504492).abs() < 1e-5);
        assert!((sat.mu_star.abs() - 3.977178).abs() < 1e-4);
        let r1 = p.potentials(sat.rho1_star).unwrap();
        let r2 = p.potentials(sat.rho2_star).unwrap();
        assert!((r1.pressure - r2.pressure).abs() < 1e-10);
        assert!((r1.chemical_potential - r2.chemical_potential).abs() < 1e-10);
        let energy_gap =
            r2.free_energy - r1.free_energy - sat.mu_star * (sat.rho2_star - sat.rho1_star);
        assert!(energy_gap.abs() < 1e-8);
        assert!(sat.area_rule_residual < 1e-10);
    }

    #[test]
    fn bisection_fallback_agrees_with_newton() {
        for t in [0.3, 0.6, 0.85, 0.97] {
            let p = vdw(t);
            let spin = spinodal_bounds(&p).unwrap();
            let (b1, b2) = maxwell_pressure_bisection(&p, &spin).unwrap();
            let sat = maxwell_construction(&p).unwrap();
            assert!((b1 - sat.rho1_star).abs() < 1e-9, "T = {t}");
            assert!((b2 - sat.rho2_star).abs() < 1e-9, "T = {t}");
        }
    }

    #[test]
    fn low_temperature_uses_fallback_when_needed() {
        // At low T the saturated vapour density is tiny and the liquid pressure
        // branch dips below zero; the construction must still succeed.
        let sat = maxwell_construction(&vdw(0.4)).unwrap();
        assert!(sat.rho1_star > 0.0 && sat.rho1_star < 0.01);
        assert!(sat.p_star > 0.0);
    }

    // Equal-area scan: for each p on a grid, invert both branches by plain
    // bisection and look for the sign change of the mu gap.
    fn scanned_saturation(p: &ThermoParams) -> (f64, f64) {
        let spin = spinodal_bounds(p).unwrap();
        let invert = |target: f64, mut lo: f64, mut hi: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if p.pressure(mid).unwrap() < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let top = p.pressure(spin.rho_minus).unwrap();
        let bottom = p.pressure(spin.rho_plus).unwrap().max(1e-9);
        let n = 4000;
        let mut prev: Option<(f64, f64, f64)> = None;
        for i in 1..n {
            let ps = bottom + (top - bottom) * i as f64 / n as f64;
            let g = invert(ps, 1e-9, spin.rho_minus);
            let l = invert(ps, spin.rho_plus, 2.999);
            let gap = p.chemical_potential(g).unwrap() - p.chemical_potential(l).unwrap();
            if let Some((pg, pl, pgap)) = prev {
                if pgap.signum() != gap.signum() {
                    return (0.5 * (pg + g), 0.5 * (pl + l));
                }
            }
            prev = Some((g, l, gap));
        }
        panic!("no sign change");
    }

    #[test]
    fn saturation_pair_narrows_with_temperature() {
        let (s1_85, s2_85) = scanned_saturation(&vdw(0.85));
        let (s1_90, s2_90) = scanned_saturation(&vdw(0.9));
        assert!(s1_90 > s1_85 && s2_90 < s2_85);
        let a = maxwell_construction(&vdw(0.85)).unwrap();
        let b = maxwell_construction(&vdw(0.9)).unwrap();
        assert!(b.rho1_star > a.rho1_star && b.rho2_star < a.rho2_star);
        assert!((b.rho1_star - s1_90).abs() < 1e-3);
        assert!((b.rho2_star - s2_90).abs() < 1e-3);
    }

    #[test]
    fn classify_paper_points() {
        let p = vdw(0.85);
        let sat = maxwell_construction(&p).unwrap();
        let spin = spinodal_bounds(&p).unwrap();
        let c = |r: f64| classify(Density::new(r, &p).unwrap(), &sat, &spin);
        assert_eq!(c(1.6), Region::MetastableLiquid);
        assert_eq!(c(0.2), Region::PureGas);
        assert_eq!(c(1.0), Region::Spinodal);
        assert_eq!(c(0.5), Region::MetastableGas);
        assert_eq!(c(2.0), Region::PureLiquid);
        assert_eq!(c(spin.rho_minus), Region::Spinodal);
        assert_eq!(c(spin.rho_plus), Region::Spinodal);
        assert_eq!(c(sat.rho1_star), Region::MetastableGas);
        assert_eq!(c(sat.rho2_star), Region::MetastableLiquid);
    }

    #[test]
    fn fractions() {
        let s = MixtureState::new(0.4, 0.4, 1.8).unwrap();
        assert_eq!(volume_fractions(&s).unwrap(), (1.0, 0.0));
        let s = MixtureState::new(1.1, 0.4, 1.8).unwrap();
        let (a1, a2) = volume_fractions(&s).unwrap();
        assert!((a1 - 0.5).abs() < 1e-15 && (a2 - 0.5).abs() < 1e-15);
        let s = MixtureState::new(1.0, 0.319729, 1.807140).unwrap();
        let (a1, _) = volume_fractions(&s).unwrap();
        // (1.0 - 1.807140) / (0.319729 - 1.807140)
        assert!((a1 - 0.807140 / 1.487411).abs() < 1e-15);
        assert!((a1 - 0.542_647_593_704_766_2).abs() < 1e-15);
        let s = MixtureState::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            volume_fractions(&s),
            Err(Error::DegenerateMixture(_))
        ));
        assert_eq!(s.fractions(), (1.0, 0.0));
    }

    #[test]
    fn mixture_state_ordering() {
        let s = MixtureState::new(1.0, 1.8, 0.4).unwrap();
        assert_eq!((s.rho1, s.rho2), (0.4, 1.8));
        assert!(MixtureState::new(2.0, 0.4, 1.8).is_err());
    }

    #[test]
    fn mixture_energy() {
        let p = vdw(0.85);
        let pure = MixtureState::new(0.7, 0.7, 1.9).unwrap();
        assert_eq!(
            mixture_free_energy(&pure, &p).unwrap(),
            p.free_energy(0.7).unwrap()
        );
        let sat = maxwell_construction(&p).unwrap();
        let mix = MixtureState::new(1.0, sat.rho1_star, sat.rho2_star).unwrap();
        assert!(mixture_free_energy(&mix, &p).unwrap() < p.free_energy(1.0).unwrap());
    }

    #[test]
    fn mixture_energy_at_printed_maxwell_pair() {
        // Oracle: alpha1 f(rho1) + alpha2 f(rho2) from a 40-digit evaluation.
        let p = vdw(0.85);
        let s = MixtureState::new(1.0, 0.319729, 1.807140).unwrap();
        let got = mixture_free_energy(&s, &p).unwrap();
        assert!((got - (-4.481_670_160_796_572)).abs() < 1e-13, "{got}");
    }
}
