//! Isothermal van der Waals fluid.
//!
//! Everything derives from the extensive Helmholtz free energy
//!
//! ```text
//! E(M, V) = -a M^2 / V + R T (M ln(M / (V - M b)) - M)
//! ```
//!
//! which is positively homogeneous of degree one, so all potentials are
//! functions of the density `rho = M / V` alone. Closed forms used below,
//! with `s = 1 - b rho`:
//!
//! ```text
//! f(rho)   = E(rho, 1)            = -a rho^2 + R T rho (ln(rho / s) - 1)
//! p(rho)   = -dE/dV (rho, 1)      = R T rho / s - a rho^2
//! mu(rho)  =  dE/dM (rho, 1)      = R T ln(rho / s) + R T b rho / s - 2 a rho
//! p'(rho)                         = R T / s^2 - 2 a rho
//! ```
//!
//! `mu` is obtained by differentiating `f` (the `ln` term gives
//! `R T (ln(rho/s) - 1) + R T (1 + b rho / s)`), `p` then follows from
//! `f = rho mu - p`, and `p' = rho mu'`.

use crate::error::{Error, Result};

/// Densities closer than this to `0` or `1/b` are rejected.
pub const DENSITY_GUARD: f64 = 1e-12;

/// Temperature and van der Waals constants of an isothermal fluid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoParams {
    temperature: f64,
    a: f64,
    b: f64,
    gas_constant: f64,
}

impl ThermoParams {
    pub const REDUCED_A: f64 = 3.0;
    pub const REDUCED_B: f64 = 1.0 / 3.0;
    pub const REDUCED_R: f64 = 8.0 / 3.0;

    pub fn new(temperature: f64, a: f64, b: f64, gas_constant: f64) -> Result<Self> {
        for (name, v) in [
            ("temperature", temperature),
            ("a", a),
            ("b", b),
            ("R", gas_constant),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(ThermoParams {
            temperature,
            a,
            b,
            gas_constant,
        })
    }

    /// Dimensionless fluid (`a = 3`, `b = 1/3`, `R = 8/3`) whose critical
    /// point sits at `T = rho = p = 1`.
    pub fn reduced(temperature: f64) -> Result<Self> {
        Self::new(
            temperature,
            Self::REDUCED_A,
            Self::REDUCED_B,
            Self::REDUCED_R,
        )
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.a, self.b, self.gas_constant)
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gas_constant(&self) -> f64 {
        self.gas_constant
    }

    fn rt(&self) -> f64 {
        self.gas_constant * self.temperature
    }

    /// Covolume limit `1/b`.
    pub fn max_density(&self) -> f64 {
        1.0 / self.b
    }

    /// `T_C = 8a / (27 b R)`, the maximum over `rho` of `2 a rho (1 - b rho)^2 / R`.
    pub fn critical_temperature(&self) -> f64 {
        8.0 * self.a / (27.0 * self.b * self.gas_constant)
    }

    /// Density of the critical point, where `p'` and `p''` vanish together.
    pub fn critical_density(&self) -> f64 {
        1.0 / (3.0 * self.b)
    }

    pub fn is_subcritical(&self) -> bool {
        self.temperature < self.critical_temperature()
    }

    /// Accepts `rho` in `(DENSITY_GUARD, 1/b - DENSITY_GUARD)`.
    pub fn check_density(&self, rho: f64) -> Result<f64> {
        let hi = self.max_density() - DENSITY_GUARD;
        if rho > DENSITY_GUARD && rho < hi {
            Ok(rho)
        } else {
            Err(Error::Domain {
                quantity: "density",
                value: rho,
                domain: format!("({DENSITY_GUARD:e}, {hi})"),
            })
        }
    }

    /// Extensive free energy `E(M, V)`.
    pub fn extensive_free_energy(&self, mass: f64, volume: f64) -> Result<f64> {
        let free = volume - mass * self.b;
        if !(mass > 0.0 && volume > 0.0 && free > 0.0) {
            return Err(Error::Domain {
                quantity: "mass/volume",
                value: mass / volume,
                domain: format!("M > 0, V > 0, V - M b > 0 (b = {})", self.b),
            });
        }
        Ok(-self.a * mass * mass / volume + self.rt() * (mass * (mass / free).ln() - mass))
    }

    /// Specific (per unit volume) free energy `f(rho) = E(rho, 1)`.
    pub fn free_energy(&self, rho: f64) -> Result<f64> {
        let rho = self.check_density(rho)?;
        Ok(self.free_energy_unchecked(rho))
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        let rho = self.check_density(rho)?;
        Ok(self.rt() * rho / (1.0 - self.b * rho) - self.a * rho * rho)
    }

    pub fn chemical_potential(&self, rho: f64) -> Result<f64> {
        let rho = self.check_density(rho)?;
        Ok(self.chemical_potential_unchecked(rho))
    }

    /// `dp/drho`.
    pub fn pressure_derivative(&self, rho: f64) -> Result<f64> {
        let rho = self.check_density(rho)?;
        let s = 1.0 - self.b * rho;
        Ok(self.rt() / (s * s) - 2.0 * self.a * rho)
    }

    /// `dmu/drho = p'(rho) / rho`.
    pub fn chemical_potential_derivative(&self, rho: f64) -> Result<f64> {
        Ok(self.pressure_derivative(rho)? / rho)
    }

    /// All potentials at once, sharing the logarithm.
    pub fn potentials(&self, rho: f64) -> Result<Potentials> {
        let rho = self.check_density(rho)?;
        let rt = self.rt();
        let s = 1.0 - self.b * rho;
        let log_term = (rho / s).ln();
        Ok(Potentials {
            rho,
            free_energy: -self.a * rho * rho + rt * rho * (log_term - 1.0),
            pressure: rt * rho / s - self.a * rho * rho,
            chemical_potential: rt * log_term + rt * self.b * rho / s - 2.0 * self.a * rho,
            pressure_derivative: rt / (s * s) - 2.0 * self.a * rho,
        })
    }

    fn free_energy_unchecked(&self, rho: f64) -> f64 {
        let s = 1.0 - self.b * rho;
        -self.a * rho * rho + self.rt() * rho * ((rho / s).ln() - 1.0)
    }

    fn chemical_potential_unchecked(&self, rho: f64) -> f64 {
        let rt = self.rt();
        let s = 1.0 - self.b * rho;
        rt * (rho / s).ln() + rt * self.b * rho / s - 2.0 * self.a * rho
    }
}

/// Potentials evaluated at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potentials {
    pub rho: f64,
    pub free_energy: f64,
    pub pressure: f64,
    pub chemical_potential: f64,
    pub pressure_derivative: f64,
}

/// A density validated against the covolume bound of some fluid.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Density(f64);

impl Density {
    pub fn new(value: f64, params: &ThermoParams) -> Result<Self> {
        params.check_density(value).map(Density)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Density> for f64 {
    fn from(d: Density) -> f64 {
        d.0
    }
}
