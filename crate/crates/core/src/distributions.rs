//! Fermi-Dirac and Bose-Einstein occupations with their parameter derivatives.
//!
//! Units throughout: energies and temperatures in eV with `k_B = 1`.

use crate::error::{Error, Result};

/// Smallest vibrational quantum accepted by sweeps. Sweep endpoints at
/// `omega0 = 0` are clamped here so the Bose factor stays finite.
pub const OMEGA_FLOOR: f64 = 1e-6;

/// An electron reservoir (lead) at chemical potential `mu` and temperature
/// `temperature`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reservoir {
    pub mu: f64,
    pub temperature: f64,
}

impl Reservoir {
    pub fn new(mu: f64, temperature: f64) -> Result<Self> {
        let res = Reservoir { mu, temperature };
        res.validate()?;
        Ok(res)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::Domain(format!("chemical potential must be finite, got {}", self.mu)));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::Domain(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    fn reduced(&self, energy: f64) -> Result<f64> {
        if !energy.is_finite() {
            return Err(Error::Domain(format!("energy must be finite, got {energy}")));
        }
        self.validate()?;
        Ok((energy - self.mu) / self.temperature)
    }
}

/// `1 / (e^x + 1)` without ever exponentiating a large positive argument.
#[inline]
pub(crate) fn logistic_tail(x: f64) -> f64 {
    if x <= 0.0 {
        1.0 / (x.exp() + 1.0)
    } else {
        let e = (-x).exp();
        e / (1.0 + e)
    }
}

/// Fermi-Dirac occupation `f(ε) = 1 / (exp((ε − μ)/T) + 1)`.
pub fn fermi(energy: f64, res: &Reservoir) -> Result<f64> {
    Ok(logistic_tail(res.reduced(energy)?))
}

/// Hole occupation `1 − f(ε)`, evaluated as `f` at the mirrored argument so
/// that it keeps full relative precision when `f` is close to one.
pub fn fermi_hole(energy: f64, res: &Reservoir) -> Result<f64> {
    Ok(logistic_tail(-res.reduced(energy)?))
}

/// `∂f/∂ε = −f(1 − f)/T`.
pub fn fermi_denergy(energy: f64, res: &Reservoir) -> Result<f64> {
    let x = res.reduced(energy)?;
    Ok(-logistic_tail(x) * logistic_tail(-x) / res.temperature)
}

/// `∂f/∂μ = f(1 − f)/T`.
pub fn fermi_dmu(energy: f64, res: &Reservoir) -> Result<f64> {
    Ok(-fermi_denergy(energy, res)?)
}

/// `∂f/∂T = f(1 − f)(ε − μ)/T²`.
pub fn fermi_dtemperature(energy: f64, res: &Reservoir) -> Result<f64> {
    let x = res.reduced(energy)?;
    Ok(logistic_tail(x) * logistic_tail(-x) * x / res.temperature)
}

fn check_bose_args(omega: f64, temperature: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("bose: omega must be > 0, got {omega}")));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Domain(format!(
            "bose: temperature must be > 0, got {temperature}"
        )));
    }
    Ok(())
}

/// Bose-Einstein occupation `n_B(ω) = 1 / (exp(ω/T) − 1)`.
pub fn bose(omega: f64, temperature: f64) -> Result<f64> {
    check_bose_args(omega, temperature)?;
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// `∂n_B/∂ω = −n_B(1 + n_B)/T`.
pub fn bose_domega(omega: f64, temperature: f64) -> Result<f64> {
    let n = bose(omega, temperature)?;
    Ok(-n * (1.0 + n) / temperature)
}

/// `∂n_B/∂T = n_B(1 + n_B) ω/T²`.
pub fn bose_dtemperature(omega: f64, temperature: f64) -> Result<f64> {
    let n = bose(omega, temperature)?;
    Ok(n * (1.0 + n) * omega / (temperature * temperature))
}
