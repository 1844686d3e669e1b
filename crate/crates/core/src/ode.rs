//! Adaptive ODE integrators used as independent checks on the
//! matrix-exponential propagation.
//!
//! [`integrate`] is an explicit Dormand-Prince 5(4) scheme that only ever
//! sees the right-hand side `f(y)`. [`integrate_linear_stiff`] handles
//! `y' = A y` over times far beyond the slowest relaxation, where explicit
//! steps are limited by the fastest rate.

use nalgebra::{DMatrix, DVector, SMatrix};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { atol: 1e-10, rtol: 1e-8 }
    }
}

// Stage nodes c_i are not needed: the right-hand side is autonomous.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// fifth-order weights (also the last stage row, FSAL)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth minus fourth order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates the autonomous system `y' = f(y)` from 0 to `t_end`.
pub fn integrate<const N: usize, F>(f: F, y0: [f64; N], t_end: f64, tol: Tolerance) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Domain(format!("integration end time must be >= 0, got {t_end}")));
    }
    let mut y = y0;
    if t_end == 0.0 {
        return Ok(y);
    }
    let mut t = 0.0;
    let mut k1 = f(&y);
    let scale0 = (0..N).map(|i| k1[i].abs() / (tol.atol + tol.rtol * y[i].abs())).fold(0.0, f64::max);
    let mut h = if scale0 > 0.0 { (0.01 / scale0).min(t_end) } else { t_end };

    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(y);
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let k2 = f(&combine(&y, h, &[(A21, &k1)]));
        let k3 = f(&combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = combine(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(&y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }

        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(Error::Domain(format!("integrator exceeded {MAX_STEPS} steps before t = {t_end}")))
}

// two-stage, L-stable, stiffly accurate SDIRK
const SDIRK_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

fn sdirk_step(a: &DMatrix<f64>, y: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let lu = (DMatrix::<f64>::identity(a.nrows(), a.nrows()) - a * (SDIRK_GAMMA * h)).lu();
    let singular = || Error::Domain("singular stage matrix in implicit step".into());
    let y1 = lu.solve(y).ok_or_else(singular)?;
    let rhs = y + a * y1 * ((1.0 - SDIRK_GAMMA) * h);
    lu.solve(&rhs).ok_or_else(singular)
}

/// Integrates `y' = a y` from 0 to `t_end` with an L-stable second-order
/// SDIRK method, controlling the error by step doubling.
pub fn integrate_linear_stiff<const N: usize>(a: &SMatrix<f64, N, N>, y0: [f64; N], t_end: f64, tol: Tolerance) -> Result<[f64; N]> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Domain(format!("integration end time must be >= 0, got {t_end}")));
    }
    let a = DMatrix::from_column_slice(N, N, a.as_slice());
    let a = &a;
    let mut y = DVector::from_column_slice(&y0);
    let norm = a.abs().row_sum().max();
    let mut h = if norm > 0.0 { (1e-3 / norm).min(t_end) } else { t_end };
    let mut t = 0.0;
    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(std::array::from_fn(|i| y[i]));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        let full = sdirk_step(a, &y, h)?;
        let half = sdirk_step(a, &sdirk_step(a, &y, 0.5 * h)?, 0.5 * h)?;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let sc = tol.atol + tol.rtol * y[i].abs().max(half[i].abs());
            err = err.max(((half[i] - full[i]) / 3.0 / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = half;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Err(Error::Domain(format!("integrator exceeded {MAX_STEPS} steps before t = {t_end}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let y = integrate(|y: &[f64; 1]| [-2.0 * y[0]], [1.0], 3.0, Tolerance::default()).unwrap();
        assert_relative_eq!(y[0], (-6.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let tol = Tolerance { atol: 1e-12, rtol: 1e-12 };
        let y = integrate(|y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], std::f64::consts::TAU, tol).unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(y[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let y = integrate(|y: &[f64; 1]| [y[0]], [3.0], 0.0, Tolerance::default()).unwrap();
        assert_eq!(y, [3.0]);
    }

    #[test]
    fn stiff_linear_system_reaches_equilibrium() {
        // rates 1e4 and 1e-4 between two states; equilibrium (1e-8, 1) / (1 + 1e-8)
        let a = SMatrix::<f64, 2, 2>::new(-1e4, 1e-4, 1e4, -1e-4);
        let y = integrate_linear_stiff(&a, [0.0, 1.0], 10.0, Tolerance::default()).unwrap();
        let k = 1e-4 + 1e4;
        let eq = [1e-4 / k, 1e4 / k];
        let x = eq[0] + (0.0 - eq[0]) * (-k * 10.0f64).exp();
        assert_relative_eq!(y[0], x, max_relative = 1e-6);
        let slow = SMatrix::<f64, 2, 2>::new(-1e-6, 1e-6, 1e-6, -1e-6);
        let y = integrate_linear_stiff(&slow, [1.0, 0.0], 5e7, Tolerance::default()).unwrap();
        assert_relative_eq!(y[0], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn stiff_integrator_tracks_smooth_decay() {
        let a = SMatrix::<f64, 1, 1>::new(-2.0);
        let y = integrate_linear_stiff(&a, [1.0], 3.0, Tolerance { atol: 1e-12, rtol: 1e-10 }).unwrap();
        assert_relative_eq!(y[0], (-6.0f64).exp(), max_relative = 1e-5);
    }
}
