//! Five-state vibronic rectifier.
//!
//! Basis order is `|0⟩, |D0⟩, |D1⟩, |A0⟩, |A1⟩`: the empty junction, then
//! the electron on the donor or acceptor with the vibration in level 0 or 1.

use nalgebra::{SMatrix, SVector};

use crate::distributions::{bose, fermi, fermi_hole, Reservoir};
use crate::error::{Error, Result};
use crate::generator::{Generator, Populations};

pub type PopulationVector5 = Populations<5>;

pub const STATE_LABELS: [&str; 5] = ["0", "D0", "D1", "A0", "A1"];

pub const EMPTY: usize = 0;
pub const D0: usize = 1;
pub const D1: usize = 2;
pub const A0: usize = 3;
pub const A1: usize = 4;

/// Tolerated linear-algebra undershoot below zero before a steady-state
/// component is reported as negative.
pub const CLAMP_WINDOW: f64 = 1e-13;

/// Clamping window for propagated trajectories.
pub const TRAJECTORY_WINDOW: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultilevelParams {
    pub eps_d: f64,
    pub eps_a: f64,
    pub omega0: f64,
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub gamma_da: f64,
    pub gamma_ad: f64,
    pub gamma0: f64,
    /// Polaron displacement. Zero selects unit Franck-Condon weights.
    pub lambda: f64,
    pub t_vib: f64,
    pub left: Reservoir,
    pub right: Reservoir,
}

impl MultilevelParams {
    /// High-bias setting with the bath at the lead temperature `temperature`.
    pub fn high_bias(temperature: f64) -> Self {
        MultilevelParams {
            eps_d: -5.4,
            eps_a: -3.8,
            omega0: 0.091,
            gamma_l: 1.0,
            gamma_r: 1.0,
            gamma_da: 1.0,
            gamma_ad: 1.0,
            gamma0: 0.5,
            lambda: 0.0,
            t_vib: temperature,
            left: Reservoir { mu: 3.8, temperature },
            right: Reservoir { mu: -3.8, temperature },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_d", self.eps_d), ("eps_a", self.eps_a), ("lambda", self.lambda)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::Domain(format!("omega0 must be > 0, got {}", self.omega0)));
        }
        if !(self.t_vib.is_finite() && self.t_vib > 0.0) {
            return Err(Error::Domain(format!("t_vib must be > 0, got {}", self.t_vib)));
        }
        let prefactors = [
            ("gamma_L", self.gamma_l),
            ("gamma_R", self.gamma_r),
            ("gamma_DA", self.gamma_da),
            ("gamma_AD", self.gamma_ad),
            ("gamma0", self.gamma0),
        ];
        for (name, v) in prefactors {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if prefactors.iter().all(|(_, v)| *v == 0.0) {
            return Err(Error::Domain("at least one rate prefactor must be > 0".into()));
        }
        self.left.validate()?;
        self.right.validate()
    }
}

/// All rates of the five-state generator, in eV. Index `n` is the
/// vibrational level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateSet5 {
    pub gl_plus: [f64; 2],
    pub gl_minus: [f64; 2],
    pub gr_plus: [f64; 2],
    pub gr_minus: [f64; 2],
    pub k_da: [f64; 2],
    pub k_ad: [f64; 2],
    pub up: f64,
    pub down: f64,
}

impl RateSet5 {
    pub fn to_array(&self) -> [f64; 14] {
        [
            self.gl_plus[0],
            self.gl_plus[1],
            self.gl_minus[0],
            self.gl_minus[1],
            self.gr_plus[0],
            self.gr_plus[1],
            self.gr_minus[0],
            self.gr_minus[1],
            self.k_da[0],
            self.k_da[1],
            self.k_ad[0],
            self.k_ad[1],
            self.up,
            self.down,
        ]
    }

    pub const NAMES: [&'static str; 14] = [
        "GammaL0_plus",
        "GammaL1_plus",
        "GammaL0_minus",
        "GammaL1_minus",
        "GammaR0_plus",
        "GammaR1_plus",
        "GammaR0_minus",
        "GammaR1_minus",
        "k0_DA",
        "k1_DA",
        "k0_AD",
        "k1_AD",
        "gamma_up",
        "gamma_down",
    ];
}

/// Displaced-vacuum overlap `|⟨n|X|0⟩|²` truncated to one phonon, with
/// `g = λ/ω0`.
pub fn franck_condon(n: usize, lambda: f64, omega0: f64) -> Result<f64> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::Domain(format!("omega0 must be > 0, got {omega0}")));
    }
    let g2 = (lambda / omega0).powi(2);
    match n {
        0 => Ok((-g2).exp()),
        1 => Ok(g2 * (-g2).exp()),
        _ => Err(Error::Domain(format!("Franck-Condon level must be 0 or 1, got {n}"))),
    }
}

/// Weights used by the rates: unit weights when `lambda == 0`, otherwise
/// the displaced overlaps.
pub fn franck_condon_weights(lambda: f64, omega0: f64) -> Result<[f64; 2]> {
    if lambda == 0.0 {
        return Ok([1.0, 1.0]);
    }
    Ok([franck_condon(0, lambda, omega0)?, franck_condon(1, lambda, omega0)?])
}

pub fn multilevel_rates(params: &MultilevelParams) -> Result<RateSet5> {
    params.validate()?;
    let fc = franck_condon_weights(params.lambda, params.omega0)?;
    let nb = bose(params.omega0, params.t_vib)?;
    let (l, r) = (&params.left, &params.right);
    let mut rates = RateSet5::default();
    for n in 0..2 {
        let e = params.eps_d + n as f64 * params.omega0;
        rates.gl_plus[n] = params.gamma_l * fc[n] * fermi(e, l)?;
        rates.gl_minus[n] = params.gamma_l * fc[n] * fermi_hole(e, l)?;
        rates.k_da[n] = params.gamma_da * fc[n] * (1.0 + nb);
        rates.k_ad[n] = params.gamma_ad * fc[n] * nb;
    }
    // the acceptor only exchanges electrons with the right lead in level 0
    rates.gr_plus[0] = params.gamma_r * fermi(params.eps_a, r)?;
    rates.gr_minus[0] = params.gamma_r * fermi_hole(params.eps_a, r)?;
    rates.up = params.gamma0 * nb;
    rates.down = params.gamma0 * (1.0 + nb);
    Ok(rates)
}

/// Builds the 5×5 generator. Linear in the rates, so it also maps rate
/// derivatives to the generator derivative.
pub fn multilevel_generator(rates: &RateSet5) -> Generator<5> {
    let mut m = SMatrix::<f64, 5, 5>::zeros();
    // (i, j): rate from j into i
    let entries = [
        (EMPTY, D0, rates.gl_minus[0]),
        (EMPTY, D1, rates.gl_minus[1]),
        (EMPTY, A0, rates.gr_minus[0]),
        (EMPTY, A1, rates.gr_minus[1]),
        (D0, EMPTY, rates.gl_plus[0]),
        (D0, D1, rates.down),
        (D0, A0, rates.k_ad[0]),
        (D1, EMPTY, rates.gl_plus[1]),
        (D1, D0, rates.up),
        (D1, A1, rates.k_ad[1]),
        (A0, EMPTY, rates.gr_plus[0]),
        (A0, D0, rates.k_da[0]),
        (A0, A1, rates.down),
        (A1, EMPTY, rates.gr_plus[1]),
        (A1, D1, rates.k_da[1]),
        (A1, A0, rates.up),
    ];
    for (i, j, rate) in entries {
        m[(i, j)] = rate;
    }
    for j in 0..5 {
        let out: f64 = (0..5).filter(|&i| i != j).map(|i| m[(i, j)]).sum();
        m[(j, j)] = -out;
    }
    Generator::from_matrix_unchecked(m)
}

/// Closed communicating classes of the rate graph, as sorted state-index
/// lists. A unique stationary distribution exists iff there is exactly one.
pub fn closed_classes(gen: &Generator<5>) -> Vec<Vec<usize>> {
    let m = gen.matrix();
    let mut reach = [[false; 5]; 5];
    for (j, row) in reach.iter_mut().enumerate() {
        row[j] = true;
        for (i, r) in row.iter_mut().enumerate() {
            if i != j && m[(i, j)] > 0.0 {
                *r = true;
            }
        }
    }
    // reach[j][i]: i reachable from j
    for k in 0..5 {
        for j in 0..5 {
            for i in 0..5 {
                if reach[j][k] && reach[k][i] {
                    reach[j][i] = true;
                }
            }
        }
    }
    let mut seen = [false; 5];
    let mut closed = Vec::new();
    for s in 0..5 {
        if seen[s] {
            continue;
        }
        let class: Vec<usize> = (0..5).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &t in &class {
            seen[t] = true;
        }
        let leaves = (0..5).any(|t| reach[s][t] && !class.contains(&t));
        if !leaves {
            closed.push(class);
        }
    }
    closed
}

fn check_connected(gen: &Generator<5>) -> Result<()> {
    let closed = closed_classes(gen);
    if closed.len() != 1 {
        let blocks = closed
            .iter()
            .map(|c| c.iter().map(|&i| STATE_LABELS[i]).collect())
            .collect();
        return Err(Error::DegenerateSteadyState { blocks });
    }
    Ok(())
}

/// The bordered matrix: `L` with its last row replaced by ones.
pub(crate) fn bordered(gen: &Generator<5>) -> SMatrix<f64, 5, 5> {
    let mut a = *gen.matrix();
    a.row_mut(4).fill(1.0);
    a
}

fn clamp_and_normalize(v: [f64; 5]) -> Result<PopulationVector5> {
    let clamped = Populations::from_clamped(v, CLAMP_WINDOW)?;
    let sum = clamped.sum();
    Populations::from_clamped(clamped.values().map(|x| x / sum), 0.0)
}

/// Stationary distribution from the bordered linear system
/// `[L with last row = 1] ρ = e_5`, solved by LU with partial pivoting.
pub fn multilevel_steady_state(gen: &Generator<5>) -> Result<PopulationVector5> {
    check_connected(gen)?;
    let mut rhs = SVector::<f64, 5>::zeros();
    rhs[4] = 1.0;
    let rho = bordered(gen).lu().solve(&rhs).ok_or(Error::DegenerateGenerator)?;
    clamp_and_normalize(std::array::from_fn(|i| rho[i]))
}

/// Stationary distribution as the right singular vector of `L` with the
/// smallest singular value, normalized to unit sum.
pub fn steady_state_null_space(gen: &Generator<5>) -> Result<PopulationVector5> {
    check_connected(gen)?;
    let svd = gen.matrix().svd(false, true);
    let v_t = svd.v_t.ok_or(Error::DegenerateGenerator)?;
    let k = svd.singular_values.imin();
    let v = v_t.row(k);
    let sum: f64 = v.iter().sum();
    if sum == 0.0 {
        return Err(Error::DegenerateGenerator);
    }
    clamp_and_normalize(std::array::from_fn(|i| v[i] / sum))
}

/// `exp(L t) ρ0` by Padé scaling and squaring.
pub fn propagate_multilevel(rho0: &PopulationVector5, t: f64, gen: &Generator<5>) -> Result<PopulationVector5> {
    if t == 0.0 {
        return Ok(*rho0);
    }
    let raw = gen.evolve_raw(rho0.values(), t)?;
    Populations::from_clamped(raw, TRAJECTORY_WINDOW)
}
