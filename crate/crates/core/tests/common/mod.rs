#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rectifier::distributions::Reservoir;
use rectifier::multilevel::MultilevelParams;
use rectifier::tls::JunctionParams;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn reservoir(rng: &mut StdRng) -> Reservoir {
    Reservoir { mu: rng.random_range(-4.0..4.0), temperature: rng.random_range(0.05..2.0) }
}

pub fn tls_params(rng: &mut StdRng) -> JunctionParams {
    JunctionParams {
        eps_d: rng.random_range(-6.0..0.0),
        eps_a: rng.random_range(-5.0..1.0),
        omega0: rng.random_range(0.01..0.5),
        gamma_hyb: rng.random_range(0.1..2.0),
        left: reservoir(rng),
        right: reservoir(rng),
    }
}

/// Draws keep the displacement at most twice the vibrational quantum, so
/// the Franck-Condon weights stay above `e^-4` and the rate graph is
/// connected in floating point as well as structurally.
pub fn multilevel_params(rng: &mut StdRng) -> MultilevelParams {
    let omega0 = rng.random_range(0.02..0.6);
    let left = Reservoir { mu: rng.random_range(-2.0..2.0), temperature: rng.random_range(0.1..1.5) };
    let right = Reservoir { mu: rng.random_range(-2.0..2.0), temperature: rng.random_range(0.1..1.5) };
    MultilevelParams {
        eps_d: rng.random_range(-3.0..1.0),
        eps_a: rng.random_range(-3.0..1.0),
        omega0,
        gamma_l: rng.random_range(0.05..2.0),
        gamma_r: rng.random_range(0.05..2.0),
        gamma_da: rng.random_range(0.05..2.0),
        gamma_ad: rng.random_range(0.05..2.0),
        gamma0: rng.random_range(0.01..2.0),
        lambda: if rng.random_bool(0.5) { 0.0 } else { omega0 * rng.random_range(0.05..2.0) },
        t_vib: rng.random_range(0.1..1.5),
        left,
        right,
    }
}

/// Random point on the probability simplex.
pub fn simplex<const N: usize>(rng: &mut StdRng) -> [f64; N] {
    let mut x = [0.0; N];
    for v in &mut x {
        *v = -rng.random_range(f64::MIN_POSITIVE..1.0f64).ln();
    }
    let s: f64 = x.iter().sum();
    x.map(|v| v / s)
}
