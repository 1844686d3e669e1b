//! Self-contained named scenarios.
//!
//! Time-series presets sweep the three vibrational modes 0.091, 0.139 and
//! 0.196 eV.

use crate::distributions::Reservoir;
use crate::error::{Error, Result};
use crate::fisher::Method;
use crate::io::config::{Layout, RunConfig};
use crate::model::{ModelParams, Param};
use crate::multilevel::MultilevelParams;
use crate::sweep::{Axis, Grid, Observable, SweepSpec};
use crate::tls::JunctionParams;

pub const MODES: [f64; 3] = [0.091, 0.139, 0.196];

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub title: &'static str,
    pub run: RunConfig,
}

pub const IDS: [&str; 25] = [
    "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig4a", "fig4b",
    "fig4c", "fig4d", "fig4e", "fig4f", "fig4g", "fig4h", "fig4i", "fig4j", "fig5a", "fig5b", "fig5c", "fig5d",
];

fn tls(mu: f64, t_l: f64, t_r: f64) -> ModelParams {
    ModelParams::Tls(JunctionParams {
        left: Reservoir { mu, temperature: t_l },
        right: Reservoir { mu: -mu, temperature: t_r },
        ..JunctionParams::anthracene_pmda()
    })
}

/// Hot left lead (T = 2), cold right lead (T = 1), symmetric bias `±mu`.
fn hot_left(mu: f64) -> ModelParams {
    tls(mu, 2.0, 1.0)
}

fn modes() -> Axis {
    Axis { param: Param::Omega0, grid: Grid::Values(MODES.to_vec()) }
}

fn time_series(base: ModelParams, observable: Observable, times: Grid) -> RunConfig {
    let mut spec = SweepSpec::new(base, modes(), observable);
    spec.time_grid = Some(times);
    RunConfig { spec, layout: Layout::Wide }
}

fn contour(base: ModelParams, axis: Axis) -> RunConfig {
    let mut spec = SweepSpec::new(base, axis, Observable::Fisher(Param::Omega0));
    spec.time_grid = Some(Grid::linear(0.0, 40.0, 201));
    RunConfig { spec, layout: Layout::Long }
}

fn resonance_scan(omega0: f64, t: f64) -> RunConfig {
    let base = tls(3.8, t, t).with(Param::Omega0, omega0).expect("tls parameter");
    contour(base, Axis { param: Param::MuR, grid: Grid::linear(-4.6, -2.6, 101) })
}

fn multilevel(t: f64) -> ModelParams {
    ModelParams::Multilevel(MultilevelParams::high_bias(t))
}

fn multilevel_populations(t: f64) -> RunConfig {
    let mut spec = SweepSpec::new(
        multilevel(t),
        Axis { param: Param::Omega0, grid: Grid::Values(vec![0.091]) },
        Observable::Populations,
    );
    spec.time_grid = Some(Grid::linear(0.0, 20.0, 401));
    RunConfig { spec, layout: Layout::Wide }
}

fn multilevel_fisher(t: f64) -> RunConfig {
    let mut spec = SweepSpec::new(
        multilevel(t),
        Axis { param: Param::Omega0, grid: Grid::linear(0.01, 2.0, 200) },
        Observable::SteadyFisher(Param::Omega0),
    );
    // central differences bottom out near 1e-23 here; the tail needs the exact route
    spec.fisher.method = Method::AnalyticChain;
    RunConfig { spec, layout: Layout::Long }
}

pub fn preset(id: &str) -> Result<Preset> {
    let fig1_times = || Grid::linear(0.0, 40.0, 401);
    let fig3_times = || Grid::linear(0.0, 60.0, 601);
    let fisher = |theta| Observable::Fisher(theta);
    let (title, run) = match id {
        "fig1b" => ("populations p1, p2 vs time, three modes", time_series(hot_left(1.0), Observable::Populations, fig1_times())),
        "fig1c" => ("I(eps_a) vs time, mu_L - mu_R = 2", time_series(hot_left(1.0), fisher(Param::EpsA), fig1_times())),
        "fig1d" => ("I(eps_a) vs time, mu_L - mu_R = 0.2", time_series(hot_left(0.1), fisher(Param::EpsA), fig1_times())),
        "fig2a" => ("I(eps_a) vs time, mu_L - mu_R = 6", time_series(hot_left(3.0), fisher(Param::EpsA), fig1_times())),
        "fig2b" => ("I(eps_d) vs time, mu_L - mu_R = 2", time_series(hot_left(1.0), fisher(Param::EpsD), fig1_times())),
        "fig2c" => ("I(eps_d) vs time, mu_L - mu_R = 0.2", time_series(hot_left(0.1), fisher(Param::EpsD), fig1_times())),
        "fig2d" => ("I(eps_d) vs time, mu_L - mu_R = 6", time_series(hot_left(3.0), fisher(Param::EpsD), fig1_times())),
        "fig3a" => ("I(omega0) vs time, T = 1", time_series(tls(3.8, 1.0, 1.0), fisher(Param::Omega0), fig3_times())),
        "fig3b" => ("I(omega0) vs time, T = 0.5", time_series(tls(3.8, 0.5, 0.5), fisher(Param::Omega0), fig3_times())),
        "fig3c" => ("I(omega0) vs time, T = 0.1", time_series(tls(3.8, 0.1, 0.1), fisher(Param::Omega0), fig3_times())),
        "fig3d" => ("I(omega0) vs time, T = 0.05", time_series(tls(3.8, 0.05, 0.05), fisher(Param::Omega0), fig3_times())),
        "fig4a" => (
            "I(omega0) over omega0 and time, T = 0.05",
            contour(tls(3.8, 0.05, 0.05), Axis { param: Param::Omega0, grid: Grid::linear(0.0, 0.3, 31) }),
        ),
        "fig4b" => (
            "I(omega0) over omega0 and time, T = 0.1",
            contour(tls(3.8, 0.1, 0.1), Axis { param: Param::Omega0, grid: Grid::linear(0.0, 0.3, 31) }),
        ),
        "fig4c" => ("I(omega0) over mu_R and time, omega0 = 0.091, T = 0.05", resonance_scan(0.091, 0.05)),
        "fig4d" => ("I(omega0) over mu_R and time, omega0 = 0.139, T = 0.05", resonance_scan(0.139, 0.05)),
        "fig4e" => ("I(omega0) over mu_R and time, omega0 = 0.196, T = 0.05", resonance_scan(0.196, 0.05)),
        "fig4f" => ("I(omega0) over mu_R and time, omega0 = 0.091, T = 0.1", resonance_scan(0.091, 0.1)),
        "fig4g" => ("I(omega0) over mu_R and time, omega0 = 0.139, T = 0.1", resonance_scan(0.139, 0.1)),
        "fig4h" => ("I(omega0) over mu_R and time, omega0 = 0.196, T = 0.1", resonance_scan(0.196, 0.1)),
        "fig4i" => {
            let grid = Grid::linear(0.05, 1.0, 20);
            let mut spec = SweepSpec::new(
                tls(3.8, 0.5, 0.5),
                Axis { param: Param::TL, grid: grid.clone() },
                Observable::SteadyFisher(Param::Omega0),
            );
            spec.axis2 = Some(Axis { param: Param::TR, grid });
            ("steady-state I(omega0) over T_L and T_R", RunConfig { spec, layout: Layout::Long })
        }
        "fig4j" => (
            "I(omega0) over T_L and time, T_R = 0.5",
            contour(tls(3.8, 0.5, 0.5), Axis { param: Param::TL, grid: Grid::linear(0.05, 1.0, 20) }),
        ),
        "fig5a" => ("five-state populations vs time, T = 0.1", multilevel_populations(0.1)),
        "fig5b" => ("five-state steady-state I(omega0) vs omega0, T = 0.1", multilevel_fisher(0.1)),
        "fig5c" => ("five-state populations vs time, T = 0.05", multilevel_populations(0.05)),
        "fig5d" => ("five-state steady-state I(omega0) vs omega0, T = 0.05", multilevel_fisher(0.05)),
        _ => return Err(Error::UnknownPreset { id: id.to_string(), available: IDS.to_vec() }),
    };
    let id = IDS.into_iter().find(|x| *x == id).expect("matched above");
    Ok(Preset { id, title, run })
}
