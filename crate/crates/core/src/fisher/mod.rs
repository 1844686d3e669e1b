//! Classical Fisher information `I(θ) = Σ_i (∂_θ p_i)² / p_i` of the
//! population distribution, at finite times and in the steady state.

pub mod analytic;
mod optimal;

use std::fmt;
use std::str::FromStr;

pub use optimal::{find_optimal_time, optimal_time, OptimalTime, OptimalTimeOptions};

use crate::error::{Error, Result};
use crate::generator::{Generator, Populations};
use crate::model::{to_array, ModelKind, ModelParams, Param};
use crate::multilevel;
use crate::tls::{self, RateSet2};

/// Probabilities below this are treated as empty states.
pub const DEFAULT_P_FLOOR: f64 = 1e-12;

/// Units of `I(θ)` for an energy-valued `θ`.
pub const FISHER_UNITS: &str = "eV^-2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    CentralFd,
    AnalyticChain,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::CentralFd => "central_fd",
            Method::AnalyticChain => "analytic_chain",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central_fd" => Ok(Method::CentralFd),
            "analytic_chain" => Ok(Method::AnalyticChain),
            _ => Err(Error::Domain(format!(
                "unknown fisher method '{s}'; expected central_fd or analytic_chain"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherOptions {
    pub method: Method,
    /// Finite-difference step; `None` picks `cbrt(eps)·max(|θ|, 1)`.
    pub step: Option<f64>,
    pub p_floor: f64,
}

impl Default for FisherOptions {
    fn default() -> Self {
        FisherOptions { method: Method::CentralFd, step: None, p_floor: DEFAULT_P_FLOOR }
    }
}

/// Central-difference step for `theta` at value `x`. Steps for positive
/// parameters are capped at `x/2` so that `x − h` stays in the domain.
pub fn difference_step(theta: Param, x: f64, requested: Option<f64>) -> f64 {
    let h = requested.unwrap_or_else(|| f64::EPSILON.cbrt() * x.abs().max(1.0));
    if theta.is_scale() && x > 0.0 {
        h.min(0.5 * x)
    } else {
        h
    }
}

/// Sums `dp_i² / p_i`. A state below `floor` is skipped when its derivative
/// is exactly zero and is an error otherwise.
pub fn fisher_information(p: &[f64], dp: &[f64], floor: f64) -> Result<f64> {
    let mut total = 0.0;
    for (i, (&pi, &di)) in p.iter().zip(dp).enumerate() {
        if pi < floor {
            if di == 0.0 {
                continue;
            }
            return Err(Error::SmallProbability { state: i, value: pi, floor });
        }
        total += di * di / pi;
    }
    Ok(total)
}

/// A model with its rates built once, ready to be evaluated at many times.
#[derive(Debug, Clone)]
enum Prepared {
    Tls { rates: RateSet2, gamma: f64 },
    Multilevel { gen: Generator<5> },
}

impl Prepared {
    fn build(params: &ModelParams) -> Result<Self> {
        match params {
            ModelParams::Tls(p) => Ok(Prepared::Tls { rates: tls::tls_rates(p)?, gamma: p.gamma_hyb }),
            ModelParams::Multilevel(p) => Ok(Prepared::Multilevel {
                gen: multilevel::multilevel_generator(&multilevel::multilevel_rates(p)?),
            }),
        }
    }

    fn at(&self, p0: &[f64], t: f64) -> Result<Vec<f64>> {
        match self {
            Prepared::Tls { rates, gamma } => {
                let p0 = Populations::new(to_array(p0)?)?;
                Ok(tls::propagate_with_rates(&p0, t, rates, *gamma)?.values().to_vec())
            }
            Prepared::Multilevel { gen } => {
                let p0 = Populations::new(to_array(p0)?)?;
                Ok(multilevel::propagate_multilevel(&p0, t, gen)?.values().to_vec())
            }
        }
    }

    fn steady(&self) -> Result<Vec<f64>> {
        match self {
            Prepared::Tls { rates, .. } => Ok(tls::tls_steady_state(rates)?.values().to_vec()),
            Prepared::Multilevel { gen } => Ok(multilevel::multilevel_steady_state(gen)?.values().to_vec()),
        }
    }
}

#[derive(Debug, Clone)]
enum Route {
    Fd { base: Prepared, plus: Prepared, minus: Prepared, span: f64 },
    Analytic,
}

/// Evaluates `I(θ)` for one model and one θ. The three rate constructions
/// needed by central differences happen once, in `new`.
#[derive(Debug, Clone)]
pub struct FisherEvaluator {
    params: ModelParams,
    theta: Param,
    p0: Vec<f64>,
    options: FisherOptions,
    step: f64,
    route: Route,
}

impl FisherEvaluator {
    pub fn new(params: &ModelParams, theta: Param, p0: &[f64], options: FisherOptions) -> Result<Self> {
        params.kind().check_param(theta)?;
        params.validate()?;
        if p0.len() != params.kind().n_states() {
            return Err(Error::Domain(format!(
                "initial state has {} entries, the {} model has {} states",
                p0.len(),
                params.kind(),
                params.kind().n_states()
            )));
        }
        let x = params.get(theta)?;
        if let ModelParams::Multilevel(p) = params {
            if theta == Param::Lambda && p.lambda == 0.0 {
                return Err(Error::Domain(
                    "lambda derivative is undefined at lambda = 0 (unit Franck-Condon weights)".into(),
                ));
            }
        }
        let (step, route) = match options.method {
            Method::CentralFd => {
                let h = difference_step(theta, x, options.step);
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::Domain(format!("finite-difference step must be > 0, got {h}")));
                }
                let (xp, xm) = (x + h, x - h);
                let route = Route::Fd {
                    base: Prepared::build(params)?,
                    plus: Prepared::build(&params.with(theta, xp)?)?,
                    minus: Prepared::build(&params.with(theta, xm)?)?,
                    span: xp - xm,
                };
                (h, route)
            }
            Method::AnalyticChain => (0.0, Route::Analytic),
        };
        Ok(FisherEvaluator { params: *params, theta, p0: p0.to_vec(), options, step, route })
    }

    pub fn theta(&self) -> Param {
        self.theta
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn method(&self) -> Method {
        self.options.method
    }

    /// The half-width `h` of the central difference (0 for analytic routes).
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Populations at `t` and their θ-derivatives.
    pub fn derivatives_at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match (&self.route, &self.params) {
            (Route::Fd { base, plus, minus, span }, _) => {
                let p = base.at(&self.p0, t)?;
                let up = plus.at(&self.p0, t)?;
                let dn = minus.at(&self.p0, t)?;
                Ok((p, up.iter().zip(&dn).map(|(a, b)| (a - b) / span).collect()))
            }
            (Route::Analytic, ModelParams::Tls(p)) => {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
                }
                Populations::new(to_array::<2>(&self.p0)?)?;
                let d = analytic::tls_at(p, self.theta, to_array(&self.p0)?, t);
                Ok((d.iter().map(|x| x.v).collect(), d.iter().map(|x| x.d).collect()))
            }
            (Route::Analytic, ModelParams::Multilevel(_)) => Err(Error::UnsupportedMethod {
                method: Method::AnalyticChain.name(),
                what: "time-dependent multilevel populations",
            }),
        }
    }

    pub fn steady_derivatives(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match (&self.route, &self.params) {
            (Route::Fd { base, plus, minus, span }, _) => {
                let p = base.steady()?;
                let up = plus.steady()?;
                let dn = minus.steady()?;
                Ok((p, up.iter().zip(&dn).map(|(a, b)| (a - b) / span).collect()))
            }
            (Route::Analytic, ModelParams::Tls(p)) => {
                let d = analytic::tls_steady(p, self.theta);
                Ok((d.iter().map(|x| x.v).collect(), d.iter().map(|x| x.d).collect()))
            }
            (Route::Analytic, ModelParams::Multilevel(p)) => {
                let (rho, drho) = analytic::multilevel_steady(p, self.theta)?;
                Ok((rho.to_vec(), drho.to_vec()))
            }
        }
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let (p, dp) = self.derivatives_at(t)?;
        fisher_information(&p, &dp, self.options.p_floor)
    }

    pub fn steady(&self) -> Result<f64> {
        let (p, dp) = self.steady_derivatives()?;
        fisher_information(&p, &dp, self.options.p_floor)
    }
}

/// `I(θ)` at time `t`, starting from the θ-independent distribution `p0`.
pub fn fisher_at_time(params: &ModelParams, theta: Param, t: f64, p0: &[f64], options: FisherOptions) -> Result<f64> {
    FisherEvaluator::new(params, theta, p0, options)?.at(t)
}

/// `I(θ)` of the steady-state distribution.
pub fn fisher_steady_state(params: &ModelParams, theta: Param, options: FisherOptions) -> Result<f64> {
    FisherEvaluator::new(params, theta, &params.default_initial(), options)?.steady()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherSeries {
    pub model: ModelKind,
    pub theta: Param,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub diff_step: f64,
    pub method: Method,
    pub units: &'static str,
}

pub(crate) fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Domain(format!("time grid entries must be finite and >= 0, got {t}")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("time grid must be strictly increasing".into()));
    }
    Ok(())
}

impl FisherEvaluator {
    pub fn series(&self, times: &[f64]) -> Result<FisherSeries> {
        check_time_grid(times)?;
        let values = times
            .iter()
            .enumerate()
            .map(|(index, &t)| self.at(t).map_err(|e| Error::AtGridIndex { index, source: Box::new(e) }))
            .collect::<Result<Vec<_>>>()?;
        Ok(FisherSeries {
            model: self.params.kind(),
            theta: self.theta,
            times: times.to_vec(),
            values,
            diff_step: self.step,
            method: self.options.method,
            units: self.theta.fisher_unit(),
        })
    }
}

pub fn fisher_series(
    params: &ModelParams,
    theta: Param,
    times: &[f64],
    p0: &[f64],
    options: FisherOptions,
) -> Result<FisherSeries> {
    FisherEvaluator::new(params, theta, p0, options)?.series(times)
}
