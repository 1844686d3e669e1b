//! Optimal interrogation time: where `I(θ)(t)` peaks, if it peaks at all.

use super::{FisherEvaluator, FisherOptions, FisherSeries};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Param};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTimeOptions {
    /// Absolute time tolerance of the refinement; `None` means `1e-4` over
    /// the model's rate scale.
    pub time_tol: Option<f64>,
    /// Relative change over the last tenth of the grid below which a series
    /// ending at its maximum counts as saturated.
    pub saturation_slope: f64,
    /// Relative tolerance for treating the final value as tied with the
    /// maximum.
    pub tie_rel: f64,
}

impl Default for OptimalTimeOptions {
    fn default() -> Self {
        OptimalTimeOptions { time_tol: None, saturation_slope: 1e-3, tie_rel: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimalTime {
    /// A peak inside the grid, refined between its neighbours.
    Interior { t: f64, value: f64 },
    /// Nondecreasing up to the end of the grid with a flat tail.
    Saturating { plateau: f64 },
    /// Largest at a grid edge without having flattened out.
    Boundary { t: f64, value: f64 },
}

impl OptimalTime {
    pub fn is_saturating(&self) -> bool {
        matches!(self, OptimalTime::Saturating { .. })
    }

    /// `(t*, I*)`, with `t* = ∞` for a saturating series.
    pub fn point(&self) -> (f64, f64) {
        match *self {
            OptimalTime::Interior { t, value } | OptimalTime::Boundary { t, value } => (t, value),
            OptimalTime::Saturating { plateau } => (f64::INFINITY, plateau),
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Classifies `series` and refines an interior maximum with golden-section
/// search on `eval`. Evaluation failures during refinement count as `−∞`.
pub fn find_optimal_time<F>(series: &FisherSeries, eval: F, time_tol: f64, opts: &OptimalTimeOptions) -> Result<OptimalTime>
where
    F: Fn(f64) -> Result<f64>,
{
    let v = &series.values;
    let t = &series.times;
    let n = v.len();
    if n == 0 {
        return Err(Error::EmptyResult);
    }
    let mut k = 0;
    for i in 1..n {
        if v[i] > v[k] {
            k = i;
        }
    }
    let last = n - 1;
    if v[k] - v[last] <= opts.tie_rel * v[last].abs() {
        k = last;
    }
    if k == last {
        let tail = (n / 10).max(1).min(last);
        let from = v[last - tail];
        let rel = if v[last] == 0.0 { 0.0 } else { (v[last] - from).abs() / v[last].abs() };
        if rel < opts.saturation_slope {
            return Ok(OptimalTime::Saturating { plateau: v[last] });
        }
        return Ok(OptimalTime::Boundary { t: t[last], value: v[last] });
    }
    if k == 0 {
        return Ok(OptimalTime::Boundary { t: t[0], value: v[0] });
    }
    let f = |x: f64| eval(x).unwrap_or(f64::NEG_INFINITY);
    let (tr, vr) = golden_section_max(f, t[k - 1], t[k + 1], time_tol);
    if vr >= v[k] {
        Ok(OptimalTime::Interior { t: tr, value: vr })
    } else {
        Ok(OptimalTime::Interior { t: t[k], value: v[k] })
    }
}

/// Builds the series for `theta` on `times` and locates its optimum.
pub fn optimal_time(
    params: &ModelParams,
    theta: Param,
    times: &[f64],
    p0: &[f64],
    fisher: FisherOptions,
    opts: &OptimalTimeOptions,
) -> Result<(FisherSeries, OptimalTime)> {
    let eval = FisherEvaluator::new(params, theta, p0, fisher)?;
    let series = eval.series(times)?;
    let tol = opts.time_tol.unwrap_or(1e-4 / params.rate_scale());
    let opt = find_optimal_time(&series, |x| eval.at(x), tol, opts)?;
    Ok((series, opt))
}
