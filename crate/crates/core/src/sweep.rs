//! Declarative one- and two-axis parameter sweeps.
//!
//! A sweep evaluates one observable on every grid cell. Cells are
//! independent and are evaluated in parallel; results are collected by
//! position, so the tensor does not depend on scheduling.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::distributions::OMEGA_FLOOR;
use crate::error::{Error, Result};
use crate::fisher::{check_time_grid, optimal_time, FisherEvaluator, FisherOptions, OptimalTime, OptimalTimeOptions};
use crate::generator::Populations;
use crate::model::{to_array, ModelParams, Param};

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// `n` points from `start` to `end` inclusive.
    Linear { start: f64, end: f64, n: usize },
    /// `n` geometrically spaced points, both ends positive.
    Log { start: f64, end: f64, n: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn linear(start: f64, end: f64, n: usize) -> Self {
        Grid::Linear { start, end, n }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match *self {
            Grid::Linear { start, end, n } => spaced(start, end, n, |a, b, f| a + (b - a) * f)?,
            Grid::Log { start, end, n } => {
                if !(start > 0.0 && end > 0.0) {
                    return Err(Error::Domain(format!("log grid needs positive ends, got {start}, {end}")));
                }
                spaced(start, end, n, |a, b, f| (a.ln() + (b.ln() - a.ln()) * f).exp())?
            }
            Grid::Values(ref v) => v.clone(),
        };
        if pts.is_empty() {
            return Err(Error::Domain("grid is empty".into()));
        }
        if let Some(x) = pts.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("grid values must be finite, got {x}")));
        }
        let up = pts.windows(2).all(|w| w[1] > w[0]);
        let down = pts.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Domain("grid must be strictly monotone".into()));
        }
        Ok(pts)
    }
}

fn spaced(a: f64, b: f64, n: usize, at: impl Fn(f64, f64, f64) -> f64) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::Domain("grid needs at least one point".into())),
        1 => Ok(vec![a]),
        _ => Ok((0..n)
            .map(|i| if i == n - 1 { b } else { at(a, b, i as f64 / (n - 1) as f64) })
            .collect()),
    }
}

/// Shortest round-trip float text.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Linear { start, end, n } => write!(f, "linear({}, {}, {n})", fmt_f64(*start), fmt_f64(*end)),
            Grid::Log { start, end, n } => write!(f, "log({}, {}, {n})", fmt_f64(*start), fmt_f64(*end)),
            Grid::Values(v) => {
                let items: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
                write!(f, "values({})", items.join(", "))
            }
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot parse grid '{s}'; expected linear(a, b, n), log(a, b, n) or values(x, ...)"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let kind = s[..open].trim();
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let num = |a: &str| a.parse::<f64>().map_err(|_| bad());
        match kind {
            "linear" | "log" => {
                if args.len() != 3 {
                    return Err(bad());
                }
                let (start, end) = (num(args[0])?, num(args[1])?);
                let n = args[2].parse::<usize>().map_err(|_| bad())?;
                Ok(if kind == "linear" { Grid::Linear { start, end, n } } else { Grid::Log { start, end, n } })
            }
            "values" => Ok(Grid::Values(args.iter().map(|a| num(a)).collect::<Result<_>>()?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// Populations on the time grid.
    Populations,
    /// `I(θ)` on the time grid.
    Fisher(Param),
    SteadyState,
    SteadyFisher(Param),
    /// `(t*, I*, kind)` with kind 0 = interior, 1 = saturating, 2 = boundary.
    OptimalTime(Param),
}

impl Observable {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Observable::Populations => "populations",
            Observable::Fisher(_) => "fisher",
            Observable::SteadyState => "steady_state",
            Observable::SteadyFisher(_) => "steady_fisher",
            Observable::OptimalTime(_) => "optimal_time",
        }
    }

    pub fn theta(&self) -> Option<Param> {
        match *self {
            Observable::Fisher(p) | Observable::SteadyFisher(p) | Observable::OptimalTime(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_time_resolved(&self) -> bool {
        matches!(self, Observable::Populations | Observable::Fisher(_))
    }

    pub fn needs_time_grid(&self) -> bool {
        matches!(self, Observable::Populations | Observable::Fisher(_) | Observable::OptimalTime(_))
    }

    pub fn from_parts(kind: &str, theta: Option<Param>) -> Result<Self> {
        let need = || Error::InvalidSpec { field: "observable.theta".into(), reason: format!("required for {kind}") };
        match kind {
            "populations" => Ok(Observable::Populations),
            "fisher" => Ok(Observable::Fisher(theta.ok_or_else(need)?)),
            "steady_state" => Ok(Observable::SteadyState),
            "steady_fisher" => Ok(Observable::SteadyFisher(theta.ok_or_else(need)?)),
            "optimal_time" => Ok(Observable::OptimalTime(theta.ok_or_else(need)?)),
            _ => Err(Error::InvalidSpec {
                field: "observable.kind".into(),
                reason: format!(
                    "unknown observable '{kind}'; expected populations, fisher, steady_state, steady_fisher or optimal_time"
                ),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    /// Initial distribution; the model default when `None`.
    pub p0: Option<Vec<f64>>,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub observable: Observable,
    pub time_grid: Option<Grid>,
    pub fisher: FisherOptions,
    pub optimal: OptimalTimeOptions,
}

impl SweepSpec {
    pub fn new(base: ModelParams, axis1: Axis, observable: Observable) -> Self {
        SweepSpec {
            base,
            p0: None,
            axis1,
            axis2: None,
            observable,
            time_grid: None,
            fisher: FisherOptions::default(),
            optimal: OptimalTimeOptions::default(),
        }
    }

    pub fn initial(&self) -> Vec<f64> {
        self.p0.clone().unwrap_or_else(|| self.base.default_initial())
    }

    /// Component labels along the last tensor axis.
    pub fn components(&self) -> Vec<&'static str> {
        match self.observable {
            Observable::Populations | Observable::SteadyState => self.base.kind().state_labels().to_vec(),
            Observable::Fisher(_) | Observable::SteadyFisher(_) => vec!["I"],
            Observable::OptimalTime(_) => vec!["t_opt", "I_opt", "kind"],
        }
    }

    fn invalid(field: &str, reason: impl fmt::Display) -> Error {
        Error::InvalidSpec { field: field.into(), reason: reason.to_string() }
    }

    /// Checks everything that can be checked without evaluating the model.
    pub fn validate(&self) -> Result<ResolvedGrids> {
        let kind = self.base.kind();
        let axis1 = self.axis1.grid.points().map_err(|e| Self::invalid("sweep.axis1_grid", e))?;
        kind.check_param(self.axis1.param).map_err(|e| Self::invalid("sweep.axis1", e))?;
        let axis2 = match &self.axis2 {
            Some(a) => {
                kind.check_param(a.param).map_err(|e| Self::invalid("sweep.axis2", e))?;
                if a.param == self.axis1.param {
                    return Err(Self::invalid("sweep.axis2", "must differ from sweep.axis1"));
                }
                Some(a.grid.points().map_err(|e| Self::invalid("sweep.axis2_grid", e))?)
            }
            None => None,
        };
        if let Some(theta) = self.observable.theta() {
            kind.check_param(theta).map_err(|e| Self::invalid("observable.theta", e))?;
        }
        let times = match (&self.time_grid, self.observable.needs_time_grid()) {
            (Some(g), true) => {
                let t = g.points().map_err(|e| Self::invalid("time.grid", e))?;
                check_time_grid(&t).map_err(|e| Self::invalid("time.grid", e))?;
                t
            }
            (None, true) => {
                return Err(Self::invalid("time.grid", format!("required for {}", self.observable.kind_name())))
            }
            (_, false) => Vec::new(),
        };
        if axis2.is_some() && self.observable.is_time_resolved() && times.len() != 1 {
            return Err(Self::invalid(
                "sweep.axis2",
                "two-axis sweeps need a scalar observable (steady_fisher, optimal_time, or fisher on a one-point time grid)",
            ));
        }
        let p0 = self.initial();
        if p0.len() != kind.n_states() {
            return Err(Self::invalid("initial.p0", format!("expected {} entries, got {}", kind.n_states(), p0.len())));
        }
        let normalized = match kind {
            crate::model::ModelKind::Tls => to_array::<2>(&p0).and_then(Populations::new).map(|_| ()),
            crate::model::ModelKind::Multilevel => to_array::<5>(&p0).and_then(Populations::new).map(|_| ()),
        };
        normalized.map_err(|e| Self::invalid("initial.p0", e))?;
        if !(self.fisher.p_floor >= 0.0) {
            return Err(Self::invalid("fisher.p_floor", "must be >= 0"));
        }
        if let Some(h) = self.fisher.step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Self::invalid("fisher.step", "must be > 0"));
            }
        }
        Ok(ResolvedGrids { axis1, axis2, times })
    }

    /// Model parameters of cell `(x1, x2)`; `omega0` is clamped at the floor.
    pub fn cell_params(&self, x1: f64, x2: Option<f64>) -> Result<ModelParams> {
        let mut p = self.base.with(self.axis1.param, axis_value(self.axis1.param, x1))?;
        if let (Some(a), Some(x2)) = (&self.axis2, x2) {
            p = p.with(a.param, axis_value(a.param, x2))?;
        }
        Ok(p)
    }
}

fn axis_value(param: Param, x: f64) -> f64 {
    if param == Param::Omega0 && x <= OMEGA_FLOOR {
        OMEGA_FLOOR
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGrids {
    pub axis1: Vec<f64>,
    pub axis2: Option<Vec<f64>>,
    /// Empty for observables without a time axis.
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Failed(String),
}

impl CellStatus {
    pub fn label(&self) -> &str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Failed(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub version: &'static str,
    pub unix_time: u64,
    /// Results do not depend on thread count, scheduling or any seed.
    pub deterministic: bool,
}

/// Values for one `(axis1, axis2)` cell: per time point, the component
/// values or the failure.
type CellBlock = Vec<std::result::Result<Vec<f64>, String>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub grids: ResolvedGrids,
    /// `[n1, n2, nt, nc]` with collapsed axes of length 1.
    pub shape: [usize; 4],
    values: Vec<f64>,
    status: Vec<CellStatus>,
    pub provenance: Provenance,
}

impl SweepResult {
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    pub fn status(&self, i: usize, j: usize, k: usize) -> &CellStatus {
        &self.status[self.index(i, j, k)]
    }

    /// The value at `(i, j, k, c)`, or the failure code of its cell.
    pub fn value(&self, i: usize, j: usize, k: usize, c: usize) -> std::result::Result<f64, &str> {
        match self.status(i, j, k) {
            CellStatus::Ok => Ok(self.values[self.index(i, j, k) * self.shape[3] + c]),
            CellStatus::Failed(s) => Err(s),
        }
    }

    pub fn n_failed(&self) -> usize {
        self.status.iter().filter(|s| **s != CellStatus::Ok).count()
    }

    /// The time axis of the tensor; empty for steady-state observables.
    pub fn times(&self) -> &[f64] {
        if self.spec.observable.is_time_resolved() {
            &self.grids.times
        } else {
            &[]
        }
    }

    /// Tensor values in row-major `[n1, n2, nt, nc]` order, failures as
    /// `None`. Intended for equality checks.
    pub fn flat(&self) -> Vec<Option<f64>> {
        let nc = self.shape[3];
        (0..self.values.len())
            .map(|x| (self.status[x / nc] == CellStatus::Ok).then_some(self.values[x]))
            .collect()
    }
}

fn evaluate_cell(spec: &SweepSpec, grids: &ResolvedGrids, x1: f64, x2: Option<f64>) -> CellBlock {
    let nt = if spec.observable.is_time_resolved() { grids.times.len() } else { 1 };
    let fail_all = |e: Error| vec![Err(e.status()); nt];
    let params = match spec.cell_params(x1, x2).and_then(|p| p.validate().map(|_| p)) {
        Ok(p) => p,
        Err(e) => return fail_all(e),
    };
    let p0 = spec.initial();
    match spec.observable {
        Observable::Populations => grids
            .times
            .iter()
            .map(|&t| params.populations(&p0, t).map_err(|e| e.status()))
            .collect(),
        Observable::Fisher(theta) => match FisherEvaluator::new(&params, theta, &p0, spec.fisher) {
            Ok(ev) => grids.times.iter().map(|&t| ev.at(t).map(|v| vec![v]).map_err(|e| e.status())).collect(),
            Err(e) => fail_all(e),
        },
        Observable::SteadyState => vec![params.steady_state().map_err(|e| e.status())],
        Observable::SteadyFisher(theta) => vec![FisherEvaluator::new(&params, theta, &p0, spec.fisher)
            .and_then(|ev| ev.steady())
            .map(|v| vec![v])
            .map_err(|e| e.status())],
        Observable::OptimalTime(theta) => {
            let r = optimal_time(&params, theta, &grids.times, &p0, spec.fisher, &spec.optimal);
            vec![r
                .map(|(series, opt)| match opt {
                    OptimalTime::Interior { t, value } => vec![t, value, 0.0],
                    OptimalTime::Saturating { plateau } => vec![*series.times.last().unwrap(), plateau, 1.0],
                    OptimalTime::Boundary { t, value } => vec![t, value, 2.0],
                })
                .map_err(|e| e.status())]
        }
    }
}

/// Evaluates a single cell exactly as `run_sweep` does.
pub fn evaluate_point(spec: &SweepSpec, x1: f64, x2: Option<f64>) -> Result<Vec<std::result::Result<Vec<f64>, String>>> {
    let grids = spec.validate()?;
    Ok(evaluate_cell(spec, &grids, x1, x2))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let grids = spec.validate()?;
    let n1 = grids.axis1.len();
    let n2 = grids.axis2.as_ref().map_or(1, Vec::len);
    let nt = if spec.observable.is_time_resolved() { grids.times.len() } else { 1 };
    let nc = spec.components().len();

    let blocks: Vec<CellBlock> = (0..n1 * n2)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / n2, cell % n2);
            let x2 = grids.axis2.as_ref().map(|g| g[j]);
            evaluate_cell(spec, &grids, grids.axis1[i], x2)
        })
        .collect();

    let mut values = Vec::with_capacity(n1 * n2 * nt * nc);
    let mut status = Vec::with_capacity(n1 * n2 * nt);
    for block in blocks {
        for entry in block {
            match entry {
                Ok(v) => {
                    values.extend_from_slice(&v);
                    status.push(CellStatus::Ok);
                }
                Err(code) => {
                    values.extend(std::iter::repeat_n(f64::NAN, nc));
                    status.push(CellStatus::Failed(code));
                }
            }
        }
    }
    let unix_time = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(SweepResult {
        spec: spec.clone(),
        grids,
        shape: [n1, n2, nt, nc],
        values,
        status,
        provenance: Provenance { version: env!("CARGO_PKG_VERSION"), unix_time, deterministic: true },
    })
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Domain(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    /// `(i, j, k)` of the largest cell.
    pub index: (usize, usize, usize),
    pub value: f64,
    /// Coordinate along the requested axis after parabolic refinement.
    pub coordinate: f64,
    pub refined_value: f64,
}

/// Largest finite cell of a scalar observable, refined along `axis` by a
/// parabola through the cell and its two neighbours. Ties resolve to the
/// lowest index.
pub fn locate_extremum(result: &SweepResult, axis: Param) -> Result<Extremum> {
    let [n1, n2, nt, nc] = result.shape;
    let comp = match result.spec.observable {
        Observable::OptimalTime(_) => 1,
        _ if nc == 1 => 0,
        _ => {
            return Err(Error::InvalidSpec {
                field: "observable.kind".into(),
                reason: "extremum search needs a scalar observable".into(),
            })
        }
    };
    let along_first = if axis == result.spec.axis1.param {
        true
    } else if result.spec.axis2.as_ref().is_some_and(|a| a.param == axis) {
        false
    } else {
        return Err(Error::InvalidSpec { field: "axis".into(), reason: format!("{axis} is not a sweep axis") });
    };
    let get = |i: usize, j: usize, k: usize| result.value(i, j, k, comp).ok().filter(|v| v.is_finite());

    let mut best: Option<((usize, usize, usize), f64)> = None;
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..nt {
                if let Some(v) = get(i, j, k) {
                    if best.is_none_or(|(_, b)| v > b) {
                        best = Some(((i, j, k), v));
                    }
                }
            }
        }
    }
    let ((i, j, k), value) = best.ok_or(Error::EmptyResult)?;
    let (grid, pos) = if along_first {
        (&result.grids.axis1, i)
    } else {
        (result.grids.axis2.as_ref().expect("axis2 present"), j)
    };
    let coordinate = grid[pos];
    let neighbour = |d: isize| -> Option<(f64, f64)> {
        let q = pos.checked_add_signed(d).filter(|&q| q < grid.len())?;
        let v = if along_first { get(q, j, k) } else { get(i, q, k) }?;
        Some((grid[q], v))
    };
    let (coordinate, refined_value) = match (neighbour(-1), neighbour(1)) {
        (Some(a), Some(c)) => parabola_vertex(a, (coordinate, value), c).unwrap_or((coordinate, value)),
        _ => (coordinate, value),
    };
    Ok(Extremum { index: (i, j, k), value, coordinate, refined_value })
}

/// Vertex of the parabola through three points, if it opens downward and
/// lies between the outer two.
fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<(f64, f64)> {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let (x2, y2) = c;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv < 0.0) {
        return None;
    }
    // y = y1 + d (x − x1) + curv (x − x1)(x − x0)... written in Newton form
    let slope_at_x1 = d01 + curv * (x1 - x0);
    let x = x1 - slope_at_x1 / (2.0 * curv);
    let (lo, hi) = if x0 < x2 { (x0, x2) } else { (x2, x0) };
    if !(lo..=hi).contains(&x) {
        return None;
    }
    let y = y0 + d01 * (x - x0) + curv * (x - x0) * (x - x1);
    Some((x, y))
}
