//! Flat `section.key = value` configuration files.
//!
//! ```text
//! # high-bias resonance scan
//! model.kind = tls
//! model.eps_d = -5.4
//! model.eps_a = -3.8
//! vibration.omega0 = 0.091
//! sweep.axis1 = mu_R
//! sweep.axis1_grid = linear(-4.6, -2.6, 101)
//! observable.kind = steady_fisher
//! observable.theta = omega0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::distributions::Reservoir;
use crate::error::{Error, Result};
use crate::fisher::{FisherOptions, Method, OptimalTimeOptions};
use crate::model::{ModelKind, ModelParams, Param};
use crate::multilevel::MultilevelParams;
use crate::sweep::{fmt_f64, Axis, Grid, Observable, SweepSpec};
use crate::tls::JunctionParams;

pub const KEYS: [&str; 31] = [
    "model.kind",
    "model.eps_d",
    "model.eps_a",
    "model.gamma_hyb",
    "model.gamma_l",
    "model.gamma_r",
    "model.gamma_da",
    "model.gamma_ad",
    "model.gamma0",
    "model.lambda",
    "vibration.omega0",
    "vibration.t_vib",
    "leads.mu_l",
    "leads.mu_r",
    "leads.t_l",
    "leads.t_r",
    "initial.p0",
    "sweep.axis1",
    "sweep.axis1_grid",
    "sweep.axis2",
    "sweep.axis2_grid",
    "observable.kind",
    "observable.theta",
    "time.grid",
    "fisher.method",
    "fisher.step",
    "fisher.p_floor",
    "optimal.time_tol",
    "optimal.saturation_slope",
    "optimal.tie_rel",
    "output.layout",
];

pub const REQUIRED: [&str; 6] = [
    "model.kind",
    "model.eps_d",
    "model.eps_a",
    "vibration.omega0",
    "sweep.axis1",
    "sweep.axis1_grid",
];

const TLS_ONLY: [&str; 1] = ["model.gamma_hyb"];
const MULTILEVEL_ONLY: [&str; 7] = [
    "model.gamma_l",
    "model.gamma_r",
    "model.gamma_da",
    "model.gamma_ad",
    "model.gamma0",
    "model.lambda",
    "vibration.t_vib",
];

/// Whether `key` is meaningful for `kind`.
pub fn key_applies(kind: ModelKind, key: &str) -> bool {
    match kind {
        ModelKind::Tls => !MULTILEVEL_ONLY.contains(&key),
        ModelKind::Multilevel => !TLS_ONLY.contains(&key),
    }
}

/// Parsed entries with the line each came from.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    pub fn insert(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (value.into(), 0));
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::ConfigParse { line: self.line(key), message: format!("{key}: {}", message.into()) }
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| self.err(key, format!("expected {what}, got '{v}'"))),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        let v = self.parse::<f64>(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(key, format!("must be finite, got {x}"))),
            _ => Ok(v),
        }
    }
}

fn suggest(key: &str) -> Option<String> {
    KEYS.iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score > 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k.to_string())
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    let mut cfg = RawConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigParse {
            line,
            message: format!("expected 'section.key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey { line, key: key.to_string(), suggestion: suggest(key) });
        }
        if value.is_empty() {
            return Err(Error::ConfigParse { line, message: format!("{key}: missing value") });
        }
        if let Some((_, first)) = cfg.entries.get(key) {
            return Err(Error::ConfigParse { line, message: format!("{key}: duplicate key (first set on line {first})") });
        }
        cfg.entries.insert(key.to_string(), (value.to_string(), line));
    }
    Ok(cfg)
}

/// Model parameters from the config, with documented defaults for
/// everything absent. Keys belonging to the other model are rejected.
pub fn model_params(cfg: &RawConfig, kind: ModelKind) -> Result<ModelParams> {
    if let Some(k) = KEYS.iter().find(|k| !key_applies(kind, k) && cfg.get(k).is_some()) {
        return Err(cfg.err(k, format!("not a parameter of the {kind} model")));
    }
    let num = |key: &str, default: f64| -> Result<f64> { Ok(cfg.float(key)?.unwrap_or(default)) };
    let positive = |key: &str, default: f64, what: &str| -> Result<f64> {
        let v = num(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(cfg.err(key, format!("{what} must be > 0, got {v}")))
        }
    };
    let nonneg = |key: &str, default: f64| -> Result<f64> {
        let v = num(key, default)?;
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(cfg.err(key, format!("rate prefactor must be >= 0, got {v}")))
        }
    };
    let eps_d = num("model.eps_d", -5.4)?;
    let eps_a = num("model.eps_a", -3.8)?;
    let omega0 = positive("vibration.omega0", 0.091, "vibrational quantum")?;
    let t_l = positive("leads.t_l", 2.0, "temperature")?;
    let left = Reservoir { mu: num("leads.mu_l", 1.0)?, temperature: t_l };
    let right = Reservoir { mu: num("leads.mu_r", -1.0)?, temperature: positive("leads.t_r", 1.0, "temperature")? };
    let params = match kind {
        ModelKind::Tls => ModelParams::Tls(JunctionParams {
            eps_d,
            eps_a,
            omega0,
            gamma_hyb: positive("model.gamma_hyb", 0.7, "rate prefactor")?,
            left,
            right,
        }),
        ModelKind::Multilevel => ModelParams::Multilevel(MultilevelParams {
            eps_d,
            eps_a,
            omega0,
            gamma_l: nonneg("model.gamma_l", 1.0)?,
            gamma_r: nonneg("model.gamma_r", 1.0)?,
            gamma_da: nonneg("model.gamma_da", 1.0)?,
            gamma_ad: nonneg("model.gamma_ad", 1.0)?,
            gamma0: nonneg("model.gamma0", 0.5)?,
            lambda: num("model.lambda", 0.0)?,
            t_vib: positive("vibration.t_vib", t_l, "temperature")?,
            left,
            right,
        }),
    };
    params.validate().map_err(|e| Error::ConfigParse { line: 0, message: e.to_string() })?;
    Ok(params)
}

/// How `figure` and `sweep` lay out the CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One row per time, one column per (component, axis value).
    Wide,
    /// One row per cell and time.
    Long,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: SweepSpec,
    pub layout: Layout,
}

fn param(cfg: &RawConfig, key: &str) -> Result<Option<Param>> {
    match cfg.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<Param>().map(Some).map_err(|e| cfg.err(key, e.to_string())),
    }
}

fn grid(cfg: &RawConfig, key: &str) -> Result<Option<Grid>> {
    match cfg.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<Grid>().map(Some).map_err(|e| cfg.err(key, e.to_string())),
    }
}

pub fn spec_from_raw(cfg: &RawConfig) -> Result<RunConfig> {
    if let Some(k) = REQUIRED.iter().find(|k| cfg.get(k).is_none()) {
        return Err(Error::MissingKey(k.to_string()));
    }
    let kind: ModelKind = cfg.parse("model.kind", "tls or multilevel")?.expect("required");
    let base = model_params(cfg, kind)?;
    let axis1 = Axis {
        param: param(cfg, "sweep.axis1")?.expect("required"),
        grid: grid(cfg, "sweep.axis1_grid")?.expect("required"),
    };
    let axis2 = match (param(cfg, "sweep.axis2")?, grid(cfg, "sweep.axis2_grid")?) {
        (Some(param), Some(grid)) => Some(Axis { param, grid }),
        (None, None) => None,
        (Some(_), None) => return Err(Error::MissingKey("sweep.axis2_grid".into())),
        (None, Some(_)) => return Err(Error::MissingKey("sweep.axis2".into())),
    };
    let theta = param(cfg, "observable.theta")?;
    let observable = Observable::from_parts(cfg.get("observable.kind").unwrap_or("steady_state"), theta)?;
    let p0 = match cfg.get("initial.p0") {
        None => None,
        Some(v) => Some(
            v.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| cfg.err("initial.p0", format!("expected comma-separated numbers, got '{v}'")))?,
        ),
    };
    let defaults = FisherOptions::default();
    let fisher = FisherOptions {
        method: cfg.parse::<Method>("fisher.method", "central_fd or analytic_chain")?.unwrap_or(defaults.method),
        step: cfg.float("fisher.step")?,
        p_floor: cfg.float("fisher.p_floor")?.unwrap_or(defaults.p_floor),
    };
    let od = OptimalTimeOptions::default();
    let optimal = OptimalTimeOptions {
        time_tol: cfg.float("optimal.time_tol")?,
        saturation_slope: cfg.float("optimal.saturation_slope")?.unwrap_or(od.saturation_slope),
        tie_rel: cfg.float("optimal.tie_rel")?.unwrap_or(od.tie_rel),
    };
    let layout = match cfg.get("output.layout") {
        None | Some("long") => Layout::Long,
        Some("wide") => Layout::Wide,
        Some(other) => return Err(cfg.err("output.layout", format!("expected long or wide, got '{other}'"))),
    };
    let spec = SweepSpec {
        base,
        p0,
        axis1,
        axis2,
        observable,
        time_grid: grid(cfg, "time.grid")?,
        fisher,
        optimal,
    };
    spec.validate()?;
    Ok(RunConfig { spec, layout })
}

pub fn spec_from_config(text: &str) -> Result<RunConfig> {
    spec_from_raw(&parse_config(text)?)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    spec_from_config(&text)
}

/// Serializes a run configuration so that loading it gives back the same
/// spec, bit for bit.
pub fn to_config(run: &RunConfig) -> String {
    let spec = &run.spec;
    let mut out = Vec::new();
    let mut kv = |k: &str, v: String| out.push(format!("{k} = {v}"));
    let f = |x: f64| fmt_f64(x);
    kv("model.kind", spec.base.kind().to_string());
    match &spec.base {
        ModelParams::Tls(p) => {
            kv("model.eps_d", f(p.eps_d));
            kv("model.eps_a", f(p.eps_a));
            kv("model.gamma_hyb", f(p.gamma_hyb));
            kv("vibration.omega0", f(p.omega0));
            kv("leads.mu_l", f(p.left.mu));
            kv("leads.mu_r", f(p.right.mu));
            kv("leads.t_l", f(p.left.temperature));
            kv("leads.t_r", f(p.right.temperature));
        }
        ModelParams::Multilevel(p) => {
            kv("model.eps_d", f(p.eps_d));
            kv("model.eps_a", f(p.eps_a));
            kv("model.gamma_l", f(p.gamma_l));
            kv("model.gamma_r", f(p.gamma_r));
            kv("model.gamma_da", f(p.gamma_da));
            kv("model.gamma_ad", f(p.gamma_ad));
            kv("model.gamma0", f(p.gamma0));
            kv("model.lambda", f(p.lambda));
            kv("vibration.omega0", f(p.omega0));
            kv("vibration.t_vib", f(p.t_vib));
            kv("leads.mu_l", f(p.left.mu));
            kv("leads.mu_r", f(p.right.mu));
            kv("leads.t_l", f(p.left.temperature));
            kv("leads.t_r", f(p.right.temperature));
        }
    }
    if let Some(p0) = &spec.p0 {
        kv("initial.p0", p0.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", "));
    }
    kv("sweep.axis1", spec.axis1.param.to_string());
    kv("sweep.axis1_grid", spec.axis1.grid.to_string());
    if let Some(a) = &spec.axis2 {
        kv("sweep.axis2", a.param.to_string());
        kv("sweep.axis2_grid", a.grid.to_string());
    }
    kv("observable.kind", spec.observable.kind_name().to_string());
    if let Some(theta) = spec.observable.theta() {
        kv("observable.theta", theta.to_string());
    }
    if let Some(g) = &spec.time_grid {
        kv("time.grid", g.to_string());
    }
    kv("fisher.method", spec.fisher.method.to_string());
    if let Some(h) = spec.fisher.step {
        kv("fisher.step", f(h));
    }
    kv("fisher.p_floor", f(spec.fisher.p_floor));
    if let Some(t) = spec.optimal.time_tol {
        kv("optimal.time_tol", f(t));
    }
    kv("optimal.saturation_slope", f(spec.optimal.saturation_slope));
    kv("optimal.tie_rel", f(spec.optimal.tie_rel));
    kv(
        "output.layout",
        match run.layout {
            Layout::Wide => "wide",
            Layout::Long => "long",
        }
        .to_string(),
    );
    out.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
model.kind = tls
model.eps_d = -5.4   # donor
model.eps_a = -3.8
vibration.omega0 = 0.091
sweep.axis1 = mu_R
sweep.axis1_grid = linear(-4.6, -2.6, 11)
";

    #[test]
    fn minimal_config_fills_defaults() {
        let run = spec_from_config(MINIMAL).unwrap();
        assert_eq!(run.spec.observable, Observable::SteadyState);
        assert_eq!(run.layout, Layout::Long);
        let ModelParams::Tls(p) = run.spec.base else { panic!() };
        assert_eq!((p.gamma_hyb, p.left.temperature, p.right.mu), (0.7, 2.0, -1.0));
    }

    #[test]
    fn negative_temperature_is_named() {
        let text = format!("{MINIMAL}leads.t_r = -1\n");
        match spec_from_config(&text) {
            Err(Error::ConfigParse { line: 7, message }) => {
                assert!(message.contains("leads.t_r") && message.contains("temperature must be > 0"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_gets_a_suggestion() {
        let text = format!("{MINIMAL}leads.temprature_l = 1\n");
        assert!(matches!(spec_from_config(&text), Err(Error::UnknownKey { line: 7, .. })));
        match spec_from_config(&format!("{MINIMAL}vibration.omega = 1\n")) {
            Err(Error::UnknownKey { suggestion, .. }) => assert_eq!(suggestion.as_deref(), Some("vibration.omega0")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_and_malformed_entries() {
        let text = MINIMAL.replace("vibration.omega0 = 0.091\n", "");
        assert_eq!(spec_from_config(&text).unwrap_err(), Error::MissingKey("vibration.omega0".into()));
        assert!(matches!(spec_from_config("model.kind tls\n"), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(
            spec_from_config(&format!("{MINIMAL}model.eps_d = 1\n")),
            Err(Error::ConfigParse { line: 7, .. })
        ));
        assert!(matches!(
            spec_from_config(&format!("{MINIMAL}model.gamma0 = 1\n")),
            Err(Error::ConfigParse { line: 7, .. })
        ));
        assert!(matches!(
            spec_from_config(&MINIMAL.replace("linear(-4.6, -2.6, 11)", "linear(-4.6, -2.6)")),
            Err(Error::ConfigParse { line: 6, .. })
        ));
    }

    #[test]
    fn serialized_config_reloads_identically() {
        let text = format!(
            "{MINIMAL}observable.kind = fisher\nobservable.theta = eps_a\ntime.grid = linear(0, 40, 7)\ninitial.p0 = 0.3, 0.7\nfisher.step = 1e-5\n"
        );
        let run = spec_from_config(&text).unwrap();
        let again = spec_from_config(&to_config(&run)).unwrap();
        assert_eq!(run, again);
        let ml = text.replace("model.kind = tls", "model.kind = multilevel").replace("initial.p0 = 0.3, 0.7\n", "model.lambda = 0.01\n");
        let run = spec_from_config(&ml).unwrap();
        assert_eq!(spec_from_config(&to_config(&run)).unwrap(), run);
    }
}
