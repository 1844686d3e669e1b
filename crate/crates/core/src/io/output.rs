//! CSV writers and the `.meta` provenance sidecar.
//!
//! Data files hold no timestamps, so repeated runs are byte-identical.
//! Numbers use the shortest text that parses back to the same `f64`.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::config::{to_config, Layout, RunConfig};
use crate::model::Param;
use crate::sweep::{Axis, Observable, SweepResult};

pub const TIME_UNIT: &str = "hbar/eV";

/// Shortest round-trip text, in exponent form outside `[1e-5, 1e16)`.
pub fn fmt_data(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Six significant digits for console summaries.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let s = format!("{:.*}", (5 - exp).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (m, e) = s.split_once('e').expect("exponent form");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{e}")
    }
}

fn component_unit(observable: Observable, component: &str) -> &'static str {
    match (observable, component) {
        (Observable::Fisher(p) | Observable::SteadyFisher(p) | Observable::OptimalTime(p), "I" | "I_opt") => p.fisher_unit(),
        (_, "t_opt") => TIME_UNIT,
        _ => "1",
    }
}

fn axis_tag(axis: &Axis) -> String {
    if axis.param == Param::Omega0 {
        "w".to_string()
    } else {
        format!("{}=", axis.param)
    }
}

fn units_line(columns: &[(String, &str)]) -> String {
    let items: Vec<String> = columns.iter().map(|(c, u)| format!("{c}={u}")).collect();
    format!("# units: {}\n", items.join(", "))
}

/// Writes a `# units:` line, the header and the rows.
pub fn write_table<W: Write>(columns: &[(String, &str)], rows: &[Vec<String>], mut out: W) -> Result<()> {
    out.write_all(units_line(columns).as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns.iter().map(|(c, _)| c.as_str()))?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the result as CSV in the given layout.
pub fn write_csv<W: Write>(result: &SweepResult, layout: Layout, out: W) -> Result<()> {
    let (columns, rows) = match layout {
        Layout::Wide => wide(result)?,
        Layout::Long => long(result),
    };
    write_table(&columns, &rows, out)
}

type Table = (Vec<(String, &'static str)>, Vec<Vec<String>>);

/// One row per time, one column per component and axis value. Failed
/// entries hold their status code.
fn wide(result: &SweepResult) -> Result<Table> {
    let spec = &result.spec;
    if spec.axis2.is_some() {
        return Err(Error::InvalidSpec { field: "output.layout".into(), reason: "wide layout needs a single sweep axis".into() });
    }
    let [n1, _, nt, _] = result.shape;
    let comps = spec.components();
    let times = result.times();
    let tag = axis_tag(&spec.axis1);
    let mut columns: Vec<(String, &'static str)> = Vec::new();
    if !times.is_empty() {
        columns.push(("t".into(), TIME_UNIT));
    }
    for x in &result.grids.axis1 {
        for c in &comps {
            columns.push((format!("{c}_{tag}{x}"), component_unit(spec.observable, c)));
        }
    }
    let rows = (0..nt)
        .map(|k| {
            let mut row = Vec::with_capacity(columns.len());
            if !times.is_empty() {
                row.push(fmt_data(times[k]));
            }
            for i in 0..n1 {
                for c in 0..comps.len() {
                    row.push(match result.value(i, 0, k, c) {
                        Ok(v) => fmt_data(v),
                        Err(code) => code.to_string(),
                    });
                }
            }
            row
        })
        .collect();
    Ok((columns, rows))
}

/// One row per cell and time, with a status column. Failed rows leave the
/// values empty.
fn long(result: &SweepResult) -> Table {
    let spec = &result.spec;
    let [n1, n2, nt, _] = result.shape;
    let comps = spec.components();
    let times = result.times();
    let mut columns: Vec<(String, &'static str)> = vec![(spec.axis1.param.to_string(), spec.axis1.param.unit())];
    if let Some(a) = &spec.axis2 {
        columns.push((a.param.to_string(), a.param.unit()));
    }
    if !times.is_empty() {
        columns.push(("t".into(), TIME_UNIT));
    }
    for c in &comps {
        columns.push((c.to_string(), component_unit(spec.observable, c)));
    }
    columns.push(("status".into(), "-"));
    let mut rows = Vec::with_capacity(n1 * n2 * nt);
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..nt {
                let mut row = vec![fmt_data(result.grids.axis1[i])];
                if let Some(g) = &result.grids.axis2 {
                    row.push(fmt_data(g[j]));
                }
                if !times.is_empty() {
                    row.push(fmt_data(times[k]));
                }
                for c in 0..comps.len() {
                    row.push(result.value(i, j, k, c).map(fmt_data).unwrap_or_default());
                }
                row.push(result.status(i, j, k).label().to_string());
                rows.push(row);
            }
        }
    }
    (columns, rows)
}

/// `data.csv` → `data.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Provenance as comments followed by the spec echo, itself a loadable
/// config.
pub fn meta_text(result: &SweepResult, run: &RunConfig, source: &str) -> String {
    let p = &result.provenance;
    let mut s = String::new();
    s.push_str(&format!("# source: {source}\n"));
    s.push_str(&format!("# version: {} {}\n", env!("CARGO_PKG_NAME"), p.version));
    s.push_str(&format!("# unix_time: {}\n", p.unix_time));
    s.push_str(&format!("# deterministic: {}\n", p.deterministic));
    s.push_str(&format!("# shape: {:?}\n", result.shape));
    s.push_str(&format!("# failed_cells: {}\n", result.n_failed()));
    s.push_str(&to_config(run));
    s
}

/// Writes `path` and its sidecar.
pub fn write_files(result: &SweepResult, run: &RunConfig, path: &Path, source: &str) -> Result<()> {
    let io = |e: std::io::Error, p: &Path| Error::Io(format!("{}: {e}", p.display()));
    let file = std::fs::File::create(path).map_err(|e| io(e, path))?;
    write_csv(result, run.layout, std::io::BufWriter::new(file))?;
    let meta = sidecar_path(path);
    std::fs::write(&meta, meta_text(result, run, source)).map_err(|e| io(e, &meta))?;
    Ok(())
}
