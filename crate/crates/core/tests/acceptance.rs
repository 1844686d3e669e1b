//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::time::Instant;

use rectifier::fisher::{
    fisher_at_time, fisher_steady_state, optimal_time, FisherOptions, Method, OptimalTime, OptimalTimeOptions,
};
use rectifier::generator::Populations;
use rectifier::io::config::RunConfig;
use rectifier::io::output::write_csv;
use rectifier::io::presets::{preset, IDS, MODES};
use rectifier::model::{ModelKind, ModelParams, Param};
use rectifier::multilevel::{
    closed_classes, multilevel_generator, multilevel_rates, multilevel_steady_state, steady_state_null_space, D0,
};
use rectifier::ode::{integrate_linear_stiff, Tolerance};
use rectifier::sweep::{locate_extremum, run_sweep, run_sweep_with_threads, Axis, Grid, Observable, SweepSpec};
use rectifier::tls::{tls_generator, tls_propagate, tls_rates, JunctionParams};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Junction with `T_L = 2`, `T_R = 1` and symmetric bias `±bias/2`.
fn hot_left(bias: f64, omega0: f64) -> ModelParams {
    let mut p = JunctionParams { omega0, ..JunctionParams::anthracene_pmda() };
    p.left.mu = bias / 2.0;
    p.right.mu = -bias / 2.0;
    ModelParams::Tls(p)
}

fn equal_temperatures(t: f64, omega0: f64) -> ModelParams {
    let mut p = JunctionParams { omega0, ..JunctionParams::anthracene_pmda() };
    p.left.mu = 3.8;
    p.right.mu = -3.8;
    p.left.temperature = t;
    p.right.temperature = t;
    ModelParams::Tls(p)
}

fn generator_validity() -> Outcome {
    let mut rng = common::rng(1);
    let mut worst = 0.0f64;
    let mut min_off = f64::INFINITY;
    for _ in 0..1000 {
        let p = common::tls_params(&mut rng);
        let g = tls_generator(&tls_rates(&p).map_err(|e| e.to_string())?, p.gamma_hyb);
        let scale = g.max_abs_entry();
        worst = g.column_sums().iter().fold(worst, |w, s| w.max(s.abs() / scale));
        min_off = min_off.min(g.min_off_diagonal());
        let p = common::multilevel_params(&mut rng);
        let g = multilevel_generator(&multilevel_rates(&p).map_err(|e| e.to_string())?);
        let scale = g.max_abs_entry();
        worst = g.column_sums().iter().fold(worst, |w, s| w.max(s.abs() / scale));
        min_off = min_off.min(g.min_off_diagonal());
    }
    check(
        worst <= 1e-14 && min_off >= 0.0,
        format!("max |column sum|/max entry = {worst:.2e}, min off-diagonal = {min_off:.2e} (1000 draws per model)"),
    )
}

fn tls_closed_form_vs_expm() -> Outcome {
    let mut rng = common::rng(2);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let p = common::tls_params(&mut rng);
        let p0 = common::simplex::<2>(&mut rng);
        let t = rand::Rng::random_range(&mut rng, 0.0..30.0);
        let closed = tls_propagate(&Populations::new(p0).unwrap(), t, &p).map_err(|e| e.to_string())?;
        let u = tls_generator(&tls_rates(&p).unwrap(), p.gamma_hyb).propagator(t);
        let expm = u * nalgebra::Vector2::from(p0);
        for i in 0..2 {
            worst = worst.max((closed.values()[i] - expm[i]).abs());
        }
    }
    check(worst <= 1e-12, format!("max |closed form - expm| = {worst:.2e} over 500 draws"))
}

fn five_state_steady_routes() -> Outcome {
    let mut rng = common::rng(3);
    let mut worst = 0.0f64;
    let mut longest = 0.0f64;
    let mut done = 0;
    while done < 200 {
        let p = common::multilevel_params(&mut rng);
        let g = multilevel_generator(&multilevel_rates(&p).unwrap());
        if closed_classes(&g).len() != 1 {
            continue;
        }
        let lu = multilevel_steady_state(&g).map_err(|e| e.to_string())?;
        let ns = steady_state_null_space(&g).map_err(|e| e.to_string())?;
        let mut ev = g.eigenvalues();
        ev.sort_by(|a, b| a.0.hypot(a.1).total_cmp(&b.0.hypot(b.1)));
        let gap = ev[1..].iter().map(|e| e.0.abs()).fold(f64::INFINITY, f64::min);
        let t = 50.0 / gap;
        longest = longest.max(t);
        let ode = integrate_linear_stiff(g.matrix(), *Populations::<5>::basis(D0).values(), t, Tolerance::default())
            .map_err(|e| e.to_string())?;
        for i in 0..5 {
            let (a, b, c) = (lu.values()[i], ns.values()[i], ode[i]);
            worst = worst.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
        }
        done += 1;
    }
    check(worst <= 1e-9, format!("max pairwise difference (LU, null space, ODE at 50/gap) = {worst:.2e} over 200 instances, longest t = {longest:.2e}"))
}

/// Central differences cannot resolve `dp` below about `eps/h ~ 1e-11`, so
/// pairs whose exact `I` is under this are reported separately.
const FD_RESOLUTION: f64 = 1e-12;

fn fisher_oracle() -> Outcome {
    let mut rng = common::rng(4);
    let fd = FisherOptions::default();
    let an = FisherOptions { method: Method::AnalyticChain, ..fd };
    let mut worst = (0.0f64, String::new());
    let mut worst_resolved = 0.0f64;
    let (mut pairs, mut failures, mut unresolved_failures) = (0, 0, 0);
    let mut done = 0;
    while done < 200 {
        let p = ModelParams::Tls(common::tls_params(&mut rng));
        let t = rand::Rng::random_range(&mut rng, 0.05..20.0);
        let p0 = common::simplex::<2>(&mut rng).to_vec();
        let pt = p.populations(&p0, t).unwrap();
        let ss = p.steady_state().unwrap();
        if pt.iter().chain(&ss).any(|&x| x <= 1e-6) {
            continue;
        }
        for &theta in ModelKind::Tls.params() {
            let both = [
                (fisher_at_time(&p, theta, t, &p0, fd), fisher_at_time(&p, theta, t, &p0, an)),
                (fisher_steady_state(&p, theta, fd), fisher_steady_state(&p, theta, an)),
            ];
            for (a, b) in both {
                let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
                let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
                pairs += 1;
                if rel >= 1e-5 {
                    failures += 1;
                    if b < FD_RESOLUTION {
                        unresolved_failures += 1;
                    }
                }
                if b >= FD_RESOLUTION {
                    worst_resolved = worst_resolved.max(rel);
                }
                if rel > worst.0 {
                    worst = (rel, format!("{theta} at t = {t:.3}: fd {a:e}, analytic {b:e}"));
                }
            }
        }
        done += 1;
    }
    check(
        worst.0 < 1e-5,
        format!(
            "max relative error {:.2e} ({}); {failures} of {pairs} pairs over 200 draws exceed 1e-5, {unresolved_failures} of them with exact I < {FD_RESOLUTION:e}; max relative error where I >= {FD_RESOLUTION:e}: {worst_resolved:.2e}",
            worst.0, worst.1
        ),
    )
}

fn times(end: f64, n: usize) -> Vec<f64> {
    Grid::linear(0.0, end, n).points().unwrap()
}

fn peak(params: &ModelParams, theta: Param, grid: &[f64]) -> Result<OptimalTime, String> {
    let p0 = params.default_initial();
    optimal_time(params, theta, grid, &p0, FisherOptions::default(), &OptimalTimeOptions::default())
        .map(|(_, opt)| opt)
        .map_err(|e| e.to_string())
}

fn peak_shift() -> Outcome {
    let grid = times(40.0, 401);
    let mut ts = Vec::new();
    for bias in [0.2, 2.0, 6.0] {
        match peak(&hot_left(bias, 0.196), Param::EpsA, &grid)? {
            OptimalTime::Interior { t, .. } => ts.push(t),
            other => return Err(format!("bias {bias}: expected an interior peak, got {other:?}")),
        }
    }
    check(
        ts[2] < ts[1] && ts[1] < ts[0],
        format!("t*(0.2) = {:.4}, t*(2) = {:.4}, t*(6) = {:.4}", ts[0], ts[1], ts[2]),
    )
}

/// max_t I(eps_a) / max_t I(eps_d) at bias 2, omega0 = 0.196, from the
/// first verified run.
const ORDERING_RATIO: f64 = 11.735_472_838_468_874;

fn information_ordering() -> Outcome {
    let grid = times(40.0, 401);
    let p = hot_left(2.0, 0.196);
    let a = peak(&p, Param::EpsA, &grid)?.point().1;
    let d = peak(&p, Param::EpsD, &grid)?.point().1;
    let ratio = a / d;
    let locked = (ratio - ORDERING_RATIO).abs() <= 1e-9 * ORDERING_RATIO;
    check(
        ratio >= 10.0 && locked,
        format!("max I(eps_a) = {a:.6e}, max I(eps_d) = {d:.6e}, ratio {ratio:?} (golden {ORDERING_RATIO:?})"),
    )
}

fn saturation() -> Outcome {
    let grid = times(60.0, 601);
    let temps = [1.0, 0.5, 0.1, 0.05];
    let mut ok = true;
    let mut lines = Vec::new();
    for omega0 in MODES {
        let mut plateaus = Vec::new();
        for t in temps {
            match peak(&equal_temperatures(t, omega0), Param::Omega0, &grid)? {
                OptimalTime::Saturating { plateau } => plateaus.push(plateau),
                other => {
                    ok = false;
                    lines.push(format!("omega0 {omega0}, T {t}: not saturating ({other:?})"));
                    plateaus.push(f64::NAN);
                }
            }
        }
        let increasing = plateaus.windows(2).all(|w| w[1] > w[0]);
        ok &= increasing;
        let text: Vec<String> = plateaus.iter().map(|v| format!("{v:.4}")).collect();
        lines.push(format!("omega0 {omega0}: plateaus at T = 1, 0.5, 0.1, 0.05: {}{}", text.join(", "), if increasing { "" } else { " NOT increasing" }));
    }
    check(ok, lines.join("; "))
}

fn resonance_proximity() -> Outcome {
    let base = equal_temperatures(0.05, 0.091);
    let spec = SweepSpec::new(base, Axis { param: Param::MuR, grid: Grid::linear(-4.6, -2.6, 101) }, Observable::SteadyFisher(Param::Omega0));
    let r = run_sweep(&spec).map_err(|e| e.to_string())?;
    let ext = locate_extremum(&r, Param::MuR).map_err(|e| e.to_string())?;
    let cell = r.grids.axis1[ext.index.0];
    let target = -3.8 + 0.091;
    check(
        (cell - target).abs() <= 0.02 + 1e-12,
        format!("argmax mu_R = {cell:.3} (refined {:.4}), target eps_a + omega0 = {target:.3}, failed cells {}", ext.coordinate, r.n_failed()),
    )
}

fn multilevel_decay() -> Outcome {
    let mut curves = Vec::new();
    let mut ok = true;
    let mut lines = Vec::new();
    for id in ["fig5b", "fig5d"] {
        let run = preset(id).unwrap().run;
        let r = run_sweep(&run.spec).map_err(|e| e.to_string())?;
        let v: Vec<f64> = (0..r.shape[0]).map(|i| r.value(i, 0, 0, 0).map_err(|s| format!("{id}: cell {i} failed: {s}"))).collect::<Result<_, _>>()?;
        let k = v.iter().enumerate().fold(0, |k, (i, x)| if *x > v[k] { i } else { k });
        let decreasing = v[k..].windows(2).all(|w| w[1] < w[0]);
        let ratio = v[v.len() - 1] / v[k];
        ok &= decreasing && ratio < 1e-6;
        lines.push(format!("{id}: peak {:.4e} at omega0 {:.2}, strictly decreasing after peak: {decreasing}, I(2)/peak = {ratio:.2e}", v[k], r.grids.axis1[k]));
        curves.push((r.grids.axis1.clone(), v));
    }
    // fig5d is the lower temperature
    let (omegas, hot) = &curves[0];
    let cold = &curves[1].1;
    let violations: Vec<f64> = omegas.iter().zip(hot.iter().zip(cold)).filter(|(_, (h, c))| c < h).map(|(w, _)| *w).collect();
    if let Some(first) = violations.first() {
        ok = false;
        lines.push(format!("lower-T curve below higher-T curve at {} of {} points, first at omega0 = {first:.2}", violations.len(), omegas.len()));
    } else {
        lines.push("lower-T curve pointwise >= higher-T curve".into());
    }
    check(ok, lines.join("; "))
}

fn csv_bytes(run: &RunConfig, threads: Option<usize>) -> Result<Vec<u8>, String> {
    let r = match threads {
        Some(n) => run_sweep_with_threads(&run.spec, n),
        None => run_sweep(&run.spec),
    }
    .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    write_csv(&r, run.layout, &mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn regression() -> Outcome {
    let n = std::thread::available_parallelism().map_or(4, |n| n.get()).max(2);
    let mut bad = Vec::new();
    for id in IDS {
        let run = preset(id).map_err(|e| e.to_string())?.run;
        let first = csv_bytes(&run, None)?;
        let second = csv_bytes(&run, None)?;
        let one = csv_bytes(&run, Some(1))?;
        let many = csv_bytes(&run, Some(n))?;
        if !(first == second && first == one && first == many) {
            bad.push(id);
        }
    }
    check(bad.is_empty(), format!("{} presets, thread counts 1 and {n}; differing: {bad:?}", IDS.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("generator validity", generator_validity),
        ("TLS closed form vs matrix exponential", tls_closed_form_vs_expm),
        ("five-state steady-state routes", five_state_steady_routes),
        ("Fisher FD vs analytic chain", fisher_oracle),
        ("peak shift with bias", peak_shift),
        ("I(eps_a) >> I(eps_d)", information_ordering),
        ("saturation of I(omega0)", saturation),
        ("resonance proximity", resonance_proximity),
        ("multilevel decay", multilevel_decay),
        ("byte-identical presets", regression),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} [{secs:.2}s]: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} [{secs:.2}s]: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
