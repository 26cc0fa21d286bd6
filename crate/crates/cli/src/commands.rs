//! Command bodies: each resolves its settings, runs the core operation and
//! writes the report, table and profile it produces.

use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use hslab_core::concentration::{
    bubble_sequence, check_concentration_inequalities, concentration_triple, tail_max,
    translation_sweep,
};
use hslab_core::energy::rayleigh_quotient;
use hslab_core::io::{read_profile, write_profile};
use hslab_core::mountain_pass_threshold;
use hslab_core::params::ProblemParams;
use hslab_core::pohozaev::{localized_pohozaev_functional, nonexistence_scan, pohozaev_report};
use hslab_core::profile::{bubble, hardy_sobolev_ansatz, AnnularCutoff, RadialProfile};
use hslab_core::quadrature::{weighted_power_integral, RadialGrid};
use hslab_core::solvers::{minimize_hardy_sobolev, radial_best_constants, solve_double_critical};
use hslab_core::testgen::TestProfileGenerator;
use rayon::prelude::*;

use crate::args::Command;
use crate::config::Settings;
use crate::report::{cell, write_table, Report};
use crate::CliError;

pub fn run(cmd: &Command) -> Result<(), CliError> {
    let started = Instant::now();
    let set = Settings::resolve(cmd.common())?;
    let mut report = Report::new(cmd.name(), &set.params, &set.grid, set.seed);
    let outcome = match cmd {
        Command::Constants { best, .. } => {
            constants(&set, &mut report, *best || set.file.flag("best")?)
        }
        Command::Extremal(_) => extremal(&set, &mut report),
        Command::Solve(_) => solve(&set, &mut report),
        Command::Pohozaev { epsilon, .. } => pohozaev(
            &set,
            &mut report,
            set.value(epsilon, "epsilon")?.unwrap_or(0.1),
        ),
        Command::ScanQ { q_values, .. } => {
            scan_q(&set, &mut report, set.list(q_values, "q_values")?)
        }
        Command::Translate { alphas, .. } => {
            translate(&set, &mut report, set.list(alphas, "alphas")?)
        }
        Command::Concentrate { delta, rates, .. } => concentrate(
            &set,
            &mut report,
            set.value(delta, "delta")?.unwrap_or(1.0),
            set.list(rates, "rates")?,
        ),
        Command::Sweep { mus, ss, task, .. } => {
            let task = set
                .value(task, "task")?
                .unwrap_or_else(|| "solve".to_string());
            sweep(
                &set,
                &mut report,
                set.list(mus, "mus")?,
                set.list(ss, "ss")?,
                &task,
            )
        }
    };
    // a failed run still reports what it has when the failure is numerical
    let converged = match outcome {
        Ok(c) => c,
        Err(e @ CliError::Numerical(_)) => {
            report.text("error", e.message());
            false
        }
        Err(e) => return Err(e),
    };
    report.flag("converged", converged);
    if set.timing {
        report.num("wall_time_s", started.elapsed().as_secs_f64());
    }
    let to_stdout = !matches!(cmd, Command::Sweep { .. });
    if set.out.is_some() || to_stdout {
        report.write(set.out.as_deref())?;
    }
    if converged {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "{} did not converge",
            cmd.name()
        )))
    }
}

fn build_grid(set: &Settings) -> Result<RadialGrid, CliError> {
    Ok(set.grid.build()?)
}

/// The input profile from `--profile-in`, or the default one on the
/// configured grid. The report records where it came from.
fn input_profile(
    set: &Settings,
    report: &mut Report,
    default_name: &str,
    default: impl FnOnce(&RadialGrid) -> RadialProfile,
) -> Result<(RadialGrid, RadialProfile), CliError> {
    match &set.profile_in {
        Some(path) => {
            let file =
                File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let (grid, u) = read_profile(BufReader::new(file), Some(set.params.n))?;
            if grid.dim() != set.params.n {
                return Err(CliError::Validation(format!(
                    "profile dimension {} differs from n = {}",
                    grid.dim(),
                    set.params.n
                )));
            }
            report.grid(&grid.spec());
            report.text("profile_source", &path.display().to_string());
            Ok((grid, u))
        }
        None => {
            let grid = build_grid(set)?;
            let u = default(&grid);
            report.text("profile_source", default_name);
            Ok((grid, u))
        }
    }
}

fn save_profile(set: &Settings, grid: &RadialGrid, u: &RadialProfile) -> Result<(), CliError> {
    if let Some(path) = &set.profile_out {
        let file =
            File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        write_profile(std::io::BufWriter::new(file), grid, u)?;
    }
    Ok(())
}

fn constants(set: &Settings, report: &mut Report, best: bool) -> Result<bool, CliError> {
    let params = &set.params;
    let (g1, g2) = params.hardy_exponents();
    report.num("gamma1", g1);
    report.num("gamma2", g2);
    report.num("scaling_exponent", params.scaling_exponent());
    if best {
        let grid = build_grid(set)?;
        let (k0, ks) = radial_best_constants(params, &grid, &set.opts)?;
        report.num("k0", k0);
        report.num("ks", ks);
        report.num("c_star", mountain_pass_threshold(params, k0, ks)?);
        report.text("constants_source", "radial minimization on the grid");
    } else {
        report.text("constants_source", "closed-form exponents");
    }
    Ok(true)
}

fn extremal(set: &Settings, report: &mut Report) -> Result<bool, CliError> {
    let grid = build_grid(set)?;
    let params = &set.params;
    let res = minimize_hardy_sobolev(
        params,
        &grid,
        &hardy_sobolev_ansatz(&grid, params),
        &set.opts,
    )?;
    report.num("quotient", res.inv_constant);
    report.num("best_constant", res.best_constant());
    report.num("el_residual", res.el_residual);
    report.int("iterations", res.iterations as u64);
    report.text("constants_source", "radial minimization on the grid");
    if params.s == 0.0 && params.mu == 0.0 {
        let anchor = rayleigh_quotient(params, &grid, &bubble(&grid, params))?;
        report.num("bubble_quotient", anchor);
        report.num("anchor_rel_gap", (res.inv_constant - anchor).abs() / anchor);
    }
    save_profile(set, &grid, &res.profile)?;
    Ok(res.converged)
}

fn solve(set: &Settings, report: &mut Report) -> Result<bool, CliError> {
    let grid = build_grid(set)?;
    let rep = solve_double_critical(&set.params, &grid, &set.opts)?;
    let e = &rep.energy;
    report.num("phi", e.phi);
    report.num("grad_term", e.grad_term);
    report.num("hardy_term", e.hardy_term);
    report.num("sobolev_mass", e.sobolev_mass);
    report.num("hs_mass", e.hs_mass);
    report.num("threshold", rep.threshold);
    report.flag("in_window", rep.in_window);
    report.num("k0", rep.k0);
    report.num("ks", rep.ks);
    report.text("constants_source", "radial minimization on the grid");
    report.num("el_residual", rep.el_residual);
    report.int("iterations", rep.iterations as u64);
    save_profile(set, &grid, &rep.profile)?;
    Ok(rep.converged)
}

fn pohozaev(set: &Settings, report: &mut Report, epsilon: f64) -> Result<bool, CliError> {
    let params = &set.params;
    let mut gen = TestProfileGenerator::new(set.seed);
    let (grid, u) = input_profile(set, report, "generated smooth bump", |g| gen.smooth_bump(g))?;
    let q = params.q.unwrap_or(params.p_star);
    let cutoff = AnnularCutoff::new(epsilon)?;
    let rep = pohozaev_report(params, &grid, &u, &cutoff, q)?;
    let q_mass = weighted_power_integral(&grid, &u, q, 0.0)?;
    report.num("q", q);
    report.num("epsilon", epsilon);
    report.num("identity_lhs", rep.lhs);
    report.num("identity_boundary", rep.boundary);
    report.num("identity_residual", rep.identity_residual);
    report.num("functional_value", rep.functional_value);
    report.num(
        "localized_functional_value",
        localized_pohozaev_functional(params, &grid, &u, q, epsilon)?,
    );
    report.num("q_mass", q_mass);
    report.num(
        "expected_value",
        params.dim() * (1.0 / params.p_star - 1.0 / q) * q_mass,
    );
    report.num("q_coefficient_check", rep.q_coefficient_check);
    Ok(true)
}

fn scan_q(set: &Settings, report: &mut Report, qs: Option<Vec<f64>>) -> Result<bool, CliError> {
    let params = &set.params;
    let qs = qs.unwrap_or_else(|| vec![params.p, params.p_star, params.p_star + 1.0]);
    let grid = build_grid(set)?;
    let rows = nonexistence_scan(params, &grid, &qs, &set.opts)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                cell(r.q),
                cell(r.el_residual),
                cell(r.q_mass),
                cell(r.initial_q_mass),
                cell(r.collapse_ratio()),
                cell(r.pohozaev_value),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]
        })
        .collect();
    if set.csv.is_some() {
        let header = [
            "q",
            "el_residual",
            "q_mass",
            "initial_q_mass",
            "collapse_ratio",
            "pohozaev_value",
            "iterations",
            "converged",
        ];
        write_table(set.csv.as_deref(), &header, &table)?;
    }
    report.int("rows", rows.len() as u64);
    for (k, r) in rows.iter().enumerate() {
        report.num(&format!("row{k}_q"), r.q);
        report.num(&format!("row{k}_collapse_ratio"), r.collapse_ratio());
        report.num(&format!("row{k}_el_residual"), r.el_residual);
        report.num(&format!("row{k}_pohozaev_value"), r.pohozaev_value);
        report.flag(&format!("row{k}_converged"), r.converged);
    }
    // a diagnostic scan: rows that stall are data, not failures
    Ok(true)
}

fn translate(
    set: &Settings,
    report: &mut Report,
    alphas: Option<Vec<f64>>,
) -> Result<bool, CliError> {
    let params = &set.params;
    let alphas = alphas.unwrap_or_else(|| vec![0.0, 5.0, 10.0, 25.0, 50.0]);
    let (grid, u) = input_profile(set, report, "bubble", |g| bubble(g, params))?;
    let rows = translation_sweep(params, &grid, &u, &alphas)?;
    let plain = rayleigh_quotient(&params.with_mu(0.0)?, &grid, &u)?;
    if set.csv.is_some() {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| vec![cell(r.alpha), cell(r.hardy_term), cell(r.quotient)])
            .collect();
        write_table(
            set.csv.as_deref(),
            &["alpha", "hardy_term", "quotient"],
            &table,
        )?;
    }
    report.num("mu0_quotient", plain);
    if let Some(last) = rows.last() {
        report.num("last_alpha", last.alpha);
        report.num("last_quotient", last.quotient);
        report.num("last_rel_gap", (last.quotient - plain) / plain);
    }
    report.flag(
        "monotone",
        rows.windows(2).all(|w| w[1].quotient <= w[0].quotient),
    );
    Ok(true)
}

fn concentrate(
    set: &Settings,
    report: &mut Report,
    delta: f64,
    rates: Option<Vec<f64>>,
) -> Result<bool, CliError> {
    let params = &set.params;
    let rates = rates.unwrap_or_else(|| vec![1.0, 4.0, 16.0, 64.0]);
    let (grid, u) = input_profile(set, report, "bubble", |g| bubble(g, params))?;
    let seq = bubble_sequence(&grid, params, &u, &rates)?;
    let triples = seq
        .iter()
        .map(|v| concentration_triple(params, &grid, v, delta))
        .collect::<hslab_core::Result<Vec<_>>>()?;
    if set.csv.is_some() {
        let table: Vec<Vec<String>> = rates
            .iter()
            .zip(&triples)
            .map(|(r, t)| vec![cell(*r), cell(t.alpha), cell(t.beta), cell(t.gamma)])
            .collect();
        write_table(
            set.csv.as_deref(),
            &["rate", "alpha", "beta", "gamma"],
            &table,
        )?;
    }
    report.num("delta", delta);
    if let Some(t) = tail_max(&triples) {
        report.num("tail_alpha", t.alpha);
        report.num("tail_beta", t.beta);
        report.num("tail_gamma", t.gamma);
    }
    report.num(
        "total_sobolev_mass",
        weighted_power_integral(&grid, &u, params.p_star, 0.0)?,
    );
    let (k0, ks) = radial_best_constants(params, &grid, &set.opts)?;
    let ratios = check_concentration_inequalities(params, &grid, &u, delta, k0, ks)?;
    report.num("k0", k0);
    report.num("ks", ks);
    report.text("constants_source", "radial minimization on the grid");
    report.num("sobolev_ratio", ratios.sobolev);
    report.num("hardy_sobolev_ratio", ratios.hardy_sobolev);
    Ok(true)
}

/// One sweep cell: `(status, value, threshold, el_residual, iterations, message)`.
fn sweep_cell(
    base: &ProblemParams,
    set: &Settings,
    grid: &RadialGrid,
    mu: f64,
    s: f64,
    task: &str,
) -> Vec<String> {
    let row =
        |status: &str, value: f64, threshold: Option<f64>, res: f64, iters: usize, msg: &str| {
            vec![
                cell(mu),
                cell(s),
                status.to_string(),
                cell(value),
                threshold.map(cell).unwrap_or_default(),
                cell(res),
                iters.to_string(),
                msg.to_string(),
            ]
        };
    let params = match ProblemParams::new(base.n, base.p, s, mu) {
        Ok(p) => p,
        Err(e) => return row("error", f64::NAN, None, f64::NAN, 0, &e.to_string()),
    };
    let status = |ok: bool| if ok { "ok" } else { "not_converged" };
    match task {
        "extremal" => match minimize_hardy_sobolev(
            &params,
            grid,
            &hardy_sobolev_ansatz(grid, &params),
            &set.opts,
        ) {
            Ok(r) => row(
                status(r.converged),
                r.inv_constant,
                None,
                r.el_residual,
                r.iterations,
                "",
            ),
            Err(e) => row("error", f64::NAN, None, f64::NAN, 0, &e.to_string()),
        },
        _ => match solve_double_critical(&params, grid, &set.opts) {
            Ok(r) => row(
                status(r.converged),
                r.energy.phi,
                Some(r.threshold),
                r.el_residual,
                r.iterations,
                "",
            ),
            Err(e) => row("error", f64::NAN, None, f64::NAN, 0, &e.to_string()),
        },
    }
}

fn sweep(
    set: &Settings,
    report: &mut Report,
    mus: Option<Vec<f64>>,
    ss: Option<Vec<f64>>,
    task: &str,
) -> Result<bool, CliError> {
    if task != "solve" && task != "extremal" {
        return Err(CliError::Validation(format!(
            "sweep task must be solve or extremal, got {task}"
        )));
    }
    let mus = mus.unwrap_or_else(|| vec![0.0, 0.1, 0.2]);
    let ss = ss.unwrap_or_else(|| vec![0.5, 1.0]);
    if let Some(v) = mus.iter().chain(&ss).find(|v| !v.is_finite()) {
        return Err(CliError::Validation(format!(
            "sweep ranges must be finite, got {v}"
        )));
    }
    let grid = build_grid(set)?;
    let cells: Vec<(f64, f64)> = mus
        .iter()
        .flat_map(|mu| ss.iter().map(move |s| (*mu, *s)))
        .collect();
    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .map(|(mu, s)| sweep_cell(&set.params, set, &grid, *mu, *s, task))
        .collect();
    let header = [
        "mu",
        "s",
        "status",
        if task == "solve" { "phi" } else { "quotient" },
        "threshold",
        "el_residual",
        "iterations",
        "message",
    ];
    write_table(set.csv.as_deref(), &header, &rows)?;
    let ok = rows.iter().filter(|r| r[2] == "ok").count();
    report.text("task", task);
    report.int("cells", rows.len() as u64);
    report.int("cells_ok", ok as u64);
    report.int("cells_failed", (rows.len() - ok) as u64);
    Ok(true)
}
