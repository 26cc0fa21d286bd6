//! Pohozaev machinery on radial profiles: the integration-by-parts identity
//! paired with the dilation field, the cutoff-limit functional, and a scan of
//! the `q`-perturbed problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrete::phi;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::{AnnularCutoff, RadialProfile, RadialWeight};
use crate::quadrature::{log_derivative, log_second_derivative, RadialGrid};
use crate::solvers::{scan_solve, SolverOptions};

/// Both sides of the dilation identity for a pair `(u, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// `int |u'|^{p-2} u' w' + ((n-p)/p) int eta |u'|^p`, `w = r (eta u)'`.
    pub lhs: f64,
    /// `B(u, eta)`.
    pub boundary: f64,
    /// `|lhs - boundary|` over the integral of the absolute integrands.
    pub identity_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub lhs: f64,
    pub boundary: f64,
    pub identity_residual: f64,
    pub functional_value: f64,
    /// `|functional_value - n (1/p* - 1/q) int |u|^q|` over the scale.
    pub q_coefficient_check: f64,
}

/// Checks the dilation identity. Derivatives of `eta` are analytic, those
/// of `u` come from fourth-order differences in `ln r`.
pub fn identity_check(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    eta: &dyn RadialWeight,
) -> Result<IdentityCheck> {
    grid.check(u)?;
    if let Some((a, b)) = eta.ramp_support() {
        if a <= grid.r_min() || b >= grid.r_max() {
            return Err(Error::InvalidGrid(format!(
                "cutoff support [{a}, {b}] touches the grid window [{}, {}]",
                grid.r_min(),
                grid.r_max()
            )));
        }
    }
    let n = params.dim();
    let p = params.p;
    let h = grid.step();
    let sigma = grid.surface_factor();
    let ut = log_derivative(u.values(), h);
    let utt = log_second_derivative(u.values(), h);
    let m = grid.len();
    let (mut lhs, mut bnd, mut abs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for i in 0..m {
        let r = grid.nodes()[i];
        let v = u.values()[i];
        let d1 = ut[i] / r;
        let d2 = (utt[i] - ut[i]) / (r * r);
        let (e0, e1, e2) = (eta.value(r), eta.d1(r), eta.d2(r));
        let flux = phi(d1, p);
        let grad_p = d1.abs().powf(p);
        // w = r (eta u)', w' = (eta u)' + r (eta u)''
        let w1 = e1 * v + e0 * d1 + r * (e2 * v + 2.0 * e1 * d1 + e0 * d2);
        let meas = sigma * r.powf(n);
        let a = flux * w1;
        let b = (n - p) / p * e0 * grad_p;
        let c = v * flux * (e1 + r * e2);
        let d = (1.0 + (p - 1.0) / p) * r * e1 * grad_p;
        lhs[i] = meas * (a + b);
        bnd[i] = meas * (c + d);
        abs[i] = meas * (a.abs() + b.abs() + c.abs() + d.abs());
    }
    let lhs = grid.integrate_log_samples(&lhs);
    let boundary = grid.integrate_log_samples(&bnd);
    let scale = grid.integrate_log_samples(&abs);
    let identity_residual = if scale > 0.0 {
        (lhs - boundary).abs() / scale
    } else {
        0.0
    };
    Ok(IdentityCheck {
        lhs,
        boundary,
        identity_residual,
    })
}

/// Integrand samples of the dilation functional, split into the
/// scale-critical part (Hardy and weighted terms) and the `q` part.
struct FunctionalSamples {
    critical: Vec<f64>,
    q_part: Vec<f64>,
    abs: Vec<f64>,
}

fn functional_samples(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    q: f64,
    eta: Option<&dyn RadialWeight>,
) -> FunctionalSamples {
    let n = params.dim();
    let p = params.p;
    let (s, mu, ps) = (params.s, params.mu, params.p_star_s);
    let c = (n - p) / p;
    let sigma = grid.surface_factor();
    let m = grid.len();
    let mut out = FunctionalSamples {
        critical: vec![0.0; m],
        q_part: vec![0.0; m],
        abs: vec![0.0; m],
    };
    for i in 0..m {
        let v = u.values()[i];
        if v == 0.0 {
            continue;
        }
        let r = grid.nodes()[i];
        let a = v.abs();
        // [((n-p)/p) u f - n F - x . (grad_x F)] term by term
        let hardy = mu * a.powf(p) * r.powf(-p) * (c - n / p + 1.0);
        let weighted = a.powf(ps) * r.powf(-s) * (c - n / ps + s / ps);
        let power = a.powf(q) * (c - n / q);
        let hardy_abs = mu.abs() * a.powf(p) * r.powf(-p) * (c + n / p + 1.0);
        let weighted_abs = a.powf(ps) * r.powf(-s) * (c + n / ps + s / ps);
        let power_abs = a.powf(q) * (c + n / q);
        let meas = sigma * r.powf(n) * eta.map_or(1.0, |e| e.value(r));
        out.critical[i] = meas * (hardy + weighted);
        out.q_part[i] = meas * power;
        out.abs[i] = meas.abs() * (hardy_abs + weighted_abs + power_abs);
    }
    out
}

/// `int [((n-p)/p) u f(x,u) - n F(x,u) - x . (grad_x F)(x,u)] dx` for the
/// power-law nonlinearity with the Hardy, weighted and `|u|^{q-2} u` terms.
pub fn pohozaev_functional(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    q: f64,
) -> Result<f64> {
    Ok(functional_parts(params, grid, u, q, None)?.0)
}

/// Same functional with the integrand weighted by the cutoff `eta_eps`.
pub fn localized_pohozaev_functional(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    q: f64,
    epsilon: f64,
) -> Result<f64> {
    let cutoff = AnnularCutoff::new(epsilon)?;
    Ok(functional_parts(params, grid, u, q, Some(&cutoff))?.0)
}

/// `(value, scale, critical part, q part)`.
fn functional_parts(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    q: f64,
    eta: Option<&dyn RadialWeight>,
) -> Result<(f64, f64, f64, f64)> {
    grid.check(u)?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParams(format!("q = {q} must exceed 1")));
    }
    let smp = functional_samples(params, grid, u, q, eta);
    let critical = grid.integrate_log_samples(&smp.critical);
    let q_part = grid.integrate_log_samples(&smp.q_part);
    let total: Vec<f64> = smp
        .critical
        .iter()
        .zip(&smp.q_part)
        .map(|(a, b)| a + b)
        .collect();
    let value = grid.integrate_log_samples(&total);
    let scale = grid.integrate_log_samples(&smp.abs);
    Ok((value, scale, critical, q_part))
}

/// Full report: identity fields for `(u, eta)` and the functional at `q`
/// compared against `n (1/p* - 1/q) int |u|^q`.
pub fn pohozaev_report(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    eta: &dyn RadialWeight,
    q: f64,
) -> Result<PohozaevReport> {
    let id = identity_check(params, grid, u, eta)?;
    let (functional_value, scale, _, _) = functional_parts(params, grid, u, q, None)?;
    let q_mass = crate::quadrature::weighted_power_integral(grid, u, q, 0.0)?;
    let expected = params.dim() * (1.0 / params.p_star - 1.0 / q) * q_mass;
    let q_coefficient_check = if scale > 0.0 {
        (functional_value - expected).abs() / scale
    } else {
        0.0
    };
    Ok(PohozaevReport {
        lhs: id.lhs,
        boundary: id.boundary,
        identity_residual: id.identity_residual,
        functional_value,
        q_coefficient_check,
    })
}

/// One row of the `q` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub q: f64,
    pub el_residual: f64,
    /// `int |u|^q` of the final iterate.
    pub q_mass: f64,
    pub initial_q_mass: f64,
    pub pohozaev_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ScanRow {
    /// Final over initial `q` mass.
    pub fn collapse_ratio(&self) -> f64 {
        if self.initial_q_mass > 0.0 {
            self.q_mass / self.initial_q_mass
        } else {
            f64::NAN
        }
    }
}

/// For every `q`, descends the `q`-perturbed functional over shape and
/// dilation from the retuned ansatz and reports what is left.
pub fn nonexistence_scan(
    params: &ProblemParams,
    grid: &RadialGrid,
    q_values: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<ScanRow>> {
    if let Some(q) = q_values.iter().find(|q| !(**q > 1.0 && q.is_finite())) {
        return Err(Error::InvalidParams(format!(
            "scan value q = {q} must exceed 1"
        )));
    }
    q_values
        .par_iter()
        .map(|&q| scan_row(params, grid, q, opts))
        .collect()
}

fn scan_row(
    params: &ProblemParams,
    grid: &RadialGrid,
    q: f64,
    opts: &SolverOptions,
) -> Result<ScanRow> {
    let out = scan_solve(params, grid, q, opts)?;
    // dilation acts on the q part only; the rest is invariant
    let (_, _, critical, q_part) = functional_parts(params, grid, &out.profile, q, None)?;
    Ok(ScanRow {
        q,
        el_residual: out.el_residual,
        q_mass: out.q_mass,
        initial_q_mass: out.initial_q_mass,
        pohozaev_value: critical + out.q_coefficient * q_part,
        iterations: out.iterations,
        converged: out.converged,
    })
}
