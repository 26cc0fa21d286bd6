//! The energy functional, its norm term, Rayleigh quotients and the fiber
//! map `t -> Phi(t u)`.

use serde::{Deserialize, Serialize};

use crate::discrete::closed_discretization;
use crate::error::{Error, Result};
use crate::params::{mountain_pass_threshold, ProblemParams};
use crate::profile::RadialProfile;
use crate::quadrature::RadialGrid;

/// Component integrals of `Phi(u)`; serializes as a flat object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `int |grad u|^p`
    pub grad_term: f64,
    /// `int |u|^p |x|^{-p}`
    pub hardy_term: f64,
    /// `grad_term - mu * hardy_term`, the `p`-th power of the norm
    pub triple_norm_p: f64,
    /// `int (u_+)^{p*}`
    pub sobolev_mass: f64,
    /// `int (u_+)^{p*(s)} |x|^{-s}`
    pub hs_mass: f64,
    pub phi: f64,
}

impl EnergyBreakdown {
    pub fn from_terms(
        params: &ProblemParams,
        grad_term: f64,
        hardy_term: f64,
        sobolev_mass: f64,
        hs_mass: f64,
    ) -> Self {
        let triple_norm_p = grad_term - params.mu * hardy_term;
        let phi =
            triple_norm_p / params.p - sobolev_mass / params.p_star - hs_mass / params.p_star_s;
        Self {
            grad_term,
            hardy_term,
            triple_norm_p,
            sobolev_mass,
            hs_mass,
            phi,
        }
    }

    /// `(1/p - 1/p*) sobolev_mass + (1/p - 1/p*(s)) hs_mass`, the value `Phi`
    /// takes at an exact critical point.
    pub fn balance_value(&self, params: &ProblemParams) -> f64 {
        params.sobolev_energy_factor() * self.sobolev_mass
            + params.hs_energy_factor() * self.hs_mass
    }

    /// Whether `(1 - mu_+/mu1) grad <= norm <= (1 + mu_-/mu1) grad` holds
    /// within `tol` (relative to the gradient term).
    pub fn norm_is_comparable(&self, params: &ProblemParams, tol: f64) -> bool {
        let (lo, hi) = norm_comparison_bounds(params);
        let slack = tol * self.grad_term.abs().max(f64::MIN_POSITIVE);
        lo * self.grad_term <= self.triple_norm_p + slack
            && self.triple_norm_p <= hi * self.grad_term + slack
    }
}

/// Factors `(1 - mu_+/mu1, 1 + mu_-/mu1)` bounding the norm by the gradient term.
pub fn norm_comparison_bounds(params: &ProblemParams) -> (f64, f64) {
    let plus = params.mu.max(0.0);
    let minus = (-params.mu).max(0.0);
    (1.0 - plus / params.mu1, 1.0 + minus / params.mu1)
}

/// Component integrals of `Phi(u)`. Outside the grid window `u` is
/// continued by the power laws `r^{-g1}` (inside) and `r^{-g2}` (outside)
/// fixed by the Hardy exponents of `params`, falling back to fitted tails
/// where such a continuation is not integrable.
pub fn evaluate_energy(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
) -> Result<EnergyBreakdown> {
    let (grad, hardy) = norm_terms(params, grid, u)?;
    let disc = closed_discretization(params, grid);
    let sob = disc.mass_term(u.values(), params.p_star, 0.0, true, None);
    let hs = disc.mass_term(u.values(), params.p_star_s, params.s, true, None);
    Ok(EnergyBreakdown::from_terms(params, grad, hardy, sob, hs))
}

fn norm_terms(params: &ProblemParams, grid: &RadialGrid, u: &RadialProfile) -> Result<(f64, f64)> {
    grid.check(u)?;
    if params.p < 1.0 {
        return Err(Error::InvalidParams(format!(
            "gradient exponent {} < 1",
            params.p
        )));
    }
    let disc = closed_discretization(params, grid);
    let v = u.values();
    Ok((
        disc.gradient_term(v, None),
        disc.mass_term(v, params.p, params.p, false, None),
    ))
}

/// `||u||^p / (int |u|^{p*(s)} |x|^{-s})^{p/p*(s)}`; the masses use `|u|`.
pub fn rayleigh_quotient(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
) -> Result<f64> {
    let (grad, hardy) = norm_terms(params, grid, u)?;
    let mass = closed_discretization(params, grid).mass_term(
        u.values(),
        params.p_star_s,
        params.s,
        false,
        None,
    );
    if !(mass > 0.0) {
        return Err(Error::TrivialProfile(
            "Rayleigh quotient of a profile with zero mass".into(),
        ));
    }
    Ok((grad - params.mu * hardy) / mass.powf(params.p / params.p_star_s))
}

/// Maximum of `t -> t^p norm/p - sum_k t^{e_k} m_k / e_k` over `t > 0`.
/// Every exponent must exceed `p` and every mass be non-negative with at
/// least one positive.
pub(crate) fn ray_maximum(p: f64, norm: f64, terms: &[(f64, f64)]) -> Result<(f64, f64)> {
    if !(norm > 0.0) {
        return Err(Error::Precondition(format!(
            "fiber map needs a positive norm term, got {norm}"
        )));
    }
    let active: Vec<(f64, f64)> = terms.iter().copied().filter(|(m, _)| *m > 0.0).collect();
    if active.is_empty() {
        return Err(Error::TrivialProfile(
            "fiber map without a positive mass has no maximum".into(),
        ));
    }
    let value =
        |t: f64| t.powf(p) * norm / p - active.iter().map(|(m, e)| t.powf(*e) * m / e).sum::<f64>();
    // norm = sum_k t^{e_k - p} m_k; each single-term root bounds the joint root
    let single = |m: f64, e: f64, share: f64| (norm * share / m).powf(1.0 / (e - p));
    let k = active.len() as f64;
    let hi = active
        .iter()
        .map(|(m, e)| single(*m, *e, 1.0))
        .fold(f64::INFINITY, f64::min);
    if active.len() == 1 {
        return Ok((hi, value(hi)));
    }
    let lo = active
        .iter()
        .map(|(m, e)| single(*m, *e, 1.0 / k))
        .fold(f64::INFINITY, f64::min);
    let excess = |t: f64| active.iter().map(|(m, e)| t.powf(e - p) * m).sum::<f64>() - norm;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    while b - a > 1e-15 * (1.0 + a.abs().max(b.abs())) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if excess(mid.exp()) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let t = (0.5 * (a + b)).exp();
    Ok((t, value(t)))
}

/// Maximizer and maximum of the fiber map `t -> Phi(t u)` for the profile
/// whose component integrals are `b`.
pub fn fiber_maximum(params: &ProblemParams, b: &EnergyBreakdown) -> Result<(f64, f64)> {
    ray_maximum(
        params.p,
        b.triple_norm_p,
        &[
            (b.sobolev_mass, params.p_star),
            (b.hs_mass, params.p_star_s),
        ],
    )
}

/// `d/dt Phi(t u)` at `t`.
pub fn fiber_derivative(params: &ProblemParams, b: &EnergyBreakdown, t: f64) -> f64 {
    t.powf(params.p - 1.0) * b.triple_norm_p
        - t.powf(params.p_star - 1.0) * b.sobolev_mass
        - t.powf(params.p_star_s - 1.0) * b.hs_mass
}

/// `Phi(t u)` from the component integrals of `u`.
pub fn fiber_value(params: &ProblemParams, b: &EnergyBreakdown, t: f64) -> f64 {
    t.powf(params.p) * b.triple_norm_p / params.p
        - t.powf(params.p_star) * b.sobolev_mass / params.p_star
        - t.powf(params.p_star_s) * b.hs_mass / params.p_star_s
}

/// Compares the ray maximum of `u` with the mountain-pass threshold built
/// from `k0`, `ks`. Returns `(threshold - sup_t Phi(t u), gap > 0)`.
pub fn threshold_check(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    k0: f64,
    ks: f64,
) -> Result<(f64, bool)> {
    if u.values().iter().any(|v| *v < 0.0) {
        return Err(Error::Precondition(
            "threshold check needs a non-negative profile".into(),
        ));
    }
    if u.is_trivial() {
        return Err(Error::TrivialProfile(
            "threshold check of the zero profile".into(),
        ));
    }
    let b = evaluate_energy(params, grid, u)?;
    let (_, sup) = fiber_maximum(params, &b)?;
    let gap = mountain_pass_threshold(params, k0, ks)? - sup;
    Ok((gap, gap > 0.0))
}
