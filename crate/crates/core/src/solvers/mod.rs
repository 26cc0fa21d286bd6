//! Radial extremals of the Hardy–Sobolev quotient, critical points of the
//! double-critical functional, and an ODE shooting cross-check.

mod descent;
mod shooting;

use serde::{Deserialize, Serialize};

use crate::discrete::{closed_discretization, Discretization};
use crate::energy::{evaluate_energy, ray_maximum, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::params::{mountain_pass_threshold, ProblemParams};
use crate::profile::{hardy_sobolev_ansatz, RadialProfile};
use crate::quadrature::RadialGrid;
use descent::{descend, Evaluation, Objective};

pub use shooting::shoot_radial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Target relative Euler–Lagrange residual.
    pub tol: f64,
    /// Sufficient-decrease constant of the backtracking line search.
    pub armijo: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Relative decrease below which an iteration counts as stalled.
    pub stall_tol: f64,
    pub stall_patience: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            initial_step: 0.5,
            max_step: 1.0,
            min_step: 1e-12,
            stall_tol: 1e-12,
            stall_patience: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalResult {
    /// Minimizer, normalized to unit Hardy–Sobolev mass.
    pub profile: RadialProfile,
    /// Minimized quotient, the estimate of `1/K`.
    pub inv_constant: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Quotient after every accepted step.
    pub history: Vec<f64>,
}

impl ExtremalResult {
    pub fn best_constant(&self) -> f64 {
        1.0 / self.inv_constant
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub profile: RadialProfile,
    pub energy: EnergyBreakdown,
    pub el_residual: f64,
    /// Mountain-pass threshold `c*` from the computed constants.
    pub threshold: f64,
    pub in_window: bool,
    pub k0: f64,
    pub ks: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One nonlinear term `coef * int |u|^power |x|^{-weight}` (divided by its
/// power in the functional).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub coef: f64,
    pub power: f64,
    pub weight: f64,
}

/// Relative weighted `L^2` residual of
/// `-div(|u'|^{p-2}u') - mu |u|^{p-2}u/r^p = sum_k coef_k |u|^{power_k-2}u r^{-weight_k}`,
/// both sides measured per node as the discrete gradient of the corresponding
/// integral divided by its quadrature weight. Nodes touched by the tail
/// corrections are excluded.
pub(crate) fn residual_with_terms(
    disc: &Discretization<'_>,
    mu: f64,
    u: &[f64],
    terms: &[Term],
) -> f64 {
    let grid = disc.grid;
    let m = u.len();
    let p = disc.p;
    let sigma = grid.surface_factor();
    let h = grid.step();
    let w = grid.log_weights();
    let mut op = vec![0.0; m];
    disc.gradient_term(u, Some(&mut op));
    let mut hardy = vec![0.0; m];
    disc.mass_term(u, p, p, false, Some(&mut hardy));
    let mut rhs = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    for t in terms {
        disc.mass_term(u, t.power, t.weight, false, Some(&mut scratch));
        for i in 0..m {
            rhs[i] += t.coef * scratch[i] / (t.power * sigma * w[i]);
        }
    }
    let (mut diff, mut a2, mut b2) = (0.0, 0.0, 0.0);
    for i in 3..m - 3 {
        let a = op[i] / (p * sigma * h) - mu * hardy[i] / (p * sigma * w[i]);
        let b = rhs[i];
        diff += w[i] * (a - b) * (a - b);
        a2 += w[i] * a * a;
        b2 += w[i] * b * b;
    }
    let scale = a2.max(b2).sqrt();
    if scale == 0.0 {
        0.0
    } else {
        diff.sqrt() / scale
    }
}

/// Relative residual of the radial Euler–Lagrange equation of the quotient,
/// `-(r^{n-1} phi_p(u'))' - mu r^{n-1-p} phi_p(u) = lambda r^{n-1-s} u^{p*(s)-1}`.
pub fn euler_lagrange_residual(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    lambda: f64,
) -> Result<f64> {
    grid.check(u)?;
    let disc = Discretization::new(grid, params.p);
    let term = Term {
        coef: lambda,
        power: params.p_star_s,
        weight: params.s,
    };
    Ok(residual_with_terms(&disc, params.mu, u.values(), &[term]))
}

/// Residual of the double-critical equation (both right-hand terms with unit
/// coefficients; the critical term uses `params.q` when set).
pub fn double_critical_residual(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
) -> Result<f64> {
    grid.check(u)?;
    let disc = Discretization::new(grid, params.p);
    let terms = [
        Term {
            coef: 1.0,
            power: params.q_or_critical(),
            weight: 0.0,
        },
        Term {
            coef: 1.0,
            power: params.p_star_s,
            weight: params.s,
        },
    ];
    Ok(residual_with_terms(&disc, params.mu, u.values(), &terms))
}

struct QuotientObjective<'g> {
    disc: Discretization<'g>,
    mu: f64,
    power: f64,
    weight: f64,
}

impl QuotientObjective<'_> {
    fn parts(&self, v: &[f64]) -> (f64, f64) {
        let g = self.disc.gradient_term(v, None);
        let h = self
            .disc
            .mass_term(v, self.disc.p, self.disc.p, false, None);
        let m = self.disc.mass_term(v, self.power, self.weight, false, None);
        (g - self.mu * h, m)
    }
}

impl Objective for QuotientObjective<'_> {
    fn disc(&self) -> &Discretization<'_> {
        &self.disc
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn value(&self, v: &[f64]) -> Option<f64> {
        let (n, m) = self.parts(v);
        let q = n / m.powf(self.disc.p / self.power);
        (m > 0.0 && q.is_finite()).then_some(q)
    }
    fn evaluate(&self, v: &[f64]) -> Result<Evaluation> {
        let p = self.disc.p;
        let len = v.len();
        let (mut gg, mut gh, mut gm) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        let g = self.disc.gradient_term(v, Some(&mut gg));
        let h = self.disc.mass_term(v, p, p, false, Some(&mut gh));
        let m = self
            .disc
            .mass_term(v, self.power, self.weight, false, Some(&mut gm));
        if !(m > 0.0) {
            return Err(Error::TrivialProfile(
                "iterate lost its Hardy–Sobolev mass".into(),
            ));
        }
        let n = g - self.mu * h;
        let lambda = n / m;
        let direction_residual = (0..len)
            .map(|i| (gg[i] - self.mu * gh[i]) / p - lambda * gm[i] / self.power)
            .collect();
        Ok(Evaluation {
            value: n / m.powf(p / self.power),
            direction_residual,
            factor: p / m.powf(p / self.power),
        })
    }
    fn normalize(&self, v: &mut [f64]) {
        let m = self.disc.mass_term(v, self.power, self.weight, false, None);
        if m > 0.0 {
            let c = m.powf(-1.0 / self.power);
            v.iter_mut().for_each(|x| *x *= c);
        }
    }
    fn residual(&self, v: &[f64]) -> f64 {
        let (n, m) = self.parts(v);
        let term = Term {
            coef: n / m,
            power: self.power,
            weight: self.weight,
        };
        residual_with_terms(&self.disc, self.mu, v, &[term])
    }
}

fn minimize_radial(
    params: &ProblemParams,
    grid: &RadialGrid,
    init: &RadialProfile,
    opts: &SolverOptions,
) -> Result<ExtremalResult> {
    grid.check(init)?;
    if init.is_trivial() {
        return Err(Error::TrivialProfile("initial profile is zero".into()));
    }
    let mut obj = QuotientObjective {
        disc: closed_discretization(params, grid),
        mu: params.mu,
        power: params.p_star_s,
        weight: params.s,
    };
    let out = descend(&mut obj, init.values().to_vec(), opts)?;
    let inv_constant = *out.history.last().unwrap_or(&f64::NAN);
    Ok(ExtremalResult {
        profile: RadialProfile::from_raw(grid.spec(), out.v),
        inv_constant,
        el_residual: out.residual,
        iterations: out.iterations,
        converged: out.converged,
        history: out.history,
    })
}

/// Minimizes the Hardy–Sobolev quotient over radial profiles by
/// preconditioned projected descent from `init`.
///
/// Every accepted step lowers the quotient; iterates are kept non-negative
/// and normalized to unit Hardy–Sobolev mass. The run stops when the
/// residual drops below `opts.tol`, when the quotient stalls, or after
/// `opts.max_iter` steps; `converged` records whether the tolerance was met.
pub fn minimize_hardy_sobolev(
    params: &ProblemParams,
    grid: &RadialGrid,
    init: &RadialProfile,
    opts: &SolverOptions,
) -> Result<ExtremalResult> {
    if params.s == 0.0 && params.mu < 0.0 {
        return Err(Error::NoExtremal { mu: params.mu });
    }
    minimize_radial(params, grid, init, opts)
}

/// Radial best constants `(K(n,p,mu,0), K(n,p,mu,s))` from two minimizations
/// started at the retuned ansatz.
pub fn radial_best_constants(
    params: &ProblemParams,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let sobolev = params.with_s(0.0)?;
    let r0 = minimize_radial(&sobolev, grid, &hardy_sobolev_ansatz(grid, &sobolev), opts)?;
    let rs = minimize_radial(params, grid, &hardy_sobolev_ansatz(grid, params), opts)?;
    Ok((r0.best_constant(), rs.best_constant()))
}

/// Reduced functional `v -> sup_t Phi(t v)` for nonlinear terms taken on
/// `v_+`. The first term may carry a free scale: its coefficient is
/// `exp(scale_log * scale_rate)`, the exact effect of the dilation group on
/// a term that is not scale-critical.
pub(crate) struct FiberObjective<'g> {
    pub disc: Discretization<'g>,
    pub mu: f64,
    pub terms: Vec<Term>,
    pub scale_rate: f64,
    pub scale_log: f64,
    pub scale_step: f64,
}

pub(crate) struct FiberState {
    pub t: f64,
    pub value: f64,
    pub masses: Vec<f64>,
}

impl<'g> FiberObjective<'g> {
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.terms.iter().map(|t| t.coef).collect();
        c[0] *= (self.scale_log * self.scale_rate).exp();
        c
    }

    pub fn state(&self, v: &[f64]) -> Option<FiberState> {
        let p = self.disc.p;
        let g = self.disc.gradient_term(v, None);
        let h = self.disc.mass_term(v, p, p, false, None);
        let coef = self.coefficients();
        let masses: Vec<f64> = self
            .terms
            .iter()
            .map(|t| self.disc.mass_term(v, t.power, t.weight, true, None))
            .collect();
        self.state_from(g - self.mu * h, &masses, &coef)
    }

    fn state_from(&self, norm: f64, masses: &[f64], coef: &[f64]) -> Option<FiberState> {
        let p = self.disc.p;
        let mut effective = norm;
        let mut superlinear = Vec::new();
        for ((t, m), c) in self.terms.iter().zip(masses).zip(coef) {
            if (t.power - p).abs() < 1e-14 {
                effective -= c * m;
            } else {
                superlinear.push((c * m, t.power));
            }
        }
        let (t, value) = ray_maximum(p, effective, &superlinear).ok()?;
        (value.is_finite() && t.is_finite()).then(|| FiberState {
            t,
            value,
            masses: masses.to_vec(),
        })
    }

    /// Mass of the physical first term `coef * t^q * int (v_+)^q`.
    pub fn first_term_mass(&self, state: &FiberState) -> f64 {
        self.coefficients()[0] * state.t.powf(self.terms[0].power) * state.masses[0]
    }
}

impl Objective for FiberObjective<'_> {
    fn disc(&self) -> &Discretization<'_> {
        &self.disc
    }
    fn mu(&self) -> f64 {
        self.mu
    }
    fn value(&self, v: &[f64]) -> Option<f64> {
        self.state(v).map(|s| s.value)
    }
    fn evaluate(&self, v: &[f64]) -> Result<Evaluation> {
        let p = self.disc.p;
        let len = v.len();
        let state = self
            .state(v)
            .ok_or_else(|| Error::TrivialProfile("fiber map has no interior maximum".into()))?;
        let (mut gg, mut gh) = (vec![0.0; len], vec![0.0; len]);
        self.disc.gradient_term(v, Some(&mut gg));
        self.disc.mass_term(v, p, p, false, Some(&mut gh));
        let mut direction_residual: Vec<f64> =
            (0..len).map(|i| (gg[i] - self.mu * gh[i]) / p).collect();
        let mut gm = vec![0.0; len];
        for (term, c) in self.terms.iter().zip(self.coefficients()) {
            self.disc
                .mass_term(v, term.power, term.weight, true, Some(&mut gm));
            let k = c * state.t.powf(term.power - p) / term.power;
            for i in 0..len {
                direction_residual[i] -= k * gm[i];
            }
        }
        Ok(Evaluation {
            value: state.value,
            direction_residual,
            factor: state.t.powf(p),
        })
    }
    fn normalize(&self, v: &mut [f64]) {
        let p = self.disc.p;
        let n =
            self.disc.gradient_term(v, None) - self.mu * self.disc.mass_term(v, p, p, false, None);
        if n > 0.0 {
            let c = n.powf(-1.0 / p);
            v.iter_mut().for_each(|x| *x *= c);
        }
    }
    fn residual(&self, v: &[f64]) -> f64 {
        let Some(state) = self.state(v) else {
            return f64::NAN;
        };
        let p = self.disc.p;
        let terms: Vec<Term> = self
            .terms
            .iter()
            .zip(self.coefficients())
            .map(|(t, c)| Term {
                coef: c * state.t.powf(t.power - p),
                ..*t
            })
            .collect();
        let positive: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
        residual_with_terms(&self.disc, self.mu, &positive, &terms)
    }
    fn side_step(&mut self, v: &[f64]) -> bool {
        if self.scale_rate == 0.0 {
            return false;
        }
        let p = self.disc.p;
        let g = self.disc.gradient_term(v, None);
        let h = self.disc.mass_term(v, p, p, false, None);
        let masses: Vec<f64> = self
            .terms
            .iter()
            .map(|t| self.disc.mass_term(v, t.power, t.weight, true, None))
            .collect();
        let eval_at = |obj: &Self, ell: f64| {
            let mut c: Vec<f64> = obj.terms.iter().map(|t| t.coef).collect();
            c[0] *= (ell * obj.scale_rate).exp();
            obj.state_from(g - obj.mu * h, &masses, &c).map(|s| s.value)
        };
        let Some(current) = eval_at(self, self.scale_log) else {
            return false;
        };
        // the first term only lowers the ray maximum as its coefficient grows
        let direction = self.scale_rate.signum();
        let mut step = (2.0 * self.scale_step).min(50.0);
        while step > 1e-8 {
            let ell = self.scale_log + direction * step;
            if (ell * self.scale_rate).abs() < 600.0
                && eval_at(self, ell).is_some_and(|v| v < current)
            {
                self.scale_log = ell;
                self.scale_step = step;
                return true;
            }
            step *= 0.5;
        }
        false
    }
}

/// Finds a positive radial critical point of the double-critical functional
/// by descending `v -> sup_t Phi(t v)` and returning `t_max(v) v`.
pub fn solve_double_critical(
    params: &ProblemParams,
    grid: &RadialGrid,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    if !(params.s > 0.0 && params.s < params.p) {
        return Err(Error::InvalidParams(format!(
            "double-critical solve needs 0 < s < p, got s = {}",
            params.s
        )));
    }
    let (k0, ks) = radial_best_constants(params, grid, opts)?;
    let threshold = mountain_pass_threshold(params, k0, ks)?;
    let mut report = fiber_solve(params, grid, opts, &hardy_sobolev_ansatz(grid, params))?;
    report.k0 = k0;
    report.ks = ks;
    report.threshold = threshold;
    report.in_window = report.energy.phi > 0.0 && report.energy.phi < threshold;
    Ok(report)
}

/// Final state of a descent on the `q`-perturbed problem with a free
/// dilation coordinate.
#[derive(Debug, Clone)]
pub(crate) struct ScanOutcome {
    /// `t_max(v) v`, the physical solution before the dilation is applied.
    pub profile: RadialProfile,
    /// Coefficient `exp(l e_q)` carried by the `q` term.
    pub q_coefficient: f64,
    pub el_residual: f64,
    pub q_mass: f64,
    pub initial_q_mass: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Descends `sup_t Phi_q(t v)` jointly over the shape `v` and the dilation
/// `l`, where `Phi_q` has the `q` power in place of the Sobolev term. A
/// dilation by `e^l` multiplies the `q` mass by `exp(l e_q)` with
/// `e_q = q (n - p)/p - n` and leaves every other term invariant, so it is
/// carried as a coefficient instead of moving the profile off the grid.
pub(crate) fn scan_solve(
    params: &ProblemParams,
    grid: &RadialGrid,
    q: f64,
    opts: &SolverOptions,
) -> Result<ScanOutcome> {
    let e_q = q * (params.dim() - params.p) / params.p - params.dim();
    let mut obj = FiberObjective {
        disc: closed_discretization(params, grid),
        mu: params.mu,
        terms: vec![
            Term {
                coef: 1.0,
                power: q,
                weight: 0.0,
            },
            Term {
                coef: 1.0,
                power: params.p_star_s,
                weight: params.s,
            },
        ],
        scale_rate: if e_q.abs() < 1e-12 { 0.0 } else { e_q },
        scale_log: 0.0,
        scale_step: 0.1,
    };
    // exponential damping keeps every q mass finite at the start
    let init = hardy_sobolev_ansatz(grid, params);
    let mut v0: Vec<f64> = init
        .values()
        .iter()
        .zip(grid.nodes())
        .map(|(v, r)| v * (-r).exp())
        .collect();
    obj.normalize(&mut v0);
    // start from a dilation at which the ray maximum exists
    let mut tries = 0;
    while obj.state(&v0).is_none() && obj.scale_rate != 0.0 && tries < 200 {
        obj.scale_log -= obj.scale_rate.signum();
        tries += 1;
    }
    let initial_q_mass = obj
        .state(&v0)
        .map(|st| obj.first_term_mass(&st))
        .ok_or_else(|| Error::TrivialProfile("initial direction has no ray maximum".into()))?;
    let out = descend(&mut obj, v0, opts)?;
    let state = obj
        .state(&out.v)
        .ok_or_else(|| Error::TrivialProfile("descent left the fibering region".into()))?;
    let q_mass = obj.first_term_mass(&state);
    let profile = RadialProfile::from_raw(
        grid.spec(),
        out.v.iter().map(|x| state.t * x.max(0.0)).collect(),
    );
    Ok(ScanOutcome {
        profile,
        q_coefficient: obj.coefficients()[0],
        el_residual: out.residual,
        q_mass,
        initial_q_mass,
        iterations: out.iterations,
        converged: out.converged,
    })
}

fn fiber_solve(
    params: &ProblemParams,
    grid: &RadialGrid,
    opts: &SolverOptions,
    init: &RadialProfile,
) -> Result<SolveReport> {
    let mut obj = FiberObjective {
        disc: closed_discretization(params, grid),
        mu: params.mu,
        terms: vec![
            Term {
                coef: 1.0,
                power: params.p_star,
                weight: 0.0,
            },
            Term {
                coef: 1.0,
                power: params.p_star_s,
                weight: params.s,
            },
        ],
        scale_rate: 0.0,
        scale_log: 0.0,
        scale_step: 0.1,
    };
    let out = descend(&mut obj, init.values().to_vec(), opts)?;
    let state = obj
        .state(&out.v)
        .ok_or_else(|| Error::TrivialProfile("descent collapsed to the zero profile".into()))?;
    let profile = RadialProfile::from_raw(
        grid.spec(),
        out.v.iter().map(|x| state.t * x.max(0.0)).collect(),
    );
    if profile.is_trivial() {
        return Err(Error::TrivialProfile(
            "descent collapsed to the zero profile".into(),
        ));
    }
    let energy = evaluate_energy(params, grid, &profile)?;
    Ok(SolveReport {
        profile,
        energy,
        el_residual: out.residual,
        threshold: f64::NAN,
        in_window: false,
        k0: f64::NAN,
        ks: f64::NAN,
        iterations: out.iterations,
        converged: out.converged,
    })
}
