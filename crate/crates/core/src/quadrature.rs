//! Log-spaced radial grids and quadrature of n-dimensional radial integrals.
//!
//! Every integral is written in the logarithmic variable `t = ln r`:
//! `int_{R^n} g(|x|) dx = sigma int g(e^t) e^{n t} dt`, integrated with a
//! uniform-step Gregory rule (fourth order). Beyond the truncation window the
//! integrand is continued by the exponential (power-law in `r`) fitted to the
//! two outermost samples, which makes slowly decaying profiles such as
//! `r^{-(n-p)/(p-1)}` integrate accurately on a finite window.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::profile::RadialProfile;

/// Smallest fitted decay rate (per unit of `ln r`) for which a tail is added.
const MIN_TAIL_RATE: f64 = 1e-3;

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e6;
pub const DEFAULT_NODES: usize = 4096;
pub const DEFAULT_ANGULAR_NODES: usize = 64;

/// Serializable description of a grid: `{r_min, r_max, m, n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub m: usize,
    pub n: u32,
}

impl GridSpec {
    pub fn default_for(n: u32) -> Self {
        Self {
            r_min: DEFAULT_R_MIN,
            r_max: DEFAULT_R_MAX,
            m: DEFAULT_NODES,
            n,
        }
    }

    pub fn build(&self) -> Result<RadialGrid> {
        build_log_grid(self.r_min, self.r_max, self.m, self.n)
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{:e}, {:e}] x {} (n = {})",
            self.r_min, self.r_max, self.m, self.n
        )
    }
}

/// Area of the unit sphere `S^{k-1}` in `R^k`.
pub fn sphere_area(k: u32) -> f64 {
    let k = k as f64;
    2.0 * std::f64::consts::PI.powf(k / 2.0) / gamma(k / 2.0)
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    nodes: Vec<f64>,
    log_nodes: Vec<f64>,
    /// Weights for `int f(r) dr`.
    weights: Vec<f64>,
    /// Weights for `int f dt`, `t = ln r`.
    log_weights: Vec<f64>,
    step: f64,
    surface_factor: f64,
}

/// Builds a log-uniform grid with fourth-order Gregory weights in `ln r`.
pub fn build_log_grid(r_min: f64, r_max: f64, m: usize, n: u32) -> Result<RadialGrid> {
    if !(r_min.is_finite() && r_max.is_finite() && r_min > 0.0 && r_min < r_max) {
        return Err(Error::InvalidGrid(format!(
            "need 0 < r_min < r_max < inf, got [{r_min}, {r_max}]"
        )));
    }
    if m < 16 {
        return Err(Error::InvalidGrid(format!(
            "need at least 16 nodes, got {m}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidGrid(format!("dimension {n} must be >= 2")));
    }
    let t0 = r_min.ln();
    let t1 = r_max.ln();
    let step = (t1 - t0) / (m - 1) as f64;
    let log_nodes: Vec<f64> = (0..m)
        .map(|i| if i == m - 1 { t1 } else { t0 + step * i as f64 })
        .collect();
    let mut nodes: Vec<f64> = log_nodes.iter().map(|t| t.exp()).collect();
    nodes[0] = r_min;
    nodes[m - 1] = r_max;

    const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    let mut log_weights = vec![step; m];
    for (k, g) in GREGORY.iter().enumerate() {
        log_weights[k] = g * step;
        log_weights[m - 1 - k] = g * step;
    }
    let weights = log_weights.iter().zip(&nodes).map(|(w, r)| w * r).collect();
    Ok(RadialGrid {
        spec: GridSpec { r_min, r_max, m, n },
        nodes,
        log_nodes,
        weights,
        log_weights,
        step,
        surface_factor: sphere_area(n),
    })
}

impl RadialGrid {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }
    pub fn dim(&self) -> u32 {
        self.spec.n
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn log_nodes(&self) -> &[f64] {
        &self.log_nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }
    /// Uniform spacing in `ln r`.
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn surface_factor(&self) -> f64 {
        self.surface_factor
    }
    /// Volume of the unit ball.
    pub fn ball_volume(&self) -> f64 {
        self.surface_factor / self.spec.n as f64
    }
    pub fn r_min(&self) -> f64 {
        self.spec.r_min
    }
    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }
    /// Radii at the cell midpoints `sqrt(r_i r_{i+1})`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.log_nodes
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).exp())
            .collect()
    }

    pub(crate) fn check(&self, u: &RadialProfile) -> Result<()> {
        if u.grid_spec() != self.spec || u.len() != self.len() {
            return Err(Error::GridMismatch {
                profile: u.grid_spec().to_string(),
                grid: self.spec.to_string(),
            });
        }
        Ok(())
    }

    /// Integrates log-variable samples `f(t_i)` (already including the
    /// `sigma r^n` measure) over the whole line, with power-law tails.
    pub fn integrate_log_samples(&self, f: &[f64]) -> f64 {
        sum_with_tails(f, &self.log_weights, self.step, 0.0, None)
    }

    /// Integral of log-variable samples over `t <= ln(radius)` (a ball),
    /// using cubic Hermite interpolation between nodes and the left tail.
    pub fn integrate_log_samples_up_to(&self, f: &[f64], radius: f64) -> Result<f64> {
        if !(radius > self.r_min() && radius <= self.r_max()) {
            return Err(Error::Precondition(format!(
                "ball radius {radius} outside grid window ({}, {}]",
                self.r_min(),
                self.r_max()
            )));
        }
        let h = self.step;
        let df = log_derivative(f, h);
        let target = radius.ln();
        let mut total = left_tail(f, h, 0.0).map_or(0.0, |t| t.value);
        for i in 0..self.len() - 1 {
            let ta = self.log_nodes[i];
            if ta >= target {
                break;
            }
            let theta = ((target - ta) / h).min(1.0);
            let (h00, h10, h01, h11) = hermite_integrals(theta);
            total += h * (f[i] * h00 + h * df[i] * h10 + f[i + 1] * h01 + h * df[i + 1] * h11);
        }
        Ok(total)
    }
}

fn hermite_integrals(theta: f64) -> (f64, f64, f64, f64) {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let t4 = t3 * theta;
    (
        t4 / 2.0 - t3 + theta,
        t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0,
        -t4 / 2.0 + t3,
        t4 / 4.0 - t3 / 3.0,
    )
}

/// Exponential tail `int_{-inf}^{edge} f`, fitted to the outermost sample
/// `fa` and its neighbour `fb` one step further in. `offset` is the distance
/// from `fa` to the window edge. Partials are with respect to `fa`, `fb`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tail {
    pub value: f64,
    pub d_outer: f64,
    pub d_inner: f64,
}

fn fit_tail(fa: f64, fb: f64, h: f64, offset: f64) -> Option<Tail> {
    if !(fa > 0.0 && fb > 0.0) {
        return None;
    }
    let rate = (fb / fa).ln() / h;
    if !(rate > MIN_TAIL_RATE) || !rate.is_finite() {
        return None;
    }
    let value = fa * (-rate * offset).exp() / rate;
    let c = offset / h + 1.0 / (rate * h);
    Some(Tail {
        value,
        d_outer: value * (1.0 + c) / fa,
        d_inner: -value * c / fb,
    })
}

pub(crate) fn left_tail(f: &[f64], h: f64, offset: f64) -> Option<Tail> {
    fit_tail(f[0], f[1], h, offset)
}

pub(crate) fn right_tail(f: &[f64], h: f64, offset: f64) -> Option<Tail> {
    let k = f.len();
    fit_tail(f[k - 1], f[k - 2], h, offset)
}

/// Weighted sum plus both tails. When `grad` is given, it receives the
/// partial derivative of the result with respect to every sample.
pub(crate) fn sum_with_tails(
    f: &[f64],
    w: &[f64],
    h: f64,
    offset: f64,
    grad: Option<&mut [f64]>,
) -> f64 {
    let mut total: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
    let lt = left_tail(f, h, offset);
    let rt = right_tail(f, h, offset);
    if let Some(t) = lt {
        total += t.value;
    }
    if let Some(t) = rt {
        total += t.value;
    }
    if let Some(g) = grad {
        g.copy_from_slice(w);
        let k = f.len();
        if let Some(t) = lt {
            g[0] += t.d_outer;
            g[1] += t.d_inner;
        }
        if let Some(t) = rt {
            g[k - 1] += t.d_outer;
            g[k - 2] += t.d_inner;
        }
    }
    total
}

/// Fourth-order first derivative of uniformly spaced samples.
pub fn log_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut d = vec![0.0; m];
    if m < 5 {
        return d;
    }
    for i in 2..m - 2 {
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    let l = m - 1;
    d[l] = (25.0 * f[l] - 48.0 * f[l - 1] + 36.0 * f[l - 2] - 16.0 * f[l - 3] + 3.0 * f[l - 4])
        / (12.0 * h);
    d[l - 1] =
        (3.0 * f[l] + 10.0 * f[l - 1] - 18.0 * f[l - 2] + 6.0 * f[l - 3] - f[l - 4]) / (12.0 * h);
    d
}

/// Fourth-order second derivative of uniformly spaced samples.
pub fn log_second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut d = vec![0.0; m];
    if m < 6 {
        return d;
    }
    let h2 = 12.0 * h * h;
    for i in 2..m - 2 {
        d[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / h2;
    }
    // one-sided six-point stencils keep fourth order at the ends
    let fwd0 = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    let fwd1 = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    let l = m - 1;
    d[0] = fwd0.iter().enumerate().map(|(k, c)| c * f[k]).sum::<f64>() / h2;
    d[1] = fwd1.iter().enumerate().map(|(k, c)| c * f[k]).sum::<f64>() / h2;
    d[l] = fwd0
        .iter()
        .enumerate()
        .map(|(k, c)| c * f[l - k])
        .sum::<f64>()
        / h2;
    d[l - 1] = fwd1
        .iter()
        .enumerate()
        .map(|(k, c)| c * f[l - k])
        .sum::<f64>()
        / h2;
    d
}

/// `int_{R^n} |u|^{m_exp} |x|^{-a} dx`.
pub fn weighted_power_integral(
    grid: &RadialGrid,
    u: &RadialProfile,
    m_exp: f64,
    a: f64,
) -> Result<f64> {
    grid.check(u)?;
    let n = grid.dim() as f64;
    if a >= n && u.values()[0] != 0.0 {
        return Err(Error::NonIntegrable(format!(
            "weight |x|^-{a} is not integrable at the origin in dimension {n}"
        )));
    }
    let f = weighted_power_samples(grid, u.values(), m_exp, a);
    Ok(grid.integrate_log_samples(&f))
}

pub(crate) fn weighted_power_samples(grid: &RadialGrid, u: &[f64], m_exp: f64, a: f64) -> Vec<f64> {
    let n = grid.dim() as f64;
    let sigma = grid.surface_factor();
    grid.nodes()
        .iter()
        .zip(u)
        .map(|(r, v)| {
            if *v == 0.0 {
                0.0
            } else {
                sigma * r.powf(n - a) * v.abs().powf(m_exp)
            }
        })
        .collect()
}

/// Staggered differences `(u_{i+1} - u_i) / h` in `ln r`, located at the
/// cell midpoints.
pub fn staggered_log_slopes(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let h = grid.step();
    u.windows(2).map(|w| (w[1] - w[0]) / h).collect()
}

/// `int_{R^n} |u'(|x|)|^p dx` by the midpoint rule on staggered differences
/// (second order, no odd-even null mode).
pub fn gradient_p_integral(grid: &RadialGrid, u: &RadialProfile, p: f64) -> Result<f64> {
    grid.check(u)?;
    if p < 1.0 {
        return Err(Error::InvalidParams(format!("gradient exponent {p} < 1")));
    }
    let f = gradient_samples(grid, u.values(), p);
    let w = vec![grid.step(); f.len()];
    Ok(sum_with_tails(&f, &w, grid.step(), 0.5 * grid.step(), None))
}

pub(crate) fn gradient_samples(grid: &RadialGrid, u: &[f64], p: f64) -> Vec<f64> {
    let n = grid.dim() as f64;
    let sigma = grid.surface_factor();
    let slopes = staggered_log_slopes(grid, u);
    grid.midpoints()
        .iter()
        .zip(&slopes)
        .map(|(r, d)| {
            if *d == 0.0 {
                0.0
            } else {
                sigma * r.powf(n - p) * d.abs().powf(p)
            }
        })
        .collect()
}

/// Gauss rule for `int_{-1}^{1} g(c) (1 - c^2)^{(n-3)/2} dc`, the polar-angle
/// measure of the sphere `S^{n-1}` written in `c = cos(theta)`.
pub fn angular_rule(n: u32, k: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 2 {
        // Chebyshev weight (1 - c^2)^{-1/2}
        let nodes = (1..=k)
            .map(|j| ((2 * j - 1) as f64 * std::f64::consts::PI / (2 * k) as f64).cos())
            .collect();
        return (nodes, vec![std::f64::consts::PI / k as f64; k]);
    }
    let a = (n as f64 - 3.0) / 2.0;
    // Golub-Welsch on the symmetric Jacobi matrix of the Gegenbauer weight
    let mut jac = DMatrix::<f64>::zeros(k, k);
    for i in 1..k {
        let j = i as f64;
        let b =
            (j * (j + 2.0 * a) / ((2.0 * j + 2.0 * a + 1.0) * (2.0 * j + 2.0 * a - 1.0))).sqrt();
        jac[(i, i - 1)] = b;
        jac[(i - 1, i)] = b;
    }
    let mass = 2f64.powf(2.0 * a + 1.0) * gamma(a + 1.0).powi(2) / gamma(2.0 * a + 2.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// `int_{R^n} |u(|x|)|^p |x + alpha e_1|^{-p} dx` by an axisymmetric rule
/// (radial grid times a Gauss rule in the polar angle).
pub fn translated_hardy_integral(
    grid: &RadialGrid,
    u: &RadialProfile,
    alpha: f64,
    p: f64,
) -> Result<f64> {
    translated_hardy_integral_with(grid, u, alpha, p, DEFAULT_ANGULAR_NODES)
}

pub fn translated_hardy_integral_with(
    grid: &RadialGrid,
    u: &RadialProfile,
    alpha: f64,
    p: f64,
    angular_nodes: usize,
) -> Result<f64> {
    grid.check(u)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!(
            "translation {alpha} must be finite and >= 0"
        )));
    }
    let n = grid.dim();
    let nf = n as f64;
    let (cs, cw) = angular_rule(n, angular_nodes);
    let ratio = sphere_area(n - 1) / sphere_area(n);
    let sigma = grid.surface_factor();
    let f: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(r, v)| {
            if *v == 0.0 {
                return 0.0;
            }
            let ang: f64 = if alpha == 0.0 {
                r.powf(-p)
            } else {
                ratio
                    * cs.iter()
                        .zip(&cw)
                        .map(|(c, w)| {
                            w * (r * r + alpha * alpha + 2.0 * alpha * r * c)
                                .max(0.0)
                                .powf(-p / 2.0)
                        })
                        .sum::<f64>()
            };
            sigma * r.powf(nf) * v.abs().powf(p) * ang
        })
        .collect();
    Ok(grid.integrate_log_samples(&f))
}
