//! Radial profiles and the structural operators acting on them: the scaling
//! group, positive part, decreasing rearrangement, annular cutoffs and the
//! standard test profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quadrature::{log_derivative, GridSpec, RadialGrid};

/// A radial function `u(|x|)` sampled at the nodes of a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    values: Vec<f64>,
    grid: GridSpec,
}

impl RadialProfile {
    pub fn new(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                profile: format!("{} samples", values.len()),
                grid: grid.spec().to_string(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("profile values must be finite".into()));
        }
        Ok(Self {
            values,
            grid: grid.spec(),
        })
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.nodes().iter().map(|&r| f(r)).collect(),
            grid: grid.spec(),
        }
    }

    pub fn zeros(grid: &RadialGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid: grid.spec(),
        }
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        Self { values, grid: spec }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn grid_spec(&self) -> GridSpec {
        self.grid
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            grid: self.grid,
        }
    }

    pub fn scaled_by(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise product with another profile on the same grid.
    pub fn times(&self, other: &RadialProfile) -> Result<Self> {
        if other.grid != self.grid {
            return Err(Error::GridMismatch {
                profile: other.grid.to_string(),
                grid: self.grid.to_string(),
            });
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            grid: self.grid,
        })
    }

    /// `|u(r_max)| r_max^{(n-p)/p} / max|u|`; finite-energy profiles on a
    /// wide window make this small.
    pub fn tail_decay_ratio(&self, grid: &RadialGrid, p: f64) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = grid.dim() as f64;
        self.values[self.len() - 1].abs() * grid.r_max().powf((n - p) / p) / max
    }

    pub fn passes_decay_check(&self, grid: &RadialGrid, p: f64) -> bool {
        self.tail_decay_ratio(grid, p) < 1e-6
    }

    /// Evaluates the monotone cubic interpolant at an arbitrary radius.
    pub fn eval(&self, grid: &RadialGrid, r: f64) -> f64 {
        Interpolant::new(grid, &self.values).eval(r.ln())
    }
}

/// Cubic Hermite interpolant in `ln r` with fourth-order slopes passed
/// through a Hyman monotonicity filter away from extrema; power-law continuation outside the
/// window using the slope of the two outermost samples.
pub(crate) struct Interpolant<'a> {
    t0: f64,
    h: f64,
    values: &'a [f64],
    slopes: Vec<f64>,
    left_rate: f64,
    right_rate: f64,
}

impl<'a> Interpolant<'a> {
    pub(crate) fn new(grid: &RadialGrid, values: &'a [f64]) -> Self {
        let h = grid.step();
        let mut slopes = log_derivative(values, h);
        let m = values.len();
        let secant: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        for i in 0..m {
            let left = if i > 0 { secant[i - 1] } else { secant[0] };
            let right = if i < m - 1 { secant[i] } else { secant[m - 2] };
            // next to an extremum the clamp would cut a good slope
            let outer = [i.checked_sub(2), (i + 1 < m - 1).then_some(i + 1)];
            let monotone = outer.iter().flatten().all(|&j| secant[j] * left > 0.0);
            if left * right > 0.0 && monotone {
                let bound = 3.0 * left.abs().min(right.abs());
                let sign = left.signum();
                slopes[i] = sign * (sign * slopes[i]).clamp(0.0, bound);
            } else if left == 0.0 || right == 0.0 {
                // flat neighbour: keep the interpolant from overshooting
                if (i == 0 || i == m - 1) || left * slopes[i] < 0.0 || right * slopes[i] < 0.0 {
                    slopes[i] = 0.0;
                }
            }
        }
        let rate = |a: f64, b: f64| {
            if a != 0.0 && a * b > 0.0 {
                (b / a).ln() / h
            } else {
                0.0
            }
        };
        Self {
            t0: grid.log_nodes()[0],
            h,
            values,
            slopes,
            left_rate: rate(values[0], values[1]),
            right_rate: rate(values[m - 2], values[m - 1]),
        }
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let m = self.values.len();
        let x = (t - self.t0) / self.h;
        if x <= 0.0 {
            return self.values[0] * (self.left_rate * x * self.h).exp();
        }
        let last = (m - 1) as f64;
        if x >= last {
            return self.values[m - 1] * (self.right_rate * (x - last) * self.h).exp();
        }
        let k = (x.floor() as usize).min(m - 2);
        let s = x - k as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[k]
            + h10 * self.h * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * self.h * self.slopes[k + 1]
    }
}

/// The scaling group `u -> r^{(n-p)/p} u(r x)`, resampled onto the same grid.
pub fn scale(grid: &RadialGrid, u: &RadialProfile, p: f64, r: f64) -> Result<RadialProfile> {
    grid.check(u)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "scale factor {r} must be positive"
        )));
    }
    if r == 1.0 {
        return Ok(u.clone());
    }
    let n = grid.dim() as f64;
    let factor = r.powf((n - p) / p);
    let shift = r.ln();
    let interp = Interpolant::new(grid, &u.values);
    let values = grid
        .log_nodes()
        .iter()
        .map(|t| factor * interp.eval(t + shift))
        .collect();
    Ok(RadialProfile::from_raw(grid.spec(), values))
}

pub fn positive_part(u: &RadialProfile) -> RadialProfile {
    u.map(|v| v.max(0.0))
}

/// Sub-intervals per grid cell used when building the distribution function.
const REARRANGEMENT_REFINEMENT: usize = 32;

/// Equimeasurable non-increasing rearrangement of a non-negative radial
/// profile (the Schwarz symmetrization restricted to radial data).
///
/// The profile is refined by monotone cubic interpolation and taken to be
/// linear in the volume coordinate `V = omega_n r^n` on each sub-interval.
/// The distribution function `V(tau) = |{u > tau}|` of that representation is
/// piecewise linear in `tau` and is inverted exactly at the grid volumes.
pub fn decreasing_rearrangement(grid: &RadialGrid, u: &RadialProfile) -> Result<RadialProfile> {
    let sweep = LevelSweep::new(grid, u)?;
    let n = grid.dim() as i32;
    let omega = grid.ball_volume();
    let targets: Vec<f64> = grid.nodes().iter().map(|r| omega * r.powi(n)).collect();
    let mut out = Vec::with_capacity(targets.len());
    let mut q = 0;
    let mut measure = 0.0;
    let mut rate = 0.0;
    let mut tau = sweep.events[0].0;
    for (level, event) in &sweep.events {
        if q == targets.len() {
            break;
        }
        let gained = rate * (tau - level);
        while q < targets.len() && measure + gained >= targets[q] {
            out.push(tau - (targets[q] - measure) / rate);
            q += 1;
        }
        measure += gained;
        tau = *level;
        match event {
            Event::Jump(len) => {
                while q < targets.len() && measure + len >= targets[q] {
                    out.push(tau);
                    q += 1;
                }
                measure += len;
            }
            Event::RateOn(r) => rate += r,
            Event::RateOff(r) => rate -= r,
        }
    }
    while out.len() < targets.len() {
        out.push(sweep.floor);
    }
    // guard against rounding in the running rate
    for k in 1..out.len() {
        out[k] = out[k].min(out[k - 1]).max(0.0);
    }
    Ok(RadialProfile::from_raw(grid.spec(), out))
}

/// Volumes `|{u > tau}|` inside the grid window for each level in `taus`,
/// from the same refined representation the rearrangement uses.
pub fn distribution_function(
    grid: &RadialGrid,
    u: &RadialProfile,
    taus: &[f64],
) -> Result<Vec<f64>> {
    let sweep = LevelSweep::new(grid, u)?;
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|a, b| taus[*b].total_cmp(&taus[*a]));
    let mut out = vec![0.0; taus.len()];
    let (mut measure, mut rate, mut tau) = (0.0, 0.0, sweep.events[0].0);
    let mut k = 0;
    for (level, event) in &sweep.events {
        while k < order.len() && taus[order[k]] >= *level {
            out[order[k]] = measure + rate * (tau - taus[order[k]].min(tau));
            k += 1;
        }
        measure += rate * (tau - level);
        tau = *level;
        match event {
            Event::Jump(len) => measure += len,
            Event::RateOn(r) => rate += r,
            Event::RateOff(r) => rate -= r,
        }
    }
    for &i in &order[k..] {
        out[i] = measure;
    }
    Ok(out)
}

/// Events in tau: a flat piece adds its whole volume when tau drops below
/// its level; a sloped piece adds volume at a constant rate between its end
/// values.
enum Event {
    Jump(f64),
    RateOn(f64),
    RateOff(f64),
}

/// The profile refined by monotone cubic interpolation and taken to be
/// linear in the volume coordinate on each sub-interval, stored as level
/// events sorted by decreasing level.
struct LevelSweep {
    events: Vec<(f64, Event)>,
    floor: f64,
}

impl LevelSweep {
    fn new(grid: &RadialGrid, u: &RadialProfile) -> Result<Self> {
        grid.check(u)?;
        if u.values.iter().any(|v| *v < 0.0) {
            return Err(Error::Precondition(
                "rearrangement needs a non-negative profile".into(),
            ));
        }
        let n = grid.dim() as i32;
        let omega = grid.ball_volume();
        let refine = REARRANGEMENT_REFINEMENT;
        let fine_h = grid.step() / refine as f64;
        let t0 = grid.log_nodes()[0];
        let fine_count = (grid.len() - 1) * refine + 1;
        let interp = Interpolant::new(grid, &u.values);

        let mut levels = Vec::with_capacity(fine_count);
        let mut volumes = Vec::with_capacity(fine_count);
        for j in 0..fine_count {
            let (value, radius) = if j % refine == 0 {
                (u.values[j / refine], grid.nodes()[j / refine])
            } else {
                let t = t0 + j as f64 * fine_h;
                (interp.eval(t).max(0.0), t.exp())
            };
            levels.push(value);
            volumes.push(omega * radius.powi(n));
        }
        let mut events: Vec<(f64, Event)> = Vec::with_capacity(2 * fine_count);
        events.push((levels[0], Event::Jump(volumes[0])));
        for k in 0..fine_count - 1 {
            let len = volumes[k + 1] - volumes[k];
            let (hi, lo) = if levels[k] >= levels[k + 1] {
                (levels[k], levels[k + 1])
            } else {
                (levels[k + 1], levels[k])
            };
            if hi > lo {
                let rate = len / (hi - lo);
                events.push((hi, Event::RateOn(rate)));
                events.push((lo, Event::RateOff(rate)));
            } else {
                events.push((hi, Event::Jump(len)));
            }
        }
        events.sort_by(|a, b| b.0.total_cmp(&a.0));
        let floor = levels.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { events, floor })
    }
}

/// A radial function with analytic first and second derivatives in `r`.
pub trait RadialWeight {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
    /// Radii outside of which the weight is constant; `None` for no support
    /// constraint.
    fn ramp_support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// A constant weight (every derivative vanishes).
#[derive(Debug, Clone, Copy)]
pub struct ConstantWeight(pub f64);

impl RadialWeight for ConstantWeight {
    fn value(&self, _r: f64) -> f64 {
        self.0
    }
    fn d1(&self, _r: f64) -> f64 {
        0.0
    }
    fn d2(&self, _r: f64) -> f64 {
        0.0
    }
}

/// Quintic smoothstep ramp: 0 for `t <= 1`, 1 for `t >= 2`, C^2.
pub fn ramp(t: f64) -> f64 {
    let x = (t - 1.0).clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

pub fn ramp_d1(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        return 0.0;
    }
    let x = t - 1.0;
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

pub fn ramp_d2(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        return 0.0;
    }
    let x = t - 1.0;
    60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
}

/// Largest slope of [`ramp`], attained at `t = 3/2`.
pub const RAMP_MAX_SLOPE: f64 = 15.0 / 8.0;

/// Annular cutoff: 1 on `[2 eps, 1/(2 eps)]`, 0 outside `[eps, 1/eps]`.
#[derive(Debug, Clone, Copy)]
pub struct AnnularCutoff {
    pub epsilon: f64,
}

impl AnnularCutoff {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParams(format!(
                "cutoff epsilon {epsilon} must lie in (0, 1/2)"
            )));
        }
        Ok(Self { epsilon })
    }
}

impl RadialWeight for AnnularCutoff {
    fn value(&self, r: f64) -> f64 {
        let e = self.epsilon;
        ramp(r / e) * ramp(1.0 / (e * r))
    }

    fn d1(&self, r: f64) -> f64 {
        let e = self.epsilon;
        let (a, b) = (r / e, 1.0 / (e * r));
        ramp_d1(a) / e * ramp(b) - ramp(a) * ramp_d1(b) / (e * r * r)
    }

    fn d2(&self, r: f64) -> f64 {
        let e = self.epsilon;
        let (a, b) = (r / e, 1.0 / (e * r));
        let gb1 = -1.0 / (e * r * r);
        let gb2 = 2.0 / (e * r * r * r);
        let inner = ramp_d2(a) / (e * e);
        let outer = ramp_d2(b) * gb1 * gb1 + ramp_d1(b) * gb2;
        inner * ramp(b) + 2.0 * ramp_d1(a) / e * ramp_d1(b) * gb1 + ramp(a) * outer
    }

    fn ramp_support(&self) -> Option<(f64, f64)> {
        Some((self.epsilon, 1.0 / self.epsilon))
    }
}

/// Smooth bump in `ln r`: `exp(1 - 1/(1 - x^2))` with `x = (ln r - center) / width`,
/// zero for `|x| >= 1`. Every derivative is continuous.
#[derive(Debug, Clone, Copy)]
pub struct LogBump {
    pub center: f64,
    pub width: f64,
}

impl LogBump {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(center.is_finite() && width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "log bump needs finite center and positive width, got {center}, {width}"
            )));
        }
        Ok(Self { center, width })
    }

    /// `(eta, d eta/dx, d^2 eta/dx^2)` at `r`.
    fn in_x(&self, r: f64) -> (f64, f64, f64) {
        let x = (r.ln() - self.center) / self.width;
        if x.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let d = 1.0 - x * x;
        let e = (1.0 - 1.0 / d).exp();
        let g1 = -2.0 * x / (d * d);
        let g2 = -(2.0 + 6.0 * x * x) / (d * d * d);
        (e, e * g1, e * (g1 * g1 + g2))
    }
}

impl RadialWeight for LogBump {
    fn value(&self, r: f64) -> f64 {
        self.in_x(r).0
    }

    fn d1(&self, r: f64) -> f64 {
        self.in_x(r).1 / (self.width * r)
    }

    fn d2(&self, r: f64) -> f64 {
        let (_, e1, e2) = self.in_x(r);
        (e2 / self.width - e1) / (self.width * r * r)
    }

    fn ramp_support(&self) -> Option<(f64, f64)> {
        Some((
            (self.center - self.width).exp(),
            (self.center + self.width).exp(),
        ))
    }
}

/// Samples the annular cutoff on the grid.
pub fn cutoff_annulus(grid: &RadialGrid, epsilon: f64) -> Result<RadialProfile> {
    let cutoff = AnnularCutoff::new(epsilon)?;
    if epsilon <= grid.r_min() || 1.0 / epsilon >= grid.r_max() {
        return Err(Error::InvalidGrid(format!(
            "cutoff support [{epsilon}, {}] does not fit inside the grid window",
            1.0 / epsilon
        )));
    }
    Ok(RadialProfile::from_fn(grid, |r| cutoff.value(r)))
}

/// Smooth ball cutoff: 1 on `B_{radius/2}`, 0 outside `B_radius`.
pub fn ball_cutoff(radius: f64) -> impl Fn(f64) -> f64 {
    move |r| ramp(radius / r.max(f64::MIN_POSITIVE))
}

/// The standard `s = 0, mu = 0` extremal `(1 + r^{p/(p-1)})^{-(n-p)/p}`.
pub fn bubble(grid: &RadialGrid, params: &ProblemParams) -> RadialProfile {
    let p = params.p;
    let a = p / (p - 1.0);
    let e = params.scaling_exponent();
    RadialProfile::from_fn(grid, |r| (1.0 + r.powf(a)).powf(-e))
}

/// Initializer retuned to the weight and potential:
/// `r^{-g1} (1 + r^theta)^{-(g2-g1)/theta}` with `g1 < g2` the Hardy
/// exponents and `theta = (p - s)(g2 - g1)/(n - p)`. It reduces to
/// [`bubble`] at `s = mu = 0` and is the exact extremal when `p = 2`.
pub fn hardy_sobolev_ansatz(grid: &RadialGrid, params: &ProblemParams) -> RadialProfile {
    let (g1, g2) = params.hardy_exponents();
    let theta = (params.p - params.s) * (g2 - g1) / (params.dim() - params.p);
    let e = (g2 - g1) / theta;
    RadialProfile::from_fn(grid, |r| r.powf(-g1) * (1.0 + r.powf(theta)).powf(-e))
}
