//! Radial ODE shooting in `t = ln r`.
//!
//! State is `(u, F)` with `F = r^{n-p} phi_p(r u')`, so that
//! `u_t = phi_p^{-1}(F r^{p-n})` and
//! `F_t = -mu r^{n-p} phi_p(u) - lambda r^{n-s} phi_{p*(s)}(u) - [r^n phi_{p*}(u)]`.

use crate::discrete::phi;
use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::RadialProfile;
use crate::quadrature::RadialGrid;

const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-300;
const BLOW_UP: f64 = 1e150;

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct RadialOde {
    n: f64,
    p: f64,
    s: f64,
    mu: f64,
    lambda: f64,
    ps: f64,
    sobolev: Option<f64>,
}

impl RadialOde {
    fn rhs(&self, t: f64, y: [f64; 2]) -> [f64; 2] {
        let [u, f] = y;
        let r = t.exp();
        let du = phi(f * r.powf(self.p - self.n), self.p / (self.p - 1.0));
        let mut df = -self.mu * r.powf(self.n - self.p) * phi(u, self.p)
            - self.lambda * r.powf(self.n - self.s) * phi(u, self.ps);
        if let Some(q) = self.sobolev {
            df -= r.powf(self.n) * phi(u, q);
        }
        [du, df]
    }

    /// Regular data at `r`: `u ~ u0 r^{-gamma_1}` plus the first nonlinear
    /// correction of each term.
    fn initial_data(&self, params: &ProblemParams, u0: f64, r: f64) -> [f64; 2] {
        let p = self.p;
        if self.mu == 0.0 {
            let mut flux =
                self.lambda * u0.powf(self.ps - 1.0) * r.powf(self.n - self.s) / (self.n - self.s);
            if let Some(q) = self.sobolev {
                flux += u0.powf(q - 1.0) * r.powf(self.n) / self.n;
            }
            // r^{n-1} phi_p(u') = -flux, integrated once more for u
            let slope = (flux * r.powf(1.0 - self.n)).powf(1.0 / (p - 1.0));
            let u = u0 - slope * r / ((1.0 - self.s) / (p - 1.0) + 1.0);
            [u, -flux]
        } else {
            let g1 = params.hardy_exponents().0;
            let (mut shape, mut slope) = (1.0, -g1);
            for (c, theta) in self.corrections(params, u0) {
                shape += c * r.powf(theta);
                slope += c * (theta - g1) * r.powf(theta);
            }
            let base = u0 * r.powf(-g1);
            [base * shape, r.powf(self.n - p) * phi(base * slope, p)]
        }
    }

    /// `(c, theta)` with `u = u0 r^{-g1} (1 + sum c r^theta)` for `mu != 0`;
    /// `c` comes from the linearization at the pure power, whose symbol on
    /// `r^{-b}` is `symbol(b)`.
    fn corrections(&self, params: &ProblemParams, u0: f64) -> Vec<(f64, f64)> {
        let p = self.p;
        let g1 = params.hardy_exponents().0;
        let symbol =
            |b: f64| g1.abs().powf(p - 2.0) * b * (self.n - p - g1 * (p - 2.0) - b) - self.mu;
        let mut terms = vec![(self.lambda, self.ps, self.s)];
        if let Some(q) = self.sobolev {
            terms.push((1.0, q, 0.0));
        }
        terms
            .into_iter()
            .filter_map(|(coef, q, weight)| {
                let theta = (p - weight) - g1 * (q - p);
                let c = coef * u0.powf(q - p) / ((p - 1.0) * symbol(g1 - theta));
                (theta > 0.0 && c.is_finite()).then_some((c, theta))
            })
            .collect()
    }

    /// Where to start so that the dropped second-order terms stay below
    /// `1e-12`; never above `r_min` and at most `START_DECADES` lower.
    fn start_log_radius(&self, params: &ProblemParams, u0: f64, r_min: f64) -> f64 {
        let t_min = r_min.ln();
        if self.mu == 0.0 {
            return t_min;
        }
        self.corrections(params, u0)
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, theta)| (1e-6 / c.abs()).ln() / theta)
            .fold(t_min, f64::min)
            .max(t_min - START_DECADES * std::f64::consts::LN_10)
    }
}

const START_DECADES: f64 = 60.0;

fn dopri_step(ode: &RadialOde, t: f64, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
    let mut k = [[0.0; 2]; 7];
    for i in 0..7 {
        let mut yi = y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * A[i][j] * kj[0];
            yi[1] += h * A[i][j] * kj[1];
        }
        k[i] = ode.rhs(t + C[i] * h, yi);
    }
    let mut y5 = y;
    let mut err = 0.0f64;
    for c in 0..2 {
        let (mut d5, mut d4) = (0.0, 0.0);
        for i in 0..7 {
            d5 += B5[i] * k[i][c];
            d4 += B4[i] * k[i][c];
        }
        y5[c] += h * d5;
        let sc = ATOL + RTOL * y[c].abs().max(y5[c].abs());
        err = err.max((h * (d5 - d4)).abs() / sc);
    }
    (y5, err)
}

/// Shoots the regular radial solution with amplitude `u0` across the grid
/// window. With `s_term_only` the equation carries only the Hardy–Sobolev
/// nonlinearity, otherwise also the unit-weight Sobolev term.
pub fn shoot_radial(
    params: &ProblemParams,
    grid: &RadialGrid,
    u0: f64,
    lambda: f64,
    s_term_only: bool,
) -> Result<RadialProfile> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::Precondition(format!(
            "shooting amplitude must be positive, got {u0}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::Precondition("shooting needs a finite lambda".into()));
    }
    let ode = RadialOde {
        n: params.dim(),
        p: params.p,
        s: params.s,
        mu: params.mu,
        lambda,
        ps: params.p_star_s,
        sobolev: (!s_term_only).then_some(params.p_star),
    };
    let ts = grid.log_nodes();
    let t_start = ode.start_log_radius(params, u0, grid.r_min());
    let mut y = ode.initial_data(params, u0, t_start.exp());
    let mut values = Vec::with_capacity(ts.len());
    let mut h = grid.step() / 4.0;
    let mut t = t_start;
    for &target in ts {
        while t < target {
            let step = h.min(target - t);
            let (next, err) = dopri_step(&ode, t, y, step);
            let ok = err <= 1.0 && next.iter().all(|x| x.is_finite());
            if ok {
                t = if step >= target - t { target } else { t + step };
                y = next;
                if y[0].abs() > BLOW_UP {
                    return Err(Error::ShootingFailed {
                        r: t.exp(),
                        reason: "solution blew up".into(),
                    });
                }
            }
            let factor = if err.is_finite() && err > 0.0 {
                0.9 * err.powf(-0.2)
            } else {
                5.0
            };
            let factor = if ok {
                factor.clamp(0.2, 5.0)
            } else {
                factor.clamp(0.1, 0.5)
            };
            // keep the step carried over between nodes
            if ok && step < h {
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::ShootingFailed {
                    r: t.exp(),
                    reason: "step size underflow".into(),
                });
            }
        }
        values.push(y[0]);
    }
    Ok(RadialProfile::from_raw(grid.spec(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_log_grid;

    #[test]
    fn rejects_nonpositive_amplitude() {
        let g = build_log_grid(1e-3, 1e3, 64, 3).unwrap();
        let params = ProblemParams::new(3, 2.0, 0.0, 0.0).unwrap();
        assert!(shoot_radial(&params, &g, 0.0, 3.0, true).is_err());
    }

    #[test]
    fn reproduces_bubble() {
        let g = build_log_grid(1e-6, 1e6, 1024, 3).unwrap();
        let params = ProblemParams::new(3, 2.0, 0.0, 0.0).unwrap();
        let u = shoot_radial(&params, &g, 1.0, 3.0, true).unwrap();
        let err = g
            .nodes()
            .iter()
            .zip(u.values())
            .filter(|(r, _)| **r <= 10.0)
            .map(|(r, v)| (v - (1.0 + r * r).powf(-0.5)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }
}
