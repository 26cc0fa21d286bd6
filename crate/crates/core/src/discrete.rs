//! The discretized functional: the same quadrature as [`crate::quadrature`],
//! differentiated exactly with respect to the nodal values.

use crate::params::ProblemParams;
use crate::quadrature::{sum_with_tails, RadialGrid};

/// Regularization of `|t|^{p-2}` inside the preconditioner only.
pub(crate) const EPS_REG: f64 = 1e-12;

/// `|t|^{p-2}` for the preconditioner. For `p >= 2` the degenerate weight is
/// lifted by `EPS_REG`; for `p < 2` it is singular and kept exact, clamped
/// only at `t = 0`.
fn linearized_weight(t: f64, p: f64) -> f64 {
    if p >= 2.0 {
        (t * t + EPS_REG).powf(0.5 * (p - 2.0))
    } else {
        t.abs().max(1e-150).powf(p - 2.0)
    }
}

pub(crate) struct Discretization<'g> {
    pub grid: &'g RadialGrid,
    pub p: f64,
    /// Power-law exponents `(g1, g2)` used to extend `u` as `r^{-g1}` below
    /// the window and `r^{-g2}` above it; `None` keeps the fitted tails.
    pub closure: Option<(f64, f64)>,
    /// `sigma rho^{n-p}` at the cell midpoints.
    midpoint_coef: Vec<f64>,
    ones: Vec<f64>,
}

impl<'g> Discretization<'g> {
    pub fn new(grid: &'g RadialGrid, p: f64) -> Self {
        let n = grid.dim() as f64;
        let sigma = grid.surface_factor();
        let midpoint_coef = grid
            .midpoints()
            .iter()
            .map(|r| sigma * r.powf(n - p))
            .collect();
        let ones = vec![grid.step(); grid.len() - 1];
        Self {
            grid,
            p,
            closure: None,
            midpoint_coef,
            ones,
        }
    }

    pub fn with_closure(mut self, g1: f64, g2: f64) -> Self {
        self.closure = Some((g1, g2));
        self
    }

    /// Exterior pieces `(value, d/du_0)` and `(value, d/du_last)` of
    /// `int |u|^m |x|^{-a}` for the power-law extensions, or `None` where the
    /// extension is not integrable.
    fn closure_pieces(
        &self,
        u0: f64,
        ul: f64,
        m: f64,
        a: f64,
        gradient: bool,
    ) -> Option<[(f64, f64); 2]> {
        let (g1, g2) = self.closure?;
        let n = self.grid.dim() as f64;
        let sigma = self.grid.surface_factor();
        let (r0, r1) = (self.grid.r_min(), self.grid.r_max());
        let p = self.p;
        // |u'|^p r^{n-1} = g^p |u|^p r^{-p} r^{n-1} for a pure power
        let (k0, k1) = if gradient {
            (g1.abs().powf(p), g2.abs().powf(p))
        } else {
            (1.0, 1.0)
        };
        let left_rate = n - a - m * g1;
        let right_rate = m * g2 - n + a;
        if !(left_rate > 0.0 && right_rate > 0.0) {
            return None;
        }
        let piece = |k: f64, v: f64, r: f64, rate: f64| {
            let c = sigma * k * r.powf(n - a) / rate;
            (c * v.abs().powf(m), c * m * phi(v, m))
        };
        Some([piece(k0, u0, r0, left_rate), piece(k1, ul, r1, right_rate)])
    }

    /// `int |u'|^p` and optionally its gradient.
    pub fn gradient_term(&self, u: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let h = self.grid.step();
        let p = self.p;
        let slopes: Vec<f64> = u.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let f: Vec<f64> = slopes
            .iter()
            .zip(&self.midpoint_coef)
            .map(|(d, c)| if *d == 0.0 { 0.0 } else { c * d.abs().powf(p) })
            .collect();
        let last = u.len() - 1;
        let ends = self.closure_pieces(u[0], u[last], p, p, true);
        let end_total = ends.map_or(0.0, |e| e[0].0 + e[1].0);
        match grad {
            None => match ends {
                Some(_) => f.iter().sum::<f64>() * h + end_total,
                None => sum_with_tails(&f, &self.ones, h, 0.5 * h, None),
            },
            Some(out) => {
                let mut df = vec![h; f.len()];
                let total = match ends {
                    Some(_) => f.iter().sum::<f64>() * h + end_total,
                    None => sum_with_tails(&f, &self.ones, h, 0.5 * h, Some(&mut df)),
                };
                out.iter_mut().for_each(|g| *g = 0.0);
                if let Some(e) = ends {
                    out[0] += e[0].1;
                    out[last] += e[1].1;
                }
                for (i, ((d, c), w)) in slopes.iter().zip(&self.midpoint_coef).zip(&df).enumerate()
                {
                    let flux = w * c * p * phi(*d, p) / h;
                    out[i] -= flux;
                    out[i + 1] += flux;
                }
                total
            }
        }
    }

    /// `int |u|^m |x|^{-a}` (or `(u_+)^m` when `positive`), optionally with
    /// its gradient.
    pub fn mass_term(
        &self,
        u: &[f64],
        m: f64,
        a: f64,
        positive: bool,
        grad: Option<&mut [f64]>,
    ) -> f64 {
        let n = self.grid.dim() as f64;
        let sigma = self.grid.surface_factor();
        let h = self.grid.step();
        let w = self.grid.log_weights();
        let coef: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .map(|r| sigma * r.powf(n - a))
            .collect();
        let base = |v: f64| if positive { v.max(0.0) } else { v };
        let f: Vec<f64> = u
            .iter()
            .zip(&coef)
            .map(|(v, c)| {
                let b = base(*v);
                if b == 0.0 {
                    0.0
                } else {
                    c * b.abs().powf(m)
                }
            })
            .collect();
        let last = u.len() - 1;
        let ends = self.closure_pieces(base(u[0]), base(u[last]), m, a, false);
        let interior = |f: &[f64]| f.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
        match grad {
            None => match ends {
                Some(e) => interior(&f) + e[0].0 + e[1].0,
                None => sum_with_tails(&f, w, h, 0.0, None),
            },
            Some(out) => {
                let mut df = w.to_vec();
                let total = match ends {
                    Some(e) => interior(&f) + e[0].0 + e[1].0,
                    None => sum_with_tails(&f, w, h, 0.0, Some(&mut df)),
                };
                for (i, o) in out.iter_mut().enumerate() {
                    *o = df[i] * coef[i] * m * phi(base(u[i]), m);
                }
                if let Some(e) = ends {
                    let sign = |v: f64| if positive && v < 0.0 { 0.0 } else { 1.0 };
                    out[0] += sign(u[0]) * e[0].1;
                    out[last] += sign(u[last]) * e[1].1;
                }
                total
            }
        }
    }

    /// Tridiagonal approximation of `Hess(G - mu H) / (p (p - 1))`, which
    /// maps `u` to about `grad(G - mu H) / p`.
    pub fn preconditioner(&self, u: &[f64], mu: f64) -> Tridiagonal {
        let m = u.len();
        let h = self.grid.step();
        let p = self.p;
        let n = self.grid.dim() as f64;
        let sigma = self.grid.surface_factor();
        let mut t = Tridiagonal {
            lower: vec![0.0; m - 1],
            diag: vec![0.0; m],
            upper: vec![0.0; m - 1],
        };
        for i in 0..m - 1 {
            let d = (u[i + 1] - u[i]) / h;
            let k = self.midpoint_coef[i] * linearized_weight(d, p) / h;
            t.diag[i] += k;
            t.diag[i + 1] += k;
            t.lower[i] -= k;
            t.upper[i] -= k;
        }
        if mu != 0.0 {
            for (i, (r, w)) in self
                .grid
                .nodes()
                .iter()
                .zip(self.grid.log_weights())
                .enumerate()
            {
                t.diag[i] -= mu * w * sigma * r.powf(n - p) * linearized_weight(u[i], p);
            }
        }
        // the closure pieces are c |u_end|^p; their scaled Hessian is c |u_end|^{p-2}
        let last = m - 1;
        let (w0, wl) = (linearized_weight(u[0], p), linearized_weight(u[last], p));
        for (gradient, factor) in [(true, 1.0), (false, -mu)] {
            if factor == 0.0 {
                continue;
            }
            if let Some(e) = self.closure_pieces(1.0, 1.0, p, p, gradient) {
                t.diag[0] += factor * e[0].0 * w0;
                t.diag[last] += factor * e[1].0 * wl;
            }
        }
        t
    }

    /// The gradient-term part alone, used when the full linearization is
    /// not positive definite.
    pub fn gradient_preconditioner(&self, u: &[f64]) -> Tridiagonal {
        self.preconditioner(u, 0.0)
    }
}

/// Discretization whose window is closed by the power-law asymptotics of
/// the equation; this removes profiles that are flat at the window edge.
pub(crate) fn closed_discretization<'g>(
    params: &ProblemParams,
    grid: &'g RadialGrid,
) -> Discretization<'g> {
    let (g1, g2) = params.hardy_exponents();
    Discretization::new(grid, params.p).with_closure(g1, g2)
}

/// `|t|^{q-2} t`.
pub(crate) fn phi(t: f64, q: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(q - 2.0) * t
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    /// Raises each diagonal entry to at least `floor` times the off-diagonal
    /// mass of its row, so rows that lost their diagonal stay solvable.
    pub fn floor_diagonal(&mut self, floor: f64) {
        let m = self.diag.len();
        for i in 0..m {
            let left = if i > 0 { self.lower[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < m { self.upper[i].abs() } else { 0.0 };
            let min = floor * (left + right);
            if self.diag[i] < min {
                self.diag[i] = min;
            }
        }
    }

    /// Thomas algorithm; `None` when a pivot is not positive.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let m = self.diag.len();
        let mut c = vec![0.0; m];
        let mut x = vec![0.0; m];
        let mut pivot = self.diag[0];
        if !(pivot > 0.0) {
            return None;
        }
        x[0] = rhs[0] / pivot;
        for i in 1..m {
            c[i - 1] = self.upper[i - 1] / pivot;
            pivot = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if !(pivot > 0.0) {
                return None;
            }
            x[i] = (rhs[i] - self.lower[i - 1] * x[i - 1]) / pivot;
        }
        for i in (0..m - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Some(x)
    }
}
