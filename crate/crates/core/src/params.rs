//! Exponent arithmetic and threshold constants.
//!
//! Every other module consumes a validated [`ProblemParams`]; validation
//! happens once, at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_np(n: u32, p: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "dimension n = {n} must be >= 2"
        )));
    }
    if !(p.is_finite() && p > 1.0 && p < n as f64) {
        return Err(Error::InvalidParams(format!(
            "p = {p} must lie in (1, n = {n})"
        )));
    }
    Ok(())
}

/// Critical Sobolev exponent `n p / (n - p)`.
pub fn critical_sobolev_exponent(n: u32, p: f64) -> Result<f64> {
    check_np(n, p)?;
    let n = n as f64;
    Ok(n * p / (n - p))
}

/// Hardy-Sobolev exponent `p (n - s) / (n - p)`; collapses to the Sobolev
/// exponent at `s = 0`.
pub fn hardy_sobolev_exponent(n: u32, p: f64, s: f64) -> Result<f64> {
    check_np(n, p)?;
    if !(s.is_finite() && s >= 0.0 && s < p) {
        return Err(Error::InvalidParams(format!(
            "s = {s} must lie in [0, p = {p})"
        )));
    }
    let n = n as f64;
    Ok(p * (n - s) / (n - p))
}

/// Optimal constant of the Hardy inequality, `((n - p) / p)^p`.
pub fn hardy_best_constant(n: u32, p: f64) -> Result<f64> {
    check_np(n, p)?;
    Ok(((n as f64 - p) / p).powf(p))
}

/// Validated problem parameters together with every derived exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub p: f64,
    pub s: f64,
    pub mu: f64,
    /// Optional exponent replacing the Sobolev power in the nonexistence study.
    pub q: Option<f64>,
    pub p_star: f64,
    pub p_star_s: f64,
    pub mu1: f64,
}

impl ProblemParams {
    pub fn new(n: u32, p: f64, s: f64, mu: f64) -> Result<Self> {
        let p_star = critical_sobolev_exponent(n, p)?;
        let p_star_s = hardy_sobolev_exponent(n, p, s)?;
        let mu1 = hardy_best_constant(n, p)?;
        if !(mu.is_finite() && mu < mu1) {
            return Err(Error::InvalidParams(format!(
                "mu = {mu} must be < mu1 = {mu1}"
            )));
        }
        Ok(Self {
            n,
            p,
            s,
            mu,
            q: None,
            p_star,
            p_star_s,
            mu1,
        })
    }

    pub fn with_q(mut self, q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::InvalidParams(format!("q = {q} must be > 1")));
        }
        self.q = Some(q);
        Ok(self)
    }

    /// Same (n, p, mu) with a different weight exponent.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        let mut out = Self::new(self.n, self.p, s, self.mu)?;
        out.q = self.q;
        Ok(out)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        let mut out = Self::new(self.n, self.p, self.s, mu)?;
        out.q = self.q;
        Ok(out)
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Exponent of the scaling group, `(n - p) / p`.
    pub fn scaling_exponent(&self) -> f64 {
        (self.dim() - self.p) / self.p
    }

    /// The exponent used for the "Sobolev" nonlinearity: `q` when set,
    /// otherwise `p_star`.
    pub fn q_or_critical(&self) -> f64 {
        self.q.unwrap_or(self.p_star)
    }

    /// Coefficient `1/p - 1/p_star = 1/n`.
    pub fn sobolev_energy_factor(&self) -> f64 {
        1.0 / self.dim()
    }

    /// Coefficient `1/p - 1/p_star(s) = (p - s) / (p (n - s))`.
    pub fn hs_energy_factor(&self) -> f64 {
        (self.p - self.s) / (self.p * (self.dim() - self.s))
    }

    /// Power-law exponents `gamma_1 <= gamma_2` with `r^{-gamma}` solving the
    /// homogeneous radial equation `-Delta_p u = mu |x|^{-p} u^{p-1}`; they
    /// give the behaviour of extremals at the origin and at infinity.
    pub fn hardy_exponents(&self) -> (f64, f64) {
        let n = self.dim();
        let p = self.p;
        let g =
            |gamma: f64| gamma.signum() * gamma.abs().powf(p - 1.0) * (n - p - gamma * (p - 1.0));
        let peak = (n - p) / p;
        let zero_top = (n - p) / (p - 1.0);
        // g increases on (-inf, peak] and decreases on [peak, inf). Brackets
        // of one sign are bisected geometrically: for p near 1 the smaller
        // root can sit hundreds of decades below 1.
        let solve = |mut lo: f64, mut hi: f64, increasing: bool| {
            for _ in 0..200 {
                let mid = if lo * hi > 0.0 {
                    lo.signum() * (lo * hi).sqrt()
                } else {
                    0.5 * (lo + hi)
                };
                let above = g(mid) > self.mu;
                if above == increasing {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        if self.mu == 0.0 {
            return (0.0, zero_top);
        }
        let mut hi = zero_top + 1.0;
        while g(hi) > self.mu {
            hi *= 2.0;
        }
        let upper = solve(peak, hi, false);
        if self.mu > 0.0 {
            return (solve(f64::MIN_POSITIVE, peak, true), upper);
        }
        let mut lo = -1.0;
        while g(lo) > self.mu {
            lo *= 2.0;
        }
        (solve(lo, -f64::MIN_POSITIVE, true), upper)
    }
}

/// Mountain-pass threshold `c_star`: the smaller of the two single-nonlinearity
/// ray maxima evaluated at the best constants.
pub fn mountain_pass_threshold(params: &ProblemParams, k0: f64, ks: f64) -> Result<f64> {
    if !(k0 > 0.0 && ks > 0.0 && k0.is_finite() && ks.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "best constants must be positive, got K0 = {k0}, Ks = {ks}"
        )));
    }
    let n = params.dim();
    let p = params.p;
    let s = params.s;
    let sobolev = k0.powf(-n / p) / n;
    let hs = params.hs_energy_factor() * ks.powf(-(n - s) / (p - s));
    Ok(sobolev.min(hs))
}
