//! Concentration quantities on balls, bubbling sequences, the Sobolev and
//! Hardy–Sobolev ratio checks, and the translation sweep for the Hardy term.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::profile::{ball_cutoff, scale, RadialProfile};
use crate::quadrature::{
    gradient_p_integral, log_derivative, translated_hardy_integral, weighted_power_integral,
    RadialGrid,
};

/// Ball-restricted integrals of a single profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTriple {
    /// `int_{B_delta} (u_+)^{p*}`
    pub alpha: f64,
    /// `int_{B_delta} (u_+)^{p*(s)} |x|^{-s}`
    pub beta: f64,
    /// `int_{B_delta} |grad u|^p - mu |u|^p |x|^{-p}`
    pub gamma: f64,
    pub delta: f64,
}

pub fn concentration_triple(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    delta: f64,
) -> Result<ConcentrationTriple> {
    grid.check(u)?;
    if !(delta > grid.r_min() && delta < grid.r_max()) {
        return Err(Error::Precondition(format!(
            "ball radius {delta} outside grid window ({}, {})",
            grid.r_min(),
            grid.r_max()
        )));
    }
    let n = params.dim();
    let p = params.p;
    let sigma = grid.surface_factor();
    let slopes = log_derivative(u.values(), grid.step());
    let m = grid.len();
    let (mut fa, mut fb, mut fg, mut fh) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for (i, (&r, &v)) in grid.nodes().iter().zip(u.values()).enumerate() {
        let vp = v.max(0.0);
        if vp > 0.0 {
            fa[i] = sigma * r.powf(n) * vp.powf(params.p_star);
            fb[i] = sigma * r.powf(n - params.s) * vp.powf(params.p_star_s);
        }
        // gradient and Hardy parts kept apart so each gets its own tail
        if slopes[i] != 0.0 {
            fg[i] = sigma * r.powf(n - p) * slopes[i].abs().powf(p);
        }
        if v != 0.0 {
            fh[i] = sigma * r.powf(n - p) * v.abs().powf(p);
        }
    }
    let gamma = grid.integrate_log_samples_up_to(&fg, delta)?
        - params.mu * grid.integrate_log_samples_up_to(&fh, delta)?;
    Ok(ConcentrationTriple {
        alpha: grid.integrate_log_samples_up_to(&fa, delta)?,
        beta: grid.integrate_log_samples_up_to(&fb, delta)?,
        gamma,
        delta,
    })
}

/// `[scale(u, r_k)]` for increasing positive rates.
pub fn bubble_sequence(
    grid: &RadialGrid,
    params: &ProblemParams,
    u: &RadialProfile,
    rates: &[f64],
) -> Result<Vec<RadialProfile>> {
    if rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParams("bubble rates must be positive".into()));
    }
    if rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("bubble rates must increase".into()));
    }
    rates.iter().map(|&r| scale(grid, u, params.p, r)).collect()
}

/// Finite stand-in for the limsup over a sequence: componentwise maximum
/// over its last quarter (at least one element).
pub fn tail_max(triples: &[ConcentrationTriple]) -> Option<ConcentrationTriple> {
    let start = triples.len() - triples.len().div_ceil(4).min(triples.len());
    triples[start..]
        .iter()
        .copied()
        .reduce(|a, b| ConcentrationTriple {
            alpha: a.alpha.max(b.alpha),
            beta: a.beta.max(b.beta),
            gamma: a.gamma.max(b.gamma),
            delta: a.delta,
        })
}

/// `alpha^{p/p*} / (K0 gamma)` and `beta^{p/p*(s)} / (Ks gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRatios {
    pub sobolev: f64,
    pub hardy_sobolev: f64,
    pub triple: ConcentrationTriple,
}

/// Cuts `u` to `B_delta` with a smooth ball cutoff and compares the ball
/// integrals against the best-constant inequalities.
pub fn check_concentration_inequalities(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    delta: f64,
    k0: f64,
    ks: f64,
) -> Result<ConcentrationRatios> {
    grid.check(u)?;
    if !(k0 > 0.0 && ks > 0.0) {
        return Err(Error::InvalidParams(format!(
            "best constants must be positive, got {k0}, {ks}"
        )));
    }
    let cut = ball_cutoff(delta);
    let v = RadialProfile::from_raw(
        grid.spec(),
        grid.nodes()
            .iter()
            .zip(u.values())
            .map(|(r, x)| x * cut(*r))
            .collect(),
    );
    let triple = concentration_triple(params, grid, &v, delta)?;
    if triple.alpha == 0.0 && triple.beta == 0.0 && triple.gamma == 0.0 {
        return Ok(ConcentrationRatios {
            sobolev: 0.0,
            hardy_sobolev: 0.0,
            triple,
        });
    }
    if !(triple.gamma > 0.0) {
        return Err(Error::Precondition(format!(
            "ball energy {} is not positive",
            triple.gamma
        )));
    }
    let p = params.p;
    Ok(ConcentrationRatios {
        sobolev: triple.alpha.powf(p / params.p_star) / (k0 * triple.gamma),
        hardy_sobolev: triple.beta.powf(p / params.p_star_s) / (ks * triple.gamma),
        triple,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationRow {
    pub alpha: f64,
    pub hardy_term: f64,
    pub quotient: f64,
}

/// Sobolev quotient of `u(x - alpha e_1)` with the Hardy term taken about
/// the origin; only the Hardy integral depends on `alpha`.
pub fn translation_sweep(
    params: &ProblemParams,
    grid: &RadialGrid,
    u: &RadialProfile,
    alphas: &[f64],
) -> Result<Vec<TranslationRow>> {
    grid.check(u)?;
    if params.mu > 0.0 || params.s != 0.0 {
        return Err(Error::InvalidParams(format!(
            "translation sweep needs mu <= 0 and s = 0, got mu = {}, s = {}",
            params.mu, params.s
        )));
    }
    let p = params.p;
    let grad = gradient_p_integral(grid, u, p)?;
    let mass = weighted_power_integral(grid, u, params.p_star, 0.0)?;
    if !(mass > 0.0) {
        return Err(Error::TrivialProfile(
            "translation sweep of a zero profile".into(),
        ));
    }
    let denom = mass.powf(p / params.p_star);
    alphas
        .par_iter()
        .map(|&alpha| {
            let hardy_term = translated_hardy_integral(grid, u, alpha, p)?;
            Ok(TranslationRow {
                alpha,
                hardy_term,
                quotient: (grad - params.mu * hardy_term) / denom,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_log_grid;

    #[test]
    fn zero_profile_triple() {
        let g = build_log_grid(1e-6, 1e6, 512, 3).unwrap();
        let params = ProblemParams::new(3, 2.0, 1.0, 0.1).unwrap();
        let t = concentration_triple(&params, &g, &RadialProfile::zeros(&g), 1.0).unwrap();
        assert_eq!((t.alpha, t.beta, t.gamma), (0.0, 0.0, 0.0));
        assert!(concentration_triple(&params, &g, &RadialProfile::zeros(&g), 1e7).is_err());
    }

    #[test]
    fn tail_max_uses_last_quarter() {
        let t = |a: f64| ConcentrationTriple {
            alpha: a,
            beta: a,
            gamma: a,
            delta: 1.0,
        };
        let seq: Vec<_> = [5.0, 1.0, 2.0, 3.0, 0.5, 0.7, 0.1, 0.2]
            .iter()
            .map(|a| t(*a))
            .collect();
        assert_eq!(tail_max(&seq).unwrap().alpha, 0.2);
        assert_eq!(tail_max(&seq[..1]).unwrap().alpha, 5.0);
        assert!(tail_max(&[]).is_none());
    }

    #[test]
    fn sweep_needs_nonpositive_mu() {
        let g = build_log_grid(1e-6, 1e6, 512, 3).unwrap();
        let params = ProblemParams::new(3, 2.0, 0.0, 0.1).unwrap();
        let u = RadialProfile::from_fn(&g, |r| (-r).exp());
        assert!(translation_sweep(&params, &g, &u, &[0.0]).is_err());
    }
}
