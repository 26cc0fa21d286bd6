use hslab_core::concentration::{
    bubble_sequence, check_concentration_inequalities, concentration_triple, tail_max,
    translation_sweep, ConcentrationTriple,
};
use hslab_core::params::ProblemParams;
use hslab_core::profile::{bubble, scale, RadialProfile};
use hslab_core::quadrature::{build_log_grid, weighted_power_integral, GridSpec, RadialGrid};
use hslab_core::solvers::{radial_best_constants, SolverOptions};
use hslab_core::testgen::TestProfileGenerator;
use proptest::prelude::*;

fn grid() -> RadialGrid {
    GridSpec::default_for(3).build().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn triple_is_scale_covariant(seed in any::<u64>(), lr in -1.5..1.5f64, delta in 0.5..4.0f64) {
        // dilated narrow shells put gamma off by ~6e-6 on the default grid
        let g = build_log_grid(1e-6, 1e6, 16384, 3).unwrap();
        let params = ProblemParams::new(3, 2.0, 1.0, 0.1).unwrap();
        let u = TestProfileGenerator::new(seed).smooth_bump(&g);
        let r = lr.exp();
        let a = concentration_triple(&params, &g, &scale(&g, &u, 2.0, r).unwrap(), delta).unwrap();
        let b = concentration_triple(&params, &g, &u, r * delta).unwrap();
        prop_assert!(rel(a.alpha, b.alpha) <= 1e-6, "{} {}", a.alpha, b.alpha);
        prop_assert!(rel(a.beta, b.beta) <= 1e-6, "{} {}", a.beta, b.beta);
        prop_assert!(rel(a.gamma, b.gamma) <= 1e-6, "{} {}", a.gamma, b.gamma);
    }

    #[test]
    fn tail_max_bounds_the_last_quarter(xs in prop::collection::vec(0.0..10.0f64, 1..40)) {
        let seq: Vec<ConcentrationTriple> = xs.iter().map(|x| ConcentrationTriple { alpha: *x, beta: 2.0 * x, gamma: -x, delta: 1.0 }).collect();
        let t = tail_max(&seq).unwrap();
        let start = xs.len() - xs.len().div_ceil(4);
        let top = xs[start..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let low = xs[start..].iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(t.alpha, top);
        prop_assert_eq!(t.beta, 2.0 * top);
        prop_assert_eq!(t.gamma, -low);
    }
}

#[test]
fn ball_profiles_respect_best_constants() {
    let g = grid();
    let params = ProblemParams::new(3, 2.0, 1.0, 0.1).unwrap();
    let (k0, ks) = radial_best_constants(&params, &g, &SolverOptions::default()).unwrap();
    let mut gen = TestProfileGenerator::new(9);
    for k in 0..10 {
        let u = if k % 2 == 0 {
            gen.smooth_bump(&g)
        } else {
            gen.bump_with_dip(&g)
        };
        let r = check_concentration_inequalities(&params, &g, &u, gen.uniform(0.5, 8.0), k0, ks)
            .unwrap();
        assert!(
            r.sobolev <= 1.0 + 1e-3 && r.hardy_sobolev <= 1.0 + 1e-3,
            "{r:?}"
        );
        assert!(r.sobolev < 1.0 && r.hardy_sobolev < 1.0);
    }
    let zero =
        check_concentration_inequalities(&params, &g, &RadialProfile::zeros(&g), 1.0, k0, ks)
            .unwrap();
    assert_eq!((zero.sobolev, zero.hardy_sobolev), (0.0, 0.0));
}

#[test]
fn bubbling_concentrates_mass_in_the_unit_ball() {
    let g = grid();
    let params = ProblemParams::new(3, 2.0, 0.0, 0.0).unwrap();
    let b = bubble(&g, &params);
    assert_eq!(bubble_sequence(&g, &params, &b, &[1.0]).unwrap()[0], b);
    assert!(bubble_sequence(&g, &params, &b, &[2.0, 1.0]).is_err());
    assert!(bubble_sequence(&g, &params, &b, &[0.0]).is_err());
    let total = weighted_power_integral(&g, &b, params.p_star, 0.0).unwrap();
    let seq = bubble_sequence(&g, &params, &b, &[1.0, 4.0, 16.0, 64.0]).unwrap();
    let alphas: Vec<f64> = seq
        .iter()
        .map(|u| concentration_triple(&params, &g, u, 1.0).unwrap().alpha)
        .collect();
    assert!(alphas.windows(2).all(|w| w[1] > w[0]));
    assert!(rel(*alphas.last().unwrap(), total) < 1e-3);
}

#[test]
fn translation_sweep_starts_at_the_radial_quotient() {
    let g = grid();
    let params = ProblemParams::new(3, 2.0, 0.0, -1.0).unwrap();
    let b = bubble(&g, &params);
    let rows = translation_sweep(&params, &g, &b, &[0.0, 5.0, 10.0, 25.0, 50.0]).unwrap();
    // the quotient closes the window with the Hardy exponents while the bubble
    // decays like 1/r, so the two quadratures part at the 1e-7 level
    let radial = hslab_core::energy::rayleigh_quotient(&params, &g, &b).unwrap();
    assert!(rel(rows[0].quotient, radial) <= 1e-6);
    assert!(rows.windows(2).all(|w| w[1].quotient <= w[0].quotient));
}
