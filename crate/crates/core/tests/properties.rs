//! Randomized invariants over admissible parameter sets.

use chemopattern_core::amplitude::{
    amplitude_equilibria, eigenpair, quintic_landau, CriticalPoint, ExpansionSetup,
};
use chemopattern_core::competition::competition_coefficients;
use chemopattern_core::pde::{step, trapezoid, FieldState, Grid1D, DEFAULT_COURANT};
use chemopattern_core::stability::{
    chi_c, dispersion_h, growth_rate, k_c_sq, lambda_plus, neutral_chi, unstable_band,
};
use chemopattern_core::ModelParams;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.05f64..2.0, 0.05f64..2.0, 0.05f64..2.0, 0.1f64..0.9, 0.5f64..40.0, 0.5f64..40.0, 5.0f64..30.0)
        .prop_map(|(d1, d2, mu, u_c, alpha, beta, l)| ModelParams {
            d1,
            d2,
            chi: 0.0,
            mu,
            u_c,
            alpha,
            beta,
            domain_length: l,
        })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn threshold_is_the_minimum_of_the_neutral_curve(p in params(), f in 0.2f64..5.0) {
        let cc = chi_c(&p).unwrap();
        let kc2 = k_c_sq(&p).unwrap();
        prop_assert!(rel(neutral_chi(kc2, &p), cc) < 1e-12);
        prop_assert!(neutral_chi(f * kc2, &p) >= cc * (1.0 - 1e-12));
    }

    #[test]
    fn growth_rates_are_eigenvalues_of_the_mode_operator(p in params(), chi_f in 0.0f64..2.0, k_sq in 0.01f64..30.0) {
        let p = p.with_chi(chi_f * chi_c(&p).unwrap());
        let g = growth_rate(k_sq, &p);
        let m = p.mode_operator(k_sq, p.chi);
        let sum = g.minus.re + g.plus.re;
        prop_assert!((sum - m.trace()).abs() < 1e-9 * (1.0 + m.trace().abs()));
        if g.plus.is_real() {
            let prod = g.minus.re * g.plus.re;
            prop_assert!((prod - m.det()).abs() < 1e-8 * (1.0 + m.det().abs()));
        }
        // Negative trace: instability happens exactly when h < 0.
        prop_assert_eq!(lambda_plus(k_sq, &p) > 0.0, dispersion_h(k_sq, &p) < 0.0);
    }

    #[test]
    fn band_edges_are_neutral(p in params(), eps in 0.05f64..1.0) {
        let p = p.with_chi(chi_c(&p).unwrap() * (1.0 + eps * eps));
        let band = unstable_band(&p).unwrap();
        let scale = p.mu * p.beta;
        prop_assert!(dispersion_h(band.k1_sq, &p).abs() < 1e-8 * scale.max(1.0) * (1.0 + band.k2_sq * band.k2_sq));
        prop_assert!(dispersion_h(band.k2_sq, &p).abs() < 1e-8 * scale.max(1.0) * (1.0 + band.k2_sq * band.k2_sq));
        let mid = (band.k1_sq * band.k2_sq).sqrt();
        prop_assert!(lambda_plus(mid, &p) > 0.0);
    }

    #[test]
    fn linear_coefficient_is_positive(p in params()) {
        let cp = CriticalPoint::continuous(&p).unwrap();
        let setup = ExpansionSetup::from_eps(0.1, &cp);
        if let Ok(c) = quintic_landau(&p, &cp, &setup, &eigenpair(&p, cp.k)) {
            prop_assert!(c.sigma > 0.0);
            prop_assert!(c.sigma.is_finite() && c.l_cubic.is_finite());
        }
    }

    #[test]
    fn quintic_equilibria_solve_the_amplitude_equation(s in -5.0f64..5.0, l in -50.0f64..50.0, q in -100.0f64..100.0) {
        for e in amplitude_equilibria(s, l, q) {
            let r = e.amplitude * e.amplitude;
            let f = s - l * r + q * r * r;
            prop_assert!(f.abs() < 1e-9 * (s.abs() + l.abs() * r + q.abs() * r * r + 1e-12));
            let slope = -l + 2.0 * q * r;
            prop_assert_eq!(e.stable, slope < 0.0);
        }
    }

    #[test]
    fn mode_swap_permutes_competition_coefficients(eps in 0.3f64..0.8, d in 0.05f64..0.5) {
        let p = ModelParams {
            d1: 0.2, d2: 0.6, chi: 0.0, mu: 0.5, u_c: 0.2, alpha: 36.0, beta: 34.0,
            domain_length: 2.0 * std::f64::consts::PI,
        };
        let k = k_c_sq(&p).unwrap().sqrt();
        let (k1, k2) = (k + d, k - d);
        if let (Ok(a), Ok(b)) = (competition_coefficients(&p, k1, k2, eps), competition_coefficients(&p, k2, k1, eps)) {
            let pairs = [
                (a.sigma1, b.sigma2), (a.l1, b.l2), (a.omega1, b.omega2),
                (a.sigma2, b.sigma1), (a.l2, b.l1), (a.omega2, b.omega1),
            ];
            for (x, y) in pairs {
                prop_assert!(rel(x, y) < 1e-13, "{} vs {}", x, y);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn explicit_step_balances_mass(p in params(), chi_f in 0.0f64..1.5, seed in any::<u64>()) {
        let p = p.with_chi(chi_f * chi_c(&p).unwrap());
        let g = Grid1D::new(48, p.domain_length).unwrap();
        let mut s = FieldState::perturbed_uniform(&g, &p, 0.2, seed);
        for _ in 0..5 {
            let m = trapezoid(&s.u, g.dx);
            let r = step(&p, &g, &mut s, 1.0, DEFAULT_COURANT).unwrap();
            prop_assert!((r.mass_change - r.source_integral).abs() <= 1e-8 * m);
        }
    }

    #[test]
    fn uniform_state_is_stationary_on_any_grid(p in params(), chi_f in 0.0f64..3.0, n in 16usize..200) {
        let p = p.with_chi(chi_f * chi_c(&p).unwrap());
        let g = Grid1D::new(n, p.domain_length).unwrap();
        let mut s = FieldState::uniform(&g, &p);
        let s0 = s.clone();
        step(&p, &g, &mut s, 1.0, DEFAULT_COURANT).unwrap();
        for (a, b) in s.u.iter().zip(&s0.u).chain(s.v.iter().zip(&s0.v)) {
            prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }
}
