use std::f64::consts::PI;

use gdnls::analysis::{sample_rng, sobolev_norm, RandomField};
use gdnls::model::{self, ModelParams};
use gdnls::quadrature::integrate;
use gdnls::solitons::{soliton_field, Branch, SolitonSpec};
use gdnls::spectral::{fractional_derivative, hilbert_transform, DerivativeKind};
use gdnls::{Complex64, FieldState, Grid, LpBand, LpLadder};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn without_nyquist(u: &FieldState) -> FieldState {
    let g = u.grid();
    u.apply_multiplier(|_, m| if g.is_nyquist(m) { c(0.0, 0.0) } else { c(1.0, 0.0) })
        .unwrap()
}

fn random(grid: &Grid, seed: u64, kind: RandomField) -> FieldState {
    kind.sample(grid, &mut sample_rng(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(seed in any::<u64>(), log_n in 4u32..11, length in 0.5f64..200.0) {
        let g = Grid::new(1 << log_n, length).unwrap();
        let u = random(&g, seed, RandomField::White);
        let back = g.inverse(&g.forward(u.values()));
        let err = back.iter().zip(u.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * u.linf_norm());
    }

    #[test]
    fn blocks_reconstruct_the_field(seed in any::<u64>(), log_n in 5u32..12) {
        let g = Grid::new(1 << log_n, 2.0 * PI).unwrap();
        let ladder = LpLadder::new(&g);
        // keep the field within |ξ| ≤ 2^{j_max} where the partition is complete
        let top = 2f64.powi(ladder.j_max() as i32);
        let u = random(&g, seed, RandomField::White)
            .apply_multiplier(|xi, _| c(f64::from(xi.abs() <= top), 0.0))
            .unwrap();
        let mut sum = FieldState::zeros(&g, 0.0);
        for piece in ladder.decompose(&u).unwrap() {
            sum = sum.add(&piece).unwrap();
        }
        let err = sum.sub(&u).unwrap().linf_norm();
        prop_assert!(err <= 1e-12 * u.linf_norm());
    }

    #[test]
    fn far_blocks_annihilate(seed in any::<u64>(), j in 0u32..7, gap in 2u32..5) {
        let g = Grid::new(1024, 2.0 * PI).unwrap();
        let ladder = LpLadder::new(&g);
        let k = j + gap;
        prop_assume!(k <= ladder.j_max());
        let u = random(&g, seed, RandomField::White);
        let pk = ladder.project(&u, LpBand::Block(k)).unwrap();
        let pjpk = ladder.project(&pk, LpBand::Block(j)).unwrap();
        prop_assert!(pjpk.linf_norm() <= 1e-14 * u.linf_norm());
    }

    #[test]
    fn hilbert_is_an_involution_up_to_sign(seed in any::<u64>()) {
        let g = Grid::new(256, 17.0).unwrap();
        let u = without_nyquist(&random(&g, seed, RandomField::White));
        let mean = u.spectrum()[0] / g.n() as f64;
        let hh = hilbert_transform(&hilbert_transform(&u).unwrap()).unwrap();
        let expect = u.map(|_, z| -z + mean).unwrap();
        prop_assert!(hh.sub(&expect).unwrap().linf_norm() <= 1e-12 * u.linf_norm());
    }

    #[test]
    fn fractional_derivatives_compose(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let g = Grid::new(256, 2.0 * PI).unwrap();
        let u = random(&g, seed, RandomField::Smooth { scale: 20.0 })
            .apply_multiplier(|_, m| c(f64::from(m != 0), 0.0))
            .unwrap();
        let kind = DerivativeKind::Homogeneous;
        let two = fractional_derivative(&fractional_derivative(&u, t, kind).unwrap(), s, kind).unwrap();
        let one = fractional_derivative(&u, s + t, kind).unwrap();
        prop_assert!(two.sub(&one).unwrap().l2_norm() <= 1e-10 * one.l2_norm().max(1e-300));
    }

    #[test]
    fn functionals_are_phase_invariant(seed in any::<u64>(), theta in -PI..PI) {
        let g = Grid::new(128, 20.0).unwrap();
        let u = random(&g, seed, RandomField::Smooth { scale: 3.0 });
        let v = u.scale(Complex64::from_polar(1.0, theta)).unwrap();
        let p = ModelParams::dnlsb(0.75, 0.3);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
        prop_assert!(close(model::mass(&u), model::mass(&v)));
        prop_assert!(close(model::momentum(&u), model::momentum(&v)));
        prop_assert!(close(model::energy(&u, &p), model::energy(&v, &p)));
    }
}

#[test]
fn single_mode_bernstein_ratio_is_exact() {
    let g = Grid::new(512, 2.0 * PI).unwrap();
    let ladder = LpLadder::new(&g);
    for (k, j) in [(20.0f64, 5u32), (40.0, 6), (3.0, 2)] {
        let u = FieldState::from_fn(&g, 0.0, |x| Complex64::from_polar(1.0, k * x)).unwrap();
        let pj = ladder.project(&u, LpBand::Block(j)).unwrap();
        for s in [-1.0, 0.5, 1.0, 2.0] {
            let d = fractional_derivative(&pj, s, DerivativeKind::Homogeneous).unwrap();
            let ratio = d.l2_norm() / (2f64.powf(j as f64 * s) * pj.l2_norm());
            assert!((ratio - (k / 2f64.powi(j as i32)).powf(s)).abs() < 1e-12);
        }
    }
}

#[test]
fn sobolev_norm_examples() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let u = FieldState::from_fn(&g, 0.0, |x| Complex64::from_polar(1.0, 5.0 * x)).unwrap();
    for s in [0.0, 0.5, 1.0, 2.5] {
        let expect = (2.0 * PI).sqrt() * 5f64.powf(s);
        assert!((sobolev_norm(&u, s, DerivativeKind::Homogeneous) - expect).abs() < 1e-12 * expect);
    }
    assert_eq!(sobolev_norm(&FieldState::zeros(&g, 0.0), 1.0, DerivativeKind::Inhomogeneous), 0.0);
    let w = random(&g, 3, RandomField::White);
    let h0 = sobolev_norm(&w, 0.0, DerivativeKind::Inhomogeneous);
    assert!((h0 - (2.0 * model::mass(&w)).sqrt()).abs() < 1e-12 * h0);
}

/// Moving Gaussian `A e^{−x²/2} e^{ikx}`: mass, momentum and energy against
/// adaptive quadrature of the analytic integrands.
#[test]
fn functionals_match_quadrature() {
    let (a, k, sigma) = (1.3f64, 0.7f64, 0.8f64);
    let g = Grid::new(512, 40.0).unwrap();
    let u = FieldState::from_fn(&g, 0.0, |x| Complex64::from_polar(a * (-x * x / 2.0).exp(), k * x)).unwrap();
    let q = |f: &dyn Fn(f64) -> f64| integrate(f, -20.0, 20.0, 1e-13).unwrap();

    let dens = |x: f64| a * a * (-x * x).exp();
    let mass = 0.5 * q(&dens);
    assert!((mass - 0.5 * a * a * PI.sqrt()).abs() < 1e-12);
    assert!((model::mass(&u) - mass).abs() < 1e-12);

    // i ū u_x = i(−x + ik)|u|²
    let momentum = 0.5 * q(&|x| -k * dens(x));
    assert!((model::momentum(&u) - momentum).abs() < 1e-11);

    // |u_x|² = (x² + k²)|u|², Re(i|u|^{2σ}ū u_x) = −k|u|^{2σ+2}
    let kinetic = q(&|x| (x * x + k * k) * dens(x));
    let transport = q(&|x| -k * dens(x).powf(sigma + 1.0));
    let power = q(&|x| dens(x).powf(2.0 * sigma + 1.0));
    for (p, b) in [(ModelParams::gdnls(sigma), 0.0), (ModelParams::dnlsb(sigma, 0.4), 0.4)] {
        let s = p.convention.sign();
        let e = 0.5 * kinetic - s / (2.0 * sigma + 2.0) * transport - b / (4.0 * sigma + 2.0) * power;
        assert!((model::energy(&u, &p) - e).abs() < 1e-10 * e.abs().max(1.0), "{p:?}");
    }
}

#[test]
fn soliton_modulus_and_mass_are_traveling() {
    let spec = SolitonSpec::new(1.0, 0.0, 1.0, 1.0).unwrap();
    let g = Grid::new(1024, 80.0).unwrap();
    let u0 = soliton_field(&spec, 0.0, &g).unwrap();
    for (x, z) in g.points().zip(u0.values()) {
        assert!((z.norm() - spec.amplitude_profile(x)).abs() < 1e-13);
    }
    let m0 = model::mass(&u0);
    for t in [0.3, 1.0, 2.5] {
        let ut = soliton_field(&spec, t, &g).unwrap();
        assert!((model::mass(&ut) - m0).abs() < 1e-10);
    }
}

#[test]
fn stationary_phase_decreases() {
    let spec = SolitonSpec::new(0.8, 0.1, 1.5, 0.0).unwrap();
    let xs: Vec<f64> = (0..200).map(|i| -10.0 + 0.1 * i as f64).collect();
    let theta = spec.phase_at(&xs).unwrap();
    assert!(theta.windows(2).all(|w| w[1] < w[0]));
    assert!(spec.phase_profile(-1e3).unwrap().abs() < 1e-12);
}

#[test]
fn negative_gamma_branch_solves_the_equation() {
    // σ=1, b=−1/2: γ = −5/3, admissible speeds −2 < c < −2√(5/8)
    let spec = SolitonSpec::new(1.0, -0.5, 1.0, -1.8).unwrap();
    assert_eq!(spec.branch(), Branch::NegativeGamma);
    let g = Grid::new(4096, 120.0).unwrap();
    let r = gdnls::solitons::dnlsb_residual(&spec, &g).unwrap();
    assert!(r < 1e-6, "residual {r:e}");
    assert!(SolitonSpec::new(1.0, -0.5, 1.0, -1.0).is_err());
}
