//! Seeded certification sweeps of the tame estimates: the worst observed
//! ratios must stay below the constants frozen in the problem definition.

use rand::rngs::StdRng;
use rand::SeedableRng;

use ridflow::problems::synthetic::SyntheticLossProblem;
use ridflow::problems::tame::{
    derivative_consistency, random_scale_vector, verify_left_inverse, verify_tame_direct,
    verify_tame_inverse, TameMap,
};
use ridflow::scale::{ScaleSpec, ScaleVector};

fn instance(k_max: i64) -> SyntheticLossProblem {
    let spec = ScaleSpec::new(6.0, k_max).unwrap();
    SyntheticLossProblem::new(&spec, 2.0, 0.01).unwrap()
}

#[test]
fn direct_estimate_stays_below_frozen_constant() {
    for k_max in [32, 64, 128] {
        let p = instance(k_max);
        let mut rng = StdRng::seed_from_u64(21);
        let worst = verify_tame_direct(&p, 1000, &mut rng).unwrap();
        assert!(
            worst <= p.params().a_direct,
            "k_max = {k_max}: direct ratio {worst:.4} exceeds {}",
            p.params().a_direct
        );
    }
}

#[test]
fn inverse_estimate_stays_below_frozen_constant() {
    for k_max in [32, 64, 128] {
        let p = instance(k_max);
        let mut rng = StdRng::seed_from_u64(22);
        let worst = verify_tame_inverse(&p, 1000, &mut rng).unwrap();
        assert!(
            worst <= p.params().b_inverse,
            "k_max = {k_max}: inverse ratio {worst:.4} exceeds {}",
            p.params().b_inverse
        );
    }
}

#[test]
fn direct_estimate_linear_diagonal_is_contractive() {
    // eps = 0: F is the diagonal smoothing multiplier with |multiplier| <= 1,
    // so the direct ratio cannot exceed one.
    let spec = ScaleSpec::new(6.0, 64).unwrap();
    let p = SyntheticLossProblem::new(&spec, 2.0, 0.0).unwrap();
    let mut rng = StdRng::seed_from_u64(23);
    let worst = verify_tame_direct(&p, 500, &mut rng).unwrap();
    assert!(worst <= 1.0 + 1e-12, "diagonal ratio {worst}");
}

#[test]
fn inverse_estimate_exact_for_linear_case() {
    // eps = 0: L is the pure smoothing multiplier, so the single-mode ratio
    // is exactly one and the sampled ratio never exceeds it.
    let spec = ScaleSpec::new(6.0, 64).unwrap();
    let p = SyntheticLossProblem::new(&spec, 2.0, 0.0).unwrap();

    let single = ScaleVector::from_modes(
        p.target(),
        &[(5, num_complex::Complex64::new(1.0, 0.0))],
    )
    .unwrap();
    let zero = ScaleVector::zeros(p.domain());
    let cutoff = p.domain().max_weight();
    let lk = p.apply_l(&zero, &single, cutoff).unwrap();
    for s in [1.0, 2.0, 3.0] {
        let ratio = lk.norm(s).unwrap() / single.norm(s + 2.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-12, "single-mode ratio {ratio}");
    }

    let mut rng = StdRng::seed_from_u64(24);
    let worst = verify_tame_inverse(&p, 500, &mut rng).unwrap();
    assert!(worst <= 1.0 + 1e-12, "linear inverse ratio {worst}");
}

#[test]
fn left_inverse_certificate_sampled() {
    let p = instance(64);
    let mut rng = StdRng::seed_from_u64(25);
    let worst = verify_left_inverse(&p, 200, &mut rng).unwrap();
    // The series is truncated at its smallest term, so the certificate holds
    // at the truncation level, far below the contraction constant.
    assert!(worst <= 1e-4, "left-inverse defect {worst:.3e}");
}

#[test]
fn derivative_matches_finite_differences() {
    let p = instance(64);
    let mut rng = StdRng::seed_from_u64(26);
    let worst = derivative_consistency(&p, 100, 1e-5, &mut rng).unwrap();
    assert!(worst <= 1e-6, "finite-difference mismatch {worst:.3e}");
}

#[test]
fn direct_ratio_at_zero_state_bounded_by_one() {
    // With u = 0 the nonlinear part vanishes and the ratio reduces to the
    // diagonal multiplier bound.
    let p = instance(64);
    let zero = ScaleVector::zeros(p.domain());
    let mut rng = StdRng::seed_from_u64(27);
    let h = random_scale_vector(p.domain(), 5.0, 1.0, 1.0, &mut rng);
    for s in [1.0, 2.0, 4.0] {
        let num = p.apply_df(&zero, &h).unwrap().norm(s).unwrap();
        let den = h.norm(s).unwrap() + zero.norm(s).unwrap() * h.norm(1.0).unwrap();
        assert!(num / den <= 1.0 + 1e-12);
    }
}
