use std::f64::consts::{PI, TAU};

use phasegate::gate::{
    conditional_joint_state, feed_forward_correct, gate_unitary, ideal_output, measure_program, prepare_program,
    ProgramOutcome, ProgramPhase, PureQubit,
};
use phasegate::linalg::{c, C64};
use proptest::prelude::*;

fn qubit() -> impl Strategy<Value = PureQubit> {
    // uniform on the Bloch sphere
    (-1.0f64..1.0, 0.0..TAU).prop_map(|(z, az): (f64, f64)| {
        let theta = z.acos();
        PureQubit::new(c((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), az)).unwrap()
    })
}

fn phase() -> impl Strategy<Value = ProgramPhase> {
    (-10.0f64..10.0).prop_map(ProgramPhase::new)
}

/// `|⟨a|b⟩|` from raw amplitudes.
fn overlap_abs(a: &PureQubit, b: &PureQubit) -> f64 {
    (a.alpha().conj() * b.alpha() + a.beta().conj() * b.beta()).norm()
}

#[test]
fn program_qubit_amplitudes() {
    let p = prepare_program(ProgramPhase::new(PI / 3.0));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((p.alpha() - c(s, 0.0)).norm() < 1e-15);
    assert!((p.beta() - C64::from_polar(s, PI / 3.0)).norm() < 1e-15);
}

#[test]
fn canonical_phase_range() {
    for raw in [-TAU, -PI, -0.0, 0.0, TAU, 3.0 * TAU + 1.0] {
        let r = ProgramPhase::new(raw).radians();
        assert!((0.0..TAU).contains(&r), "{raw} -> {r}");
    }
    assert_eq!(ProgramPhase::new(-0.0).radians().to_bits(), 0.0f64.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn both_branches_reproduce_the_gate(psi in qubit(), phi in phase()) {
        let (joint, p_post) = conditional_joint_state(&psi, phi);
        prop_assert_eq!(p_post, 0.5);
        let target = ideal_output(&psi, phi);
        for o in ProgramOutcome::ALL {
            let (data, prob) = measure_program(&joint, o).unwrap();
            prop_assert!((prob - 0.5).abs() < 1e-12);
            let corrected = feed_forward_correct(&data, o);
            prop_assert!((overlap_abs(&corrected, &target) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitaries_compose(a in phase(), b in phase()) {
        let product = &gate_unitary(a) * &gate_unitary(b);
        let sum = gate_unitary(ProgramPhase::new(a.radians() + b.radians()));
        prop_assert!(product.max_abs_diff(&sum) < 1e-12);
    }

    #[test]
    fn populations_are_unchanged(psi in qubit(), phi in phase()) {
        let out = ideal_output(&psi, phi);
        prop_assert!((out.alpha().norm() - psi.alpha().norm()).abs() < 1e-12);
        prop_assert!((out.beta().norm() - psi.beta().norm()).abs() < 1e-12);
    }

    #[test]
    fn canonical_phase_is_periodic(raw in -50.0f64..50.0, k in -5i32..5) {
        let a = ProgramPhase::new(raw).phasor();
        let b = ProgramPhase::new(raw + k as f64 * TAU).phasor();
        prop_assert!((a - b).norm() < 1e-12);
    }
}
