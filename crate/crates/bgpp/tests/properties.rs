//! Randomised structural properties over bounded state and level domains.

use bgpp::{
    bracket, eh_roots, from_mixed, invariant_gradient, poisson_tensor_reduced, to_mixed,
    validate_params, EhLevels, Invariant, MixedState, ReducedState, INVARIANTS,
};
use proptest::prelude::*;

fn params_range() -> impl Strategy<Value = (f64, f64, f64)> {
    // Sorted, well separated non-negative triples keep clear of the
    // degeneracy tolerance.
    (0.0..2.0_f64)
        .prop_flat_map(|t1| {
            (
                Just(t1),
                (0.2..3.0_f64).prop_map(move |d| t1 + d),
                (0.2..3.0_f64),
            )
        })
        .prop_map(|(t1, t2, d)| (t1, t2, t2 + d))
}

fn mixed_state(t_max: f64) -> impl Strategy<Value = MixedState> {
    (
        (0.1..8.0_f64),
        (-3.0..3.0_f64),
        prop::array::uniform3(-3.0..3.0_f64),
        (0.3..2.8_f64),
        (0.3..2.8_f64),
        (0.3..2.8_f64),
    )
        .prop_map(move |(dt, p_t, m, phi, theta, psi)| MixedState {
            t: t_max + dt,
            p_t,
            m,
            phi,
            theta,
            psi,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The four first integrals commute at any admissible state.
    #[test]
    fn invariants_commute((t1, t2, t3) in params_range(), seed_state in mixed_state(0.0)) {
        let params = validate_params(t1, t2, t3, 1e-12).unwrap();
        let state = MixedState { t: params.t_max() + seed_state.t, ..seed_state };
        for (i, a) in INVARIANTS.iter().enumerate() {
            for b in &INVARIANTS[i + 1..] {
                let pb = bracket(&params, &state, *a, *b).unwrap();
                prop_assert!(pb.abs() <= 1e-9, "{{{a:?},{b:?}}} = {pb:e}");
            }
        }
    }

    /// Chart transport is involutive where both charts are defined.
    #[test]
    fn mixed_chart_round_trips((t1, t2, t3) in params_range(), seed_state in mixed_state(0.0)) {
        let params = validate_params(t1, t2, t3, 1e-12).unwrap();
        let state = MixedState { t: params.t_max() + seed_state.t, ..seed_state };
        let back = to_mixed(&from_mixed(&state).unwrap()).unwrap();
        let a = state.to_vector();
        let b = back.to_vector();
        for i in 0..8 {
            let scale = a[i].abs().max(1.0);
            prop_assert!((a[i] - b[i]).abs() <= 1e-12 * scale, "component {i}: {} vs {}", a[i], b[i]);
        }
    }

    /// The reduced Poisson tensor annihilates the Casimir gradient exactly:
    /// the contraction cancels term by term, not merely to rounding.
    #[test]
    fn casimir_is_annihilated_exactly(
        (t1, t2, t3) in params_range(),
        dt in 0.1..8.0_f64,
        p_t in -3.0..3.0_f64,
        m in prop::array::uniform3(-3.0..3.0_f64),
    ) {
        let params = validate_params(t1, t2, t3, 1e-12).unwrap();
        let state = ReducedState { t: params.t_max() + dt, p_t, m };
        let tensor = poisson_tensor_reduced(&state).unwrap();
        let grad = nalgebra::SVector::<f64, 5>::from([0.0, 0.0, 2.0 * m[0], 2.0 * m[1], 2.0 * m[2]]);
        let product = tensor * grad;
        for i in 0..5 {
            prop_assert_eq!(product[i], 0.0);
        }
    }

    /// Energy gradients never vanish on the sampled domain, so the rank
    /// check in the bracket suite is not degenerate by construction.
    #[test]
    fn energy_gradient_is_nonzero((t1, t2, t3) in params_range(), seed_state in mixed_state(0.0)) {
        let params = validate_params(t1, t2, t3, 1e-12).unwrap();
        let state = MixedState { t: params.t_max() + seed_state.t, ..seed_state };
        let g = invariant_gradient(&params, &state, Invariant::Energy).unwrap();
        prop_assert!(g.norm() > 0.0);
    }

    /// Turning points of the Eguchi-Hanson cubic interlace the bolt for
    /// every admissible level set with e > 0 and m3 != 0.
    #[test]
    fn eh_roots_interlace(
        gamma2 in 0.3..3.0_f64,
        e in 0.1..5.0_f64,
        m3_mag in 0.1..2.0_f64,
        m3_neg in any::<bool>(),
        mu2 in 0.05..8.0_f64,
    ) {
        let gamma = gamma2.sqrt();
        let m3 = if m3_neg { -m3_mag } else { m3_mag };
        let [r1, r2, r3] = eh_roots(gamma2, &EhLevels { e, m3, mu2 }).unwrap();
        prop_assert!(-gamma < r1 && r1 < 0.0, "r1 = {r1}");
        prop_assert!(0.0 < r2 && r2 < gamma, "r2 = {r2}");
        prop_assert!(gamma < r3, "r3 = {r3}");
    }
}
