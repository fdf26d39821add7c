//! Pairwise Poisson brackets of the four conserved quantities at a random
//! phase-space point, plus the independence check over a seeded batch.

use bgpp::{
    bracket, integrals, sample_full_state, validate_params, verify_bracket_suite, Invariant,
    DEFAULT_SEED, INVARIANTS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn label(inv: Invariant) -> &'static str {
    match inv {
        Invariant::Energy => "H",
        Invariant::AxialMomentum => "P_phi",
        Invariant::TotalAngular => "m2",
        Invariant::WeightedAngular => "n2",
    }
}

fn main() {
    let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let state = sample_full_state(&params, &mut rng);

    let iv = integrals(&params, &state).unwrap();
    println!(
        "state: t = {:.4}, p_t = {:.4}, m = [{:.4}, {:.4}, {:.4}]",
        state.t, state.p_t, state.m[0], state.m[1], state.m[2]
    );
    println!(
        "values: H = {:.6}, P_phi = {:.6}, m2 = {:.6}, n2 = {:.6}",
        iv.h, iv.p_phi, iv.m2, iv.n2
    );
    println!();

    println!(
        "{:>8}{:>12}{:>12}{:>12}{:>12}",
        "{.,.}", "H", "P_phi", "m2", "n2"
    );
    for f in INVARIANTS {
        print!("{:>8}", label(f));
        for g in INVARIANTS {
            let v = bracket(&params, &state, f, g).unwrap();
            print!("{v:>12.1e}");
        }
        println!();
    }
    println!();

    let report = verify_bracket_suite(&params, 100, DEFAULT_SEED).unwrap();
    println!("over {} seeded states:", report.n_states);
    println!("  max |{{F,G}}| full    = {:.3e}", report.full_max_bracket);
    println!(
        "  max |{{F,G}}| reduced = {:.3e}",
        report.reduced_max_bracket
    );
    println!("  Jacobi residual      = {:.3e}", report.full_jacobi_max);
    println!(
        "  min rank ratio full / reduced = {:.3e} / {:.3e}",
        report.full_min_rank_ratio, report.reduced_min_rank_ratio
    );
    println!(
        "  reduced Casimir bracket (exact) = {:.1e}",
        report.reduced_casimir_max
    );
}
