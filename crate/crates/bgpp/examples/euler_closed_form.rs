//! Closed-form angular motion in Jacobi elliptic functions, checked against
//! direct integration for the three orbit types of the Euler block.

use bgpp::{
    eval_solution, fit_solution, validate_params, verify_analytic_vs_numeric, CaseId,
    IntegratorConfig, ReducedState,
};

fn main() {
    let params = validate_params(0.0, 1.0, 2.0, 1e-12).unwrap();
    let cfg = IntegratorConfig::default();

    // One representative orbit per regime of q = n2/m2 relative to the
    // middle parameter: libration about each stable axis and the separatrix.
    let cases = [
        ("large-axis libration", [0.3, 0.4, 1.2]),
        ("small-axis libration", [1.2, 0.4, 0.3]),
        ("separatrix", [0.9, 0.4, 0.9]),
    ];

    for (name, m0) in cases {
        let sol = fit_solution(&params, m0).unwrap();
        let state0 = ReducedState {
            t: 3.0,
            p_t: 0.8,
            m: m0,
        };
        let cmp = verify_analytic_vs_numeric(&params, &state0, (0.0, 4.0), 201, &cfg).unwrap();
        let case = match cmp.case {
            Some(CaseId::I) => "I",
            Some(CaseId::II) => "II",
            Some(CaseId::III) => "III",
            None => "rotor/constant",
        };
        print!("{name:<22} case {case:<4}");
        if let Some(k2) = sol.modulus() {
            print!(" k2 = {k2:.4}");
        }
        if let Some(rate) = sol.rate() {
            print!(" rate = {rate:.4}");
        }
        println!("  max |numeric - closed| = {:.2e}", cmp.max_abs);
    }
    println!();

    // The closed form conserves the quadratic levels exactly in tau.
    let sol = fit_solution(&params, [0.3, 0.4, 1.2]).unwrap();
    let [t1, t2, t3] = params.t_raw();
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>12} {:>12}",
        "tau", "M1", "M2", "M3", "m2 drift", "n2 drift"
    );
    let m0 = eval_solution(&sol, 0.0).unwrap();
    let m2_0 = m0[0] * m0[0] + m0[1] * m0[1] + m0[2] * m0[2];
    let n2_0 = t1 * m0[0] * m0[0] + t2 * m0[1] * m0[1] + t3 * m0[2] * m0[2];
    for k in 0..7 {
        let tau = 0.8 * k as f64;
        let m = eval_solution(&sol, tau).unwrap();
        let m2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
        let n2 = t1 * m[0] * m[0] + t2 * m[1] * m[1] + t3 * m[2] * m[2];
        println!(
            "{:>6.2} {:>10.5} {:>10.5} {:>10.5} {:>12.2e} {:>12.2e}",
            tau,
            m[0],
            m[1],
            m[2],
            m2 - m2_0,
            n2 - n2_0
        );
    }
}
