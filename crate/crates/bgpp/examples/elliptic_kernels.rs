//! The special-function kernels: Jacobi elliptic functions with their
//! algebraic identities, and Legendre integrals checked against direct
//! quadrature of the defining integrands.

use bgpp::{adaptive_quad, elliptic_f, elliptic_k, elliptic_pi, jacobi_sn_cn_dn};

fn main() {
    let k2 = 0.7;
    println!("jacobi functions at k2 = {k2}");
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>14} {:>14}",
        "u", "sn", "cn", "dn", "sn2+cn2-1", "dn2+k2sn2-1"
    );
    for k in 0..7 {
        let u = -3.0 + k as f64;
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, k2).unwrap();
        println!(
            "{:>6.1} {:>12.8} {:>12.8} {:>12.8} {:>14.1e} {:>14.1e}",
            u,
            sn,
            cn,
            dn,
            sn * sn + cn * cn - 1.0,
            dn * dn + k2 * sn * sn - 1.0
        );
    }
    println!();

    // sn inverts F: u = F(asin(sn u), k2) on the principal branch.
    let u = 0.9;
    let (sn, _, _) = jacobi_sn_cn_dn(u, k2).unwrap();
    let back = elliptic_f(sn.asin(), k2).unwrap();
    println!("inversion: F(am(u)) - u = {:.2e} at u = {u}", back - u);
    println!("complete K({k2}) = {:.12}", elliptic_k(k2).unwrap());
    println!();

    println!("Legendre integrals against adaptive quadrature");
    println!(
        "{:>6} {:>6} {:>6} {:>18} {:>12}",
        "phi", "k2", "n", "value", "defect"
    );
    for (phi, k2, n) in [(0.7_f64, 0.3, 0.3), (1.1, 0.5, -0.5), (1.5, 0.9, 0.8)] {
        let f = elliptic_f(phi, k2).unwrap();
        let q = adaptive_quad(
            |x| 1.0 / (1.0 - k2 * x.sin().powi(2)).sqrt(),
            0.0,
            phi,
            1e-12,
            1e-12,
        )
        .unwrap();
        println!(
            "{:>6.2} {:>6.2} {:>6} {:>18.12} {:>12.1e}",
            phi,
            k2,
            "-",
            f,
            f - q.value
        );

        let pi = elliptic_pi(phi, n, k2).unwrap();
        let q = adaptive_quad(
            |x| {
                let s2 = x.sin().powi(2);
                1.0 / ((1.0 - n * s2) * (1.0 - k2 * s2).sqrt())
            },
            0.0,
            phi,
            1e-12,
            1e-12,
        )
        .unwrap();
        println!(
            "{:>6.2} {:>6.2} {:>6.2} {:>18.12} {:>12.1e}",
            phi,
            k2,
            n,
            pi,
            pi - q.value
        );
    }
}
