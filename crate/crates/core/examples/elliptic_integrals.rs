//! Complete elliptic integrals in the parameter convention, and the ratio
//! Pi/K evaluated from complements close to the degenerate corner.

use cutflow::elliptic::{
    ellip_e, ellip_k, ellip_k_complement, ellip_pi, ellip_pi_complement, pi_over_k,
    pi_over_k_complement,
};

fn main() -> cutflow::Result<()> {
    for s in [0.0, 0.5, 0.9, 0.999] {
        println!(
            "s = {s:<6} K = {:.15}  E = {:.15}",
            ellip_k(s)?,
            ellip_e(s)?
        );
    }
    println!("Pi(0.3, 0.6) = {:.15}", ellip_pi(0.3, 0.6)?);
    println!("Pi/K(0.3, 0.6) = {:.15}", pi_over_k(0.3, 0.6)?);
    for m1 in [1e-4, 1e-8, 1e-12] {
        let n1 = 2.0 * m1;
        println!(
            "n1 = {n1:.0e}, m1 = {m1:.0e}: Pi/K = {:.12}  (ratio of separate values {:.12})",
            pi_over_k_complement(n1, m1),
            ellip_pi_complement(n1, m1) / ellip_k_complement(m1)
        );
    }
    Ok(())
}
