//! The polynomial part at infinity of V'(z)/w(z) for a two-cut configuration,
//! and the moments that vanish on a solution.

use cutflow::polyops::{density_polynomial, infinity_moment, normalization_moment};
use cutflow::Potential;

fn main() -> cutflow::Result<()> {
    let pot = Potential::quartic_even();
    let t: f64 = 0.25;
    let b = [
        -(2.0 * (1.0 + t.sqrt())).sqrt(),
        -(2.0 * (1.0 - t.sqrt())).sqrt(),
    ];
    let endpoints = [b[0], b[1], -b[1], -b[0]];
    let h = density_polynomial(&pot, &endpoints)?;
    println!("h(z) coefficients {:?}", h.coeffs());
    for j in 0..2 {
        println!("moment {j}: {:.3e}", infinity_moment(j, &pot, &endpoints)?);
    }
    println!(
        "normalization moment {:.15} (equals -2T = {})",
        normalization_moment(&pot, &endpoints)?,
        -2.0 * t
    );
    Ok(())
}
