//! Distinguishes the admissible equilibrium from other solutions of the
//! endpoint equations for the quartic double well below the merge.

use cutflow::equilibrium::{admissibility, solve_endpoints};
use cutflow::models::{quartic_one_cut, quartic_two_cut};
use cutflow::Potential;

fn main() -> cutflow::Result<()> {
    let pot = Potential::quartic_even();
    let t = 0.5;
    for (name, guess) in [
        ("one cut", quartic_one_cut(t)?),
        ("two cuts", quartic_two_cut(t)?),
    ] {
        let config = solve_endpoints(&pot, t, &guess, 1e-13)?;
        let r = admissibility(&pot, t, &config);
        println!("{name}: {:.6?} -> {:?}", config.beta(), r.verdict);
        println!(
            "  residual {:.1e}, density positive {}",
            r.residual, r.density_positive
        );
        for m in &r.exterior_inequalities {
            println!(
                "  {:?}: margin {:.4} at x = {:.4}",
                m.region, m.margin, m.argmin
            );
        }
    }
    Ok(())
}
