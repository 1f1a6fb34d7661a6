//! Equilibrium density of the Bleher-Eynard model in its three regimes.

use cutflow::equilibrium::{density_profile, solve_endpoints};
use cutflow::flow::{seed_closed_form, trace, SeedModel, TraceOptions};

fn main() -> cutflow::Result<()> {
    let (pot, seed) = seed_closed_form(SeedModel::BleherEynardCritical { c: 0.5 })?;
    let tr = trace(&pot, &seed, &TraceOptions::new(1.0, 3.0))?;
    for t in [1.5, 1.9, 3.0] {
        let guess = tr.state_at(&pot, t)?.config;
        let config = solve_endpoints(&pot, t, &guess, 1e-13)?;
        let prof = density_profile(&pot, t, &config, 9)?;
        println!("T = {t}: norm {:.12}", prof.norm);
        for (j, cut) in prof.cuts.iter().enumerate() {
            let line: Vec<String> = cut
                .iter()
                .map(|(x, r)| format!("({x:.3}, {r:.4})"))
                .collect();
            println!("  cut {}: {}", j + 1, line.join(" "));
        }
    }
    Ok(())
}
