//! Leading asymptotics on the two-cut side of a merge and of a birth, and the
//! endpoint states launched from them.

use cutflow::flow::{seed_closed_form, trace, LaunchCoefficients, SeedModel, TraceOptions};
use cutflow::thermo::side_state;

fn main() -> cutflow::Result<()> {
    let (pot, seed) = seed_closed_form(SeedModel::BleherEynardCritical { c: 0.5 })?;
    let tr = trace(&pot, &seed, &TraceOptions::new(1.0, 3.0))?;
    for ev in &tr.events {
        println!(
            "{:?} at T = {:.10}, two cuts {:?}",
            ev.kind, ev.critical_temperature, ev.two_cut_side
        );
        match ev.launch {
            LaunchCoefficients::Merge { amplitude, .. } => {
                for t in [1e-8, 1e-6, 1e-4] {
                    let c = side_state(&pot, ev, ev.two_cut_side, t)?;
                    let gap = c.beta()[2] - c.beta()[1];
                    println!("  t = {t:.0e}: gap {gap:.6e}, gap / sqrt t {:.6} (twice the amplitude {:.6})", gap / t.sqrt(),
                        2.0 * amplitude);
                }
            }
            LaunchCoefficients::Birth { gamma } => {
                for t in [1e-8, 1e-6, 1e-4] {
                    let c = side_state(&pot, ev, ev.two_cut_side, t)?;
                    let d = c.beta()[3] - c.beta()[2];
                    println!("  t = {t:.0e}: new cut width {d:.6e}, d^2 |log d| / t = {:.4} (gamma {gamma:.6})", d * d * d.ln().abs() / t);
                }
            }
        }
    }
    Ok(())
}
