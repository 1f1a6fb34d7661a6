//! A sextic double well without a closed-form seed: start at high temperature
//! where one cut is guaranteed, then trace down through the merge.

use cutflow::flow::{trace, FlowState, TraceOptions};
use cutflow::models::high_temperature_start;
use cutflow::Potential;

fn main() -> cutflow::Result<()> {
    // V = -z^2 + z^3 / 10 + z^6 / 10
    let pot = Potential::new(vec![0.0, -1.0, 0.1, 0.0, 0.0, 0.1])?;
    let (t0, config) = high_temperature_start(&pot, 20.0, 1e-12)?;
    let seed = FlowState::new(&pot, t0, config)?;
    let tr = trace(&pot, &seed, &TraceOptions::new(0.05, 20.0))?;
    for ev in &tr.events {
        println!(
            "{:?} at T = {:.9}, point {:.9}",
            ev.kind, ev.critical_temperature, ev.point
        );
    }
    for b in &tr.branches {
        println!(
            "phase s = {} on [{:.6}, {:.6}], {} samples",
            b.phase,
            b.end_temperature(),
            b.start_temperature(),
            b.samples.len()
        );
    }
    Ok(())
}
