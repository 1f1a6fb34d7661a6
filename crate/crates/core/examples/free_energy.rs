//! Free energy and its temperature derivatives for the quartic double well,
//! and the jump of the third derivative at the merge.

use cutflow::flow::{seed_closed_form, trace, SeedModel, TraceOptions};
use cutflow::thermo::{continuity, thermo_curve, third_derivative_jump};

fn main() -> cutflow::Result<()> {
    let (pot, seed) = seed_closed_form(SeedModel::QuarticOneCut { temperature: 2.0 })?;
    let tr = trace(&pot, &seed, &TraceOptions::new(0.2, 2.0))?;
    let temps = [0.3, 0.6, 0.9, 0.99, 1.01, 1.2, 1.8];
    let curve = thermo_curve(&pot, &tr, &temps)?;
    println!(
        "{:>6} {:>2} {:>14} {:>14} {:>12} {:>12}",
        "T", "s", "F", "v1", "F''", "F'''"
    );
    for s in &curve.samples {
        println!(
            "{:>6} {:>2} {:>14.9} {:>14.9} {:>12.6} {:>12.6}",
            s.temperature, s.phase, s.free_energy, s.multiplier, s.d2f, s.d3f
        );
    }
    let ev = &tr.events[0];
    let jump = third_derivative_jump(&pot, ev)?;
    let cont = continuity(&pot, ev)?;
    println!(
        "F''' jump {:.8} (closed form {:?})",
        jump.numeric, jump.closed_form
    );
    println!(
        "|dF| {:.1e}  |dF'| {:.1e}  |dF''| {:.1e}",
        cont.delta_f, cont.delta_df, cont.delta_d2f
    );
    Ok(())
}
