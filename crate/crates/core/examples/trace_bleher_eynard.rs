//! Traces the Bleher-Eynard model at c = 1/2 from T = 3 down to T = 0.05 and
//! prints the transitions together with a few endpoint samples.

use cutflow::flow::{seed_closed_form, trace, SeedModel, TraceOptions};

fn main() -> cutflow::Result<()> {
    let (pot, seed) = seed_closed_form(SeedModel::BleherEynardCritical { c: 0.5 })?;
    let tr = trace(&pot, &seed, &TraceOptions::new(0.05, 3.0))?;
    for ev in &tr.events {
        println!(
            "{:?} at T = {:.9}, point {:.9}",
            ev.kind, ev.critical_temperature, ev.point
        );
    }
    for t in [3.0, 2.5, 1.95, 1.9, 1.5, 0.5, 0.05] {
        let s = tr.state_at(&pot, t)?;
        println!(
            "T = {t:<5} s = {}  beta = {:.6?}",
            s.config.phase(),
            s.config.beta()
        );
    }
    Ok(())
}
