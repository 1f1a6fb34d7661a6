//! Seeds and multi-phase tracing over a temperature range.

use super::events::{
    birth_from_one_cut, birth_from_two_cut, merge_from_one_cut, merge_from_two_cut, Side,
};
use super::{
    integrate, launch_state, FlowState, IntegrateOptions, Termination, Trajectory, TransitionEvent,
};
use crate::equilibrium::solve_endpoints;
use crate::error::{domain, Error, Result};
use crate::geometry::EndpointConfig;
use crate::models::{self, Preset};
use crate::polyops::Potential;

pub use crate::models::be_minimum;

/// Models with exact seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeedModel {
    /// One-cut quartic-even solution at `T > 1`.
    QuarticOneCut { temperature: f64 },
    /// Two-cut quartic-even solution at `0 < T < 1`.
    QuarticTwoCut { temperature: f64 },
    /// Bleher–Eynard one-cut configuration `(−2, 2)` at `T_c = 1 + 4c²`.
    BleherEynardCritical { c: f64 },
}

/// Exact seed state for a test model.
pub fn seed_closed_form(model: SeedModel) -> Result<(Potential, FlowState)> {
    match model {
        SeedModel::QuarticOneCut { temperature } => {
            if !(temperature > 1.0) {
                return domain(format!(
                    "one-cut quartic seed requires T > 1, got {temperature}"
                ));
            }
            let pot = Potential::quartic_even();
            let s = FlowState::new(&pot, temperature, models::quartic_one_cut(temperature)?)?;
            Ok((pot, s))
        }
        SeedModel::QuarticTwoCut { temperature } => {
            let pot = Potential::quartic_even();
            let s = FlowState::new(&pot, temperature, models::quartic_two_cut(temperature)?)?;
            Ok((pot, s))
        }
        SeedModel::BleherEynardCritical { c } => {
            let preset = Preset::BleherEynard { c };
            let pot = preset.potential()?;
            let s = FlowState::new(&pot, preset.merge_temperature(), preset.merge_config())?;
            Ok((pot, s))
        }
    }
}

/// Position of the absolute minimum of `V`, if unique.
pub fn global_minimum(pot: &Potential) -> Result<f64> {
    let mut crit = pot.derivative().real_roots();
    crit.sort_by(|a, b| pot.eval(*a).total_cmp(&pot.eval(*b)));
    match crit.as_slice() {
        [] => Err(Error::Numeric(
            "potential has no real critical point".into(),
        )),
        [m] => Ok(*m),
        [m, n, ..] => {
            if (pot.eval(*n) - pot.eval(*m)).abs() <= 1e-12 * pot.eval(*m).abs().max(1.0)
                && (m - n).abs() > 1e-6
            {
                domain("the absolute minimum of the potential is not unique")
            } else {
                Ok(*m)
            }
        }
    }
}

/// One-cut state at small `T` around the absolute minimum `m`:
/// `β = m ± 2√(T/V″(m))`, then Newton.
pub fn low_temperature_seed(pot: &Potential, t: f64) -> Result<FlowState> {
    let m = global_minimum(pot)?;
    let curv = pot.derivative().derivative().eval(m);
    if !(curv > 0.0) {
        return domain("degenerate minimum: V″ vanishes at the absolute minimum");
    }
    let r = 2.0 * (t / curv).sqrt();
    let guess = EndpointConfig::new(vec![m - r, m + r])?;
    let config = solve_endpoints(pot, t, &guess, 1e-13)
        .or_else(|_| solve_endpoints(pot, t, &guess, 1e-10))?;
    FlowState::new(pot, t, config)
}

/// Integrates the one-cut branch up from a low-temperature seed and returns the
/// event where the exterior inequality first saturates below `t_high`, if any.
pub fn saturation_from_below(
    pot: &Potential,
    t_low: f64,
    t_high: f64,
) -> Result<Option<TransitionEvent>> {
    let seed = low_temperature_seed(pot, t_low)?;
    let opts = IntegrateOptions {
        watch_saturation: true,
        ..Default::default()
    };
    let traj = integrate(pot, &seed, t_high, &opts)?;
    match traj.termination {
        Termination::Saturation { point } => {
            let last = traj.last();
            let ev = birth_from_one_cut(
                pot,
                last.temperature,
                &last.config,
                point,
                Side::Above,
                Side::Below,
            )?;
            Ok(Some(ev))
        }
        _ => Ok(None),
    }
}

/// Settings for [`trace`].
#[derive(Clone, Debug)]
pub struct TraceOptions {
    pub t_min: f64,
    pub t_max: f64,
    /// Newton tolerance for launched states.
    pub newton_tol: f64,
    /// Launch offset as a fraction of `max(1, T_c)`.
    pub launch_fraction: f64,
    pub integrate: IntegrateOptions,
    pub max_events: usize,
}

impl TraceOptions {
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Self {
            t_min,
            t_max,
            newton_tol: 1e-12,
            launch_fraction: 1e-6,
            integrate: IntegrateOptions::default(),
            max_events: 8,
        }
    }
}

/// Phases traced from `t_max` down to `t_min`, with the transitions between them.
#[derive(Clone, Debug)]
pub struct Trace {
    /// Trajectories in order of decreasing temperature.
    pub branches: Vec<Trajectory>,
    pub events: Vec<TransitionEvent>,
}

impl Trace {
    /// Branch whose range contains `t`, preferring the one with the most samples.
    pub fn branch_at(&self, t: f64) -> Option<&Trajectory> {
        self.branches
            .iter()
            .filter(|b| b.covers(t))
            .max_by_key(|b| b.samples.len())
    }

    pub fn state_at(&self, pot: &Potential, t: f64) -> Result<FlowState> {
        match self.branch_at(t) {
            Some(b) => b.state_at(pot, t),
            None => domain(format!("T = {t} is not covered by the trace")),
        }
    }

    /// All stored samples in order of decreasing temperature.
    pub fn samples(&self) -> impl Iterator<Item = &FlowState> {
        self.branches.iter().flat_map(|b| b.samples.iter())
    }
}

/// Integrates from `start` toward `target`, classifying each stop and launching
/// the next phase.
fn sweep(pot: &Potential, start: &FlowState, target: f64, opts: &TraceOptions) -> Result<Trace> {
    let dir = (target - start.temperature).signum();
    let heading = Side::from_direction(dir);
    let mut state = start.clone();
    let mut branches = Vec::new();
    let mut events = Vec::new();
    loop {
        if state.temperature == target {
            break;
        }
        let iopts = IntegrateOptions {
            watch_support: state.config.phase() == 1,
            watch_saturation: state.config.phase() == 1,
            ..opts.integrate.clone()
        };
        let traj = integrate(pot, &state, target, &iopts)?;
        let last = traj.last().clone();
        let term = traj.termination;
        branches.push(traj);
        let (event, next) = match term {
            Termination::Reached => break,
            Termination::SupportZero { .. } => {
                let ev = merge_from_one_cut(
                    pot,
                    last.temperature,
                    &last.config,
                    heading,
                    heading.opposite(),
                )?;
                let t = opts.launch_fraction * ev.critical_temperature.abs().max(1.0);
                let next = launch_state(pot, &ev, heading, t, opts.newton_tol)?;
                (ev, next)
            }
            Termination::Saturation { point } => {
                let ev = birth_from_one_cut(
                    pot,
                    last.temperature,
                    &last.config,
                    point,
                    heading,
                    heading.opposite(),
                )?;
                let t = opts.launch_fraction * ev.critical_temperature.abs().max(1.0);
                let next = launch_state(pot, &ev, heading, t, opts.newton_tol)?;
                (ev, next)
            }
            Termination::GapCollapse { index } if last.config.phase() == 2 => {
                let ev = if index == 1 {
                    merge_from_two_cut(pot, &last, dir)?
                } else {
                    birth_from_two_cut(pot, &last, index, dir)?
                };
                let next = FlowState::new(pot, ev.critical_temperature, ev.one_cut.clone())?;
                (ev, next)
            }
            Termination::GapCollapse { .. } => {
                return Err(Error::Integration {
                    temperature: last.temperature,
                    endpoints: last.config.beta().to_vec(),
                    reason: "the support collapsed to a point".into(),
                })
            }
            Termination::DensityZero { index } => {
                return Err(Error::SingularDensity {
                    temperature: last.temperature,
                    reason: format!(
                        "h vanishes at endpoint {} without a collapsing gap",
                        index + 1
                    ),
                })
            }
        };
        events.push(event);
        if events.len() > opts.max_events {
            return Err(Error::Integration {
                temperature: next.temperature,
                endpoints: next.config.beta().to_vec(),
                reason: format!("more than {} transitions", opts.max_events),
            });
        }
        if (target - next.temperature) * dir <= 0.0 {
            break;
        }
        state = next;
    }
    Ok(Trace { branches, events })
}

/// Traces all phases on `[t_min, t_max]` starting from any solution `seed`.
///
/// The seed is first carried to `t_max`; the reported trace then runs
/// downward so every transition is met from the high-temperature side.
pub fn trace(pot: &Potential, seed: &FlowState, opts: &TraceOptions) -> Result<Trace> {
    if !(opts.t_min > 0.0 && opts.t_min < opts.t_max) {
        return domain(format!(
            "invalid temperature range [{}, {}]",
            opts.t_min, opts.t_max
        ));
    }
    let top = if seed.temperature == opts.t_max {
        seed.clone()
    } else {
        let up = sweep(pot, seed, opts.t_max, opts)?;
        let last = up
            .branches
            .last()
            .map(|b| b.last().clone())
            .unwrap_or_else(|| seed.clone());
        if last.temperature != opts.t_max {
            return Err(Error::Seed(format!(
                "could not carry the seed to T = {}",
                opts.t_max
            )));
        }
        last
    };
    sweep(pot, &top, opts.t_min, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::TransitionKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn seeds() {
        let (_, s) = seed_closed_form(SeedModel::QuarticOneCut { temperature: 3.0 }).unwrap();
        assert_abs_diff_eq!(s.config.beta()[1], 2.355_78, epsilon = 1e-5);
        let (_, s) = seed_closed_form(SeedModel::QuarticTwoCut { temperature: 0.25 }).unwrap();
        assert_abs_diff_eq!(s.config.beta()[2], 1.0, epsilon = 1e-15);
        let (_, s) = seed_closed_form(SeedModel::BleherEynardCritical { c: 0.5 }).unwrap();
        assert_eq!(s.temperature, 2.0);
        assert_eq!(s.config.beta(), &[-2.0, 2.0]);
        assert!(seed_closed_form(SeedModel::QuarticOneCut { temperature: 0.5 }).is_err());
        assert!(seed_closed_form(SeedModel::BleherEynardCritical { c: 1.0 }).is_err());
    }

    #[test]
    fn global_minimum_of_double_well() {
        assert!(global_minimum(&Potential::quartic_even()).is_err());
        let pot = Potential::bleher_eynard(0.5).unwrap();
        assert_abs_diff_eq!(
            global_minimum(&pot).unwrap(),
            be_minimum(0.5).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn quartic_trace_has_one_merge() {
        let (pot, seed) = seed_closed_form(SeedModel::QuarticOneCut { temperature: 2.0 }).unwrap();
        let tr = trace(&pot, &seed, &TraceOptions::new(0.1, 2.0)).unwrap();
        assert_eq!(tr.events.len(), 1);
        let ev = &tr.events[0];
        assert_eq!(ev.kind, TransitionKind::Merge);
        assert_abs_diff_eq!(ev.critical_temperature, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(ev.point, 0.0, epsilon = 1e-6);
        let st = tr.state_at(&pot, 0.5).unwrap();
        let exact = models::quartic_two_cut(0.5).unwrap();
        for (a, b) in st.config.beta().iter().zip(exact.beta()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-7);
        }
    }
}
