//! Temperature flow of the endpoints.
//!
//! Away from transitions the endpoints obey
//! `dβ_i/dT = 4 P₀(β_i)/(h(β_i) ∏_{j≠i}(β_i − β_j))`. The integrator stops on
//! a collapsing pair (two-cut side of a merge or birth), on `h` acquiring a
//! zero inside the cut (one-cut side of a merge), or on saturation of the
//! exterior inequality (one-cut side of a birth). [`events`] classifies the
//! stop and launches the other phase; [`trace`] chains the phases.

mod events;
pub mod ode;
mod trace;

pub use events::{
    birth_gamma, critical_launch, launch_state, LaunchCoefficients, Side, TransitionEvent,
    TransitionKind,
};
pub use trace::{
    be_minimum, global_minimum, low_temperature_seed, saturation_from_below, seed_closed_form,
    trace, SeedModel, Trace, TraceOptions,
};

use crate::equilibrium::{density_polynomial, residual_norm, saturation_monitor};
use crate::error::{domain, Error, Result, VanishingFactor};
use crate::geometry::{p_k, EndpointConfig};
use crate::polyops::{Polynomial, Potential};
use ode::{dp45_step, step_factor};

/// Endpoints and their temperature derivative at one temperature.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub temperature: f64,
    pub config: EndpointConfig,
    /// `dβ/dT`
    pub velocity: Vec<f64>,
}

impl FlowState {
    /// Evaluates the velocity of `config`.
    pub fn new(pot: &Potential, temperature: f64, config: EndpointConfig) -> Result<Self> {
        let velocity = endpoint_velocity(pot, &config)?;
        Ok(Self {
            temperature,
            config,
            velocity,
        })
    }
}

/// `h(β_i) ∏_{j≠i}(β_i − β_j)` for every endpoint.
fn velocity_denominators(
    pot: &Potential,
    config: &EndpointConfig,
) -> Result<(Polynomial, Vec<f64>)> {
    let beta = config.beta();
    if let Some(i) = beta.windows(2).position(|w| w[0] == w[1]) {
        return Err(Error::Singularity {
            factor: VanishingFactor::Gap { index: i },
        });
    }
    let h = density_polynomial(pot, config);
    let mut den = Vec::with_capacity(beta.len());
    for (i, &b) in beta.iter().enumerate() {
        let hb = h.eval(b);
        // zero up to rounding in the Horner evaluation
        let bound: f64 = h
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| (c * b.powi(k as i32)).abs())
            .sum();
        if hb.abs() <= 64.0 * f64::EPSILON * bound {
            return Err(Error::Singularity {
                factor: VanishingFactor::DensityPolynomial { index: i },
            });
        }
        let prod: f64 = beta
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &c)| b - c)
            .product();
        den.push(hb * prod);
    }
    Ok((h, den))
}

/// `dβ_i/dT = 4 P₀(β_i)/(h(β_i) ∏_{j≠i}(β_i − β_j))`.
pub fn endpoint_velocity(pot: &Potential, config: &EndpointConfig) -> Result<Vec<f64>> {
    let (_, den) = velocity_denominators(pot, config)?;
    let p0 = p_k(0, config)?;
    Ok(config
        .beta()
        .iter()
        .zip(&den)
        .map(|(&b, d)| 4.0 * p0.eval(b) / d)
        .collect())
}

/// `∂β_i/∂t_n = −4 P_n(β_i)/(h(β_i) ∏_{j≠i}(β_i − β_j))`, with `t₀ = −T`.
pub fn whitham_velocity(n: usize, pot: &Potential, config: &EndpointConfig) -> Result<Vec<f64>> {
    if n > pot.degree() {
        return domain(format!(
            "coupling index {n} exceeds the potential degree {}",
            pot.degree()
        ));
    }
    let (_, den) = velocity_denominators(pot, config)?;
    let pn = p_k(n, config)?;
    Ok(config
        .beta()
        .iter()
        .zip(&den)
        .map(|(&b, d)| -4.0 * pn.eval(b) / d)
        .collect())
}

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    /// The target temperature was reached.
    Reached,
    /// `β_{index+1} − β_index` fell below the gap guard.
    GapCollapse { index: usize },
    /// `|h(β_index)|` fell below the density guard with all gaps open.
    DensityZero { index: usize },
    /// `h` acquired a zero inside the single cut, at `point`.
    SupportZero { point: f64 },
    /// The exterior inequality saturated at `point`.
    Saturation { point: f64 },
}

/// Samples of one phase, in integration order.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub phase: usize,
    pub samples: Vec<FlowState>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn start_temperature(&self) -> f64 {
        self.samples[0].temperature
    }

    pub fn end_temperature(&self) -> f64 {
        self.last().temperature
    }

    pub fn last(&self) -> &FlowState {
        self.samples.last().expect("trajectories are never empty")
    }

    /// `true` if `t` lies between the first and last sample.
    pub fn covers(&self, t: f64) -> bool {
        let (a, b) = (self.start_temperature(), self.end_temperature());
        a.min(b) <= t && t <= a.max(b)
    }

    /// State at `t`, integrated from the nearest stored sample.
    pub fn state_at(&self, pot: &Potential, t: f64) -> Result<FlowState> {
        if !self.covers(t) {
            return domain(format!(
                "T = {t} outside the trajectory range [{}, {}]",
                self.start_temperature(),
                self.end_temperature()
            ));
        }
        let nearest = self
            .samples
            .iter()
            .min_by(|a, b| {
                (a.temperature - t)
                    .abs()
                    .total_cmp(&(b.temperature - t).abs())
            })
            .expect("nonempty");
        advance(pot, nearest, t, &IntegrateOptions::default())
    }
}

/// Integrator settings.
#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Largest step as a fraction of the temperature range.
    pub max_step_fraction: f64,
    /// Stop when two adjacent endpoints come closer than this.
    pub gap_guard: f64,
    /// Stop when the interior gap of two cuts closes below this. The position
    /// of a nearly merged pair is determined only to about `ε/gap²`, so merges
    /// are extrapolated from this distance rather than integrated into.
    pub merge_guard: f64,
    /// Stop when `|h(β_i)|` drops below this.
    pub density_guard: f64,
    /// Steps whose hodograph residual exceeds this are rejected.
    pub residual_limit: f64,
    pub max_steps: usize,
    /// Watch for `h` vanishing inside a single cut.
    pub watch_support: bool,
    /// Watch for saturation of the exterior inequality of a single cut.
    pub watch_saturation: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            max_step_fraction: 0.01,
            gap_guard: 1e-6,
            merge_guard: 1e-3,
            density_guard: 1e-8,
            residual_limit: 1e-6,
            max_steps: 200_000,
            watch_support: false,
            watch_saturation: false,
        }
    }
}

/// Minimum of `h` over a single cut.
fn support_minimum(h: &Polynomial, config: &EndpointConfig) -> (f64, f64) {
    let (a, b) = (config.beta()[0], config.beta()[1]);
    let mut best = if h.eval(a) < h.eval(b) {
        (a, h.eval(a))
    } else {
        (b, h.eval(b))
    };
    for r in h.derivative().real_roots() {
        if a < r && r < b && h.eval(r) < best.1 {
            best = (r, h.eval(r));
        }
    }
    best
}

/// Signed monitor values `(support, saturation)` of a one-cut state; positive
/// while the state is admissible.
fn monitors(
    pot: &Potential,
    config: &EndpointConfig,
    opts: &IntegrateOptions,
) -> (Option<(f64, f64)>, Option<(f64, f64)>) {
    if config.phase() != 1 {
        return (None, None);
    }
    let support = opts.watch_support.then(|| {
        let (x, v) = support_minimum(&density_polynomial(pot, config), config);
        (x, v)
    });
    let saturation = if opts.watch_saturation {
        saturation_monitor(pot, config)
    } else {
        None
    };
    (support, saturation)
}

fn rhs(pot: &Potential) -> impl FnMut(f64, &[f64]) -> Option<Vec<f64>> + '_ {
    move |_t, y| {
        let c = EndpointConfig::new(y.to_vec()).ok()?;
        let v = endpoint_velocity(pot, &c).ok()?;
        v.iter().all(|x| x.is_finite()).then_some(v)
    }
}

/// Integrates from `seed` to `target` without event monitoring and returns the final state.
pub fn advance(
    pot: &Potential,
    seed: &FlowState,
    target: f64,
    opts: &IntegrateOptions,
) -> Result<FlowState> {
    if seed.temperature == target {
        return Ok(seed.clone());
    }
    let plain = IntegrateOptions {
        watch_support: false,
        watch_saturation: false,
        gap_guard: 0.0,
        merge_guard: 0.0,
        density_guard: 0.0,
        ..opts.clone()
    };
    let traj = run(pot, seed, target, &plain, false)?;
    Ok(traj.last().clone())
}

/// Integrates the endpoint ODE from `seed` toward `target`, stopping early at
/// the first event.
pub fn integrate(
    pot: &Potential,
    seed: &FlowState,
    target: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let r = residual_norm(pot, seed.temperature, &seed.config)?;
    if !(r < 1e-8) {
        return domain(format!("seed hodograph residual {r:e} exceeds 1e-8"));
    }
    run(pot, seed, target, opts, true)
}

fn run(
    pot: &Potential,
    seed: &FlowState,
    target: f64,
    opts: &IntegrateOptions,
    watch: bool,
) -> Result<Trajectory> {
    if !(target > 0.0) {
        return domain(format!("target temperature must be positive, got {target}"));
    }
    let phase = seed.config.phase();
    let mut samples = vec![seed.clone()];
    let t0 = seed.temperature;
    if t0 == target {
        return Ok(Trajectory {
            phase,
            samples,
            termination: Termination::Reached,
        });
    }
    let dir = (target - t0).signum();
    let range = (target - t0).abs();
    let h_max = (opts.max_step_fraction * range).max(range.min(1e-10));
    let mut h = h_max.min(1e-4 * t0.abs().max(1.0));
    let mut f = rhs(pot);
    let mut t = t0;
    let mut y = seed.config.beta().to_vec();
    let mut dy = seed.velocity.clone();
    let (mut prev_support, mut prev_sat) = if watch {
        monitors(pot, &seed.config, opts)
    } else {
        (None, None)
    };

    let fail = |t: f64, y: &[f64], reason: String| Error::Integration {
        temperature: t,
        endpoints: y.to_vec(),
        reason,
    };

    for _ in 0..opts.max_steps {
        let remaining = (target - t).abs();
        let last = h >= remaining;
        let step_h = if last { remaining } else { h };
        if remaining < 1e-13 * t.abs().max(1.0) {
            // below the resolution of a Runge–Kutta step: finish with Euler
            let yn: Vec<f64> = y
                .iter()
                .zip(&dy)
                .map(|(a, b)| a + dir * remaining * b)
                .collect();
            let config = EndpointConfig::new(yn)?;
            samples.push(FlowState::new(pot, target, config)?);
            break;
        }
        if step_h < 1e-15 * t.abs().max(1.0) {
            return Err(fail(t, &y, format!("step size underflow ({step_h:e})")));
        }
        let Some(step) = dp45_step(&mut f, t, &y, &dy, dir * step_h, opts.atol, opts.rtol) else {
            h = step_h * 0.25;
            continue;
        };
        if step.error > 1.0 {
            h = step_h * step_factor(step.error);
            continue;
        }
        let t_new = if last { target } else { t + dir * step_h };
        let Ok(config) = EndpointConfig::new(step.y.clone()) else {
            h = step_h * 0.5;
            continue;
        };
        match residual_norm(pot, t_new, &config) {
            Ok(r) if r <= opts.residual_limit => {}
            _ => {
                h = step_h * 0.5;
                continue;
            }
        }
        let state = FlowState {
            temperature: t_new,
            config,
            velocity: step.dy.clone(),
        };
        t = t_new;
        y = step.y;
        dy = step.dy;
        h = (step_h * step_factor(step.error)).min(h_max);
        samples.push(state);
        let state = samples.last().unwrap();

        if !watch {
            if last {
                break;
            }
            continue;
        }
        if phase == 2 && y[2] - y[1] < opts.merge_guard {
            return Ok(Trajectory {
                phase,
                samples,
                termination: Termination::GapCollapse { index: 1 },
            });
        }
        if state.config.min_gap() < opts.gap_guard {
            let index = (0..y.len() - 1)
                .min_by(|&i, &j| (y[i + 1] - y[i]).total_cmp(&(y[j + 1] - y[j])))
                .unwrap();
            return Ok(Trajectory {
                phase,
                samples,
                termination: Termination::GapCollapse { index },
            });
        }
        let hpoly = density_polynomial(pot, &state.config);
        if let Some(index) = y
            .iter()
            .position(|&b| hpoly.eval(b).abs() < opts.density_guard)
        {
            return Ok(Trajectory {
                phase,
                samples,
                termination: Termination::DensityZero { index },
            });
        }
        let (support, sat) = monitors(pot, &state.config, opts);
        if let (Some((_, p)), Some((_, n))) = (prev_support, support) {
            if p > 0.0 && n < 0.0 {
                let a = samples[samples.len() - 2].clone();
                let (crit, point) = refine_crossing(pot, &a, t, |c| {
                    support_minimum(&density_polynomial(pot, c), c)
                })?;
                samples.truncate(samples.len() - 1);
                samples.push(crit);
                return Ok(Trajectory {
                    phase,
                    samples,
                    termination: Termination::SupportZero { point },
                });
            }
        }
        if let (Some((_, p)), Some((_, n))) = (prev_sat, sat) {
            if p > 0.0 && n < 0.0 {
                let a = samples[samples.len() - 2].clone();
                let (crit, point) = refine_crossing(pot, &a, t, |c| {
                    saturation_monitor(pot, c).unwrap_or((f64::NAN, f64::NAN))
                })?;
                samples.truncate(samples.len() - 1);
                samples.push(crit);
                return Ok(Trajectory {
                    phase,
                    samples,
                    termination: Termination::Saturation { point },
                });
            }
        }
        prev_support = support;
        prev_sat = sat;
        if last {
            break;
        }
    }
    if samples.last().unwrap().temperature != target {
        return Err(fail(
            t,
            &y,
            format!("no convergence within {} steps", opts.max_steps),
        ));
    }
    Ok(Trajectory {
        phase,
        samples,
        termination: Termination::Reached,
    })
}

/// Locates the temperature in `(a.T, t_b]` where `monitor` changes sign from
/// positive to negative, by Illinois false position on states advanced from `a`.
fn refine_crossing<M>(
    pot: &Potential,
    a: &FlowState,
    t_b: f64,
    monitor: M,
) -> Result<(FlowState, f64)>
where
    M: Fn(&EndpointConfig) -> (f64, f64),
{
    let opts = IntegrateOptions::default();
    let eval = |t: f64| -> Result<(FlowState, f64, f64)> {
        let s = advance(pot, a, t, &opts)?;
        let (x, v) = monitor(&s.config);
        Ok((s, x, v))
    };
    let (mut ta, mut ga) = (a.temperature, monitor(&a.config).1);
    let (sb, xb, mut gb) = eval(t_b)?;
    let mut tb = t_b;
    let mut best = (sb, xb);
    let mut side = 0;
    for _ in 0..200 {
        if (tb - ta).abs() <= 1e-13 * tb.abs().max(1.0) {
            break;
        }
        let tm = (ta * gb - tb * ga) / (gb - ga);
        let tm = if tm.is_finite() && (tm - ta) * (tm - tb) < 0.0 {
            tm
        } else {
            0.5 * (ta + tb)
        };
        let (sm, xm, gm) = eval(tm)?;
        best = (sm.clone(), xm);
        if gm == 0.0 {
            break;
        }
        if gm > 0.0 {
            ta = tm;
            ga = gm;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        } else {
            tb = tm;
            gb = gm;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(b: &[f64]) -> EndpointConfig {
        EndpointConfig::new(b.to_vec()).unwrap()
    }

    #[test]
    fn be_critical_velocities() {
        let pot = Potential::bleher_eynard(0.5).unwrap();
        let v = endpoint_velocity(&pot, &cfg(&[-2.0, 2.0])).unwrap();
        assert_abs_diff_eq!(v[0], -1.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn quartic_one_cut_velocity() {
        let pot = Potential::quartic_even();
        let v = endpoint_velocity(&pot, &models::quartic_one_cut(3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(v[1], models::quartic_one_cut_velocity(3.0), epsilon = 1e-12);
        assert_abs_diff_eq!(v[0], -v[1], epsilon = 1e-14);
    }

    #[test]
    fn quartic_two_cut_velocity_matches_closed_form() {
        let pot = Potential::quartic_even();
        let t = 0.36;
        let v = endpoint_velocity(&pot, &models::quartic_two_cut(t).unwrap()).unwrap();
        let h = 1e-6;
        let (p, m) = (
            models::quartic_two_cut(t + h).unwrap(),
            models::quartic_two_cut(t - h).unwrap(),
        );
        for i in 0..4 {
            assert_abs_diff_eq!(
                v[i],
                (p.beta()[i] - m.beta()[i]) / (2.0 * h),
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn singular_denominators_are_reported() {
        let pot = Potential::quartic_even();
        // h = z² + b²/2 − 2 vanishes at the endpoints when b² = 4/3
        let b = (4.0f64 / 3.0).sqrt();
        match endpoint_velocity(&pot, &cfg(&[-b, b])) {
            Err(Error::Singularity {
                factor: VanishingFactor::DensityPolynomial { .. },
            }) => {}
            other => panic!("{other:?}"),
        }
        let d = EndpointConfig::degenerate(vec![-2.0, 0.0, 0.0, 2.0]).unwrap();
        match endpoint_velocity(&pot, &d) {
            Err(Error::Singularity {
                factor: VanishingFactor::Gap { index: 1 },
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn whitham_zero_is_minus_temperature_flow() {
        let pot = Potential::bleher_eynard(0.5).unwrap();
        let c = cfg(&[-1.989, 0.646, 1.431, 1.870]);
        let v = endpoint_velocity(&pot, &c).unwrap();
        let w = whitham_velocity(0, &pot, &c).unwrap();
        for (a, b) in v.iter().zip(&w) {
            assert_abs_diff_eq!(*a, -*b, epsilon = 1e-14);
        }
        assert!(whitham_velocity(5, &pot, &c).is_err());
    }

    #[test]
    fn whitham_odd_flows_are_antisymmetric() {
        let pot = Potential::quartic_even();
        let c = models::quartic_two_cut(0.3).unwrap();
        for n in [1, 3] {
            let w = whitham_velocity(n, &pot, &c).unwrap();
            for i in 0..4 {
                assert_abs_diff_eq!(w[i], w[3 - i], epsilon = 1e-12 * (1.0 + w[i].abs()));
            }
        }
    }

    #[test]
    fn quartic_one_cut_integration_matches_closed_form() {
        let pot = Potential::quartic_even();
        let seed = FlowState::new(&pot, 3.0, models::quartic_one_cut(3.0).unwrap()).unwrap();
        let traj = integrate(&pot, &seed, 1.5, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.termination, Termination::Reached);
        for s in &traj.samples {
            let exact = models::quartic_one_cut(s.temperature).unwrap();
            assert_abs_diff_eq!(s.config.beta()[1], exact.beta()[1], epsilon = 1e-8);
        }
        let mid = traj.state_at(&pot, 2.2).unwrap();
        assert_abs_diff_eq!(
            mid.config.beta()[0],
            models::quartic_one_cut(2.2).unwrap().beta()[0],
            epsilon = 1e-8
        );
        assert!(traj.state_at(&pot, 1.0).is_err());
    }

    #[test]
    fn quartic_support_zero_at_one() {
        let pot = Potential::quartic_even();
        let seed = FlowState::new(&pot, 2.0, models::quartic_one_cut(2.0).unwrap()).unwrap();
        let opts = IntegrateOptions {
            watch_support: true,
            ..Default::default()
        };
        let traj = integrate(&pot, &seed, 0.5, &opts).unwrap();
        match traj.termination {
            Termination::SupportZero { point } => assert_abs_diff_eq!(point, 0.0, epsilon = 1e-6),
            other => panic!("{other:?}"),
        }
        assert_abs_diff_eq!(traj.end_temperature(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn quartic_two_cut_merges_going_up() {
        let pot = Potential::quartic_even();
        let seed = FlowState::new(&pot, 0.25, models::quartic_two_cut(0.25).unwrap()).unwrap();
        let traj = integrate(&pot, &seed, 2.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.termination, Termination::GapCollapse { index: 1 });
        assert!((traj.end_temperature() - 1.0).abs() < 1e-5);
        let b = traj.last().config.beta();
        assert!(
            (b[1] + b[2]).abs() < 1e-8,
            "{b:?} at {}",
            traj.end_temperature()
        );
        let ev = events::merge_from_two_cut(&pot, traj.last(), 1.0).unwrap();
        assert_abs_diff_eq!(ev.critical_temperature, 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(ev.point, 0.0, epsilon = 1e-8);
        for s in &traj.samples {
            let exact = models::quartic_two_cut(s.temperature.min(1.0 - 1e-15)).unwrap();
            assert_abs_diff_eq!(s.config.beta()[3], exact.beta()[3], epsilon = 1e-7);
        }
    }

    #[test]
    fn integrate_rejects_poor_seed() {
        let pot = Potential::quartic_even();
        let seed = FlowState::new(&pot, 3.0, cfg(&[-2.0, 2.0])).unwrap();
        assert!(integrate(&pot, &seed, 2.0, &IntegrateOptions::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn whitham_ratio_law(t in 0.1f64..0.9, k in 2usize..=4) {
            let pot = Potential::quartic_even();
            let c = models::quartic_two_cut(t).unwrap();
            let wk = whitham_velocity(k, &pot, &c).unwrap();
            let w1 = whitham_velocity(1, &pot, &c).unwrap();
            let pk = p_k(k, &c).unwrap();
            let p1 = p_k(1, &c).unwrap();
            for (i, &b) in c.beta().iter().enumerate() {
                let ratio = pk.eval(b) / p1.eval(b);
                prop_assert!((wk[i] / w1[i] - ratio).abs() <= 1e-10 * (1.0 + ratio.abs()));
            }
        }

        #[test]
        fn even_potential_flow_is_symmetric(t in 0.1f64..0.9) {
            let pot = Potential::quartic_even();
            let v = endpoint_velocity(&pot, &models::quartic_two_cut(t).unwrap()).unwrap();
            for i in 0..4 {
                prop_assert!((v[i] + v[3 - i]).abs() <= 1e-10 * (1.0 + v[i].abs()));
            }
        }
    }
}
