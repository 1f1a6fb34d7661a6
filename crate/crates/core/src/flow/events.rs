//! Transition classification and asymptotic launch into the other phase.

use super::FlowState;
use crate::equilibrium::{density_polynomial, solve_endpoints};
use crate::error::{domain, Error, Result};
use crate::geometry::EndpointConfig;
use crate::polyops::Potential;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitionKind {
    /// Two cuts join at an interior point.
    Merge,
    /// A new cut opens outside the support.
    Birth,
}

/// Side of a transition temperature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Above => 1.0,
            Side::Below => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Above => Side::Below,
            Side::Below => Side::Above,
        }
    }

    pub(crate) fn from_direction(dir: f64) -> Side {
        if dir > 0.0 {
            Side::Above
        } else {
            Side::Below
        }
    }
}

/// Coefficients of the leading asymptotics on the two-cut side.
#[derive(Clone, Debug, PartialEq)]
pub enum LaunchCoefficients {
    /// Inner endpoints `β ∓ amplitude·√t`; `amplitude = 2/√(D Q)` with
    /// `D = h″(β)/2` and `Q = (β − β₁)(β₂ − β)` on the one-cut side.
    Merge { amplitude: f64, curvature: f64 },
    /// Newborn gap `δ` with `δ²(½ − log δ) = 4γt`.
    Birth { gamma: f64 },
}

/// A merge or birth at `critical_temperature`.
#[derive(Clone, Debug)]
pub struct TransitionEvent {
    pub kind: TransitionKind,
    pub critical_temperature: f64,
    /// Coalescence point `β` of the merge, or birth point `β̃`.
    pub point: f64,
    /// Configuration on the side the transition was approached from, at `T_c`.
    pub config_before: EndpointConfig,
    /// Configuration on the far side, at `T_c`.
    pub config_after: EndpointConfig,
    /// One-cut endpoints at `T_c`.
    pub one_cut: EndpointConfig,
    /// Degenerate two-cut configuration at `T_c`.
    pub critical: EndpointConfig,
    /// Side of `T_c` occupied by the two-cut phase.
    pub two_cut_side: Side,
    /// One-cut endpoint velocities at `T_c`; the outer endpoints match them on both sides.
    pub outer_velocities: Vec<f64>,
    pub launch: LaunchCoefficients,
}

impl TransitionEvent {
    /// Pair index (0-based, left member) that collapses on the two-cut side.
    pub fn collapsing_pair(&self) -> usize {
        let c = self.critical.beta();
        (0..3).find(|&i| c[i] == c[i + 1]).unwrap_or(1)
    }

    fn set_direction(&mut self, approached_from: Side) {
        let two = self.critical.clone();
        let one = self.one_cut.clone();
        if approached_from == self.two_cut_side {
            self.config_before = two;
            self.config_after = one;
        } else {
            self.config_before = one;
            self.config_after = two;
        }
    }
}

/// Polishes a one-cut guess at `t`.
fn polish_one_cut(pot: &Potential, t: f64, guess: &EndpointConfig) -> Result<EndpointConfig> {
    solve_endpoints(pot, t, guess, 1e-13).or_else(|_| solve_endpoints(pot, t, guess, 1e-11))
}

/// Projects a two-cut state stopped near a transition back onto the solution
/// set, removing residual accumulated by the integrator. Keeps the state if
/// Newton does not converge.
fn polish_two_cut(pot: &Potential, last: &FlowState) -> FlowState {
    solve_endpoints(pot, last.temperature, &last.config, 1e-14)
        .and_then(|c| FlowState::new(pot, last.temperature, c))
        .unwrap_or_else(|_| last.clone())
}

/// Merge seen from the one-cut side: `h` has a double zero inside the cut.
pub(crate) fn merge_from_one_cut(
    pot: &Potential,
    tc: f64,
    one_cut: &EndpointConfig,
    two_cut_side: Side,
    approached_from: Side,
) -> Result<TransitionEvent> {
    let h = density_polynomial(pot, one_cut);
    let (b1, b2) = (one_cut.beta()[0], one_cut.beta()[1]);
    let point = h
        .derivative()
        .real_roots()
        .into_iter()
        .filter(|&r| b1 < r && r < b2)
        .min_by(|a, b| h.eval(*a).total_cmp(&h.eval(*b)))
        .ok_or_else(|| Error::SingularDensity {
            temperature: tc,
            reason: "no interior minimum of h at the merge".into(),
        })?;
    let curvature = 0.5 * h.derivative().derivative().eval(point);
    let q = (point - b1) * (b2 - point);
    if !(curvature > 0.0 && q > 0.0) {
        return Err(Error::SingularDensity {
            temperature: tc,
            reason: format!(
                "degenerate merge (h″/2 = {curvature:e}); higher-order zero is not classified"
            ),
        });
    }
    let critical = EndpointConfig::degenerate(vec![b1, point, point, b2])?;
    let outer_velocities = super::endpoint_velocity(pot, one_cut)?;
    let mut ev = TransitionEvent {
        kind: TransitionKind::Merge,
        critical_temperature: tc,
        point,
        config_before: one_cut.clone(),
        config_after: critical.clone(),
        one_cut: one_cut.clone(),
        critical,
        two_cut_side,
        outer_velocities,
        launch: LaunchCoefficients::Merge {
            amplitude: 2.0 / (curvature * q).sqrt(),
            curvature,
        },
    };
    ev.set_direction(approached_from);
    Ok(ev)
}

/// Merge seen from the two-cut side: the inner gap collapsed at the last state,
/// integrating in direction `dir`.
pub(crate) fn merge_from_two_cut(
    pot: &Potential,
    last: &FlowState,
    dir: f64,
) -> Result<TransitionEvent> {
    let last = &polish_two_cut(pot, last);
    let b = last.config.beta();
    let v = &last.velocity;
    let g = b[2] - b[1];
    // g² is linear in T near the merge
    let slope = 2.0 * g * (v[2] - v[1]);
    let t_est = if slope != 0.0 {
        (g * g / slope).abs()
    } else {
        0.0
    };
    let tc = last.temperature + dir * t_est;
    let dt = tc - last.temperature;
    let guess = EndpointConfig::new(vec![b[0] + v[0] * dt, b[3] + v[3] * dt])?;
    let one_cut = polish_one_cut(pot, tc, &guess)?;
    let side = Side::from_direction(-dir);
    merge_from_one_cut(pot, tc, &one_cut, side, side)
}

/// `γ = 8 atanh(√(b/a))/(h′(β̃)√(ab))` with `a`, `b` the far and near distances
/// from `β̃` to the one-cut endpoints and `h` the one-cut density polynomial.
pub fn birth_gamma(pot: &Potential, one_cut: &EndpointConfig, point: f64) -> Result<f64> {
    let (b1, b2) = (one_cut.beta()[0], one_cut.beta()[1]);
    let (far, near, orient) = if point > b2 {
        (point - b1, point - b2, 1.0)
    } else if point < b1 {
        (b2 - point, b1 - point, -1.0)
    } else {
        return domain(format!(
            "birth point {point} lies inside the cut ({b1}, {b2})"
        ));
    };
    let slope = orient * density_polynomial(pot, one_cut).derivative().eval(point);
    let theta = (near / far).sqrt().atanh();
    Ok(8.0 * theta / (slope * (far * near).sqrt()))
}

/// Birth seen from the one-cut side: `h` vanishes at `point` outside the cut
/// and the exterior inequality is saturated there.
pub(crate) fn birth_from_one_cut(
    pot: &Potential,
    tc: f64,
    one_cut: &EndpointConfig,
    point_hint: f64,
    two_cut_side: Side,
    approached_from: Side,
) -> Result<TransitionEvent> {
    let h = density_polynomial(pot, one_cut);
    let (b1, b2) = (one_cut.beta()[0], one_cut.beta()[1]);
    let point = h
        .real_roots()
        .into_iter()
        .filter(|&r| r < b1 || r > b2)
        .min_by(|a, b| (a - point_hint).abs().total_cmp(&(b - point_hint).abs()))
        .ok_or_else(|| Error::SingularDensity {
            temperature: tc,
            reason: "no exterior zero of h at the birth".into(),
        })?;
    let gamma = birth_gamma(pot, one_cut, point)?;
    let critical = if point > b2 {
        EndpointConfig::degenerate(vec![b1, b2, point, point])?
    } else {
        EndpointConfig::degenerate(vec![point, point, b1, b2])?
    };
    let outer_velocities = super::endpoint_velocity(pot, one_cut)?;
    let mut ev = TransitionEvent {
        kind: TransitionKind::Birth,
        critical_temperature: tc,
        point,
        config_before: one_cut.clone(),
        config_after: critical.clone(),
        one_cut: one_cut.clone(),
        critical,
        two_cut_side,
        outer_velocities,
        launch: LaunchCoefficients::Birth { gamma },
    };
    ev.set_direction(approached_from);
    Ok(ev)
}

/// Solves `δ²(½ − log δ) = x` for small `δ > 0`.
pub(crate) fn birth_gap(x: f64) -> f64 {
    let mut d = x.sqrt();
    for _ in 0..100 {
        let next = (x / (0.5 - d.ln())).sqrt();
        if (next - d).abs() <= 1e-16 * d {
            return next;
        }
        d = next;
    }
    d
}

/// Birth seen from the two-cut side: the exterior pair at `index` collapsed.
pub(crate) fn birth_from_two_cut(
    pot: &Potential,
    last: &FlowState,
    index: usize,
    dir: f64,
) -> Result<TransitionEvent> {
    let last = &polish_two_cut(pot, last);
    let b = last.config.beta();
    let v = &last.velocity;
    let (old, newborn) = if index == 2 {
        ([0, 1], [2, 3])
    } else {
        ([2, 3], [0, 1])
    };
    let delta = b[newborn[1]] - b[newborn[0]];
    let point = 0.5 * (b[newborn[0]] + b[newborn[1]]);
    let approx_one = EndpointConfig::new(vec![b[old[0]], b[old[1]]])?;
    let gamma = birth_gamma(pot, &approx_one, point)?.abs();
    let t_est = delta * delta * (0.5 - delta.ln()) / (4.0 * gamma);
    let tc = last.temperature + dir * t_est;
    let dt = tc - last.temperature;
    let guess = EndpointConfig::new(vec![b[old[0]] + v[old[0]] * dt, b[old[1]] + v[old[1]] * dt])?;
    let one_cut = polish_one_cut(pot, tc, &guess)?;
    let side = Side::from_direction(-dir);
    birth_from_one_cut(pot, tc, &one_cut, point, side, side)
}

/// Default upper bound on launch offsets.
pub fn max_launch_offset(tc: f64) -> f64 {
    1e-4 * tc.abs().max(1.0)
}

/// Asymptotic configuration at `T_c ± t` on `side`, before correction.
pub fn critical_launch(event: &TransitionEvent, side: Side, t: f64) -> Result<EndpointConfig> {
    if !(t > 0.0 && t <= max_launch_offset(event.critical_temperature)) {
        return domain(format!(
            "launch offset {t:e} outside (0, {:e}]",
            max_launch_offset(event.critical_temperature)
        ));
    }
    launch_guess(event, side, t)
}

pub(crate) fn launch_guess(event: &TransitionEvent, side: Side, t: f64) -> Result<EndpointConfig> {
    let dt = side.sign() * t;
    let c = event.one_cut.beta();
    let v = &event.outer_velocities;
    let outer = [c[0] + v[0] * dt, c[1] + v[1] * dt];
    if side != event.two_cut_side {
        return EndpointConfig::new(outer.to_vec());
    }
    let x = event.point;
    match event.launch {
        LaunchCoefficients::Merge { amplitude, .. } => {
            let d = amplitude * t.sqrt();
            EndpointConfig::new(vec![outer[0], x - d, x + d, outer[1]])
        }
        LaunchCoefficients::Birth { gamma } => {
            let half = 0.5 * birth_gap(4.0 * gamma.abs() * t);
            if x > c[1] {
                EndpointConfig::new(vec![outer[0], outer[1], x - half, x + half])
            } else {
                EndpointConfig::new(vec![x - half, x + half, outer[0], outer[1]])
            }
        }
    }
}

/// Launch at `T_c ± t` followed by Newton correction of the hodograph residual.
pub fn launch_state(
    pot: &Potential,
    event: &TransitionEvent,
    side: Side,
    t: f64,
    tol: f64,
) -> Result<FlowState> {
    let guess = critical_launch(event, side, t)?;
    let temp = event.critical_temperature + side.sign() * t;
    let config = solve_endpoints(pot, temp, &guess, tol)?;
    FlowState::new(pot, temp, config)
}
