//! Free energy, Lagrange multiplier and temperature derivatives of `F`.
//!
//! `F = −(T/2)(∫Vρ + v₁)` with `v₁ = V(x) − 2T∫ρ(y) log|x − y| dy` for any
//! `x` in the support, which avoids the double logarithmic integral. The second
//! derivative is the regularized period
//! `F″ = 2 lim_{X→∞} [log X − ∫_{β_{2s}}^X P₀/w₁ dx]`, and `F‴` is taken by
//! finite differences of `F″`.

use crate::equilibrium::solve_endpoints;
use crate::equilibrium::{cut_density, cut_integral};
use crate::error::{domain, Error, Result};
use crate::flow::{
    advance, endpoint_velocity, launch_state, FlowState, IntegrateOptions, Side, Trace, Trajectory,
    TransitionEvent, TransitionKind,
};
use crate::geometry::{p_k, EndpointConfig};
use crate::polyops::Potential;
use crate::quadrature::{finite_difference, linear_fit, tanh_sinh};

const QUAD_TOL: f64 = 1e-13;

/// `∫_J ρ(y) log|x − y| dy`, split at `x` when it lies inside a cut.
fn log_potential(pot: &Potential, t: f64, config: &EndpointConfig, x: f64) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..config.phase() {
        let (a, b) = (config.beta()[2 * j], config.beta()[2 * j + 1]);
        let rho = cut_density(pot, t, config, j);
        if a < x && x < b {
            let (xa, bx) = (x - a, b - x);
            total += tanh_sinh(|y, da, d| rho(y, da, bx + d) * d.ln(), a, x, QUAD_TOL)?;
            total += tanh_sinh(|y, d, db| rho(y, xa + d, db) * d.ln(), x, b, QUAD_TOL)?;
        } else {
            total += tanh_sinh(
                |y, da, db| rho(y, da, db) * (x - y).abs().ln(),
                a,
                b,
                QUAD_TOL,
            )?;
        }
    }
    Ok(total)
}

/// `v₁ = V(x) − 2T∫ρ(y) log|x − y| dy` at a chosen point `x` of the support.
pub fn lagrange_multiplier_at(
    pot: &Potential,
    t: f64,
    config: &EndpointConfig,
    x: f64,
) -> Result<f64> {
    if config.cut_index(x).is_none() {
        return domain(format!(
            "x = {x} is not inside the support {:?}",
            config.beta()
        ));
    }
    Ok(pot.eval(x) - 2.0 * t * log_potential(pot, t, config, x)?)
}

/// `v₁` evaluated at the midpoint of the widest cut.
pub fn lagrange_multiplier(pot: &Potential, t: f64, config: &EndpointConfig) -> Result<f64> {
    let b = config.beta();
    let j = (0..config.phase())
        .max_by(|&i, &k| (b[2 * i + 1] - b[2 * i]).total_cmp(&(b[2 * k + 1] - b[2 * k])))
        .expect("at least one cut");
    lagrange_multiplier_at(pot, t, config, 0.5 * (b[2 * j] + b[2 * j + 1]))
}

/// `F = −(T/2)(∫Vρ + v₁)`.
pub fn free_energy(pot: &Potential, t: f64, config: &EndpointConfig) -> Result<f64> {
    let mean_v: f64 = (0..config.phase())
        .map(|j| cut_integral(pot, t, config, j, |x| pot.eval(x)))
        .sum::<Result<f64>>()?;
    Ok(-0.5 * t * (mean_v + lagrange_multiplier(pot, t, config)?))
}

/// `F″ = 2 log((β₂ − β₁)/4)` on a single cut.
pub fn specific_heat_one_cut(config: &EndpointConfig) -> Result<f64> {
    if config.phase() != 1 {
        return domain(format!(
            "one-cut formula needs s = 1, got s = {}",
            config.phase()
        ));
    }
    let b = config.beta();
    Ok(2.0 * ((b[1] - b[0]) / 4.0).ln())
}

/// `F″ = −2∫_0^∞ [P₀/w₁(β_{2s} + u) − 1/(1 + u)] du`, valid for any phase.
pub fn specific_heat(config: &EndpointConfig) -> Result<f64> {
    let p0 = p_k(0, config)?;
    let b = config.beta();
    let last = b[b.len() - 1];
    let offsets: Vec<f64> = b[..b.len() - 1].iter().map(|x| last - x).collect();
    // u = v/(1 − v) maps (0, ∞) onto (0, 1)
    let integrand = |_v: f64, v: f64, rest: f64| {
        let u = v / rest;
        let w2 = offsets.iter().fold(u, |acc, o| acc * (o + u));
        (p0.eval(last + u) / w2.sqrt() - 1.0 / (1.0 + u)) / (rest * rest)
    };
    Ok(-2.0 * tanh_sinh(integrand, 0.0, 1.0, QUAD_TOL)?)
}

/// `F‴ = 2(β̇₂ − β̇₁)/(β₂ − β₁)` on a single cut.
pub fn third_derivative_one_cut(pot: &Potential, config: &EndpointConfig) -> Result<f64> {
    specific_heat_one_cut(config)?;
    let v = endpoint_velocity(pot, config)?;
    let b = config.beta();
    Ok(2.0 * (v[1] - v[0]) / (b[1] - b[0]))
}

/// Newton projection of an integrated state; keeps the input if Newton fails.
fn polish(pot: &Potential, state: &FlowState) -> EndpointConfig {
    solve_endpoints(pot, state.temperature, &state.config, 1e-14)
        .unwrap_or_else(|_| state.config.clone())
}

/// Finite-difference step at temperature `t`.
pub fn stencil_step(t: f64) -> f64 {
    1e-3 * t.abs().max(1.0)
}

/// One row of a [`ThermoCurve`].
#[derive(Clone, Debug)]
pub struct ThermoSample {
    pub temperature: f64,
    pub phase: usize,
    pub free_energy: f64,
    pub multiplier: f64,
    pub d2f: f64,
    pub d3f: f64,
}

#[derive(Clone, Debug)]
pub struct ThermoCurve {
    pub samples: Vec<ThermoSample>,
    /// Finite-difference step used for `d3f`, relative to `max(1, T)`.
    pub step: f64,
}

/// `F″` at `t` on one branch.
fn branch_d2f(pot: &Potential, branch: &Trajectory, t: f64) -> Result<f64> {
    specific_heat(&polish(pot, &branch.state_at(pot, t)?))
}

/// `F‴` at `t` by differentiating `F″` along `branch`: central five-point
/// stencil in the interior, one-sided near the branch ends.
fn branch_d3f(pot: &Potential, branch: &Trajectory, t: f64, h: f64) -> Result<f64> {
    let (lo, hi) = {
        let (a, b) = (branch.start_temperature(), branch.end_temperature());
        (a.min(b), a.max(b))
    };
    let offsets: Vec<f64> = if t - 2.0 * h >= lo && t + 2.0 * h <= hi {
        vec![-2.0, -1.0, 0.0, 1.0, 2.0]
    } else if t + 4.0 * h <= hi {
        vec![0.0, 1.0, 2.0, 3.0, 4.0]
    } else if t - 4.0 * h >= lo {
        vec![0.0, -1.0, -2.0, -3.0, -4.0]
    } else {
        return Err(Error::Numeric(format!(
            "branch [{lo}, {hi}] too short for a stencil at T = {t}"
        )));
    };
    let nodes: Vec<f64> = offsets.iter().map(|k| t + k * h).collect();
    let values = nodes
        .iter()
        .map(|&x| branch_d2f(pot, branch, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(finite_difference(t, &nodes, &values, 1))
}

/// Thermodynamic quantities on a temperature grid from a traced set of phases.
pub fn thermo_curve(pot: &Potential, trace: &Trace, temps: &[f64]) -> Result<ThermoCurve> {
    let mut samples = Vec::with_capacity(temps.len());
    for &t in temps {
        let branch = trace
            .branch_at(t)
            .ok_or_else(|| Error::Domain(format!("T = {t} is not covered by the trace")))?;
        let config = polish(pot, &branch.state_at(pot, t)?);
        let h = stencil_step(t);
        samples.push(ThermoSample {
            temperature: t,
            phase: config.phase(),
            free_energy: free_energy(pot, t, &config)?,
            multiplier: lagrange_multiplier(pot, t, &config)?,
            d2f: specific_heat(&config)?,
            d3f: branch_d3f(pot, branch, t, h)?,
        });
    }
    Ok(ThermoCurve {
        samples,
        step: stencil_step(1.0),
    })
}

/// Polished state at `T_c ± t` on `side`, launched near `T_c` and integrated out.
pub fn side_state(
    pot: &Potential,
    event: &TransitionEvent,
    side: Side,
    t: f64,
) -> Result<EndpointConfig> {
    let tc = event.critical_temperature;
    let t0 = (1e-6 * tc.abs().max(1.0)).min(t);
    let launched = launch_state(pot, event, side, t0, 1e-13)?;
    let target = tc + side.sign() * t;
    let state = advance(pot, &launched, target, &IntegrateOptions::default())?;
    Ok(polish(pot, &state))
}

/// Values of `f` at `T_c ± (t₀ + k h)`, `k = 0..n`, on `side`; returns `(nodes, values)`.
fn one_sided<F>(
    pot: &Potential,
    event: &TransitionEvent,
    side: Side,
    n: usize,
    f: F,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, &EndpointConfig) -> Result<f64>,
{
    let tc = event.critical_temperature;
    let (t0, h) = (1e-6 * tc.abs().max(1.0), stencil_step(tc));
    let mut nodes = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let off = t0 + k as f64 * h;
        let config = side_state(pot, event, side, off)?;
        let temp = tc + side.sign() * off;
        nodes.push(temp);
        values.push(f(temp, &config)?);
    }
    Ok((nodes, values))
}

/// Third-derivative jump at a merge.
#[derive(Clone, Debug)]
pub struct JumpReport {
    pub critical_temperature: f64,
    pub point: f64,
    /// `4/(4 − β²)²`, when the critical configuration is `(−2, β, β, 2)`.
    pub closed_form: Option<f64>,
    /// One-sided `F‴` limits on the two-cut and one-cut sides.
    pub two_cut: f64,
    pub one_cut: f64,
    /// `F‴(two-cut) − F‴(one-cut)` from four-point stencils of `F″`.
    pub numeric: f64,
    /// The same jump from four-point stencils of `F` itself; far noisier.
    pub numeric_from_f: f64,
}

/// `F‴` jump at a merge from one-sided stencils on launch configurations.
pub fn third_derivative_jump(pot: &Potential, event: &TransitionEvent) -> Result<JumpReport> {
    if event.kind != TransitionKind::Merge {
        return domain("the third derivative diverges at a birth; use birth_divergence_check");
    }
    let tc = event.critical_temperature;
    let two = event.two_cut_side;
    let one = two.opposite();
    let d3 = |side: Side| -> Result<(f64, f64)> {
        let (nodes, d2) = one_sided(pot, event, side, 4, |_, c| specific_heat(c))?;
        let (_, f) = one_sided(pot, event, side, 4, |t, c| free_energy(pot, t, c))?;
        Ok((
            finite_difference(tc, &nodes, &d2, 1),
            finite_difference(tc, &nodes, &f, 3),
        ))
    };
    let ((two_cut, two_f), (one_cut, one_f)) = (d3(two)?, d3(one)?);
    let c = event.critical.beta();
    let beta = event.point;
    let closed_form =
        ((c[0] + 2.0).abs() <= 1e-6 && (c[3] - 2.0).abs() <= 1e-6 && beta.abs() < 2.0)
            .then(|| 4.0 / (4.0 - beta * beta).powi(2));
    Ok(JumpReport {
        critical_temperature: tc,
        point: beta,
        closed_form,
        two_cut,
        one_cut,
        numeric: two_cut - one_cut,
        numeric_from_f: two_f - one_f,
    })
}

/// Differences of `F`, `F′`, `F″` between the one-sided limits at a transition.
#[derive(Clone, Debug)]
pub struct ContinuityReport {
    pub kind: TransitionKind,
    pub critical_temperature: f64,
    pub delta_f: f64,
    pub delta_df: f64,
    pub delta_d2f: f64,
}

/// One-sided five-point extrapolations of `F` and its first two derivatives to `T_c`.
pub fn continuity(pot: &Potential, event: &TransitionEvent) -> Result<ContinuityReport> {
    let tc = event.critical_temperature;
    let limits = |side: Side| -> Result<[f64; 3]> {
        let (nodes, f) = one_sided(pot, event, side, 5, |t, c| free_energy(pot, t, c))?;
        Ok([0, 1, 2].map(|m| finite_difference(tc, &nodes, &f, m)))
    };
    let (a, b) = (limits(Side::Above)?, limits(Side::Below)?);
    Ok(ContinuityReport {
        kind: event.kind,
        critical_temperature: tc,
        delta_f: (a[0] - b[0]).abs(),
        delta_df: (a[1] - b[1]).abs(),
        delta_d2f: (a[2] - b[2]).abs(),
    })
}

/// Fit of the two-cut `F‴` excess near a birth to `A t^p (log t)⁻²`.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub critical_temperature: f64,
    /// `(t, F‴₂(T̃_c ± t) − F‴₁(T̃_c))`.
    pub excess: Vec<(f64, f64)>,
    pub exponent: f64,
    pub amplitude: f64,
    /// Amplitude with the differencing step halved.
    pub amplitude_refined: f64,
    /// Relative amplitude change under step halving is below 10%.
    pub stable: bool,
    /// Every excess was finite with a common sign; otherwise the fit means nothing.
    pub conclusive: bool,
}

/// Offsets from `T̃_c` used for the divergence fit.
pub const DIVERGENCE_OFFSETS: [f64; 7] = [1e-3, 5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5];

/// Checks that `F‴` on the two-cut side of a birth diverges like `t⁻¹(log t)⁻²`.
pub fn birth_divergence_check(
    pot: &Potential,
    event: &TransitionEvent,
) -> Result<DivergenceReport> {
    if event.kind != TransitionKind::Birth {
        return domain("divergence check applies to births only");
    }
    let side = event.two_cut_side;
    let baseline = third_derivative_one_cut(pot, &event.one_cut)?;
    let excess_at = |t: f64, frac: f64| -> Result<f64> {
        let d = frac * t;
        let lo = specific_heat(&side_state(pot, event, side, t - d)?)?;
        let hi = specific_heat(&side_state(pot, event, side, t + d)?)?;
        // derivative in T, and T moves opposite to the offset on the lower side
        Ok(side.sign() * (hi - lo) / (2.0 * d) - baseline)
    };
    let fit = |frac: f64| -> Result<(Vec<(f64, f64)>, f64, f64)> {
        let excess = DIVERGENCE_OFFSETS
            .iter()
            .map(|&t| excess_at(t, frac).map(|e| (t, e)))
            .collect::<Result<Vec<_>>>()?;
        let x: Vec<f64> = excess.iter().map(|(t, _)| t.ln()).collect();
        let y: Vec<f64> = excess
            .iter()
            .map(|(t, e)| (e.abs() * t.ln().powi(2)).ln())
            .collect();
        let (a, p) = linear_fit(&x, &y);
        Ok((excess, p, a.exp()))
    };
    let (excess, exponent, amplitude) = fit(0.1)?;
    let (_, _, amplitude_refined) = fit(0.05)?;
    let sign = excess[0].1.signum();
    let conclusive = excess
        .iter()
        .all(|(_, e)| e.is_finite() && e.signum() == sign)
        && exponent.is_finite();
    Ok(DivergenceReport {
        critical_temperature: event.critical_temperature,
        excess,
        exponent,
        amplitude,
        amplitude_refined,
        stable: ((amplitude_refined - amplitude) / amplitude).abs() < 0.1,
        conclusive,
    })
}
