//! Equilibrium density, normalization, hodograph residuals and admissibility.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::geometry::{subtract_gap_average, EndpointConfig};
use crate::polyops::{
    branch_polynomial_part_unchecked, polynomial_part_unchecked, Polynomial, Potential,
};
use crate::quadrature::{gauss_legendre, solve_linear, tanh_sinh};

const QUAD_TOL: f64 = 1e-13;

/// Residual level above which a configuration is not treated as a solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Half-width of the truncated exterior regions checked for admissibility.
pub const EXTERIOR_REACH: f64 = 10.0;

/// Samples per region for the exterior and gap inequalities.
pub const REGION_SAMPLES: usize = 512;

/// `h(z) = (V′(z)/w₁(z))_⊕`; degenerate configurations are accepted.
pub fn density_polynomial(pot: &Potential, config: &EndpointConfig) -> Polynomial {
    polynomial_part_unchecked(&pot.derivative(), config.beta())
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("temperature must be positive, got {t}"))
    }
}

/// `|w(x)|` inside cut `(a, b)` from the endpoint distances, without cancellation.
fn abs_branch_in_cut(config: &EndpointConfig, cut_left: usize, x: f64, da: f64, db: f64) -> f64 {
    let mut prod = da * db;
    for (i, b) in config.beta().iter().enumerate() {
        if i != cut_left && i != cut_left + 1 {
            prod *= (x - b).abs();
        }
    }
    prod.sqrt()
}

/// Sign of `w₁₊/i` on the cut `k` counted from the right.
fn cut_sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `ρ(x) = h(x) w₁₊(x)/(2πiT)`; on the `k`-th cut from the right `w₁₊ = i(−1)^k |w|`.
pub fn density_at(pot: &Potential, t: f64, config: &EndpointConfig, x: f64) -> Result<f64> {
    check_temperature(t)?;
    let Some(k) = config.cut_index(x) else {
        return domain(format!(
            "x = {x} is not inside a cut of {:?}",
            config.beta()
        ));
    };
    let h = density_polynomial(pot, config);
    Ok(cut_sign(k) * h.eval(x) * config.abs_sqrt_product(x) / (2.0 * PI * t))
}

/// `ρ` on cut `j` (counted from the left) as a function of `(x, x − a, b − x)`
/// with `(a, b)` the cut, so the edge factors stay accurate.
pub(crate) fn cut_density<'a>(
    pot: &Potential,
    t: f64,
    config: &'a EndpointConfig,
    j: usize,
) -> impl Fn(f64, f64, f64) -> f64 + 'a {
    let h = density_polynomial(pot, config);
    let sign = cut_sign(config.phase() - 1 - j);
    let scale = 1.0 / (2.0 * PI * t);
    move |x, da, db| sign * scale * h.eval(x) * abs_branch_in_cut(config, 2 * j, x, da, db)
}

/// `∫ρ` over cut `j` (counted from the left) of an arbitrary weight `g(x)ρ(x)`.
pub(crate) fn cut_integral<G: Fn(f64) -> f64>(
    pot: &Potential,
    t: f64,
    config: &EndpointConfig,
    j: usize,
    g: G,
) -> Result<f64> {
    let rho = cut_density(pot, t, config, j);
    let (a, b) = (config.beta()[2 * j], config.beta()[2 * j + 1]);
    tanh_sinh(|x, da, db| g(x) * rho(x, da, db), a, b, QUAD_TOL)
}

/// Total mass `∫_J ρ dx` by endpoint-absorbing quadrature on each cut.
pub fn density_norm(pot: &Potential, t: f64, config: &EndpointConfig) -> Result<f64> {
    check_temperature(t)?;
    (0..config.phase())
        .map(|j| cut_integral(pot, t, config, j, |_| 1.0))
        .sum()
}

/// Density samples on every cut.
#[derive(Clone, Debug)]
pub struct DensityProfile {
    pub config: EndpointConfig,
    pub temperature: f64,
    /// `(x, ρ(x))` per cut, left to right; each cut includes both endpoints.
    pub cuts: Vec<Vec<(f64, f64)>>,
    pub norm: f64,
}

/// Samples `ρ` at `n` Chebyshev-Lobatto points per cut and integrates the norm.
pub fn density_profile(
    pot: &Potential,
    t: f64,
    config: &EndpointConfig,
    n: usize,
) -> Result<DensityProfile> {
    check_temperature(t)?;
    let h = density_polynomial(pot, config);
    let s = config.phase();
    let n = n.max(2);
    let mut cuts = Vec::with_capacity(s);
    for j in 0..s {
        let (a, b) = (config.beta()[2 * j], config.beta()[2 * j + 1]);
        let sign = cut_sign(s - 1 - j);
        let pts = (0..n)
            .map(|i| {
                let x = a + (b - a) * 0.5 * (1.0 - (PI * i as f64 / (n - 1) as f64).cos());
                let rho = if i == 0 || i == n - 1 {
                    0.0
                } else {
                    sign * h.eval(x) * config.abs_sqrt_product(x) / (2.0 * PI * t)
                };
                (x, rho)
            })
            .collect();
        cuts.push(pts);
    }
    Ok(DensityProfile {
        config: config.clone(),
        temperature: t,
        cuts,
        norm: density_norm(pot, t, config)?,
    })
}

/// `Σ_k t_k (δ_{k0} + k/2)(z^{k−1} w₁)_⊕` with `t₀ = −T`, before normalization.
fn hodograph_principal(pot: &Potential, t: f64, config: &EndpointConfig) -> Polynomial {
    let beta = config.beta();
    let mut q = branch_polynomial_part_unchecked(-1, beta).scale(-t);
    for k in 1..=pot.degree() {
        let tk = pot.coupling(k);
        if tk != 0.0 {
            let part =
                branch_polynomial_part_unchecked(k as i64 - 1, beta).scale(tk * k as f64 / 2.0);
            q = &q + &part;
        }
    }
    q
}

/// The polynomial `Σ_k t_k P_k(z, β)` whose values at the endpoints are the
/// hodograph residuals.
pub fn hodograph_polynomial(
    pot: &Potential,
    t: f64,
    config: &EndpointConfig,
) -> Result<Polynomial> {
    let q = hodograph_principal(pot, t, config);
    match config.phase() {
        1 => Ok(q),
        _ => subtract_gap_average(&q, config),
    }
}

/// Residuals `Σ_k t_k P_k(β_i, β)` with `t₀ = −T`; zero on an endpoint solution.
pub fn hodograph_residual(pot: &Potential, t: f64, config: &EndpointConfig) -> Result<Vec<f64>> {
    check_temperature(t)?;
    if config.phase() > pot.degree() / 2 {
        return domain(format!(
            "{} cuts exceed the bound deg V/2 = {}",
            config.phase(),
            pot.degree() / 2
        ));
    }
    let q = hodograph_polynomial(pot, t, config)?;
    Ok(config.beta().iter().map(|&b| q.eval(b)).collect())
}

/// Largest absolute hodograph residual.
pub fn residual_norm(pot: &Potential, t: f64, config: &EndpointConfig) -> Result<f64> {
    Ok(hodograph_residual(pot, t, config)?
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs())))
}

/// Newton iteration on the hodograph residuals with a finite-difference
/// Jacobian and backtracking that keeps the endpoints ordered.
pub fn solve_endpoints(
    pot: &Potential,
    t: f64,
    guess: &EndpointConfig,
    tol: f64,
) -> Result<EndpointConfig> {
    check_temperature(t)?;
    let n = guess.beta().len();
    let mut beta = guess.beta().to_vec();
    let eval = |b: &[f64]| -> Option<Vec<f64>> {
        let c = EndpointConfig::new(b.to_vec()).ok()?;
        hodograph_residual(pot, t, &c).ok()
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut res = eval(&beta)
        .ok_or_else(|| Error::Seed("initial guess is not a valid configuration".into()))?;
    for _ in 0..60 {
        if norm(&res) <= tol {
            return EndpointConfig::new(beta);
        }
        let scale = beta.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let gap = beta
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let step = (1e-7 * scale).min(0.1 * gap);
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut bp = beta.clone();
            let mut bm = beta.clone();
            bp[j] += step;
            bm[j] -= step;
            let (rp, rm) = match (eval(&bp), eval(&bm)) {
                (Some(rp), Some(rm)) => (rp, rm),
                _ => {
                    return Err(Error::Seed(
                        "finite-difference probe left the valid region".into(),
                    ))
                }
            };
            for i in 0..n {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * step);
            }
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let delta = solve_linear(jac, rhs)
            .ok_or_else(|| Error::Seed("singular Jacobian in endpoint Newton iteration".into()))?;
        let mut lambda = 1.0;
        let current = norm(&res);
        loop {
            let trial: Vec<f64> = beta
                .iter()
                .zip(&delta)
                .map(|(b, d)| b + lambda * d)
                .collect();
            if let Some(r) = eval(&trial) {
                if norm(&r) < current || lambda < 1e-3 && norm(&r) < 10.0 * current {
                    beta = trial;
                    res = r;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::Seed(format!(
                    "endpoint Newton iteration stalled at residual {current:e}"
                )));
            }
        }
    }
    if norm(&res) <= tol {
        return EndpointConfig::new(beta);
    }
    Err(Error::Seed(format!(
        "endpoint Newton iteration did not converge (residual {:e})",
        norm(&res)
    )))
}

/// A region off the support where a variational inequality must hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// `x < β₁`
    LeftExterior,
    /// Gap `j` between cut `j` and cut `j + 1`, counted from the left.
    Gap(usize),
    /// `x > β_{2s}`
    RightExterior,
}

/// Inequality check on one region.
#[derive(Clone, Debug)]
pub struct RegionMargin {
    pub region: Region,
    /// Minimum of `I(x)/d^{3/2}` over the samples, `d` the distance to the
    /// nearest support endpoint; `I(x) = ∫_{edge}^x h w₁`.
    pub margin: f64,
    /// Where the minimum was attained.
    pub argmin: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Regular,
    Singular,
    Inadmissible,
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub residual: f64,
    pub density_positive: bool,
    pub h_nonvanishing_on_support: bool,
    pub exterior_inequalities: Vec<RegionMargin>,
    pub verdict: Verdict,
}

fn region_bounds(config: &EndpointConfig, region: Region) -> (f64, f64, f64) {
    let b = config.beta();
    let last = *b.last().unwrap();
    match region {
        Region::LeftExterior => (b[0] - EXTERIOR_REACH, b[0], b[0]),
        Region::RightExterior => (last, last + EXTERIOR_REACH, last),
        Region::Gap(j) => (b[2 * j + 1], b[2 * j + 2], b[2 * j + 1]),
    }
}

fn regions(config: &EndpointConfig) -> Vec<Region> {
    let mut r = vec![Region::LeftExterior];
    r.extend((0..config.phase() - 1).map(Region::Gap));
    r.push(Region::RightExterior);
    r
}

/// `I(x) = ∫_{edge}^{x} h(y) w₁(y) dy` at every `x` of a sorted list inside one region.
fn region_integrals(
    h: &Polynomial,
    config: &EndpointConfig,
    region: Region,
    xs: &[f64],
) -> Vec<f64> {
    let (_, _, anchor) = region_bounds(config, region);
    let f = |y: f64| h.eval(y) * config.branch_real(y);
    let (gx, gw) = gauss_legendre(12);
    let gl = |a: f64, b: f64| -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| w * f(c + r * x))
            .sum::<f64>()
            * r
    };
    // walk outward from the anchor so each piece is a short smooth integral
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| (xs[i] - anchor).abs().total_cmp(&(xs[j] - anchor).abs()));
    let mut out = vec![0.0; xs.len()];
    let mut prev_x = anchor;
    let mut acc = 0.0;
    for (n, &i) in order.iter().enumerate() {
        let x = xs[i];
        let piece = if n == 0 {
            tanh_sinh(|y, _, _| f(y), anchor, x, QUAD_TOL).unwrap_or_else(|_| gl(anchor, x))
        } else {
            gl(prev_x, x)
        };
        acc += piece;
        out[i] = acc;
        prev_x = x;
    }
    out
}

fn region_margin(h: &Polynomial, config: &EndpointConfig, region: Region) -> RegionMargin {
    let (lo, hi, anchor) = region_bounds(config, region);
    let n = REGION_SAMPLES;
    let mut xs: Vec<f64> = (1..=n)
        .map(|j| lo + (hi - lo) * 0.5 * (1.0 - (PI * j as f64 / (n + 1) as f64).cos()))
        .collect();
    xs.extend(h.real_roots().into_iter().filter(|&r| lo < r && r < hi));
    xs.sort_by(f64::total_cmp);
    let vals = region_integrals(h, config, region, &xs);
    let far_edge = match region {
        Region::Gap(_) => Some(hi),
        _ => None,
    };
    let mut margin = f64::INFINITY;
    let mut argmin = anchor;
    for (&x, &v) in xs.iter().zip(&vals) {
        let mut d = (x - anchor).abs();
        if let Some(e) = far_edge {
            d = d.min((e - x).abs());
        }
        let m = v / d.powf(1.5);
        if m < margin {
            margin = m;
            argmin = x;
        }
    }
    RegionMargin {
        region,
        margin,
        argmin,
        holds: margin > 0.0,
    }
}

/// Margins of the variational inequalities on every gap and both exteriors.
pub fn inequality_margins(pot: &Potential, config: &EndpointConfig) -> Vec<RegionMargin> {
    let h = density_polynomial(pot, config);
    regions(config)
        .into_iter()
        .map(|r| region_margin(&h, config, r))
        .collect()
}

/// Smallest value of `I` at its interior local minima off the support, with the
/// location. Local minima sit at roots of `h` where `h w₁` changes sign from
/// negative to positive; a new cut is born where this value reaches zero.
pub fn saturation_monitor(pot: &Potential, config: &EndpointConfig) -> Option<(f64, f64)> {
    let h = density_polynomial(pot, config);
    let dh = h.derivative();
    let mut best: Option<(f64, f64)> = None;
    for region in regions(config) {
        let (lo, hi, _) = region_bounds(config, region);
        let roots: Vec<f64> = h
            .real_roots()
            .into_iter()
            .filter(|&r| lo < r && r < hi && dh.eval(r) * config.branch_real(r) > 0.0)
            .collect();
        if roots.is_empty() {
            continue;
        }
        let vals = region_integrals(&h, config, region, &roots);
        for (&x, &v) in roots.iter().zip(&vals) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((x, v));
            }
        }
    }
    best
}

/// Regularity verdict for a candidate configuration at temperature `T`.
pub fn admissibility(pot: &Potential, t: f64, config: &EndpointConfig) -> AdmissibilityReport {
    let residual = residual_norm(pot, t, config).unwrap_or(f64::INFINITY);
    if !(residual <= RESIDUAL_TOLERANCE) {
        return AdmissibilityReport {
            residual,
            density_positive: false,
            h_nonvanishing_on_support: false,
            exterior_inequalities: Vec::new(),
            verdict: Verdict::Inadmissible,
        };
    }
    let h = density_polynomial(pot, config);
    let s = config.phase();
    let beta = config.beta();
    let mut density_positive = true;
    let mut density_clearly_negative = false;
    for j in 0..s {
        let (a, b) = (beta[2 * j], beta[2 * j + 1]);
        let sign = cut_sign(s - 1 - j);
        for i in 1..64 {
            let x = a + (b - a) * 0.5 * (1.0 - (PI * i as f64 / 64.0).cos());
            let v = sign * h.eval(x);
            if v <= 0.0 {
                density_positive = false;
            }
            if v < -1e-8 {
                density_clearly_negative = true;
            }
        }
    }
    let root_on_support = h
        .real_roots()
        .into_iter()
        .any(|r| (0..s).any(|j| beta[2 * j] <= r && r <= beta[2 * j + 1]));
    let h_nonvanishing_on_support =
        !root_on_support && beta.iter().all(|&b| h.eval(b).abs() > 1e-12);
    let exterior_inequalities = inequality_margins(pot, config);
    let violated = exterior_inequalities.iter().any(|m| m.margin < -1e-8);
    let all_hold = exterior_inequalities.iter().all(|m| m.holds);
    let verdict = if violated || density_clearly_negative {
        Verdict::Inadmissible
    } else if density_positive && h_nonvanishing_on_support && all_hold {
        Verdict::Regular
    } else {
        Verdict::Singular
    };
    AdmissibilityReport {
        residual,
        density_positive,
        h_nonvanishing_on_support,
        exterior_inequalities,
        verdict,
    }
}
