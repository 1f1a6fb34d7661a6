//! Endpoint configurations and the normalized polynomials `P_k(z, β)`.
//!
//! For one cut `P_k = (δ_{k0} + k/2)(z^{k−1} w₁)_⊕`. For two cuts a constant
//! `c_{k0}` is added so that `P_k/w₁` integrates to zero over the gap
//! `(β₂, β₃)`. That constant is minus the gap average of the polynomial part
//! against the weight `1/√∏(x − β_i)`, so everything reduces to the normalized
//! gap moments `μ_n = ∫x^n/√R / ∫1/√R`. The first three come from complete
//! elliptic integrals, the rest from an exact integration-by-parts recurrence.

use crate::elliptic::{ellip_e_complement, pi_over_k_complement};
use crate::error::{domain, Result};
use crate::polyops::{branch_polynomial_part_unchecked, Polynomial};

/// Largest `k` accepted by the `P_k` constructors.
pub const MAX_ORDER: usize = 16;

/// Sorted endpoints `β₁ < … < β_{2s}` of an `s`-cut support, `s ∈ {1, 2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointConfig {
    beta: Vec<f64>,
}

impl EndpointConfig {
    /// Validates strict ordering and length 2 or 4.
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        Self::check_shape(&beta)?;
        if beta.windows(2).any(|w| !(w[0] < w[1])) {
            return domain(format!("endpoints must be strictly increasing: {beta:?}"));
        }
        Ok(Self { beta })
    }

    /// A critical configuration where one adjacent pair may coincide, such as
    /// `(−2, β, β, 2)` at a merge or `(β₁, β₂, β̃, β̃)` at a birth.
    ///
    /// Such configurations are limits of regular ones; `P_k`, `C(β)` and the gap
    /// moments are evaluated by continuity.
    pub fn degenerate(beta: Vec<f64>) -> Result<Self> {
        Self::check_shape(&beta)?;
        if beta.windows(2).any(|w| !(w[0] <= w[1])) {
            return domain(format!("endpoints must be nondecreasing: {beta:?}"));
        }
        let ties = beta.windows(2).filter(|w| w[0] == w[1]).count();
        if ties > 1 {
            return domain(format!("at most one coincident pair allowed: {beta:?}"));
        }
        if beta.len() == 2 && ties == 1 {
            return domain("a one-cut support cannot collapse to a point");
        }
        Ok(Self { beta })
    }

    fn check_shape(beta: &[f64]) -> Result<()> {
        if beta.len() != 2 && beta.len() != 4 {
            return domain(format!(
                "only one- and two-cut phases are supported, got {} endpoints",
                beta.len()
            ));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return domain("endpoints must be finite");
        }
        Ok(())
    }

    /// Number of cuts `s`.
    pub fn phase(&self) -> usize {
        self.beta.len() / 2
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn into_beta(self) -> Vec<f64> {
        self.beta
    }

    /// `true` if some adjacent pair coincides.
    pub fn is_degenerate(&self) -> bool {
        self.beta.windows(2).any(|w| w[0] == w[1])
    }

    /// Smallest distance between adjacent endpoints.
    pub fn min_gap(&self) -> f64 {
        self.beta
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `∏(x − β_i)` as a polynomial.
    pub fn product_polynomial(&self) -> Polynomial {
        self.beta.iter().fold(Polynomial::constant(1.0), |acc, &b| {
            &acc * &Polynomial::linear_root(b)
        })
    }

    /// `|∏(x − β_i)|^{1/2}`.
    pub fn abs_sqrt_product(&self, x: f64) -> f64 {
        self.beta
            .iter()
            .map(|b| (x - b).abs())
            .product::<f64>()
            .sqrt()
    }

    /// Real value of the branch `w₁(x)` off the cuts: `|w|` times `(−1)` to the
    /// number of cuts lying entirely to the right of `x`.
    pub fn branch_real(&self, x: f64) -> f64 {
        let right = self.beta.iter().filter(|&&b| b > x).count();
        let sign = if (right / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.abs_sqrt_product(x)
    }

    /// Index `k` of the cut containing `x`, counted from the right (`0` is the
    /// rightmost), or `None` when `x` is not strictly inside a cut.
    pub fn cut_index(&self, x: f64) -> Option<usize> {
        let s = self.phase();
        (0..s).find_map(|j| {
            let (a, b) = (self.beta[2 * j], self.beta[2 * j + 1]);
            (a < x && x < b).then_some(s - 1 - j)
        })
    }

    /// Elliptic complements `(1 − r, 1 − s)` of a two-cut configuration.
    pub fn elliptic_complements(&self) -> Result<(f64, f64)> {
        let b = self.require_two_cut()?;
        let n1 = (b[3] - b[2]) / (b[3] - b[1]);
        let m1 = (b[3] - b[2]) * (b[1] - b[0]) / ((b[2] - b[0]) * (b[3] - b[1]));
        Ok((n1, m1))
    }

    /// Elliptic arguments `(r, s)` of a two-cut configuration.
    pub fn elliptic_args(&self) -> Result<(f64, f64)> {
        let b = self.require_two_cut()?;
        let r = (b[2] - b[1]) / (b[3] - b[1]);
        let s = (b[3] - b[0]) * (b[2] - b[1]) / ((b[2] - b[0]) * (b[3] - b[1]));
        Ok((r, s))
    }

    fn require_two_cut(&self) -> Result<&[f64]> {
        if self.phase() != 2 {
            return domain("operation requires a two-cut configuration");
        }
        Ok(&self.beta)
    }

    fn require_one_cut(&self) -> Result<&[f64]> {
        if self.phase() != 1 {
            return domain("operation requires a one-cut configuration");
        }
        Ok(&self.beta)
    }
}

/// `(δ_{k0} + k/2)(z^{k−1} w₁)_⊕`, the part of `P_k` shared by both phases.
fn principal_part(k: usize, config: &EndpointConfig) -> Result<Polynomial> {
    if k > MAX_ORDER {
        return domain(format!("P_k supported up to k = {MAX_ORDER}, got {k}"));
    }
    let factor = if k == 0 { 1.0 } else { k as f64 / 2.0 };
    Ok(branch_polynomial_part_unchecked(k as i64 - 1, config.beta()).scale(factor))
}

/// One-cut `P_k(z) = (δ_{k0} + k/2)(z^{k−1} √((z−β₁)(z−β₂)))_⊕`.
pub fn p_k_one_cut(k: usize, config: &EndpointConfig) -> Result<Polynomial> {
    config.require_one_cut()?;
    principal_part(k, config)
}

/// Ratios `(Π/K, E/K)` and the product `(β₄ − β₃)Π/K` at a two-cut
/// configuration, with the limits at coincident pairs.
struct GapElliptic {
    e_over_k: f64,
    /// `(β₄ − β₃) Π/K`
    scaled_pi_over_k: f64,
}

fn gap_elliptic(b: &[f64]) -> GapElliptic {
    let delta = b[3] - b[2];
    if delta == 0.0 {
        // β₃ = β₄: K → ∞ with (β₄ − β₃)Π/K → 0
        return GapElliptic {
            e_over_k: 0.0,
            scaled_pi_over_k: 0.0,
        };
    }
    let n1 = delta / (b[3] - b[1]);
    let m1 = delta * (b[1] - b[0]) / ((b[2] - b[0]) * (b[3] - b[1]));
    if m1 == 0.0 {
        // β₁ = β₂: Π/K → 1/(1 − r), E/K → 0
        return GapElliptic {
            e_over_k: 0.0,
            scaled_pi_over_k: delta / n1,
        };
    }
    let k = crate::elliptic::ellip_k_complement(m1);
    GapElliptic {
        e_over_k: ellip_e_complement(m1) / k,
        scaled_pi_over_k: delta * pi_over_k_complement(n1, m1),
    }
}

/// Normalized gap moments `μ_n = ∫_{β₂}^{β₃} x^n/√R dx / ∫_{β₂}^{β₃} 1/√R dx`
/// for `n = 0..=n_max`, with `R(x) = ∏(x − β_i)`.
pub fn gap_moments(config: &EndpointConfig, n_max: usize) -> Result<Vec<f64>> {
    let b = config.require_two_cut()?;
    let ge = gap_elliptic(b);
    let sum: f64 = b.iter().sum();
    let mut mu = vec![1.0, b[3] - ge.scaled_pi_over_k];
    let mu2 = 0.5
        * (2.0 * b[3] * b[3]
            - (b[3] - b[2]) * (b[3] - b[1])
            - (b[2] - b[0]) * (b[3] - b[1]) * ge.e_over_k
            - sum * ge.scaled_pi_over_k);
    mu.push(mu2);
    // ∫ d/dx (x^m √R) = 0 over the gap gives Σ_j r_j (m + j/2) μ_{m+j−1} = 0
    let r = config.product_polynomial();
    for m in 0..n_max.saturating_sub(2) {
        let mut acc = 0.0;
        for j in 0..4 {
            let idx = m + j;
            if idx == 0 {
                continue;
            }
            acc += r.coeff(j) * (m as f64 + j as f64 / 2.0) * mu[idx - 1];
        }
        mu.push(-acc / (m as f64 + 2.0));
    }
    mu.truncate(n_max + 1);
    Ok(mu)
}

/// `q − Σ q_n μ_n`: shifts a polynomial so its gap average vanishes.
pub fn subtract_gap_average(q: &Polynomial, config: &EndpointConfig) -> Result<Polynomial> {
    let n = q.degree().unwrap_or(0);
    let mu = gap_moments(config, n)?;
    let avg: f64 = q.coeffs().iter().zip(&mu).map(|(a, m)| a * m).sum();
    Ok(q - &Polynomial::constant(avg))
}

/// Normalization constant `c_{k0}` of the two-cut `P_k`.
pub fn c_k0_two_cut(k: usize, config: &EndpointConfig) -> Result<f64> {
    config.require_two_cut()?;
    let q = principal_part(k, config)?;
    let mu = gap_moments(config, q.degree().unwrap_or(0))?;
    Ok(-q.coeffs().iter().zip(&mu).map(|(a, m)| a * m).sum::<f64>())
}

/// Two-cut `P_k(z) = (δ_{k0} + k/2)(z^{k−1} w₁)_⊕ + c_{k0}`.
pub fn p_k_two_cut(k: usize, config: &EndpointConfig) -> Result<Polynomial> {
    config.require_two_cut()?;
    subtract_gap_average(&principal_part(k, config)?, config)
}

/// `P_k` for either phase.
pub fn p_k(k: usize, config: &EndpointConfig) -> Result<Polynomial> {
    match config.phase() {
        1 => p_k_one_cut(k, config),
        _ => p_k_two_cut(k, config),
    }
}

/// Root `C(β) = β₄ − (β₄ − β₃)Π(r, s)/K(s)` of the two-cut `P₀`.
pub fn c_center(config: &EndpointConfig) -> Result<f64> {
    let b = config.require_two_cut()?;
    Ok(b[3] - gap_elliptic(b).scaled_pi_over_k)
}

/// Tolerance used to decide that an adjacent pair has coalesced.
pub fn coalescence_tolerance(beta: f64) -> f64 {
    1e-9 * beta.abs().max(1.0)
}

/// Drops the coalesced pair `(β_l, β_{l+1})` (1-based `l`) of a two-cut
/// configuration, returning the one-cut configuration.
pub fn reduce_config(config: &EndpointConfig, l: usize) -> Result<EndpointConfig> {
    let b = config.require_two_cut()?;
    if !(1..=3).contains(&l) {
        return domain(format!("pair index l = {l} out of range 1..=3"));
    }
    let (x, y) = (b[l - 1], b[l]);
    if (y - x).abs() > coalescence_tolerance(x) {
        return domain(format!(
            "endpoints β_{l} = {x} and β_{} = {y} have not coalesced",
            l + 1
        ));
    }
    let kept: Vec<f64> = b
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != l - 1 && i != l)
        .map(|(_, &v)| v)
        .collect();
    EndpointConfig::new(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_chebyshev_gap, tanh_sinh};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(b: &[f64]) -> EndpointConfig {
        EndpointConfig::new(b.to_vec()).unwrap()
    }

    /// `∫_{β₂}^{β₃} p(x)/√R(x) dx` by tanh-sinh, with `R > 0` on the gap.
    fn gap_integral(p: &Polynomial, b: &[f64]) -> f64 {
        tanh_sinh(
            |x, da, db| p.eval(x) / ((x - b[0]) * da * db * (b[3] - x)).sqrt(),
            b[1],
            b[2],
            1e-13,
        )
        .unwrap()
    }

    fn gap_scale(b: &[f64]) -> f64 {
        gap_integral(&Polynomial::constant(1.0), b)
    }

    #[test]
    fn one_cut_low_order() {
        let (b1, b2) = (-1.3, 2.1);
        let c = cfg(&[b1, b2]);
        let p0 = p_k_one_cut(0, &c).unwrap();
        assert_eq!(p0.degree(), Some(0));
        assert_abs_diff_eq!(p0.coeff(0), 1.0, epsilon = 1e-15);
        let p1 = p_k_one_cut(1, &c).unwrap();
        assert_abs_diff_eq!(p1.coeff(1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p1.coeff(0), -(b1 + b2) / 4.0, epsilon = 1e-15);
        let p2 = p_k_one_cut(2, &c).unwrap();
        assert_abs_diff_eq!(p2.coeff(2), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.coeff(1), -(b1 + b2) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.coeff(0), -(b1 - b2).powi(2) / 8.0, epsilon = 1e-14);
        assert!(p_k_one_cut(0, &cfg(&[-2.0, 0.6, 1.4, 1.9])).is_err());
    }

    #[test]
    fn two_cut_p0_normalization_and_closed_form() {
        let b = [-2.0, 0.6, 1.4, 1.9];
        let c = cfg(&b);
        let p0 = p_k_two_cut(0, &c).unwrap();
        assert!(gap_integral(&p0, &b).abs() / gap_scale(&b) < 1e-9);
        let (r, s) = c.elliptic_args().unwrap();
        let want = b[3] - (b[3] - b[2]) * crate::elliptic::pi_over_k(r, s).unwrap();
        assert_abs_diff_eq!(c_center(&c).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(p0.eval(want), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn c10_matches_elliptic_closed_form() {
        let b = [-2.0, 0.6, 1.4, 1.9];
        let c = cfg(&b);
        let (_, s) = c.elliptic_args().unwrap();
        let e_over_k = crate::elliptic::ellip_e(s).unwrap() / crate::elliptic::ellip_k(s).unwrap();
        let want =
            (b[0] * b[3] + b[1] * b[2]) / 4.0 + (b[3] - b[1]) * (b[2] - b[0]) * e_over_k / 4.0;
        let p1 = p_k_two_cut(1, &c).unwrap();
        // P₁ = z²/2 − Σβ z/4 + c₁₀
        assert_abs_diff_eq!(p1.coeff(2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p1.coeff(1), -b.iter().sum::<f64>() / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p1.coeff(0), want, epsilon = 1e-12);
        assert!(gap_integral(&p1, &b).abs() / gap_scale(&b) < 1e-9);
    }

    #[test]
    fn symmetric_config_has_centered_p0() {
        let c = cfg(&[-1.7, -0.4, 0.4, 1.7]);
        assert_abs_diff_eq!(c_center(&c).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c_k0_two_cut(0, &c).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c_k0_two_cut(2, &c).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn degenerate_p0_is_linear_root() {
        let beta = 0.7;
        for b in [
            [-2.0, beta, beta, 2.0],
            [-2.0, -1.0, beta, beta],
            [beta, beta, 1.5, 2.0],
        ] {
            let c = EndpointConfig::degenerate(b.to_vec()).unwrap();
            let p0 = p_k_two_cut(0, &c).unwrap();
            assert_abs_diff_eq!(p0.coeff(1), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p0.coeff(0), -beta, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(
            c_center(&EndpointConfig::degenerate(vec![-2.0, 1.0, 1.0, 2.0]).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn degeneration_identity_at_merge() {
        let beta = 0.35;
        let c2 = EndpointConfig::degenerate(vec![-2.0, beta, beta, 2.0]).unwrap();
        let c1 = cfg(&[-2.0, 2.0]);
        let lin = Polynomial::linear_root(beta);
        for k in 0..=2 {
            let lhs = p_k_two_cut(k, &c2).unwrap();
            let rhs = &lin * &p_k_one_cut(k, &c1).unwrap();
            for i in 0..20 {
                let z = -3.0 + 0.3 * i as f64;
                assert_abs_diff_eq!(lhs.eval(z), rhs.eval(z), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn reduce_config_drops_pair() {
        let c = EndpointConfig::degenerate(vec![-2.0, 0.3, 0.3, 2.0]).unwrap();
        assert_eq!(reduce_config(&c, 2).unwrap().beta(), &[-2.0, 2.0]);
        let c = EndpointConfig::degenerate(vec![-2.0, -1.0, 1.2, 1.2]).unwrap();
        assert_eq!(reduce_config(&c, 3).unwrap().beta(), &[-2.0, -1.0]);
        let c = cfg(&[-2.0, 0.3, 0.31, 2.0]);
        assert!(reduce_config(&c, 2).is_err());
        let c = cfg(&[-2.0, 0.3, 0.3 + 1e-12, 2.0]);
        assert_eq!(reduce_config(&c, 2).unwrap().beta(), &[-2.0, 2.0]);
    }

    #[test]
    fn moments_match_gauss_chebyshev() {
        let b = [-2.0, 0.6, 1.4, 1.9];
        let c = cfg(&b);
        let mu = gap_moments(&c, 6).unwrap();
        let weight = |x: f64| 1.0 / ((x - b[0]) * (b[3] - x)).sqrt();
        let m0 = gauss_chebyshev_gap(weight, b[1], b[2], 64);
        for (n, m) in mu.iter().enumerate() {
            let gc = gauss_chebyshev_gap(|x| x.powi(n as i32) * weight(x), b[1], b[2], 64) / m0;
            assert_abs_diff_eq!(*m, gc, epsilon = 1e-12);
        }
    }

    #[test]
    fn near_merge_center_is_gap_midpoint() {
        let mut prev = f64::INFINITY;
        for g in [1e-2, 1e-3, 1e-4] {
            let c = cfg(&[-2.0, 1.0 - g / 2.0, 1.0 + g / 2.0, 2.0]);
            let err = (c_center(&c).unwrap() - 1.0).abs() / (g * g);
            assert!(err < 1.0);
            assert!(err <= prev * 1.1);
            prev = err;
        }
    }

    #[test]
    fn near_birth_center_approaches_right_edge() {
        let (b1, b2, bt) = (-2.0, 0.6, 1.4);
        for d in [1e-4, 1e-8] {
            let c = cfg(&[b1, b2, bt, bt + d]);
            let cc = c_center(&c).unwrap();
            let lead = crate::elliptic::pi_over_k_birth_refined(b1, b2, bt, d) * d;
            assert!((bt + d - cc) > 0.0);
            assert!(((bt + d - cc) / lead - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn high_order_rejected() {
        assert!(p_k_one_cut(MAX_ORDER + 1, &cfg(&[-1.0, 1.0])).is_err());
    }

    fn two_cut_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.05f64..1.5, 4).prop_map(|steps| {
            let mut x = -2.0;
            steps
                .into_iter()
                .map(|d| {
                    x += d;
                    x
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn two_cut_normalization(b in two_cut_strategy(), k in 0usize..=5) {
            let c = cfg(&b);
            let p = p_k_two_cut(k, &c).unwrap();
            let scale: f64 = p.coeffs().iter().map(|a| a.abs()).sum::<f64>().max(1.0)
                * b.iter().fold(1.0f64, |m, v| m.max(v.abs())).powi(p.degree().unwrap_or(0) as i32);
            prop_assert!(gap_integral(&p, &b).abs() / gap_scale(&b) <= 1e-8 * scale);
        }

        #[test]
        fn center_lies_in_gap(b in two_cut_strategy()) {
            let c = cfg(&b);
            let cc = c_center(&c).unwrap();
            prop_assert!(b[1] < cc && cc < b[2]);
        }

        #[test]
        fn degree_and_leading_coefficient(b in two_cut_strategy(), k in 0usize..=6) {
            for c in [cfg(&b[..2]), cfg(&b)] {
                let s = c.phase();
                let p = p_k(k, &c).unwrap();
                let want_deg = if k == 0 { s - 1 } else { k + s - 1 };
                prop_assert_eq!(p.degree(), Some(want_deg));
                let lead = if k == 0 { 1.0 } else { k as f64 / 2.0 };
                prop_assert!((p.leading() - lead).abs() < 1e-14);
            }
        }

        #[test]
        fn degeneration_identity(
            b in two_cut_strategy(),
            which in 0usize..3,
            k in 0usize..=2,
        ) {
            // collapse the pair (which, which + 1) onto its midpoint
            let mut d = b.clone();
            let m = 0.5 * (d[which] + d[which + 1]);
            d[which] = m;
            d[which + 1] = m;
            let c2 = EndpointConfig::degenerate(d.clone()).unwrap();
            let c1 = reduce_config(&c2, which + 1).unwrap();
            let lhs = p_k_two_cut(k, &c2).unwrap();
            let rhs = &Polynomial::linear_root(m) * &p_k_one_cut(k, &c1).unwrap();
            for i in 0..20 {
                let z = -3.0 + 0.4 * i as f64;
                let scale = 1.0 + rhs.eval(z).abs();
                prop_assert!((lhs.eval(z) - rhs.eval(z)).abs() <= 1e-9 * scale);
            }
        }
    }
}
