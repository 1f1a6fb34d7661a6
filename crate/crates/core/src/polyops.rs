//! Dense real polynomials and Laurent expansions of the branch `w₁(z)` at infinity.
//!
//! `w₁(z)` is the branch of `√∏(z − β_i)` that behaves like `z^s` for large `z`,
//! where `2s` is the number of endpoints. Everything here is expressed through
//! the series of `∏(1 − β_i u)^{±1/2}` in `u = 1/z`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{domain, Error, Result};

/// Real polynomial with coefficients in ascending degree order.
///
/// Trailing exact zeros are trimmed; the zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c · z^n`
    pub fn monomial(c: f64, n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = c;
        Self::new(coeffs)
    }

    /// `z − a`
    pub fn linear_root(a: f64) -> Self {
        Self::new(vec![-a, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c / (i + 1) as f64),
        );
        Self::new(coeffs)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Synthetic division by `z − a`; returns quotient and remainder.
    pub fn div_linear(&self, a: f64) -> (Self, f64) {
        let n = self.coeffs.len();
        if n == 0 {
            return (Self::zero(), 0.0);
        }
        let mut q = vec![0.0; n - 1];
        let mut acc = 0.0;
        for i in (0..n).rev() {
            acc = acc * a + self.coeffs[i];
            if i > 0 {
                q[i - 1] = acc;
            }
        }
        // acc now holds the value at `a`, which is the remainder
        (Self::new(q), acc)
    }

    /// Real roots, via the companion-free route of isolating sign changes of
    /// the polynomial on a fine grid inside the Cauchy bound and refining by
    /// bisection. Double roots are recovered from sign changes of the derivative.
    pub fn real_roots(&self) -> Vec<f64> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        if deg == 1 {
            return vec![-self.coeffs[0] / self.coeffs[1]];
        }
        if deg == 2 {
            let (c, b, a) = (self.coeffs[0], self.coeffs[1], self.coeffs[2]);
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return Vec::new();
            }
            let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
            let q = -0.5 * (b + sgn * disc.sqrt());
            let mut r = if q == 0.0 {
                vec![0.0, 0.0]
            } else {
                vec![q / a, c / q]
            };
            r.sort_by(f64::total_cmp);
            return r;
        }
        // Roots of the derivative split the line into monotone pieces.
        let mut crit = self.derivative().real_roots();
        crit.sort_by(f64::total_cmp);
        let bound = 1.0
            + self.coeffs[..deg]
                .iter()
                .map(|c| (c / self.leading()).abs())
                .fold(0.0, f64::max);
        let mut knots = vec![-bound];
        knots.extend(crit.iter().copied().filter(|x| x.abs() < bound));
        knots.push(bound);
        let mut roots = Vec::new();
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa * fb < 0.0 {
                roots.push(bisect_root(|x| self.eval(x), a, b));
            }
        }
        if self.eval(bound) == 0.0 {
            roots.push(bound);
        }
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
        roots
    }
}

fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

/// Polynomial potential `V(z) = Σ_{n=1}^{2p} t_n z^n`.
///
/// The temperature enters as the zeroth coupling `t₀ = −T` and is never stored here.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    /// `t₁ … t_{2p}`
    couplings: Vec<f64>,
}

impl Potential {
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() || couplings.len() % 2 != 0 {
            return domain(format!(
                "potential degree must be even and positive, got {}",
                couplings.len()
            ));
        }
        if couplings.iter().any(|c| !c.is_finite()) {
            return domain("potential coefficients must be finite");
        }
        let lead = *couplings.last().unwrap();
        if lead <= 0.0 {
            return domain(format!("leading coefficient must be positive, got {lead}"));
        }
        Ok(Self { couplings })
    }

    /// `z⁴/4 − z²`
    pub fn quartic_even() -> Self {
        Self::new(vec![0.0, -1.0, 0.0, 0.25]).expect("valid preset")
    }

    /// `z⁴/4 − (4/3)c z³ + (2c² − 1) z² + 8c z`, defined for `|c| < 1`.
    pub fn bleher_eynard(c: f64) -> Result<Self> {
        if !(c.abs() < 1.0) {
            return domain(format!(
                "Bleher-Eynard parameter must satisfy |c| < 1, got {c}"
            ));
        }
        Self::new(vec![8.0 * c, 2.0 * c * c - 1.0, -4.0 / 3.0 * c, 0.25])
    }

    /// `2p`
    pub fn degree(&self) -> usize {
        self.couplings.len()
    }

    /// Coupling `t_n` for `n ≥ 1`; zero beyond the degree.
    pub fn coupling(&self, n: usize) -> f64 {
        assert!(n >= 1, "t₀ is the temperature, not a potential coupling");
        self.couplings.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn polynomial(&self) -> Polynomial {
        let mut c = Vec::with_capacity(self.couplings.len() + 1);
        c.push(0.0);
        c.extend_from_slice(&self.couplings);
        Polynomial::new(c)
    }

    pub fn derivative(&self) -> Polynomial {
        self.polynomial().derivative()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.polynomial().eval(x)
    }
}

/// Truncated Laurent expansion at infinity: `Σ_k coeffs[k] · z^(order − k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentTail {
    pub order: i64,
    pub coeffs: Vec<f64>,
}

impl LaurentTail {
    /// Coefficient of `z^power`, or zero outside the stored window above the truncation.
    pub fn coeff(&self, power: i64) -> Option<f64> {
        let k = self.order - power;
        if k < 0 {
            Some(0.0)
        } else {
            self.coeffs.get(k as usize).copied()
        }
    }

    /// Lowest power represented exactly.
    pub fn lowest_power(&self) -> i64 {
        self.order - self.coeffs.len() as i64 + 1
    }

    /// `numer(z) · self`, keeping only the powers that are still exact.
    pub fn times_polynomial(&self, numer: &Polynomial) -> LaurentTail {
        let deg = numer.degree().map_or(0, |d| d as i64);
        let order = self.order + deg;
        let n = self.coeffs.len();
        let mut coeffs = vec![0.0; n];
        for (k, out) in coeffs.iter_mut().enumerate() {
            let power = order - k as i64;
            let mut acc = 0.0;
            for (i, &a) in numer.coeffs().iter().enumerate() {
                let kk = self.order + i as i64 - power;
                if kk >= 0 && (kk as usize) < n {
                    acc += a * self.coeffs[kk as usize];
                }
            }
            *out = acc;
        }
        LaurentTail { order, coeffs }
    }

    /// Nonnegative-power part as a polynomial.
    pub fn polynomial_part(&self) -> Polynomial {
        if self.order < 0 {
            return Polynomial::zero();
        }
        let top = self.order as usize;
        let mut c = vec![0.0; top + 1];
        for (p, slot) in c.iter_mut().enumerate() {
            *slot = self.coeff(p as i64).unwrap_or(0.0);
        }
        Polynomial::new(c)
    }
}

pub(crate) fn check_endpoints(endpoints: &[f64]) -> Result<()> {
    if endpoints.is_empty() || endpoints.len() % 2 != 0 {
        return domain(format!(
            "expected an even, nonzero number of endpoints, got {}",
            endpoints.len()
        ));
    }
    if endpoints.iter().any(|b| !b.is_finite()) {
        return domain("endpoints must be finite");
    }
    if endpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return domain(format!(
            "endpoints must be strictly increasing: {endpoints:?}"
        ));
    }
    Ok(())
}

/// Coefficients of `∏_i (1 − β_i u)^{exponent}` for `exponent = ±1/2`, to `n` terms.
fn branch_product_series(endpoints: &[f64], n: usize, exponent: f64) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    acc[0] = 1.0;
    // (1 − b u)^e = Σ_k binom(e, k) (−b)^k u^k
    let mut factor = vec![0.0; n];
    for &b in endpoints {
        factor[0] = 1.0;
        for k in 1..n {
            factor[k] = factor[k - 1] * (k as f64 - 1.0 - exponent) / k as f64 * b;
        }
        let mut next = vec![0.0; n];
        for i in 0..n {
            if acc[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                next[i + j] += acc[i] * factor[j];
            }
        }
        acc = next;
    }
    acc
}

/// Laurent series of `1/w₁(z)` at infinity without checking the endpoint ordering.
///
/// Coincident endpoints are allowed here; they describe degenerate (collapsed) cuts.
pub(crate) fn inv_branch_series_unchecked(endpoints: &[f64], n_terms: usize) -> LaurentTail {
    let s = (endpoints.len() / 2) as i64;
    LaurentTail {
        order: -s,
        coeffs: branch_product_series(endpoints, n_terms.max(1), -0.5),
    }
}

/// Laurent series of `w₁(z)` at infinity without checking the endpoint ordering.
pub(crate) fn branch_series_unchecked(endpoints: &[f64], n_terms: usize) -> LaurentTail {
    let s = (endpoints.len() / 2) as i64;
    LaurentTail {
        order: s,
        coeffs: branch_product_series(endpoints, n_terms.max(1), 0.5),
    }
}

/// Laurent coefficients of `1/w₁(z) = z^{−s}(1 + a₁ z^{−1} + …)` to `n_terms` terms.
pub fn inv_sqrt_branch_series(endpoints: &[f64], n_terms: usize) -> Result<LaurentTail> {
    check_endpoints(endpoints)?;
    if n_terms == 0 {
        return domain("need at least one series term");
    }
    Ok(inv_branch_series_unchecked(endpoints, n_terms))
}

fn series_len(numer: &Polynomial, s: usize) -> usize {
    numer.degree().unwrap_or(0) + s + 4
}

pub(crate) fn polynomial_part_unchecked(numer: &Polynomial, endpoints: &[f64]) -> Polynomial {
    let s = endpoints.len() / 2;
    let series = inv_branch_series_unchecked(endpoints, series_len(numer, s));
    series.times_polynomial(numer).polynomial_part()
}

/// `(numer(z) / w₁(z))_⊕`, the polynomial part at infinity; degree `deg numer − s`.
pub fn polynomial_part(numer: &Polynomial, endpoints: &[f64]) -> Result<Polynomial> {
    check_endpoints(endpoints)?;
    Ok(polynomial_part_unchecked(numer, endpoints))
}

/// `(z^shift · w₁(z))_⊕` for `shift ≥ −1`.
pub(crate) fn branch_polynomial_part_unchecked(shift: i64, endpoints: &[f64]) -> Polynomial {
    let s = (endpoints.len() / 2) as i64;
    let top = s + shift;
    if top < 0 {
        return Polynomial::zero();
    }
    let series = branch_series_unchecked(endpoints, top as usize + 1);
    let mut c = vec![0.0; top as usize + 1];
    for (p, slot) in c.iter_mut().enumerate() {
        // z^shift · z^(s − k) = z^p  ⇔  k = top − p
        *slot = series.coeffs[top as usize - p];
    }
    Polynomial::new(c)
}

/// `h(z) = (V′(z)/w₁(z))_⊕`
pub fn density_polynomial(pot: &Potential, endpoints: &[f64]) -> Result<Polynomial> {
    polynomial_part(&pot.derivative(), endpoints)
}

/// Coefficient of `z^{−1}` in `z^j V′(z) / w₁(z)`, i.e. `(1/2πi)∮ z^j V′/w₁ dz`.
pub fn infinity_moment(j: usize, pot: &Potential, endpoints: &[f64]) -> Result<f64> {
    check_endpoints(endpoints)?;
    if j > pot.degree() {
        return domain(format!(
            "moment order {j} exceeds potential degree {}",
            pot.degree()
        ));
    }
    let numer = &Polynomial::monomial(1.0, j) * &pot.derivative();
    let s = endpoints.len() / 2;
    let series = inv_branch_series_unchecked(endpoints, series_len(&numer, s));
    series
        .times_polynomial(&numer)
        .coeff(-1)
        .ok_or_else(|| Error::Numeric("series truncated above z^-1".into()))
}

/// Coefficient of `z^{−1}` in `h(z) w₁(z)`; equals `−2T` on a solution (normalization).
pub fn normalization_moment(pot: &Potential, endpoints: &[f64]) -> Result<f64> {
    let h = density_polynomial(pot, endpoints)?;
    let s = endpoints.len() / 2;
    let series = branch_series_unchecked(endpoints, h.degree().unwrap_or(0) + 2 * s + 4);
    series
        .times_polynomial(&h)
        .coeff(-1)
        .ok_or_else(|| Error::Numeric("series truncated above z^-1".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn semicircle_inverse_branch_series() {
        // (1 − z^{−2})^{−1/2} = 1 + ½ z^{−2} + ⅜ z^{−4} + …
        let tail = inv_sqrt_branch_series(&[-1.0, 1.0], 5).unwrap();
        assert_eq!(tail.order, -1);
        assert_abs_diff_eq!(tail.coeff(-2).unwrap(), 0.0);
        assert_abs_diff_eq!(tail.coeff(-3).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tail.coeff(-5).unwrap(), 0.375, epsilon = 1e-15);
    }

    #[test]
    fn coincident_endpoints_rejected() {
        assert!(matches!(
            inv_sqrt_branch_series(&[0.0, 0.0], 3),
            Err(Error::Domain(_))
        ));
        assert!(polynomial_part(&Polynomial::monomial(1.0, 2), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn quartic_even_density_polynomial() {
        let b = 2.3;
        let h = density_polynomial(&Potential::quartic_even(), &[-b, b]).unwrap();
        let want = Polynomial::new(vec![b * b / 2.0 - 2.0, 0.0, 1.0]);
        for (x, y) in h.coeffs().iter().zip(want.coeffs()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        assert_eq!(h.degree(), Some(2));
    }

    #[test]
    fn gaussian_density_polynomial_is_constant() {
        let h = polynomial_part(&Polynomial::new(vec![0.0, 2.0]), &[-0.7, 1.9]).unwrap();
        assert_eq!(h.degree(), Some(0));
        assert_abs_diff_eq!(h.coeff(0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn bleher_eynard_critical_density_polynomial() {
        for c in [-0.6, 0.0, 0.25, 0.5, 0.9] {
            let pot = Potential::bleher_eynard(c).unwrap();
            let h = density_polynomial(&pot, &[-2.0, 2.0]).unwrap();
            let want = [4.0 * c * c, -4.0 * c, 1.0];
            for (i, w) in want.iter().enumerate() {
                assert_abs_diff_eq!(h.coeff(i), *w, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn quartic_moments_vanish_on_closed_form() {
        let t = 2.0_f64;
        let b = 2.0 / 3f64.sqrt() * (1.0 + (1.0 + 3.0 * t).sqrt()).sqrt();
        let pot = Potential::quartic_even();
        assert_abs_diff_eq!(
            infinity_moment(0, &pot, &[-b, b]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            normalization_moment(&pot, &[-b, b]).unwrap(),
            -2.0 * t,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gaussian_first_moment_vanishes() {
        let pot = Potential::new(vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(infinity_moment(0, &pot, &[-2.0, 2.0]).unwrap(), 0.0);
        // 2z · z^{−1}(1 + 2z^{−2} + …) has z^{−1} coefficient 0 and z · … gives 4
        assert_abs_diff_eq!(
            infinity_moment(1, &pot, &[-2.0, 2.0]).unwrap(),
            4.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn odd_moments_vanish_by_parity() {
        let pot = Potential::quartic_even();
        for j in [1, 3] {
            assert_abs_diff_eq!(
                infinity_moment(j, &pot, &[-1.7, -0.4, 0.4, 1.7]).unwrap(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn potential_validation() {
        assert!(Potential::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(Potential::new(vec![0.0, -1.0]).is_err());
        assert!(Potential::bleher_eynard(1.0).is_err());
        assert_eq!(Potential::quartic_even().degree(), 4);
    }

    #[test]
    fn roots_and_division() {
        let p = &(&Polynomial::linear_root(-1.0) * &Polynomial::linear_root(0.5))
            * &Polynomial::linear_root(2.0);
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-1.0, 0.5, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let (q, rem) = p.div_linear(2.0);
        assert_abs_diff_eq!(rem, 0.0, epsilon = 1e-14);
        assert_eq!(q.degree(), Some(2));
        // double root
        let sq = &Polynomial::linear_root(0.3) * &Polynomial::linear_root(0.3);
        assert!(sq.real_roots().iter().all(|x| (x - 0.3).abs() < 1e-7));
    }

    fn sorted_endpoints(s: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.05f64..1.0, 2 * s).prop_map(|steps| {
            let mut x = -1.5;
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
        #[test]
        fn polynomial_part_degree_and_decay(
            ends in prop_oneof![sorted_endpoints(1), sorted_endpoints(2)],
            coeffs in proptest::collection::vec(-2.0f64..2.0, 5),
        ) {
            let mut c = coeffs;
            c[4] = 1.0;
            let numer = Polynomial::new(c);
            let s = ends.len() / 2;
            let h = polynomial_part(&numer, &ends).unwrap();
            prop_assert_eq!(h.degree(), Some(4 - s));
            // h·w₁ − numer = O(x^{s−1}), so the relative defect decays like x^{s−5}
            let defect = |x: f64| {
                let w: f64 = ends.iter().map(|b| x - b).product::<f64>().sqrt();
                (h.eval(x) * w / numer.eval(x) - 1.0).abs()
            };
            prop_assert!(defect(1e3) < 1e-6);
            prop_assert!(defect(1e4) < 1e-9);
        }

        #[test]
        fn polynomial_part_parity(a in 0.2f64..1.0, b in 1.1f64..2.0, odd in any::<bool>()) {
            let numer = if odd {
                Polynomial::new(vec![0.0, -1.0, 0.0, 1.0])
            } else {
                Polynomial::new(vec![0.5, 0.0, -1.0, 0.0, 1.0])
            };
            for ends in [vec![-b, b], vec![-b, -a, a, b]] {
                let h = polynomial_part(&numer, &ends).unwrap();
                let s = ends.len() / 2;
                let parity_h = (numer.degree().unwrap() - s) % 2;
                for (i, c) in h.coeffs().iter().enumerate() {
                    if i % 2 != parity_h {
                        prop_assert!(c.abs() < 1e-13);
                    }
                }
            }
        }
    }
}
