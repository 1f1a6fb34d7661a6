//! Test models with closed-form endpoints, and seeding for user potentials.

use crate::equilibrium::solve_endpoints;
use crate::error::{domain, Error, Result};
use crate::geometry::EndpointConfig;
use crate::polyops::Potential;

/// Named potentials with known seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    /// `V = z⁴/4 − z²`
    QuarticEven,
    /// `V = z⁴/4 − (4c/3) z³ + (2c² − 1) z² + 8c z`
    BleherEynard { c: f64 },
}

impl Preset {
    pub fn potential(&self) -> Result<Potential> {
        match *self {
            Preset::QuarticEven => Ok(Potential::quartic_even()),
            Preset::BleherEynard { c } => Potential::bleher_eynard(c),
        }
    }

    /// Temperature of the two-cut merge.
    pub fn merge_temperature(&self) -> f64 {
        match *self {
            Preset::QuarticEven => 1.0,
            Preset::BleherEynard { c } => 1.0 + 4.0 * c * c,
        }
    }

    /// Exact one-cut configuration at the merge temperature.
    pub fn merge_config(&self) -> EndpointConfig {
        EndpointConfig::new(vec![-2.0, 2.0]).expect("ordered")
    }

    /// Interior coalescence point at the merge.
    pub fn merge_point(&self) -> f64 {
        match *self {
            Preset::QuarticEven => 0.0,
            Preset::BleherEynard { c } => 2.0 * c,
        }
    }
}

/// One-cut quartic-even endpoints `±(2/√3)√(1 + √(1 + 3T))`, a solution for every `T > 0`
/// though admissible only for `T ≥ 1`.
pub fn quartic_one_cut(t: f64) -> Result<EndpointConfig> {
    if !(t > 0.0) {
        return domain(format!("temperature must be positive, got {t}"));
    }
    let b = 2.0 / 3f64.sqrt() * (1.0 + (1.0 + 3.0 * t).sqrt()).sqrt();
    EndpointConfig::new(vec![-b, b])
}

/// Two-cut quartic-even endpoints `(−b₄, −b₂, b₂, b₄)` with `b₂ = √(2(1 − √T))`,
/// `b₄ = √(2(1 + √T))`, for `0 < T < 1`.
pub fn quartic_two_cut(t: f64) -> Result<EndpointConfig> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("two-cut quartic requires 0 < T < 1, got {t}"));
    }
    let r = t.sqrt();
    let inner = (2.0 * (1.0 - r)).sqrt();
    let outer = (2.0 * (1.0 + r)).sqrt();
    EndpointConfig::new(vec![-outer, -inner, inner, outer])
}

/// Derivative in `T` of the one-cut quartic-even right endpoint.
pub fn quartic_one_cut_velocity(t: f64) -> f64 {
    let s = (1.0 + 3.0 * t).sqrt();
    let b = 2.0 / 3f64.sqrt() * (1.0 + s).sqrt();
    // d/dT of (4/3)(1 + s) is 2/s, and b db/dT is half of that.
    1.0 / (s * b)
}

/// Real root of `β³ − 4cβ² + 2(2c² − 1)β + 8c = 0` by Cardano's formula: the
/// absolute minimum of the Bleher–Eynard potential, where the support collapses
/// as `T → 0`.
pub fn be_minimum(c: f64) -> Result<f64> {
    if !(c.abs() < 1.0) {
        return domain(format!("|c| must be < 1, got {c}"));
    }
    if c == 0.0 {
        return domain("c = 0 has two degenerate absolute minima at ±√2");
    }
    // depressed cubic via β = y + 4c/3
    let a2 = -4.0 * c;
    let a1 = 2.0 * (2.0 * c * c - 1.0);
    let a0 = 8.0 * c;
    let shift = -a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2.powi(3) / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let cubic = |b: f64| ((b + a2) * b + a1) * b + a0;
    let y = if disc >= 0.0 {
        let sd = disc.sqrt();
        (-q / 2.0 + sd).cbrt() + (-q / 2.0 - sd).cbrt()
    } else {
        // three real critical points: pick the lowest well
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (p * m)).acos() / 3.0;
        let roots = (0..3).map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
        let pot = Potential::bleher_eynard(c)?;
        roots
            .map(|y| y + shift)
            .min_by(|a, b| pot.eval(*a).total_cmp(&pot.eval(*b)))
            .map(|b| b - shift)
            .ok_or_else(|| Error::Numeric("no real critical point".into()))?
    };
    // Newton polish
    let mut b = y + shift;
    for _ in 0..2 {
        let d = (3.0 * b + 2.0 * a2) * b + a1;
        if d != 0.0 {
            b -= cubic(b) / d;
        }
    }
    Ok(b)
}

/// Initial one-cut configuration at a temperature high enough that the leading
/// monomial dominates, refined by Newton iteration.
///
/// Tries `T` and then successively larger temperatures; returns the temperature used.
pub fn high_temperature_start(pot: &Potential, t: f64, tol: f64) -> Result<(f64, EndpointConfig)> {
    let deg = pot.degree();
    let lead = pot.coupling(deg);
    let mut temp = t;
    let mut last_err = None;
    for _ in 0..8 {
        let b = 2.0 * (temp / (deg as f64 * lead)).powf(1.0 / deg as f64);
        let guess = EndpointConfig::new(vec![-b, b])?;
        match solve_endpoints(pot, temp, &guess, tol) {
            Ok(cfg) => return Ok((temp, cfg)),
            Err(e) => last_err = Some(e),
        }
        temp *= 4.0;
    }
    Err(Error::Seed(format!(
        "no one-cut start found up to T = {temp}: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn quartic_seeds() {
        let c = quartic_one_cut(3.0).unwrap();
        assert_abs_diff_eq!(
            c.beta()[1],
            2.0 / 3f64.sqrt() * (1.0 + 10f64.sqrt()).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(c.beta()[1], 2.35583, epsilon = 1e-4);
        assert_abs_diff_eq!(
            quartic_one_cut(1.0).unwrap().beta()[1],
            2.0,
            epsilon = 1e-15
        );
        assert!(quartic_two_cut(1.0).is_err());
        assert!(quartic_one_cut(0.0).is_err());
    }

    #[test]
    fn quartic_velocity_matches_difference() {
        let h = 1e-5;
        let fd = (quartic_one_cut(3.0 + h).unwrap().beta()[1]
            - quartic_one_cut(3.0 - h).unwrap().beta()[1])
            / (2.0 * h);
        assert_abs_diff_eq!(quartic_one_cut_velocity(3.0), fd, epsilon = 1e-9);
    }

    #[test]
    fn be_minimum_value() {
        assert_abs_diff_eq!(be_minimum(0.5).unwrap(), -1.26953, epsilon = 1e-5);
        assert!(be_minimum(0.0).is_err());
        assert!(be_minimum(1.0).is_err());
    }

    #[test]
    fn presets() {
        let p = Preset::BleherEynard { c: 0.5 };
        assert_eq!(p.merge_temperature(), 2.0);
        assert_eq!(p.merge_point(), 1.0);
        assert!(Preset::BleherEynard { c: 2.0 }.potential().is_err());
    }

    #[test]
    fn high_temperature_start_gaussian() {
        let pot = Potential::new(vec![0.3, 0.5]).unwrap();
        let (t, c) = high_temperature_start(&pot, 1.0, 1e-12).unwrap();
        assert_eq!(t, 1.0);
        assert_abs_diff_eq!(c.beta()[0], -0.3 - 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.beta()[1], -0.3 + 2.0, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn be_minimum_is_a_cubic_root(c in -0.99f64..0.99) {
            prop_assume!(c.abs() > 1e-3);
            let b = be_minimum(c).unwrap();
            let r = b.powi(3) - 4.0 * c * b * b + 2.0 * (2.0 * c * c - 1.0) * b + 8.0 * c;
            prop_assert!(r.abs() < 1e-12);
            let pot = Potential::bleher_eynard(c).unwrap();
            // global minimum: lower than the mirrored well
            prop_assert!(pot.eval(b) <= pot.eval(-b) + 1e-12);
        }
    }
}
