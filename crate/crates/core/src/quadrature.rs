//! Quadrature rules and finite-difference weights.
//!
//! The workhorse is double-exponential (tanh-sinh) quadrature, which tolerates
//! integrable algebraic and logarithmic singularities at both ends of the
//! interval. The integrand receives the distances to both endpoints computed
//! without cancellation, so factors like `√(x − a)` stay accurate right at the edge.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_LEVEL: usize = 12;
const T_MAX: f64 = 4.5;

/// `∫_a^b f(x, x − a, b − x) dx` by tanh-sinh quadrature to tolerance `tol`
/// relative to `∫|f|`.
///
/// The two extra arguments are the distances to the left and right endpoints.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return tanh_sinh_ordered(&|x, da, db| f(x, db, da), b, a, tol).map(|v| -v);
    }
    tanh_sinh_ordered(&f, a, b, tol)
}

fn tanh_sinh_ordered(f: &dyn Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (cu * cu);
        if w == 0.0 {
            return 0.0;
        }
        // b − x = 2·half/(e^{2u} + 1), x − a = 2·half/(e^{−2u} + 1)
        let db = 2.0 * half / ((2.0 * u).exp() + 1.0);
        let da = 2.0 * half / ((-2.0 * u).exp() + 1.0);
        if da == 0.0 || db == 0.0 {
            return 0.0;
        }
        let x = if t <= 0.0 { a + da } else { b - db };
        let v = f(x, da, db);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };

    // Convergence is judged against ∫|f| so integrals that cancel to ~0 still terminate.
    let mut h = 1.0;
    let (mut sum, mut abs_sum) = (0.0, 0.0);
    let add = |t: f64, sum: &mut f64, abs_sum: &mut f64| {
        let v = eval(t);
        *sum += v;
        *abs_sum += v.abs();
    };
    add(0.0, &mut sum, &mut abs_sum);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        add(t, &mut sum, &mut abs_sum);
        add(-t, &mut sum, &mut abs_sum);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            add(t, &mut sum, &mut abs_sum);
            add(-t, &mut sum, &mut abs_sum);
            k += 2;
        }
        let next = sum * h;
        let err = (next - estimate).abs();
        estimate = next;
        if err <= tol * (abs_sum * h) || err < 1e-300 {
            return Ok(estimate);
        }
    }
    if !estimate.is_finite() {
        return Err(Error::Numeric(format!(
            "tanh-sinh produced a non-finite value on [{a}, {b}]"
        )));
    }
    Err(Error::Numeric(format!(
        "tanh-sinh did not reach tolerance {tol:e} on [{a}, {b}]"
    )))
}

/// `∫_a^b f(x) dx` by tanh-sinh quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    tanh_sinh(|x, _, _| f(x), a, b, tol)
}

/// Like [`tanh_sinh`], but returns the best estimate instead of an error when the
/// tolerance is missed; the estimate is then accurate to roughly `√tol`.
pub fn tanh_sinh_lenient<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    match tanh_sinh(&f, a, b, tol) {
        Ok(v) => v,
        Err(_) => tanh_sinh(&f, a, b, tol.sqrt()).unwrap_or(f64::NAN),
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫_a^b f(x)/√((x − a)(b − x)) dx` by `n`-point Gauss–Chebyshev quadrature.
pub fn gauss_chebyshev_gap<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let sum: f64 = (1..=n)
        .map(|j| {
            let u = ((2 * j - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            f(c + r * u)
        })
        .sum();
    sum * std::f64::consts::PI / n as f64
}

/// Fornberg weights: `w[m][j]` approximates the `m`-th derivative at `x0` as
/// `Σ_j w[m][j] f(nodes[j])`, for `m = 0..=order`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// `m`-th derivative at `x0` from samples `values` at `nodes`.
pub fn finite_difference(x0: f64, nodes: &[f64], values: &[f64], m: usize) -> f64 {
    let w = fornberg_weights(x0, nodes, m);
    w[m].iter().zip(values).map(|(a, b)| a * b).sum()
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Gaussian elimination with partial pivoting.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Least-squares polynomial `Σ c_k x^k` of degree `deg`; returns `c`.
pub fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Option<Vec<f64>> {
    let n = deg + 1;
    if x.len() < n {
        return None;
    }
    // scale abscissae to [−1, 1] for conditioning
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo).max(f64::MIN_POSITIVE));
    let mut ata = vec![vec![0.0; n]; n];
    let mut aty = vec![0.0; n];
    for (&xi, &yi) in x.iter().zip(y) {
        let u = (xi - c) / r;
        let pows: Vec<f64> = (0..n).map(|k| u.powi(k as i32)).collect();
        for i in 0..n {
            aty[i] += pows[i] * yi;
            for j in 0..n {
                ata[i][j] += pows[i] * pows[j];
            }
        }
    }
    let cu = solve_linear(ata, aty)?;
    // expand Σ cu_k ((x − c)/r)^k into powers of x
    let mut out = vec![0.0; n];
    for (k, &ck) in cu.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=k {
            out[j] += ck * binom * (-c).powi((k - j) as i32) / r.powi(k as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }
    Some(out)
}
