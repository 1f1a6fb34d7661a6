//! Dormand–Prince 5(4) embedded Runge–Kutta step.

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Result of one trial step.
pub struct Step {
    pub y: Vec<f64>,
    /// Derivative at the new point (first-same-as-last).
    pub dy: Vec<f64>,
    /// Scaled error norm; the step is acceptable when `≤ 1`.
    pub error: f64,
}

/// One Dormand–Prince step of size `h` from `(t, y)` with known derivative `dy0`.
///
/// Returns `None` if the right-hand side fails at any stage.
pub fn dp45_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    dy0: &[f64],
    h: f64,
    atol: f64,
    rtol: f64,
) -> Option<Step>
where
    F: FnMut(f64, &[f64]) -> Option<Vec<f64>>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(dy0.to_vec());
    let mut y5 = vec![0.0; n];
    for stage in 1..7 {
        let yi: Vec<f64> = (0..n)
            .map(|i| y[i] + h * (0..stage).map(|j| A[stage][j] * k[j][i]).sum::<f64>())
            .collect();
        if stage == 6 {
            y5.clone_from(&yi);
        }
        k.push(f(t + C[stage] * h, &yi)?);
    }
    let mut err = 0.0f64;
    for i in 0..n {
        let e = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
        let sc = atol + rtol * y[i].abs().max(y5[i].abs());
        err = err.max((e / sc).abs());
    }
    if !err.is_finite() {
        return None;
    }
    Some(Step {
        y: y5,
        dy: k.pop().unwrap(),
        error: err,
    })
}

/// Step-size factor after a step with scaled error `err`.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}
