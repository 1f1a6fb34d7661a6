//! Acceptance checks on the reference models, reporting measured values.
//!
//! Each criterion runs independently and never panics; a numerical error inside a
//! check is reported as a failure with its message. Tolerances can be scaled
//! down to confirm that a check actually discriminates.

use std::cell::OnceCell;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic::{ellip_e, ellip_k, ellip_pi, pi_over_k, theta_ratio};
use crate::equilibrium::{density_norm, residual_norm};
use crate::error::{Error, Result};
use crate::flow::{
    advance, be_minimum, birth_gamma, integrate, saturation_from_below, seed_closed_form, trace,
    IntegrateOptions, LaunchCoefficients, SeedModel, Trace, TraceOptions, TransitionEvent,
    TransitionKind,
};
use crate::geometry::{p_k, EndpointConfig};
use crate::models::{quartic_one_cut, quartic_two_cut};
use crate::polyops::{Polynomial, Potential};
use crate::quadrature::{finite_difference, linear_fit, polyfit, solve_linear, tanh_sinh};
use crate::thermo::{
    birth_divergence_check, continuity, free_energy, lagrange_multiplier, side_state, stencil_step,
    third_derivative_jump,
};

/// Criteria expected to fail; see the project notes for the analysis.
pub const KNOWN_UNATTAINABLE: &[u8] = &[6, 8];

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    /// Measured values and tolerances.
    pub detail: String,
}

impl Criterion {
    pub fn known_unattainable(&self) -> bool {
        KNOWN_UNATTAINABLE.contains(&self.id)
    }

    /// One report line: `AC<id> PASS|FAIL <title>: <detail>`.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let note = if !self.passed && self.known_unattainable() {
            " [known unattainable]"
        } else {
            ""
        };
        format!(
            "AC{:<2} {verdict} {}{note}: {}",
            self.id, self.title, self.detail
        )
    }
}

const TITLES: [&str; 10] = [
    "quartic closed forms",
    "quartic merge and Taylor coefficients",
    "Bleher-Eynard merge",
    "Bleher-Eynard birth and collapse point",
    "merge scaling law",
    "birth scaling law",
    "third-derivative jump",
    "thermodynamic continuity",
    "elliptic kernel",
    "structural identities",
];

/// Runs the acceptance criteria, sharing the traced reference models.
pub struct Selftest {
    scale: f64,
    quartic: OnceCell<Traced>,
    be: [OnceCell<Traced>; 3],
}

const BE_C: [f64; 3] = [0.0, 0.25, 0.5];
const BE_RANGE: (f64, f64) = (0.05, 3.0);

/// Pass/fail accumulator for one criterion.
struct Checks<'a> {
    scale: f64,
    passed: bool,
    detail: &'a mut String,
}

impl Checks<'_> {
    /// Records `|measured| ≤ tol·scale`.
    fn bound(&mut self, label: &str, measured: f64, tol: f64) {
        let ok = measured.abs() <= tol * self.scale;
        self.passed &= ok;
        self.note(&format!(
            "{label} {measured:.3e} (tol {:.0e})",
            tol * self.scale
        ));
    }

    /// Records `|measured − target| ≤ tol·scale`, showing the value.
    fn near(&mut self, label: &str, measured: f64, target: f64, tol: f64) {
        let ok = (measured - target).abs() <= tol * self.scale;
        self.passed &= ok;
        self.note(&format!(
            "{label} {measured:.9} (want {target:.9} ± {:.0e})",
            tol * self.scale
        ));
    }

    /// Records `|measured/target − 1| ≤ rel·scale`.
    fn relative(&mut self, label: &str, measured: f64, target: f64, rel: f64) {
        let ok = (measured / target - 1.0).abs() <= rel * self.scale;
        self.passed &= ok;
        self.note(&format!(
            "{label} {measured:.6} (want {target:.6} ± {:.1}%)",
            100.0 * rel * self.scale
        ));
    }

    fn flag(&mut self, label: &str, ok: bool) {
        self.passed &= ok;
        self.note(&format!("{label} {}", if ok { "yes" } else { "no" }));
    }

    fn note(&mut self, s: &str) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(s);
    }
}

impl Default for Selftest {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl Selftest {
    /// `tol_scale` multiplies every tolerance; values below 1 tighten the checks.
    pub fn new(tol_scale: f64) -> Self {
        Self {
            scale: tol_scale,
            quartic: OnceCell::new(),
            be: Default::default(),
        }
    }

    pub fn run_all(&self) -> Vec<Criterion> {
        self.warm();
        (1..=10).map(|id| self.run(id)).collect()
    }

    /// Traces the reference models on worker threads.
    fn warm(&self) {
        let quartic = || trace_model(SeedModel::QuarticOneCut { temperature: 2.0 }, (0.1, 2.0));
        let be = |c: f64| trace_model(SeedModel::BleherEynardCritical { c }, BE_RANGE);
        let (q, b) = std::thread::scope(|scope| {
            let q = scope.spawn(quartic);
            let b: Vec<_> = BE_C.iter().map(|&c| scope.spawn(move || be(c))).collect();
            (
                q.join(),
                b.into_iter().map(|h| h.join()).collect::<Vec<_>>(),
            )
        });
        if let Ok(q) = q {
            let _ = self.quartic.set(q);
        }
        for (cell, r) in self.be.iter().zip(b) {
            if let Ok(r) = r {
                let _ = cell.set(r);
            }
        }
    }

    /// Runs criterion `id` in `1..=10`.
    pub fn run(&self, id: u8) -> Criterion {
        let mut detail = String::new();
        let mut checks = Checks {
            scale: self.scale,
            passed: true,
            detail: &mut detail,
        };
        let outcome = match id {
            1 => self.closed_forms(&mut checks),
            2 => self.quartic_merge(&mut checks),
            3 => self.be_merge(&mut checks),
            4 => self.be_birth(&mut checks),
            5 => self.merge_scaling(&mut checks),
            6 => self.birth_scaling(&mut checks),
            7 => self.jump(&mut checks),
            8 => self.continuity(&mut checks),
            9 => self.elliptic(&mut checks),
            10 => self.structural(&mut checks),
            _ => Err(Error::Domain(format!("no criterion {id}"))),
        };
        let mut passed = checks.passed;
        if let Err(e) = outcome {
            passed = false;
            checks.note(&format!("error: {e}"));
        }
        let title = TITLES
            .get(usize::from(id).wrapping_sub(1))
            .copied()
            .unwrap_or("unknown");
        Criterion {
            id,
            title,
            passed,
            detail,
        }
    }

    fn quartic_trace(&self) -> Result<(&Potential, &Trace)> {
        let cell = self
            .quartic
            .get_or_init(|| trace_model(SeedModel::QuarticOneCut { temperature: 2.0 }, (0.1, 2.0)));
        match cell {
            Ok((p, t)) => Ok((p, t)),
            Err(e) => Err(Error::Numeric(e.clone())),
        }
    }

    fn be_trace(&self, which: usize) -> Result<(&Potential, &Trace)> {
        let cell = self.be[which].get_or_init(|| {
            trace_model(SeedModel::BleherEynardCritical { c: BE_C[which] }, BE_RANGE)
        });
        match cell {
            Ok((p, t)) => Ok((p, t)),
            Err(e) => Err(Error::Numeric(e.clone())),
        }
    }

    fn be_event(
        &self,
        which: usize,
        kind: TransitionKind,
    ) -> Result<(&Potential, &TransitionEvent)> {
        let (pot, tr) = self.be_trace(which)?;
        let ev =
            tr.events.iter().find(|e| e.kind == kind).ok_or_else(|| {
                Error::Numeric(format!("no {kind:?} event for c = {}", BE_C[which]))
            })?;
        Ok((pot, ev))
    }

    fn closed_forms(&self, ck: &mut Checks) -> Result<()> {
        let (pot, seed) = seed_closed_form(SeedModel::QuarticOneCut { temperature: 3.0 })?;
        let one = integrate(&pot, &seed, 1.05, &IntegrateOptions::default())?;
        let mut err1 = 0.0f64;
        for s in &one.samples {
            let exact = quartic_one_cut(s.temperature)?;
            err1 = err1.max(max_diff(s.config.beta(), exact.beta()));
        }
        let (pot, seed) = seed_closed_form(SeedModel::QuarticTwoCut { temperature: 0.05 })?;
        let two = integrate(&pot, &seed, 0.95, &IntegrateOptions::default())?;
        let mut err2 = 0.0f64;
        for s in &two.samples {
            let exact = quartic_two_cut(s.temperature)?;
            err2 = err2.max(max_diff(s.config.beta(), exact.beta()));
        }
        ck.bound(
            &format!(
                "one-cut max error on [1.05, 3] over {} samples",
                one.samples.len()
            ),
            err1,
            1e-6,
        );
        ck.bound(
            &format!(
                "two-cut max error on [0.05, 0.95] over {} samples",
                two.samples.len()
            ),
            err2,
            1e-6,
        );
        Ok(())
    }

    fn quartic_merge(&self, ck: &mut Checks) -> Result<()> {
        let (pot, tr) = self.quartic_trace()?;
        let merges: Vec<_> = tr
            .events
            .iter()
            .filter(|e| e.kind == TransitionKind::Merge)
            .collect();
        ck.flag(
            "single merge detected",
            merges.len() == 1 && tr.events.len() == 1,
        );
        let ev = merges
            .first()
            .ok_or_else(|| Error::Numeric("no merge".into()))?;
        ck.near("T_c", ev.critical_temperature, 1.0, 1e-6);
        ck.near("beta", ev.point, 0.0, 1e-6);
        for (side, c2) in [(1.0, 1.0 / 16.0), (-1.0, 5.0 / 64.0)] {
            let tau: Vec<f64> = (1..=25).map(|k| side * 0.004 * k as f64).collect();
            let b1 = tau
                .iter()
                .map(|&d| tr.state_at(pot, 1.0 + d).map(|s| s.config.beta()[0] + 2.0))
                .collect::<Result<Vec<_>>>()?;
            let coef =
                polyfit(&tau, &b1, 4).ok_or_else(|| Error::Numeric("Taylor fit failed".into()))?;
            let name = if side > 0.0 { "one-cut" } else { "two-cut" };
            ck.relative(&format!("{name} linear coefficient"), coef[1], -0.25, 0.02);
            ck.relative(&format!("{name} quadratic coefficient"), coef[2], c2, 0.02);
        }
        Ok(())
    }

    fn be_merge(&self, ck: &mut Checks) -> Result<()> {
        let (_, ev) = self.be_event(2, TransitionKind::Merge)?;
        ck.near("T_c", ev.critical_temperature, 2.0, 1e-6);
        let want = [-2.0, 1.0, 1.0, 2.0];
        ck.bound(
            "critical config max deviation from (-2, 1, 1, 2)",
            max_diff(ev.critical.beta(), &want),
            1e-6,
        );
        Ok(())
    }

    fn be_birth(&self, ck: &mut Checks) -> Result<()> {
        let (pot, ev) = self.be_event(2, TransitionKind::Birth)?;
        ck.near(
            "birth temperature",
            ev.critical_temperature,
            1.845_097,
            2e-4,
        );
        // independent estimate from the one-cut side, by saturation of the exterior inequality
        match saturation_from_below(pot, 0.05, 3.0)? {
            Some(below) => ck.bound(
                "saturation estimate difference",
                below.critical_temperature - ev.critical_temperature,
                1e-3,
            ),
            None => ck.flag("saturation found from below", false),
        }
        let (_, tr) = self.be_trace(2)?;
        let last = tr
            .branches
            .last()
            .map(|b| b.last().clone())
            .ok_or_else(|| Error::Numeric("empty trace".into()))?;
        ck.flag(
            "one-cut continuation reaches the lower bound",
            last.config.phase() == 1 && last.temperature == BE_RANGE.0,
        );
        let cold = advance(pot, &last, 1e-4, &IntegrateOptions::default())?;
        let mid = 0.5 * (cold.config.beta()[0] + cold.config.beta()[1]);
        ck.near("support center at T = 1e-4", mid, -1.26953, 1e-4);
        ck.near("real root of the cubic", be_minimum(0.5)?, -1.26953, 1e-5);
        Ok(())
    }

    fn merge_scaling(&self, ck: &mut Checks) -> Result<()> {
        let (pot, ev) = self.be_event(2, TransitionKind::Merge)?;
        let beta = ev.point;
        let offsets: Vec<f64> = (0..9).map(|k| 10f64.powf(-8.0 + 0.5 * k as f64)).collect();
        let configs = offsets
            .iter()
            .map(|&t| side_state(pot, ev, ev.two_cut_side, t))
            .collect::<Result<Vec<_>>>()?;
        let lt: Vec<f64> = offsets.iter().map(|t| t.ln()).collect();
        let lg: Vec<f64> = configs
            .iter()
            .map(|c| (c.beta()[2] - c.beta()[1]).ln())
            .collect();
        let (a, p) = linear_fit(&lt, &lg);
        ck.near("gap exponent", p, 0.5, 0.01);
        ck.relative(
            "gap amplitude",
            a.exp(),
            4.0 / (4.0 - beta * beta).sqrt(),
            0.02,
        );
        let dt: Vec<f64> = offsets.iter().map(|t| ev.two_cut_side.sign() * t).collect();
        let crit = ev.critical.beta();
        for (idx, want) in [
            (0usize, -1.0 / (beta + 2.0).powi(2)),
            (3, 1.0 / (beta - 2.0).powi(2)),
        ] {
            let y: Vec<f64> = configs.iter().map(|c| c.beta()[idx] - crit[idx]).collect();
            let (_, slope) = linear_fit(&dt, &y);
            ck.near(&format!("outer slope beta_{}", idx + 1), slope, want, 1e-3);
        }
        Ok(())
    }

    fn birth_scaling(&self, ck: &mut Checks) -> Result<()> {
        let (pot, ev) = self.be_event(2, TransitionKind::Birth)?;
        let gamma = match ev.launch {
            LaunchCoefficients::Birth { gamma } => gamma,
            LaunchCoefficients::Merge { .. } => {
                return Err(Error::Numeric("birth event without gamma".into()))
            }
        };
        let closed = birth_gamma(pot, &ev.one_cut, ev.point)?.abs();
        let offsets: Vec<f64> = (0..9).map(|k| 10f64.powf(-8.0 + 0.5 * k as f64)).collect();
        let gaps = offsets
            .iter()
            .map(|&t| side_state(pot, ev, ev.two_cut_side, t).map(|c| c.beta()[3] - c.beta()[2]))
            .collect::<Result<Vec<_>>>()?;
        let y: Vec<f64> = gaps.iter().map(|d| d * d * d.ln().abs()).collect();
        let (_, slope) = linear_fit(&offsets, &y);
        ck.near(
            "gamma from the event vs closed form",
            gamma.abs(),
            closed,
            1e-9,
        );
        ck.relative(
            "slope of gap^2 |log gap| vs t, against 2 gamma",
            slope,
            2.0 * closed,
            0.05,
        );
        // informational: fit gap^2 (a - log gap) = k t, rows scaled by 1/t
        let mut ata = vec![vec![0.0; 2]; 2];
        let mut atb = vec![0.0; 2];
        for (&t, &d) in offsets.iter().zip(&gaps) {
            let row = [d * d / t, -1.0];
            let rhs = d * d * d.ln() / t;
            for i in 0..2 {
                atb[i] += row[i] * rhs;
                for j in 0..2 {
                    ata[i][j] += row[i] * row[j];
                }
            }
        }
        if let Some(sol) = solve_linear(ata, atb) {
            ck.note(&format!(
                "info: slope / (4 gamma) = {:.4}; gap^2 (a - log gap) = k t fits a = {:.4}, k / (4 gamma) = {:.4}",
                slope / (4.0 * closed),
                sol[0],
                sol[1] / (4.0 * closed)
            ));
        }
        Ok(())
    }

    fn jump(&self, ck: &mut Checks) -> Result<()> {
        for which in 0..BE_C.len() {
            let (pot, ev) = self.be_event(which, TransitionKind::Merge)?;
            let j = third_derivative_jump(pot, ev)?;
            let closed = j
                .closed_form
                .ok_or_else(|| Error::Numeric("merge outside the (-2, b, b, 2) family".into()))?;
            ck.relative(
                &format!("c = {} jump", BE_C[which]),
                j.numeric,
                closed,
                0.05,
            );
        }
        Ok(())
    }

    fn continuity(&self, ck: &mut Checks) -> Result<()> {
        for kind in [TransitionKind::Merge, TransitionKind::Birth] {
            let (pot, ev) = self.be_event(2, kind)?;
            let r = continuity(pot, ev)?;
            let name = format!("{kind:?}").to_lowercase();
            ck.bound(&format!("{name} |dF|"), r.delta_f, 1e-4);
            ck.bound(&format!("{name} |dF'|"), r.delta_df, 1e-4);
            ck.bound(&format!("{name} |dF''|"), r.delta_d2f, 1e-4);
        }
        let (pot, ev) = self.be_event(2, TransitionKind::Birth)?;
        let d = birth_divergence_check(pot, ev)?;
        ck.flag("divergence fit conclusive", d.conclusive);
        ck.near("F''' divergence exponent", d.exponent, -1.0, 0.1);
        ck.flag("amplitude stable under step halving", d.stable);
        Ok(())
    }

    fn elliptic(&self, ck: &mut Checks) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let s: f64 = rng.gen_range(0.0..0.99);
            let r: f64 = rng.gen_range(0.0..0.99);
            worst = worst
                .max((ellip_k(s)? / quad_k(s)? - 1.0).abs())
                .max((ellip_e(s)? / quad_e(s)? - 1.0).abs())
                .max((ellip_pi(r, s)? / quad_pi(r, s)? - 1.0).abs());
        }
        ck.bound(
            "max relative deviation from quadrature on 200 points",
            worst,
            1e-9,
        );
        let at_zero = (ellip_k(0.0)? - FRAC_PI_2)
            .abs()
            .max((ellip_e(0.0)? - FRAC_PI_2).abs())
            .max((ellip_pi(0.0, 0.0)? - FRAC_PI_2).abs());
        ck.bound("K(0), E(0), Pi(0,0) vs pi/2", at_zero, 1e-14);
        let mut eep_ok = true;
        for _ in 0..200 {
            let (a, b): (f64, f64) = (rng.gen_range(0.001..0.999), rng.gen_range(0.001..0.999));
            let (r, s) = (a.min(b), a.max(b));
            if s - r > 1e-9 {
                eep_ok &= eep_holds(r, s)?;
            }
        }
        ck.flag(
            "inequality between Pi and its theta approximation holds on 200 samples",
            eep_ok,
        );
        let k_rem = |s: f64| -> Result<f64> {
            Ok(ellip_k(s)? - FRAC_PI_2 * (1.0 + s / 4.0 + 9.0 * s * s / 64.0))
        };
        let pi_rem = |r: f64, s: f64| -> Result<f64> {
            Ok(ellip_pi(r, s)?
                - FRAC_PI_2
                    * (1.0
                        + r / 2.0
                        + s / 4.0
                        + 3.0 * r * r / 8.0
                        + 9.0 * s * s / 64.0
                        + 3.0 * r * s / 16.0))
        };
        let ratio_rem = |r: f64, s: f64| -> Result<f64> {
            Ok(pi_over_k(r, s)? - (1.0 + r / 2.0 + 3.0 * r * r / 8.0 + r * s / 16.0))
        };
        ck.relative(
            "K series remainder ratio",
            k_rem(1e-2)? / k_rem(1e-3)?,
            1000.0,
            0.05,
        );
        ck.relative(
            "Pi series remainder ratio",
            pi_rem(0.01, 0.01)? / pi_rem(0.001, 0.001)?,
            1000.0,
            0.05,
        );
        ck.relative(
            "Pi/K series remainder ratio",
            ratio_rem(0.02, 0.03)? / ratio_rem(0.002, 0.003)?,
            1000.0,
            0.05,
        );
        Ok(())
    }

    fn structural(&self, ck: &mut Checks) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1d);
        let (mut degen, mut norm) = (0.0f64, 0.0f64);
        for _ in 0..40 {
            let b = random_config(&mut rng);
            // interior and exterior coalescence
            for (two, one, beta) in [
                (vec![b[0], b[1], b[1], b[3]], vec![b[0], b[3]], b[1]),
                (vec![b[0], b[1], b[2], b[2]], vec![b[0], b[1]], b[2]),
            ] {
                let c2 = EndpointConfig::degenerate(two)?;
                let c1 = EndpointConfig::new(one)?;
                for k in 0..3 {
                    let (p2, p1) = (p_k(k, &c2)?, p_k(k, &c1)?);
                    for i in 0..20 {
                        let z = -4.0 + 0.4 * i as f64;
                        let scale = 1.0 + p1.eval(z).abs() * (z - beta).abs();
                        degen = degen.max((p2.eval(z) - (z - beta) * p1.eval(z)).abs() / scale);
                    }
                }
            }
            let c = EndpointConfig::new(b.clone())?;
            let unit = gap_integral(&Polynomial::constant(1.0), &b)?;
            for k in 0..=4 {
                let p = p_k(k, &c)?;
                let peak = (0..=32)
                    .map(|i| p.eval(b[1] + (b[2] - b[1]) * i as f64 / 32.0).abs())
                    .fold(0.0, f64::max);
                norm = norm.max(gap_integral(&p, &b)?.abs() / (peak * unit));
            }
        }
        ck.bound("degeneration identity max defect", degen, 1e-9);
        ck.bound("two-cut normalization integral, relative", norm, 1e-8);

        let mut worst_norm = 0.0f64;
        let mut worst_res = 0.0f64;
        let mut count = 0;
        let mut traces = vec![self.quartic_trace()?];
        for which in 0..BE_C.len() {
            traces.push(self.be_trace(which)?);
        }
        for (pot, tr) in &traces {
            for s in tr.samples().step_by(3) {
                worst_norm =
                    worst_norm.max((density_norm(pot, s.temperature, &s.config)? - 1.0).abs());
                worst_res = worst_res.max(residual_norm(pot, s.temperature, &s.config)?);
                count += 1;
            }
        }
        ck.bound(
            &format!("density norm deviation over {count} trajectory samples"),
            worst_norm,
            1e-6,
        );
        ck.bound("hodograph residual along trajectories", worst_res, 1e-6);

        let (pot, tr) = self.be_trace(2)?;
        let events: Vec<f64> = tr.events.iter().map(|e| e.critical_temperature).collect();
        let mut worst_id = 0.0f64;
        let mut n = 0;
        let mut t = 0.1;
        while n < 20 {
            let h = stencil_step(t);
            if events.iter().all(|tc| (t - tc).abs() > 5.0 * h) {
                let nodes: Vec<f64> = (-2..=2).map(|k| t + k as f64 * h).collect();
                let vals = nodes
                    .iter()
                    .map(|&x| {
                        tr.state_at(pot, x)
                            .and_then(|s| free_energy(pot, x, &s.config))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let v1 = lagrange_multiplier(pot, t, &tr.state_at(pot, t)?.config)?;
                worst_id = worst_id.max((finite_difference(t, &nodes, &vals, 1) + v1).abs());
                n += 1;
            }
            t += 0.14;
        }
        ck.bound("dF/dT + v1 at 20 temperatures", worst_id, 1e-5);
        Ok(())
    }
}

type Traced = std::result::Result<(Potential, Trace), String>;

fn trace_model(model: SeedModel, (t_min, t_max): (f64, f64)) -> Traced {
    let (pot, seed) = seed_closed_form(model).map_err(|e| e.to_string())?;
    let tr = trace(&pot, &seed, &TraceOptions::new(t_min, t_max)).map_err(|e| e.to_string())?;
    Ok((pot, tr))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn random_config(rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut b: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        b.sort_by(f64::total_cmp);
        if b.windows(2).all(|w| w[1] - w[0] > 0.05) {
            return b;
        }
    }
}

/// `∫_{β₂}^{β₃} P/√|∏(x − β_i)|`.
fn gap_integral(p: &Polynomial, b: &[f64]) -> Result<f64> {
    tanh_sinh(
        |x, da, db| p.eval(x) / ((x - b[0]) * da * db * (b[3] - x)).sqrt(),
        b[1],
        b[2],
        1e-13,
    )
}

// Quadrature oracles after θ → t = sin θ; the 1/√(1 − t) edge uses the endpoint distance.
fn quad_k(s: f64) -> Result<f64> {
    tanh_sinh(
        |t, _, db| 1.0 / ((db * (1.0 + t)).sqrt() * ((1.0 - s) + s * db * (1.0 + t)).sqrt()),
        0.0,
        1.0,
        1e-13,
    )
}

fn quad_e(s: f64) -> Result<f64> {
    tanh_sinh(
        |t, _, db| (1.0 - s * t * t).sqrt() / (db * (1.0 + t)).sqrt(),
        0.0,
        1.0,
        1e-13,
    )
}

fn quad_pi(r: f64, s: f64) -> Result<f64> {
    tanh_sinh(
        |t, _, db| 1.0 / ((db * (1.0 + t)).sqrt() * (1.0 - r * t * t) * (1.0 - s * t * t).sqrt()),
        0.0,
        1.0,
        1e-13,
    )
}

fn eep_holds(r: f64, s: f64) -> Result<bool> {
    let (sr, ss) = (r.sqrt(), s.sqrt());
    let theta = theta_ratio(r, s)?;
    let approx = 2f64.sqrt() * theta
        / ((1.0 + ss).sqrt() * (1.0 + sr) * (1.0 - sr).sqrt() * (ss - sr).sqrt());
    let bound = 8.0 * std::f64::consts::PI / (r.powf(0.25) * (ss - sr).sqrt());
    Ok((ellip_pi(r, s)? - approx).abs() <= bound)
}

/// Report for a full run: one line per criterion and a summary line.
pub fn report(results: &[Criterion]) -> String {
    let mut out = String::new();
    for c in results {
        let _ = writeln!(out, "{}", c.line());
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("AC{}", c.id))
        .collect();
    let _ = writeln!(
        out,
        "{} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    out
}
