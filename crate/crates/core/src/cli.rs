//! Command-line front end: model specification, subcommands and file output.
//!
//! Settings come from an optional `key=value` file (`--config`) and are then
//! overridden by flags. Output files are comma-separated with one header row;
//! every number is written with 17 significant digits.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::equilibrium::{admissibility, density_profile, solve_endpoints, Verdict};
use crate::error::{Error, Result};
use crate::flow::{
    seed_closed_form, trace, FlowState, LaunchCoefficients, SeedModel, Trace, TraceOptions,
    TransitionKind,
};
use crate::geometry::EndpointConfig;
use crate::models::{high_temperature_start, Preset};
use crate::polyops::Potential;
use crate::selftest::{report, Selftest};
use crate::thermo::{
    birth_divergence_check, continuity, specific_heat, thermo_curve, third_derivative_jump,
};

#[derive(Debug, Parser)]
#[command(
    name = "cutflow",
    version,
    about = "Endpoint flows and phase transitions of Hermitian matrix models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace the endpoints over [tmin, tmax] and list the transitions.
    Trace,
    /// Sample the density at --temp.
    Density,
    /// Free energy, multiplier and derivatives over [tmin, tmax], with transition analysis.
    Thermo,
    /// Run the acceptance checks; --tol scales every tolerance.
    Selftest,
}

/// Flags shared by all subcommands; each overrides the config key of the same name.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// key=value file with defaults for the flags below
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// quartic_even or bleher_eynard
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Bleher-Eynard parameter, 0 <= c < 1/sqrt(2)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// comma-separated couplings t_1,...,t_2p of V = sum t_n z^n
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    #[arg(long, global = true)]
    pub tmin: Option<f64>,
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// temperature for `density`
    #[arg(long, global = true)]
    pub temp: Option<f64>,
    /// main output file; side files are named after it
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// integrator tolerance, or the tolerance scale for `selftest`
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// comma-separated one-cut endpoints at tmax for a user potential
    #[arg(long = "seed-guess", global = true, allow_hyphen_values = true)]
    pub seed_guess: Option<String>,
    /// samples per cut for `density`, grid size for `thermo`
    #[arg(long, global = true)]
    pub points: Option<usize>,
}

/// Potential selection.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSource {
    Preset(Preset),
    Couplings(Vec<f64>),
}

/// Fully resolved run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub source: ModelSource,
    pub t_min: f64,
    pub t_max: f64,
    pub temperature: Option<f64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub seed_guess: Option<Vec<f64>>,
    pub points: Option<usize>,
}

const DEFAULT_RANGE: (f64, f64) = (0.05, 3.0);
const CONFIG_KEYS: [&str; 10] = [
    "preset",
    "c",
    "coeffs",
    "tmin",
    "tmax",
    "temp",
    "out",
    "tol",
    "seed_guess",
    "points",
];

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("{key}: not a number: {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_f64(key, x)).collect()
}

/// Parses `key=value` lines; blank lines and lines starting with `#` are skipped.
pub fn parse_config(text: &str) -> Result<Flags> {
    let mut f = Flags::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value", n + 1));
        };
        let (k, v) = (k.trim().replace('-', "_"), v.trim());
        match k.as_str() {
            "preset" => f.preset = Some(v.to_string()),
            "c" => f.c = Some(parse_f64("c", v)?),
            "coeffs" => f.coeffs = Some(v.to_string()),
            "tmin" => f.tmin = Some(parse_f64("tmin", v)?),
            "tmax" => f.tmax = Some(parse_f64("tmax", v)?),
            "temp" => f.temp = Some(parse_f64("temp", v)?),
            "out" => f.out = Some(PathBuf::from(v)),
            "tol" => f.tol = Some(parse_f64("tol", v)?),
            "seed_guess" => f.seed_guess = Some(v.to_string()),
            "points" => {
                f.points = Some(
                    v.parse()
                        .map_err(|_| Error::Usage(format!("points: not a count: {v:?}")))?,
                )
            }
            _ => {
                return usage(format!(
                    "config line {}: unknown key {k:?} (known: {})",
                    n + 1,
                    CONFIG_KEYS.join(", ")
                ))
            }
        }
    }
    Ok(f)
}

impl Flags {
    /// Fills unset fields from `base`.
    fn or(self, base: Flags) -> Flags {
        Flags {
            config: self.config,
            preset: self.preset.or(base.preset),
            c: self.c.or(base.c),
            coeffs: self.coeffs.or(base.coeffs),
            tmin: self.tmin.or(base.tmin),
            tmax: self.tmax.or(base.tmax),
            temp: self.temp.or(base.temp),
            out: self.out.or(base.out),
            tol: self.tol.or(base.tol),
            seed_guess: self.seed_guess.or(base.seed_guess),
            points: self.points.or(base.points),
        }
    }

    /// Merges the config file under the flags and validates the result.
    pub fn resolve(self) -> Result<ModelSpec> {
        let merged = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Usage(format!("config {}: {e}", p.display())))?;
                self.or(parse_config(&text)?)
            }
            None => self,
        };
        let source = match (merged.preset.as_deref(), merged.coeffs.as_deref()) {
            (Some(_), Some(_)) => return usage("give either a preset or coeffs, not both"),
            (Some("quartic_even"), None) => {
                if merged.c.is_some() {
                    return usage("c applies only to the bleher_eynard preset");
                }
                ModelSource::Preset(Preset::QuarticEven)
            }
            (Some("bleher_eynard"), None) => match merged.c {
                Some(c) => ModelSource::Preset(Preset::BleherEynard { c }),
                None => return usage("the bleher_eynard preset needs c"),
            },
            (Some(p), None) => {
                return usage(format!(
                    "unknown preset {p:?} (quartic_even, bleher_eynard)"
                ))
            }
            (None, Some(list)) => ModelSource::Couplings(parse_list("coeffs", list)?),
            (None, None) => ModelSource::Preset(Preset::QuarticEven),
        };
        let t_min = merged.tmin.unwrap_or(DEFAULT_RANGE.0);
        let t_max = merged.tmax.unwrap_or(DEFAULT_RANGE.1);
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return usage(format!(
                "empty or invalid temperature range [{t_min}, {t_max}]"
            ));
        }
        if let Some(t) = merged.temp {
            if !(t > 0.0 && t.is_finite()) {
                return usage(format!("temp must be positive, got {t}"));
            }
        }
        if let Some(tol) = merged.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return usage(format!("tol must be positive, got {tol}"));
            }
        }
        let seed_guess = merged
            .seed_guess
            .as_deref()
            .map(|s| parse_list("seed_guess", s))
            .transpose()?;
        if seed_guess.is_some() && matches!(source, ModelSource::Preset(_)) {
            return usage("seed_guess applies only to a coeffs potential");
        }
        Ok(ModelSpec {
            source,
            t_min,
            t_max,
            temperature: merged.temp,
            out: merged.out,
            tol: merged.tol,
            seed_guess,
            points: merged.points,
        })
    }
}

impl ModelSpec {
    pub fn potential(&self) -> Result<Potential> {
        let pot = match &self.source {
            ModelSource::Preset(p) => p.potential(),
            ModelSource::Couplings(c) => Potential::new(c.clone()),
        };
        pot.map_err(|e| Error::Usage(e.to_string()))
    }

    /// Starting state for a trace ending at `t_max`.
    fn seed(&self, pot: &Potential, t_max: f64) -> Result<FlowState> {
        let as_seed = |e: Error| match e {
            Error::Seed(_) => e,
            other => Error::Seed(other.to_string()),
        };
        match &self.source {
            ModelSource::Preset(Preset::QuarticEven) => {
                let model = if t_max > 1.0 {
                    SeedModel::QuarticOneCut { temperature: t_max }
                } else {
                    SeedModel::QuarticTwoCut { temperature: t_max }
                };
                Ok(seed_closed_form(model)?.1)
            }
            ModelSource::Preset(Preset::BleherEynard { c }) => {
                Ok(seed_closed_form(SeedModel::BleherEynardCritical { c: *c })
                    .map_err(|e| Error::Usage(e.to_string()))?
                    .1)
            }
            ModelSource::Couplings(_) => {
                let (t, config) = match &self.seed_guess {
                    Some(g) => {
                        let guess = EndpointConfig::new(g.clone())
                            .map_err(|e| Error::Usage(format!("seed_guess: {e}")))?;
                        (
                            t_max,
                            solve_endpoints(pot, t_max, &guess, 1e-12).map_err(as_seed)?,
                        )
                    }
                    None => high_temperature_start(pot, t_max, 1e-12)?,
                };
                let verdict = admissibility(pot, t, &config).verdict;
                if verdict != Verdict::Regular {
                    return Err(Error::Seed(format!(
                        "the solution found at T = {t} from the seed guess, {:?}, is {verdict:?}",
                        config.beta()
                    )));
                }
                FlowState::new(pot, t, config).map_err(as_seed)
            }
        }
    }

    fn trace_options(&self, t_min: f64, t_max: f64) -> TraceOptions {
        let mut opts = TraceOptions::new(t_min, t_max);
        if let Some(tol) = self.tol {
            opts.integrate.atol = tol;
            opts.integrate.rtol = tol;
        }
        opts
    }

    /// Traces all phases on `[t_min, t_max]`.
    pub fn trace_range(&self, pot: &Potential, t_min: f64, t_max: f64) -> Result<Trace> {
        let seed = self.seed(pot, t_max)?;
        trace(pot, &seed, &self.trace_options(t_min, t_max))
    }

    fn out_path(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

/// `<stem>_<suffix>.csv` next to `main`.
pub fn side_path(main: &Path, suffix: &str) -> PathBuf {
    let stem = main
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    main.with_file_name(format!("{stem}_{suffix}.csv"))
}

/// Round-trip formatting with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// CSV table with a fixed header.
struct Table {
    text: String,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    fn row<S: AsRef<str>>(&mut self, fields: impl IntoIterator<Item = S>) {
        let fields: Vec<String> = fields.into_iter().map(|f| f.as_ref().to_string()).collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.text)?;
        Ok(())
    }
}

fn kind_name(kind: TransitionKind) -> &'static str {
    match kind {
        TransitionKind::Merge => "merge",
        TransitionKind::Birth => "birth",
    }
}

/// Writes the endpoint table and the events table; returns their paths.
pub fn cmd_trace(spec: &ModelSpec, log: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let pot = spec.potential()?;
    let tr = spec.trace_range(&pot, spec.t_min, spec.t_max)?;
    let width = tr
        .samples()
        .map(|s| s.config.beta().len())
        .max()
        .unwrap_or(2);
    let mut header = vec!["T".to_string(), "s".to_string()];
    header.extend((1..=width).map(|i| format!("beta_{i}")));
    let mut table = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for s in tr.samples() {
        let beta = s.config.beta();
        let mut row = vec![num(s.temperature), s.config.phase().to_string()];
        row.extend((0..width).map(|i| beta.get(i).map(|b| num(*b)).unwrap_or_default()));
        table.row(row);
    }
    let mut events = Table::new(&["kind", "T_c", "beta", "amplitude", "curvature", "gamma"]);
    for ev in &tr.events {
        let (amp, curv, gamma) = match ev.launch {
            LaunchCoefficients::Merge {
                amplitude,
                curvature,
            } => (Some(amplitude), Some(curvature), None),
            LaunchCoefficients::Birth { gamma } => (None, None, Some(gamma)),
        };
        events.row([
            kind_name(ev.kind).to_string(),
            num(ev.critical_temperature),
            num(ev.point),
            opt_num(amp),
            opt_num(curv),
            opt_num(gamma),
        ]);
        writeln!(
            log,
            "{} at T = {:.10} (beta = {:.10})",
            kind_name(ev.kind),
            ev.critical_temperature,
            ev.point
        )?;
    }
    let main = spec.out_path("trace.csv");
    let side = side_path(&main, "events");
    table.write(&main)?;
    events.write(&side)?;
    writeln!(
        log,
        "{} samples, {} transitions",
        tr.samples().count(),
        tr.events.len()
    )?;
    Ok(vec![main, side])
}

/// Writes density samples at `spec.temperature` and a summary with the norm.
pub fn cmd_density(spec: &ModelSpec, log: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let Some(t) = spec.temperature else {
        return usage("density needs --temp");
    };
    let pot = spec.potential()?;
    let (lo, hi) = (spec.t_min.min(t), spec.t_max.max(t));
    let tr = spec.trace_range(&pot, lo, hi)?;
    let state = tr.state_at(&pot, t)?;
    let config = solve_endpoints(&pot, t, &state.config, 1e-13).unwrap_or(state.config);
    let prof = density_profile(&pot, t, &config, spec.points.unwrap_or(201))?;
    let mut table = Table::new(&["cut", "x", "rho"]);
    for (j, cut) in prof.cuts.iter().enumerate() {
        for &(x, rho) in cut {
            table.row([(j + 1).to_string(), num(x), num(rho)]);
        }
    }
    let mut summary = Table::new(&["quantity", "value"]);
    summary.row(["T".to_string(), num(t)]);
    summary.row(["s".to_string(), config.phase().to_string()]);
    summary.row(["norm".to_string(), num(prof.norm)]);
    for (i, b) in config.beta().iter().enumerate() {
        summary.row([format!("beta_{}", i + 1), num(*b)]);
    }
    let main = spec.out_path("density.csv");
    let side = side_path(&main, "summary");
    table.write(&main)?;
    summary.write(&side)?;
    writeln!(
        log,
        "T = {t}: {} cut(s) {:?}, norm {:.12}",
        config.phase(),
        config.beta(),
        prof.norm
    )?;
    Ok(vec![main, side])
}

/// Writes the thermodynamic curve and the per-transition analysis.
pub fn cmd_thermo(spec: &ModelSpec, log: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let pot = spec.potential()?;
    let tr = spec.trace_range(&pot, spec.t_min, spec.t_max)?;
    let n = spec.points.unwrap_or(200).max(2);
    // stay one stencil step inside the range
    let (lo, hi) = (spec.t_min * 1.01, spec.t_max / 1.01);
    let temps: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let curve = thermo_curve(&pot, &tr, &temps)?;
    let mut table = Table::new(&["T", "s", "F", "v1", "d2F", "d3F"]);
    for s in &curve.samples {
        table.row([
            num(s.temperature),
            s.phase.to_string(),
            num(s.free_energy),
            num(s.multiplier),
            num(s.d2f),
            num(s.d3f),
        ]);
    }
    let mut trans = Table::new(&[
        "kind",
        "T_c",
        "beta",
        "d2F_one_cut",
        "jump_d3F",
        "jump_d3F_closed_form",
        "delta_F",
        "delta_dF",
        "delta_d2F",
        "divergence_exponent",
        "divergence_amplitude",
    ]);
    for ev in &tr.events {
        let cont = continuity(&pot, ev)?;
        let (jump, closed, exponent, amplitude) = match ev.kind {
            TransitionKind::Merge => {
                let j = third_derivative_jump(&pot, ev)?;
                (Some(j.numeric), j.closed_form, None, None)
            }
            TransitionKind::Birth => {
                let d = birth_divergence_check(&pot, ev)?;
                (None, None, Some(d.exponent), Some(d.amplitude))
            }
        };
        trans.row([
            kind_name(ev.kind).to_string(),
            num(ev.critical_temperature),
            num(ev.point),
            num(specific_heat(&ev.one_cut)?),
            opt_num(jump),
            opt_num(closed),
            num(cont.delta_f),
            num(cont.delta_df),
            num(cont.delta_d2f),
            opt_num(exponent),
            opt_num(amplitude),
        ]);
        writeln!(
            log,
            "{} at T = {:.10}: |dF| {:.2e}, |dF'| {:.2e}, |dF''| {:.2e}{}",
            kind_name(ev.kind),
            ev.critical_temperature,
            cont.delta_f,
            cont.delta_df,
            cont.delta_d2f,
            match (jump, exponent) {
                (Some(j), _) => format!(", F''' jump {j:.8}"),
                (_, Some(e)) => format!(", F''' divergence exponent {e:.4}"),
                _ => String::new(),
            }
        )?;
    }
    let main = spec.out_path("thermo.csv");
    let side = side_path(&main, "transitions");
    table.write(&main)?;
    trans.write(&side)?;
    writeln!(
        log,
        "{} temperatures, {} transitions",
        curve.samples.len(),
        tr.events.len()
    )?;
    Ok(vec![main, side])
}

/// Runs the acceptance checks; returns whether all passed.
pub fn cmd_selftest(tol_scale: f64, log: &mut dyn Write) -> Result<bool> {
    let results = Selftest::new(tol_scale).run_all();
    write!(log, "{}", report(&results))?;
    Ok(results.iter().all(|c| c.passed))
}

/// Process exit code for an error: 1 for usage, 2 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Domain(_) | Error::Io(_) => 1,
        Error::Numeric(_)
        | Error::Singularity { .. }
        | Error::Integration { .. }
        | Error::SingularDensity { .. }
        | Error::Seed(_) => 2,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Selftest => {
            let scale = match cli.flags.resolve() {
                Ok(spec) => spec.tol.unwrap_or(1.0),
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return exit_code(&e);
                }
            };
            cmd_selftest(scale, out).map(|ok| if ok { 0 } else { 1 })
        }
        cmd => cli.flags.resolve().and_then(|spec| {
            let files = match cmd {
                Command::Trace => cmd_trace(&spec, out),
                Command::Density => cmd_density(&spec, out),
                _ => cmd_thermo(&spec, out),
            }?;
            for f in files {
                writeln!(out, "wrote {}", f.display())?;
            }
            Ok(0)
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
