//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for an invalid configuration (the message
//! names the field or flag), 1 when a numerical check or computation fails.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use geomgate_core::analysis::{gate_distance, SweepResult};
use geomgate_core::onequbit::{
    composed_gate, dynamical_phase, eigenbasis, evolve_numeric, evolve_numeric_with, solid_angle, target_gate,
    GROUND,
};
use geomgate_core::pulses::build_one_qubit_schedule;
use geomgate_core::twoqubit::{blockade_gate, entangling_witness, evolve_numeric_full, frame_transform, required_steps, Frame};
use serde_json::json;

use crate::config::{
    Angle, AxisName, CommandName, ConfigError, EnvelopeName, Format, Frequency, FrameName, GateName, MethodName,
    RunConfig, TargetName,
};
use crate::io::{
    format_matrix, format_schedule, json_string, matrix_to_csv, matrix_to_json, schedule_to_json, sweep_to_csv,
    sweep_to_json, write_atomic,
};
use crate::{scan, verify};

#[derive(Parser, Debug)]
#[command(name = "geomgate", version, about = "Pulse-level simulator for geometric Rydberg-atom gates")]
pub struct Cli {
    /// JSON run configuration. Flags given on the command line override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file, written atomically. Results go to stdout when absent.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodName>,
    #[arg(long, global = true)]
    pub max_phase_per_step: Option<f64>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OneQubitArgs {
    /// Polar angle of the rotation axis (rad, `pi` literals allowed).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<Angle>,
    /// Azimuth of the rotation axis.
    #[arg(long, allow_hyphen_values = true)]
    pub varphi: Option<Angle>,
    /// Geometric phase.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<Angle>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TwoQubitArgs {
    /// Mixing angle of the two couplings.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<Angle>,
    /// Interaction strength V (rad/us, or e.g. `200pi MHz`).
    #[arg(long)]
    pub interaction: Option<Frequency>,
    /// Total pulse area; must be `pi`.
    #[arg(long)]
    pub area: Option<Angle>,
    #[arg(long, value_enum)]
    pub frame: Option<FrameName>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EnvelopeArgs {
    #[arg(long, value_enum)]
    pub envelope: Option<EnvelopeName>,
    /// Peak Rabi frequency (rad/us, or e.g. `5pi MHz`).
    #[arg(long)]
    pub peak: Option<Frequency>,
    /// Gaussian duration over standard deviation.
    #[arg(long)]
    pub width_ratio: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Build a one-qubit gate, print it and its pulse schedule.
    Gate1 {
        #[command(flatten)]
        one: OneQubitArgs,
        #[command(flatten)]
        env: EnvelopeArgs,
    },
    /// Build the two-qubit blockade gate and simulate it.
    Gate2 {
        #[command(flatten)]
        two: TwoQubitArgs,
        #[command(flatten)]
        env: EnvelopeArgs,
    },
    /// Run the invariant suite.
    Verify,
    /// Gate error against V / peak in the rotating frame.
    BlockadeScan {
        /// Comma-separated V / peak values.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[command(flatten)]
        two: TwoQubitArgs,
        #[command(flatten)]
        env: EnvelopeArgs,
    },
    /// Gate error under systematic control errors.
    RobustnessScan {
        #[arg(long, value_enum)]
        gate: Option<GateName>,
        #[arg(long, value_enum)]
        axis: Option<AxisName>,
        /// Comma-separated error values (default grid when absent).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[command(flatten)]
        one: OneQubitArgs,
        #[command(flatten)]
        two: TwoQubitArgs,
        #[command(flatten)]
        env: EnvelopeArgs,
    },
    /// Gate infidelity from Rydberg decay.
    DecayScan {
        #[arg(long, value_enum)]
        gate: Option<GateName>,
        /// Comma-separated decay rates gamma_r (rad/us).
        #[arg(long, value_delimiter = ',', conflicts_with = "tau_c")]
        rates: Option<Vec<Frequency>>,
        /// Comma-separated coherence times (us), converted to rates 1 / tau_c.
        #[arg(long, value_delimiter = ',')]
        tau_c: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        target: Option<TargetName>,
        #[command(flatten)]
        one: OneQubitArgs,
        #[command(flatten)]
        two: TwoQubitArgs,
        #[command(flatten)]
        env: EnvelopeArgs,
    },
    /// Bloch-sphere path of the cyclic state with its phases.
    BlochPath {
        #[command(flatten)]
        one: OneQubitArgs,
        #[command(flatten)]
        env: EnvelopeArgs,
    },
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numeric(String),
    Io(String),
    Verify(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numeric(m) => write!(f, "numerical failure: {m}"),
            RunError::Io(m) => write!(f, "i/o failure: {m}"),
            RunError::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn numeric<E: fmt::Display>(e: E) -> RunError {
    RunError::Numeric(e.to_string())
}

fn apply_one(c: &mut RunConfig, a: &OneQubitArgs) {
    if let Some(v) = a.theta {
        c.one_qubit.theta = v;
    }
    if let Some(v) = a.varphi {
        c.one_qubit.varphi = v;
    }
    if let Some(v) = a.gamma {
        c.one_qubit.gamma = v;
    }
}

fn apply_two(c: &mut RunConfig, a: &TwoQubitArgs) {
    if let Some(v) = a.phi {
        c.two_qubit.phi = v;
    }
    if let Some(v) = a.interaction {
        c.two_qubit.interaction = v;
    }
    if let Some(v) = a.area {
        c.two_qubit.area = v;
    }
    if let Some(v) = a.frame {
        c.two_qubit.frame = v;
    }
}

fn apply_env(c: &mut RunConfig, a: &EnvelopeArgs) {
    if let Some(v) = a.envelope {
        c.envelope.kind = v;
    }
    if let Some(v) = a.peak {
        c.envelope.peak = v;
    }
    if let Some(v) = a.width_ratio {
        c.envelope.width_ratio = v;
    }
}

/// Merges the optional config file with command-line flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json_unchecked(&text)?
        }
        None => {
            let command = cli
                .command
                .as_ref()
                .map(command_name)
                .ok_or_else(|| ConfigError::new("command", "no subcommand and no --config given"))?;
            RunConfig::new(command)
        }
    };
    if let Some(cmd) = &cli.command {
        config.command = command_name(cmd);
        match cmd {
            Command::Gate1 { one, env } | Command::BlochPath { one, env } => {
                apply_one(&mut config, one);
                apply_env(&mut config, env);
            }
            Command::Gate2 { two, env } => {
                apply_two(&mut config, two);
                apply_env(&mut config, env);
            }
            Command::Verify => {}
            Command::BlockadeScan { ratios, two, env } => {
                if let Some(r) = ratios {
                    config.scan.ratios = r.clone();
                }
                apply_two(&mut config, two);
                apply_env(&mut config, env);
            }
            Command::RobustnessScan { gate, axis, values, one, two, env } => {
                if let Some(g) = gate {
                    config.scan.gate = *g;
                }
                if let Some(a) = axis {
                    config.scan.axis = *a;
                }
                if values.is_some() {
                    config.scan.values = values.clone();
                }
                apply_one(&mut config, one);
                apply_two(&mut config, two);
                apply_env(&mut config, env);
            }
            Command::DecayScan { gate, rates, tau_c, target, one, two, env } => {
                if let Some(g) = gate {
                    config.scan.gate = *g;
                }
                if let Some(r) = rates {
                    config.decay.rates = r.clone();
                }
                if let Some(t) = tau_c {
                    if let Some(bad) = t.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                        return Err(ConfigError::new("--tau-c", format!("coherence times must be positive, got {bad}")));
                    }
                    config.decay.rates = t.iter().map(|x| Frequency(1.0 / x)).collect();
                }
                if let Some(t) = target {
                    config.decay.target = *t;
                }
                apply_one(&mut config, one);
                apply_two(&mut config, two);
                apply_env(&mut config, env);
            }
        }
    }
    if let Some(v) = &cli.out {
        config.output.path = Some(v.clone());
    }
    if let Some(v) = cli.format {
        config.output.format = v;
    }
    if let Some(v) = cli.steps {
        config.integrator.steps = v;
    }
    if let Some(v) = cli.method {
        config.integrator.method = v;
    }
    if let Some(v) = cli.max_phase_per_step {
        config.integrator.max_phase_per_step = v;
    }
    config.validate()?;
    Ok(config)
}

fn command_name(c: &Command) -> CommandName {
    match c {
        Command::Gate1 { .. } => CommandName::Gate1,
        Command::Gate2 { .. } => CommandName::Gate2,
        Command::Verify => CommandName::Verify,
        Command::BlockadeScan { .. } => CommandName::BlockadeScan,
        Command::RobustnessScan { .. } => CommandName::RobustnessScan,
        Command::DecayScan { .. } => CommandName::DecayScan,
        Command::BlochPath { .. } => CommandName::BlochPath,
    }
}

/// Writes `content` to the configured path, or to `out` when there is none.
fn emit(config: &RunConfig, content: &str, out: &mut dyn Write) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Io(e.to_string());
    match &config.output.path {
        Some(p) => {
            write_atomic(Path::new(p), content.as_bytes()).map_err(|e| RunError::Io(format!("{p}: {e}")))?;
            writeln!(out, "wrote {p}").map_err(io)
        }
        None => out.write_all(content.as_bytes()).map_err(io),
    }
}

fn emit_sweep(config: &RunConfig, result: &SweepResult, out: &mut dyn Write) -> Result<(), RunError> {
    let content = match config.output.format {
        Format::Csv => sweep_to_csv(result),
        Format::Json => json_string(&sweep_to_json(result, Some(config))),
    };
    emit(config, &content, out)
}

/// Executes a validated configuration.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), RunError> {
    let w = |e: std::io::Error| RunError::Io(e.to_string());
    match config.command {
        CommandName::Gate1 => {
            let spec = config.one_qubit_spec();
            let schedule = build_one_qubit_schedule(&spec, config.envelope_kind(), config.envelope.peak.0).map_err(numeric)?;
            let gate = composed_gate(&spec);
            let numeric_u = evolve_numeric_with(&schedule, &GROUND, &config.integrator(), 0.0)
                .map_err(numeric)?
                .propagator;
            let d = gate_distance(&numeric_u, &target_gate(&spec)).map_err(numeric)?;
            let mut text = format!(
                "gate1 theta={:.10} varphi={:.10} gamma={:.10}\nU =\n{}",
                spec.theta,
                spec.varphi,
                spec.gamma,
                format_matrix(&gate)
            );
            text.push_str(&format!(
                "numeric vs exact (phase-aligned Frobenius, {} steps): {:.3e}\nschedule ({:.6} us total):\n{}",
                config.integrator.steps,
                d.frobenius,
                schedule.duration(),
                format_schedule(&schedule)
            ));
            out.write_all(text.as_bytes()).map_err(w)?;
            if config.output.path.is_some() {
                let content = match config.output.format {
                    Format::Json => json_string(&json!({
                        "schema": crate::io::JSON_SCHEMA,
                        "config": config,
                        "gate": matrix_to_json(&gate),
                        "numeric_frobenius": d.frobenius,
                        "schedule": schedule_to_json(&schedule),
                    })),
                    Format::Csv => matrix_to_csv(&gate, &[("gate".into(), "one-qubit".into())]),
                };
                emit(config, &content, out)?;
            }
            Ok(())
        }
        CommandName::Gate2 => {
            let spec = config.two_qubit_spec()?;
            let gate = blockade_gate(spec.phi);
            let witness = entangling_witness(&gate).map_err(numeric)?;
            let frame = config.frame();
            let mut integ = config.integrator();
            if frame != Frame::Effective {
                integ = integ.with_steps(integ.steps.max(required_steps(&spec, &integ)));
            }
            let mut u = evolve_numeric_full(&spec, frame, &integ).map_err(numeric)?;
            if frame == Frame::Lab {
                u = &frame_transform(spec.interaction, spec.duration()).adjoint() * &u;
            }
            let d = gate_distance(&u, &gate).map_err(numeric)?;
            let text = format!(
                "gate2 phi={:.10} V={:.6} rad/us area=pi ({} us)\nU =\n{}entangling: {} (G1 = {:.6}{:+.6}i, G2 = {:.6}{:+.6}i)\n{} frame, {} steps: trace infidelity {:.3e}, average infidelity {:.3e}\n",
                spec.phi,
                spec.interaction,
                spec.duration(),
                format_matrix(&gate),
                witness.entangling,
                witness.g1.re,
                witness.g1.im,
                witness.g2.re,
                witness.g2.im,
                frame.name(),
                integ.steps,
                d.trace_infidelity,
                d.avg_infidelity
            );
            out.write_all(text.as_bytes()).map_err(w)?;
            if config.output.path.is_some() {
                let content = match config.output.format {
                    Format::Json => json_string(&json!({
                        "schema": crate::io::JSON_SCHEMA,
                        "config": config,
                        "gate": matrix_to_json(&gate),
                        "simulated": matrix_to_json(&u),
                        "entangling": witness.entangling,
                        "trace_infidelity": d.trace_infidelity,
                        "avg_infidelity": d.avg_infidelity,
                    })),
                    Format::Csv => matrix_to_csv(&gate, &[("gate".into(), "two-qubit".into())]),
                };
                emit(config, &content, out)?;
            }
            Ok(())
        }
        CommandName::Verify => {
            let checks = verify::run_suite();
            let mut first_failure = None;
            for c in &checks {
                let tag = if c.passed { "ok  " } else { "FAIL" };
                writeln!(out, "{tag} {} ({:.3e} <= {:.1e})", c.name, c.value, c.tolerance).map_err(w)?;
                if !c.passed && first_failure.is_none() {
                    first_failure = Some(c.name);
                }
            }
            if config.output.path.is_some() {
                let doc = json!({
                    "schema": crate::io::JSON_SCHEMA,
                    "checks": checks.iter().map(|c| json!({
                        "name": c.name,
                        "value": c.value,
                        "tolerance": c.tolerance,
                        "passed": c.passed,
                    })).collect::<Vec<_>>(),
                });
                emit(config, &json_string(&doc), out)?;
            }
            match first_failure {
                Some(name) => Err(RunError::Verify(name.to_string())),
                None => {
                    writeln!(out, "all {} checks passed", checks.len()).map_err(w)?;
                    Ok(())
                }
            }
        }
        CommandName::BlockadeScan => {
            let spec = config.two_qubit_spec()?;
            let result = scan::blockade_scan(&spec, &config.scan.ratios, &config.integrator()).map_err(numeric)?;
            emit_sweep(config, &result, out)
        }
        CommandName::RobustnessScan => {
            let target = config.robustness_target()?;
            let axis = config.error_axis();
            let values = config
                .scan
                .values
                .clone()
                .unwrap_or_else(|| axis.default_grid(config.envelope.peak.0));
            let result = scan::robustness_scan(&target, axis, &values, &config.integrator()).map_err(numeric)?;
            emit_sweep(config, &result, out)
        }
        CommandName::DecayScan => {
            let gate = config.decay_gate()?;
            let rates: Vec<f64> = config.decay.rates.iter().map(|r| r.0).collect();
            let result = scan::decay_scan(&gate, &rates, config.decay_target(), &config.integrator()).map_err(numeric)?;
            emit_sweep(config, &result, out)
        }
        CommandName::BlochPath => {
            let result = bloch_path(config)?;
            emit_sweep(config, &result, out)
        }
    }
}

fn bloch_path(config: &RunConfig) -> Result<SweepResult, RunError> {
    let spec = config.one_qubit_spec();
    let schedule = build_one_qubit_schedule(&spec, config.envelope_kind(), config.envelope.peak.0).map_err(numeric)?;
    let e = evolve_numeric(&schedule, &eigenbasis(&spec).d, config.integrator.steps).map_err(numeric)?;
    let samples = &e.path.samples;
    let mut r = SweepResult::new("bloch-path", "t", samples.iter().map(|s| s.t).collect());
    let col = |f: fn(&geomgate_core::onequbit::PathSample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
    r.push_metric("rx", col(|s| s.r[0])).map_err(numeric)?;
    r.push_metric("ry", col(|s| s.r[1])).map_err(numeric)?;
    r.push_metric("rz", col(|s| s.r[2])).map_err(numeric)?;
    r.push_metric("total_phase", col(|s| s.total_phase)).map_err(numeric)?;
    r.push_metric("dyn_integrand", col(|s| s.dynamical_integrand)).map_err(numeric)?;
    let omega = solid_angle(&e.path).ok();
    r.push_fit("solid_angle", omega);
    r.push_fit("half_solid_angle", omega.map(|o| o / 2.0));
    r.push_fit("dynamical_phase", Some(dynamical_phase(&e.path)));
    r.push_fit("gamma", Some(spec.gamma));
    r.push_meta("theta", format!("{:?}", spec.theta));
    r.push_meta("varphi", format!("{:?}", spec.varphi));
    r.push_meta("gamma", format!("{:?}", spec.gamma));
    r.push_meta("envelope", config.envelope_kind().name());
    r.push_meta("peak", format!("{:?}", config.envelope.peak.0));
    r.push_integrator_meta(&config.integrator());
    Ok(r)
}

/// Parses `args`, runs, and returns the exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = resolve_config(&cli).map_err(RunError::from).and_then(|c| run(&c, out));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(std::iter::once("geomgate").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gate1_prints_i_sigma_x() {
        let (code, out, _) = run_args(&["gate1", "--theta", "1.5707963", "--varphi", "0", "--gamma", "1.5707963"]);
        assert_eq!(code, 0);
        assert!(out.contains("[ +0.000000+0.000000i +0.000000+1.000000i ]"), "{out}");
        assert!(out.contains("[ +0.000000+1.000000i +0.000000+0.000000i ]"), "{out}");
        assert!(out.contains("seg  kind"), "{out}");
    }

    #[test]
    fn gate2_at_phi_zero() {
        let (code, out, _) = run_args(&["gate2", "--phi", "0", "--area", "pi", "--frame", "effective"]);
        assert_eq!(code, 0);
        assert!(out.contains("[ -1.000000+0.000000i +0.000000+0.000000i +0.000000+0.000000i +0.000000+0.000000i ]"), "{out}");
        assert!(out.contains("[ +0.000000+0.000000i +0.000000+0.000000i -1.000000+0.000000i +0.000000+0.000000i ]"), "{out}");
        assert!(out.contains("entangling: false"), "{out}");
    }

    #[test]
    fn invalid_config_exits_two() {
        let (code, _, err) = run_args(&["gate2", "--area", "pi/2"]);
        assert_eq!(code, 2);
        assert!(err.contains("two_qubit.area"), "{err}");
        let (code, _, _) = run_args(&["gate1", "--theta", "banana"]);
        assert_eq!(code, 2);
        let (code, _, err) = run_args(&[]);
        assert_eq!(code, 2);
        assert!(err.contains("command"), "{err}");
    }

    #[test]
    fn numeric_failure_exits_one() {
        let (code, _, err) = run_args(&["gate1", "--steps", "100", "--max-phase-per-step", "0.001"]);
        assert_eq!(code, 1, "{err}");
        assert!(err.contains("numerical failure"), "{err}");
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.json");
        std::fs::write(&cfg, r#"{"command": "gate1", "one_qubit": {"theta": "pi/2", "gamma": "pi/2"}}"#).unwrap();
        let path = cfg.to_str().unwrap();
        let (code, out, _) = run_args(&["--config", path]);
        assert_eq!(code, 0);
        assert!(out.contains("+0.000000+1.000000i"));
        let (code, out, _) = run_args(&["--config", path, "gate1", "--gamma", "pi"]);
        assert_eq!(code, 0);
        assert!(out.contains("gamma=3.1415926536"), "{out}");
        std::fs::write(&cfg, r#"{"command": "gate1", "bogus": 1}"#).unwrap();
        let (code, _, err) = run_args(&["--config", path]);
        assert_eq!(code, 2);
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn blockade_scan_csv() {
        let (code, out, _) = run_args(&["blockade-scan", "--ratios", "10,20,40,80"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], crate::io::CSV_HEADER);
        let header = lines.iter().position(|l| l.starts_with("ratio,")).unwrap();
        assert_eq!(lines[header], "ratio,infidelity_trace,infidelity_avg,leakage");
        assert_eq!(lines[header + 1..].iter().filter(|l| !l.starts_with('#')).count(), 4);
        assert!(lines.last().unwrap().starts_with("# slope_fit="));
    }

    #[test]
    fn bloch_path_and_scans_write_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("path.csv");
        let (code, _, err) = run_args(&["bloch-path", "--out", p.to_str().unwrap(), "--steps", "1000"]);
        assert_eq!(code, 0, "{err}");
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("t,rx,ry,rz,total_phase,dyn_integrand"));
        assert!(text.contains("# half_solid_angle="));

        let p = dir.path().join("decay.json");
        let (code, _, err) = run_args(&["decay-scan", "--tau-c", "100,50", "--format", "json", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["axis"][0], 0.01);
        assert_eq!(v["config"]["command"], "decay-scan");

        let (code, out, err) = run_args(&["robustness-scan", "--axis", "detuning", "--values=-1,0,1"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("detuning,trace_infidelity"), "{out}");
    }
}
