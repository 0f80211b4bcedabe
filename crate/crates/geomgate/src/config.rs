//! Run configuration: strict JSON schema plus angle and frequency literals.
//!
//! Angles are radians and accept numbers or strings such as `"pi/2"`,
//! `"-3pi/4"`, `"2*pi"`. Frequencies are rad/us and additionally accept a
//! `MHz` suffix that is read as the same angular value: `"5pi MHz"` is
//! `5 pi` rad/us.

use std::f64::consts::PI;
use std::fmt;

use geomgate_core::analysis::{ErrorAxis, RobustnessTarget};
use geomgate_core::evolve::{IntegratorConfig, Method};
use geomgate_core::onequbit::OneQubitGateSpec;
use geomgate_core::openquantum::{DecayGate, DecayTarget};
use geomgate_core::pulses::EnvelopeKind;
use geomgate_core::twoqubit::{Frame, TwoQubitGateSpec, MIN_TWO_QUBIT_STEPS};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

pub const CONFIG_SCHEMA: &str = "geomgate-config v1";

/// Invalid configuration, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parses `1.5`, `pi`, `-pi/2`, `3pi/4`, `2*pi`, `0.5 * pi / 3`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let compact = compact.to_ascii_lowercase().replace('π', "pi");
    if compact.is_empty() {
        return Err("empty angle".into());
    }
    let bad = || format!("cannot read '{text}' as an angle");
    let (num, den) = match compact.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (compact.as_str(), None),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                other => other.parse::<f64>().map_err(|_| bad())?,
            };
            c * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let value = match den {
        Some(d) => {
            let d: f64 = d.parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(format!("division by zero in '{text}'"));
            }
            value / d
        }
        None => value,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// [`parse_angle`] after dropping an optional `MHz` suffix.
pub fn parse_frequency(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    let lower = trimmed.to_ascii_lowercase();
    let body = match lower.strip_suffix("mhz") {
        Some(_) => &trimmed[..trimmed.len() - 3],
        None => trimmed,
    };
    parse_angle(body).map_err(|_| format!("cannot read '{text}' as a frequency"))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Literal {
    Number(f64),
    Text(String),
}

/// Radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle(pub f64);

/// Rad/us.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Frequency(pub f64);

macro_rules! literal_serde {
    ($ty:ident, $parse:ident) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_f64(self.0)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                match Literal::deserialize(d).map_err(|_| de::Error::custom("expected a number or a string"))? {
                    Literal::Number(x) => Ok($ty(x)),
                    Literal::Text(t) => $parse(&t).map($ty).map_err(de::Error::custom),
                }
            }
        }

        impl std::str::FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $parse(s).map($ty)
            }
        }
    };
}

literal_serde!(Angle, parse_angle);
literal_serde!(Frequency, parse_frequency);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Gate1,
    Gate2,
    Verify,
    BlockadeScan,
    RobustnessScan,
    DecayScan,
    BlochPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeName {
    #[default]
    Square,
    Sin2,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    #[default]
    ExpMidpoint,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FrameName {
    Lab,
    #[default]
    Rotating,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GateName {
    #[default]
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AxisName {
    #[default]
    Epsilon,
    PhaseOffset,
    Detuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TargetName {
    #[default]
    Ground,
    Leakage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OneQubitParams {
    pub theta: Angle,
    pub varphi: Angle,
    pub gamma: Angle,
}

impl Default for OneQubitParams {
    fn default() -> Self {
        OneQubitParams {
            theta: Angle(PI / 2.0),
            varphi: Angle(0.0),
            gamma: Angle(PI / 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoQubitParams {
    pub phi: Angle,
    /// `V`.
    pub interaction: Frequency,
    /// Must be `pi` for a gate.
    pub area: Angle,
    pub frame: FrameName,
}

impl Default for TwoQubitParams {
    fn default() -> Self {
        TwoQubitParams {
            phi: Angle(PI / 2.0),
            interaction: Frequency(200.0 * PI),
            area: Angle(PI),
            frame: FrameName::Rotating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeParams {
    pub kind: EnvelopeName,
    pub peak: Frequency,
    /// Gaussian only: duration over standard deviation.
    pub width_ratio: f64,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        EnvelopeParams {
            kind: EnvelopeName::Square,
            peak: Frequency(5.0 * PI),
            width_ratio: geomgate_core::pulses::DEFAULT_GAUSSIAN_WIDTH_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorParams {
    pub method: MethodName,
    pub steps: usize,
    pub max_phase_per_step: f64,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorParams {
            method: MethodName::ExpMidpoint,
            steps: d.steps,
            max_phase_per_step: d.max_phase_per_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanParams {
    /// `V / peak` values of a blockade scan.
    pub ratios: Vec<f64>,
    pub gate: GateName,
    pub axis: AxisName,
    /// Error values of a robustness scan; the axis default grid when absent.
    pub values: Option<Vec<f64>>,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            ratios: vec![10.0, 20.0, 40.0, 80.0],
            gate: GateName::One,
            axis: AxisName::Epsilon,
            values: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayParams {
    /// `gamma_r` values.
    pub rates: Vec<Frequency>,
    pub target: TargetName,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams {
            rates: [0.0025, 0.005, 0.01, 0.02].into_iter().map(Frequency).collect(),
            target: TargetName::Ground,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputParams {
    /// Written atomically; stdout when absent.
    pub path: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default)]
    pub one_qubit: OneQubitParams,
    #[serde(default)]
    pub two_qubit: TwoQubitParams,
    #[serde(default)]
    pub envelope: EnvelopeParams,
    #[serde(default)]
    pub integrator: IntegratorParams,
    #[serde(default)]
    pub scan: ScanParams,
    #[serde(default)]
    pub decay: DecayParams,
    #[serde(default)]
    pub output: OutputParams,
}

impl RunConfig {
    pub fn new(command: CommandName) -> Self {
        RunConfig {
            command,
            one_qubit: Default::default(),
            two_qubit: Default::default(),
            envelope: Default::default(),
            integrator: Default::default(),
            scan: Default::default(),
            decay: Default::default(),
            output: Default::default(),
        }
    }

    /// Strict parse followed by [`RunConfig::validate`].
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config = Self::from_json_unchecked(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Schema-only parse; the error names the path of the offending field.
    pub fn from_json_unchecked(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            ConfigError::new(field, e.inner().to_string())
        })?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    /// Range checks that the schema cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |field: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(field, format!("must be positive and finite, got {x}")))
            }
        };
        positive("envelope.peak", self.envelope.peak.0)?;
        if self.envelope.kind == EnvelopeName::Gaussian {
            positive("envelope.width_ratio", self.envelope.width_ratio)?;
        }
        let steps = self.integrator.steps;
        if steps < geomgate_core::evolve::MIN_STEPS {
            return Err(ConfigError::new("integrator.steps", format!("must be at least 100, got {steps}")));
        }
        let mp = self.integrator.max_phase_per_step;
        if !(mp > 0.0 && mp <= 0.5) {
            return Err(ConfigError::new("integrator.max_phase_per_step", format!("must lie in (0, 0.5], got {mp}")));
        }
        let theta = self.one_qubit.theta.0;
        if !(0.0..=PI).contains(&theta) {
            return Err(ConfigError::new("one_qubit.theta", format!("must lie in [0, pi], got {theta}")));
        }
        for (field, v) in [("one_qubit.varphi", self.one_qubit.varphi.0), ("one_qubit.gamma", self.one_qubit.gamma.0), ("two_qubit.phi", self.two_qubit.phi.0)] {
            if !v.is_finite() {
                return Err(ConfigError::new(field, "must be finite"));
            }
        }
        positive("two_qubit.interaction", self.two_qubit.interaction.0)?;
        let area = self.two_qubit.area.0;
        if (area - PI).abs() > 1e-12 * PI {
            return Err(ConfigError::new("two_qubit.area", format!("the two-qubit gate needs total area pi, got {area}")));
        }
        if self.uses_two_qubit_integrator() && steps < MIN_TWO_QUBIT_STEPS {
            return Err(ConfigError::new(
                "integrator.steps",
                format!("two-qubit runs need at least {MIN_TWO_QUBIT_STEPS} steps, got {steps}"),
            ));
        }
        match self.command {
            CommandName::BlockadeScan => {
                if self.scan.ratios.is_empty() {
                    return Err(ConfigError::new("scan.ratios", "must not be empty"));
                }
                for &r in &self.scan.ratios {
                    positive("scan.ratios", r)?;
                }
            }
            CommandName::RobustnessScan => {
                if let Some(v) = &self.scan.values {
                    if v.is_empty() {
                        return Err(ConfigError::new("scan.values", "must not be empty"));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(ConfigError::new("scan.values", "must be finite"));
                    }
                    if self.scan.axis == AxisName::Epsilon && v.iter().any(|&x| x <= -1.0) {
                        return Err(ConfigError::new("scan.values", "epsilon must exceed -1"));
                    }
                }
            }
            CommandName::DecayScan => {
                if self.decay.rates.is_empty() {
                    return Err(ConfigError::new("decay.rates", "must not be empty"));
                }
                for r in &self.decay.rates {
                    if !(r.0 >= 0.0 && r.0.is_finite()) {
                        return Err(ConfigError::new("decay.rates", format!("must be non-negative, got {}", r.0)));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn uses_two_qubit_integrator(&self) -> bool {
        match self.command {
            CommandName::Gate2 | CommandName::BlockadeScan => true,
            CommandName::RobustnessScan | CommandName::DecayScan => self.scan.gate == GateName::Two,
            _ => false,
        }
    }

    pub fn envelope_kind(&self) -> EnvelopeKind {
        match self.envelope.kind {
            EnvelopeName::Square => EnvelopeKind::Square,
            EnvelopeName::Sin2 => EnvelopeKind::Sin2,
            EnvelopeName::Gaussian => EnvelopeKind::Gaussian {
                width_ratio: self.envelope.width_ratio,
            },
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: match self.integrator.method {
                MethodName::ExpMidpoint => Method::ExpMidpoint,
                MethodName::Rk4 => Method::Rk4,
            },
            steps: self.integrator.steps,
            max_phase_per_step: self.integrator.max_phase_per_step,
            oscillation_rate: 0.0,
        }
    }

    pub fn one_qubit_spec(&self) -> OneQubitGateSpec {
        OneQubitGateSpec::new(self.one_qubit.theta.0, self.one_qubit.varphi.0, self.one_qubit.gamma.0)
    }

    pub fn two_qubit_spec(&self) -> Result<TwoQubitGateSpec, ConfigError> {
        TwoQubitGateSpec::with_pi_area(
            self.two_qubit.phi.0,
            self.two_qubit.interaction.0,
            self.envelope_kind(),
            self.envelope.peak.0,
        )
        .map_err(|e| ConfigError::new("two_qubit", e.to_string()))
    }

    pub fn frame(&self) -> Frame {
        match self.two_qubit.frame {
            FrameName::Lab => Frame::Lab,
            FrameName::Rotating => Frame::Rotating,
            FrameName::Effective => Frame::Effective,
        }
    }

    pub fn error_axis(&self) -> ErrorAxis {
        match self.scan.axis {
            AxisName::Epsilon => ErrorAxis::RabiScale,
            AxisName::PhaseOffset => ErrorAxis::PhaseOffset,
            AxisName::Detuning => ErrorAxis::Detuning,
        }
    }

    pub fn robustness_target(&self) -> Result<RobustnessTarget, ConfigError> {
        Ok(match self.scan.gate {
            GateName::One => RobustnessTarget::OneQubit {
                spec: self.one_qubit_spec(),
                kind: self.envelope_kind(),
                peak: self.envelope.peak.0,
            },
            GateName::Two => RobustnessTarget::TwoQubit(self.two_qubit_spec()?),
        })
    }

    pub fn decay_gate(&self) -> Result<DecayGate, ConfigError> {
        Ok(match self.scan.gate {
            GateName::One => DecayGate::OneQubit {
                spec: self.one_qubit_spec(),
                kind: self.envelope_kind(),
                peak: self.envelope.peak.0,
            },
            GateName::Two => DecayGate::TwoQubit(self.two_qubit_spec()?),
        })
    }

    pub fn decay_target(&self) -> DecayTarget {
        match self.decay.target {
            TargetName::Ground => DecayTarget::Ground,
            TargetName::Leakage => DecayTarget::Leakage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_literals() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("3pi/2").unwrap(), 3.0 * PI / 2.0);
        assert_eq!(parse_angle("2 * pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("π/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("0.125").unwrap(), 0.125);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("").is_err());
    }

    #[test]
    fn frequency_literals() {
        assert_eq!(parse_frequency("5pi MHz").unwrap(), 5.0 * PI);
        assert_eq!(parse_frequency("200*pi MHz").unwrap(), 200.0 * PI);
        assert_eq!(parse_frequency("15.5mhz").unwrap(), 15.5);
        assert_eq!(parse_frequency("0.01").unwrap(), 0.01);
        assert!(parse_frequency("5 GHz").is_err());
    }

    #[test]
    fn strict_parsing_names_the_field() {
        let err = RunConfig::from_json(r#"{"command": "gate1", "one_qubit": {"theta": 1, "thetta": 2}}"#).unwrap_err();
        assert!(err.field.starts_with("one_qubit"), "{err}");
        assert!(err.message.contains("thetta"), "{err}");
        let err = RunConfig::from_json(r#"{"command": "gate1", "envelope": {"peak": "fast"}}"#).unwrap_err();
        assert_eq!(err.field, "envelope.peak");
        let err = RunConfig::from_json(r#"{"command": "gate1", "envelope": {"peak": -1}}"#).unwrap_err();
        assert_eq!(err.field, "envelope.peak");
        let err = RunConfig::from_json(r#"{"command": "gate2", "two_qubit": {"area": "pi/2"}}"#).unwrap_err();
        assert_eq!(err.field, "two_qubit.area");
        let err = RunConfig::from_json(r#"{"command": "warp"}"#).unwrap_err();
        assert_eq!(err.field, "command");
        assert!(RunConfig::from_json(r#"{"one_qubit": {}}"#).is_err());
    }

    #[test]
    fn literals_inside_documents() {
        let c = RunConfig::from_json(
            r#"{"command": "gate1", "one_qubit": {"theta": "pi/2", "gamma": "pi/2"}, "envelope": {"peak": "5pi MHz"}}"#,
        )
        .unwrap();
        assert_eq!(c.one_qubit.theta.0, PI / 2.0);
        assert_eq!(c.envelope.peak.0, 5.0 * PI);
    }

    #[test]
    fn two_qubit_step_floor() {
        let mut c = RunConfig::new(CommandName::Gate2);
        c.integrator.steps = 500;
        assert_eq!(c.validate().unwrap_err().field, "integrator.steps");
        c.command = CommandName::Gate1;
        assert!(c.validate().is_ok());
    }
}
