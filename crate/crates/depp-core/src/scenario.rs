//! Scenario-file parsing: a line-oriented format with `#` comments,
//! `[section]` headers and `key = value` entries. Unknown sections and
//! keys, duplicate keys and type mismatches are rejected with
//! line-accurate errors; parsing never panics on arbitrary input.
//!
//! Sections and keys:
//! - `[source]`: `r`, `theta` (radians)
//! - `[noise.polarization]`: `model` plus model-specific keys
//!   (`bell_diagonal`: `F F1 F2 F3`; `pauli`: `px py pz target`;
//!   `matrix`: `file`)
//! - `[noise.spatial]`: `dephasing`
//! - `[protocol]`: `name` plus `rounds` (bennett) / `target_fidelity`
//!   (compare)
//! - `[run]`: `shots`, `seed`, `output`

use std::collections::BTreeMap;
use std::fmt;

use crate::noise::{BellDiagonalParams, Photon, SourceConfig};

/// A parse failure with a 1-based position pointing into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

pub type ParseResult<T> = std::result::Result<T, ParseError>;

/// Polarization-noise model selected by a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizationNoise {
    BellDiagonal(BellDiagonalParams),
    Pauli { px: f64, py: f64, pz: f64, target: Photon },
    MatrixFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    OneStepDepp,
    Bennett,
    SimonPan,
    Compare,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::OneStepDepp => "one_step_depp",
            ProtocolKind::Bennett => "bennett",
            ProtocolKind::SimonPan => "simon_pan",
            ProtocolKind::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub shots: u64,
    pub seed: u64,
    pub rounds: u32,
    pub target_fidelity: Option<f64>,
    pub output: Option<String>,
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub source: SourceConfig,
    pub noise: PolarizationNoise,
    pub spatial_dephasing: f64,
    pub protocol: ProtocolKind,
    pub run: RunSettings,
}

#[derive(Debug, Clone)]
struct RawValue {
    text: String,
    quoted: bool,
    line: usize,
    col: usize,
}

/// Flat `section.key` map with source positions; the intermediate form
/// that CLI overrides are applied to before validation.
#[derive(Debug, Clone, Default)]
pub struct RawScenario {
    entries: BTreeMap<String, RawValue>,
    last_pos: (usize, usize),
}

const SECTIONS: [&str; 5] = ["source", "noise.polarization", "noise.spatial", "protocol", "run"];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "source" => &["r", "theta"],
        "noise.polarization" => &["model", "F", "F1", "F2", "F3", "px", "py", "pz", "target", "file"],
        "noise.spatial" => &["dephasing"],
        "protocol" => &["name", "rounds", "target_fidelity"],
        "run" => &["shots", "seed", "output"],
        _ => &[],
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => in_quote = !in_quote,
            '#' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn is_word(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' || c == '+')
}

/// First pass: text to a raw `section.key` map. Rejects malformed lines,
/// unknown sections/keys and duplicate keys.
pub fn parse_raw(text: &str) -> ParseResult<RawScenario> {
    let mut raw = RawScenario::default();
    let mut section: Option<(String, usize)> = None;

    for (lineno0, full_line) in text.lines().enumerate() {
        let lineno = lineno0 + 1;
        let line = strip_comment(full_line);
        let trimmed = line.trim();
        if let Some(first) = line.find(|c: char| !c.is_whitespace()) {
            raw.last_pos = (lineno, first + 1);
        }
        if trimmed.is_empty() {
            continue;
        }
        let start_col = line.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;

        if trimmed.starts_with('[') {
            let close = match trimmed.find(']') {
                Some(c) => c,
                None => return Err(ParseError::new(lineno, start_col, "unterminated section header")),
            };
            let name = trimmed[1..close].trim().to_string();
            if !trimmed[close + 1..].trim().is_empty() {
                return Err(ParseError::new(
                    lineno,
                    start_col + close + 1,
                    "unexpected text after section header",
                ));
            }
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ParseError::new(lineno, start_col + 1, format!("unknown section `{name}`")));
            }
            section = Some((name, lineno));
            continue;
        }

        let eq = match line.find('=') {
            Some(e) => e,
            None => return Err(ParseError::new(lineno, start_col, "expected `key = value`")),
        };
        let key = line[..eq].trim();
        let key_col = line.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ParseError::new(lineno, key_col, format!("invalid key `{key}`")));
        }
        let (section_name, _) = match &section {
            Some(s) => s,
            None => {
                return Err(ParseError::new(lineno, key_col, format!("key `{key}` outside any section")))
            }
        };
        if !known_keys(section_name).contains(&key) {
            return Err(ParseError::new(
                lineno,
                key_col,
                format!("unknown key `{key}` in section `{section_name}`"),
            ));
        }

        let value_part = &line[eq + 1..];
        let vstart = match value_part.find(|c: char| !c.is_whitespace()) {
            Some(v) => v,
            None => return Err(ParseError::new(lineno, eq + 1, format!("missing value for key `{key}`"))),
        };
        let value_col = eq + 1 + vstart + 1;
        let value = value_part.trim();
        let (text_value, quoted) = if value.starts_with('"') {
            if value.len() < 2 || !value.ends_with('"') {
                return Err(ParseError::new(lineno, value_col, "unterminated quoted string"));
            }
            (value[1..value.len() - 1].to_string(), true)
        } else {
            if !is_word(value) {
                return Err(ParseError::new(lineno, value_col, format!("malformed value `{value}`")));
            }
            (value.to_string(), false)
        };

        let full_key = format!("{section_name}.{key}");
        if raw.entries.contains_key(&full_key) {
            return Err(ParseError::new(
                lineno,
                key_col,
                format!("duplicate key `{key}` in section `{section_name}`"),
            ));
        }
        raw.entries.insert(
            full_key,
            RawValue { text: text_value, quoted, line: lineno, col: value_col },
        );
    }
    if raw.last_pos == (0, 0) {
        raw.last_pos = (1, 1);
    }
    Ok(raw)
}

impl RawScenario {
    /// Inserts or replaces a dotted-path entry, as used by CLI `--set`
    /// overrides. The path must name a known section and key.
    pub fn set(&mut self, path: &str, value: &str) -> ParseResult<()> {
        let (section, key) = match path.rsplit_once('.') {
            Some(p) => p,
            None => {
                return Err(ParseError::new(
                    self.last_pos.0,
                    self.last_pos.1,
                    format!("override path `{path}` must be `section.key`"),
                ))
            }
        };
        if !SECTIONS.contains(&section) || !known_keys(section).contains(&key) {
            return Err(ParseError::new(
                self.last_pos.0,
                self.last_pos.1,
                format!("unknown override path `{path}`"),
            ));
        }
        let pos = self
            .entries
            .get(path)
            .map(|v| (v.line, v.col))
            .unwrap_or(self.last_pos);
        self.entries.insert(
            path.to_string(),
            RawValue { text: value.to_string(), quoted: false, line: pos.0, col: pos.1 },
        );
        Ok(())
    }

    pub fn has(&self, path: &str) -> bool {
        self.entries.contains_key(path)
    }

    fn get(&self, path: &str) -> Option<&RawValue> {
        self.entries.get(path)
    }

    fn get_f64(&self, path: &str) -> ParseResult<Option<f64>> {
        match self.get(path) {
            None => Ok(None),
            Some(v) => {
                if v.quoted {
                    return Err(ParseError::new(v.line, v.col, format!("`{path}` must be a number")));
                }
                match v.text.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(Some(x)),
                    _ => Err(ParseError::new(
                        v.line,
                        v.col,
                        format!("`{path}` must be a finite number, got `{}`", v.text),
                    )),
                }
            }
        }
    }

    fn get_u64(&self, path: &str) -> ParseResult<Option<u64>> {
        match self.get(path) {
            None => Ok(None),
            Some(v) => match v.text.parse::<u64>() {
                Ok(x) if !v.quoted => Ok(Some(x)),
                _ => Err(ParseError::new(
                    v.line,
                    v.col,
                    format!("`{path}` must be a nonnegative integer, got `{}`", v.text),
                )),
            },
        }
    }

    fn get_string(&self, path: &str) -> Option<String> {
        self.get(path).map(|v| v.text.clone())
    }

    fn pos(&self, path: &str) -> (usize, usize) {
        self.get(path).map(|v| (v.line, v.col)).unwrap_or(self.last_pos)
    }

    fn require(&self, path: &str, context: &str) -> ParseResult<&RawValue> {
        self.get(path).ok_or_else(|| {
            ParseError::new(
                self.last_pos.0,
                self.last_pos.1,
                format!("missing required key `{path}` {context}"),
            )
        })
    }
}

fn forbid(raw: &RawScenario, path: &str, reason: &str) -> ParseResult<()> {
    if let Some(v) = raw.entries.get(path) {
        return Err(ParseError::new(v.line, v.col, format!("`{path}` is only valid {reason}")));
    }
    Ok(())
}

/// Second pass: validated config from the raw map, applying defaults
/// (r = 1, theta = 0, dephasing = 0, shots = 0, seed = 1).
pub fn build_config(raw: &RawScenario) -> ParseResult<ScenarioConfig> {
    let r = raw.get_f64("source.r")?.unwrap_or(1.0);
    let theta = raw.get_f64("source.theta")?.unwrap_or(0.0);
    let source = SourceConfig::new(r, theta).map_err(|e| {
        let (line, col) = raw.pos("source.r");
        ParseError::new(line, col, e.to_string())
    })?;

    let noise = build_noise(raw)?;

    let spatial_dephasing = raw.get_f64("noise.spatial.dephasing")?.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&spatial_dephasing) {
        let (line, col) = raw.pos("noise.spatial.dephasing");
        return Err(ParseError::new(line, col, "`noise.spatial.dephasing` must lie in [0,1]"));
    }

    let name = raw.require("protocol.name", "(section [protocol])")?;
    let protocol = match name.text.as_str() {
        "one_step_depp" => ProtocolKind::OneStepDepp,
        "bennett" => ProtocolKind::Bennett,
        "simon_pan" => ProtocolKind::SimonPan,
        "compare" => ProtocolKind::Compare,
        other => {
            return Err(ParseError::new(
                name.line,
                name.col,
                format!("unknown protocol `{other}` (expected one_step_depp, bennett, simon_pan or compare)"),
            ))
        }
    };

    let rounds = match protocol {
        ProtocolKind::Bennett => {
            let v = raw.require("protocol.rounds", "for protocol `bennett`")?;
            match v.text.parse::<u32>() {
                Ok(n) if !v.quoted => n,
                _ => {
                    return Err(ParseError::new(
                        v.line,
                        v.col,
                        format!("`protocol.rounds` must be a nonnegative integer, got `{}`", v.text),
                    ))
                }
            }
        }
        _ => {
            forbid(raw, "protocol.rounds", "for protocol `bennett`")?;
            0
        }
    };

    let target_fidelity = match protocol {
        ProtocolKind::Compare => {
            let v = raw.require("protocol.target_fidelity", "for protocol `compare`")?;
            let t = raw.get_f64("protocol.target_fidelity")?.unwrap();
            if !(t > 0.5 && t <= 1.0) {
                return Err(ParseError::new(
                    v.line,
                    v.col,
                    "`protocol.target_fidelity` must lie in (0.5, 1.0]",
                ));
            }
            Some(t)
        }
        _ => {
            forbid(raw, "protocol.target_fidelity", "for protocol `compare`")?;
            None
        }
    };

    let run = RunSettings {
        shots: raw.get_u64("run.shots")?.unwrap_or(0),
        seed: raw.get_u64("run.seed")?.unwrap_or(1),
        rounds,
        target_fidelity,
        output: raw.get_string("run.output"),
    };

    Ok(ScenarioConfig { source, noise, spatial_dephasing, protocol, run })
}

fn build_noise(raw: &RawScenario) -> ParseResult<PolarizationNoise> {
    let model = match raw.get("noise.polarization.model") {
        Some(m) => m,
        None => {
            // no noise section: default to the clean |φ+⟩ input, but only
            // if no stray model-specific keys are present
            for key in ["F", "F1", "F2", "F3", "px", "py", "pz", "target", "file"] {
                forbid(raw, &format!("noise.polarization.{key}"), "when `model` is set")?;
            }
            return Ok(PolarizationNoise::BellDiagonal(
                BellDiagonalParams::new(1.0, 0.0, 0.0, 0.0).expect("clean weights"),
            ));
        }
    };
    match model.text.as_str() {
        "bell_diagonal" => {
            for key in ["px", "py", "pz", "target", "file"] {
                forbid(raw, &format!("noise.polarization.{key}"), "for model `pauli` or `matrix`")?;
            }
            let mut last: (usize, usize) = (model.line, model.col);
            let mut weights = [0.0f64; 4];
            for (i, key) in ["F", "F1", "F2", "F3"].iter().enumerate() {
                let path = format!("noise.polarization.{key}");
                raw.require(&path, "for model `bell_diagonal`")?;
                weights[i] = raw.get_f64(&path)?.unwrap();
                let pos = raw.pos(&path);
                if pos.0 > last.0 || (pos.0 == last.0 && pos.1 > last.1) {
                    last = pos;
                }
            }
            let params = BellDiagonalParams::new(weights[0], weights[1], weights[2], weights[3])
                .map_err(|e| ParseError::new(last.0, last.1, e.to_string()))?;
            Ok(PolarizationNoise::BellDiagonal(params))
        }
        "pauli" => {
            for key in ["F", "F1", "F2", "F3", "file"] {
                forbid(raw, &format!("noise.polarization.{key}"), "for model `bell_diagonal` or `matrix`")?;
            }
            let mut probs = [0.0f64; 3];
            for (i, key) in ["px", "py", "pz"].iter().enumerate() {
                let path = format!("noise.polarization.{key}");
                raw.require(&path, "for model `pauli`")?;
                probs[i] = raw.get_f64(&path)?.unwrap();
            }
            let t = raw.require("noise.polarization.target", "for model `pauli`")?;
            let target = match t.text.as_str() {
                "A" | "a" => Photon::A,
                "B" | "b" => Photon::B,
                other => {
                    return Err(ParseError::new(
                        t.line,
                        t.col,
                        format!("`target` must be A or B, got `{other}`"),
                    ))
                }
            };
            // reuse the channel constructor's validation for ranges
            crate::noise::pauli_channel(probs[0], probs[1], probs[2], target).map_err(|e| {
                let (line, col) = raw.pos("noise.polarization.px");
                ParseError::new(line, col, e.to_string())
            })?;
            Ok(PolarizationNoise::Pauli { px: probs[0], py: probs[1], pz: probs[2], target })
        }
        "matrix" => {
            for key in ["F", "F1", "F2", "F3", "px", "py", "pz", "target"] {
                forbid(raw, &format!("noise.polarization.{key}"), "for model `bell_diagonal` or `pauli`")?;
            }
            let f = raw.require("noise.polarization.file", "for model `matrix`")?;
            Ok(PolarizationNoise::MatrixFile(f.text.clone()))
        }
        other => Err(ParseError::new(
            model.line,
            model.col,
            format!("unknown noise model `{other}` (expected bell_diagonal, pauli or matrix)"),
        )),
    }
}

/// Parses a scenario file to a validated config.
pub fn parse_scenario(text: &str) -> ParseResult<ScenarioConfig> {
    build_config(&parse_raw(text)?)
}

/// Parses with CLI-style `section.key=value` overrides applied after
/// parsing and before validation.
pub fn parse_scenario_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> ParseResult<ScenarioConfig> {
    let mut raw = parse_raw(text)?;
    for (path, value) in overrides {
        raw.set(path, value)?;
    }
    build_config(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[noise.polarization]
model = bell_diagonal
F = 1
F1 = 0
F2 = 0
F3 = 0
[protocol]
name = one_step_depp
";

    #[test]
    fn minimal_scenario_defaults() {
        let cfg = parse_scenario(MINIMAL).unwrap();
        assert_eq!(cfg.source.r(), 1.0);
        assert_eq!(cfg.source.theta(), 0.0);
        assert_eq!(cfg.spatial_dephasing, 0.0);
        assert_eq!(cfg.run.shots, 0);
        assert_eq!(cfg.run.seed, 1);
        assert_eq!(cfg.protocol, ProtocolKind::OneStepDepp);
        match cfg.noise {
            PolarizationNoise::BellDiagonal(p) => assert_eq!(p.f, 1.0),
            _ => panic!("expected bell_diagonal"),
        }
    }

    #[test]
    fn weight_sum_violation_points_at_last_weight() {
        let text = "\
[noise.polarization]
model = bell_diagonal
F = 0.3
F1 = 0.3
F2 = 0.3
F3 = 0.3
[protocol]
name = one_step_depp
";
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.line, 6);
        assert!(err.message.contains("F+F1+F2+F3"));
    }

    #[test]
    fn duplicate_key_reports_second_line() {
        let text = "\
[run]
seed = 1
seed = 2
";
        let err = parse_raw(text).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate key `seed`"));
    }

    #[test]
    fn unknown_section_and_key() {
        let err = parse_raw("[bogus]\n").unwrap_err();
        assert!(err.message.contains("unknown section"));
        let err = parse_raw("[run]\nbogus = 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("unknown key"));
    }

    #[test]
    fn type_mismatches() {
        let err = parse_scenario("[source]\nr = fast\n[protocol]\nname = one_step_depp\n")
            .unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("must be a finite number"));

        let err =
            parse_scenario(&format!("{MINIMAL}[run]\nshots = 1.5\n")).unwrap_err();
        assert!(err.message.contains("nonnegative integer"));
    }

    #[test]
    fn protocol_specific_keys() {
        let bennett = "\
[noise.polarization]
model = bell_diagonal
F = 0.7
F1 = 0.1
F2 = 0.15
F3 = 0.05
[protocol]
name = bennett
rounds = 3
";
        let cfg = parse_scenario(bennett).unwrap();
        assert_eq!(cfg.run.rounds, 3);

        // rounds rejected outside bennett
        let bad = MINIMAL.replace("name = one_step_depp", "name = one_step_depp\nrounds = 3");
        let err = parse_scenario(&bad).unwrap_err();
        assert!(err.message.contains("only valid"));

        // compare requires target_fidelity
        let bad = MINIMAL.replace("name = one_step_depp", "name = compare");
        let err = parse_scenario(&bad).unwrap_err();
        assert!(err.message.contains("target_fidelity"));
    }

    #[test]
    fn comments_and_quotes() {
        let text = format!("{MINIMAL}[run]\noutput = \"out # not a comment.json\" # trailing\n");
        let cfg = parse_scenario(&text).unwrap();
        assert_eq!(cfg.run.output.as_deref(), Some("out # not a comment.json"));
    }

    #[test]
    fn overrides_replace_values() {
        let cfg = parse_scenario_with_overrides(
            MINIMAL,
            &[("run.seed".into(), "7".into()), ("source.theta".into(), "1.5".into())],
        )
        .unwrap();
        assert_eq!(cfg.run.seed, 7);
        assert!((cfg.source.theta() - 1.5).abs() < 1e-12);

        let err = parse_scenario_with_overrides(MINIMAL, &[("run.bogus".into(), "1".into())])
            .unwrap_err();
        assert!(err.message.contains("unknown override path"));
    }

    #[test]
    fn pauli_model() {
        let text = "\
[noise.polarization]
model = pauli
px = 0.3
py = 0
pz = 0.1
target = B
[protocol]
name = one_step_depp
";
        let cfg = parse_scenario(text).unwrap();
        match cfg.noise {
            PolarizationNoise::Pauli { px, target, .. } => {
                assert_eq!(px, 0.3);
                assert_eq!(target, Photon::B);
            }
            _ => panic!("expected pauli"),
        }
    }

    #[test]
    fn error_positions_index_real_characters(){
        let inputs = ["[", "x = 1", "[run]\nshots =", "[run]\n  seed == 3"];
        for text in inputs {
            let err = parse_scenario(text).unwrap_err();
            let lines: Vec<&str> = text.lines().collect();
            assert!(err.line >= 1 && err.line <= lines.len().max(1), "line out of range for {text:?}");
            let line = lines.get(err.line - 1).copied().unwrap_or("");
            assert!(err.column >= 1 && err.column <= line.chars().count().max(1),
                "column {} out of range for {text:?}", err.column);
        }
    }
}
