//! Flat `key = value` run configuration.
//!
//! ```text
//! # fragile pair under one collective field
//! state.class = fragile
//! state.a = 0.7071067811865476, 0
//! state.d = 0.7071067811865476, 0
//! scenario.register = 2
//! scenario.channels[0].kind = pair
//! scenario.channels[0].qubits = AB
//! scenario.channels[0].rate = 1
//! grid.t_max = 3
//! grid.n_samples = 64
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Complex values are
//! written `re, im`; a lone number is real.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Serialize;

use super::CliError;
use crate::channels::{Channel, ChannelKind, NoiseScenario};
use crate::oracle::TrajectoryConfig;
use crate::states::{StateClass, StateSpec};
use crate::tensor::Qubit;
use crate::timescales::{TimeGrid, DEFAULT_SAMPLES, MIN_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Elements,
    Concurrence,
    Eof,
    Reduced,
    Timescales,
    Audit,
}

impl OutputKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "elements" => OutputKind::Elements,
            "concurrence" => OutputKind::Concurrence,
            "eof" => OutputKind::Eof,
            "reduced" => OutputKind::Reduced,
            "timescales" => OutputKind::Timescales,
            "audit" => OutputKind::Audit,
            _ => return None,
        })
    }

    pub fn defaults() -> BTreeSet<OutputKind> {
        use OutputKind::*;
        [Elements, Concurrence, Eof, Timescales, Audit].into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Each value replaces the rate of every channel.
    pub rates: Vec<f64>,
    /// Random coefficient draws per rate; 0 keeps the configured state.
    pub draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub state: StateSpec,
    pub scenario: NoiseScenario,
    pub grid: TimeGrid,
    pub outputs: BTreeSet<OutputKind>,
    pub mc: Option<TrajectoryConfig>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub plots: bool,
    pub log_y: bool,
    pub sweep: Option<SweepConfig>,
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Parse(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(CliError::Parse(format!("line {}: empty key", n + 1)));
            }
            if map.insert(key.clone(), (n + 1, value.trim().to_string())).is_some() {
                return Err(CliError::Parse(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Parse(format!("line {line}: `{key}` has malformed value `{v}`"))),
        }
    }

    fn take_complex(&mut self, key: &str) -> Result<Option<Complex64>, CliError> {
        let Some((line, v)) = self.take(key) else { return Ok(None) };
        let bad = || CliError::Parse(format!("line {line}: `{key}` expects `re, im`, got `{v}`"));
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            [re] => Ok(Some(Complex64::new(num(re)?, 0.0))),
            [re, im] => Ok(Some(Complex64::new(num(re)?, num(im)?))),
            _ => Err(bad()),
        }
    }

    fn take_list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        let Some((line, v)) = self.take(key) else { return Ok(None) };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| CliError::Parse(format!("line {line}: `{key}` has malformed item `{s}`"))))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }
}

fn parse_class(s: &str) -> Option<(&'static str, &'static [&'static str])> {
    Some(match s {
        "fragile" => ("fragile", &["a", "b", "d"]),
        "fragile2" => ("fragile2", &["a", "c", "d"]),
        "robust" => ("robust", &["a", "b", "c"]),
        "robust2" => ("robust2", &["b", "c", "d"]),
        "generic" => ("generic", &["a", "b", "c", "d"]),
        "w" | "W" => ("w", &["a1", "a2", "a4"]),
        "ghz" | "GHZ" => ("ghz", &["a0", "a7"]),
        _ => return None,
    })
}

fn build_state(class: &str, z: &[Complex64]) -> StateSpec {
    match class {
        "fragile" => StateSpec::Fragile { a: z[0], b: z[1], d: z[2] },
        "fragile2" => StateSpec::Fragile2 { a: z[0], c: z[1], d: z[2] },
        "robust" => StateSpec::Robust { a: z[0], b: z[1], c: z[2] },
        "robust2" => StateSpec::Robust2 { b: z[0], c: z[1], d: z[2] },
        "generic" => StateSpec::Generic2 { a: z[0], b: z[1], c: z[2], d: z[3] },
        "w" => StateSpec::W { a1: z[0], a2: z[1], a4: z[2] },
        _ => StateSpec::Ghz { a0: z[0], a7: z[1] },
    }
}

fn parse_qubits(s: &str) -> Option<Vec<Qubit>> {
    s.chars().filter(|c| !c.is_whitespace() && *c != ',').map(|c| Qubit::parse(&c.to_string())).collect()
}

fn channel_indices(entries: &Entries) -> Result<BTreeSet<usize>, CliError> {
    let mut out = BTreeSet::new();
    for (key, (line, _)) in &entries.map {
        if let Some(rest) = key.strip_prefix("scenario.channels[") {
            let idx = rest
                .split_once(']')
                .and_then(|(i, _)| i.parse().ok())
                .ok_or_else(|| CliError::Parse(format!("line {line}: malformed channel key `{key}`")))?;
            out.insert(idx);
        }
    }
    Ok(out)
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut e = Entries::parse(text)?;

        let (line, class_raw) = e.take("state.class").ok_or_else(|| CliError::Parse("missing `state.class`".into()))?;
        let (class, coeff_names) = parse_class(&class_raw)
            .ok_or_else(|| CliError::Parse(format!("line {line}: unknown state class `{class_raw}`")))?;
        let mut coeffs = Vec::new();
        for name in coeff_names {
            coeffs.push(e.take_complex(&format!("state.{name}"))?.unwrap_or_default());
        }
        let state = build_state(class, &coeffs);

        let register: usize = e.take_parsed("scenario.register")?.unwrap_or(state.register_size());
        let relaxed: bool = e.take_parsed("scenario.relaxed")?.unwrap_or(false);
        let mut channels = Vec::new();
        for i in channel_indices(&e)? {
            let field = |f: &str| format!("scenario.channels[{i}].{f}");
            let (kline, kind) =
                e.take(&field("kind")).ok_or_else(|| CliError::Parse(format!("missing `{}`", field("kind"))))?;
            let qubits = match e.take(&field("qubits")) {
                Some((qline, q)) => parse_qubits(&q)
                    .ok_or_else(|| CliError::Parse(format!("line {qline}: `{}` has unknown qubit in `{q}`", field("qubits"))))?,
                None => Vec::new(),
            };
            let rate: f64 =
                e.take_parsed(&field("rate"))?.ok_or_else(|| CliError::Parse(format!("missing `{}`", field("rate"))))?;
            let kind = match (kind.as_str(), qubits.as_slice()) {
                ("local", [q]) => ChannelKind::Local(*q),
                ("pair", [q1, q2]) => ChannelKind::pair(*q1, *q2).map_err(|err| invalid(&field("qubits"), err))?,
                ("triple", []) | ("triple", [Qubit::A, Qubit::B, Qubit::C]) => ChannelKind::TripleCollective,
                ("local" | "pair" | "triple", _) => {
                    return Err(invalid(&field("qubits"), format!("wrong number of qubits for a {kind} channel")))
                }
                _ => return Err(CliError::Parse(format!("line {kline}: unknown channel kind `{kind}`"))),
            };
            if !(rate.is_finite() && rate > 0.0) {
                return Err(invalid(&field("rate"), format!("rate must be positive, got {rate}")));
            }
            channels.push(Channel::new(kind, rate));
        }
        if channels.is_empty() {
            return Err(invalid("scenario.channels", "at least one channel is required"));
        }
        let scenario = if relaxed { NoiseScenario::relaxed(register, channels) } else { NoiseScenario::new(register, channels) }
            .map_err(|err| invalid("scenario", err))?;
        if state.register_size() != register {
            return Err(invalid(
                "scenario.register",
                format!("{} state needs {} qubits, register has {register}", state.class(), state.register_size()),
            ));
        }
        state.projector().map_err(|err| invalid("state", err))?;

        let default_grid = TimeGrid::default_for(&scenario);
        let t_max = e.take_parsed("grid.t_max")?.unwrap_or(default_grid.t_max);
        let n_samples = e.take_parsed("grid.n_samples")?.unwrap_or(DEFAULT_SAMPLES);
        let grid = TimeGrid::new(t_max, n_samples).map_err(|err| invalid("grid", err))?;

        let outputs = match e.take("outputs") {
            None => OutputKind::defaults(),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| OutputKind::parse(s).ok_or_else(|| CliError::Parse(format!("line {line}: unknown output `{s}`"))))
                .collect::<Result<_, _>>()?,
        };

        let fits = outputs.contains(&OutputKind::Timescales) || outputs.contains(&OutputKind::Audit);
        if fits && grid.n_samples < MIN_SAMPLES {
            return Err(invalid("grid.n_samples", format!("fits need at least {MIN_SAMPLES} samples")));
        }

        let mc_keys = ["mc.n_trajectories", "mc.dt", "mc.seed", "mc.t_final"];
        let mc = if mc_keys.iter().any(|k| e.map.contains_key(*k)) {
            let cfg = TrajectoryConfig {
                n_trajectories: e.take_parsed("mc.n_trajectories")?.unwrap_or(10_000),
                dt: e.take_parsed("mc.dt")?.unwrap_or(0.01),
                seed: e.take_parsed("mc.seed")?.unwrap_or(0),
                t_final: e.take_parsed("mc.t_final")?.unwrap_or(1.0),
            };
            cfg.validate().map_err(|err| invalid("mc", err))?;
            Some(cfg)
        } else {
            None
        };

        let output_dir = e.take("output.dir").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out"));
        let format = match e.take("output.format") {
            None => Format::Csv,
            Some((_, v)) if v == "csv" => Format::Csv,
            Some((_, v)) if v == "json" => Format::Json,
            Some((line, v)) => return Err(CliError::Parse(format!("line {line}: unknown format `{v}`"))),
        };
        let plots = e.take_parsed("output.plots")?.unwrap_or(false);
        let log_y = e.take_parsed("output.log_y")?.unwrap_or(false);

        let sweep = match e.take_list::<f64>("sweep.rates")? {
            None => None,
            Some(rates) => {
                if rates.is_empty() || rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(invalid("sweep.rates", "rates must be a non-empty list of positive numbers"));
                }
                Some(SweepConfig {
                    rates,
                    draws: e.take_parsed("sweep.draws")?.unwrap_or(0),
                    seed: e.take_parsed("sweep.seed")?.unwrap_or(0),
                })
            }
        };

        if let Some((key, (line, _))) = e.map.iter().next() {
            return Err(CliError::Parse(format!("line {line}: unknown key `{key}`")));
        }
        Ok(RunConfig { state, scenario, grid, outputs, mc, output_dir, format, plots, log_y, sweep })
    }

    /// Class name as written in the config.
    pub fn class(&self) -> StateClass {
        self.state.class()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRAGILE: &str = "state.class = fragile
state.a = 0.7071067811865476, 0
state.d = 0.7071067811865476
scenario.channels[0].kind = pair
scenario.channels[0].qubits = AB
scenario.channels[0].rate = 1
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(FRAGILE).unwrap();
        assert_eq!(c.scenario.register_size, 2);
        assert_eq!(c.grid, TimeGrid::new(3.0, 64).unwrap());
        assert_eq!(c.outputs, OutputKind::defaults());
        assert!(c.mc.is_none());
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn syntax_problems_are_parse_errors() {
        for bad in [
            "state.class fragile",
            "state.class = quark",
            &format!("{FRAGILE}grid.t_max = soon\n"),
            &format!("{FRAGILE}colour = blue\n"),
            &format!("{FRAGILE}state.a = 1, 2, 3\n"),
        ] {
            assert!(matches!(RunConfig::parse(bad), Err(CliError::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn semantic_problems_name_the_field() {
        let cases = [
            (FRAGILE.replace("0.7071067811865476, 0", "0.9"), "state"),
            (FRAGILE.replace("rate = 1", "rate = -1"), "scenario.channels[0].rate"),
            (FRAGILE.replace("qubits = AB", "qubits = AC"), "scenario"),
            (FRAGILE.replace("qubits = AB", "qubits = A"), "scenario.channels[0].qubits"),
            (format!("{FRAGILE}scenario.register = 3\n"), "scenario.register"),
            (format!("{FRAGILE}grid.n_samples = 2\n"), "grid"),
        ];
        for (text, field) in cases {
            match RunConfig::parse(&text) {
                Err(CliError::Validation(msg)) => assert!(msg.starts_with(field), "{msg}"),
                other => panic!("expected validation error for {field}, got {other:?}"),
            }
        }
    }
}
