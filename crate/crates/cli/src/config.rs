//! Flat JSON experiment configuration.
//!
//! Every key is optional in the grammar; which ones are required depends on
//! the experiment. Parsing reports every problem at once.

use std::fmt;
use std::path::PathBuf;

use nhbath::dressed::DressedKind;
use nhbath::{Boundary, Complex64, EmitterLayout, LatticeParams, Picture};
use serde_json::{json, Map, Value};

use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SWEEP_POINTS: usize = 401;

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "N",
    "t1",
    "t2",
    "gamma",
    "boundary",
    "g",
    "cells",
    "initial",
    "t_max",
    "n_points",
    "gamma_values",
    "t_av",
    "E0",
    "picture",
    "output_dir",
    "tol",
    "source_cell",
    "dressed_kind",
    "method",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Spectrum,
    Emit,
    Transfer,
    Heff,
    Dressed,
    SweepGamma,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Spectrum,
        Experiment::Emit,
        Experiment::Transfer,
        Experiment::Heff,
        Experiment::Dressed,
        Experiment::SweepGamma,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Emit => "emit",
            Experiment::Transfer => "transfer",
            Experiment::Heff => "heff",
            Experiment::Dressed => "dressed",
            Experiment::SweepGamma => "sweep_gamma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.replace('-', "_");
        Self::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How `heff` builds the coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeffChoice {
    Numeric,
    ClosedForm,
    Lossless,
}

impl HeffChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            HeffChoice::Numeric => "numeric",
            HeffChoice::ClosedForm => "closed_form",
            HeffChoice::Lossless => "lossless",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [HeffChoice::Numeric, HeffChoice::ClosedForm, HeffChoice::Lossless].into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGridConfig {
    pub t_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// For `sweep_gamma` without an explicit `gamma`, holds the first sweep value.
    pub lattice: LatticeParams,
    pub emitters: Option<EmitterLayout>,
    /// 1-based index into the emitter list.
    pub initial: usize,
    pub time_grid: Option<TimeGridConfig>,
    pub gamma_values: Option<Vec<f64>>,
    pub t_av: f64,
    pub e0: Option<Complex64>,
    pub picture: Picture,
    pub output_dir: PathBuf,
    pub tol: f64,
    pub source_cell: Option<usize>,
    pub dressed_kind: DressedKind,
    pub method: HeffChoice,
}

/// Collects problems instead of stopping at the first.
struct Reader<'a> {
    map: &'a Map<String, Value>,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn fail(&mut self, key: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{key}: {msg}"));
    }

    fn present(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let v = self.map.get(key)?;
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(key, format!("expected a finite number, got {v}"));
                None
            }
        }
    }

    fn number_where(&mut self, key: &str, ok: impl Fn(f64) -> bool, what: &str) -> Option<f64> {
        let x = self.number(key)?;
        if ok(x) {
            Some(x)
        } else {
            self.fail(key, format!("{x} is out of range ({what})"));
            None
        }
    }

    fn integer(&mut self, key: &str, min: u64) -> Option<usize> {
        let v = self.map.get(key)?;
        match v.as_u64() {
            Some(x) if x >= min => Some(x as usize),
            _ => {
                self.fail(key, format!("expected an integer >= {min}, got {v}"));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<&'a str> {
        let v = self.map.get(key)?;
        let s = v.as_str();
        if s.is_none() {
            self.fail(key, format!("expected a string, got {v}"));
        }
        s
    }

    fn choice<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, allowed: &str) -> Option<T> {
        let s = self.string(key)?;
        let parsed = parse(s);
        if parsed.is_none() {
            self.fail(key, format!("unknown value {s:?} (expected one of {allowed})"));
        }
        parsed
    }

    fn list<T>(&mut self, key: &str, item: impl Fn(&Value) -> Option<T>, what: &str) -> Option<Vec<T>> {
        let v = self.map.get(key)?;
        let parsed = v.as_array().and_then(|a| a.iter().map(&item).collect::<Option<Vec<T>>>());
        if parsed.is_none() {
            self.fail(key, format!("expected a list of {what}, got {v}"));
        }
        parsed
    }

    fn require(&mut self, key: &str, experiment: Experiment) {
        if !self.present(key) {
            self.fail(key, format!("required for experiment {experiment}"));
        }
    }
}

fn parse_boundary(s: &str) -> Option<Boundary> {
    match s {
        "periodic" => Some(Boundary::Periodic),
        "open" => Some(Boundary::Open),
        _ => None,
    }
}

fn parse_picture(s: &str) -> Option<Picture> {
    match s {
        "original" => Some(Picture::Original),
        "mapped" => Some(Picture::Mapped),
        _ => None,
    }
}

fn parse_kind(s: &str) -> Option<DressedKind> {
    [DressedKind::Bulk, DressedKind::Edge].into_iter().find(|k| k.as_str() == s)
}

fn picture_str(p: Picture) -> &'static str {
    match p {
        Picture::Original => "original",
        Picture::Mapped => "mapped",
    }
}

/// Parse and validate a JSON object of configuration keys.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(vec![format!("invalid JSON: {e}")]))?;
    config_from_value(&value)
}

pub fn config_from_value(value: &Value) -> Result<ExperimentConfig, CliError> {
    let Some(map) = value.as_object() else {
        return Err(CliError::Config(vec!["configuration must be a JSON object".into()]));
    };
    let mut r = Reader { map, errors: Vec::new() };
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            r.fail(key, "unknown key");
        }
    }

    let allowed = Experiment::ALL.map(Experiment::as_str).join(", ");
    let experiment = if r.present("experiment") {
        r.choice("experiment", Experiment::parse, &allowed)
    } else {
        r.fail("experiment", "missing");
        None
    };

    if !r.present("N") {
        r.fail("N", "missing");
    }
    let n = r.integer("N", 1);
    if !r.present("t1") {
        r.fail("t1", "missing");
    }
    let t1 = r.number_where("t1", |x| x > 0.0, "must be > 0");
    let t2 = if r.present("t2") { r.number_where("t2", |x| x > 0.0, "must be > 0") } else { t1 };
    let gamma = r.number_where("gamma", |x| x >= 0.0, "must be >= 0");
    if !r.present("boundary") {
        r.fail("boundary", "missing");
    }
    let boundary = r.choice("boundary", parse_boundary, "periodic, open");
    let g = r.number_where("g", |x| x >= 0.0, "must be >= 0");
    let cells = r.list("cells", |v| v.as_u64().map(|x| x as usize), "cell indices");
    let initial = if r.present("initial") { r.integer("initial", 1) } else { Some(1) };
    let t_max = r.number_where("t_max", |x| x > 0.0, "must be > 0");
    let n_points = r.integer("n_points", 2);
    let gamma_values = r.list("gamma_values", Value::as_f64, "numbers");
    let t_av = r.number_where("t_av", |x| x > 0.0, "must be > 0");
    let e0 = r.list("E0", Value::as_f64, "two numbers [re, im]");
    let picture = if r.present("picture") {
        r.choice("picture", parse_picture, "original, mapped")
    } else {
        Some(Picture::Original)
    };
    let output_dir = r.string("output_dir").map(PathBuf::from);
    if !r.present("output_dir") {
        r.fail("output_dir", "missing");
    }
    let tol = if r.present("tol") { r.number_where("tol", |x| x > 0.0, "must be > 0") } else { Some(DEFAULT_TOL) };
    let source_cell = r.integer("source_cell", 1);
    let dressed_kind = if r.present("dressed_kind") {
        r.choice("dressed_kind", parse_kind, "bulk, edge")
    } else {
        Some(DressedKind::Bulk)
    };
    let method = if r.present("method") {
        r.choice("method", HeffChoice::parse, "numeric, closed_form, lossless")
    } else {
        Some(HeffChoice::Numeric)
    };

    if let Some(e0) = &e0 {
        if e0.len() != 2 || e0.iter().any(|x| !x.is_finite()) {
            r.fail("E0", "expected [re, im]");
        }
    }
    if let Some(values) = &gamma_values {
        if values.is_empty() {
            r.fail("gamma_values", "must not be empty");
        }
        if let Some(bad) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            r.fail("gamma_values", format!("{bad} is out of range (must be >= 0)"));
        }
    }

    if let Some(exp) = experiment {
        match exp {
            Experiment::Spectrum => r.require("gamma", exp),
            Experiment::Emit | Experiment::Transfer => {
                for key in ["gamma", "g", "cells", "t_max", "n_points"] {
                    r.require(key, exp);
                }
            }
            Experiment::Heff => {
                r.require("gamma", exp);
                r.require("g", exp);
            }
            Experiment::Dressed => {
                r.require("gamma", exp);
                r.require("g", exp);
                if dressed_kind == Some(DressedKind::Bulk) {
                    r.require("source_cell", exp);
                }
            }
            Experiment::SweepGamma => {
                for key in ["g", "cells", "gamma_values"] {
                    r.require(key, exp);
                }
            }
        }
    }

    if let (Some(n), Some(cells)) = (n, &cells) {
        if let Err(e) = EmitterLayout::new(cells.clone(), 0.0).and_then(|l| {
            let dummy = LatticeParams::uniform(n, 1.0, 0.0, Boundary::Open)?;
            l.check_range(&dummy)
        }) {
            r.fail("cells", e);
        }
    }
    if let (Some(cells), Some(initial)) = (&cells, initial) {
        if initial > cells.len() && !cells.is_empty() {
            r.fail("initial", format!("{initial} exceeds the number of emitters {}", cells.len()));
        }
    }
    if let (Some(n), Some(cell)) = (n, source_cell) {
        if cell > n {
            r.fail("source_cell", format!("{cell} is outside 1..={n}"));
        }
    }
    match experiment {
        Some(Experiment::Transfer) => {
            if cells.as_ref().is_some_and(|c| c.len() < 2) {
                r.fail("cells", "transfer needs at least two emitters");
            }
        }
        Some(Experiment::SweepGamma) => {
            if cells.as_ref().is_some_and(|c| c.len() != 1) {
                r.fail("cells", "sweep_gamma needs exactly one emitter");
            }
        }
        Some(Experiment::Emit) if cells.as_ref().is_some_and(|c| c.is_empty()) => {
            r.fail("cells", "emit needs at least one emitter");
        }
        _ => {}
    }

    let gamma_eff = gamma.or_else(|| gamma_values.as_ref().and_then(|v| v.first().copied()));
    let lattice = match (n, t1, t2, gamma_eff, boundary) {
        (Some(n), Some(t1), Some(t2), Some(gamma), Some(boundary)) => {
            match LatticeParams::new(n, t1, t2, gamma, boundary) {
                Ok(p) => Some(p),
                Err(e) => {
                    r.errors.push(e.to_string());
                    None
                }
            }
        }
        _ => None,
    };

    if let (Some(p), Some(exp)) = (&lattice, experiment) {
        let uniform_needed = (exp == Experiment::Dressed)
            || (exp == Experiment::Heff && method != Some(HeffChoice::Numeric))
            || picture == Some(Picture::Mapped);
        if uniform_needed && !p.is_uniform() {
            r.fail("t2", "this configuration requires t1 = t2");
        }
        if exp == Experiment::Dressed && !p.at_exceptional_point() {
            r.fail("gamma", format!("dressed states need gamma = 2 t1 (got {})", p.gamma));
        }
        if exp == Experiment::Dressed && dressed_kind == Some(DressedKind::Edge) && p.boundary != Boundary::Open {
            r.fail("boundary", "edge dressed states need an open chain");
        }
        if exp == Experiment::Dressed
            && dressed_kind == Some(DressedKind::Bulk)
            && p.boundary == Boundary::Open
            && source_cell == Some(p.n_cells)
        {
            r.fail("source_cell", "bulk dressed states on an open chain need a right neighbour");
        }
        if exp == Experiment::Heff && p.gamma == 0.0 && method != Some(HeffChoice::Lossless) {
            r.fail("gamma", "must be > 0 unless method is \"lossless\"");
        }
        if exp == Experiment::SweepGamma && gamma_values.as_ref().is_some_and(|v| v.contains(&0.0)) {
            r.fail("gamma_values", "values must be > 0 for sweep_gamma");
        }
    }

    if !r.errors.is_empty() {
        return Err(CliError::Config(r.errors));
    }

    let lattice = lattice.expect("validated");
    let experiment = experiment.expect("validated");
    let t_av = t_av.unwrap_or(20.0 / lattice.t1);
    let emitters = match (cells, g) {
        (Some(cells), Some(g)) => Some(EmitterLayout::new(cells, g).expect("validated")),
        (None, Some(g)) if experiment == Experiment::Heff => {
            Some(EmitterLayout::new((1..=lattice.n_cells).collect(), g).expect("validated"))
        }
        _ => None,
    };
    let time_grid = match (t_max, n_points) {
        (Some(t_max), Some(n_points)) => Some(TimeGridConfig { t_max, n_points }),
        (None, Some(n_points)) if experiment == Experiment::SweepGamma => {
            Some(TimeGridConfig { t_max: t_av, n_points })
        }
        (None, None) if experiment == Experiment::SweepGamma => {
            Some(TimeGridConfig { t_max: t_av, n_points: DEFAULT_SWEEP_POINTS })
        }
        (Some(t_max), None) if experiment == Experiment::SweepGamma => {
            Some(TimeGridConfig { t_max, n_points: DEFAULT_SWEEP_POINTS })
        }
        _ => None,
    };
    if let (Experiment::SweepGamma, Some(tg)) = (experiment, &time_grid) {
        if tg.t_max < t_av {
            return Err(CliError::Config(vec![format!("t_max: {} is shorter than t_av = {t_av}", tg.t_max)]));
        }
    }

    Ok(ExperimentConfig {
        experiment,
        lattice,
        emitters,
        initial: initial.expect("validated"),
        time_grid,
        gamma_values,
        t_av,
        e0: e0.map(|v| Complex64::new(v[0], v[1])),
        picture: picture.expect("validated"),
        output_dir: output_dir.expect("validated"),
        tol: tol.expect("validated"),
        source_cell,
        dressed_kind: dressed_kind.expect("validated"),
        method: method.expect("validated"),
    })
}

impl ExperimentConfig {
    /// Canonical flat JSON; keys are emitted in sorted order.
    pub fn to_value(&self) -> Value {
        let p = &self.lattice;
        let mut m = Map::new();
        m.insert("experiment".into(), json!(self.experiment.as_str()));
        m.insert("N".into(), json!(p.n_cells));
        m.insert("t1".into(), json!(p.t1));
        m.insert("t2".into(), json!(p.t2));
        m.insert("gamma".into(), json!(p.gamma));
        m.insert("boundary".into(), json!(p.boundary.as_str()));
        if let Some(layout) = &self.emitters {
            m.insert("g".into(), json!(layout.g));
            m.insert("cells".into(), json!(layout.cells));
        }
        m.insert("initial".into(), json!(self.initial));
        if let Some(tg) = &self.time_grid {
            m.insert("t_max".into(), json!(tg.t_max));
            m.insert("n_points".into(), json!(tg.n_points));
        }
        if let Some(values) = &self.gamma_values {
            m.insert("gamma_values".into(), json!(values));
        }
        m.insert("t_av".into(), json!(self.t_av));
        if let Some(e0) = self.e0 {
            m.insert("E0".into(), json!([e0.re, e0.im]));
        }
        m.insert("picture".into(), json!(picture_str(self.picture)));
        m.insert("output_dir".into(), json!(self.output_dir.to_string_lossy()));
        m.insert("tol".into(), json!(self.tol));
        if let Some(cell) = self.source_cell {
            m.insert("source_cell".into(), json!(cell));
        }
        m.insert("dressed_kind".into(), json!(self.dressed_kind.as_str()));
        m.insert("method".into(), json!(self.method.as_str()));
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("serialisable")
    }

    /// Coupling constant, zero when the experiment has no emitters.
    pub fn g(&self) -> f64 {
        self.emitters.as_ref().map_or(0.0, |l| l.g)
    }
}

/// Apply a `key=value` override. Values are read as JSON when possible, else as strings.
pub fn apply_override(config: &mut Value, assignment: &str) -> Result<(), CliError> {
    let Some((key, raw)) = assignment.split_once('=') else {
        return Err(CliError::Config(vec![format!("override {assignment:?} is not of the form key=value")]));
    };
    let Some(map) = config.as_object_mut() else {
        return Err(CliError::Config(vec!["configuration must be a JSON object".into()]));
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    map.insert(key.trim().to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(CliError::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_spectrum_config() {
        let c = parse_config(
            r#"{"N":8,"t1":1,"t2":1,"gamma":1,"boundary":"periodic","experiment":"spectrum","output_dir":"out"}"#,
        )
        .unwrap();
        assert_eq!(c.experiment, Experiment::Spectrum);
        assert_eq!(c.lattice.n_cells, 8);
        assert_eq!(c.tol, 1e-9);
        assert_eq!(c.t_av, 20.0);
        assert!(c.emitters.is_none());
    }

    #[test]
    fn negative_gamma_names_the_field() {
        let e = errors(r#"{"N":8,"t1":1,"gamma":-0.5,"boundary":"open","experiment":"spectrum","output_dir":"o"}"#);
        assert!(e.iter().any(|m| m.starts_with("gamma:") && m.contains("-0.5")), "{e:?}");
    }

    #[test]
    fn all_errors_are_reported() {
        let e = errors(r#"{"N":0,"t1":-1,"bogus":3,"boundary":"twisted","experiment":"emit"}"#);
        for key in ["bogus:", "N:", "t1:", "boundary:", "output_dir:", "gamma:", "cells:", "t_max:"] {
            assert!(e.iter().any(|m| m.starts_with(key)), "missing {key} in {e:?}");
        }
    }

    #[test]
    fn experiment_specific_checks() {
        let e = errors(
            r#"{"N":5,"t1":1,"gamma":1,"g":0.1,"boundary":"periodic","experiment":"dressed","dressed_kind":"edge","output_dir":"o"}"#,
        );
        assert!(e.iter().any(|m| m.starts_with("gamma:")));
        assert!(e.iter().any(|m| m.starts_with("boundary:")));
        let e = errors(
            r#"{"N":5,"t1":1,"gamma":1,"g":0.1,"cells":[3,3],"boundary":"open","experiment":"transfer","t_max":1,"n_points":3,"output_dir":"o"}"#,
        );
        assert!(e.iter().any(|m| m.starts_with("cells:")));
    }

    #[test]
    fn sweep_round_trip() {
        let text = r#"{"experiment":"sweep_gamma","N":100,"t1":1,"boundary":"open","g":0.1,"cells":[15],
            "gamma_values":[0.5,1.0,1.5,2.0,2.5],"output_dir":"fig"}"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.lattice.gamma, 0.5);
        assert_eq!(c.time_grid, Some(TimeGridConfig { t_max: 20.0, n_points: DEFAULT_SWEEP_POINTS }));
        let again = parse_config(&c.to_json()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_json(), c.to_json());
    }

    #[test]
    fn overrides_parse_json_or_fall_back_to_strings() {
        let mut v = json!({"N": 3});
        apply_override(&mut v, "N=20").unwrap();
        apply_override(&mut v, "boundary=open").unwrap();
        apply_override(&mut v, "cells=[1,2]").unwrap();
        assert_eq!(v, json!({"N": 20, "boundary": "open", "cells": [1, 2]}));
        assert!(apply_override(&mut v, "nonsense").is_err());
    }

    #[test]
    fn dash_spelling_of_experiment_is_accepted() {
        assert_eq!(Experiment::parse("sweep-gamma"), Some(Experiment::SweepGamma));
        assert_eq!(Experiment::parse("scan"), None);
    }
}
