//! Scenario configuration files, result tables and matrix serialization.
//!
//! Configuration is a small INI dialect:
//!
//! ```text
//! root_seed = 7
//! output_dir = results
//!
//! [scenario purity]
//! kind = purity_sweep
//! state = pure:D
//! d = 2
//! theta = pi/2
//! methods = W, I, II
//! seeds = 0..50
//! ```
//!
//! Numbers accept `pi` forms such as `pi/2` or `3*pi/8`. Float lists are
//! comma separated or generated with `log:<lo>:<hi>:<n>` and
//! `linear:<lo>:<hi>:<n>`. Seed lists mix values and half-open ranges `a..b`.
//! Parsing collects every problem with its line number instead of stopping at
//! the first.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::experiments::{
    linear_grid, log_grid, theta_problem, BiasModel, ResultRow, Scenario,
    ScenarioKind, CSV_COLUMNS,
};
use crate::qmath::{ComplexMatrix, C64};
use crate::states::StateSpec;

/// Environment variable that overrides the configured root seed.
pub const SEED_ENV: &str = "DMRECON_SEED";

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigDocument {
    pub root_seed: u64,
    pub output_dir: Option<String>,
    pub tolerance: f64,
    pub scenarios: Vec<Scenario>,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        Self {
            root_seed: 0,
            output_dir: None,
            tolerance: DEFAULT_TOLERANCE,
            scenarios: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Every problem found in a configuration file, in line order.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

const GLOBAL_KEYS: [&str; 3] = ["root_seed", "output_dir", "tolerance"];
const SCENARIO_KEYS: [&str; 13] = [
    "kind",
    "state",
    "d",
    "theta",
    "theta_b",
    "n_events",
    "seeds",
    "methods",
    "mode",
    "reference",
    "bias_epsilon",
    "bias_efficiency",
    "purity_grid",
];

/// Parses `pi`, `pi/4`, `3*pi/8`, `2pi` or a plain float.
pub fn parse_number(token: &str) -> std::result::Result<f64, String> {
    let t = token.trim();
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{t}' is not a finite number"))
        };
    }
    let bad = || format!("'{t}' is not a number");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (t, None),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?.trim().trim_end_matches('*').trim();
    let coef = match coef {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let den = match den {
        None => 1.0,
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(format!("'{t}' divides by zero"));
    }
    Ok(coef * PI / den)
}

/// Comma list of numbers, or a `log:` / `linear:` generator.
pub fn parse_float_list(value: &str) -> std::result::Result<Vec<f64>, String> {
    let v = value.trim();
    for (prefix, generator) in [("log:", log_grid as fn(f64, f64, usize) -> Vec<f64>), ("linear:", linear_grid)] {
        if let Some(rest) = v.strip_prefix(prefix) {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("expected {prefix}<lo>:<hi>:<n>"));
            }
            let lo = parse_number(parts[0])?;
            let hi = parse_number(parts[1])?;
            let n: usize = parts[2]
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("'{}' is not a positive count", parts[2].trim()))?;
            if prefix == "log:" && (lo <= 0.0 || hi <= 0.0) {
                return Err("log grid bounds must be positive".to_string());
            }
            return Ok(generator(lo, hi, n));
        }
    }
    if v.is_empty() {
        return Err("empty list".to_string());
    }
    v.split(',').map(parse_number).collect()
}

/// Values and half-open ranges, e.g. `0..10, 42`.
pub fn parse_seed_list(value: &str) -> std::result::Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim) {
        let int = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| format!("'{}' is not a non-negative integer", s.trim()))
        };
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (int(a)?, int(b)?);
                if b <= a {
                    return Err(format!("empty seed range {part}"));
                }
                out.extend(a..b);
            }
            None => out.push(int(part)?),
        }
    }
    Ok(out)
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

struct Section {
    id: String,
    line: usize,
    entries: Vec<(String, String, usize)>,
}

/// Parses a configuration document, reporting all problems at once.
pub fn parse_config(text: &str) -> std::result::Result<ConfigDocument, ConfigErrors> {
    let mut errors = Vec::new();
    let mut doc = ConfigDocument::default();
    let mut sections: Vec<Section> = Vec::new();
    let mut seen_global: BTreeMap<String, usize> = BTreeMap::new();

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut err = |message: String| errors.push(ConfigError { line, message });
        if let Some(header) = content.strip_prefix('[') {
            let Some(header) = header.strip_suffix(']') else {
                err("unterminated section header".into());
                continue;
            };
            match header.trim().strip_prefix("scenario") {
                Some(id) if id.starts_with(char::is_whitespace) && !id.trim().is_empty() => {
                    let id = id.trim();
                    if id.contains(|c: char| c.is_whitespace() || c == ',') {
                        err(format!("scenario id '{id}' must not contain whitespace or commas"));
                    }
                    sections.push(Section {
                        id: id.to_string(),
                        line,
                        entries: Vec::new(),
                    });
                }
                _ => err(format!("unknown section [{}], expected [scenario <id>]", header.trim())),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            err(format!("expected key = value, found '{content}'"));
            continue;
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        match sections.last_mut() {
            Some(section) => {
                if !SCENARIO_KEYS.contains(&key.as_str()) {
                    err(format!("unknown scenario key '{key}'"));
                } else if let Some((_, _, first)) = section.entries.iter().find(|e| e.0 == key) {
                    err(format!("key '{key}' repeated (first set on line {first})"));
                } else {
                    section.entries.push((key, value, line));
                }
            }
            None => {
                if let Some(first) = seen_global.get(&key) {
                    err(format!("key '{key}' repeated (first set on line {first})"));
                    continue;
                }
                seen_global.insert(key.clone(), line);
                match key.as_str() {
                    "root_seed" => match value.parse() {
                        Ok(v) => doc.root_seed = v,
                        Err(_) => err(format!("root_seed '{value}' is not a non-negative integer")),
                    },
                    "output_dir" if !value.is_empty() => doc.output_dir = Some(value),
                    "output_dir" => err("output_dir is empty".into()),
                    "tolerance" => match parse_number(&value) {
                        Ok(v) if v > 0.0 => doc.tolerance = v,
                        Ok(v) => err(format!("tolerance {v} must be positive")),
                        Err(e) => err(e),
                    },
                    _ => err(format!(
                        "unknown key '{key}' (global keys: {}; scenario keys go after a [scenario <id>] header)",
                        GLOBAL_KEYS.join(", ")
                    )),
                }
            }
        }
    }

    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    for section in &sections {
        if let Some(first) = ids.get(&section.id) {
            errors.push(ConfigError {
                line: section.line,
                message: format!(
                    "duplicate scenario id '{}' (lines {first} and {})",
                    section.id, section.line
                ),
            });
            continue;
        }
        ids.insert(section.id.clone(), section.line);
        if let Some(s) = parse_section(section, &mut errors) {
            doc.scenarios.push(s);
        }
    }

    errors.sort_by_key(|e| e.line);
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(ConfigErrors(errors))
    }
}

fn parse_section(section: &Section, errors: &mut Vec<ConfigError>) -> Option<Scenario> {
    let before = errors.len();
    let get = |key: &str| section.entries.iter().find(|e| e.0 == key).map(|e| (e.1.as_str(), e.2));

    let required = |errors: &mut Vec<ConfigError>, key: &str| {
        let v = get(key);
        if v.is_none() {
            push(errors, section.line, format!("scenario '{}' is missing '{key}'", section.id));
        }
        v
    };
    let kind = required(errors, "kind");
    let state = required(errors, "state");
    let d = required(errors, "d");

    let kind = kind.and_then(|(v, line)| v.parse::<ScenarioKind>().map_err(|e| push(errors, line, e.to_string())).ok());
    let state = state.and_then(|(v, line)| v.parse::<StateSpec>().map_err(|e| push(errors, line, e.to_string())).ok());
    let d = d.and_then(|(v, line)| {
        v.parse::<usize>()
            .map_err(|_| push(errors, line, format!("d '{v}' is not a positive integer")))
            .ok()
    });

    let (Some(kind), Some(state), Some(d)) = (kind, state, d) else {
        return None;
    };
    let mut scn = Scenario::new(section.id.clone(), kind, state, d);
    let mut bias = (0.0, 1.0, None::<usize>);

    for (key, value, line) in &section.entries {
        let line = *line;
        let result: std::result::Result<(), String> = (|| {
            match key.as_str() {
                "kind" | "state" | "d" => {}
                "theta" => {
                    let list = parse_float_list(value)?;
                    for &t in &list {
                        if let Some(msg) = theta_problem(t) {
                            return Err(msg);
                        }
                    }
                    scn.thetas = list;
                }
                "theta_b" => {
                    let t = parse_number(value)?;
                    if let Some(msg) = theta_problem(t) {
                        return Err(format!("theta_b: {msg}"));
                    }
                    scn.theta_b = Some(t);
                }
                "n_events" => {
                    scn.n_events = value
                        .parse()
                        .ok()
                        .filter(|&n| n > 0)
                        .ok_or_else(|| format!("n_events '{value}' is not a positive integer"))?
                }
                "seeds" => scn.seeds = parse_seed_list(value)?,
                "methods" => scn.methods = parse_list(value)?,
                "mode" => scn.mode = value.parse().map_err(|e: Error| e.to_string())?,
                "reference" => scn.reference = value.parse().map_err(|e: Error| e.to_string())?,
                "bias_epsilon" => {
                    bias.0 = parse_number(value)?;
                    bias.2.get_or_insert(line);
                }
                "bias_efficiency" => {
                    bias.1 = parse_number(value)?;
                    bias.2.get_or_insert(line);
                }
                "purity_grid" => scn.purity_grid = parse_float_list(value)?,
                _ => unreachable!("keys are checked while reading"),
            }
            Ok(())
        })();
        if let Err(message) = result {
            push(errors, line, format!("{key}: {message}"));
        }
    }
    if let Some(line) = bias.2 {
        match BiasModel::new(bias.0, bias.1) {
            Ok(b) if b.is_none() => {}
            Ok(b) => scn.bias = Some(b),
            Err(e) => push(errors, line, e.to_string()),
        }
    }
    if errors.len() > before {
        return None;
    }
    // Remaining cross-field checks, reported at the line of the offending key.
    for (field, message) in scn.problems() {
        let key = match field {
            "purity_grid" | "seeds" | "methods" | "n_events" | "d" | "state" => field,
            "theta" => "theta",
            _ => "",
        };
        let line = get(key).map(|e| e.1).unwrap_or(section.line);
        push(errors, line, format!("scenario '{}': {message}", section.id));
    }
    (errors.len() == before).then_some(scn)
}

fn push(errors: &mut Vec<ConfigError>, line: usize, message: String) {
    errors.push(ConfigError { line, message });
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn seed_list_text(seeds: &[u64]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < seeds.len() {
        let mut j = i;
        while j + 1 < seeds.len() && seeds[j + 1] == seeds[j] + 1 {
            j += 1;
        }
        if j > i {
            parts.push(format!("{}..{}", seeds[i], seeds[j] + 1));
        } else {
            parts.push(seeds[i].to_string());
        }
        i = j + 1;
    }
    parts.join(", ")
}

impl ConfigDocument {
    /// Canonical text form; parsing it gives back an equal document.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "root_seed = {}", self.root_seed);
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(out, "output_dir = {dir}");
        }
        let _ = writeln!(out, "tolerance = {:e}", self.tolerance);
        for s in &self.scenarios {
            let _ = writeln!(out, "\n[scenario {}]", s.id);
            let _ = writeln!(out, "kind = {}", s.kind);
            let _ = writeln!(out, "state = {}", s.state);
            let _ = writeln!(out, "d = {}", s.d);
            let _ = writeln!(out, "theta = {}", join(&s.thetas));
            if let Some(tb) = s.theta_b {
                let _ = writeln!(out, "theta_b = {tb}");
            }
            let _ = writeln!(out, "n_events = {}", s.n_events);
            let _ = writeln!(out, "seeds = {}", seed_list_text(&s.seeds));
            let _ = writeln!(out, "methods = {}", join(&s.methods));
            let _ = writeln!(out, "mode = {}", s.mode);
            let _ = writeln!(out, "reference = {}", s.reference);
            if let Some(b) = &s.bias {
                let _ = writeln!(out, "bias_epsilon = {}", b.epsilon());
                let _ = writeln!(out, "bias_efficiency = {}", b.efficiency());
            }
            let _ = writeln!(out, "purity_grid = {}", join(&s.purity_grid));
        }
        out
    }

    /// Replaces the root seed with the value of `DMRECON_SEED`, when set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        self.apply_seed_override(std::env::var(SEED_ENV).ok().as_deref())
    }

    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<()> {
        if let Some(v) = value {
            self.root_seed = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}='{v}' is not a non-negative integer")))?;
        }
        Ok(())
    }
}

fn float_field(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        v.to_string()
    }
}

fn optional_field(v: Option<f64>) -> String {
    v.map(float_field).unwrap_or_default()
}

/// Writes rows as CSV with a fixed header. Floats use the shortest
/// round-trip form, so identical runs give identical bytes.
pub fn write_results_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            r.kind.to_string(),
            r.method.clone(),
            r.d.to_string(),
            float_field(r.theta_a),
            float_field(r.theta_b),
            optional_field(r.purity_p),
            r.n_events.to_string(),
            r.seed.clone(),
            float_field(r.trace_distance),
            optional_field(r.delta_rho),
            optional_field(r.bound),
            float_field(r.bias_epsilon),
            float_field(r.bias_efficiency),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    /// Aligned rows of `re+imi` with six decimals.
    Text,
    /// `row,col,re,im` lines, 1-indexed, shortest round-trip floats.
    Machine,
}

fn fixed(v: f64, signed: bool) -> String {
    // Round first so values like -1e-9 print without a stray minus sign.
    let v = if v.abs() < 5e-7 { 0.0 } else { v };
    if signed {
        format!("{v:+.6}")
    } else {
        format!("{v:.6}")
    }
}

pub fn write_matrix(m: &ComplexMatrix, format: MatrixFormat) -> String {
    let mut out = String::new();
    match format {
        MatrixFormat::Text => {
            let cells: Vec<Vec<String>> = (0..m.rows())
                .map(|r| {
                    (0..m.cols())
                        .map(|c| {
                            let z = m[(r, c)];
                            format!("{}{}i", fixed(z.re, false), fixed(z.im, true))
                        })
                        .collect()
                })
                .collect();
            let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
            for row in cells {
                let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
                let _ = writeln!(out, "{}", line.join("  "));
            }
        }
        MatrixFormat::Machine => {
            out.push_str("row,col,re,im\n");
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let z = m[(r, c)];
                    let _ = writeln!(out, "{},{},{},{}", r + 1, c + 1, z.re, z.im);
                }
            }
        }
    }
    out
}

/// Reads the machine format back. Every entry of a square matrix must appear once.
pub fn read_matrix_machine(text: &str) -> Result<ComplexMatrix> {
    let bad = |line: usize, reason: String| Error::MatrixFormat { line, reason };
    let mut entries: Vec<(usize, usize, C64, usize)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.trim();
        if content.is_empty() || (index == 0 && content == "row,col,re,im") {
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(line, format!("expected 4 fields, found {}", fields.len())));
        }
        let idx = |s: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| bad(line, format!("'{s}' is not a 1-based index")))
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line, format!("'{s}' is not a number")));
        entries.push((idx(fields[0])?, idx(fields[1])?, C64::new(num(fields[2])?, num(fields[3])?), line));
    }
    let dim = entries.iter().map(|e| e.0.max(e.1)).max().unwrap_or(0);
    if dim == 0 {
        return Err(bad(0, "no entries".into()));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut seen = vec![false; dim * dim];
    for (r, c, z, line) in entries {
        let slot = (r - 1) * dim + c - 1;
        if seen[slot] {
            return Err(bad(line, format!("entry ({r}, {c}) given twice")));
        }
        seen[slot] = true;
        m[(r - 1, c - 1)] = z;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(bad(
            0,
            format!("entry ({}, {}) missing", missing / dim + 1, missing % dim + 1),
        ));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{CorrelationMode, Reference};
    use crate::qmath::c;
    use crate::reconstruct::Method;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    const SAMPLE: &str = "\
root_seed = 11
output_dir = out  # trailing comment

[scenario purity]
kind = purity_sweep
state = pure:D
d = 2
theta = pi/2
seeds = 0..3, 9
methods = W, II

[scenario strength]
kind = strength_sweep
state = random:seed=4
d = 3
theta = log:0.05:pi/2:4
mode = exact
bias_epsilon = 0.02
";

    #[test]
    fn parses_sample() {
        let doc = parse_config(SAMPLE).unwrap();
        assert_eq!(doc.root_seed, 11);
        assert_eq!(doc.output_dir.as_deref(), Some("out"));
        assert_eq!(doc.scenarios.len(), 2);
        let p = &doc.scenarios[0];
        assert_eq!(p.thetas, vec![FRAC_PI_2]);
        assert_eq!(p.seeds, vec![0, 1, 2, 9]);
        assert_eq!(p.methods, vec![Method::W, Method::II]);
        let s = &doc.scenarios[1];
        assert_eq!(s.thetas.len(), 4);
        assert_eq!(s.mode, CorrelationMode::Exact);
        assert_eq!(s.bias.unwrap().epsilon(), 0.02);
        assert_eq!(s.seeds.len(), 50);
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("pi/2").unwrap(), FRAC_PI_2);
        assert_eq!(parse_number("pi").unwrap(), PI);
        assert!((parse_number("3*pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!(parse_number("pie").is_err());
        assert!(parse_number("pi/0").is_err());
        assert!(parse_number("inf").is_err());
        assert_eq!(parse_seed_list("3, 5..7").unwrap(), vec![3, 5, 6]);
        assert!(parse_seed_list("5..5").is_err());
        assert_eq!(parse_float_list("linear:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
    }

    fn errors(text: &str) -> Vec<ConfigError> {
        parse_config(text).unwrap_err().0
    }

    #[test]
    fn zero_strength_is_rejected_with_reason() {
        let e = errors("[scenario a]\nkind = single\nstate = mixed\nd = 2\ntheta = 0\n");
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].line, 5);
        assert!(e[0].message.contains("N_AB"), "{}", e[0].message);
    }

    #[test]
    fn duplicate_ids_list_both_lines() {
        let e = errors("[scenario a]\nkind = single\nstate = mixed\nd = 2\n[scenario a]\nkind = single\nstate = mixed\nd = 2\n");
        assert_eq!(e.len(), 1);
        assert!(e[0].message.contains("lines 1 and 5"), "{}", e[0].message);
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "\
colour = blue
[scenario a]
kind = single
state = pure:nonsense
d = 2
wobble = 3
[scenario b]
kind = sideways
state = family:p=2,psi=D
d = 2
[scenario c]
kind = single
state = mixed
d = 2
theta = 0.5, 0
";
        let e = errors(text);
        let lines: Vec<usize> = e.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![1, 4, 6, 8, 9, 15], "{e:?}");
        assert!(e[0].message.contains("unknown key 'colour'"));
        assert!(e[2].message.contains("wobble"));
        assert!(e[5].message.contains("N_AB"));
        let shown = ConfigErrors(e).to_string();
        assert_eq!(shown.lines().count(), 6);
    }

    #[test]
    fn missing_and_cross_field_problems() {
        let e = errors("[scenario a]\nkind = single\n");
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|e| e.line == 1));
        let e = errors("[scenario a]\nkind = purity_sweep\nstate = random:seed=1\nd = 2\n");
        assert_eq!(e[0].line, 3);
        let e = errors("[scenario a]\nkind = single\nstate = mixed\nd = 40\n");
        assert_eq!(e[0].line, 4);
        let e = errors("[scenario a]\nkind = single\nstate = mixed\nd = 2\nbias_epsilon = 0.5\n");
        assert_eq!(e[0].line, 5);
        assert!(!errors("[oops]\n")[0].message.is_empty());
    }

    #[test]
    fn seed_override() {
        let mut doc = parse_config(SAMPLE).unwrap();
        doc.apply_seed_override(Some("99")).unwrap();
        assert_eq!(doc.root_seed, 99);
        doc.apply_seed_override(None).unwrap();
        assert_eq!(doc.root_seed, 99);
        assert!(doc.apply_seed_override(Some("x")).is_err());
    }

    #[test]
    fn matrix_text_format() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.5, -1e-12), c(0.25, 0.125)], vec![c(0.25, -0.125), c(-1e-9, 0.0)]]);
        let text = write_matrix(&m, MatrixFormat::Text);
        assert_eq!(
            text,
            "0.500000+0.000000i  0.250000+0.125000i\n0.250000-0.125000i  0.000000+0.000000i\n"
        );
    }

    #[test]
    fn matrix_machine_round_trip() {
        let m = crate::states::random_density(3, 2).unwrap().into_matrix();
        let text = write_matrix(&m, MatrixFormat::Machine);
        assert!(text.starts_with("row,col,re,im\n1,1,"));
        assert_eq!(read_matrix_machine(&text).unwrap(), m);
        assert!(read_matrix_machine("row,col,re,im\n1,1,1,0\n1,2,0,0\n").is_err());
        assert!(matches!(
            read_matrix_machine("row,col,re,im\n1,1,x,0\n"),
            Err(Error::MatrixFormat { line: 2, .. })
        ));
    }

    #[test]
    fn csv_fields() {
        let row = ResultRow {
            scenario_id: "s".into(),
            kind: ScenarioKind::Single,
            method: "W".into(),
            d: 2,
            theta_a: 0.1,
            theta_b: 0.1,
            purity_p: None,
            n_events: 10,
            seed: "3".into(),
            trace_distance: f64::NAN,
            delta_rho: Some(0.5),
            bound: None,
            bias_epsilon: 0.0,
            bias_efficiency: 1.0,
        };
        let mut buf = Vec::new();
        write_results_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            format!("{}\ns,single,W,2,0.1,0.1,,10,3,NaN,0.5,,0,1\n", CSV_COLUMNS.join(","))
        );
    }

    fn scenario_strategy() -> impl Strategy<Value = Scenario> {
        let kinds = prop_oneof![
            Just(ScenarioKind::StrengthSweep),
            Just(ScenarioKind::ErrorSweep),
            Just(ScenarioKind::Single),
            Just(ScenarioKind::PuritySweep),
        ];
        let states = prop_oneof![
            Just(StateSpec::Pure("D".into())),
            (0.0..=1.0f64).prop_map(|p| StateSpec::Family { p, psi: "R".into() }),
        ];
        (
            "[a-z][a-z0-9_]{0,8}",
            kinds,
            states,
            prop::collection::vec(0.01..FRAC_PI_2, 1..4),
            proptest::option::of(0.01..FRAC_PI_2),
            1u64..1_000_000,
            prop::collection::vec(0u64..1000, 1..6),
            prop::sample::subsequence(vec![Method::W, Method::I, Method::II, Method::Qst], 1..4),
            proptest::option::of((-0.1..0.1f64, 0.9..1.1f64)),
            prop::collection::vec(0.0..=1.0f64, 1..5),
        )
            .prop_map(|(id, kind, state, mut thetas, theta_b, n, seeds, methods, bias, grid)| {
                if kind == ScenarioKind::PuritySweep {
                    thetas.truncate(1);
                }
                let mut s = Scenario::new(id, kind, state, 2);
                s.thetas = thetas;
                s.theta_b = theta_b;
                s.n_events = n;
                s.seeds = seeds;
                s.methods = methods;
                s.bias = bias.map(|(e, f)| BiasModel::new(e, f).unwrap()).filter(|b| !b.is_none());
                s.purity_grid = grid;
                s.mode = if n % 2 == 0 { CorrelationMode::Exact } else { CorrelationMode::Sampled };
                s.reference = if n % 3 == 0 { Reference::Qst } else { Reference::Truth };
                s
            })
    }

    proptest! {
        #[test]
        fn config_text_round_trips(
            seed in any::<u64>(),
            tol in 1e-14..1e-6f64,
            scenarios in prop::collection::vec(scenario_strategy(), 0..4),
        ) {
            let mut unique = Vec::new();
            for s in scenarios {
                if !unique.iter().any(|u: &Scenario| u.id == s.id) {
                    unique.push(s);
                }
            }
            let doc = ConfigDocument { root_seed: seed, output_dir: Some("results".into()), tolerance: tol, scenarios: unique };
            let parsed = parse_config(&doc.to_text()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(parsed, doc);
        }
    }
}
