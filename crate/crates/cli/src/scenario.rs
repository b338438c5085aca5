//! Scenario files.
//!
//! A flat, line-oriented `key = value` format. `#` starts a comment. Keys
//! belong to the section most recently opened by a `[deformation]`,
//! `[particle]` or `[run]` header; `name` may appear before any header.
//!
//! ```text
//! name = vortex
//!
//! [deformation]
//! kind = lie_space          # classical | canonical | lie_time | lie_space | quadratic
//! kappa = 30                # or inv_kappa = 0.0333; inf means undeformed
//! axes = 1 2 3              # k l gamma; lie_time takes rho tau
//! momentum_extension = true # false drops the {p, x_gamma} brackets (jacobi only)
//!
//! [particle]
//! mass = 1
//! force = 0 0 1
//! x0 = 0 0 0
//! v0 = 0 1 0
//!
//! [run]
//! t0 = 0
//! t1 = 376.99111843077515
//! samples = 2001
//! rel_tol = 1e-10
//! abs_tol = 1e-12
//! tolerance = 1e-6          # position tolerance for compare
//! ```
//!
//! Canonical deformations take `theta12`, `theta13` and `theta23` instead of
//! `kappa` and `axes`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use ncmech::{DeformationSpec, ScenarioParams, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: DeformationSpec,
    pub momentum_extension: bool,
    pub mass: f64,
    pub force: Vec3,
    pub x0: Vec3,
    pub v0: Vec3,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Top,
    Deformation,
    Particle,
    Run,
}

impl Section {
    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Top => &["name"],
            Section::Deformation => &[
                "kind",
                "kappa",
                "inv_kappa",
                "axes",
                "theta12",
                "theta13",
                "theta23",
                "momentum_extension",
            ],
            Section::Particle => &["mass", "force", "x0", "v0"],
            Section::Run => &["t0", "t1", "samples", "rel_tol", "abs_tol", "tolerance"],
        }
    }
}

/// Raw values with the line each came from.
struct Entries(HashMap<&'static str, (usize, String)>);

impl Entries {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.0.get(key).map(|(line, v)| (*line, v.as_str()))
    }

    fn number(&self, key: &str, default: f64) -> Result<(usize, f64), ParseError> {
        match self.get(key) {
            None => Ok((0, default)),
            Some((line, raw)) => parse_number(raw).map(|v| (line, v)).ok_or_else(|| ParseError {
                line,
                message: format!("{key}: expected a number, got '{raw}'"),
            }),
        }
    }

    fn finite(&self, key: &str, default: f64) -> Result<(usize, f64), ParseError> {
        let (line, v) = self.number(key, default)?;
        if v.is_finite() {
            Ok((line, v))
        } else {
            fail(line, format!("{key} must be finite"))
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ParseError> {
        let (line, v) = self.finite(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            fail(line, format!("{key} must be positive, got {v}"))
        }
    }

    fn vector(&self, key: &str) -> Result<Vec3, ParseError> {
        let Some((line, raw)) = self.get(key) else {
            return Ok([0.0; 3]);
        };
        let parts: Vec<&str> = raw.split_whitespace().collect();
        if parts.len() != 3 {
            return fail(line, format!("{key}: expected three numbers, got '{raw}'"));
        }
        let mut v = [0.0; 3];
        for (slot, part) in v.iter_mut().zip(parts) {
            *slot = match parse_number(part) {
                Some(x) if x.is_finite() => x,
                _ => return fail(line, format!("{key}: '{part}' is not a finite number")),
            };
        }
        Ok(v)
    }
}

fn parse_number(raw: &str) -> Option<f64> {
    match raw {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => raw.parse::<f64>().ok().filter(|v| !v.is_nan()),
    }
}

pub fn parse(text: &str) -> Result<Scenario, ParseError> {
    let mut section = Section::Top;
    let mut entries = HashMap::new();
    let mut headers = HashMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let Some(name) = header.strip_suffix(']') else {
                return fail(line, format!("malformed section header '{content}'"));
            };
            section = match name.trim() {
                "deformation" => Section::Deformation,
                "particle" => Section::Particle,
                "run" => Section::Run,
                other => return fail(line, format!("unknown section [{other}]")),
            };
            if headers.insert(section, line).is_some() {
                return fail(line, format!("section [{}] repeated", name.trim()));
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return fail(line, format!("expected 'key = value', got '{content}'"));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = section.keys().iter().find(|k| **k == key) else {
            return fail(line, format!("unknown key '{key}' in this section"));
        };
        if value.is_empty() {
            return fail(line, format!("{key}: missing value"));
        }
        if entries.insert(known, (line, value.to_string())).is_some() {
            return fail(line, format!("duplicate key '{key}'"));
        }
    }
    let entries = Entries(entries);
    let deformation_line = headers.get(&Section::Deformation).copied().unwrap_or(1);
    build(&entries, deformation_line)
}

fn parse_axes(entries: &Entries, count: usize) -> Result<Vec<usize>, ParseError> {
    let Some((line, raw)) = entries.get("axes") else {
        return Ok((1..=count).collect());
    };
    let axes: Vec<usize> = raw
        .split_whitespace()
        .map(|a| a.parse::<usize>())
        .collect::<Result<_, _>>()
        .or_else(|_| fail(line, format!("axes: expected {count} integers in 1..3, got '{raw}'")))?;
    if axes.len() != count || axes.iter().any(|a| !(1..=3).contains(a)) {
        return fail(line, format!("axes: expected {count} integers in 1..3, got '{raw}'"));
    }
    for i in 0..count {
        if axes[..i].contains(&axes[i]) {
            return fail(line, format!("axes must be distinct, got '{raw}'"));
        }
    }
    Ok(axes)
}

fn inverse_strength(entries: &Entries) -> Result<f64, ParseError> {
    match (entries.get("kappa"), entries.get("inv_kappa")) {
        (Some(_), Some((line, _))) => fail(line, "give either kappa or inv_kappa, not both"),
        (Some(_), None) => {
            let (line, kappa) = entries.number("kappa", 0.0)?;
            if kappa == 0.0 {
                return fail(line, "kappa must be nonzero");
            }
            Ok(1.0 / kappa)
        }
        (None, Some(_)) => Ok(entries.finite("inv_kappa", 0.0)?.1),
        (None, None) => Ok(0.0),
    }
}

fn reject_keys(entries: &Entries, keys: &[&str], kind: &str) -> Result<(), ParseError> {
    for key in keys {
        if let Some((line, _)) = entries.get(key) {
            return fail(line, format!("{key} does not apply to kind = {kind}"));
        }
    }
    Ok(())
}

fn build(entries: &Entries, deformation_line: usize) -> Result<Scenario, ParseError> {
    let (kind_line, kind) = entries.get("kind").unwrap_or((deformation_line, "classical"));
    let thetas = ["theta12", "theta13", "theta23"];
    let spec = match kind {
        "classical" => {
            reject_keys(entries, &["kappa", "inv_kappa", "axes"], kind)?;
            reject_keys(entries, &thetas, kind)?;
            DeformationSpec::Classical
        }
        "canonical" => {
            reject_keys(entries, &["kappa", "inv_kappa", "axes"], kind)?;
            let [a, b, c] = thetas.map(|k| entries.finite(k, 0.0).map(|v| v.1));
            DeformationSpec::canonical_from_components(a?, b?, c?)
                .or_else(|e| fail(kind_line, e.to_string()))?
        }
        "lie_time" => {
            reject_keys(entries, &thetas, kind)?;
            let inv = inverse_strength(entries)?;
            let axes = parse_axes(entries, 2)?;
            DeformationSpec::lie_time(inv, axes[0], axes[1]).or_else(|e| fail(kind_line, e.to_string()))?
        }
        "lie_space" | "quadratic" => {
            reject_keys(entries, &thetas, kind)?;
            let inv = inverse_strength(entries)?;
            let axes = parse_axes(entries, 3)?;
            let built = if kind == "lie_space" {
                DeformationSpec::lie_space(inv, axes[0], axes[1], axes[2])
            } else {
                DeformationSpec::quadratic(inv, axes[0], axes[1], axes[2])
            };
            built.or_else(|e| fail(kind_line, e.to_string()))?
        }
        other => {
            return fail(
                kind_line,
                format!("unknown kind '{other}' (expected classical, canonical, lie_time, lie_space or quadratic)"),
            )
        }
    };
    let momentum_extension = match entries.get("momentum_extension") {
        None | Some((_, "true")) => true,
        Some((_, "false")) => false,
        Some((line, raw)) => return fail(line, format!("momentum_extension: expected true or false, got '{raw}'")),
    };

    let (_, t0) = entries.finite("t0", 0.0)?;
    let (t1_line, t1) = entries.finite("t1", t0 + 10.0)?;
    if t1 <= t0 {
        return fail(t1_line.max(1), format!("t1 must exceed t0 ({t1} <= {t0})"));
    }
    let samples = match entries.get("samples") {
        None => 101,
        Some((line, raw)) => match raw.parse::<usize>() {
            Ok(n) if n >= 2 => n,
            _ => return fail(line, format!("samples: expected an integer >= 2, got '{raw}'")),
        },
    };

    Ok(Scenario {
        name: entries.get("name").map_or("scenario", |(_, v)| v).to_string(),
        spec,
        momentum_extension,
        mass: entries.positive("mass", 1.0)?,
        force: entries.vector("force")?,
        x0: entries.vector("x0")?,
        v0: entries.vector("v0")?,
        t0,
        t1,
        samples,
        rel_tol: entries.positive("rel_tol", 1e-10)?,
        abs_tol: entries.positive("abs_tol", 1e-12)?,
        tolerance: entries.positive("tolerance", 1e-6)?,
    })
}

/// Built-in scenarios: the Lie-to-space vortex (`figure1`) and the quadratic
/// vortex (`figure2`), each with κ = 30 and unit mass, `F_γ` and `v_{l0}`.
pub fn builtin(name: &str) -> Option<Scenario> {
    let kappa = 30.0;
    let (spec, t1, samples) = match name {
        "figure1" => (
            DeformationSpec::lie_space(1.0 / kappa, 1, 2, 3).ok()?,
            4.0 * PI * kappa,
            2001,
        ),
        "figure2" => (
            DeformationSpec::quadratic(1.0 / kappa, 1, 2, 3).ok()?,
            2.0 * (2.0 * PI * kappa).sqrt(),
            1001,
        ),
        _ => return None,
    };
    Some(Scenario {
        name: name.to_string(),
        spec,
        momentum_extension: true,
        mass: 1.0,
        force: [0.0, 0.0, 1.0],
        x0: [0.0; 3],
        v0: [0.0, 1.0, 0.0],
        t0: 0.0,
        t1,
        samples,
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        tolerance: 1e-6,
    })
}

pub const BUILTINS: [&str; 2] = ["figure1", "figure2"];

impl Scenario {
    pub fn params(&self) -> ncmech::Result<ScenarioParams> {
        ScenarioParams::new(self.spec, self.mass, self.force, self.x0, self.v0)
    }
}
