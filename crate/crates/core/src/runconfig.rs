//! Run configuration: a small `key = value` text format covering the
//! group arcs, enumeration threshold, statistics options, and render
//! options, plus a canonical serialization used to fingerprint runs.
//!
//! Angles accept multiples of π (`pi`, `2pi`, `pi/3`, `7pi/12`, `-pi/4`)
//! as well as plain floats. Lines starting with `#` (or trailing `#`
//! comments) are ignored. Unknown or duplicate keys are errors, reported
//! with their line number.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{BoundaryArc, GroupConfig};
use crate::error::{Error, Result};
use crate::geom::PI;
use crate::orbit::AngularInterval;

/// How the critical exponent is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaMethod {
    /// Leading eigenvalue of the discretized transfer operator, bisected
    /// in the exponent.
    Eigenvalue,
    /// Log–log slope of the orbit counting function.
    SlopeFit,
}

impl DeltaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaMethod::Eigenvalue => "eigenvalue",
            DeltaMethod::SlopeFit => "slope-fit",
        }
    }
}

impl std::str::FromStr for DeltaMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "eigenvalue" => Ok(DeltaMethod::Eigenvalue),
            "slope-fit" => Ok(DeltaMethod::SlopeFit),
            other => Err(format!(
                "unknown method `{other}` (use eigenvalue or slope-fit)"
            )),
        }
    }
}

/// SVG rendering options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenderOptions {
    /// Image width/height in pixels.
    pub size: u32,
    /// Stroke width in pixels.
    pub stroke: f64,
    /// Orbit depth to draw (every reduced word up to this length).
    pub depth: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            size: 800,
            stroke: 1.0,
            depth: 8,
        }
    }
}

/// A fully resolved run: the group plus every tunable the CLI honors.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub group: GroupConfig,
    /// Curvature-norm threshold `T` for enumerations.
    pub t: f64,
    /// Base seed for all randomized procedures.
    pub seed: u64,
    /// Histogram bin width for scaled gaps.
    pub bin: f64,
    /// Optional angular window restricting gap statistics.
    pub interval: Option<AngularInterval>,
    pub delta_method: DeltaMethod,
    /// Refinement depth for the eigenvalue method.
    pub delta_depth: usize,
    pub render: RenderOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            group: GroupConfig::symmetric(),
            t: std::f64::consts::SQRT_2 * 1e3,
            seed: 7,
            bin: 0.2,
            interval: None,
            delta_method: DeltaMethod::Eigenvalue,
            delta_depth: 8,
            render: RenderOptions::default(),
        }
    }
}

/// Parse an angle: a float, or `[coef]pi[/div]`.
pub fn parse_angle(raw: &str) -> std::result::Result<f64, String> {
    let s = raw.trim();
    match s.find("pi") {
        None => s
            .parse()
            .map_err(|_| format!("`{s}` is not a number or a multiple of pi")),
        Some(pos) => {
            let (coef_s, rest) = (s[..pos].trim(), s[pos + 2..].trim());
            let coef: f64 = match coef_s {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .parse()
                    .map_err(|_| format!("bad coefficient `{c}` before pi"))?,
            };
            let div: f64 = if rest.is_empty() {
                1.0
            } else if let Some(d) = rest.strip_prefix('/') {
                let d = d.trim();
                let v: f64 = d.parse().map_err(|_| format!("bad divisor `{d}` after pi"))?;
                if v == 0.0 {
                    return Err("divisor after pi must be nonzero".into());
                }
                v
            } else {
                return Err(format!("unexpected `{rest}` after pi"));
            };
            Ok(coef * PI / div)
        }
    }
}

/// Split a value into exactly two whitespace- or comma-separated fields.
fn split_pair(raw: &str) -> std::result::Result<(String, String), String> {
    let fields: Vec<&str> = raw
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|f| !f.is_empty())
        .collect();
    match fields.as_slice() {
        [a, b] => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("expected two values, got {}", fields.len())),
    }
}

fn line_err(lineno: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {lineno}: {msg}"))
}

impl RunConfig {
    /// Parse a configuration text. Missing keys fall back to the defaults;
    /// an empty text yields [`RunConfig::default`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut arcs: Vec<(usize, BoundaryArc)> = Vec::new();
        let mut r0: Option<(usize, f64)> = None;
        let mut t: Option<f64> = None;
        let mut seed: Option<u64> = None;
        let mut bin: Option<f64> = None;
        let mut interval: Option<(usize, f64, f64)> = None;
        let mut delta_method: Option<DeltaMethod> = None;
        let mut delta_depth: Option<usize> = None;
        let mut render = RenderOptions::default();
        let mut seen: Vec<&str> = Vec::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| line_err(lineno, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(line_err(lineno, format!("empty value for `{key}`")));
            }
            if key != "arc"
                && seen.contains(&key) {
                    return Err(line_err(lineno, format!("duplicate key `{key}`")));
                }

            match key {
                "arc" => {
                    let (a, b) = split_pair(value).map_err(|e| line_err(lineno, e))?;
                    let center = parse_angle(&a).map_err(|e| line_err(lineno, e))?;
                    let len = parse_angle(&b).map_err(|e| line_err(lineno, e))?;
                    arcs.push((lineno, BoundaryArc::new(center, len)));
                }
                "r0" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad r0 `{value}`")))?;
                    r0 = Some((lineno, v));
                }
                "t" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad threshold `{value}`")))?;
                    if !(v.is_finite() && v > 0.0) {
                        return Err(line_err(lineno, "threshold must be positive and finite"));
                    }
                    t = Some(v);
                }
                "seed" => {
                    seed = Some(value.parse().map_err(|_| {
                        line_err(lineno, format!("bad seed `{value}` (need an unsigned integer)"))
                    })?);
                }
                "bin" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad bin width `{value}`")))?;
                    if !(v.is_finite() && v > 0.0) {
                        return Err(line_err(lineno, "bin width must be positive and finite"));
                    }
                    bin = Some(v);
                }
                "interval" => {
                    let (a, b) = split_pair(value).map_err(|e| line_err(lineno, e))?;
                    let start = parse_angle(&a).map_err(|e| line_err(lineno, e))?;
                    let end = parse_angle(&b).map_err(|e| line_err(lineno, e))?;
                    interval = Some((lineno, start, end));
                }
                "delta_method" => {
                    delta_method = Some(value.parse().map_err(|e| line_err(lineno, e))?);
                }
                "delta_depth" => {
                    let v: usize = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad depth `{value}`")))?;
                    if !(1..=14).contains(&v) {
                        return Err(line_err(lineno, "delta_depth must lie in 1..=14"));
                    }
                    delta_depth = Some(v);
                }
                "render_size" => {
                    let v: u32 = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad size `{value}`")))?;
                    if !(64..=4096).contains(&v) {
                        return Err(line_err(lineno, "render_size must lie in 64..=4096"));
                    }
                    render.size = v;
                }
                "render_stroke" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad stroke `{value}`")))?;
                    if !(v.is_finite() && v > 0.0) {
                        return Err(line_err(lineno, "render_stroke must be positive"));
                    }
                    render.stroke = v;
                }
                "render_depth" => {
                    let v: usize = value
                        .parse()
                        .map_err(|_| line_err(lineno, format!("bad depth `{value}`")))?;
                    if !(1..=12).contains(&v) {
                        return Err(line_err(lineno, "render_depth must lie in 1..=12"));
                    }
                    render.depth = v;
                }
                other => return Err(line_err(lineno, format!("unknown key `{other}`"))),
            }
            seen.push(key);
        }

        let arc_array: [BoundaryArc; 3] = match arcs.len() {
            0 => GroupConfig::symmetric().arcs,
            3 => [arcs[0].1, arcs[1].1, arcs[2].1],
            n => {
                let lineno = arcs.last().unwrap().0;
                return Err(line_err(
                    lineno,
                    format!("expected exactly 3 `arc` lines, got {n}"),
                ));
            }
        };
        let group = match r0 {
            None => GroupConfig::new(arc_array)?,
            Some((lineno, want)) => GroupConfig::with_r0(arc_array, want)
                .map_err(|e| line_err(lineno, e))?,
        };
        let interval = match interval {
            None => None,
            Some((lineno, start, end)) => {
                Some(AngularInterval::new(start, end).map_err(|e| line_err(lineno, e))?)
            }
        };

        let dflt = RunConfig::default();
        Ok(Self {
            group,
            t: t.unwrap_or(dflt.t),
            seed: seed.unwrap_or(dflt.seed),
            bin: bin.unwrap_or(dflt.bin),
            interval,
            delta_method: delta_method.unwrap_or(dflt.delta_method),
            delta_depth: delta_depth.unwrap_or(dflt.delta_depth),
            render,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical text form: every field spelled out with shortest
    /// round-trip floats, so `parse(canonical)` reproduces the config
    /// exactly and equal configs hash equally.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        for arc in &self.group.arcs {
            writeln!(out, "arc = {} {}", arc.center_angle, arc.arclength).unwrap();
        }
        writeln!(out, "r0 = {}", self.group.r0).unwrap();
        writeln!(out, "t = {}", self.t).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "bin = {}", self.bin).unwrap();
        if let Some(iv) = self.interval {
            writeln!(out, "interval = {} {}", iv.start, iv.end).unwrap();
        }
        writeln!(out, "delta_method = {}", self.delta_method.as_str()).unwrap();
        writeln!(out, "delta_depth = {}", self.delta_depth).unwrap();
        writeln!(out, "render_size = {}", self.render.size).unwrap();
        writeln!(out, "render_stroke = {}", self.render.stroke).unwrap();
        writeln!(out, "render_depth = {}", self.render.depth).unwrap();
        out
    }

    /// Short run fingerprint: first 16 hex digits of the SHA-256 of the
    /// canonical form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_string().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_the_default() {
        let cfg = RunConfig::parse("").unwrap();
        let dflt = RunConfig::default();
        assert_eq!(cfg.t, dflt.t);
        assert_eq!(cfg.seed, dflt.seed);
        assert_eq!(cfg.group.r0, dflt.group.r0);
        assert_eq!(cfg.delta_method, DeltaMethod::Eigenvalue);
        assert!(cfg.interval.is_none());
    }

    #[test]
    fn pi_expressions_parse_exactly() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("7pi/12").unwrap(), 7.0 * PI / 12.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("5e-1").unwrap(), 0.5);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("two pi").is_err());
    }

    #[test]
    fn explicit_symmetric_arcs_match_the_builtin() {
        let text = "\
arc = pi/3 7pi/12
arc = pi 7pi/12
arc = 5pi/3 7pi/12
";
        let cfg = RunConfig::parse(text).unwrap();
        let sym = GroupConfig::symmetric();
        assert_eq!(cfg.group.r0.to_bits(), sym.r0.to_bits());
        for (a, b) in cfg.group.arcs.iter().zip(&sym.arcs) {
            assert_eq!(a.center_angle.to_bits(), b.center_angle.to_bits());
            assert_eq!(a.arclength.to_bits(), b.arclength.to_bits());
        }
    }

    #[test]
    fn full_text_round_trips_through_canonical_form() {
        let text = "\
# a tweaked run
t = 500          # threshold
seed = 11
bin = 0.25
interval = pi/6 3pi/2
delta_method = slope-fit
delta_depth = 6
r0 = 0.05
render_size = 400
render_stroke = 0.5
render_depth = 5
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.t, 500.0);
        assert_eq!(cfg.group.r0, 0.05);
        assert_eq!(cfg.delta_method, DeltaMethod::SlopeFit);
        let canon = cfg.canonical_string();
        let back = RunConfig::parse(&canon).unwrap();
        assert_eq!(back.canonical_string(), canon);
        assert_eq!(back.digest(), cfg.digest());
        assert_eq!(cfg.digest().len(), 16);
    }

    #[test]
    fn default_round_trips_and_differs_from_a_tweak() {
        let dflt = RunConfig::default();
        let back = RunConfig::parse(&dflt.canonical_string()).unwrap();
        assert_eq!(back.canonical_string(), dflt.canonical_string());
        let tweaked = RunConfig::parse("seed = 8").unwrap();
        assert_ne!(tweaked.digest(), dflt.digest());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let check = |text: &str, needle: &str| {
            let err = RunConfig::parse(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err:?} should mention {needle:?}");
        };
        check("t = 500\nwat = 1", "line 2");
        check("t = -3", "positive");
        check("t = 500\nt = 600", "duplicate");
        check("arc = pi/3 7pi/12\narc = pi 7pi/12", "exactly 3");
        check("interval = pi", "expected two values");
        check("seed", "key = value");
        check("bin =", "empty value");
        check("delta_depth = 99", "1..=14");
    }

    #[test]
    fn oversized_r0_is_rejected_with_its_line() {
        let err = RunConfig::parse("t = 100\nr0 = 0.5")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("too large"), "{err}");
    }
}
