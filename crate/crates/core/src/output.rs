//! Deterministic output: CSV and JSON writers that stamp every file with
//! the tool version, config fingerprint, and seed (never a timestamp, so
//! reruns are byte-identical), plus an SVG renderer for the orbit.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gaps::{Ecdf, GapTable, HistBin};
use crate::orbit::{enumerate_to_depth, word_string, OrbitPoint};
use crate::runconfig::RunConfig;

/// Provenance stamped onto every output file.
#[derive(Debug, Clone, Serialize)]
pub struct OutputMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: String,
    pub seed: u64,
}

impl OutputMeta {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: "schottky",
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.digest(),
            seed: cfg.seed,
        }
    }

    fn comment_header(&self) -> String {
        format!(
            "# {} {}\n# config {}\n# seed {}\n",
            self.tool, self.version, self.config, self.seed
        )
    }
}

/// Fixed-width scientific notation (17 significant digits), with negative
/// zero normalized so equal values always print equally.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// CSV of an enumeration: one row per tangency, sorted as enumerated.
pub fn orbit_csv(points: &[OrbitPoint], meta: &OutputMeta) -> String {
    let mut out = meta.comment_header();
    out.push_str("word,length,theta,kappa,norm\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            word_string(&p.word),
            p.word.len(),
            format_float(p.circle.theta),
            format_float(p.circle.kappa),
            format_float(p.norm()),
        );
    }
    out
}

/// CSV of the scaled gaps of a table: one row per gap in CCW order.
pub fn gaps_csv(table: &GapTable, meta: &OutputMeta) -> String {
    let mut out = meta.comment_header();
    out.push_str("theta,gap,scaled\n");
    for i in 0..table.gaps.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_float(table.thetas[i]),
            format_float(table.gaps[i]),
            format_float(table.scaled[i]),
        );
    }
    out
}

/// CSV of an empirical CDF sampled at a grid.
pub fn cdf_csv(ecdf: &Ecdf, grid: &[f64], meta: &OutputMeta) -> String {
    let mut out = meta.comment_header();
    out.push_str("s,cdf\n");
    for &s in grid {
        let _ = writeln!(out, "{},{}", format_float(s), format_float(ecdf.eval(s)));
    }
    out
}

/// CSV of a histogram.
pub fn histogram_csv(bins: &[HistBin], meta: &OutputMeta) -> String {
    let mut out = meta.comment_header();
    out.push_str("lo,hi,count,density\n");
    for b in bins {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_float(b.lo),
            format_float(b.hi),
            b.count,
            format_float(b.density),
        );
    }
    out
}

/// Wrap a serializable payload in a `{meta, name, data}` JSON document.
pub fn json_report<T: Serialize>(name: &str, meta: &OutputMeta, payload: &T) -> Result<String> {
    let doc = json!({
        "meta": meta,
        "name": name,
        "data": payload,
    });
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::Numeric(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write a file, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}

fn svg_num(x: f64) -> String {
    format!("{x:.6}")
}

fn circle_element(center: num_complex::Complex64, radius: f64, style: &str) -> String {
    format!(
        "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" {style}/>\n",
        svg_num(center.re),
        svg_num(center.im),
        svg_num(radius)
    )
}

/// Render the configuration and the orbit to depth `cfg.render.depth` as a
/// standalone SVG: the unit circle, the three boundary arcs, the three
/// reflection circles (dashed), and every orbit circle colored by word
/// length.
pub fn render_svg(cfg: &RunConfig) -> Result<String> {
    let size = cfg.render.size;
    // stroke is given in pixels; convert to world units (viewBox is 2.1 wide)
    let sw = cfg.render.stroke * 2.1 / size as f64;
    let depth = cfg.render.depth;
    let points = enumerate_to_depth(&cfg.group, depth)?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"-1.05 -1.05 2.1 2.1\">"
    );
    let _ = writeln!(out, "<!-- config {} -->", cfg.digest());
    // flip y so counterclockwise angles run counterclockwise on screen
    let _ = writeln!(out, "<g transform=\"scale(1,-1)\" fill=\"none\">");
    out.push_str(&circle_element(
        num_complex::Complex64::new(0.0, 0.0),
        1.0,
        &format!("stroke=\"#000\" stroke-width=\"{}\"", svg_num(sw)),
    ));
    for arc in &cfg.group.arcs {
        let a = arc.center_angle - arc.arclength / 2.0;
        let b = arc.center_angle + arc.arclength / 2.0;
        let _ = writeln!(
            out,
            "  <path d=\"M {} {} A 1 1 0 0 1 {} {}\" stroke=\"#000\" stroke-width=\"{}\"/>",
            svg_num(a.cos()),
            svg_num(a.sin()),
            svg_num(b.cos()),
            svg_num(b.sin()),
            svg_num(3.0 * sw),
        );
    }
    for c in &cfg.group.circles {
        out.push_str(&circle_element(
            c.center,
            c.radius,
            &format!(
                "stroke=\"#888\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"",
                svg_num(sw),
                svg_num(4.0 * sw),
                svg_num(4.0 * sw)
            ),
        ));
    }
    for p in &points {
        let hue = 360.0 * p.word.len() as f64 / (depth + 1) as f64;
        out.push_str(&circle_element(
            p.circle.center(),
            p.circle.radius(),
            &format!(
                "stroke=\"hsl({},70%,45%)\" stroke-width=\"{}\"",
                svg_num(hue),
                svg_num(sw)
            ),
        ));
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GroupConfig;
    use crate::gaps::{gap_cdf, gap_table};
    use crate::orbit::enumerate_orbit;

    fn meta() -> OutputMeta {
        OutputMeta::new(&RunConfig::default())
    }

    #[test]
    fn float_format_is_fixed_width_and_signless_at_zero() {
        assert_eq!(format_float(2.5), "2.5000000000000000e0");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
        assert_eq!(format_float(-0.0), "0.0000000000000000e0");
        assert_eq!(format_float(-1.0 / 3.0), "-3.3333333333333331e-1");
    }

    #[test]
    fn orbit_csv_has_header_and_one_row_per_point() {
        let cfg = GroupConfig::symmetric();
        let pts = enumerate_orbit(&cfg, 50.0, None).unwrap();
        let csv = orbit_csv(&pts, &meta());
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# schottky "));
        assert!(lines[1].starts_with("# config "));
        assert!(lines[2].starts_with("# seed "));
        assert_eq!(lines[3], "word,length,theta,kappa,norm");
        assert_eq!(lines.len(), 4 + pts.len());
        // the identity sits at theta = 0, so it is the first row
        let first: Vec<&str> = lines[4].split(',').collect();
        assert_eq!(first.len(), 5);
        assert_eq!(first[0], "e");
        assert_eq!(first[1], "0");
        let second: Vec<&str> = lines[5].split(',').collect();
        assert_eq!(second[1], second[0].len().to_string());
    }

    #[test]
    fn gap_and_cdf_csvs_are_consistent() {
        let cfg = GroupConfig::symmetric();
        let pts = enumerate_orbit(&cfg, 100.0, None).unwrap();
        let table = gap_table(&pts, 100.0, None).unwrap();
        let m = meta();
        let gcsv = gaps_csv(&table, &m);
        assert_eq!(gcsv.lines().count(), 4 + table.gaps.len());
        let ecdf = gap_cdf(&table, None).unwrap();
        let grid = [1.0, 10.0, 100.0];
        let ccsv = cdf_csv(&ecdf, &grid, &m);
        assert_eq!(ccsv.lines().count(), 4 + grid.len());
        let last = ccsv.lines().last().unwrap();
        let f: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        assert!(f > 0.0 && f <= 1.0);
    }

    #[test]
    fn json_report_wraps_payload_with_meta() {
        let doc = json_report("demo", &meta(), &vec![1.0, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["meta"]["tool"], "schottky");
        assert_eq!(v["name"], "demo");
        assert_eq!(v["data"][1], 2.0);
        assert!(doc.ends_with('\n'));
    }

    #[test]
    fn svg_draws_every_circle_once() {
        let mut cfg = RunConfig::default();
        cfg.render.depth = 3;
        cfg.render.size = 400;
        let svg = render_svg(&cfg).unwrap();
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        // unit circle + 3 reflection circles + orbit circles to depth 3
        let orbit = 1 + 3 + 6 + 12;
        let circles = svg.matches("<circle ").count();
        assert_eq!(circles, 1 + 3 + orbit);
        assert_eq!(svg.matches("<path ").count(), 3);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn writer_creates_parent_directories() {
        let dir = std::env::temp_dir().join(format!("schottky-out-{}", std::process::id()));
        let path = dir.join("nested/report.csv");
        write_text(&path, "x\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "x\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
