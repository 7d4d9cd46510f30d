//! Deterministic emitters: SVG scenes, the circle-list CSV schema, and
//! JSON with fixed-width floats.
//!
//! Identical inputs produce byte-identical output regardless of thread
//! count: every emitter sorts into a canonical order before writing, and
//! all floats are printed with a fixed number of significant digits.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::descartes::PackingRun;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("CSV parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Fixed 8-color palette, indexed by word length mod 8.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn svg_num(x: f64) -> String {
    format!("{x:.6}")
}

#[derive(Debug, Clone, Copy)]
pub struct CircleElement {
    pub center: Complex64,
    pub radius: f64,
    pub color_index: usize,
    pub filled: bool,
    pub stroke_width: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PointElement {
    pub position: Complex64,
    pub color_index: usize,
    pub radius: f64,
}

/// One z-ordered layer of circles and points.
#[derive(Debug, Clone, Default)]
pub struct Layer {
    pub circles: Vec<CircleElement>,
    pub points: Vec<PointElement>,
}

/// A renderable scene: explicit viewport and explicit layer order.
#[derive(Debug, Clone)]
pub struct Scene {
    /// (x_min, x_max, y_min, y_max); must have positive area.
    pub viewport: (f64, f64, f64, f64),
    pub layers: Vec<Layer>,
}

impl Scene {
    pub fn new(viewport: (f64, f64, f64, f64)) -> Self {
        assert!(
            viewport.1 > viewport.0 && viewport.3 > viewport.2,
            "viewport needs positive area"
        );
        Scene {
            viewport,
            layers: Vec::new(),
        }
    }

    /// A scene for a packing run: one layer, colors by word length mod 8,
    /// viewport hugging the circles with 5% padding.
    pub fn from_packing(run: &PackingRun) -> Self {
        let mut lo_x = f64::INFINITY;
        let mut hi_x = f64::NEG_INFINITY;
        let mut lo_y = f64::INFINITY;
        let mut hi_y = f64::NEG_INFINITY;
        let mut layer = Layer::default();
        for c in &run.circles {
            let center = run.center_of(c);
            let r = run.radius_of(c);
            lo_x = lo_x.min(center.re - r);
            hi_x = hi_x.max(center.re + r);
            lo_y = lo_y.min(center.im - r);
            hi_y = hi_y.max(center.im + r);
            layer.circles.push(CircleElement {
                center,
                radius: r,
                color_index: (c.word_len as usize) % PALETTE.len(),
                filled: false,
                stroke_width: 0.002,
            });
        }
        if !layer.circles.is_empty() {
            let pad_x = 0.05 * (hi_x - lo_x).max(1e-9);
            let pad_y = 0.05 * (hi_y - lo_y).max(1e-9);
            let mut scene = Scene::new((lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y));
            scene.layers.push(layer);
            scene
        } else {
            Scene::new((-1.0, 1.0, -1.0, 1.0))
        }
    }
}

/// Emits well-formed SVG 1.1. Elements appear in canonical order: layers in
/// declaration order, circles largest-first (ties by center), points by
/// coordinate. An empty scene is a viewport rectangle only.
pub fn emit_svg(scene: &Scene) -> String {
    let (x0, x1, y0, y1) = scene.viewport;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        svg_num(x0),
        svg_num(y0),
        svg_num(x1 - x0),
        svg_num(y1 - y0),
    );
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"{}\"/>",
        svg_num(x0),
        svg_num(y0),
        svg_num(x1 - x0),
        svg_num(y1 - y0),
        svg_num((x1 - x0) * 1e-3),
    );
    for layer in &scene.layers {
        let mut circles = layer.circles.clone();
        circles.sort_by(|a, b| {
            b.radius
                .total_cmp(&a.radius)
                .then(a.center.re.total_cmp(&b.center.re))
                .then(a.center.im.total_cmp(&b.center.im))
        });
        for c in circles {
            let color = PALETTE[c.color_index % PALETTE.len()];
            let (fill, stroke) = if c.filled {
                (color, "none")
            } else {
                ("none", color)
            };
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
                svg_num(c.center.re),
                svg_num(c.center.im),
                svg_num(c.radius),
                fill,
                stroke,
                svg_num(c.stroke_width),
            );
        }
        let mut points = layer.points.clone();
        points.sort_by(|a, b| {
            a.position
                .re
                .total_cmp(&b.position.re)
                .then(a.position.im.total_cmp(&b.position.im))
        });
        for p in points {
            let _ = writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"none\"/>",
                svg_num(p.position.re),
                svg_num(p.position.im),
                svg_num(p.radius),
                PALETTE[p.color_index % PALETTE.len()],
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub const CIRCLE_CSV_HEADER: &str = "curvature,center_re,center_im,radius,word_len";

/// Circle-list CSV: exact integers in decimal, reals with 17 significant
/// digits, canonical row order, LF endings, trailing newline.
pub fn emit_circles_csv(run: &PackingRun) -> String {
    let mut out = String::with_capacity(64 * (run.len() + 1));
    out.push_str(CIRCLE_CSV_HEADER);
    out.push('\n');
    for c in &run.circles {
        let center = run.center_of(c);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.curvature,
            fmt_real(center.re),
            fmt_real(center.im),
            fmt_real(run.radius_of(c)),
            c.word_len,
        );
    }
    out
}

/// A circle row parsed back from the CSV schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleRow {
    pub curvature: i128,
    pub center: Complex64,
    pub radius: f64,
    pub word_len: u32,
}

pub fn parse_circles_csv(text: &str) -> Result<Vec<CircleRow>, RenderError> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CIRCLE_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(RenderError::Csv {
                line: 1,
                msg: format!("unexpected header '{header}'"),
            })
        }
        None => {
            return Err(RenderError::Csv {
                line: 1,
                msg: "empty input".into(),
            })
        }
    }
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(RenderError::Csv {
                line: i + 1,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let err = |msg: String| RenderError::Csv { line: i + 1, msg };
        rows.push(CircleRow {
            curvature: fields[0]
                .trim()
                .parse()
                .map_err(|e| err(format!("curvature: {e}")))?,
            center: Complex64::new(
                fields[1]
                    .trim()
                    .parse()
                    .map_err(|e| err(format!("center_re: {e}")))?,
                fields[2]
                    .trim()
                    .parse()
                    .map_err(|e| err(format!("center_im: {e}")))?,
            ),
            radius: fields[3]
                .trim()
                .parse()
                .map_err(|e| err(format!("radius: {e}")))?,
            word_len: fields[4]
                .trim()
                .parse()
                .map_err(|e| err(format!("word_len: {e}")))?,
        });
    }
    Ok(rows)
}

/// Threshold/count series CSV with the same formatting contract.
pub fn emit_series_csv(pairs: &[(f64, u64)]) -> String {
    let mut out = String::from("threshold,count\n");
    for (t, n) in pairs {
        let _ = writeln!(out, "{},{}", fmt_real(*t), n);
    }
    out
}

/// Serializes any report to JSON with every float printed at 17
/// significant digits (serde_json's default shortest-round-trip floats are
/// not a fixed-width contract).
pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17Formatter::default());
    value.serialize(&mut ser).expect("report serializes");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Default)]
struct Fixed17Formatter {
    indent_level: usize,
}

impl serde_json::ser::Formatter for Fixed17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.indent_level += 1;
        writer.write_all(b"{")
    }

    fn end_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.indent_level -= 1;
        writer.write_all(b"\n")?;
        writer.write_all(indent(self.indent_level).as_bytes())?;
        writer.write_all(b"}")
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        if !first {
            writer.write_all(b",")?;
        }
        writer.write_all(b"\n")?;
        writer.write_all(indent(self.indent_level).as_bytes())
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(b": ")
    }
}

fn indent(level: usize) -> String {
    "  ".repeat(level)
}

impl Scene {
    /// A scene over parsed circle rows, mirroring `from_packing`.
    pub fn from_rows(rows: &[CircleRow]) -> Self {
        let mut lo_x = f64::INFINITY;
        let mut hi_x = f64::NEG_INFINITY;
        let mut lo_y = f64::INFINITY;
        let mut hi_y = f64::NEG_INFINITY;
        let mut layer = Layer::default();
        for r in rows {
            lo_x = lo_x.min(r.center.re - r.radius);
            hi_x = hi_x.max(r.center.re + r.radius);
            lo_y = lo_y.min(r.center.im - r.radius);
            hi_y = hi_y.max(r.center.im + r.radius);
            layer.circles.push(CircleElement {
                center: r.center,
                radius: r.radius,
                color_index: (r.word_len as usize) % PALETTE.len(),
                filled: false,
                stroke_width: 0.002,
            });
        }
        if layer.circles.is_empty() {
            return Scene::new((-1.0, 1.0, -1.0, 1.0));
        }
        let pad_x = 0.05 * (hi_x - lo_x).max(1e-9);
        let pad_y = 0.05 * (hi_y - lo_y).max(1e-9);
        let mut scene = Scene::new((lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y));
        scene.layers.push(layer);
        scene
    }
}
