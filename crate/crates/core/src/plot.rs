//! SVG scatter plot of a 2-D embedding: domain-1 items as dots, domain-2
//! items as green text labels.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Embedding;

const CANVAS: f64 = 1000.0;
const MARGIN: f64 = 0.05 * CANVAS;

/// Optional display names per domain. Missing domain-2 names default to
/// `t{index}`; domain-1 dots are drawn unlabeled without names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub domain1: Option<Vec<String>>,
    pub domain2: Option<Vec<String>>,
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Uniform scale preserving aspect ratio, centered in the canvas.
struct Viewport {
    scale: f64,
    cx: f64,
    cy: f64,
}

impl Viewport {
    fn fit(embedding: &Embedding) -> Self {
        let c = embedding.coords();
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for row in c.rows() {
            x0 = x0.min(row[0]);
            x1 = x1.max(row[0]);
            y0 = y0.min(row[1]);
            y1 = y1.max(row[1]);
        }
        let span = (x1 - x0).max(y1 - y0);
        let scale = if span > 0.0 {
            (CANVAS - 2.0 * MARGIN) / span
        } else {
            1.0
        };
        Viewport {
            scale,
            cx: 0.5 * (x0 + x1),
            cy: 0.5 * (y0 + y1),
        }
    }

    /// SVG y grows downward, so the vertical axis is flipped.
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            CANVAS / 2.0 + (x - self.cx) * self.scale,
            CANVAS / 2.0 - (y - self.cy) * self.scale,
        )
    }
}

pub fn render_scatter_svg(embedding: &Embedding, labels: &Labels) -> Result<String> {
    if embedding.dim() != 2 {
        return Err(Error::UnsupportedDimension(embedding.dim()));
    }
    let check = |names: &Option<Vec<String>>, n: usize, which: &str| match names {
        Some(v) if v.len() != n => Err(Error::DimensionMismatch(format!(
            "{} {which} labels for {n} items",
            v.len()
        ))),
        _ => Ok(()),
    };
    check(&labels.domain1, embedding.n1(), "domain-1")?;
    check(&labels.domain2, embedding.n2(), "domain-2")?;

    let vp = Viewport::fit(embedding);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let _ = writeln!(out, r##"<g fill="#1f4e99" fill-opacity="0.7">"##);
    for (i, row) in embedding.domain1().rows().into_iter().enumerate() {
        let (x, y) = vp.map(row[0], row[1]);
        match &labels.domain1 {
            Some(names) => {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x:.3}" cy="{y:.3}" r="4"><title>{}</title></circle>"#,
                    escape(&names[i])
                );
            }
            None => {
                let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4"/>"#);
            }
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g fill="green" font-family="sans-serif" font-size="12" text-anchor="middle">"#
    );
    for (j, row) in embedding.domain2().rows().into_iter().enumerate() {
        let (x, y) = vp.map(row[0], row[1]);
        let name = match &labels.domain2 {
            Some(names) => escape(&names[j]),
            None => format!("t{j}"),
        };
        let _ = writeln!(out, r#"<text x="{x:.3}" y="{y:.3}">{name}</text>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

pub fn emit_scatter_svg(embedding: &Embedding, labels: &Labels, path: &Path) -> Result<()> {
    let svg = render_scatter_svg(embedding, labels)?;
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
