//! Scatter-matrix rendering of an embedding as SVG 1.1.
//!
//! Panel `(r, c)` of the `d × d` grid plots embedding column `c` against
//! column `r`. Off-diagonal panels hold one circle per sample; diagonal
//! panels hold the axis label, or a strip plot when `d == 1`. Points are
//! coloured by class through a fixed palette.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::error::{AimeError, Result};
use crate::matrix::Matrix;

pub const PANEL: f64 = 160.0;
pub const MARGIN: f64 = 24.0;
pub const LEGEND_WIDTH: f64 = 110.0;
const POINT_RADIUS: f64 = 2.5;

/// Colour-blind-safe base palette; classes beyond it cycle hue via the
/// golden angle so the mapping stays deterministic.
pub const PALETTE: [&str; 8] = [
    "#0072b2", "#e69f00", "#009e73", "#cc79a7", "#56b4e9", "#d55e00", "#f0e442", "#000000",
];

/// Fill colour for the class at `rank` in the sorted list of distinct labels.
pub fn class_color(rank: usize) -> String {
    match PALETTE.get(rank) {
        Some(c) => (*c).to_string(),
        None => {
            let hue = (rank as f64 * 137.507_764) % 360.0;
            format!("hsl({hue:.1},65%,45%)")
        }
    }
}

fn column_range(m: &Matrix, c: usize) -> (f64, f64) {
    let col = m.column(c);
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Maps `v` from `[lo, hi]` into `[a, b]`; a degenerate range maps to the middle.
fn scale(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    if hi - lo > 0.0 {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

pub fn scatter_matrix_svg(embedding: &Matrix, labels: &[usize], axis_names: Option<&[String]>) -> Result<String> {
    let (n, d) = embedding.shape();
    if labels.len() != n {
        return Err(AimeError::shape("scatter_matrix_svg", (n, d), (labels.len(), 1)));
    }
    if n == 0 || d == 0 {
        return Err(AimeError::InsufficientData("nothing to plot".into()));
    }
    if embedding.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(AimeError::Data("embedding contains non-finite values".into()));
    }
    if let Some(names) = axis_names {
        if names.len() != d {
            return Err(AimeError::shape("scatter_matrix_svg axis names", (n, d), (1, names.len())));
        }
    }

    let classes: Vec<usize> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let color_of = |label: usize| class_color(classes.binary_search(&label).unwrap_or(0));
    let ranges: Vec<(f64, f64)> = (0..d).map(|c| column_range(embedding, c)).collect();
    let name = |c: usize| match axis_names {
        Some(names) => escape(&names[c]),
        None => format!("dim {}", c + 1),
    };

    let grid = d as f64 * PANEL;
    let width = 2.0 * MARGIN + grid + LEGEND_WIDTH;
    let height = (2.0 * MARGIN + grid).max(2.0 * MARGIN + 20.0 * classes.len() as f64);
    let inset = 8.0;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);

    for r in 0..d {
        for c in 0..d {
            let x0 = MARGIN + c as f64 * PANEL;
            let y0 = MARGIN + r as f64 * PANEL;
            let _ = writeln!(s, r#"<g class="panel" data-row="{r}" data-col="{c}">"#);
            let _ = writeln!(
                s,
                r##"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.2}" height="{PANEL:.2}" fill="none" stroke="#999999"/>"##
            );
            if r == c && d > 1 {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
                    x0 + PANEL / 2.0,
                    y0 + PANEL / 2.0,
                    name(c)
                );
            } else {
                let (xs, ys) = (x0 + inset, x0 + PANEL - inset);
                let (yb, yt) = (y0 + PANEL - inset, y0 + inset);
                for (i, &label) in labels.iter().enumerate() {
                    let px = scale(embedding[(i, c)], ranges[c], xs, ys);
                    // a strip plot separates classes vertically
                    let py = if d == 1 {
                        let rank = classes.binary_search(&label).unwrap_or(0);
                        scale((rank + 1) as f64, (0.0, classes.len() as f64 + 1.0), yb, yt)
                    } else {
                        scale(embedding[(i, r)], ranges[r], yb, yt)
                    };
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{px:.2}" cy="{py:.2}" r="{POINT_RADIUS}" fill="{}" fill-opacity="0.8"/>"#,
                        color_of(label)
                    );
                }
                if d == 1 {
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
                        x0 + PANEL / 2.0,
                        y0 + PANEL + 16.0,
                        name(0)
                    );
                }
            }
            s.push_str("</g>\n");
        }
    }

    let lx = 2.0 * MARGIN + grid;
    s.push_str("<g class=\"legend\">\n");
    for (k, class) in classes.iter().enumerate() {
        let ly = MARGIN + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{ly:.2}" width="12" height="12" fill="{}"/>"#,
            class_color(k)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">class {class}</text>"#,
            lx + 18.0,
            ly + 11.0
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn circle_fills(svg: &str) -> Vec<&str> {
        svg.lines()
            .filter(|l| l.starts_with("<circle"))
            .map(|l| {
                let start = l.find("fill=\"").unwrap() + 6;
                let end = start + l[start..].find('"').unwrap();
                &l[start..end]
            })
            .collect()
    }

    #[test]
    fn point_count_per_panel() {
        let n = 40;
        let d = 3;
        let e = Matrix::from_fn(n, d, |i, j| ((i * 7 + j * 3) % 11) as f64);
        let labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let svg = scatter_matrix_svg(&e, &labels, None).unwrap();
        assert_eq!(circle_fills(&svg).len(), n * d * (d - 1));
        let fills: HashSet<&str> = circle_fills(&svg).into_iter().collect();
        assert_eq!(fills.len(), 4);
        assert_eq!(svg.matches("<g class=\"panel\"").count(), d * d);
        assert_eq!(svg.matches("dim 2").count(), 1);
    }

    #[test]
    fn single_dimension_strip() {
        let e = Matrix::from_fn(10, 1, |i, _| i as f64);
        let labels = vec![5, 5, 9, 9, 9, 5, 9, 5, 5, 9];
        let svg = scatter_matrix_svg(&e, &labels, None).unwrap();
        let fills = circle_fills(&svg);
        assert_eq!(fills.len(), 10);
        assert_eq!(fills[0], PALETTE[0]);
        assert_eq!(fills[2], PALETTE[1]);
    }

    #[test]
    fn deterministic_and_constant_columns() {
        let e = Matrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let labels = vec![0; 5];
        let a = scatter_matrix_svg(&e, &labels, None).unwrap();
        assert_eq!(a, scatter_matrix_svg(&e, &labels, None).unwrap());
        assert!(a.contains(&format!("cx=\"{:.2}\"", MARGIN + 0.5 * PANEL)));
    }

    #[test]
    fn palette_extends_deterministically() {
        let colors: HashSet<String> = (0..20).map(class_color).collect();
        assert_eq!(colors.len(), 20);
        assert_eq!(class_color(12), class_color(12));
    }

    #[test]
    fn rejects_bad_input() {
        let e = Matrix::zeros(3, 2);
        assert!(scatter_matrix_svg(&e, &[0, 1], None).is_err());
        let mut bad = e.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(scatter_matrix_svg(&bad, &[0, 1, 2], None).is_err());
        let names = vec!["a".to_string()];
        assert!(scatter_matrix_svg(&e, &[0, 1, 2], Some(&names)).is_err());
    }

    #[test]
    fn axis_names_are_escaped() {
        let e = Matrix::from_fn(4, 2, |i, j| (i + j) as f64);
        let names = vec!["a<b".to_string(), "c&d".to_string()];
        let svg = scatter_matrix_svg(&e, &[0, 1, 0, 1], Some(&names)).unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("c&amp;d"));
    }
}
