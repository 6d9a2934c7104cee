//! ASCII and SVG drawings of a constellation, y pointing up.

use std::fmt::Write as _;

use gridpat::PointSet;

pub const CELL: i64 = 20;
pub const FILLED: char = '●';
pub const EMPTY: char = '·';

/// One text row per y from top to bottom over the bounding box.
pub fn ascii(ps: &PointSet) -> String {
    let Some((lo, hi)) = ps.bounding_box() else {
        return String::new();
    };
    let mut s = String::new();
    for y in (lo.y..=hi.y).rev() {
        for x in lo.x..=hi.x {
            let filled = ps.contains(gridpat::Point::new(x, y));
            s.push(if filled { FILLED } else { EMPTY });
        }
        s.push('\n');
    }
    s
}

pub fn svg(ps: &PointSet) -> String {
    let (cols, rows, lo, hi) = match ps.bounding_box() {
        Some((lo, hi)) => (hi.x - lo.x + 1, hi.y - lo.y + 1, lo, hi),
        None => (0, 0, Default::default(), Default::default()),
    };
    let (w, h) = (cols * CELL, rows * CELL);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    s.push_str("<g stroke=\"#bbbbbb\" stroke-width=\"1\">\n");
    for c in 0..=cols {
        writeln!(s, r#"<line x1="{0}" y1="0" x2="{0}" y2="{h}"/>"#, c * CELL).unwrap();
    }
    for r in 0..=rows {
        writeln!(s, r#"<line x1="0" y1="{0}" x2="{w}" y2="{0}"/>"#, r * CELL).unwrap();
    }
    s.push_str("</g>\n<g fill=\"black\">\n");
    for p in ps.iter() {
        let cx = (p.x - lo.x) * CELL + CELL / 2;
        let cy = (hi.y - p.y) * CELL + CELL / 2;
        writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="{}"/>"#, CELL * 7 / 20).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}
