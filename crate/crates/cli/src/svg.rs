//! Braid diagrams as standalone SVG: vertical strands 100px apart, one row
//! per letter, the under-strand broken by a 12px gap, signs as +/− glyphs.

use std::fmt::Write as _;

use linkinf::knots::BraidWord;

const SPACING: f64 = 100.0;
const ROW: f64 = 60.0;
const MARGIN: f64 = 40.0;
const GAP: f64 = 12.0;

fn x(strand: usize) -> f64 {
    MARGIN + SPACING * strand as f64
}

fn line(out: &mut String, pts: &[(f64, f64)]) {
    let p: Vec<String> = pts.iter().map(|(a, b)| format!("{a:.1},{b:.1}")).collect();
    let _ = writeln!(out, r#"  <polyline points="{}" fill="none" stroke="black" stroke-width="3"/>"#, p.join(" "));
}

/// Positive letters draw the strand coming from the left over the other one.
pub fn braid_svg(w: &BraidWord) -> String {
    let n = w.strands.max(1);
    let width = 2.0 * MARGIN + SPACING * (n - 1) as f64 + 40.0;
    let height = 2.0 * MARGIN + ROW * w.letters.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, "  <title>{}</title>", if w.letters.is_empty() { "trivial braid".to_string() } else { w.to_string() });
    let y0 = MARGIN;
    if w.letters.is_empty() {
        for s in 0..n {
            line(&mut out, &[(x(s), y0), (x(s), y0 + ROW)]);
        }
    }
    for (row, &(i, sign)) in w.letters.iter().enumerate() {
        let (top, bot) = (y0 + ROW * row as f64, y0 + ROW * (row + 1) as f64);
        let (l, r) = (i - 1, i);
        for s in (0..n).filter(|&s| s != l && s != r) {
            line(&mut out, &[(x(s), top), (x(s), bot)]);
        }
        let down_right = [(x(l), top), (x(r), bot)];
        let down_left = [(x(r), top), (x(l), bot)];
        let (over, under) = if sign > 0 { (down_right, down_left) } else { (down_left, down_right) };
        line(&mut out, &over);
        let (dx, dy) = (under[1].0 - under[0].0, under[1].1 - under[0].1);
        let t = 0.5 * GAP / (dx * dx + dy * dy).sqrt();
        let at = |u: f64| (under[0].0 + u * dx, under[0].1 + u * dy);
        line(&mut out, &[under[0], at(0.5 - t)]);
        line(&mut out, &[at(0.5 + t), under[1]]);
        let glyph = if sign > 0 { "+" } else { "−" };
        let _ = writeln!(
            out,
            r#"  <text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="18" text-anchor="middle">{glyph}</text>"#,
            x(r) + 20.0,
            0.5 * (top + bot) + 6.0
        );
    }
    out.push_str("</svg>\n");
    out
}
