//! Static SVG charts with a plain-text data sidecar.
//!
//! The sidecar has one `category<TAB>value` line per datum so results can be
//! checked without rendering. Values that are undefined (for example a ratio
//! with a zero denominator) are written as `undefined` and drawn as a labelled
//! gap rather than a bar.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Pie,
    Bar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    /// File stem, e.g. `popularity_raw`.
    pub name: String,
    pub title: String,
    pub kind: ChartKind,
    /// Appended to value labels, e.g. `%`.
    pub unit: String,
    pub data: Vec<(String, Option<f64>)>,
}

const PALETTE: [&str; 8] = [
    "#e07b39", "#f4b183", "#3b7dd8", "#9dc3e6", "#59a14f", "#b6d7a8", "#9e9e9e", "#c9a0dc",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn colour(i: usize, n: usize) -> &'static str {
    // The last pie slice is the remainder and is always grey.
    if i + 1 == n && n > 1 {
        PALETTE[6]
    } else {
        PALETTE[i % 6]
    }
}

impl Chart {
    pub fn svg_file_name(&self) -> String {
        format!("{}.svg", self.name)
    }

    pub fn data_file_name(&self) -> String {
        format!("{}.dat", self.name)
    }

    /// `category<TAB>value` lines; values use the shortest round-trip form.
    pub fn to_data(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.data {
            match v {
                Some(v) => writeln!(out, "{k}\t{v}").unwrap(),
                None => writeln!(out, "{k}\tundefined").unwrap(),
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();
        match self.kind {
            ChartKind::Pie => self.pie_body(&mut s),
            ChartKind::Bar => self.bar_body(&mut s),
        }
        s.push_str("</svg>\n");
        s
    }

    fn label(&self, v: Option<f64>) -> String {
        match v {
            Some(v) => format!("{v:.2}{}", self.unit),
            None => "undefined".into(),
        }
    }

    fn pie_body(&self, s: &mut String) {
        let (cx, cy, r) = (220.0, 225.0, 160.0);
        let total: f64 = self.data.iter().filter_map(|d| d.1).filter(|v| *v > 0.0).sum();
        let n = self.data.len();
        let mut angle = -std::f64::consts::FRAC_PI_2;
        for (i, (_, v)) in self.data.iter().enumerate() {
            let v = v.unwrap_or(0.0).max(0.0);
            if total <= 0.0 || v <= 0.0 {
                continue;
            }
            let frac = v / total;
            let fill = colour(i, n);
            if frac >= 1.0 - 1e-12 {
                writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="{r}" fill="{fill}" stroke="white"/>"#)
                    .unwrap();
                continue;
            }
            let end = angle + frac * std::f64::consts::TAU;
            let (x0, y0) = (cx + r * angle.cos(), cy + r * angle.sin());
            let (x1, y1) = (cx + r * end.cos(), cy + r * end.sin());
            let large = if frac > 0.5 { 1 } else { 0 };
            writeln!(
                s,
                r#"<path d="M {cx} {cy} L {x0:.3} {y0:.3} A {r} {r} 0 {large} 1 {x1:.3} {y1:.3} Z" fill="{fill}" stroke="white"/>"#
            )
            .unwrap();
            angle = end;
        }
        for (i, (k, v)) in self.data.iter().enumerate() {
            let y = 80.0 + 26.0 * i as f64;
            writeln!(
                s,
                r#"<rect x="410" y="{}" width="14" height="14" fill="{}"/><text x="432" y="{}" font-size="13">{} ({})</text>"#,
                y - 11.0,
                colour(i, n),
                y,
                escape(k),
                self.label(*v)
            )
            .unwrap();
        }
    }

    fn bar_body(&self, s: &mut String) {
        let (left, right, top, bottom) = (70.0, WIDTH - 30.0, 60.0, HEIGHT - 50.0);
        let max = self
            .data
            .iter()
            .filter_map(|d| d.1)
            .filter(|v| v.is_finite())
            .fold(0.0_f64, f64::max);
        let scale_max = if max > 0.0 { max * 1.15 } else { 1.0 };
        writeln!(
            s,
            r##"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="#333"/><line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="#333"/>"##
        )
        .unwrap();
        for t in 0..=4 {
            let v = scale_max * t as f64 / 4.0;
            let y = bottom - (bottom - top) * t as f64 / 4.0;
            writeln!(
                s,
                r##"<text x="{}" y="{:.3}" text-anchor="end" font-size="11" fill="#555">{:.2}</text>"##,
                left - 6.0,
                y + 4.0,
                v
            )
            .unwrap();
        }
        let n = self.data.len().max(1) as f64;
        let slot = (right - left) / n;
        let bar_w = slot * 0.6;
        for (i, (k, v)) in self.data.iter().enumerate() {
            let x = left + slot * i as f64 + (slot - bar_w) / 2.0;
            let mid = x + bar_w / 2.0;
            match v {
                Some(v) if v.is_finite() && *v >= 0.0 => {
                    let h = (bottom - top) * v / scale_max;
                    writeln!(
                        s,
                        r#"<rect x="{x:.3}" y="{:.3}" width="{bar_w:.3}" height="{h:.3}" fill="{}"/>"#,
                        bottom - h,
                        PALETTE[(2 * i) % 6]
                    )
                    .unwrap();
                    writeln!(
                        s,
                        r#"<text x="{mid:.3}" y="{:.3}" text-anchor="middle" font-size="12">{}</text>"#,
                        bottom - h - 6.0,
                        self.label(Some(*v))
                    )
                    .unwrap();
                }
                _ => {
                    writeln!(
                        s,
                        r##"<text x="{mid:.3}" y="{:.3}" text-anchor="middle" font-size="12" fill="#a00">undefined</text>"##,
                        bottom - 8.0
                    )
                    .unwrap();
                }
            }
            writeln!(
                s,
                r#"<text x="{mid:.3}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
                bottom + 20.0,
                escape(k)
            )
            .unwrap();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pie() -> Chart {
        Chart {
            name: "p".into(),
            title: "A & B".into(),
            kind: ChartKind::Pie,
            unit: "%".into(),
            data: vec![("a".into(), Some(25.0)), ("b".into(), Some(75.0))],
        }
    }

    #[test]
    fn data_sidecar_round_trips_values() {
        let mut c = pie();
        c.data.push(("c".into(), None));
        let d = c.to_data();
        assert_eq!(d, "a\t25\nb\t75\nc\tundefined\n");
        let parsed: f64 = d.lines().next().unwrap().split('\t').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed, 25.0);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = pie().to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("A &amp; B"));
        assert_eq!(svg.matches("<path").count(), 2);

        let bar = Chart {
            kind: ChartKind::Bar,
            data: vec![("x".into(), Some(1.5)), ("y".into(), None)],
            ..pie()
        };
        let svg = bar.to_svg();
        assert!(svg.contains("undefined"));
        assert!(svg.contains("1.50%"));
    }

    #[test]
    fn single_slice_is_a_full_circle() {
        let c = Chart {
            data: vec![("all".into(), Some(100.0))],
            ..pie()
        };
        assert!(c.to_svg().contains("<circle"));
    }
}
