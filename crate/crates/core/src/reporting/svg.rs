//! Just enough SVG for line and stacked-bar charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct Chart {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    legend: Vec<(String, &'static str, bool)>,
    title: String,
}

impl Chart {
    /// Degenerate ranges are widened so every point maps inside the plot.
    pub fn new(title: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 1.0, a + 1.0) };
        Chart {
            x: widen(x),
            y: widen(y),
            body: String::new(),
            legend: Vec::new(),
            title: title.to_string(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    pub fn polyline(&mut self, label: &str, pts: &[(f64, f64)], stroke: &'static str, dashed: bool) {
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, self.px(*x), self.py(*y));
        }
        let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>"
        );
        if !self.legend.iter().any(|(l, _, _)| l == label) {
            self.legend.push((label.to_string(), stroke, dashed));
        }
    }

    pub fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &'static str) {
        let (a, b) = (self.px(x0.min(x1)), self.px(x0.max(x1)));
        let (c, d) = (self.py(y0.max(y1)), self.py(y0.min(y1)));
        let _ = writeln!(
            self.body,
            "<rect x=\"{a:.2}\" y=\"{c:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
            b - a,
            d - c
        );
    }

    pub fn legend_entry(&mut self, label: &str, fill: &'static str) {
        if !self.legend.iter().any(|(l, _, _)| l == label) {
            self.legend.push((label.to_string(), fill, false));
        }
    }

    pub fn x_label_at(&mut self, x: f64, text: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            self.px(x),
            HEIGHT - BOTTOM + 15.0,
            esc(text)
        );
    }

    pub fn finish(self, x_label: &str, y_label: &str, x_ticks: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{LEFT}\" y=\"22\" font-size=\"14\">{}</text>",
            esc(&self.title)
        );
        let (x0, x1) = (self.px(self.x.0), self.px(self.x.1));
        let (y0, y1) = (self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(
            s,
            "<path d=\"M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}\" fill=\"none\" stroke=\"black\"/>"
        );
        for i in 0..=4 {
            let v = self.y.0 + (self.y.1 - self.y.0) * i as f64 / 4.0;
            let py = self.py(v);
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
                LEFT - 6.0,
                py + 4.0,
                tick(v)
            );
            if x_ticks {
                let v = self.x.0 + (self.x.1 - self.x.0) * i as f64 / 4.0;
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                    self.px(v),
                    HEIGHT - BOTTOM + 15.0,
                    tick(v)
                );
            }
        }
        if self.y.0 < 0.0 && self.y.1 > 0.0 {
            let z = self.py(0.0);
            let _ = writeln!(s, "<path d=\"M{x0:.2},{z:.2} L{x1:.2},{z:.2}\" stroke=\"#999\"/>");
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            esc(x_label)
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            esc(y_label)
        );
        s.push_str(&self.body);
        for (i, (label, c, dashed)) in self.legend.iter().enumerate() {
            let ly = TOP + 16.0 * i as f64;
            let lx = WIDTH - RIGHT + 12.0;
            let dash = if *dashed { " stroke-dasharray=\"4,3\"" } else { "" };
            let _ = writeln!(
                s,
                "<path d=\"M{lx:.2},{ly:.2} L{:.2},{ly:.2}\" stroke=\"{c}\" stroke-width=\"6\"{dash}/>",
                lx + 18.0
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>",
                lx + 24.0,
                ly + 4.0,
                esc(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    let v = if v.abs() < 0.05 { 0.0 } else { v };
    let a = v.abs();
    if a >= 1e9 {
        format!("{:.1}G", v / 1e9)
    } else if a >= 1e6 {
        format!("{:.1}M", v / 1e6)
    } else if a >= 1e3 {
        format!("{:.1}k", v / 1e3)
    } else {
        format!("{v:.1}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let mut c = Chart::new("t <1>", (0.0, 1.0), (0.0, 0.0));
        c.polyline("a", &[(0.0, 0.0), (1.0, 1.0)], color(0), true);
        c.rect(0.0, 0.0, 0.5, 0.5, color(1));
        let s = c.finish("x", "y", true);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("t &lt;1&gt;"));
        assert!(s.contains("stroke-dasharray"));
        assert!(!s.contains("NaN"));
    }
}
