use std::fmt::Write;

use hilbert_core::directions::circle;
use hilbert_core::{ConvexBody, Point};

/// A static picture of a planar body with optional overlays.
pub struct Picture {
    paths: Vec<(Vec<Point>, &'static str)>,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Picture {
    pub fn new(body: &ConvexBody) -> hilbert_core::Result<Self> {
        let c = body.interior_point();
        let outline = circle(512)
            .iter()
            .map(|u| body.boundary_point(c, u))
            .collect::<hilbert_core::Result<Vec<_>>>()?;
        let (lo, hi) = body.bounding_box();
        let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
        Ok(Picture {
            paths: vec![(outline, "#222")],
            lo: [lo[0] - pad, lo[1] - pad],
            hi: [hi[0] + pad, hi[1] + pad],
        })
    }

    pub fn add(&mut self, pts: Vec<Point>, color: &'static str) {
        self.paths.push((pts, color));
    }

    pub fn render(&self) -> String {
        let size = 512.0;
        let scale = size / (self.hi[0] - self.lo[0]).max(self.hi[1] - self.lo[1]);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
        );
        for (pts, color) in &self.paths {
            let mut d = String::new();
            for (k, p) in pts.iter().enumerate() {
                let x = (p[0] - self.lo[0]) * scale;
                let y = size - (p[1] - self.lo[1]) * scale;
                let _ = write!(d, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
            }
            let _ = writeln!(
                s,
                "<path d=\"{d}Z\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
