//! Planar Newton diagrams as SVG.
//!
//! Γ₊ is shaded, vertices are filled and labelled, compact edges are solid,
//! essential half-lines are dashed and rejected half-lines are thin. All
//! coordinates are integers, so equal inputs give equal bytes.

use std::fmt::Write as _;

use crate::commands::FacesPayload;

const UNIT: i64 = 40;
const LEFT: i64 = 56;
const TOP: i64 = 36;
const RIGHT: i64 = 44;
const BOTTOM: i64 = 76;

struct Frame {
    xmax: i64,
    ymax: i64,
}

impl Frame {
    fn x(&self, x: i64) -> i64 {
        LEFT + UNIT * x
    }

    fn y(&self, y: i64) -> i64 {
        TOP + UNIT * (self.ymax - y)
    }

    fn at(&self, p: (i64, i64)) -> String {
        format!("{},{}", self.x(p.0), self.y(p.1))
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn xy(p: &[i64]) -> (i64, i64) {
    (p[0], p[1])
}

/// Renders the diagram of a two-variable polynomial.
pub fn render_svg(p: &FacesPayload) -> String {
    let xmax = p.support.iter().map(|q| q[0]).max().unwrap_or(0) + 1;
    let ymax = p.support.iter().map(|q| q[1]).max().unwrap_or(0) + 2;
    let fr = Frame {
        xmax: xmax.max(3),
        ymax: ymax.max(3),
    };
    let caption = format!("f = {}", p.polynomial);
    let width = (LEFT + UNIT * fr.xmax + RIGHT).max(LEFT + 8 * caption.chars().count() as i64 + RIGHT);
    let height = TOP + UNIT * fr.ymax + BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="serif" font-size="14">"#,
        w = width,
        h = height
    );
    let _ = writeln!(s, "<title>Newton diagram of {}</title>", escape(&p.polynomial));
    s.push_str(concat!(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"8\" ",
        "markerHeight=\"8\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#000\"/></marker></defs>\n"
    ));

    let vertices: Vec<(i64, i64)> = p.vertices.iter().map(|v| xy(v)).collect();
    if let (Some(&first), Some(&last)) = (vertices.first(), vertices.last()) {
        let mut region = vec![(first.0, fr.ymax)];
        region.extend(vertices.iter().copied());
        region.push((fr.xmax, last.1));
        region.push((fr.xmax, fr.ymax));
        let pts: Vec<String> = region.into_iter().map(|q| fr.at(q)).collect();
        let _ = writeln!(s, r##"<polygon points="{}" fill="#dbe5f1" stroke="none"/>"##, pts.join(" "));
    }

    for x in 0..=fr.xmax {
        for y in 0..=fr.ymax {
            let _ = writeln!(s, r##"<circle cx="{}" cy="{}" r="1.5" fill="#aaa"/>"##, fr.x(x), fr.y(y));
        }
    }

    let (ox, oy) = (fr.x(0), fr.y(0));
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000" marker-end="url(#arrow)"/>"##,
        ox,
        oy,
        fr.x(fr.xmax) + UNIT / 2,
        oy
    );
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000" marker-end="url(#arrow)"/>"##,
        ox,
        oy,
        ox,
        fr.y(fr.ymax) - UNIT / 2 + 12
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">ξ₁</text>"#, fr.x(fr.xmax) + UNIT / 2 - 8, oy + 22);
    let _ = writeln!(s, r#"<text x="{}" y="{}">ξ₂</text>"#, ox - 30, fr.y(fr.ymax) - UNIT / 2 + 20);
    for x in 1..=fr.xmax {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, fr.x(x), oy + 16, x);
    }
    for y in 1..=fr.ymax {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#, ox - 6, fr.y(y) + 4, y);
    }

    let ray = |face: &mixed_newton::newton::Face| -> Option<((i64, i64), (i64, i64))> {
        let start = xy(face.vertices.first()?);
        let i = face.direction.iter().next()?;
        let end = if i == 0 { (fr.xmax, start.1) } else { (start.0, fr.ymax) };
        Some((start, end))
    };
    for face in &p.rejected_noncompact {
        if let Some((a, b)) = ray(face) {
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#555" stroke-width="1.5"/>"##,
                fr.x(a.0),
                fr.y(a.1),
                fr.x(b.0),
                fr.y(b.1)
            );
        }
    }
    for face in &p.essential_noncompact {
        if let Some((a, b)) = ray(face) {
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#b03a2e" stroke-width="2.5" stroke-dasharray="8,5"/>"##,
                fr.x(a.0),
                fr.y(a.1),
                fr.x(b.0),
                fr.y(b.1)
            );
        }
    }
    for face in p.compact_faces.iter().filter(|f| f.dim == 1) {
        let (a, b) = (xy(&face.vertices[0]), xy(&face.vertices[face.vertices.len() - 1]));
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#1f4e79" stroke-width="3"/>"##,
            fr.x(a.0),
            fr.y(a.1),
            fr.x(b.0),
            fr.y(b.1)
        );
    }

    for q in p.support.iter().filter(|q| !p.vertices.contains(q)) {
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="3.5" fill="#fff" stroke="#000"/>"##,
            fr.x(q[0]),
            fr.y(q[1])
        );
    }
    for &(x, y) in &vertices {
        let _ = writeln!(s, r##"<circle cx="{}" cy="{}" r="5" fill="#1f4e79"/>"##, fr.x(x), fr.y(y));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">({},{})</text>"#, fr.x(x) + 8, fr.y(y) - 8, x, y);
    }

    let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, LEFT, height - 20, escape(&caption));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::faces_payload;
    use mixed_newton::MixedPolynomial;

    fn svg(text: &str) -> String {
        let f = MixedPolynomial::parse(text, 2).unwrap();
        render_svg(&faces_payload(&f).unwrap().0)
    }

    #[test]
    fn diagram_elements() {
        let s = svg("z1^2*z2^2*~z2 + z1*~z1^2*z2^2 + z1^6");
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches(r##"fill="#1f4e79"/>"##).count(), 3);
        assert_eq!(s.matches(r##"stroke="#1f4e79" stroke-width="3""##).count(), 2);
        assert_eq!(s.matches("stroke-dasharray").count(), 1);
        assert!(s.contains("ξ₁") && s.contains("ξ₂"));
        assert!(s.contains("<polygon"));
    }

    #[test]
    fn interior_points_are_hollow() {
        let s = svg("z1^2 + z1*z2 + z2^2 + z1^2*z2^2");
        assert_eq!(s.matches(r##"fill="#fff""##).count(), 2);
    }

    #[test]
    fn text_is_escaped() {
        assert_eq!(escape("a<b&c>"), "a&lt;b&amp;c&gt;");
    }
}
