//! Deterministic SVG: fixed 1000×1000 view box, coordinates with six
//! decimals, θ to the right and r upwards.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::partition::{Level, Partition};

pub const VIEW: f64 = 1000.0;
pub const MAX_BOXES: u128 = 100_000;

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {v} {v}\" width=\"{v}\" height=\"{v}\">\n<rect x=\"0\" y=\"0\" width=\"{v}\" height=\"{v}\" fill=\"white\" stroke=\"black\"/>\n",
        v = VIEW as u32
    )
}

/// Rectangles [θ₀,θ₁]×[r₀,r₁] in torus coordinates.
pub fn svg_boxes(boxes: &[[f64; 4]], fill: &str) -> String {
    let mut s = header();
    for b in boxes {
        let _ = writeln!(
            s,
            "<rect x=\"{:.6}\" y=\"{:.6}\" width=\"{:.6}\" height=\"{:.6}\" fill=\"{fill}\" stroke=\"none\"/>",
            b[0] * VIEW,
            (1.0 - b[3]) * VIEW,
            (b[1] - b[0]) * VIEW,
            (b[3] - b[2]) * VIEW
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Points (θ, r) as small circles.
pub fn svg_points(points: &[(f64, f64)], fill: &str) -> String {
    let mut s = header();
    for &(t, r) in points {
        let _ = writeln!(s, "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"1.500000\" fill=\"{fill}\"/>", t * VIEW, (1.0 - r) * VIEW);
    }
    s.push_str("</svg>\n");
    s
}

/// All boxes of a torus level; η̂ draws its pieces' strips once per base
/// element since the fiber is not shown.
pub fn render_partition(part: &Partition, level: Level) -> Result<String> {
    let base = if level == Level::HatEta { Level::TildeEta } else { level };
    let count = part.cell_count(base);
    if count > MAX_BOXES {
        return Err(Error::InvalidArgument(format!("{count} boxes exceed the render limit {MAX_BOXES}")));
    }
    let boxes: Vec<[f64; 4]> = part.cells(base).map(|(_, b)| b.to_f64()).collect();
    Ok(svg_boxes(&boxes, "steelblue"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_at_k2_has_3600_rectangles() {
        let part = Partition::from_parts(1, 2, 1).unwrap();
        let svg = render_partition(&part, Level::Eta).unwrap();
        assert_eq!(svg.matches("<rect").count(), 3601);
        assert_eq!(svg, render_partition(&part, Level::Eta).unwrap());
    }

    #[test]
    fn zeta_exceeds_limit() {
        let part = Partition::from_parts(1, 2, 1).unwrap();
        assert!(render_partition(&part, Level::Zeta).is_err());
    }
}
