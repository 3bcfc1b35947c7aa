//! Deterministic SVG scatter of a 2-D clustering: points as circles colored
//! by cluster, centers as black crosses.

use std::fmt::Write;

use mflp::{DemandSet, Mat};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 30.0;
const POINT_RADIUS: f64 = 4.0;
const CROSS_HALF: f64 = 7.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("scatter plots need 2-D data, got d = {0}")]
    NotPlanar(usize),
    #[error("{labels} labels for {points} points")]
    LabelCount { labels: usize, points: usize },
}

/// Renders `data` colored by `labels` with `centers` overlaid.
pub fn render(data: &DemandSet, labels: &[usize], centers: &Mat) -> Result<String, SvgError> {
    if data.d() != 2 {
        return Err(SvgError::NotPlanar(data.d()));
    }
    if centers.cols() != 2 {
        return Err(SvgError::NotPlanar(centers.cols()));
    }
    if labels.len() != data.n() {
        return Err(SvgError::LabelCount {
            labels: labels.len(),
            points: data.n(),
        });
    }

    let all = data.iter().chain(centers.row_iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0);
    let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
    // y grows upward in data space, downward on screen
    let sx = |x: f64| MARGIN + (x - x0) * scale;
    let sy = |y: f64| SIZE - MARGIN - (y - y0) * scale;

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    for (a, &l) in data.iter().zip(labels) {
        writeln!(
            out,
            "<circle class=\"point\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"{POINT_RADIUS}\" fill=\"{}\"/>",
            sx(a[0]),
            sy(a[1]),
            PALETTE[l % PALETTE.len()]
        )
        .unwrap();
    }
    for c in centers.row_iter() {
        let (x, y) = (sx(c[0]), sy(c[1]));
        let h = CROSS_HALF;
        writeln!(
            out,
            "<path class=\"center\" d=\"M{:.3} {:.3}L{:.3} {:.3}M{:.3} {:.3}L{:.3} {:.3}\" stroke=\"black\" stroke-width=\"2\"/>",
            x - h, y - h, x + h, y + h, x - h, y + h, x + h, y - h
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!("class=\"{class}\"")).count()
    }

    #[test]
    fn glyph_counts() {
        let data = DemandSet::from_rows(&[[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]]).unwrap();
        let centers = Mat::from_rows(&[[0.5, 0.0], [5.0, 5.0]]).unwrap();
        let svg = render(&data, &[0, 0, 1], &centers).unwrap();
        assert_eq!(count(&svg, "point"), 3);
        assert_eq!(count(&svg, "center"), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn lowest_point_is_drawn_at_the_bottom() {
        let data = DemandSet::from_rows(&[[0.0, 0.0], [0.0, 10.0]]).unwrap();
        let centers = Mat::from_rows(&[[0.0, 5.0]]).unwrap();
        let svg = render(&data, &[0, 0], &centers).unwrap();
        assert!(svg.contains("cy=\"570.000\""));
        assert!(svg.contains("cy=\"30.000\""));
    }

    #[test]
    fn single_location_does_not_divide_by_zero() {
        let data = DemandSet::from_rows(&[[2.0, 2.0]]).unwrap();
        let centers = Mat::from_rows(&[[2.0, 2.0]]).unwrap();
        let svg = render(&data, &[0], &centers).unwrap();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn refuses_other_dimensions() {
        let data = DemandSet::from_rows(&[[0.0, 0.0, 0.0]]).unwrap();
        let centers = Mat::from_rows(&[[0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(render(&data, &[0], &centers), Err(SvgError::NotPlanar(3)));
        let flat = DemandSet::from_rows(&[[0.0, 0.0]]).unwrap();
        let c2 = Mat::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(matches!(render(&flat, &[0, 0], &c2), Err(SvgError::LabelCount { .. })));
    }
}
