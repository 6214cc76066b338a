//! Self-contained SVG rendering: a log-scale convergence line plot, a
//! matrix heatmap with a fixed monotone colormap, and a labeled scatter.
//! Everything is plain string building, so identical inputs give identical
//! bytes.

use nalgebra::DMatrix;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn svg_header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<rect width=\"{width}\" height=\"{height}\" \
         fill=\"white\"/>\n"
    )
}

/// Line plot of positive values on a log10 y-axis. Non-positive or
/// non-finite values are skipped.
pub fn line_plot_log(points: &[(f64, f64)], title: &str, y_label: &str) -> String {
    let mut svg = svg_header(WIDTH, HEIGHT);
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    ));
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| y.is_finite() && *y > 0.0)
        .map(|&(x, y)| (x, y.log10()))
        .collect();
    if usable.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
             font-size=\"12\">no positive values to plot</text>\n</svg>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        return svg;
    }
    let (x_min, x_max) = bounds(usable.iter().map(|p| p.0));
    let (y_min, y_max) = bounds(usable.iter().map(|p| p.1));
    let x_span = (x_max - x_min).max(1e-9);
    let y_span = (y_max - y_min).max(1e-9);
    let px = |x: f64| MARGIN + (x - x_min) / x_span * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y_min) / y_span * (HEIGHT - 2.0 * MARGIN);

    // Axes with tick labels.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    ));
    for k in 0..=4 {
        let fx = x_min + x_span * k as f64 / 4.0;
        let fy = y_min + y_span * k as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
             font-size=\"10\">{:.0}</text>\n",
            px(fx),
            HEIGHT - MARGIN + 16.0,
            fx
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" \
             font-size=\"10\">1e{:.1}</text>\n",
            MARGIN - 6.0,
            py(fy) + 3.0,
            fy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"11\">iteration</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"11\" transform=\"rotate(-90 14 {})\">{y_label}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));

    let path: Vec<String> = usable
        .iter()
        .map(|&(x, y)| format!("{},{}", px(x), py(y)))
        .collect();
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        path.join(" ")
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Convergence trace plot with fixed labels, so commands and tests render
/// byte-identical output from the same (iteration, delta) points.
pub fn convergence_svg(points: &[(f64, f64)]) -> String {
    line_plot_log(points, "projective distance between iterates", "hilbert delta")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Fixed monotone colormap: light to dark blue.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0))
}

/// Grid heatmap. Matrices above 256 per side are averaged into blocks so
/// output size stays bounded.
pub fn heatmap(values: &DMatrix<f64>, title: &str) -> String {
    const MAX_CELLS: usize = 256;
    let (rows, cols) = values.shape();
    let (block_r, block_c) = (rows.div_ceil(MAX_CELLS), cols.div_ceil(MAX_CELLS));
    let shown_r = rows.div_ceil(block_r);
    let shown_c = cols.div_ceil(block_c);

    let mut grid = DMatrix::zeros(shown_r, shown_c);
    for i in 0..shown_r {
        for j in 0..shown_c {
            let mut sum = 0.0;
            let mut count = 0.0;
            for r in (i * block_r)..((i + 1) * block_r).min(rows) {
                for c in (j * block_c)..((j + 1) * block_c).min(cols) {
                    sum += values[(r, c)];
                    count += 1.0;
                }
            }
            grid[(i, j)] = sum / count;
        }
    }
    let (lo, hi) = bounds(grid.iter().copied());
    let span = (hi - lo).max(1e-300);

    let side = 520.0;
    let cell_w = side / shown_c as f64;
    let cell_h = side / shown_r as f64;
    let mut svg = svg_header(side + 2.0 * MARGIN, side + 2.0 * MARGIN);
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">{title}</text>\n",
        (side + 2.0 * MARGIN) / 2.0
    ));
    for i in 0..shown_r {
        for j in 0..shown_c {
            let t = (grid[(i, j)] - lo) / span;
            svg.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                MARGIN + j as f64 * cell_w,
                MARGIN + i as f64 * cell_h,
                cell_w,
                cell_h,
                color(t)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Scatter of 2-D points; class indices pick colors from a fixed palette.
pub fn scatter(points: &[(f64, f64)], classes: &[usize], title: &str) -> String {
    let mut svg = svg_header(WIDTH, HEIGHT);
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    ));
    if points.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (x_min, x_max) = bounds(points.iter().map(|p| p.0));
    let (y_min, y_max) = bounds(points.iter().map(|p| p.1));
    let x_span = (x_max - x_min).max(1e-12);
    let y_span = (y_max - y_min).max(1e-12);
    for (idx, &(x, y)) in points.iter().enumerate() {
        let cx = MARGIN + (x - x_min) / x_span * (WIDTH - 2.0 * MARGIN);
        let cy = HEIGHT - MARGIN - (y - y_min) / y_span * (HEIGHT - 2.0 * MARGIN);
        let class = classes.get(idx).copied().unwrap_or(0);
        svg.push_str(&format!(
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"4\" fill=\"{}\" fill-opacity=\"0.8\"/>\n",
            PALETTE[class % PALETTE.len()]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Leaf order from average-linkage agglomerative clustering of a distance
/// matrix; used to sort heatmaps so cluster structure shows up as blocks.
pub fn clustering_order(distances: &DMatrix<f64>) -> Vec<usize> {
    let n = distances.nrows();
    if n == 0 {
        return Vec::new();
    }
    // Active clusters: (member leaves in order, size).
    let mut clusters: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut dist = distances.clone();
    let mut active: Vec<usize> = (0..n).collect();
    while active.len() > 1 {
        let (mut bi, mut bj, mut best) = (active[0], active[1], f64::INFINITY);
        for (p, &i) in active.iter().enumerate() {
            for &j in active.iter().skip(p + 1) {
                if dist[(i, j)] < best {
                    best = dist[(i, j)];
                    bi = i;
                    bj = j;
                }
            }
        }
        // Average-linkage update onto the surviving index bi.
        let size_i = clusters[bi].as_ref().map_or(0, Vec::len) as f64;
        let size_j = clusters[bj].as_ref().map_or(0, Vec::len) as f64;
        for &k in &active {
            if k == bi || k == bj {
                continue;
            }
            let merged =
                (dist[(bi, k)] * size_i + dist[(bj, k)] * size_j) / (size_i + size_j);
            dist[(bi, k)] = merged;
            dist[(k, bi)] = merged;
        }
        let mut absorbed = clusters[bj].take().expect("active cluster");
        clusters[bi]
            .as_mut()
            .expect("active cluster")
            .append(&mut absorbed);
        active.retain(|&k| k != bj);
    }
    clusters[active[0]].take().expect("final cluster")
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn identical_inputs_give_identical_bytes() {
        let points = vec![(0.0, 1.0), (1.0, 0.1), (2.0, 0.01)];
        assert_eq!(
            line_plot_log(&points, "t", "delta"),
            line_plot_log(&points, "t", "delta")
        );
        let m = dmatrix![0.0, 1.0; 1.0, 0.0];
        assert_eq!(heatmap(&m, "h"), heatmap(&m, "h"));
    }

    #[test]
    fn heatmap_downsamples_large_matrices() {
        let m = DMatrix::from_fn(600, 600, |i, j| (i + j) as f64);
        let svg = heatmap(&m, "big");
        let rects = svg.matches("<rect").count();
        assert!(rects <= 300 * 300 + 1, "too many rects: {rects}");
    }

    #[test]
    fn clustering_order_groups_blocks() {
        // Two tight groups {0, 2} and {1, 3}.
        let d = dmatrix![
            0.0, 9.0, 1.0, 9.0;
            9.0, 0.0, 9.0, 1.0;
            1.0, 9.0, 0.0, 9.0;
            9.0, 1.0, 9.0, 0.0
        ];
        let order = clustering_order(&d);
        let pos = |x: usize| order.iter().position(|&v| v == x).unwrap();
        assert_eq!((pos(0) as i64 - pos(2) as i64).abs(), 1);
        assert_eq!((pos(1) as i64 - pos(3) as i64).abs(), 1);
    }

    #[test]
    fn log_plot_skips_nonpositive_values() {
        let points = vec![(0.0, 1.0), (1.0, 0.0), (2.0, f64::INFINITY), (3.0, 0.5)];
        let svg = line_plot_log(&points, "t", "y");
        assert!(svg.contains("polyline"));
    }
}
