//! Energy sweeps over a grid of (shape, size, alpha, seed) cells, with
//! long-format CSV output and a log-log SVG rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dimension::DimensionEstimate;
use crate::energy::energy_of_sorted;
use crate::error::{Error, Result};
use crate::fit::LinearFit;
use crate::generators::{builtin_shape, Shape};
use crate::metric::Metric;
use crate::mst::build_mst_prim;
use crate::record::sig17;

pub const CSV_HEADER: &str = "shape,n,alpha,seed,energy,max_edge";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub shape: Shape,
    pub dim: usize,
    pub metric: Metric,
    /// Shape size parameters, see [`Shape::size_meaning`].
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub shape: Shape,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub energy: f64,
    pub max_edge: f64,
}

/// Runs every cell of the grid. Trees are built once per (size, seed) and
/// reused across exponents. Rows are ordered by size, then alpha, then seed.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if grid.sizes.is_empty() || grid.alphas.is_empty() || grid.seeds.is_empty() {
        return Err(Error::input("sizes, alphas and seeds must be nonempty"));
    }
    if let Some(a) = grid.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(Error::input(format!(
            "alpha must be positive and finite, got {a}"
        )));
    }
    let cells: Vec<(usize, u64)> = grid
        .sizes
        .iter()
        .flat_map(|&s| grid.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let trees: Vec<(usize, Vec<f64>)> = cells
        .par_iter()
        .map(|&(size, seed)| {
            let cloud = builtin_shape(grid.shape, size, grid.dim, seed)?.cloud;
            let tree = build_mst_prim(&cloud, &grid.metric, 0)?;
            Ok((cloud.len(), tree.sorted_lengths()))
        })
        .collect::<Result<_>>()?;

    let per_size = grid.seeds.len();
    let mut rows = Vec::with_capacity(trees.len() * grid.alphas.len());
    for group in trees.chunks(per_size) {
        for &alpha in &grid.alphas {
            for ((n, lengths), &seed) in group.iter().zip(&grid.seeds) {
                rows.push(SweepRow {
                    shape: grid.shape,
                    n: *n,
                    alpha,
                    seed,
                    energy: energy_of_sorted(lengths, alpha),
                    max_edge: lengths.last().copied().unwrap_or(0.0),
                });
            }
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.shape,
            r.n,
            sig17(r.alpha),
            r.seed,
            sig17(r.energy),
            sig17(r.max_edge)
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let line_no = i + 2;
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", fields.len())));
            }
            let float = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            Ok(SweepRow {
                shape: fields[0].parse().map_err(|e: Error| bad(e.to_string()))?,
                n: fields[1]
                    .parse()
                    .map_err(|e| bad(format!("`{}`: {e}", fields[1])))?,
                alpha: float(fields[2])?,
                seed: fields[3]
                    .parse()
                    .map_err(|e| bad(format!("`{}`: {e}", fields[3])))?,
                energy: float(fields[4])?,
                max_edge: float(fields[5])?,
            })
        })
        .collect()
}

/// Sum of `ln E` and sample count per point count.
type LogSums = BTreeMap<usize, (f64, usize)>;

/// Per exponent: `(ln n, mean over seeds of ln E)` in size order.
pub fn log_log_series(rows: &[SweepRow]) -> Vec<(f64, Vec<(f64, f64)>)> {
    let mut by_alpha: Vec<(f64, LogSums)> = Vec::new();
    for r in rows.iter().filter(|r| r.energy > 0.0) {
        let slot = match by_alpha.iter().position(|(a, _)| *a == r.alpha) {
            Some(i) => i,
            None => {
                by_alpha.push((r.alpha, BTreeMap::new()));
                by_alpha.len() - 1
            }
        };
        let acc = by_alpha[slot].1.entry(r.n).or_insert((0.0, 0));
        acc.0 += r.energy.ln();
        acc.1 += 1;
    }
    by_alpha
        .into_iter()
        .map(|(a, m)| {
            let pts = m
                .into_iter()
                .map(|(n, (s, c))| ((n as f64).ln(), s / c as f64))
                .collect();
            (a, pts)
        })
        .collect()
}

/// Fitted growth slope of `ln E` against `ln n` per exponent.
pub fn fitted_slopes(rows: &[SweepRow]) -> Vec<(f64, Option<LinearFit>)> {
    log_log_series(rows)
        .into_iter()
        .map(|(a, pts)| (a, LinearFit::least_squares(&pts)))
        .collect()
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Static SVG of `ln E_alpha` against `ln n`, one marker series and fitted
/// line per exponent.
pub fn svg_log_log(rows: &[SweepRow], title: &str) -> String {
    let series = log_log_series(rows);
    let (w, h, m) = (640.0, 440.0, 60.0);
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, p)| p.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{m},{} {m},{} {},{}" fill="none" stroke="black"/>"#,
        m,
        h - m,
        w - m,
        h - m
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">ln n</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 {})">ln E</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (k, (alpha, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for &(x, y) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let label = match LinearFit::least_squares(pts) {
            Some(fit) => {
                let (ax, bx) = (pts[0].0, pts[pts.len() - 1].0);
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    sx(ax),
                    sy(fit.intercept + fit.slope * ax),
                    sx(bx),
                    sy(fit.intercept + fit.slope * bx)
                );
                format!("alpha={alpha} slope={:.3}", fit.slope)
            }
            None => format!("alpha={alpha}"),
        };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            m + 10.0,
            m + 16.0 * k as f64,
            escape(&label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// `eps,count,in_window` table of a box-dimension estimate.
pub fn scale_counts_csv(est: &DimensionEstimate) -> String {
    let mut out = String::from("eps,count,in_window\n");
    for s in &est.scales {
        let _ = writeln!(out, "{},{},{}", sig17(s.eps), s.count, s.in_window);
    }
    out
}

/// `n,alpha,energy` table of an MST-dimension estimate. Energies are
/// geometric means over replicates.
pub fn alpha_series_csv(est: &DimensionEstimate) -> String {
    let mut out = String::from("n,alpha,energy\n");
    for series in &est.series {
        for &(ln_n, ln_e) in &series.points {
            let _ = writeln!(
                out,
                "{},{},{}",
                ln_n.exp().round() as u64,
                sig17(series.alpha),
                sig17(ln_e.exp())
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_grid() -> SweepGrid {
        SweepGrid {
            shape: Shape::UniformCube,
            dim: 2,
            metric: Metric::L2,
            sizes: vec![64, 128, 256],
            alphas: vec![1.0, 3.0],
            seeds: vec![4, 5],
        }
    }

    #[test]
    fn row_order_follows_the_grid() {
        let rows = run_sweep(&small_grid()).unwrap();
        assert_eq!(rows.len(), 12);
        let keys: Vec<(usize, f64, u64)> = rows.iter().map(|r| (r.n, r.alpha, r.seed)).collect();
        assert_eq!(keys[0], (64, 1.0, 4));
        assert_eq!(keys[1], (64, 1.0, 5));
        assert_eq!(keys[2], (64, 3.0, 4));
        assert_eq!(keys[11], (256, 3.0, 5));
    }

    #[test]
    fn csv_is_deterministic_and_lossless() {
        let a = rows_to_csv(&run_sweep(&small_grid()).unwrap());
        let b = rows_to_csv(&run_sweep(&small_grid()).unwrap());
        assert_eq!(a, b);
        let parsed = parse_csv(&a).unwrap();
        assert_eq!(parsed, run_sweep(&small_grid()).unwrap());
        assert_eq!(rows_to_csv(&parsed), a);
        assert!(a.starts_with("shape,n,alpha,seed,energy,max_edge\n"));
    }

    #[test]
    fn grid_interval_energy_is_one() {
        let grid = SweepGrid {
            shape: Shape::Interval,
            dim: 1,
            metric: Metric::L2,
            sizes: vec![10, 100],
            alphas: vec![1.0],
            seeds: vec![0],
        };
        let rows = run_sweep(&grid).unwrap();
        assert!(rows.iter().all(|r| (r.energy - 1.0).abs() < 1e-12));
        let slopes = fitted_slopes(&rows);
        assert!(slopes[0].1.unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(
            parse_csv("a,b\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let text = format!("{CSV_HEADER}\nuniform-cube,3,1,0,2,1\nuniform-cube,x,1,0,2,1\n");
        assert!(matches!(
            parse_csv(&text),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = format!("{CSV_HEADER}\nblob,3,1,0,2,1\n");
        assert!(matches!(
            parse_csv(&text),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn svg_is_well_formed() {
        let svg = svg_log_log(&run_sweep(&small_grid()).unwrap(), "uniform <2d>");
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 6);
        assert_eq!(svg.matches("<line").count(), 2);
        assert!(svg.contains("uniform &lt;2d&gt;"));
        let empty = svg_log_log(&[], "none");
        assert!(empty.trim_end().ends_with("</svg>"));
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_bitwise(
            vals in proptest::collection::vec((1usize..10_000, any::<f64>(), any::<u64>(), any::<f64>(), any::<f64>()), 0..20)
        ) {
            let rows: Vec<SweepRow> = vals
                .into_iter()
                .filter(|v| v.1.is_finite() && v.3.is_finite() && v.4.is_finite())
                .map(|(n, alpha, seed, energy, max_edge)| SweepRow {
                    shape: Shape::Cantor, n, alpha, seed, energy, max_edge,
                })
                .collect();
            let back = parse_csv(&rows_to_csv(&rows)).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            for (a, b) in back.iter().zip(&rows) {
                prop_assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
                prop_assert_eq!(a.energy.to_bits(), b.energy.to_bits());
                prop_assert_eq!(a.max_edge.to_bits(), b.max_edge.to_bits());
            }
        }
    }
}
