//! Executable checks for the separation properties of minimal spanning
//! trees and the growth bound on Euclidean MST energies.
//!
//! Every checker reports the minimal slack it observed, not just pass/fail,
//! so that tolerance problems show up as shrinking slack before they turn
//! into failures.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::cloud::PointCloud;
use crate::energy::{count_edges_longer_than, energy_of_sorted};
use crate::error::{Error, Result};
use crate::fit::LinearFit;
use crate::generators::{builtin_shape, Shape};
use crate::metric::Metric;
use crate::mst::{build_mst_prim, SpanningTree};
use crate::record::ser_f64;

/// Absolute tolerance for the checked inequalities.
pub const ABS_TOL: f64 = 1e-12;

/// Outcome of one checker run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub min_slack: f64,
    pub details: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            parameters: BTreeMap::new(),
            pass: true,
            min_slack: f64::INFINITY,
            details: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("check report serializes")
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Evaluation of the midpoint inequality for one pair of vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointEval {
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
    pub midpoint_norm: f64,
}

impl MidpointEval {
    pub fn counterexample(&self) -> bool {
        self.hypotheses_hold && !self.conclusion_holds
    }

    /// `|(w1+w2)/2| - sqrt(3)/2`.
    pub fn slack(&self) -> f64 {
        self.midpoint_norm - 3f64.sqrt() / 2.0
    }
}

/// If `|w1| >= 1`, `|w2| >= 1` and `|w1 - w2| <= 1`, then
/// `|(w1+w2)/2| >= sqrt(3)/2`.
pub fn midpoint_norm_check(w1: &[f64], w2: &[f64]) -> Result<MidpointEval> {
    if w1.len() != w2.len() {
        return Err(Error::DimensionMismatch {
            expected: w1.len(),
            found: w2.len(),
        });
    }
    let diff: Vec<f64> = w1.iter().zip(w2).map(|(a, b)| a - b).collect();
    let mid: Vec<f64> = w1.iter().zip(w2).map(|(a, b)| 0.5 * (a + b)).collect();
    let hypotheses_hold =
        norm(w1) >= 1.0 - ABS_TOL && norm(w2) >= 1.0 - ABS_TOL && norm(&diff) <= 1.0 + ABS_TOL;
    let midpoint_norm = norm(&mid);
    Ok(MidpointEval {
        hypotheses_hold,
        conclusion_holds: midpoint_norm >= 3f64.sqrt() / 2.0 - ABS_TOL,
        midpoint_norm,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 0.1 && r <= 1.0 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Draws `trials` hypothesis-satisfying pairs per dimension, concentrated
/// near the constraint boundary, and counts counterexamples.
pub fn midpoint_norm_sweep(trials: usize, dims: &[usize], seed: u64) -> Result<CheckReport> {
    if dims.contains(&0) {
        return Err(Error::input("dimensions must be positive"));
    }
    let mut report = CheckReport::new("midpoint-norm");
    report
        .param("trials", trials)
        .param("dims", dims)
        .param("seed", seed);
    let mut counterexamples = 0usize;
    for &dim in dims {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (dim as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut accepted = 0;
        let mut dim_slack = f64::INFINITY;
        while accepted < trials {
            let r1 = 1.0 + 0.25 * rng.gen::<f64>().powi(3);
            let w1: Vec<f64> = random_unit(&mut rng, dim)
                .into_iter()
                .map(|x| r1 * x)
                .collect();
            let t = 1.0 - 0.25 * rng.gen::<f64>().powi(3);
            let step = random_unit(&mut rng, dim);
            let w2: Vec<f64> = w1.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            if norm(&w2) < 1.0 {
                continue;
            }
            accepted += 1;
            let eval = midpoint_norm_check(&w1, &w2)?;
            if !eval.hypotheses_hold {
                continue;
            }
            dim_slack = dim_slack.min(eval.slack());
            if eval.counterexample() {
                counterexamples += 1;
                if report.details.len() < 10 {
                    report
                        .details
                        .push(format!("counterexample w1={w1:?} w2={w2:?}"));
                }
            }
        }
        report.min_slack = report.min_slack.min(dim_slack);
        report
            .details
            .push(format!("d={dim}: min slack {dim_slack:e}"));
    }
    report.param("counterexamples", counterexamples);
    report.pass = counterexamples == 0;
    Ok(report)
}

/// Balls of radius `|e|/10` around edge midpoints are pairwise disjoint:
/// `|mid(e) - mid(f)| >= (|e| + |f|)/10` for every pair of tree edges.
pub fn midpoint_ball_check(
    cloud: &PointCloud,
    metric: &Metric,
    tree: &SpanningTree,
) -> Result<CheckReport> {
    if !metric.is_euclidean() {
        return Err(Error::UnsupportedMetric(format!(
            "midpoint balls need Euclidean coordinates, got {metric}"
        )));
    }
    if tree.n != cloud.len() {
        return Err(Error::input(format!(
            "tree spans {} vertices but the cloud has {} points",
            tree.n,
            cloud.len()
        )));
    }
    let dim = cloud.dim();
    let mids: Vec<f64> = tree
        .edges
        .iter()
        .flat_map(|e| {
            let (a, b) = (cloud.point(e.u), cloud.point(e.v));
            (0..dim).map(move |k| 0.5 * (a[k] + b[k]))
        })
        .collect();
    let m = tree.edges.len();
    let (min_slack, violations, worst) = (0..m)
        .into_par_iter()
        .map(|i| {
            let mi = &mids[i * dim..(i + 1) * dim];
            let mut local = (f64::INFINITY, 0usize, None);
            for j in i + 1..m {
                let gap = Metric::L2.eval(mi, &mids[j * dim..(j + 1) * dim]);
                let need = (tree.edges[i].length + tree.edges[j].length) / 10.0;
                let slack = gap - need;
                if slack < -ABS_TOL {
                    local.1 += 1;
                }
                if slack < local.0 {
                    local.0 = slack;
                    local.2 = Some((i, j));
                }
            }
            local
        })
        .reduce(
            || (f64::INFINITY, 0, None),
            |a, b| {
                let count = a.1 + b.1;
                if b.0 < a.0 || (b.0 == a.0 && b.2 < a.2) {
                    (b.0, count, b.2)
                } else {
                    (a.0, count, a.2)
                }
            },
        );
    let mut report = CheckReport::new("midpoint-balls");
    report
        .param("n", tree.n)
        .param("edges", m)
        .param("pairs", m * m.saturating_sub(1) / 2);
    report.pass = violations == 0;
    report.min_slack = min_slack;
    report.details.push(format!("violations: {violations}"));
    if let Some((i, j)) = worst {
        report
            .details
            .push(format!("tightest pair: edges {i} and {j}"));
    }
    Ok(report)
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2} 2 pi / d
    let mut v = if dim.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if dim.is_multiple_of(2) { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Largest number of disjoint `eps/3`-balls with centers in `[0,1]^d`, by
/// volume: `(1 + 2 eps/3)^d / (V_d (eps/3)^d)`.
pub fn packing_volume_bound(dim: usize, eps: f64) -> f64 {
    let r = eps / 3.0;
    (1.0 + 2.0 * r).powi(dim as i32) / (unit_ball_volume(dim) * r.powi(dim as i32))
}

/// For every edge longer than `eps`, takes the endpoint that joined the Prim
/// tree last, and checks those vertices are pairwise at least
/// `2 eps / (3 C_w)` apart, where `C_w` is the metric's weak-triangle
/// constant.
///
/// Under plain `L2` with the cloud inside the unit cube, the number of such
/// edges is also checked against [`packing_volume_bound`].
pub fn long_edge_separation_check(
    cloud: &PointCloud,
    metric: &Metric,
    tree: &SpanningTree,
    eps: f64,
) -> Result<CheckReport> {
    let rank = tree
        .insertion_rank
        .as_ref()
        .ok_or_else(|| Error::input("tree carries no insertion ranks; build it with Prim"))?;
    if !(eps > 0.0) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    if tree.n != cloud.len() {
        return Err(Error::input("tree and cloud sizes differ"));
    }
    let c_w = metric.weak_triangle_const();
    let threshold = 2.0 * eps / (3.0 * c_w);
    let centers: Vec<usize> = tree
        .edges
        .iter()
        .filter(|e| e.length > eps)
        .map(|e| if rank[e.u] > rank[e.v] { e.u } else { e.v })
        .collect();
    let mut min_dist = f64::INFINITY;
    let mut violations = 0usize;
    for (a, &i) in centers.iter().enumerate() {
        for &j in &centers[a + 1..] {
            let d = metric.between(cloud, i, j);
            min_dist = min_dist.min(d);
            if d < threshold - ABS_TOL {
                violations += 1;
            }
        }
    }
    let mut report = CheckReport::new("last-entered-separation");
    report
        .param("metric", metric.to_string())
        .param("n", tree.n)
        .param("eps", eps)
        .param("weak_triangle_const", c_w)
        .param("long_edges", centers.len());
    report.min_slack = min_dist - threshold;
    report.pass = violations == 0;
    report.details.push(format!(
        "{} edges longer than eps; min separation {min_dist} vs threshold {threshold}; violations: {violations}",
        centers.len()
    ));

    let in_unit_cube = cloud.coords().iter().all(|c| (0.0..=1.0).contains(c));
    if metric.is_euclidean() && in_unit_cube {
        let bound = packing_volume_bound(cloud.dim(), eps);
        let count = count_edges_longer_than(tree, eps);
        let ok = count as f64 <= bound;
        report.pass &= ok;
        report.param("volume_bound", bound);
        report
            .details
            .push(format!("{count} long edges vs volume bound {bound}"));
    }
    Ok(report)
}

/// Sweep settings for [`energy_growth_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthConfig {
    pub dim: usize,
    pub alphas: Vec<f64>,
    /// Shape size parameters, increasing.
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub shape: Shape,
    /// Upper bound accepted for the normalized constant.
    pub threshold: f64,
}

impl GrowthConfig {
    pub fn uniform(dim: usize, alphas: Vec<f64>, sizes: Vec<usize>, seeds: Vec<u64>) -> Self {
        GrowthConfig {
            dim,
            alphas,
            sizes,
            seeds,
            shape: Shape::UniformCube,
            threshold: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCell {
    #[serde(serialize_with = "ser_f64")]
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    #[serde(serialize_with = "ser_f64")]
    pub energy: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_edge: f64,
    #[serde(serialize_with = "ser_f64")]
    pub c_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSummary {
    #[serde(serialize_with = "ser_f64")]
    pub alpha: f64,
    /// Slope of `ln E_alpha` against `ln n` over all cells.
    pub fit: LinearFit,
    #[serde(serialize_with = "ser_f64")]
    pub max_c_hat: f64,
    #[serde(serialize_with = "ser_f64")]
    pub first_third_mean: f64,
    #[serde(serialize_with = "ser_f64")]
    pub last_third_mean: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub dim: usize,
    pub cells: Vec<GrowthCell>,
    pub summaries: Vec<GrowthSummary>,
    pub pass: bool,
}

impl GrowthReport {
    pub fn summary(&self, alpha: f64) -> Option<&GrowthSummary> {
        self.summaries.iter().find(|s| s.alpha == alpha)
    }

    pub fn to_check_report(&self) -> CheckReport {
        let mut r = CheckReport::new("energy-growth");
        r.param("dim", self.dim).param("cells", self.cells.len());
        r.pass = self.pass;
        for s in &self.summaries {
            r.min_slack = r
                .min_slack
                .min(1.1 * s.first_third_mean - s.last_third_mean);
            r.details.push(format!(
                "alpha={}: slope {:.4}, max c_hat {:.4}, first-third {:.4}, last-third {:.4}, {}",
                s.alpha,
                s.fit.slope,
                s.max_c_hat,
                s.first_third_mean,
                s.last_third_mean,
                if s.pass { "pass" } else { "FAIL" }
            ));
        }
        r
    }
}

/// Normalized constant `(E / n^max(0, 1 - alpha/d))^(1/alpha) / sqrt(d)`.
pub fn normalized_constant(energy: f64, n: usize, dim: usize, alpha: f64) -> f64 {
    let d = dim as f64;
    (energy / (n as f64).powf((1.0 - alpha / d).max(0.0))).powf(alpha.recip()) / d.sqrt()
}

/// Measures the constant in `E_alpha <= (C sqrt(d))^alpha n^max(0, 1-alpha/d)`
/// over a sweep of sizes and seeds. An exponent passes when the largest
/// normalized constant is below the threshold and the mean over the last
/// third of sizes is at most 1.1 times the mean over the first third.
pub fn energy_growth_check(config: &GrowthConfig) -> Result<GrowthReport> {
    if config.sizes.is_empty() || config.seeds.is_empty() || config.alphas.is_empty() {
        return Err(Error::input("sizes, seeds and alphas must be nonempty"));
    }
    if config.sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("sizes must be strictly increasing"));
    }
    if config.alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::input("alphas must be positive"));
    }
    let grid: Vec<(usize, u64)> = config
        .sizes
        .iter()
        .flat_map(|&s| config.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let trees: Vec<(usize, u64, Vec<f64>)> = grid
        .par_iter()
        .map(|&(size, seed)| {
            let cloud = builtin_shape(config.shape, size, config.dim, seed)?.cloud;
            let tree = build_mst_prim(&cloud, &Metric::L2, 0)?;
            Ok((cloud.len(), seed, tree.sorted_lengths()))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(trees.len() * config.alphas.len());
    let mut summaries = Vec::with_capacity(config.alphas.len());
    for &alpha in &config.alphas {
        let mut by_size: Vec<Vec<f64>> = Vec::with_capacity(config.sizes.len());
        let mut points = Vec::with_capacity(trees.len());
        for group in trees.chunks(config.seeds.len()) {
            let mut c_hats = Vec::with_capacity(group.len());
            for (n, seed, lengths) in group {
                let energy = energy_of_sorted(lengths, alpha);
                let c_hat = normalized_constant(energy, *n, config.dim, alpha);
                points.push(((*n as f64).ln(), energy.ln()));
                c_hats.push(c_hat);
                cells.push(GrowthCell {
                    alpha,
                    n: *n,
                    seed: *seed,
                    energy,
                    max_edge: lengths.last().copied().unwrap_or(0.0),
                    c_hat,
                });
            }
            by_size.push(c_hats);
        }
        let size_means: Vec<f64> = by_size
            .iter()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
            .collect();
        let k = (size_means.len() / 3).max(1);
        let first = size_means[..k].iter().sum::<f64>() / k as f64;
        let last = size_means[size_means.len() - k..].iter().sum::<f64>() / k as f64;
        let max_c_hat = by_size.iter().flatten().copied().fold(0.0, f64::max);
        let fit = LinearFit::least_squares(&points).unwrap_or(LinearFit {
            slope: 0.0,
            intercept: points.first().map_or(0.0, |p| p.1),
            r_squared: 1.0,
        });
        summaries.push(GrowthSummary {
            alpha,
            fit,
            max_c_hat,
            first_third_mean: first,
            last_third_mean: last,
            pass: max_c_hat <= config.threshold && last <= 1.1 * first,
        });
    }
    let pass = summaries.iter().all(|s| s.pass);
    Ok(GrowthReport {
        dim: config.dim,
        cells,
        summaries,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::generate_uniform;
    use crate::mst::build_mst_kruskal;
    use proptest::prelude::*;

    #[test]
    fn midpoint_norm_examples() {
        let e = midpoint_norm_check(&[1.0, 0.0], &[0.5, 3f64.sqrt() / 2.0]).unwrap();
        assert!(e.hypotheses_hold && e.conclusion_holds);
        assert!(e.slack().abs() < 1e-15);
        let e = midpoint_norm_check(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(e.midpoint_norm, 1.0);
        assert!(!e.counterexample());
        // hypotheses fail: no counterexample even though the midpoint is short
        let e = midpoint_norm_check(&[0.1, 0.0], &[-0.1, 0.0]).unwrap();
        assert!(!e.hypotheses_hold && !e.conclusion_holds && !e.counterexample());
        assert!(midpoint_norm_check(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn midpoint_norm_sweep_finds_no_counterexample() {
        let r = midpoint_norm_sweep(20_000, &[2, 3, 5], 3).unwrap();
        assert!(r.pass, "{:?}", r.details);
        assert!(
            r.min_slack >= -ABS_TOL && r.min_slack < 0.05,
            "{}",
            r.min_slack
        );
    }

    #[test]
    fn midpoint_ball_examples() {
        let c = PointCloud::from_scalars(&[0.0, 1.0, 3.0]).unwrap();
        let t = build_mst_prim(&c, &Metric::L2, 0).unwrap();
        let r = midpoint_ball_check(&c, &Metric::L2, &t).unwrap();
        assert!(r.pass);
        assert!((r.min_slack - 1.2).abs() < 1e-15);

        let sq =
            PointCloud::from_points(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        let t = build_mst_prim(&sq, &Metric::L2, 0).unwrap();
        let r = midpoint_ball_check(&sq, &Metric::L2, &t).unwrap();
        assert!(r.pass);
        assert!((r.min_slack - (0.5f64.sqrt() - 0.2)).abs() < 1e-15);

        let u = generate_uniform(100, 2, 1).unwrap();
        let t = build_mst_kruskal(&u, &Metric::L2).unwrap();
        assert!(midpoint_ball_check(&u, &Metric::L2, &t).unwrap().pass);
    }

    #[test]
    fn midpoint_ball_requires_euclidean_metric() {
        let c = PointCloud::from_scalars(&[0.0, 1.0]).unwrap();
        let t = build_mst_prim(&c, &Metric::L1, 0).unwrap();
        assert!(matches!(
            midpoint_ball_check(&c, &Metric::L1, &t),
            Err(Error::UnsupportedMetric(_))
        ));
    }

    #[test]
    fn midpoint_ball_flags_a_non_minimal_tree() {
        // Path 0-2-1 on collinear points: the long edge swallows the short one.
        let c = PointCloud::from_scalars(&[0.0, 0.1, 1.0]).unwrap();
        let tree = SpanningTree {
            n: 3,
            edges: vec![
                crate::mst::Edge {
                    u: 0,
                    v: 2,
                    length: 1.0,
                },
                crate::mst::Edge {
                    u: 2,
                    v: 1,
                    length: 0.9,
                },
            ],
            insertion_rank: None,
            builder: crate::mst::Builder::BruteForce,
        };
        let r = midpoint_ball_check(&c, &Metric::L2, &tree).unwrap();
        assert!(!r.pass);
        assert!(r.min_slack < 0.0);
    }

    #[test]
    fn long_edge_separation_examples() {
        let c = PointCloud::from_scalars(&[0.0, 1.0, 3.0]).unwrap();
        let t = build_mst_prim(&c, &Metric::L2, 0).unwrap();
        let r = long_edge_separation_check(&c, &Metric::L2, &t, 0.5).unwrap();
        assert!(r.pass);
        assert!((r.min_slack - (2.0 - 1.0 / 3.0)).abs() < 1e-15);

        let cantor = builtin_shape(Shape::Cantor, 8, 0, 0).unwrap().cloud;
        let t = build_mst_prim(&cantor, &Metric::L2, 0).unwrap();
        for k in 1..=6 {
            assert!(
                long_edge_separation_check(&cantor, &Metric::L2, &t, 3f64.powi(-k))
                    .unwrap()
                    .pass
            );
        }
        let u = generate_uniform(500, 3, 9).unwrap();
        let t = build_mst_prim(&u, &Metric::L2, 0).unwrap();
        for k in 1..=8 {
            assert!(
                long_edge_separation_check(&u, &Metric::L2, &t, 0.5f64.powi(k))
                    .unwrap()
                    .pass
            );
        }
    }

    #[test]
    fn long_edge_separation_needs_ranks() {
        let c = PointCloud::from_scalars(&[0.0, 1.0, 3.0]).unwrap();
        let t = build_mst_kruskal(&c, &Metric::L2).unwrap();
        assert!(long_edge_separation_check(&c, &Metric::L2, &t, 0.5).is_err());
        let t = build_mst_prim(&c, &Metric::L2, 0).unwrap();
        assert!(long_edge_separation_check(&c, &Metric::L2, &t, 0.0).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn energy_growth_on_unit_interval_grid() {
        let cfg = GrowthConfig {
            dim: 1,
            alphas: vec![1.0],
            sizes: vec![16, 64, 256],
            seeds: vec![0],
            shape: Shape::Grid,
            threshold: 2.0,
        };
        let r = energy_growth_check(&cfg).unwrap();
        for cell in &r.cells {
            assert!((cell.energy - 1.0).abs() < 1e-12);
            assert!((cell.c_hat - 1.0).abs() < 1e-12);
        }
        assert!(r.pass);
    }

    #[test]
    fn energy_growth_small_sweep() {
        let cfg =
            GrowthConfig::uniform(2, vec![1.0, 3.0], vec![128, 256, 512, 1024], vec![1, 2, 3]);
        let r = energy_growth_check(&cfg).unwrap();
        assert!(r.pass, "{:?}", r.to_check_report().details);
        let s1 = r.summary(1.0).unwrap();
        assert!((s1.fit.slope - 0.5).abs() < 0.1);
        let s3 = r.summary(3.0).unwrap();
        assert!(s3.last_third_mean <= s3.first_third_mean);
        assert_eq!(r.cells.len(), 2 * 4 * 3);
    }

    #[test]
    fn energy_growth_rejects_bad_config() {
        let mut cfg = GrowthConfig::uniform(2, vec![1.0], vec![64, 32], vec![0]);
        assert!(energy_growth_check(&cfg).is_err());
        cfg.sizes = vec![32, 64];
        cfg.alphas = vec![0.0];
        assert!(energy_growth_check(&cfg).is_err());
    }

    fn cloud_strategy() -> impl Strategy<Value = PointCloud> {
        (3usize..120, 2usize..4).prop_flat_map(|(n, d)| {
            proptest::collection::vec(0.0f64..1.0, n * d)
                .prop_map(move |c| PointCloud::from_flat(d, c).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn midpoint_norm_never_fails(
            dim in 2usize..6,
            raw in proptest::collection::vec(-2.0f64..2.0, 10),
        ) {
            let (w1, w2) = (&raw[..dim], &raw[5..5 + dim]);
            let e = midpoint_norm_check(w1, w2).unwrap();
            prop_assert!(!e.counterexample(), "{:?} {:?}", w1, w2);
        }

        #[test]
        fn midpoint_ball_holds_on_every_mst(cloud in cloud_strategy()) {
            let t = build_mst_prim(&cloud, &Metric::L2, 0).unwrap();
            let r = midpoint_ball_check(&cloud, &Metric::L2, &t).unwrap();
            prop_assert!(r.pass, "slack {}", r.min_slack);
        }

        #[test]
        fn long_edge_separation_holds_for_every_metric_and_scale(
            cloud in cloud_strategy(),
            metric in prop_oneof![
                Just(Metric::L2),
                Just(Metric::L1),
                Just(Metric::snowflake(Metric::L2, 0.5).unwrap()),
                Just(Metric::power_quasi(Metric::L2, 2.0).unwrap()),
                Just(Metric::power_quasi(Metric::L1, 3.0).unwrap()),
            ],
            eps in 0.001f64..1.0,
        ) {
            let t = build_mst_prim(&cloud, &metric, 0).unwrap();
            let r = long_edge_separation_check(&cloud, &metric, &t, eps).unwrap();
            prop_assert!(r.pass, "{:?}", r.details);
        }

        #[test]
        fn normalized_constant_ignores_translation_and_order(
            cloud in cloud_strategy(),
            shift in -3.0f64..3.0,
            rot in any::<usize>(),
            alpha in prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]),
        ) {
            let n = cloud.len();
            let shifted = cloud.map_coords(|c| c + shift).unwrap();
            let order: Vec<usize> = (0..n).map(|i| (i + rot) % n).rev().collect();
            let permuted = cloud.select(&order);
            let c_hat = |c: &PointCloud| {
                let t = build_mst_prim(c, &Metric::L2, 0).unwrap();
                normalized_constant(energy_of_sorted(&t.sorted_lengths(), alpha), n, c.dim(), alpha)
            };
            let base = c_hat(&cloud);
            prop_assert!((c_hat(&shifted) - base).abs() <= 1e-9 * base);
            prop_assert!((c_hat(&permuted) - base).abs() <= 1e-12 * base);
        }
    }
}
