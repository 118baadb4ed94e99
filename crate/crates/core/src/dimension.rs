//! Dimension estimators: upper box dimension from greedy epsilon-packings,
//! and MST dimension from the growth exponent of `E_alpha` in `n`.

use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::PointCloud;
use crate::energy::energy_of_sorted;
use crate::error::{Error, Result};
use crate::fit::LinearFit;
use crate::generators::{builtin_shape, Shape};
use crate::lemma_checks::CheckReport;
use crate::metric::{diameter, Metric};
use crate::mst::build_mst_prim;
use crate::record::ser_f64;

/// Centers of a greedy packing: pairwise distance strictly above `2 eps`, so
/// closed `eps`-balls around them are disjoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingResult {
    #[serde(serialize_with = "ser_f64")]
    pub eps: f64,
    pub center_indices: Vec<usize>,
    pub count: usize,
}

/// Scans the cloud in order, keeping a point iff it is more than `2 eps`
/// from every center kept so far. The result is maximal, so its centers form
/// a `2 eps`-net of the cloud.
pub fn greedy_packing(cloud: &PointCloud, metric: &Metric, eps: f64) -> Result<PackingResult> {
    if !(eps > 0.0) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    if cloud.is_empty() {
        return Err(Error::input("cannot pack an empty cloud"));
    }
    let sep = 2.0 * eps;
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        if centers
            .iter()
            .all(|&c| metric.eval(p, cloud.point(c)) > sep)
        {
            centers.push(i);
        }
    }
    Ok(PackingResult {
        eps,
        count: centers.len(),
        center_indices: centers,
    })
}

/// Scales at which to count packings.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsSchedule {
    /// `eps_j = diam * ratio^j` for `j = 1..=levels`.
    Geometric { ratio: f64, levels: usize },
    /// Explicit, strictly decreasing scales.
    Explicit(Vec<f64>),
}

impl Default for EpsSchedule {
    /// Half-octave steps, `eps_j = diam * 2^(-j/2)`.
    fn default() -> Self {
        EpsSchedule::Geometric {
            ratio: std::f64::consts::FRAC_1_SQRT_2,
            levels: 96,
        }
    }
}

impl EpsSchedule {
    pub fn scales(&self, diam: f64) -> Result<Vec<f64>> {
        let scales = match self {
            EpsSchedule::Geometric { ratio, levels } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::input(format!(
                        "schedule ratio must lie in (0, 1), got {ratio}"
                    )));
                }
                (1..=*levels).map(|j| diam * ratio.powi(j as i32)).collect()
            }
            EpsSchedule::Explicit(v) => v.clone(),
        };
        if scales.iter().any(|e| !(*e > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::input(
                "eps schedule must be positive and strictly decreasing",
            ));
        }
        Ok(scales)
    }
}

/// Saturation guards for box-dimension fits: scales with
/// `count < min_count` or `count > n * max_fraction` are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxWindow {
    pub min_count: usize,
    pub max_fraction: f64,
    /// Minimum number of scales left after windowing.
    pub min_scales: usize,
}

impl Default for BoxWindow {
    fn default() -> Self {
        BoxWindow {
            min_count: 8,
            max_fraction: 1.0 / 8.0,
            min_scales: 4,
        }
    }
}

impl BoxWindow {
    fn max_count(&self, n: usize) -> f64 {
        n as f64 * self.max_fraction
    }

    fn admits(&self, count: usize, n: usize) -> bool {
        count >= self.min_count && count as f64 <= self.max_count(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Box,
    Mst,
}

/// Packing count at one scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleCount {
    #[serde(serialize_with = "ser_f64")]
    pub eps: f64,
    pub count: usize,
    pub in_window: bool,
}

/// Growth of `E_alpha` in `n` for one exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSeries {
    #[serde(serialize_with = "ser_f64")]
    pub alpha: f64,
    /// `(ln n, mean over replicates of ln E_alpha)`.
    pub points: Vec<(f64, f64)>,
    pub fit: LinearFit,
    /// `alpha / (1 - slope)` when the slope is inside the valid band.
    pub implied_dim: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub method: Method,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Box: `(ln 1/eps, ln count)` inside the window. MST: `(alpha, slope)`
    /// for exponents inside the slope band.
    pub fit_points: Vec<(f64, f64)>,
    #[serde(serialize_with = "ser_f64")]
    pub slope: f64,
    #[serde(serialize_with = "ser_f64")]
    pub r_squared: f64,
    pub window: String,
    /// Box only: every scale that was counted.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scales: Vec<ScaleCount>,
    /// MST only: one entry per exponent.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<AlphaSeries>,
    /// MST only: smallest exponent where the growth slope falls below the
    /// crossover threshold, linearly interpolated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover_alpha: Option<f64>,
}

impl DimensionEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Upper box dimension as the slope of `ln N(eps)` against `ln 1/eps`.
///
/// Scales are processed from coarse to fine. Counting stops after the first
/// scale whose count exceeds the window's upper guard, and all finer scales
/// are treated as saturated.
pub fn box_dimension(
    cloud: &PointCloud,
    metric: &Metric,
    schedule: &EpsSchedule,
    window: &BoxWindow,
) -> Result<DimensionEstimate> {
    let n = cloud.len();
    let diam = diameter(cloud, metric);
    if diam == 0.0 {
        return Err(Error::Degenerate("cloud has zero diameter".into()));
    }
    let all_scales = schedule.scales(diam)?;
    let mut scales = Vec::new();
    for eps in all_scales {
        let count = greedy_packing(cloud, metric, eps)?.count;
        scales.push(ScaleCount {
            eps,
            count,
            in_window: window.admits(count, n),
        });
        if count as f64 > window.max_count(n) {
            break;
        }
    }
    let fit_points: Vec<(f64, f64)> = scales
        .iter()
        .filter(|s| s.in_window)
        .map(|s| ((1.0 / s.eps).ln(), (s.count as f64).ln()))
        .collect();
    if fit_points.len() < window.min_scales {
        return Err(Error::InsufficientScales {
            usable: fit_points.len(),
            required: window.min_scales,
        });
    }
    let fit = LinearFit::least_squares(&fit_points).ok_or(Error::InsufficientScales {
        usable: fit_points.len(),
        required: window.min_scales,
    })?;
    Ok(DimensionEstimate {
        method: Method::Box,
        value: fit.slope,
        fit_points,
        slope: fit.slope,
        r_squared: fit.r_squared,
        window: format!("{} <= N(eps) <= {}", window.min_count, window.max_count(n)),
        scales,
        series: Vec::new(),
        crossover_alpha: None,
    })
}

/// Settings for [`mst_dimension`].
#[derive(Debug, Clone, PartialEq)]
pub struct MstDimensionConfig {
    /// Shape size parameters (point count, grid side or depth), increasing.
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub seed: u64,
    /// Independent samples per size for random shapes; energies are combined
    /// by geometric mean.
    pub replicates: usize,
    /// Slopes inside this closed band contribute `alpha / (1 - slope)`.
    pub slope_band: (f64, f64),
    /// Slope below which energy counts as bounded in `n`.
    pub crossover_slope: f64,
}

impl MstDimensionConfig {
    pub fn new(sizes: Vec<usize>, alphas: Vec<f64>, seed: u64) -> Self {
        MstDimensionConfig {
            sizes,
            alphas,
            seed,
            replicates: 3,
            slope_band: (0.15, 0.85),
            crossover_slope: 0.05,
        }
    }

    /// Exponents `step, 2 step, ..., max`.
    pub fn alpha_grid(step: f64, max: f64) -> Vec<f64> {
        let count = (max / step).round() as usize;
        (1..=count).map(|i| i as f64 * step).collect()
    }
}

/// Sorted MST edge lengths of one generated sample.
struct Sample {
    n: usize,
    lengths: Vec<f64>,
}

/// MST dimension of a builtin shape. See [`mst_dimension_with`].
pub fn mst_dimension(
    shape: Shape,
    dim: usize,
    metric: &Metric,
    config: &MstDimensionConfig,
) -> Result<DimensionEstimate> {
    mst_dimension_with(
        |size, seed| Ok(builtin_shape(shape, size, dim, seed)?.cloud),
        shape.is_random(),
        metric,
        config,
    )
}

/// Fits the slope `s(alpha)` of `ln E_alpha` against `ln n` over the
/// generated family and inverts the growth exponent `1 - alpha/d`.
///
/// The estimate is the median of `alpha / (1 - s(alpha))` over exponents
/// whose slope lies in the configured band. The reported `slope` belongs to
/// the median exponent and `r_squared` is the worst fit among the exponents
/// used.
pub fn mst_dimension_with<G>(
    generate: G,
    random: bool,
    metric: &Metric,
    config: &MstDimensionConfig,
) -> Result<DimensionEstimate>
where
    G: Fn(usize, u64) -> Result<PointCloud> + Sync,
{
    if config.sizes.len() < 2 {
        return Err(Error::input("need at least two sizes"));
    }
    if config.sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("sizes must be strictly increasing"));
    }
    if config.alphas.is_empty() || config.alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::input("alphas must be nonempty and positive"));
    }
    let replicates = if random { config.replicates.max(1) } else { 1 };
    let cells: Vec<(usize, u64)> = config
        .sizes
        .iter()
        .flat_map(|&s| (0..replicates as u64).map(move |r| (s, config.seed.wrapping_add(r))))
        .collect();
    let samples: Vec<Sample> = cells
        .par_iter()
        .map(|&(size, seed)| {
            let cloud = generate(size, seed)?;
            let tree = build_mst_prim(&cloud, metric, 0)?;
            Ok(Sample {
                n: cloud.len(),
                lengths: tree.sorted_lengths(),
            })
        })
        .collect::<Result<_>>()?;

    let mut alphas = config.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let (lo, hi) = config.slope_band;
    let mut series = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let mut points = Vec::with_capacity(config.sizes.len());
        for group in samples.chunks(replicates) {
            let n = group[0].n;
            if group.iter().any(|s| s.n != n) {
                return Err(Error::input(
                    "replicates of one size produced different point counts",
                ));
            }
            let mean_log = group
                .iter()
                .map(|s| energy_of_sorted(&s.lengths, alpha).ln())
                .sum::<f64>()
                / group.len() as f64;
            points.push(((n as f64).ln(), mean_log));
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::Degenerate(
                "a generated sample has zero energy (all points coincide)".into(),
            ));
        }
        let fit = LinearFit::least_squares(&points)
            .ok_or_else(|| Error::input("sizes must produce at least two distinct point counts"))?;
        let implied_dim = (fit.slope >= lo && fit.slope <= hi).then(|| alpha / (1.0 - fit.slope));
        series.push(AlphaSeries {
            alpha,
            points,
            fit,
            implied_dim,
        });
    }

    let crossover_alpha = crossover(&series, config.crossover_slope);
    let mut used: Vec<&AlphaSeries> = series.iter().filter(|s| s.implied_dim.is_some()).collect();
    if used.is_empty() {
        let diagnostics = series
            .iter()
            .map(|s| {
                format!(
                    "alpha={} slope={:.4} r2={:.4}",
                    s.alpha, s.fit.slope, s.fit.r_squared
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::EstimationFailed {
            message: format!("no exponent has a growth slope inside [{lo}, {hi}]"),
            diagnostics,
        });
    }
    used.sort_by(|a, b| a.implied_dim.unwrap().total_cmp(&b.implied_dim.unwrap()));
    let m = used.len();
    let value = if m % 2 == 1 {
        used[m / 2].implied_dim.unwrap()
    } else {
        0.5 * (used[m / 2 - 1].implied_dim.unwrap() + used[m / 2].implied_dim.unwrap())
    };
    let median = used[(m - 1) / 2];
    let r_squared = used.iter().map(|s| s.fit.r_squared).fold(1.0, f64::min);
    let mut fit_points: Vec<(f64, f64)> = used.iter().map(|s| (s.alpha, s.fit.slope)).collect();
    fit_points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(DimensionEstimate {
        method: Method::Mst,
        value,
        fit_points,
        slope: median.fit.slope,
        r_squared,
        window: format!(
            "slope in [{lo}, {hi}] over n = {:?}",
            samples
                .chunks(replicates)
                .map(|g| g[0].n)
                .collect::<Vec<_>>()
        ),
        scales: Vec::new(),
        series,
        crossover_alpha,
    })
}

fn crossover(series: &[AlphaSeries], threshold: f64) -> Option<f64> {
    let idx = series.iter().position(|s| s.fit.slope < threshold)?;
    let hit = &series[idx];
    if idx == 0 {
        return Some(hit.alpha);
    }
    let prev = &series[idx - 1];
    let (s0, s1) = (prev.fit.slope, hit.fit.slope);
    let t = ((s0 - threshold) / (s0 - s1)).clamp(0.0, 1.0);
    Some(prev.alpha + t * (hit.alpha - prev.alpha))
}

/// Builds the MST over the centers of a greedy `eps`-packing and checks that
/// every edge exceeds `2 eps` and that `E_alpha >= (count - 1) (2 eps)^alpha`.
pub fn packing_lower_bound_check(
    cloud: &PointCloud,
    metric: &Metric,
    eps: f64,
    alpha: f64,
) -> Result<CheckReport> {
    if !(alpha > 0.0) {
        return Err(Error::input(format!("alpha must be positive, got {alpha}")));
    }
    let packing = greedy_packing(cloud, metric, eps)?;
    if packing.count < 2 {
        return Err(Error::input(format!(
            "packing at eps = {eps} has {} center(s); need at least 2",
            packing.count
        )));
    }
    let centers = cloud.select(&packing.center_indices);
    let tree = build_mst_prim(&centers, metric, 0)?;
    let sep = 2.0 * eps;
    let lengths = tree.sorted_lengths();
    let shortest = lengths[0];
    let value = energy_of_sorted(&lengths, alpha);
    let bound = (packing.count - 1) as f64 * sep.powf(alpha);
    let edges_ok = shortest > sep;
    let energy_ok = value >= bound;
    let mut report = CheckReport::new("packing-lower-bound");
    report
        .param("metric", metric.to_string())
        .param("n", cloud.len())
        .param("eps", eps)
        .param("alpha", alpha)
        .param("centers", packing.count);
    report.pass = edges_ok && energy_ok;
    report.min_slack = (shortest - sep).min(value - bound);
    report.details = vec![
        format!("shortest center MST edge {shortest} vs 2 eps = {sep}"),
        format!("E_alpha = {value} vs (count - 1)(2 eps)^alpha = {bound}"),
    ];
    Ok(report)
}
