//! The alpha-energy `E_alpha(T) = sum ||e||^alpha`, dyadic histograms of edge
//! lengths, and the closed-form bounds built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mst::SpanningTree;
use crate::record::ser_f64;

/// Energy of one tree at one exponent, with the dyadic decomposition of its
/// edge lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    #[serde(serialize_with = "ser_f64")]
    pub alpha: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_edge: f64,
    pub n: usize,
    /// `(k, count)` for edges with `2^(-k-1) < len <= 2^(-k)`, ascending `k`.
    pub bands: Vec<(u32, usize)>,
    /// Edges longer than 1.
    pub overflow: usize,
    pub zero_edges: usize,
}

impl EnergyReport {
    pub fn band_count(&self, k: u32) -> usize {
        self.bands
            .iter()
            .find(|(b, _)| *b == k)
            .map_or(0, |(_, c)| *c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("energy report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Index `k` with `2^(-k-1) < len <= 2^(-k)`, for `0 < len <= 1`.
pub fn dyadic_band(len: f64) -> u32 {
    debug_assert!(len > 0.0 && len <= 1.0);
    let mut k = (-len.log2()).floor().max(0.0) as i32;
    // log2 can be off by one ulp at exact powers of two.
    while k > 0 && len > 0.5f64.powi(k) {
        k -= 1;
    }
    while len <= 0.5f64.powi(k + 1) {
        k += 1;
    }
    k as u32
}

/// Sums `len^alpha` in ascending length order.
pub fn energy_of_sorted(sorted_lengths: &[f64], alpha: f64) -> f64 {
    sorted_lengths.iter().map(|l| l.powf(alpha)).sum()
}

/// `E_alpha(tree)`, summed in ascending edge-length order.
pub fn energy(tree: &SpanningTree, alpha: f64) -> Result<EnergyReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::input(format!(
            "alpha must be positive and finite, got {alpha}"
        )));
    }
    let lengths = tree.sorted_lengths();
    let value = energy_of_sorted(&lengths, alpha);
    let mut bands = BTreeMap::new();
    let mut overflow = 0;
    let mut zero_edges = 0;
    for &len in &lengths {
        if len == 0.0 {
            zero_edges += 1;
        } else if len > 1.0 {
            overflow += 1;
        } else {
            *bands.entry(dyadic_band(len)).or_insert(0usize) += 1;
        }
    }
    Ok(EnergyReport {
        alpha,
        value,
        max_edge: lengths.last().copied().unwrap_or(0.0),
        n: tree.n,
        bands: bands.into_iter().collect(),
        overflow,
        zero_edges,
    })
}

/// Number of edges strictly longer than `eps`.
pub fn count_edges_longer_than(tree: &SpanningTree, eps: f64) -> usize {
    tree.lengths().filter(|&l| l > eps).count()
}

/// `(c_abs sqrt(d))^alpha n^max(0, 1 - alpha/d)`.
pub fn energy_growth_bound(n: usize, dim: usize, alpha: f64, c_abs: f64) -> f64 {
    let d = dim as f64;
    (c_abs * d.sqrt()).powf(alpha) * (n as f64).powf((1.0 - alpha / d).max(0.0))
}

/// Both forms of the dyadic bound on `E_beta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicBound {
    /// `sum_k count_k 2^(-k beta)`, plus `overflow * max_edge^beta`.
    pub realized: f64,
    /// `C 2^alpha / (1 - 2^(alpha - beta))`, the geometric series with
    /// `count_k` replaced by the cap `C 2^((k+1) alpha)`.
    pub closed_form: f64,
    /// Smallest `C` for which every band obeys the cap.
    pub min_cap_const: f64,
    /// Whether `cap_const` caps every band.
    pub cap_holds: bool,
}

/// Evaluates the dyadic bound for exponent `beta` given the band counts of
/// `report` and a cap `count_k <= cap_const 2^((k+1) alpha_cap)`.
pub fn dyadic_energy_bound(
    report: &EnergyReport,
    alpha_cap: f64,
    beta: f64,
    cap_const: f64,
) -> Result<DyadicBound> {
    if !(beta > alpha_cap) {
        return Err(Error::input(format!(
            "beta ({beta}) must exceed alpha ({alpha_cap}) for the series to converge"
        )));
    }
    let realized = report
        .bands
        .iter()
        .map(|&(k, c)| c as f64 * 0.5f64.powi(k as i32).powf(beta))
        .sum::<f64>()
        + report.overflow as f64 * report.max_edge.powf(beta);
    let closed_form = cap_const * 2f64.powf(alpha_cap) / (1.0 - 2f64.powf(alpha_cap - beta));
    let min_cap_const = report
        .bands
        .iter()
        .map(|&(k, c)| c as f64 / 2f64.powf((k as f64 + 1.0) * alpha_cap))
        .fold(0.0, f64::max);
    Ok(DyadicBound {
        realized,
        closed_form,
        min_cap_const,
        cap_holds: report.overflow == 0 && min_cap_const <= cap_const,
    })
}
