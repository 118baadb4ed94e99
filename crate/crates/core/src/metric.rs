//! Distance oracles, including quasi-metrics that only satisfy the weak
//! triangle inequality `d(x,y) <= C (d(x,z) + d(z,y))`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Relative tolerance used for comparisons against declared constants.
pub const REL_TOL: f64 = 1e-9;

/// A pluggable distance oracle.
///
/// Every kind carries an analytically declared weak-triangle constant (see
/// [`Metric::weak_triangle_const`]); sampling can only falsify it.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `(sum |a_i - b_i|^p)^(1/p)` with `p >= 1`.
    Lp { p: f64 },
    /// `base(a, b)^theta` with `0 < theta <= 1`.
    Snowflake { base: Box<Metric>, theta: f64 },
    /// `base(a, b)^p` with `p >= 1`; a quasi-metric with constant `2^(p-1)`
    /// when the base is a metric.
    PowerQuasi { base: Box<Metric>, p: f64 },
    /// `base(a, b) / factor`. Produced by [`rescale_to_unit_diameter`] for
    /// kinds whose coordinates cannot simply be divided.
    Scaled { base: Box<Metric>, factor: f64 },
}

impl Metric {
    pub const L1: Metric = Metric::Lp { p: 1.0 };
    pub const L2: Metric = Metric::Lp { p: 2.0 };

    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::input(format!(
                "Lp exponent must be finite and >= 1, got {p}"
            )));
        }
        Ok(Metric::Lp { p })
    }

    pub fn snowflake(base: Metric, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::input(format!(
                "snowflake exponent must lie in (0, 1], got {theta}"
            )));
        }
        Ok(Metric::Snowflake {
            base: Box::new(base),
            theta,
        })
    }

    pub fn power_quasi(base: Metric, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::input(format!(
                "quasi-metric power must be finite and >= 1, got {p}"
            )));
        }
        Ok(Metric::PowerQuasi {
            base: Box::new(base),
            p,
        })
    }

    pub fn scaled(base: Metric, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::input(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Metric::Scaled {
            base: Box::new(base),
            factor,
        })
    }

    /// Declared constant `C_w` of the weak triangle inequality.
    ///
    /// A snowflake of a `C`-quasi-metric has constant `C^theta`; the `p`-th
    /// power of one has `C^p 2^(p-1)`. For metric bases these reduce to 1 and
    /// `2^(p-1)`.
    pub fn weak_triangle_const(&self) -> f64 {
        match self {
            Metric::Lp { .. } => 1.0,
            Metric::Snowflake { base, theta } => base.weak_triangle_const().powf(*theta),
            Metric::PowerQuasi { base, p } => {
                base.weak_triangle_const().powf(*p) * 2f64.powf(p - 1.0)
            }
            Metric::Scaled { base, .. } => base.weak_triangle_const(),
        }
    }

    /// True for plain Euclidean distance, where edge midpoints exist.
    pub fn is_euclidean(&self) -> bool {
        matches!(self, Metric::Lp { p } if *p == 2.0)
    }

    /// Distance between two points of equal dimension.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(self.eval(a, b))
    }

    /// Distance without the dimension check. Callers guarantee equal lengths.
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::Lp { p } => lp_distance(a, b, *p),
            Metric::Snowflake { base, theta } => base.eval(a, b).powf(*theta),
            Metric::PowerQuasi { base, p } => base.eval(a, b).powf(*p),
            Metric::Scaled { base, factor } => base.eval(a, b) / factor,
        }
    }

    /// Distance between points `i` and `j` of `cloud`.
    #[inline]
    pub fn between(&self, cloud: &PointCloud, i: usize, j: usize) -> f64 {
        self.eval(cloud.point(i), cloud.point(j))
    }
}

#[inline]
fn lp_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            let t = x - y;
            s += t * t;
        }
        s.sqrt()
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else {
        let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum();
        s.powf(p.recip())
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Lp { p } if *p == 1.0 => write!(f, "l1"),
            Metric::Lp { p } if *p == 2.0 => write!(f, "l2"),
            Metric::Lp { p } => write!(f, "lp:{p}"),
            Metric::Snowflake { base, theta } => write!(f, "snowflake:{theta}:{base}"),
            Metric::PowerQuasi { base, p } => write!(f, "powerquasi:{p}:{base}"),
            Metric::Scaled { base, factor } => write!(f, "scaled:{factor}:{base}"),
        }
    }
}

/// Parses `l1`, `l2`, `lp:<p>`, `snowflake:<theta>[:<base>]`,
/// `powerquasi:<p>[:<base>]` and `scaled:<factor>[:<base>]`. The base
/// defaults to `l2`.
impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        fn number<'a>(s: &str, text: Option<&'a str>) -> Result<(f64, Option<&'a str>)> {
            let text =
                text.ok_or_else(|| Error::input(format!("metric {s:?} needs a parameter")))?;
            let (num, tail) = match text.split_once(':') {
                Some((n, t)) => (n, Some(t)),
                None => (text, None),
            };
            let value = num
                .parse::<f64>()
                .map_err(|_| Error::input(format!("bad metric parameter {num:?} in {s:?}")))?;
            Ok((value, tail))
        }
        let base = |tail: Option<&str>| -> Result<Metric> {
            match tail {
                Some(t) => t.parse(),
                None => Ok(Metric::L2),
            }
        };
        match head.to_ascii_lowercase().as_str() {
            "l1" if rest.is_none() => Ok(Metric::L1),
            "l2" if rest.is_none() => Ok(Metric::L2),
            "lp" => {
                let (p, tail) = number(s, rest)?;
                if tail.is_some() {
                    return Err(Error::input(format!("trailing text in metric {s:?}")));
                }
                Metric::lp(p)
            }
            "snowflake" => {
                let (theta, tail) = number(s, rest)?;
                Metric::snowflake(base(tail)?, theta)
            }
            "powerquasi" => {
                let (p, tail) = number(s, rest)?;
                Metric::power_quasi(base(tail)?, p)
            }
            "scaled" => {
                let (factor, tail) = number(s, rest)?;
                Metric::scaled(base(tail)?, factor)
            }
            _ => Err(Error::input(format!("unknown metric {s:?}"))),
        }
    }
}

/// Outcome of sampling the weak triangle inequality.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiMetricReport {
    pub metric: String,
    pub trials: usize,
    /// Triples with a nonzero denominator, i.e. those that produced a ratio.
    pub evaluated: usize,
    pub max_ratio: f64,
    /// Indices `(x, y, z)` of the triple achieving `max_ratio`.
    pub witness: Option<[usize; 3]>,
    pub declared_const: f64,
    pub pass: bool,
}

/// Samples `trials` random triples of distinct points and records the largest
/// ratio `d(x,y) / (d(x,z) + d(z,y))`.
pub fn validate_quasi_metric(
    metric: &Metric,
    cloud: &PointCloud,
    trials: usize,
    seed: u64,
) -> Result<QuasiMetricReport> {
    if trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    let n = cloud.len();
    if n < 3 {
        return Err(Error::input(format!("need at least 3 points, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut witness = None;
    let mut evaluated = 0;
    for _ in 0..trials {
        let x = rng.gen_range(0..n);
        let y = loop {
            let y = rng.gen_range(0..n);
            if y != x {
                break y;
            }
        };
        let z = loop {
            let z = rng.gen_range(0..n);
            if z != x && z != y {
                break z;
            }
        };
        let num = metric.between(cloud, x, y);
        let den = metric.between(cloud, x, z) + metric.between(cloud, z, y);
        if den == 0.0 {
            continue;
        }
        evaluated += 1;
        let ratio = num / den;
        if ratio > max_ratio || witness.is_none() {
            max_ratio = ratio;
            witness = Some([x, y, z]);
        }
    }
    let declared_const = metric.weak_triangle_const();
    Ok(QuasiMetricReport {
        metric: metric.to_string(),
        trials,
        evaluated,
        max_ratio,
        witness,
        declared_const,
        pass: max_ratio <= declared_const * (1.0 + REL_TOL),
    })
}

/// Largest pairwise distance, `O(n^2)`.
pub fn diameter(cloud: &PointCloud, metric: &Metric) -> f64 {
    (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let a = cloud.point(i);
            (i + 1..cloud.len())
                .map(|j| metric.eval(a, cloud.point(j)))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// A cloud and metric under which the diameter is 1.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub cloud: PointCloud,
    pub metric: Metric,
    /// Original diameter; distances were divided by this.
    pub factor: f64,
}

/// Normalizes to unit diameter. `Lp` clouds get their coordinates divided;
/// every other kind is wrapped in [`Metric::Scaled`].
pub fn rescale_to_unit_diameter(cloud: &PointCloud, metric: &Metric) -> Result<Rescaled> {
    let factor = diameter(cloud, metric);
    if factor == 0.0 {
        return Err(Error::Degenerate(
            "cloud needs at least two distinct points to rescale".into(),
        ));
    }
    match metric {
        Metric::Lp { .. } => Ok(Rescaled {
            cloud: cloud.map_coords(|c| c / factor)?,
            metric: metric.clone(),
            factor,
        }),
        _ => Ok(Rescaled {
            cloud: cloud.clone(),
            metric: Metric::scaled(metric.clone(), factor)?,
            factor,
        }),
    }
}
