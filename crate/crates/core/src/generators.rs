//! Point-cloud generators: uniform samples, lattices and deterministic
//! finite-depth approximants of self-similar fractals with known dimension.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Largest cloud any generator will produce unless told otherwise.
pub const DEFAULT_POINT_BUDGET: usize = 1_000_000;

/// `n` i.i.d. uniform points in `[0,1)^d`.
pub fn generate_uniform(n: usize, dim: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 || dim == 0 {
        return Err(Error::input("uniform sample needs n >= 1 and d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    PointCloud::from_flat(dim, coords)
}

pub fn generate_grid(side: usize, dim: usize) -> Result<PointCloud> {
    generate_grid_with_budget(side, dim, DEFAULT_POINT_BUDGET)
}

/// The lattice `{0, 1/(side-1), ..., 1}^d` in row-major order (last
/// coordinate varies fastest).
pub fn generate_grid_with_budget(side: usize, dim: usize, budget: usize) -> Result<PointCloud> {
    if side < 2 || dim == 0 {
        return Err(Error::input("grid needs side >= 2 and d >= 1"));
    }
    let n = u32::try_from(dim)
        .ok()
        .and_then(|d| side.checked_pow(d))
        .filter(|&n| n <= budget)
        .ok_or_else(|| {
            Error::Resource(format!(
                "grid {side}^{dim} exceeds the point budget of {budget}"
            ))
        })?;
    let step = (side - 1) as f64;
    let mut coords = Vec::with_capacity(n * dim);
    let mut digits = vec![0usize; dim];
    for _ in 0..n {
        coords.extend(digits.iter().map(|&j| j as f64 / step));
        for k in (0..dim).rev() {
            digits[k] += 1;
            if digits[k] < side {
                break;
            }
            digits[k] = 0;
        }
    }
    PointCloud::from_flat(dim, coords)
}

/// `x -> ratio * R x + offset`, with `R` orthogonal (identity when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    pub offset: Vec<f64>,
    /// Row-major `d x d` orthogonal matrix.
    pub rotation: Option<Vec<f64>>,
}

impl Similarity {
    pub fn new(ratio: f64, offset: Vec<f64>) -> Self {
        Similarity {
            ratio,
            offset,
            rotation: None,
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        let d = x.len();
        match &self.rotation {
            None => out.extend(
                x.iter()
                    .zip(&self.offset)
                    .map(|(xi, o)| self.ratio * xi + o),
            ),
            Some(rot) => {
                for i in 0..d {
                    let row = &rot[i * d..(i + 1) * d];
                    let rx: f64 = row.iter().zip(x).map(|(r, xj)| r * xj).sum();
                    out.push(self.ratio * rx + self.offset[i]);
                }
            }
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        self.apply_into(x, &mut out);
        out
    }
}

/// A finite family of contracting similarities mapping the unit cube into
/// itself.
#[derive(Debug, Clone)]
pub struct IfsSystem {
    maps: Vec<Similarity>,
    dim: usize,
    similarity_dim: f64,
}

const CUBE_TOL: f64 = 1e-12;

impl IfsSystem {
    pub fn new(dim: usize, maps: Vec<Similarity>) -> Result<Self> {
        if dim == 0 || maps.is_empty() {
            return Err(Error::input("IFS needs d >= 1 and at least one map"));
        }
        for (i, m) in maps.iter().enumerate() {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::input(format!(
                    "map {i}: ratio {} not in (0, 1)",
                    m.ratio
                )));
            }
            if m.offset.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.offset.len(),
                });
            }
            if let Some(rot) = &m.rotation {
                check_orthogonal(rot, dim).map_err(|e| Error::input(format!("map {i}: {e}")))?;
            }
            // The cube is convex, so checking its corners suffices.
            for mask in 0..(1usize << dim) {
                let corner: Vec<f64> = (0..dim).map(|k| ((mask >> k) & 1) as f64).collect();
                let image = m.apply(&corner);
                if image
                    .iter()
                    .any(|&c| !(-CUBE_TOL..=1.0 + CUBE_TOL).contains(&c))
                {
                    return Err(Error::input(format!(
                        "map {i} sends corner {corner:?} outside the unit cube"
                    )));
                }
            }
        }
        let ratios: Vec<f64> = maps.iter().map(|m| m.ratio).collect();
        let similarity_dim = solve_similarity_dimension(&ratios, dim)?;
        Ok(IfsSystem {
            maps,
            dim,
            similarity_dim,
        })
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The exponent `s` with `sum ratio_i^s = 1`.
    pub fn similarity_dim(&self) -> f64 {
        self.similarity_dim
    }

    /// Fixed point of the first map, found by iterating it from the origin.
    pub fn base_point(&self) -> Vec<f64> {
        let f = &self.maps[0];
        let mut x = vec![0.0; self.dim];
        for _ in 0..10_000 {
            let next = f.apply(&x);
            if next == x {
                break;
            }
            x = next;
        }
        x
    }

    /// Cantor middle-thirds set on `[0,1]`.
    pub fn cantor() -> Self {
        Self::new(
            1,
            vec![
                Similarity::new(1.0 / 3.0, vec![0.0]),
                Similarity::new(1.0 / 3.0, vec![2.0 / 3.0]),
            ],
        )
        .expect("valid system")
    }

    /// Product of two Cantor sets in the unit square.
    pub fn cantor_dust() -> Self {
        let t = 2.0 / 3.0;
        let maps = [[0.0, 0.0], [t, 0.0], [0.0, t], [t, t]]
            .into_iter()
            .map(|o| Similarity::new(1.0 / 3.0, o.to_vec()))
            .collect();
        Self::new(2, maps).expect("valid system")
    }

    /// Sierpinski triangle on the vertices `(0,0)`, `(1,0)`, `(1/2,1)`.
    pub fn sierpinski_triangle() -> Self {
        let maps = [[0.0, 0.0], [0.5, 0.0], [0.25, 0.5]]
            .into_iter()
            .map(|o| Similarity::new(0.5, o.to_vec()))
            .collect();
        Self::new(2, maps).expect("valid system")
    }

    /// Sierpinski carpet: the eight outer cells of the 3x3 subdivision.
    pub fn sierpinski_carpet() -> Self {
        let mut maps = Vec::with_capacity(8);
        for i in 0..3 {
            for j in 0..3 {
                if i == 1 && j == 1 {
                    continue;
                }
                maps.push(Similarity::new(
                    1.0 / 3.0,
                    vec![i as f64 / 3.0, j as f64 / 3.0],
                ));
            }
        }
        Self::new(2, maps).expect("valid system")
    }
}

fn check_orthogonal(rot: &[f64], dim: usize) -> std::result::Result<(), String> {
    if rot.len() != dim * dim {
        return Err(format!(
            "rotation has {} entries, expected {}",
            rot.len(),
            dim * dim
        ));
    }
    for i in 0..dim {
        for j in 0..dim {
            let dot: f64 = (0..dim).map(|k| rot[i * dim + k] * rot[j * dim + k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-9 {
                return Err("rotation is not orthogonal".into());
            }
        }
    }
    Ok(())
}

/// Solves `sum r_i^s = 1` by bisection on `s in (0, 2d]`.
pub fn solve_similarity_dimension(ratios: &[f64], dim: usize) -> Result<f64> {
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 2.0 * dim as f64);
    if f(hi) > 0.0 {
        return Err(Error::input(format!(
            "similarity dimension exceeds {hi}: the maps overlap too much"
        )));
    }
    if ratios.len() < 2 {
        return Err(Error::input(
            "a single contraction has a one-point attractor",
        ));
    }
    // f is strictly decreasing with f(0) = m - 1 > 0.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    Ok(s)
}

pub fn generate_ifs_depth(system: &IfsSystem, depth: usize) -> Result<PointCloud> {
    generate_ifs_depth_with_budget(system, depth, DEFAULT_POINT_BUDGET)
}

/// Images of the base point under every composition of `depth` maps,
/// sorted lexicographically with exact duplicates removed.
pub fn generate_ifs_depth_with_budget(
    system: &IfsSystem,
    depth: usize,
    budget: usize,
) -> Result<PointCloud> {
    let m = system.maps.len();
    let count = u32::try_from(depth)
        .ok()
        .and_then(|k| m.checked_pow(k))
        .filter(|&c| c <= budget)
        .ok_or_else(|| {
            Error::Resource(format!(
                "{m}^{depth} compositions exceed the point budget of {budget}"
            ))
        })?;
    let dim = system.dim;
    let mut level = system.base_point();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * m);
        for f in &system.maps {
            for p in level.chunks_exact(dim) {
                f.apply_into(p, &mut next);
            }
        }
        level = next;
    }
    debug_assert_eq!(level.len(), count * dim);
    let mut points: Vec<&[f64]> = level.chunks_exact(dim).collect();
    points.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    });
    let coords = points.concat();
    PointCloud::from_flat(dim, coords)
}

/// The named test shapes shipped with the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    UniformCube,
    Grid,
    Cantor,
    CantorDust,
    SierpinskiTriangle,
    SierpinskiCarpet,
    Interval,
}

impl Shape {
    pub const ALL: [Shape; 7] = [
        Shape::UniformCube,
        Shape::Grid,
        Shape::Cantor,
        Shape::CantorDust,
        Shape::SierpinskiTriangle,
        Shape::SierpinskiCarpet,
        Shape::Interval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::UniformCube => "uniform-cube",
            Shape::Grid => "grid",
            Shape::Cantor => "cantor",
            Shape::CantorDust => "cantor-dust",
            Shape::SierpinskiTriangle => "sierpinski-triangle",
            Shape::SierpinskiCarpet => "sierpinski-carpet",
            Shape::Interval => "interval",
        }
    }

    /// Only the uniform sample depends on the seed.
    pub fn is_random(self) -> bool {
        matches!(self, Shape::UniformCube)
    }

    /// The IFS behind fractal shapes.
    pub fn ifs(self) -> Option<IfsSystem> {
        match self {
            Shape::Cantor => Some(IfsSystem::cantor()),
            Shape::CantorDust => Some(IfsSystem::cantor_dust()),
            Shape::SierpinskiTriangle => Some(IfsSystem::sierpinski_triangle()),
            Shape::SierpinskiCarpet => Some(IfsSystem::sierpinski_carpet()),
            _ => None,
        }
    }

    /// Ambient dimension: fixed for fractals and the interval, `dim` otherwise.
    pub fn ambient_dim(self, dim: usize) -> usize {
        match self {
            Shape::UniformCube | Shape::Grid => dim,
            Shape::Cantor | Shape::Interval => 1,
            Shape::CantorDust | Shape::SierpinskiTriangle | Shape::SierpinskiCarpet => 2,
        }
    }

    /// What the size parameter of [`builtin_shape`] means for this shape.
    pub fn size_meaning(self) -> &'static str {
        match self {
            Shape::UniformCube | Shape::Interval => "number of points",
            Shape::Grid => "points per side",
            _ => "composition depth",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Shape::ALL.iter().map(|s| s.name()).collect();
                Error::input(format!(
                    "unknown shape {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// A generated cloud plus the analytic dimension of the shape it samples.
///
/// `known_dim` is ground truth for reporting only; estimators never read it.
#[derive(Debug, Clone)]
pub struct ShapeSample {
    pub cloud: PointCloud,
    pub known_dim: Option<f64>,
}

/// Generates a named shape.
///
/// `size` is the point count for `uniform-cube` and `interval`, the side
/// length for `grid`, and the composition depth for the fractals. `dim` is
/// only used by `uniform-cube` and `grid`; `seed` only by `uniform-cube`.
pub fn builtin_shape(shape: Shape, size: usize, dim: usize, seed: u64) -> Result<ShapeSample> {
    builtin_shape_with_budget(shape, size, dim, seed, DEFAULT_POINT_BUDGET)
}

pub fn builtin_shape_with_budget(
    shape: Shape,
    size: usize,
    dim: usize,
    seed: u64,
    budget: usize,
) -> Result<ShapeSample> {
    let (cloud, known_dim) = match shape {
        Shape::UniformCube => {
            if size > budget {
                return Err(Error::Resource(format!(
                    "{size} points exceed the point budget of {budget}"
                )));
            }
            (generate_uniform(size, dim, seed)?, Some(dim as f64))
        }
        Shape::Grid => (
            generate_grid_with_budget(size, dim, budget)?,
            Some(dim as f64),
        ),
        Shape::Interval => (generate_grid_with_budget(size, 1, budget)?, Some(1.0)),
        fractal => {
            let ifs = fractal.ifs().expect("fractal shapes carry an IFS");
            let cloud = generate_ifs_depth_with_budget(&ifs, size, budget)?;
            (cloud, Some(ifs.similarity_dim()))
        }
    };
    Ok(ShapeSample { cloud, known_dim })
}
