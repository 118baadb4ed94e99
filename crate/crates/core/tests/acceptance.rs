//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mstdim::dimension::{packing_lower_bound_check, AlphaSeries};
use mstdim::energy::energy_of_sorted;
use mstdim::generators::generate_uniform;
use mstdim::lemma_checks::{
    energy_growth_check, long_edge_separation_check, midpoint_ball_check, GrowthConfig,
};
use mstdim::metric::{diameter, validate_quasi_metric};
use mstdim::mst::{brute_force_min_tree, tree_total_length};
use mstdim::sweep::{rows_to_csv, run_sweep, SweepGrid};
use mstdim::{
    box_dimension, build_mst_kruskal, build_mst_prim, builtin_shape, mst_dimension, BoxWindow,
    DimensionEstimate, EpsSchedule, Metric, MstDimensionConfig, PointCloud, Shape,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail
        .push_str(&format!("; {:.2}s", elapsed.as_secs_f64()));
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail
                .push_str(&format!(" exceeds {}s", limit.as_secs()));
        }
    }
    out
}

fn small_clouds(count: usize, seed: u64) -> Vec<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(3..=7);
            let d = 1 + i % 3;
            generate_uniform(n, d, rng.gen()).unwrap()
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for cloud in small_clouds(200, 11) {
        let (_, best) = brute_force_min_tree(&cloud, &Metric::L2, 1.0).unwrap();
        let prim = tree_total_length(&build_mst_prim(&cloud, &Metric::L2, 0).unwrap());
        let kruskal = tree_total_length(&build_mst_kruskal(&cloud, &Metric::L2).unwrap());
        for total in [prim, kruskal] {
            worst = worst.max((total - best).abs() / best);
            if !rel_close(total, best, 1e-12) {
                mismatches += 1;
            }
        }
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("200 clouds, {mismatches} mismatches, worst relative gap {worst:e}"),
    }
}

fn energy_universality() -> Outcome {
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for cloud in small_clouds(100, 12) {
        let kruskal = build_mst_kruskal(&cloud, &Metric::L2).unwrap();
        let lengths = kruskal.sorted_lengths();
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let (_, best) = brute_force_min_tree(&cloud, &Metric::L2, alpha).unwrap();
            let e = energy_of_sorted(&lengths, alpha);
            worst = worst.max((e - best).abs() / best);
            if !rel_close(e, best, 1e-12) {
                mismatches += 1;
            }
        }
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!(
            "100 clouds x 4 exponents, {mismatches} mismatches, worst relative gap {worst:e}"
        ),
    }
}

fn midpoint_disjointness() -> Outcome {
    let mut failures = 0;
    let mut min_slack = f64::INFINITY;
    for i in 0..100u64 {
        let d = 2 + (i % 2) as usize;
        let cloud = generate_uniform(100, d, 1000 + i).unwrap();
        let tree = build_mst_prim(&cloud, &Metric::L2, 0).unwrap();
        let r = midpoint_ball_check(&cloud, &Metric::L2, &tree).unwrap();
        min_slack = min_slack.min(r.min_slack);
        failures += usize::from(!r.pass);
    }
    Outcome {
        pass: failures == 0,
        detail: format!("100 trees, {failures} with violations, min slack {min_slack:.3e}"),
    }
}

fn last_entered_separation() -> Outcome {
    let mut clouds: Vec<(String, PointCloud)> = Vec::new();
    for seed in 0..3 {
        for d in [2, 3] {
            clouds.push((
                format!("uniform d={d} seed={seed}"),
                generate_uniform(500, d, 20 + seed).unwrap(),
            ));
        }
    }
    clouds.push((
        "cantor depth 8".into(),
        builtin_shape(Shape::Cantor, 8, 0, 0).unwrap().cloud,
    ));
    clouds.push((
        "sierpinski depth 6".into(),
        builtin_shape(Shape::SierpinskiTriangle, 6, 0, 0)
            .unwrap()
            .cloud,
    ));
    let metrics = [Metric::L2, Metric::power_quasi(Metric::L2, 2.0).unwrap()];
    let mut checks = 0;
    let mut failed = Vec::new();
    let mut min_slack = f64::INFINITY;
    for metric in &metrics {
        for (name, cloud) in &clouds {
            let tree = build_mst_prim(cloud, metric, 0).unwrap();
            for k in 1..=8 {
                let eps = 0.5f64.powi(k);
                let r = long_edge_separation_check(cloud, metric, &tree, eps).unwrap();
                checks += 1;
                if r.min_slack.is_finite() {
                    min_slack = min_slack.min(r.min_slack);
                }
                if !r.pass {
                    failed.push(format!("{name} {metric} eps=2^-{k}"));
                }
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "{checks} checks (l2 and powerquasi:2), failures {failed:?}, min slack {min_slack:.3e}"
        ),
    }
}

fn growth_sweep() -> GrowthConfig {
    GrowthConfig::uniform(
        2,
        vec![1.0, 3.0],
        (8..=14).map(|k| 1usize << k).collect(),
        (1..=5).collect(),
    )
}

fn growing_case(report: &mstdim::lemma_checks::GrowthReport) -> Outcome {
    let s = report.summary(1.0).unwrap();
    let slope_ok = (0.43..=0.57).contains(&s.fit.slope);
    let trend_ok = s.last_third_mean <= 1.1 * s.first_third_mean;
    Outcome {
        pass: slope_ok && trend_ok,
        detail: format!(
            "slope {:.4} (want [0.43, 0.57]); c_hat first-third {:.4}, last-third {:.4}, max {:.4}",
            s.fit.slope, s.first_third_mean, s.last_third_mean, s.max_c_hat
        ),
    }
}

fn bounded_case(report: &mstdim::lemma_checks::GrowthReport) -> Outcome {
    let s = report.summary(3.0).unwrap();
    Outcome {
        pass: (-0.1..=0.1).contains(&s.fit.slope),
        detail: format!("slope {:.4} (want [-0.1, 0.1])", s.fit.slope),
    }
}

struct ShapeCase {
    shape: Shape,
    box_size: usize,
    target: f64,
    tol: f64,
    mst_sizes: Vec<usize>,
}

fn shape_cases() -> Vec<ShapeCase> {
    vec![
        ShapeCase {
            shape: Shape::Grid,
            box_size: 64,
            target: 2.0,
            tol: 0.05,
            mst_sizes: vec![8, 16, 32, 64, 128],
        },
        ShapeCase {
            shape: Shape::Cantor,
            box_size: 9,
            target: 2f64.ln() / 3f64.ln(),
            tol: 0.05,
            mst_sizes: vec![6, 8, 10, 12, 14],
        },
        ShapeCase {
            shape: Shape::SierpinskiTriangle,
            box_size: 7,
            target: 3f64.ln() / 2f64.ln(),
            tol: 0.07,
            mst_sizes: vec![3, 4, 5, 6, 7, 8],
        },
        ShapeCase {
            shape: Shape::SierpinskiCarpet,
            box_size: 5,
            target: 8f64.ln() / 3f64.ln(),
            tol: 0.08,
            mst_sizes: vec![1, 2, 3, 4, 5],
        },
    ]
}

fn box_estimates(cases: &[ShapeCase]) -> (Vec<Option<DimensionEstimate>>, Outcome) {
    let mut ests = Vec::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for c in cases {
        let cloud = builtin_shape(c.shape, c.box_size, 2, 0).unwrap().cloud;
        match box_dimension(
            &cloud,
            &Metric::L2,
            &EpsSchedule::default(),
            &BoxWindow::default(),
        ) {
            Ok(e) => {
                let ok = (e.value - c.target).abs() <= c.tol;
                pass &= ok;
                parts.push(format!(
                    "{} {:.4} (want {:.3} +- {}) {}",
                    c.shape,
                    e.value,
                    c.target,
                    c.tol,
                    if ok { "ok" } else { "off" }
                ));
                ests.push(Some(e));
            }
            Err(err) => {
                pass = false;
                parts.push(format!("{} error: {err}", c.shape));
                ests.push(None);
            }
        }
    }
    (
        ests,
        Outcome {
            pass,
            detail: parts.join("; "),
        },
    )
}

fn spans_two_decades(series: &[AlphaSeries]) -> bool {
    series.first().is_some_and(|s| {
        let (lo, hi) = (s.points.first().unwrap().0, s.points.last().unwrap().0);
        hi - lo >= 2.0 * 10f64.ln()
    })
}

fn mst_matches_box(cases: &[ShapeCase], boxes: &[Option<DimensionEstimate>]) -> Outcome {
    let alphas = MstDimensionConfig::alpha_grid(0.1, 3.0);
    let mut parts = Vec::new();
    let mut pass = true;
    for (c, b) in cases.iter().zip(boxes) {
        let cfg = MstDimensionConfig::new(c.mst_sizes.clone(), alphas.clone(), 1);
        match (mst_dimension(c.shape, 2, &Metric::L2, &cfg), b) {
            (Ok(m), Some(b)) => {
                let gap = (m.value - b.value).abs();
                let ok = gap <= 0.1 && spans_two_decades(&m.series);
                pass &= ok;
                parts.push(format!(
                    "{} mst {:.4} box {:.4} gap {:.4} {}",
                    c.shape,
                    m.value,
                    b.value,
                    gap,
                    if ok { "ok" } else { "off" }
                ));
            }
            (Err(err), _) => {
                pass = false;
                parts.push(format!("{} mst error: {err}", c.shape));
            }
            (_, None) => {
                pass = false;
                parts.push(format!("{} has no box estimate", c.shape));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn packing_lower_bound(cases: &[ShapeCase]) -> Outcome {
    let mut checks = 0;
    let mut failed = Vec::new();
    for c in cases {
        let cloud = builtin_shape(c.shape, c.box_size, 2, 0).unwrap().cloud;
        let diam = diameter(&cloud, &Metric::L2);
        for k in 2..=4 {
            let eps = diam * 0.5f64.powi(k);
            let r = packing_lower_bound_check(&cloud, &Metric::L2, eps, 1.0).unwrap();
            checks += 1;
            if !r.pass {
                failed.push(format!("{} eps=diam*2^-{k}", c.shape));
            }
        }
    }
    Outcome {
        pass: failed.is_empty(),
        detail: format!("{checks} checks, failures {failed:?}"),
    }
}

fn quasi_metric() -> Outcome {
    let interval = builtin_shape(Shape::Interval, 4096, 1, 0).unwrap().cloud;
    let snow = Metric::snowflake(Metric::L2, 0.5).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    let boxed = box_dimension(
        &interval,
        &snow,
        &EpsSchedule::default(),
        &BoxWindow::default(),
    );
    match &boxed {
        Ok(b) => {
            let ok = (b.value - 2.0).abs() <= 0.1;
            pass &= ok;
            parts.push(format!(
                "snowflake box {:.4} {}",
                b.value,
                if ok { "ok" } else { "off" }
            ));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("snowflake box error: {e}"));
        }
    }
    let cfg = MstDimensionConfig::new(
        vec![64, 256, 1024, 4096],
        MstDimensionConfig::alpha_grid(0.1, 3.0),
        1,
    );
    match (mst_dimension(Shape::Interval, 1, &snow, &cfg), &boxed) {
        (Ok(m), Ok(b)) => {
            let ok = (m.value - b.value).abs() <= 0.15;
            pass &= ok;
            parts.push(format!(
                "snowflake mst {:.4} {}",
                m.value,
                if ok { "ok" } else { "off" }
            ));
        }
        (Err(e), _) => {
            pass = false;
            parts.push(format!("snowflake mst error: {e}"));
        }
        _ => pass = false,
    }
    let pq = Metric::power_quasi(Metric::L2, 2.0).unwrap();
    let v = validate_quasi_metric(&pq, &interval, 20_000, 5).unwrap();
    let ok = v.max_ratio <= 2.0 && v.max_ratio >= 1.9 && v.witness.is_some();
    pass &= ok;
    parts.push(format!(
        "powerquasi:2 max ratio {:.6} witness {:?} {}",
        v.max_ratio,
        v.witness,
        if ok { "ok" } else { "off" }
    ));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn determinism() -> Outcome {
    let grid = SweepGrid {
        shape: Shape::UniformCube,
        dim: 2,
        metric: Metric::L2,
        sizes: (8..=12).map(|k| 1usize << k).collect(),
        alphas: vec![1.0, 3.0],
        seeds: (1..=5).collect(),
    };
    let a = rows_to_csv(&run_sweep(&grid).unwrap());
    let b = rows_to_csv(&run_sweep(&grid).unwrap());
    let cantor = builtin_shape(Shape::Cantor, 9, 1, 0).unwrap().cloud;
    let est = || {
        box_dimension(
            &cantor,
            &Metric::L2,
            &EpsSchedule::default(),
            &BoxWindow::default(),
        )
        .unwrap()
        .to_json()
    };
    let t1 = || {
        serde_json::to_string(
            &energy_growth_check(&GrowthConfig::uniform(
                2,
                vec![1.0],
                vec![256, 512],
                vec![1, 2],
            ))
            .unwrap(),
        )
        .unwrap()
    };
    let same_csv = a == b;
    let same_json = est() == est() && t1() == t1();
    Outcome {
        pass: same_csv && same_json,
        detail: format!(
            "sweep csv {} bytes identical: {same_csv}; estimate records identical: {same_json}",
            a.len()
        ),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let secs = |s| Some(Duration::from_secs(s));

    results.push((
        1,
        "MST oracle equivalence",
        timed(secs(10), oracle_equivalence),
    ));
    results.push((
        2,
        "energy-minimizer universality",
        timed(secs(20), energy_universality),
    ));
    results.push((
        3,
        "midpoint ball disjointness",
        timed(None, midpoint_disjointness),
    ));
    results.push((
        4,
        "last-entered endpoint separation",
        timed(None, last_entered_separation),
    ));

    let start = Instant::now();
    let sweep = energy_growth_check(&growth_sweep()).expect("growth sweep runs");
    let sweep_time = start.elapsed();
    let mut grow = growing_case(&sweep);
    grow.detail
        .push_str(&format!("; {:.2}s", sweep_time.as_secs_f64()));
    if sweep_time > Duration::from_secs(60) {
        grow.pass = false;
        grow.detail.push_str(" exceeds 60s");
    }
    results.push((5, "energy growth exponent, alpha < d", grow));
    results.push((6, "energy growth exponent, alpha > d", bounded_case(&sweep)));

    let cases = shape_cases();
    let start = Instant::now();
    let (boxes, mut box_out) = box_estimates(&cases);
    let box_time = start.elapsed();
    box_out
        .detail
        .push_str(&format!("; {:.2}s", box_time.as_secs_f64()));
    if box_time > Duration::from_secs(60) {
        box_out.pass = false;
        box_out.detail.push_str(" exceeds 60s");
    }
    results.push((7, "box dimension reproduction", box_out));
    results.push((
        8,
        "MST dimension matches box dimension",
        timed(None, || mst_matches_box(&cases, &boxes)),
    ));
    results.push((
        9,
        "packing lower bound",
        timed(None, || packing_lower_bound(&cases)),
    ));
    results.push((10, "quasi-metric dimensions", timed(None, quasi_metric)));
    results.push((11, "determinism", timed(None, determinism)));

    let mut failures = 0;
    for (id, name, out) in &results {
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id:>2}: {name}: {}", out.detail);
        failures += usize::from(!out.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failures,
        results.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
