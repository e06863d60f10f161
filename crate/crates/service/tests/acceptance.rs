//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Oracles here are written independently of the library
//! (brute-force circumcircle checks, monotone-chain hulls, hand-rolled
//! inverse-distance blends).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use dribbleforge::api::{router, AppState};
use dribbleforge_core::atlas::{AnchorPlan, FieldAtlas, ObstacleFrame};
use dribbleforge_core::document::{parse_plan, plan_to_json, RunReport};
use dribbleforge_core::evolution::{
    crossover_pair, evolve, mutate, select_parents, survivor_select, Encoding, EvolutionResult,
    FitnessConfig, GaConfig, Individual, SelectionMethod,
};
use dribbleforge_core::fixtures;
use dribbleforge_core::geometry::{idw_interpolate, triangulate, Location, Point2};
use dribbleforge_core::plan::{NodeEdit, NodeParams, PlanNode, TrajectoryPlan};
use dribbleforge_core::simulation::{simulate, trace_metrics, SimConfig};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dist(a: Point2, b: Point2) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain; counts strict hull vertices.
fn hull_size(points: &[Point2]) -> usize {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut hull: Vec<Point2> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        for &p in &pts {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
        if pass == 0 {
            pts.reverse();
        }
    }
    hull.len()
}

/// Circumcircle containment evaluated from the explicit circumcenter.
fn strictly_in_circumcircle(a: Point2, b: Point2, c: Point2, p: Point2, tol: f64) -> bool {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let a2 = a.x * a.x + a.y * a.y;
    let b2 = b.x * b.x + b.y * b.y;
    let c2 = c.x * c.x + c.y * c.y;
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    dist(center, p) < dist(center, a) - tol
}

fn manual_idw(corners: [Point2; 3], values: [f64; 3], q: Point2) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..3 {
        let d = dist(corners[k], q);
        if d < 1e-9 {
            return values[k];
        }
        num += values[k] / d;
        den += 1.0 / d;
    }
    num / den
}

/// Triangle containing `q` by barycentric sign test over every triangle.
fn brute_locate(plan: &TrajectoryPlan, q: Point2) -> Option<[usize; 3]> {
    let v = plan.triangulation().vertices();
    plan.triangulation()
        .triangles()
        .iter()
        .copied()
        .find(|&[a, b, c]| {
            cross(v[a], v[b], q) >= -1e-12
                && cross(v[b], v[c], q) >= -1e-12
                && cross(v[c], v[a], q) >= -1e-12
        })
}

fn reference_ga(seed: u64, generations: usize) -> GaConfig {
    GaConfig {
        population_size: 40,
        generation_count: generations,
        crossover_probability: 0.8,
        parent_selection_probability: 0.6,
        selection_method: SelectionMethod::Roulette,
        mutation_coefficient: 4.0,
        rng_seed: seed,
        ..GaConfig::default()
    }
}

fn reference_fitness() -> FitnessConfig {
    FitnessConfig {
        alpha_user: 0.66,
        beta_user: 0.33,
        rho: PI,
        ..FitnessConfig::default()
    }
}

fn optimized_run(seed: u64) -> EvolutionResult {
    evolve(
        &fixtures::seed_plan(),
        &reference_ga(seed, 200),
        &reference_fitness(),
    )
    .expect("evolve")
}

fn delaunay_correctness() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    let mut triangles = 0;
    for set in 0..100 {
        let n = rng.random_range(5..=40);
        let points: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
            .collect();
        let tri = triangulate(&points).map_err(|e| format!("set {set}: {e}"))?;
        let h = hull_size(&points);
        check(tri.len() == 2 * n - h - 2, || {
            format!(
                "set {set}: {} triangles, expected {}",
                tri.len(),
                2 * n - h - 2
            )
        })?;
        for &[a, b, c] in tri.triangles() {
            for (v, &p) in points.iter().enumerate() {
                if ![a, b, c].contains(&v)
                    && strictly_in_circumcircle(points[a], points[b], points[c], p, 1e-9)
                {
                    violations += 1;
                }
            }
        }
        triangles += tri.len();
    }
    let elapsed = started.elapsed();
    check(violations == 0, || {
        format!("{violations} empty-circumcircle violations")
    })?;
    check(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "100 sets, {triangles} triangles, 0 violations, counts = 2n-h-2, {elapsed:.2?}"
    ))
}

fn interpolation() -> Outcome {
    let plan = fixtures::seed_plan();
    for node in plan.nodes() {
        let got = plan.query(node.position).to_array();
        let want = node.params.to_array();
        check(
            got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-12),
            || format!("vertex {} not reproduced", node.position),
        )?;
    }

    // circumcenter of an acute triangle is equidistant from its corners
    let corners = [
        Point2::new(0.0, 0.0),
        Point2::new(4.0, 0.5),
        Point2::new(1.5, 3.5),
    ];
    let values = [0.3, -1.1, 2.9];
    let a = corners[0];
    let (b, c) = (corners[1], corners[2]);
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let sq = |p: Point2| p.x * p.x + p.y * p.y;
    let center = Point2::new(
        (sq(a) * (b.y - c.y) + sq(b) * (c.y - a.y) + sq(c) * (a.y - b.y)) / d,
        (sq(a) * (c.x - b.x) + sq(b) * (a.x - c.x) + sq(c) * (b.x - a.x)) / d,
    );
    let mean = values.iter().sum::<f64>() / 3.0;
    let sym = idw_interpolate(corners, values, center);
    check((sym - mean).abs() <= 1e-12, || {
        format!("equidistant point gave {sym}, mean {mean}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let k = 4;
    let edited = plan
        .edit(NodeEdit::Update {
            index: k,
            node: PlanNode::new(plan.nodes()[k].position, NodeParams::new(0.1, -1.2, 1.3)),
        })
        .map_err(|e| e.to_string())?;
    let tri = plan.triangulation();
    let (mut outside, mut changed_inside) = (0, 0);
    for _ in 0..1000 {
        let q = Point2::new(rng.random_range(-12.0..12.0), rng.random_range(-9.0..9.0));
        let Location::Triangle(t) = tri.locate(q) else {
            continue;
        };
        let (x, y) = (plan.query(q).to_array(), edited.query(q).to_array());
        let same = x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-12);
        if tri.triangles()[t].contains(&k) {
            changed_inside += usize::from(!same);
        } else {
            outside += 1;
            check(same, || {
                format!("query {q} outside the incident triangles changed")
            })?;
        }
    }
    Ok(format!(
        "25 vertices exact, equidistant mean |err| {:.1e}, {outside} outside queries unchanged ({changed_inside} inside changed)",
        (sym - mean).abs()
    ))
}

fn ga_operators() -> Outcome {
    let plan = fixtures::seed_plan();
    let enc = Encoding::for_plan(&plan);
    let n = enc.genes().len();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random_ind = |rng: &mut ChaCha8Rng| {
        Individual::new(
            enc.genes()
                .iter()
                .map(|g| rng.random_range(g.min..=g.max))
                .collect(),
        )
    };
    for i in 0..10_000 {
        let (a, b) = (random_ind(&mut rng), random_ind(&mut rng));
        let (c1, c2) = crossover_pair(&a, &b, &mut rng).map_err(|e| e.to_string())?;
        for k in 0..n {
            let (lo, hi) = (a.params[k].min(b.params[k]), a.params[k].max(b.params[k]));
            for c in [&c1, &c2] {
                check(c.params[k] >= lo && c.params[k] <= hi, || {
                    format!("crossover {i} gene {k} escaped")
                })?;
            }
        }
    }
    let mut worst_ratio: f64 = 0.0;
    for i in 0..10_000 {
        let a = random_ind(&mut rng);
        let m = mutate(&a, &enc, 4.0, &mut rng);
        for k in 0..n {
            let max_bound = if k % 3 == 0 {
                plan.limits().max_acceleration
            } else {
                PI
            };
            let ratio = (m.params[k] - a.params[k]).abs() / max_bound;
            worst_ratio = worst_ratio.max(ratio);
            check(ratio <= 0.04 + 1e-12, || {
                format!("mutation {i} gene {k}: |delta| = {ratio} of max")
            })?;
        }
    }

    check(survivor_select(&[5.0, 3.0, 9.0], 2) == vec![2, 0], || {
        "top-2 of [5,3,9]".into()
    })?;
    check(
        survivor_select(&[2.0, 7.0, 2.0, 7.0, 1.0], 3) == vec![1, 3, 0],
        || "tie-break keeps lower index".into(),
    )?;
    check(survivor_select(&[1.0; 6], 4) == vec![0, 1, 2, 3], || {
        "equal fitnesses keep order".into()
    })?;

    let picks = select_parents(
        &[3.0, 1.0],
        SelectionMethod::Roulette,
        0.6,
        10_000,
        &mut rng,
    )
    .map_err(|e| e.to_string())?;
    let share = picks.iter().filter(|&&i| i == 0).count() as f64 / 10_000.0;
    check((share - 0.75).abs() <= 0.02, || {
        format!("roulette share {share}")
    })?;
    for size in [2, 13, 40] {
        let mut sus = select_parents(&vec![1.0; size], SelectionMethod::Sus, 0.6, size, &mut rng)
            .map_err(|e| e.to_string())?;
        sus.sort_unstable();
        check(sus == (0..size).collect::<Vec<_>>(), || {
            format!("SUS size {size}: {sus:?}")
        })?;
    }
    Ok(format!(
        "1e4 crossovers in bounds, 1e4 mutations max |delta| {:.2}% of bound, roulette [3,1] -> {share:.4}, SUS exact",
        worst_ratio * 100.0
    ))
}

fn elitism_and_determinism() -> Outcome {
    let started = Instant::now();
    let (ga, fit) = (reference_ga(1, 200), reference_fitness());
    let a = evolve(&fixtures::seed_plan(), &ga, &fit).map_err(|e| e.to_string())?;
    let b = evolve(&fixtures::seed_plan(), &ga, &fit).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check(a.history.len() == 201, || {
        format!("{} history entries", a.history.len())
    })?;
    check(a.history.windows(2).all(|w| w[1].best >= w[0].best), || {
        "best series decreased".into()
    })?;
    let (ra, rb) = (
        RunReport::new(&ga, &fit, &a).to_json(),
        RunReport::new(&ga, &fit, &b).to_json(),
    );
    check(ra == rb, || "reports differ".into())?;
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "best {:.6} -> {:.6} non-decreasing over 200 generations, reports byte-identical ({} bytes), {elapsed:.2?} for two runs",
        a.history[0].best, a.best_fitness, ra.len()
    ))
}

fn seeded_improvement() -> Outcome {
    let runs: Vec<EvolutionResult> = (0..8).map(optimized_run).collect();
    let seed_fitness = runs[0].seed_fitness;
    for (s, r) in runs.iter().enumerate() {
        check(r.best_fitness > seed_fitness, || {
            format!("run {s} did not improve: {}", r.best_fitness)
        })?;
    }
    let avg: Vec<f64> = (0..=200)
        .map(|g| runs.iter().map(|r| r.history[g].best).sum::<f64>() / 8.0)
        .collect();
    check(avg.windows(2).all(|w| w[1] >= w[0]), || {
        "averaged best curve decreased".into()
    })?;
    let worst = runs
        .iter()
        .map(|r| r.best_fitness)
        .fold(f64::INFINITY, f64::min);
    Ok(format!("seed {seed_fitness:.6}; 8/8 runs improved (worst {worst:.6}, average {:.6}); average curve non-decreasing", avg[200]))
}

fn simulation_reproduction() -> Outcome {
    let best = optimized_run(0).best_plan;
    let cfg = SimConfig::default();
    let trace = simulate(&best, Point2::new(-12.0, 0.0), Point2::new(4.0, 0.0), &cfg)
        .map_err(|e| e.to_string())?;
    let m = trace_metrics(&trace, Point2::ORIGIN).map_err(|e| e.to_string())?;
    check(m.min_obstacle_distance > cfg.kickable_radius, || {
        format!("(a) min distance {}", m.min_obstacle_distance)
    })?;
    let last = trace.states[trace.states.len() - 1].position;
    check(last.x > 0.0 && last.x >= cfg.finish_x, || {
        format!("(b) final position {last}")
    })?;
    let (before, after) = (
        m.mean_speed_before.unwrap_or(0.0),
        m.mean_speed_after.unwrap_or(0.0),
    );
    check(after > before, || {
        format!("(c) speed before {before}, after {after}")
    })?;

    // zero acceleration and zero heading: uniform motion
    let coast: Vec<NodeParams> = vec![NodeParams::new(0.0, 0.0, 0.0); best.len()];
    let flat = best.with_params(&coast).map_err(|e| e.to_string())?;
    let line = simulate(&flat, Point2::new(-12.0, 0.0), Point2::new(4.0, 0.0), &cfg)
        .map_err(|e| e.to_string())?;
    let worst = line
        .states
        .iter()
        .map(|s| {
            (s.position.x - (-12.0 + 4.0 * s.time))
                .abs()
                .max(s.position.y.abs())
        })
        .fold(0.0, f64::max);
    check(worst <= 1e-9, || format!("straight line off by {worst}"))?;
    Ok(format!(
        "(a) min distance {:.3} > {}, (b) finished at x = {:.2} after {:.1} s, (c) speed {before:.3} -> {after:.3}; straight line |err| {worst:.1e}",
        m.min_obstacle_distance, cfg.kickable_radius, last.x, m.finish_time.unwrap_or(f64::NAN)
    ))
}

fn atlas() -> Outcome {
    let seed = fixtures::seed_plan();
    let variant = |f: &dyn Fn(NodeParams) -> NodeParams| {
        seed.with_params(&seed.params().into_iter().map(f).collect::<Vec<_>>())
            .unwrap()
    };
    let anchors = vec![
        AnchorPlan {
            obstacle_position: Point2::new(-20.0, -10.0),
            plan: seed.clone(),
        },
        AnchorPlan {
            obstacle_position: Point2::new(25.0, -5.0),
            plan: variant(&|p| NodeParams::new(p.acceleration * 0.5, p.body_dir * 0.3, 0.2)),
        },
        AnchorPlan {
            obstacle_position: Point2::new(0.0, 20.0),
            plan: variant(&|p| NodeParams::new(3.0, -p.body_dir, p.ball_dir - 0.4)),
        },
    ];
    let goal = Point2::new(52.5, 0.0);
    let field = FieldAtlas::new(anchors.clone(), goal).map_err(|e| e.to_string())?;

    for a in &anchors {
        check(field.resolve_plan(a.obstacle_position) == a.plan, || {
            format!("anchor {} not bit-equal", a.obstacle_position)
        })?;
    }

    let corners = anchors
        .iter()
        .map(|a| a.obstacle_position)
        .collect::<Vec<_>>();
    let corners = [corners[0], corners[1], corners[2]];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < 200 {
        let obstacle = Point2::new(rng.random_range(-20.0..25.0), rng.random_range(-10.0..20.0));
        let inside = cross(corners[0], corners[1], obstacle) > 0.0
            && cross(corners[1], corners[2], obstacle) > 0.0
            && cross(corners[2], corners[0], obstacle) > 0.0;
        if !inside {
            continue;
        }
        samples += 1;
        let resolved = field.resolve_plan(obstacle);
        for (i, node) in resolved.nodes().iter().enumerate() {
            let got = node.params.to_array();
            for (k, value) in got.iter().enumerate() {
                let values = [0, 1, 2].map(|a| anchors[a].plan.nodes()[i].params.to_array()[k]);
                worst = worst.max((value - manual_idw(corners, values, obstacle)).abs());
            }
        }

        // full pipeline against a hand composition
        let agent = Point2::new(
            obstacle.x + rng.random_range(-10.0..10.0),
            obstacle.y + rng.random_range(-6.0..6.0),
        );
        let action = field
            .dribble_action(agent, obstacle)
            .map_err(|e| e.to_string())?;
        let theta = (goal.y - obstacle.y).atan2(goal.x - obstacle.x);
        let (dx, dy) = (agent.x - obstacle.x, agent.y - obstacle.y);
        let local = Point2::new(
            dx * theta.cos() + dy * theta.sin(),
            -dx * theta.sin() + dy * theta.cos(),
        );
        if let Some(tri) = brute_locate(&resolved, local) {
            let pos = tri.map(|i| resolved.nodes()[i].position);
            let expect = [0, 1, 2].map(|k| {
                manual_idw(
                    pos,
                    tri.map(|i| resolved.nodes()[i].params.to_array()[k]),
                    local,
                )
            });
            let got = action.params.to_array();
            for k in 0..3 {
                worst = worst.max((got[k] - expect[k]).abs());
            }
            check(!action.fallback, || {
                format!("agent {agent} flagged as outside")
            })?;
        }
    }
    check(worst <= 1e-9, || {
        format!("blend differs from oracle by {worst}")
    })?;

    let mut frame_err: f64 = 0.0;
    for _ in 0..1000 {
        let o = Point2::new(rng.random_range(-52.0..52.0), rng.random_range(-34.0..34.0));
        let p = Point2::new(rng.random_range(-52.0..52.0), rng.random_range(-34.0..34.0));
        let frame = ObstacleFrame::new(o, goal).map_err(|e| e.to_string())?;
        frame_err = frame_err.max(dist(frame.to_world(frame.to_local(p)), p));
    }
    check(frame_err <= 1e-12, || {
        format!("frame round trip off by {frame_err}")
    })?;
    Ok(format!("anchors bit-equal, 200 interior blends + pipeline within {worst:.1e} of oracle, frame round trip {frame_err:.1e}"))
}

async fn call(
    app: &axum::Router,
    method: Method,
    uri: &str,
    body: Option<String>,
) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&bytes).into_owned())
}

fn file_and_api_contracts() -> Outcome {
    let dir = std::env::temp_dir().join(format!("dribbleforge-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("plan.json");

    // an optimized plan has full-precision floats
    let plan = optimized_run(3).best_plan;
    let text = plan_to_json(&plan);
    std::fs::write(&path, &text).map_err(|e| e.to_string())?;
    let loaded = parse_plan(&std::fs::read_to_string(&path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    check(loaded == plan, || "reloaded plan differs".into())?;
    check(plan_to_json(&loaded) == text, || {
        "re-saved document differs".into()
    })?;
    let bits_equal = loaded.nodes().iter().zip(plan.nodes()).all(|(a, b)| {
        a.params
            .to_array()
            .iter()
            .zip(b.params.to_array())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    });
    check(bits_equal, || "parameter bits differ".into())?;
    let _ = std::fs::remove_dir_all(&dir);

    let rt = tokio::runtime::Builder::new_current_thread()
        .build()
        .map_err(|e| e.to_string())?;
    let detail = rt.block_on(async {
        let app = router(AppState::new(fixtures::seed_plan()));
        let (status, _) = call(&app, Method::PUT, "/api/plan", Some(text.clone())).await;
        check(status == StatusCode::OK, || {
            format!("PUT returned {status}")
        })?;
        let (_, got) = call(&app, Method::GET, "/api/plan", None).await;
        check(got == text, || "GET after PUT differs".into())?;

        let mut bad: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        bad["nodes"][5]["body_dir"] = serde_json::json!(9.0);
        let bad = bad.to_string();
        let (status, body) = call(&app, Method::PUT, "/api/plan", Some(bad)).await;
        check(status == StatusCode::UNPROCESSABLE_ENTITY, || {
            format!("invalid plan returned {status}")
        })?;
        let err: Value = serde_json::from_str(&body).map_err(|e| e.to_string())?;
        check(err["node"] == 5 && err["param"] == "body_dir", || {
            format!("no node-level detail: {body}")
        })?;
        let (_, still) = call(&app, Method::GET, "/api/plan", None).await;
        check(still == text, || "rejected PUT modified the plan".into())?;
        Ok::<_, String>(format!("node {} {}", err["node"], err["param"]))
    })?;
    Ok(format!(
        "{} bytes round-trip bit-exact via file and PUT/GET; invalid plan -> 422 ({detail})",
        text.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("delaunay correctness", delaunay_correctness),
        ("interpolation", interpolation),
        ("ga operators", ga_operators),
        ("elitism and determinism", elitism_and_determinism),
        ("seeded improvement", seeded_improvement),
        ("simulation", simulation_reproduction),
        ("atlas", atlas),
        ("file and api contracts", file_and_api_contracts),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        match run() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2?}]", started.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.2?}]", started.elapsed());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
