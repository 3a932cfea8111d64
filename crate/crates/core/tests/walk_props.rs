use dlattice::geometry::{Point, SpaceKind};
use dlattice::pointproc::sample_palm_poisson;
use dlattice::rng::derive_seed;
use dlattice::stats::{chi_square_counts, mean_ci};
use dlattice::tess::{degree_moment, delaunay, delaunay_points, EmbeddedNetwork};
use dlattice::walk::{
    degree_bias_weight, graph_ball_containment, graph_balls, palm_graph_balls, srw, srw_rolling, BallRecord,
    RollingParams, WalkTrace,
};

const EUC: SpaceKind = SpaceKind::EuclideanPlane;
const HYP: SpaceKind = SpaceKind::HyperbolicPoincareDisk;

fn synthetic(n: usize, edges: &[(u32, u32)]) -> EmbeddedNetwork {
    let marks = (0..n).map(|i| Point::polar(1.0 + i as f64, i as f64)).collect();
    EmbeddedNetwork::from_edges(EUC, 100.0, marks, edges, vec![true; n]).unwrap()
}

#[test]
fn triangle_transitions_are_fair() {
    let net = synthetic(3, &[(0, 1), (1, 2), (0, 2)]);
    let mut counts = [[0u32; 3]; 3];
    for seed in 0..10_000 {
        let t = srw(&net, 0, 3, seed).unwrap();
        for w in t.vertex_ids.windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1;
        }
    }
    for (v, row) in counts.iter().enumerate() {
        let total: u32 = row.iter().sum();
        for (w, &c) in row.iter().enumerate() {
            if v == w {
                assert_eq!(c, 0);
                continue;
            }
            let sigma = (total as f64 * 0.25).sqrt();
            assert!((c as f64 - 0.5 * total as f64).abs() <= 3.0 * sigma, "{v}->{w}: {c} of {total}");
        }
    }
}

#[test]
fn transitions_are_uniform_over_the_neighbour_list() {
    // hub 0 of degree 5 inside a small irregular graph
    let net = synthetic(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (5, 6), (3, 6)]);
    let draws: Vec<u64> = (0..10_000).map(|seed| srw(&net, 0, 1, seed).unwrap().vertex_ids[1] - 1).collect();
    let test = chi_square_counts(&draws, |k| if k < 5 { 0.2 } else { 0.0 }, 5.0);
    assert_eq!(test.bins, 5);
    assert!(test.p_value > 1e-3, "{test:?}");
}

#[test]
fn trace_invariants_on_random_networks() {
    for seed in 0..20 {
        let sample = sample_palm_poisson(HYP, 1.0, 7.0, seed).unwrap();
        let net = delaunay(&sample).unwrap();
        let t = srw(&net, 0, 40, seed).unwrap();
        let g = t.graph_displacements.as_ref().unwrap();
        for j in 0..t.steps() {
            let (a, b) = (net.mark(t.vertex_ids[j] as u32), net.mark(t.vertex_ids[j + 1] as u32));
            let step = HYP.dist(a, b).unwrap();
            let change = (t.embedded_displacements[j + 1] - t.embedded_displacements[j]).abs();
            assert!(change <= step + 1e-9);
            assert!(net.has_edge(t.vertex_ids[j] as u32, t.vertex_ids[j + 1] as u32));
        }
        assert!(g.iter().enumerate().all(|(j, &h)| h as usize <= j));
        assert!(t.vertex_ids.iter().all(|&v| net.is_certified(v as u32)));
    }
}

#[test]
fn larger_windows_censor_less() {
    // nested samples: the small window is the restriction of the large one
    let censored = |radius: f64| {
        (0..50)
            .filter(|&seed| {
                let big = sample_palm_poisson(HYP, 1.0, 8.0, derive_seed(11, seed)).unwrap();
                let pts: Vec<Point> = big.points.iter().copied().filter(|&p| HYP.origin_dist(p) <= radius).collect();
                let net = delaunay_points(HYP, &pts, radius).unwrap();
                srw(&net, 0, 30, seed).unwrap().censored
            })
            .count()
    };
    let (small, large) = (censored(6.0), censored(8.0));
    assert!(large < small, "{large} vs {small}");
}

#[test]
fn degree_weights_satisfy_cauchy_schwarz() {
    let sample = sample_palm_poisson(HYP, 1.0, 8.0, 5).unwrap();
    let net = delaunay(&sample).unwrap();
    let weights: Vec<f64> = net.certified_ids().map(|v| degree_bias_weight(&net, v).unwrap()).collect();
    let mean_w = weights.iter().sum::<f64>() / weights.len() as f64;
    assert!((mean_w - 1.0).abs() < 1e-12);
    // Q-mean of the weight equals E[deg^2] / (E deg)^2
    let q_mean = weights.iter().map(|w| w * w).sum::<f64>() / weights.len() as f64;
    let ratio = degree_moment(&net, 2).unwrap() / degree_moment(&net, 1).unwrap().powi(2);
    assert!((q_mean - ratio).abs() < 1e-12);
    assert!(q_mean > 1.0);
    let regular = synthetic(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    assert!((0..4).all(|v| degree_bias_weight(&regular, v).unwrap() == 1.0));
}

fn static_traces(steps: usize, replicas: u64) -> Vec<(WalkTrace, f64)> {
    (0..replicas)
        .map(|r| {
            let sample = sample_palm_poisson(HYP, 1.0, 9.0, derive_seed(21, r)).unwrap();
            let net = delaunay(&sample).unwrap();
            (srw(&net, 0, steps, r).unwrap(), degree_bias_weight(&net, 0).unwrap())
        })
        .collect()
}

#[test]
fn rolling_walk_matches_static_window_at_short_horizon() {
    let n = 6;
    let params = RollingParams::for_intensity(HYP, 1.0).unwrap();
    let rolling: Vec<f64> = (0..200)
        .map(|r| srw_rolling(HYP, 1.0, n, derive_seed(22, r), &params).unwrap().embedded_displacements[n])
        .collect();
    let fixed: Vec<f64> = static_traces(n, 200)
        .into_iter()
        .filter(|(t, _)| !t.censored)
        .map(|(t, _)| t.embedded_displacements[n])
        .collect();
    assert!(fixed.len() > 190);
    let (a, b) = (mean_ci(&rolling).unwrap(), mean_ci(&fixed).unwrap());
    let z = (a.estimate - b.estimate) / (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!(z.abs() < 4.0, "rolling {} static {}", a.estimate, b.estimate);
}

#[test]
fn stationary_displacement_is_subadditive() {
    let traces: Vec<(WalkTrace, f64)> = static_traces(6, 200).into_iter().filter(|(t, _)| !t.censored).collect();
    let weighted = |j: usize| {
        let values: Vec<f64> = traces.iter().map(|(t, w)| w * t.embedded_displacements[j]).collect();
        mean_ci(&values).unwrap()
    };
    for (m, n) in [(1, 1), (2, 2), (2, 4), (3, 3), (1, 5)] {
        let (sum, a, b) = (weighted(m + n), weighted(m), weighted(n));
        let slack = 3.0 * (sum.std_err.powi(2) + a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
        assert!(sum.estimate <= a.estimate + b.estimate + slack, "m={m} n={n}");
    }
}

#[test]
fn noncontainment_is_monotone_in_t() {
    let t_grid = [0.5, 1.0, 1.5, 2.0, 3.0];
    let records: Vec<Vec<BallRecord>> = (0..20)
        .map(|r| {
            let sample = sample_palm_poisson(HYP, 1.0, 9.0, derive_seed(31, r)).unwrap();
            graph_balls(&delaunay(&sample).unwrap(), 0, &[0, 1, 2, 3], &t_grid).unwrap()
        })
        .collect();
    let table = graph_ball_containment(&records, &t_grid).unwrap();
    assert!(table.rows[0].noncontainment.iter().all(|&p| p == 0.0));
    for row in &table.rows {
        assert!(row.noncontainment.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn lazy_and_static_graph_balls_agree() {
    let params = RollingParams::for_intensity(HYP, 1.0).unwrap();
    let lazy: Vec<f64> = (0..80)
        .map(|r| palm_graph_balls(HYP, 1.0, &[2], &[1.0], derive_seed(41, r), &params).unwrap()[0].size as f64)
        .collect();
    let fixed: Vec<f64> = (0..80)
        .map(|r| {
            let sample = sample_palm_poisson(HYP, 1.0, 9.0, derive_seed(42, r)).unwrap();
            let b = &graph_balls(&delaunay(&sample).unwrap(), 0, &[2], &[1.0]).unwrap()[0];
            assert!(b.valid);
            b.size as f64
        })
        .collect();
    let (a, b) = (mean_ci(&lazy).unwrap(), mean_ci(&fixed).unwrap());
    let z = (a.estimate - b.estimate) / (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!(z.abs() < 4.0, "lazy {} static {}", a.estimate, b.estimate);
}

#[test]
fn euclidean_rolling_walk_is_diffusive() {
    let params = RollingParams::for_intensity(EUC, 1.0).unwrap();
    let traces: Vec<WalkTrace> =
        (0..40).map(|r| srw_rolling(EUC, 1.0, 800, derive_seed(51, r), &params).unwrap()).collect();
    let fit =
        dlattice::walk::displacement_scaling(&traces, dlattice::walk::SpeedMode::Embedded, &[50, 200, 800]).unwrap();
    assert!((fit.slope - 0.5).abs() < 0.15, "{fit:?}");
}
