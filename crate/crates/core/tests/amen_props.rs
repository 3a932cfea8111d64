use dlattice::amen::{
    boundary_ratio_estimate, clusters, coarsen_percolation, d1_d2_statistics, folner_quotient, gap_tail_exact,
    isoperimetric_upper_bound, mtp_check, mtp_core_radius, mtp_sample, palm_root_cluster, root_cluster,
    transport_double_sums, unit_translations, Transport,
};
use dlattice::geometry::{Point, SpaceKind};
use dlattice::pointproc::sample_palm_poisson;
use dlattice::rng::derive_seed;
use dlattice::tess::{core_buffer, delaunay, voronoi_cells, EmbeddedNetwork};
use dlattice::walk::RollingParams;
use proptest::prelude::*;

const EUC: SpaceKind = SpaceKind::EuclideanPlane;
const HYP: SpaceKind = SpaceKind::HyperbolicPoincareDisk;

fn synthetic(n: usize, edges: &[(u32, u32)]) -> EmbeddedNetwork {
    let marks = (0..n).map(|i| Point::polar(0.3 + 0.05 * i as f64, 2.4 * i as f64)).collect();
    EmbeddedNetwork::from_edges(EUC, 100.0, marks, edges, vec![true; n]).unwrap()
}

fn edge_set(n: usize) -> impl Strategy<Value = Vec<(u32, u32)>> {
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|a| (a + 1..n as u32).map(move |b| (a, b))).collect();
    proptest::sample::subsequence(pairs.clone(), 0..=pairs.len())
}

/// Minimum of `|∂S| / Vol(S)` over nonempty `S` with `Vol(S)` at most half
/// the total, by enumeration.
fn brute_isoperimetric(net: &EmbeddedNetwork) -> f64 {
    let n = net.vertex_count();
    let total: usize = (0..n as u32).map(|v| net.degree(v)).sum();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let inside = |v: u32| mask >> v & 1 == 1;
        let vol: usize = (0..n as u32).filter(|&v| inside(v)).map(|v| net.degree(v)).sum();
        if vol == 0 || 2 * vol > total {
            continue;
        }
        let boundary = net.edges().iter().filter(|e| inside(e.a) != inside(e.b)).count();
        best = best.min(boundary as f64 / vol as f64);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_double_sums_agree_exactly(edges in edge_set(10)) {
        let net = synthetic(10, &edges);
        for t in [Transport::Adjacency, Transport::F1] {
            let (s, r) = transport_double_sums(&net, t);
            prop_assert_eq!(s, r);
        }
        // f1 by direct enumeration of ordered adjacent pairs
        let strict = edges.iter().filter(|&&(a, b)| net.degree(a) != net.degree(b)).count() as f64;
        prop_assert_eq!(transport_double_sums(&net, Transport::F1).0, strict);
        for t in [Transport::F2, Transport::F3] {
            let (s, r) = transport_double_sums(&net, t);
            prop_assert!((s - r).abs() <= 1e-12 * s.abs().max(1.0));
        }
    }

    #[test]
    fn sweep_bound_never_beats_exhaustive_minimum(edges in edge_set(8)) {
        let net = synthetic(8, &edges);
        prop_assume!(!net.edges().is_empty());
        let rep = isoperimetric_upper_bound(&net, f64::INFINITY).unwrap();
        if !rep.used_largest_component {
            prop_assert!(rep.bound >= brute_isoperimetric(&net) - 1e-12);
        }
    }
}

#[test]
fn complete_graph_sweep_matches_exhaustive_minimum() {
    let net = synthetic(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    let brute = brute_isoperimetric(&net);
    assert!((brute - 2.0 / 3.0).abs() < 1e-12);
    let rep = isoperimetric_upper_bound(&net, f64::INFINITY).unwrap();
    assert!((rep.bound - brute).abs() < 1e-12, "{rep:?}");
}

#[test]
fn hyperbolic_networks_have_larger_isoperimetric_bounds() {
    // cores of about 2000 vertices in both spaces
    let hyp_window = 10.0;
    let euc_core = (2000.0 / std::f64::consts::PI).sqrt();
    let euc_window = euc_core + core_buffer(EUC, 1.0);
    let seeds = 20;
    let wins = (0..seeds)
        .filter(|&r| {
            let h = delaunay(&sample_palm_poisson(HYP, 1.0, hyp_window, derive_seed(61, r)).unwrap()).unwrap();
            let e = delaunay(&sample_palm_poisson(EUC, 1.0, euc_window, derive_seed(62, r)).unwrap()).unwrap();
            let bh = isoperimetric_upper_bound(&h, hyp_window - core_buffer(HYP, 1.0)).unwrap();
            let be = isoperimetric_upper_bound(&e, euc_core).unwrap();
            bh.bound > be.bound
        })
        .count();
    assert!(wins >= 18, "{wins} of {seeds}");
}

#[test]
fn hyperbolic_nearest_point_laws() {
    let rep = d1_d2_statistics(HYP, 0.05, 10_000, 71).unwrap();
    assert!(rep.ks_distance < 1.63 / 100.0, "{}", rep.ks_distance);
    assert_eq!(rep.gap_violations, 0);
    assert_eq!(rep.ball_violations, 0);
    // the gap tail is also close to its exact law, not just under the envelope
    for row in &rep.gap_tail {
        let exact = gap_tail_exact(HYP, 0.05, row.t);
        let sigma = (exact * (1.0 - exact) / 1e4).sqrt();
        assert!((row.empirical - exact).abs() <= 4.0 * sigma + 1e-4, "{row:?} exact {exact}");
        assert!(exact <= row.reference + 1e-12);
    }
}

#[test]
fn euclidean_nearest_point_laws() {
    let rep = d1_d2_statistics(EUC, 0.2, 10_000, 72).unwrap();
    assert!(rep.ks_passes(), "{}", rep.ks_distance);
    assert_eq!(rep.gap_violations, 0);
    assert_eq!(rep.ball_violations, 0);
}

#[test]
fn mass_transport_balances_on_hyperbolic_networks() {
    let window = 9.0;
    let core = mtp_core_radius(HYP, 1.0, window);
    let nets: Vec<EmbeddedNetwork> = (0..200)
        .map(|r| delaunay(&sample_palm_poisson(HYP, 1.0, window, derive_seed(81, r)).unwrap()).unwrap())
        .collect();
    for t in [Transport::F1, Transport::F2, Transport::F3] {
        let samples: Vec<_> = nets.iter().map(|n| mtp_sample(n, t, core).unwrap()).collect();
        let excluded: usize = samples.iter().map(|s| s.excluded).sum();
        let roots: usize = samples.iter().map(|s| s.roots).sum();
        assert!(excluded * 1000 < roots, "{excluded} of {roots} excluded");
        let rep = mtp_check(t, &samples).unwrap();
        assert!(rep.agrees(), "{rep:?}");
        if t == Transport::F2 {
            assert!(samples.iter().all(|s| (s.sent - 1.0).abs() < 1e-12));
        }
    }
}

#[test]
fn cluster_boundaries_pair_up_in_the_certified_core() {
    let net = delaunay(&sample_palm_poisson(EUC, 1.0, 15.0, 91).unwrap()).unwrap();
    let lab = coarsen_percolation(&net, 0.05, 92).unwrap();
    let cl = clusters(&net, &lab, None).unwrap();
    let total: usize = cl.iter().map(|k| k.boundary_edge_count).sum();
    let closed = lab.edge_open.iter().filter(|&&o| !o).count();
    assert_eq!(total, 2 * closed);
    assert_eq!(cl.iter().map(|k| k.size()).sum::<usize>(), net.vertex_count());
}

#[test]
fn relabelling_vertices_gives_isomorphic_clusters() {
    let sample = sample_palm_poisson(EUC, 1.0, 12.0, 93).unwrap();
    let net = delaunay(&sample).unwrap();
    let lab = coarsen_percolation(&net, 0.05, 94).unwrap();
    // reverse the vertex order; the coarse sample depends only on the seed
    let mut rev = sample.points.clone();
    rev.reverse();
    let n = rev.len() as u32;
    let net2 = dlattice::tess::delaunay_points(EUC, &rev, 12.0).unwrap();
    let lab2 = coarsen_percolation(&net2, 0.05, 94).unwrap();
    let mut a: Vec<Vec<u32>> = clusters(&net, &lab, None).unwrap().into_iter().map(|k| k.vertices).collect();
    let mut b: Vec<Vec<u32>> = clusters(&net2, &lab2, None)
        .unwrap()
        .into_iter()
        .map(|k| {
            let mut v: Vec<u32> = k.vertices.iter().map(|&i| n - 1 - i).collect();
            v.sort_unstable();
            v
        })
        .collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn lazy_and_windowed_root_clusters_agree() {
    let delta = 0.05;
    let params = RollingParams::for_intensity(EUC, 1.0).unwrap();
    let lazy: Vec<Option<f64>> = (0..300)
        .map(|r| palm_root_cluster(EUC, 1.0, delta, derive_seed(101, r), &params).unwrap().boundary_ratio())
        .collect();
    let fixed: Vec<Option<f64>> = (0..300)
        .map(|r| {
            let net = delaunay(&sample_palm_poisson(EUC, 1.0, 20.0, derive_seed(102, r)).unwrap()).unwrap();
            let lab = coarsen_percolation(&net, delta, derive_seed(103, r)).unwrap();
            let k = root_cluster(&net, &lab, 0, None).unwrap();
            k.certified.then(|| k.boundary_ratio())
        })
        .collect();
    let (a, b) = (boundary_ratio_estimate(delta, &lazy).unwrap(), boundary_ratio_estimate(delta, &fixed).unwrap());
    assert!(b.discarded < 10);
    let se = |r: &dlattice::amen::BoundaryRatioReport| (r.ci_hi - r.ci_lo) / (2.0 * 1.96);
    let z = (a.estimate - b.estimate) / se(&a).hypot(se(&b));
    assert!(z.abs() < 4.0, "lazy {} windowed {}", a.estimate, b.estimate);
}

#[test]
fn hyperbolic_boundary_ratio_exceeds_euclidean() {
    let delta = 0.01;
    let ratio = |space: SpaceKind, reps: u64| {
        let params = RollingParams::for_intensity(space, 1.0).unwrap();
        let r: Vec<Option<f64>> = (0..reps)
            .map(|r| palm_root_cluster(space, 1.0, delta, derive_seed(111, r), &params).unwrap().boundary_ratio())
            .collect();
        boundary_ratio_estimate(delta, &r).unwrap()
    };
    let (h, e) = (ratio(HYP, 40), ratio(EUC, 100));
    assert!(h.ci_lo > e.ci_hi, "hyp {h:?} euc {e:?}");
}

#[test]
fn folner_quotients_shrink_with_coarser_percolation() {
    let mean_quotient = |delta: f64| {
        let mut qs = Vec::new();
        for r in 0..30 {
            let net = delaunay(&sample_palm_poisson(EUC, 1.0, 30.0, derive_seed(121, r)).unwrap()).unwrap();
            let cells = voronoi_cells(&net);
            let lab = coarsen_percolation(&net, delta, derive_seed(122, r)).unwrap();
            let k = root_cluster(&net, &lab, 0, Some(&cells)).unwrap();
            let Some(kc) = k.cells(&cells) else { continue };
            let marks: Vec<Point> = k.vertices.iter().map(|&v| net.mark(v)).collect();
            let rep = folner_quotient(EUC, &kc, &marks, &unit_translations(EUC), 4000, derive_seed(123, r)).unwrap();
            qs.push(rep.quotient);
        }
        assert!(qs.len() >= 20);
        qs.iter().sum::<f64>() / qs.len() as f64
    };
    let (coarse, fine) = (mean_quotient(0.01), mean_quotient(0.1));
    assert!(coarse < fine, "{coarse} vs {fine}");
}
