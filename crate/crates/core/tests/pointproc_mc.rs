use dlattice::geometry::SpaceKind;
use dlattice::pointproc::{matched_poisson_params, palmify, sample_kac_gaf, sample_poisson};
use dlattice::rng::derive_seed;
use dlattice::stats::{chi_square_counts, ks_critical_99, ks_distance, mean_ci};
use statrs::function::gamma::ln_gamma;

const EUC: SpaceKind = SpaceKind::EuclideanPlane;
const HYP: SpaceKind = SpaceKind::HyperbolicPoincareDisk;

fn poisson_pmf(mean: f64) -> impl Fn(u64) -> f64 {
    move |k| (k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)).exp()
}

#[test]
fn window_counts_follow_the_poisson_law() {
    for (space, radius, replicas) in [(HYP, 8.0, 2000u64), (EUC, 10.0, 5000)] {
        let mean = space.ball_volume(radius).unwrap();
        let counts: Vec<u64> = (0..replicas)
            .map(|r| sample_poisson(space, 1.0, radius, derive_seed(1, r)).unwrap().len() as u64)
            .collect();
        let test = chi_square_counts(&counts, poisson_pmf(mean), 5.0);
        assert!(test.p_value > 1e-3, "{space:?}: {test:?}");
    }
}

#[test]
fn counts_in_disjoint_annuli_are_uncorrelated() {
    let (inner, outer) = (2.5, 4.0);
    let n = 10_000;
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|r| {
            let s = sample_poisson(HYP, 1.0, outer, derive_seed(2, r)).unwrap();
            let a = s.points.iter().filter(|&&p| HYP.origin_dist(p) < inner).count();
            (a as f64, (s.len() - a) as f64)
        })
        .collect();
    let (ma, mb) = pairs.iter().fold((0.0, 0.0), |(x, y), &(a, b)| (x + a, y + b));
    let (ma, mb) = (ma / n as f64, mb / n as f64);
    let prods: Vec<f64> = pairs.iter().map(|&(a, b)| (a - ma) * (b - mb)).collect();
    let cov = mean_ci(&prods).unwrap();
    assert!(cov.estimate.abs() <= 3.0 * cov.std_err, "{cov:?}");
    // each count is Poisson with the annulus volume as mean
    assert!((ma - HYP.ball_volume(inner).unwrap()).abs() < 4.0 * (ma / n as f64).sqrt());
}

#[test]
fn radii_are_uniform_in_volume() {
    for (space, radius) in [(HYP, 6.0), (EUC, 6.0)] {
        let s = sample_poisson(space, 1.0, radius, 3).unwrap();
        let radii: Vec<f64> = s.points.iter().map(|&p| space.origin_dist(p)).collect();
        let total = space.ball_volume(radius).unwrap();
        let d = ks_distance(&radii, |r| space.ball_volume(r.clamp(0.0, radius)).unwrap() / total);
        assert!(d < ks_critical_99(radii.len()), "{space:?}: {d}");
    }
}

#[test]
fn palm_root_sees_the_void_probability() {
    // nearest neighbour of the added origin: Pr[d >= t] = exp(-f(t))
    let replicas = 4000;
    let nearest: Vec<f64> = (0..replicas)
        .map(|r| {
            let s = palmify(sample_poisson(HYP, 1.0, 4.0, derive_seed(4, r)).unwrap()).unwrap();
            s.points[1..].iter().map(|&p| HYP.origin_dist(p)).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let d = ks_distance(&nearest, |t| 1.0 - (-HYP.ball_volume(t.max(0.0)).unwrap()).exp());
    assert!(d < ks_critical_99(replicas as usize), "{d}");
}

#[test]
fn kac_roots_fill_half_the_disk_on_average() {
    let degree = 200;
    let counts: Vec<f64> = (0..100).map(|s| sample_kac_gaf(degree, derive_seed(5, s)).unwrap().len() as f64).collect();
    let est = mean_ci(&counts).unwrap();
    let target = degree as f64 / 2.0;
    assert!((est.estimate - target).abs() <= 4.0 * est.std_err, "{est:?}");
}

#[test]
fn kac_intensity_approaches_the_hyperbolic_density_inside() {
    // inner window of hyperbolic radius 2: expected count f(2) / (4π) as degree grows
    let degree = 400;
    let inner = 2.0;
    let seeds = 100;
    let counts: Vec<f64> = (0..seeds)
        .map(|s| {
            let sample = sample_kac_gaf(degree, derive_seed(6, s)).unwrap();
            sample.points.iter().filter(|&&p| HYP.origin_dist(p) < inner).count() as f64
        })
        .collect();
    let est = mean_ci(&counts).unwrap();
    let (lambda, _) = matched_poisson_params(degree).unwrap();
    let expected = lambda * HYP.ball_volume(inner).unwrap();
    assert!((est.estimate - expected).abs() <= 4.0 * est.std_err + 0.02 * expected, "{est:?} vs {expected}");
}
