mod common;

use common::{bessel_zero, random_profile, rel};
use plap_core::eigen::lambda1;
use plap_core::energy::{grad_moment, power_moment};
use plap_core::RadialGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn laplacian_eigenvalues_match_bessel_zeros() {
    for dim in [2, 3, 4] {
        let grid = RadialGrid::new(1.0, dim, 2048).unwrap();
        let eig = lambda1(&grid, 2.0).unwrap();
        let exact = bessel_zero(dim).powi(2);
        assert!(rel(eig.lambda1, exact) < 1e-5, "N={dim}: {} vs {exact}", eig.lambda1);
    }
}

#[test]
fn regression_values() {
    let cases = [
        (2, 2.0, 2048, 5.783_186_462_5),
        (3, 2.0, 2048, 9.869_603_820_8),
        (2, 2.5, 512, 7.710_266_564_3),
        (2, 3.0, 512, 9.831_538_305_9),
    ];
    for (dim, p, m, frozen) in cases {
        let grid = RadialGrid::new(1.0, dim, m).unwrap();
        let l = lambda1(&grid, p).unwrap().lambda1;
        assert!(rel(l, frozen) < 1e-9, "N={dim} p={p} M={m}: {l}");
    }
}

#[test]
fn dilation_scaling() {
    for p in [2.0, 3.0] {
        let one = lambda1(&RadialGrid::new(1.0, 2, 512).unwrap(), p).unwrap().lambda1;
        let two = lambda1(&RadialGrid::new(2.0, 2, 512).unwrap(), p).unwrap().lambda1;
        let expect = one / 2f64.powf(p);
        assert!(rel(two, expect) < 1e-6, "p={p}: {two} vs {expect}");
    }
}

#[test]
fn quotient_of_random_profiles_bounds_lambda1_from_above() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (dim, p) in [(2, 2.0), (3, 2.5), (2, 3.0)] {
        let grid = RadialGrid::new(1.0, dim, 256).unwrap();
        let l = lambda1(&grid, p).unwrap().lambda1;
        for _ in 0..20 {
            let w = random_profile(&mut rng, &grid);
            let q = grad_moment(&w, &grid, p) / power_moment(&w, &grid, p);
            assert!(q >= l * (1.0 - 1e-10), "N={dim} p={p}: {q} < {l}");
        }
    }
}

#[test]
fn eigenfunction_is_positive_decreasing_and_normalized() {
    for (dim, p) in [(2, 2.0), (3, 2.0), (2, 2.5), (3, 3.0)] {
        let grid = RadialGrid::new(1.0, dim, 512).unwrap();
        let eig = lambda1(&grid, p).unwrap();
        let v = eig.eigfn.values();
        assert!(eig.eigfn.interior_min() > 0.0);
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "N={dim} p={p}");
        assert!((power_moment(&eig.eigfn, &grid, p) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn refinement_differences_shrink() {
    for dim in [2, 3] {
        let ls: Vec<f64> = [128, 256, 512, 1024]
            .iter()
            .map(|&m| lambda1(&RadialGrid::new(1.0, dim, m).unwrap(), 2.0).unwrap().lambda1)
            .collect();
        for w in ls.windows(3) {
            let ratio = (w[0] - w[1]).abs() / (w[1] - w[2]).abs();
            assert!(ratio >= 1.8, "N={dim}: ratio {ratio}");
        }
    }
}
