use fas_kl::baselines::{bcm_partition, block_covariance, frobenius_rel_error, vbcm_partition, BlockPartition};
use fas_kl::channel::Scenario;
use fas_kl::outage::{outage_curve, Method};
use fas_kl::specfun::bessel_j0;
use fas_kl::spectral::{eigendecompose, eigendecompose_dense, jakes_matrix};
use proptest::prelude::*;

#[test]
fn vbcm_blocks_follow_first_negative_lag() {
    // An anchor's block ends at the first lag where J0(2πW d/(N-1)) < 0;
    // the Jakes row depends on lag only, so every block has that length.
    let (n, w) = (20, 3.0);
    let lag = (1..n)
        .find(|&d| bessel_j0(2.0 * std::f64::consts::PI * w * d as f64 / (n - 1) as f64).unwrap() < 0.0)
        .unwrap();
    assert_eq!(lag, 3);
    let p = vbcm_partition(&jakes_matrix(n, w).unwrap());
    assert_eq!(p.num_blocks(), 7);
    assert_eq!(p.sizes(), vec![3, 3, 3, 3, 3, 3, 2]);
}

#[test]
fn vbcm_block_count_grows_with_aperture() {
    let mut prev = 0;
    for w in [1.0, 2.0, 3.0, 5.0] {
        let d = vbcm_partition(&jakes_matrix(20, w).unwrap()).num_blocks();
        assert!(d >= prev, "W={w}: {d} < {prev}");
        prev = d;
    }
}

#[test]
fn equicorrelation_block_spectrum() {
    let p = BlockPartition::new(vec![0..4, 4..7], vec![0.3, -0.4]).unwrap();
    let eig = eigendecompose_dense(&block_covariance(&p, 7).unwrap()).unwrap();
    let mut want = vec![1.0 + 3.0 * 0.3, 0.7, 0.7, 0.7, 1.0 - 2.0 * 0.4, 1.4, 1.4];
    want.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for (g, w) in eig.values().iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
}

#[test]
fn one_uncorrelated_block_is_identity() {
    let p = BlockPartition::new(vec![0..5], vec![0.0]).unwrap();
    assert_eq!(block_covariance(&p, 5).unwrap(), fas_kl::Matrix::identity(5));
    assert!(block_covariance(&p, 6).is_err());
}

#[test]
fn kl_error_below_bcm_at_twenty_ports() {
    let r = jakes_matrix(20, 3.0).unwrap();
    let eig = eigendecompose(&r).unwrap();
    let kl = frobenius_rel_error(&r, &eig.truncate(7).unwrap().covariance()).unwrap();
    let bcm = frobenius_rel_error(&r, &block_covariance(&bcm_partition(20, 5, &r).unwrap(), 20).unwrap()).unwrap();
    assert!(kl < 0.1, "{kl}");
    assert!(bcm > 0.5, "{bcm}");
}

#[test]
fn block_models_underestimate_outage() {
    let s = Scenario::new(20, 3.0, 1.0, 1.0, 1.0).unwrap();
    let grid: Vec<f64> = (-10..=30).step_by(2).map(f64::from).collect();
    let trials = 100_000;
    let exact = outage_curve(&s, Method::ExactMc, &grid, trials, 42).unwrap();
    for method in [Method::Bcm { d: 4 }, Method::Vbcm] {
        let curve = outage_curve(&s, method, &grid, trials, 42).unwrap();
        for (b, e) in curve.iter().zip(&exact) {
            assert!(
                b.value <= e.value + 3.0 * b.std_error.hypot(e.std_error),
                "{method} at {} dB: {} > {}",
                b.snr_db,
                b.value,
                e.value
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_cover_ports_in_order(n in 1usize..60, d_frac in 0.0f64..1.0, w in 0.2f64..8.0) {
        let r = jakes_matrix(n, w).unwrap();
        let d = 1 + ((n - 1) as f64 * d_frac) as usize;
        for p in [bcm_partition(n, d, &r).unwrap(), vbcm_partition(&r)] {
            let mut next = 0;
            for b in p.blocks() {
                prop_assert_eq!(b.start, next);
                prop_assert!(b.end > b.start);
                next = b.end;
            }
            prop_assert_eq!(next, n);
            let cov = block_covariance(&p, n).unwrap();
            let eig = eigendecompose_dense(&cov).unwrap();
            prop_assert!(eig.values().iter().all(|&v| v >= -1e-10));
        }
        let sizes = bcm_partition(n, d, &r).unwrap().sizes();
        prop_assert!(sizes.windows(2).all(|s| s[0] >= s[1] && s[0] - s[1] <= 1));
    }

    #[test]
    fn eckart_young_against_random_blocks(cuts in prop::collection::btree_set(1usize..20, 1..9)) {
        let r = jakes_matrix(20, 3.0).unwrap();
        let mut bounds: Vec<usize> = cuts.into_iter().collect();
        bounds.insert(0, 0);
        bounds.push(20);
        let blocks: Vec<_> = bounds.windows(2).map(|w| w[0]..w[1]).collect();
        let k = blocks.len();
        let rho = blocks.iter().map(|b| if b.len() > 1 { 0.25 } else { 0.0 }).collect();
        let p = BlockPartition::new(blocks, rho).unwrap();
        let block_err = frobenius_rel_error(&r, &block_covariance(&p, 20).unwrap()).unwrap();
        let eig = eigendecompose(&r).unwrap();
        let kl_err = frobenius_rel_error(&r, &eig.truncate(k).unwrap().covariance()).unwrap();
        prop_assert!(kl_err <= block_err);
    }
}
