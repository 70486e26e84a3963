use fas_kl::baselines::{bcm_partition, block_covariance, frobenius_rel_error};
use fas_kl::specfun::bessel_j0;
use fas_kl::spectral::{
    dof_rule, eigendecompose, eigendecompose_dense, jakes_matrix, lowrank_errors, min_modes,
    CorrelationMatrix,
};
use fas_kl::Matrix;
use proptest::prelude::*;

fn jakes_eig(n: usize, w: f64) -> fas_kl::spectral::EigenSystem {
    eigendecompose(&jakes_matrix(n, w).unwrap()).unwrap()
}

#[test]
fn eigenvalues_agree_with_nalgebra() {
    for (n, w) in [(2, 0.5), (10, 1.0), (20, 3.0), (40, 5.0), (64, 2.5)] {
        let r = jakes_matrix(n, w).unwrap();
        let dense = r.to_dense();
        let na = nalgebra::DMatrix::from_fn(n, n, |i, j| dense[(i, j)]);
        let mut want: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let got = eigendecompose(&r).unwrap();
        for (k, (g, e)) in got.values().iter().zip(&want).enumerate() {
            assert!((g - e.max(0.0)).abs() < 1e-10, "N={n} W={w} k={k}: {g} vs {e}");
        }
    }
}

#[test]
fn twenty_port_spectrum() {
    let eig = jakes_eig(20, 3.0);
    let want = [4.28, 4.06, 2.52, 2.43, 2.12];
    for (k, (g, w)) in eig.values().iter().zip(want).enumerate() {
        assert!((g - w).abs() <= 0.01, "λ_{} = {g}", k + 1);
    }
    let total: f64 = eig.values().iter().sum();
    assert!((total - 20.0).abs() < 1e-8 * 20.0);
    assert!((eig.truncate(1).unwrap().power_fraction() - 0.21).abs() < 0.005);
    assert!((eig.truncate(8).unwrap().power_fraction() - 0.997).abs() < 0.002);
}

#[test]
fn jakes_entries() {
    let r = jakes_matrix(20, 3.0).unwrap();
    let want = bessel_j0(6.0 * std::f64::consts::PI * 3.0 / 19.0).unwrap();
    assert_eq!(r.entry(0, 3), want);
    assert!(want < 0.0);
    let r2 = jakes_matrix(2, 0.7).unwrap();
    assert_eq!(r2.entry(0, 1), bessel_j0(2.0 * std::f64::consts::PI * 0.7).unwrap());
    assert_eq!(jakes_matrix(1, 3.0).unwrap().to_dense(), Matrix::identity(1));
}

#[test]
fn mode_count_at_one_percent() {
    // The smallest K with ε_K < 1% is one above the aperture rule's
    // nominal value for W = 1 and W = 3.
    let cases = [(1.0, 4), (2.0, 6), (3.0, 8), (5.0, 12)];
    for (w, want) in cases {
        let k = min_modes(&jakes_eig(20, w), 0.01).unwrap();
        assert_eq!(k, want, "W={w}");
        assert!(k.abs_diff(dof_rule(w)) <= 1, "W={w}: {k} vs {}", dof_rule(w));
    }
    for n in [10, 20, 40] {
        assert_eq!(min_modes(&jakes_eig(n, 3.0), 0.01).unwrap(), 8, "N={n}");
    }
    assert_eq!(min_modes(&jakes_eig(20, 3.0), 0.999).unwrap(), 1);
}

#[test]
fn dof_rule_values() {
    assert_eq!(dof_rule(3.0), 7);
    assert_eq!(dof_rule(5.0), 11);
    assert_eq!(dof_rule(0.5), 3);
}

#[test]
fn lowrank_frobenius_matches_dense_subtraction() {
    let r = jakes_matrix(20, 3.0).unwrap();
    let eig = eigendecompose(&r).unwrap();
    let rk = eig.truncate(7).unwrap().covariance();
    let direct = r.to_dense().sub(&rk).unwrap().frobenius_norm();
    let e = lowrank_errors(&eig, 7).unwrap();
    assert!((e.frobenius - direct).abs() < 1e-8);
    assert_eq!(e.operator, eig.values()[7]);
    let last = lowrank_errors(&eig, 19).unwrap();
    assert_eq!(last.frobenius, eig.values()[19]);
    assert_eq!(last.operator, eig.values()[19]);
}

#[test]
fn loewner_order_on_random_directions() {
    let r = jakes_matrix(20, 3.0).unwrap();
    let eig = eigendecompose(&r).unwrap();
    let dense = r.to_dense();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for k in 1..=20 {
        let diff = dense.sub(&eig.truncate(k).unwrap().covariance()).unwrap();
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..20).map(|_| next()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            assert!(diff.quadratic_form(&v) >= -1e-10, "K={k}");
        }
    }
}

#[test]
fn eckart_young_beats_block_models() {
    let r = jakes_matrix(20, 3.0).unwrap();
    let eig = eigendecompose(&r).unwrap();
    for d in 2..=10 {
        let bcm = block_covariance(&bcm_partition(20, d, &r).unwrap(), 20).unwrap();
        let block_err = frobenius_rel_error(&r, &bcm).unwrap();
        let kl_err = frobenius_rel_error(&r, &eig.truncate(d).unwrap().covariance()).unwrap();
        assert!(kl_err <= block_err, "D={d}: {kl_err} > {block_err}");
    }
}

#[test]
fn non_psd_input_rejected() {
    let bad = Matrix::from_rows(&[vec![1.0, 0.9, -0.9], vec![0.9, 1.0, 0.9], vec![-0.9, 0.9, 1.0]]).unwrap();
    assert!(matches!(eigendecompose_dense(&bad), Err(fas_kl::Error::Numerical(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigensystem_invariants(n in 1usize..40, w in 0.1f64..8.0) {
        let r = jakes_matrix(n, w).unwrap();
        let eig = eigendecompose(&r).unwrap();
        let vals = eig.values();
        prop_assert!(vals.windows(2).all(|p| p[0] >= p[1]));
        prop_assert!(vals.iter().all(|&v| v >= 0.0));
        let total: f64 = vals.iter().sum();
        prop_assert!((total - n as f64).abs() <= 1e-8 * n as f64);

        let u = eig.vectors();
        let gram = u.transpose().matmul(u).unwrap();
        prop_assert!(gram.sub(&Matrix::identity(n)).unwrap().as_slice().iter().all(|x| x.abs() < 1e-10));
        for i in 0..n {
            let row: f64 = u.row(i).iter().map(|x| x * x).sum();
            prop_assert!((row - 1.0).abs() < 1e-10);
        }
        let dense = r.to_dense();
        let rec = dense.sub(&eig.reconstruct()).unwrap().frobenius_norm();
        prop_assert!(rec <= 1e-9 * dense.frobenius_norm());

        let again = eigendecompose(&r).unwrap();
        prop_assert_eq!(&eig, &again);
    }

    #[test]
    fn truncation_metrics(n in 2usize..40, w in 0.1f64..8.0) {
        let eig = eigendecompose(&jakes_matrix(n, w).unwrap()).unwrap();
        let mut prev_eps = f64::INFINITY;
        let mut prev_fro = f64::INFINITY;
        for k in 1..=n {
            let t = eig.truncate(k).unwrap();
            let kept: f64 = eig.values()[..k].iter().sum();
            prop_assert!((t.epsilon() - (1.0 - kept / n as f64).max(0.0)).abs() < 1e-12);
            prop_assert!(t.epsilon() <= prev_eps + 1e-15);
            prev_eps = t.epsilon();
            prop_assert!(t.c1() >= 1.0 / n as f64 - 1e-12 && t.c1() <= 1.0 + 1e-12);
            let fro = lowrank_errors(&eig, k).unwrap().frobenius;
            prop_assert!(fro <= prev_fro);
            prev_fro = fro;
        }
        prop_assert_eq!(eig.truncate(n).unwrap().epsilon(), 0.0);
    }

    #[test]
    fn toeplitz_structure(n in 1usize..30, w in 0.1f64..8.0) {
        let r: CorrelationMatrix = jakes_matrix(n, w).unwrap();
        for k in 0..n {
            prop_assert_eq!(r.entry(k, k), 1.0);
            for l in 0..n {
                prop_assert_eq!(r.entry(k, l), r.first_row()[k.abs_diff(l)]);
                prop_assert!(r.entry(k, l).abs() <= 1.0);
            }
        }
    }
}
