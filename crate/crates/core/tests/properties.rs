use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use pitchtrack::kalman::{filter_pass, univariate_filter_pass, DiffuseInit};
use pitchtrack::prediction::predict_k;
use pitchtrack::state_space::{build_single, decode_params, CovarianceMode, LinearGaussianSystem, ParamVector};
use pitchtrack::synthetic::{conditioning_oracle, simulate};
use pitchtrack::trajectory::{
    denormalize, normalize_unit, parse_tracking_csv, serialize_tracking_csv, sliding_windows, FieldSpec, Point,
    TrackingSeries,
};
use pitchtrack::vae::{kl_diag_gaussian, loss, VaeConfig, VaeParams};
use proptest::prelude::*;

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Single-entity model in meters: (q11, q22, correlation, sigma_x, sigma_y).
fn model() -> impl Strategy<Value = LinearGaussianSystem> {
    (0.001f64..0.5, 0.001f64..0.5, -0.9f64..0.9, 0.02f64..0.5, 0.02f64..0.5).prop_map(|(a, b, r, sx, sy)| {
        let off = r * (a * b).sqrt();
        build_single(0.1, Matrix2::new(a, off, off, b), [sx, sy], CovarianceMode::LogCholesky).unwrap().system()
    })
}

fn scenario(len: usize) -> impl Strategy<Value = (LinearGaussianSystem, Vec<Vec<Option<f64>>>)> {
    (model(), any::<u64>(), prop::collection::vec(0u8..4, len)).prop_map(|(sys, seed, mask)| {
        let init = DVector::from_vec(vec![3.0, -2.0, 1.5, 0.5]);
        let mut obs = simulate(&sys, mask.len(), seed, &init).unwrap().observations;
        for (o, m) in obs.iter_mut().zip(mask).skip(2) {
            match m {
                0 => o[0] = None,
                1 => o[1] = None,
                2 => *o = vec![None, None],
                _ => {}
            }
        }
        (sys, obs)
    })
}

fn series() -> impl Strategy<Value = TrackingSeries> {
    prop::collection::vec(prop::option::weighted(0.8, (-5250.0f64..5250.0, -3400.0f64..3400.0)), 1..60).prop_map(
        |mut pts| {
            if pts.last().unwrap().is_none() {
                *pts.last_mut().unwrap() = Some((0.0, 0.0));
            }
            let samples = pts.into_iter().map(|p| p.map(|(x, y)| Point::new(x, y))).collect();
            TrackingSeries::new(4, 0.1, samples).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(s in series()) {
        let field = FieldSpec::default();
        let text = serialize_tracking_csv(std::slice::from_ref(&s));
        let parsed = parse_tracking_csv(&text, &field, 0.1).unwrap();
        prop_assert_eq!(&parsed, &vec![s]);
        prop_assert_eq!(serialize_tracking_csv(&parsed), text);
    }

    #[test]
    fn normalize_denormalize_identity(s in series()) {
        let field = FieldSpec::default();
        let back = denormalize(&normalize_unit(&s, &field).unwrap(), &field);
        for (a, b) in s.samples.iter().zip(&back.samples) {
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!((a.x - b.x).abs() < 1e-12 * 5250.0 && (a.y - b.y).abs() < 1e-12 * 3400.0),
                (None, None) => {}
                _ => prop_assert!(false, "presence changed"),
            }
        }
    }

    #[test]
    fn window_count_on_gap_free_series(n in 0usize..40, length in 2usize..15) {
        let pts: Vec<Point> = (0..n).map(|i| Point::new(i as f64, 0.0)).collect();
        let s = TrackingSeries::new(1, 0.1, pts.into_iter().map(Some).collect()).unwrap();
        prop_assert_eq!(sliding_windows(&s, length).len(), (n + 1).saturating_sub(length));
    }

    #[test]
    fn decoded_q_is_psd(v in prop::array::uniform6(-8.0f64..8.0)) {
        let p = ParamVector { mode: CovarianceMode::LogCholesky, values: v };
        let (q, sigma) = decode_params(&p);
        prop_assert!(SymmetricEigen::new(q).eigenvalues.min() >= -1e-12 * q.abs().max().max(1.0));
        prop_assert!(sigma[0] > 0.0 && sigma[1] > 0.0);
    }

    #[test]
    fn filter_covariances_symmetric_psd((sys, obs) in scenario(25)) {
        let out = filter_pass(&sys, &obs, &DiffuseInit::exact(4)).unwrap();
        for st in out.filtered.iter().chain(&out.predicted) {
            let scale = st.cov.amax().max(1.0);
            prop_assert!((&st.cov - st.cov.transpose()).amax() <= 1e-10 * scale);
            prop_assert!(min_eigenvalue(&st.cov) >= -1e-10 * scale);
        }
    }

    #[test]
    fn univariate_equals_batch((sys, obs) in scenario(20)) {
        let init = DiffuseInit::exact(4);
        let a = filter_pass(&sys, &obs, &init).unwrap();
        let b = univariate_filter_pass(&sys, &obs, &init).unwrap();
        prop_assert!((a.loglik() - b.loglik()).abs() < 1e-8);
        for (x, y) in a.filtered.iter().zip(&b.filtered) {
            prop_assert!((&x.mean - &y.mean).amax() < 1e-8);
            prop_assert!((&x.cov - &y.cov).amax() < 1e-8);
        }
    }

    #[test]
    fn filter_equals_oracle((sys, obs) in scenario(10)) {
        let mean = DVector::from_vec(vec![3.0, -2.0, 1.5, 0.5]);
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 0.5, 0.5]));
        let oracle = conditioning_oracle(&sys, &obs, &mean, &cov).unwrap();
        let out = filter_pass(&sys, &obs, &DiffuseInit::proper(mean, cov)).unwrap();
        prop_assert!((out.loglik() - oracle.log_density).abs() < 1e-6);
        for t in 0..obs.len() {
            prop_assert!((&out.filtered[t].mean - &oracle.filtered_means[t]).amax() < 1e-8);
            prop_assert!((&out.filtered[t].cov - &oracle.filtered_covs[t]).amax() < 1e-8);
        }
    }

    #[test]
    fn large_kappa_converges_to_exact((sys, obs) in scenario(12)) {
        let exact = filter_pass(&sys, &obs, &DiffuseInit::exact(4)).unwrap();
        let errors: Vec<f64> = [1e4, 1e6, 1e8]
            .iter()
            .map(|&k| {
                let out = filter_pass(&sys, &obs, &DiffuseInit::large_kappa(4, k)).unwrap();
                (exact.diffuse_steps..obs.len())
                    .map(|t| {
                        let (e, a) = (&exact.filtered[t], &out.filtered[t]);
                        (&e.mean - &a.mean).amax().max((&e.cov - &a.cov).amax())
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        prop_assert!(errors[1] <= errors[0] && errors[2] <= errors[1] + 1e-9, "{:?}", errors);
    }

    #[test]
    fn prediction_covariance_grows((sys, obs) in scenario(12), horizon in 1usize..12) {
        let out = filter_pass(&sys, &obs, &DiffuseInit::exact(4)).unwrap();
        let preds = predict_k(&sys, out.last_filtered().unwrap(), horizon, 0).unwrap();
        for w in preds.windows(2) {
            let d = w[1].cov - w[0].cov;
            prop_assert!(SymmetricEigen::new(d).eigenvalues.min() >= -1e-10 * w[1].cov.amax().max(1.0));
        }
        let one = predict_k(&sys, out.last_filtered().unwrap(), 1, 0).unwrap();
        let inside = out.predicted.last().unwrap();
        prop_assert!((one[0].mean[0] - inside.mean[0]).abs() <= 1e-12 * inside.mean[0].abs().max(1.0));
        prop_assert!((one[0].mean[1] - inside.mean[1]).abs() <= 1e-12 * inside.mean[1].abs().max(1.0));
    }

    #[test]
    fn kl_nonnegative(pairs in prop::collection::vec((-10.0f64..10.0, -6.0f64..3.0), 1..12)) {
        let mu: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let sigma: Vec<f64> = pairs.iter().map(|p| p.1.exp()).collect();
        prop_assert!(kl_diag_gaussian(&mu, &sigma).unwrap() >= 0.0);
    }

    #[test]
    fn kl_zero_only_at_prior(d in 1usize..10, i in 0usize..10, shift in 0.01f64..2.0) {
        prop_assert!(kl_diag_gaussian(&vec![0.0; d], &vec![1.0; d]).unwrap().abs() <= 1e-12);
        let mut mu = vec![0.0; d];
        mu[i % d] = shift;
        prop_assert!(kl_diag_gaussian(&mu, &vec![1.0; d]).unwrap() > 1e-12);
    }

    #[test]
    fn vae_loss_nonnegative(seed in any::<u64>(), x in prop::collection::vec(0.0f64..1.0, 8), eps in prop::collection::vec(-3.0f64..3.0, 2)) {
        let p = VaeParams::from_seed(VaeConfig { k: 8, d: 2, h: 4, sigma_x: 0.15, seed }).unwrap();
        prop_assert!(loss(&p, &x, &eps).unwrap() >= 0.0);
    }
}
