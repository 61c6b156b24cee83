//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, Matrix2};
use pitchtrack::estimation::{cold_start, fit_mle, sliding_window_fit, FitConfig, SlidingConfig};
use pitchtrack::kalman::{filter_pass, univariate_filter_pass, DiffuseInit, FilterOutput};
use pitchtrack::prediction::predict_k;
use pitchtrack::rng::SeededRng;
use pitchtrack::state_space::{build_single, model_from_params, stack, CovarianceMode, LinearGaussianSystem};
use pitchtrack::synthetic::{conditioning_oracle, scripted_dataset, simulate, SyntheticScenario};
use pitchtrack::trajectory::{normalize_unit, FieldSpec, Point, TrackingSeries};
use pitchtrack::vae::{
    kl_diag_gaussian, loss, loss_gradient, reconstruction_error, train, TrainConfig, VaeConfig, VaeParams,
};

const LC: CovarianceMode = CovarianceMode::LogCholesky;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn single(q: f64, sigma: f64) -> LinearGaussianSystem {
    build_single(0.1, Matrix2::identity() * q, [sigma, sigma], LC).unwrap().system()
}

/// Random single-entity scenario in meters with a proper prior on `z_1`.
fn oracle_scenario(seed: u64) -> (LinearGaussianSystem, SyntheticScenario, DVector<f64>, DMatrix<f64>) {
    let mut rng = SeededRng::new(1000 + seed);
    let q = [rng.uniform_in(0.01, 0.1), rng.uniform_in(0.01, 0.1)];
    let rho = rng.uniform_in(-0.5, 0.5);
    let off = rho * (q[0] * q[1]).sqrt();
    let sigma = [rng.uniform_in(0.05, 0.3), rng.uniform_in(0.05, 0.3)];
    let sys = build_single(0.1, Matrix2::new(q[0], off, off, q[1]), sigma, LC).unwrap().system();
    let mean = DVector::from_vec(vec![
        rng.uniform_in(-40.0, 40.0),
        rng.uniform_in(-25.0, 25.0),
        rng.uniform_in(-3.0, 3.0),
        rng.uniform_in(-3.0, 3.0),
    ]);
    let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.25, 0.25]));
    let sc = simulate(&sys, 10, seed, &mean).unwrap();
    (sys, sc, mean, cov)
}

fn c1_oracle_filter() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let (sys, sc, mean, cov) = oracle_scenario(seed);
        let oracle = conditioning_oracle(&sys, &sc.observations, &mean, &cov).unwrap();
        let out = filter_pass(&sys, &sc.observations, &DiffuseInit::proper(mean, cov)).unwrap();
        for t in 0..10 {
            let f = &out.filtered[t];
            worst = worst
                .max(max_abs_diff(f.mean.as_slice(), oracle.filtered_means[t].as_slice()))
                .max(max_abs_diff(f.cov.as_slice(), oracle.filtered_covs[t].as_slice()));
            let p = &out.predicted[t + 1];
            worst = worst
                .max(max_abs_diff(p.mean.as_slice(), oracle.predicted_means[t].as_slice()))
                .max(max_abs_diff(p.cov.as_slice(), oracle.predicted_covs[t].as_slice()));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-8 && elapsed < Duration::from_secs(5),
        format!("50 scenarios, max abs error {worst:.2e} (limit 1e-8), {:.2} s (limit 5 s)", elapsed.as_secs_f64()),
    )
}

fn c2_oracle_loglik() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let (sys, sc, mean, cov) = oracle_scenario(seed);
        let oracle = conditioning_oracle(&sys, &sc.observations, &mean, &cov).unwrap();
        let init = DiffuseInit::proper(mean, cov);
        let batch = filter_pass(&sys, &sc.observations, &init).unwrap().loglik();
        let uni = univariate_filter_pass(&sys, &sc.observations, &init).unwrap().loglik();
        worst = worst.max((batch - oracle.log_density).abs()).max((uni - oracle.log_density).abs());
    }
    outcome(worst < 1e-6, format!("50 scenarios, max abs error {worst:.2e} (limit 1e-6)"))
}

fn output_diff(a: &FilterOutput, b: &FilterOutput) -> f64 {
    let mut worst = (a.loglik() - b.loglik()).abs();
    for (x, y) in a.filtered.iter().zip(&b.filtered).chain(a.predicted.iter().zip(&b.predicted)) {
        worst = worst
            .max(max_abs_diff(x.mean.as_slice(), y.mean.as_slice()))
            .max(max_abs_diff(x.cov.as_slice(), y.cov.as_slice()));
    }
    worst
}

fn c3_univariate_batch() -> Outcome {
    let init = DiffuseInit::exact(4);
    let mut single_worst: f64 = 0.0;
    for seed in 0..10 {
        let (sys, sc, _, _) = oracle_scenario(seed);
        let a = filter_pass(&sys, &sc.observations, &init).unwrap();
        let b = univariate_filter_pass(&sys, &sc.observations, &init).unwrap();
        single_worst = single_worst.max(output_diff(&a, &b));
    }

    let mut rng = SeededRng::new(23);
    let models: Vec<_> = (0..23)
        .map(|_| {
            let q = rng.uniform_in(0.01, 0.1);
            let s = rng.uniform_in(0.05, 0.2);
            build_single(0.1, Matrix2::identity() * q, [s, s], LC).unwrap()
        })
        .collect();
    let sys = stack(&models).unwrap().system();
    let init_state = DVector::from_fn(92, |i, _| if i % 4 < 2 { rng.uniform_in(-30.0, 30.0) } else { 0.0 });
    let init = DiffuseInit::exact(92);
    let mut stacked_worst: f64 = 0.0;
    for (seed, drop) in [(1u64, 0.0), (2, 0.2)] {
        let mut sc = simulate(&sys, 60, seed, &init_state).unwrap();
        let mut mask = SeededRng::new(seed + 50);
        for obs in sc.observations.iter_mut().skip(3) {
            for e in 0..23 {
                if mask.uniform() < drop {
                    obs[2 * e] = None;
                    obs[2 * e + 1] = None;
                }
            }
        }
        let a = filter_pass(&sys, &sc.observations, &init).unwrap();
        let b = univariate_filter_pass(&sys, &sc.observations, &init).unwrap();
        stacked_worst = stacked_worst.max(output_diff(&a, &b));
    }
    outcome(
        single_worst < 1e-8 && stacked_worst < 1e-6,
        format!(
            "single entity {single_worst:.2e} (limit 1e-8), 23 entities incl. 20% missing {stacked_worst:.2e} (limit 1e-6)"
        ),
    )
}

fn c4_diffuse() -> Outcome {
    let mut monotone = true;
    let mut worst_rel: f64 = 0.0;
    for seed in 0..10 {
        let (sys, sc, _, _) = oracle_scenario(seed);
        let exact = filter_pass(&sys, &sc.observations, &DiffuseInit::exact(4)).unwrap();
        let k6 = filter_pass(&sys, &sc.observations, &DiffuseInit::large_kappa(4, 1e6)).unwrap();
        let k8 = filter_pass(&sys, &sc.observations, &DiffuseInit::large_kappa(4, 1e8)).unwrap();
        for t in exact.diffuse_steps..exact.filtered.len() {
            let (e, a, b) = (&exact.filtered[t], &k6.filtered[t], &k8.filtered[t]);
            let d6 = max_abs_diff(e.mean.as_slice(), a.mean.as_slice())
                .max(max_abs_diff(e.cov.as_slice(), a.cov.as_slice()));
            let d8 = max_abs_diff(e.mean.as_slice(), b.mean.as_slice())
                .max(max_abs_diff(e.cov.as_slice(), b.cov.as_slice()));
            monotone &= d8 <= d6;
            let scale = b.mean.amax().max(b.cov.amax());
            worst_rel = worst_rel.max(d8 / scale);
        }
    }
    outcome(
        monotone && worst_rel < 1e-4,
        format!("10 scenarios, error shrinks from kappa 1e6 to 1e8: {monotone}, relative error at 1e8 {worst_rel:.2e} (limit 1e-4)"),
    )
}

fn seed7(n: usize) -> SyntheticScenario {
    simulate(&single(400.0, 10.0), n, 7, &DVector::zeros(4)).unwrap()
}

fn c5_recovery() -> Outcome {
    let start = Instant::now();
    let sc = seed7(2000);
    let fit = fit_mle(&sc.observations, 0.1, &cold_start(LC), &FitConfig::default()).unwrap();
    let elapsed = start.elapsed();
    let q = fit.accel_cov();
    let s = fit.sigma();
    let q_err = ((q[(0, 0)] - 400.0).abs() / 400.0).max((q[(1, 1)] - 400.0).abs() / 400.0);
    let s_err = ((s[0] - 10.0).abs() / 10.0).max((s[1] - 10.0).abs() / 10.0);
    outcome(
        q_err < 0.10 && s_err < 0.05 && elapsed < Duration::from_secs(60),
        format!(
            "Q diag ({:.1}, {:.1}) err {:.1}% (limit 10%, tightened from 25%), sigma ({:.2}, {:.2}) err {:.1}% (limit 5%, tightened from 15%), {} iterations, {:.1} s (limit 60 s)",
            q[(0, 0)],
            q[(1, 1)],
            100.0 * q_err,
            s[0],
            s[1],
            100.0 * s_err,
            fit.iterations,
            elapsed.as_secs_f64()
        ),
    )
}

fn c6_prediction() -> Outcome {
    let n = 2500;
    let sc = seed7(n);
    let pts: Vec<Point> = sc.observations.iter().map(|o| Point::new(o[0].unwrap(), o[1].unwrap())).collect();
    let series = TrackingSeries::from_points(1, 0.1, &pts).unwrap();
    let est = sliding_window_fit(&series, &SlidingConfig::default()).unwrap();
    let preds = est.predictions();
    let (mut se, mut se_base) = (0.0, 0.0);
    for (i, p) in &preds {
        let truth = &sc.truth[*i];
        se += (p.x - truth[0]).powi(2) + (p.y - truth[1]).powi(2);
        let bx = 2.0 * pts[i - 1].x - pts[i - 2].x;
        let by = 2.0 * pts[i - 1].y - pts[i - 2].y;
        se_base += (bx - truth[0]).powi(2) + (by - truth[1]).powi(2);
    }
    let rmse = (se / preds.len() as f64).sqrt();
    let base = (se_base / preds.len() as f64).sqrt();

    let sys = single(400.0, 10.0);
    let (mut joint, mut hit_x, mut hit_y, mut total) = (0, 0, 0, 0);
    for s in 0..n - 14 {
        let out = filter_pass(&sys, &sc.observations[s..s + 10], &DiffuseInit::exact(4)).unwrap();
        let r = predict_k(&sys, out.last_filtered().unwrap(), 5, 0).unwrap()[4].rectangle;
        let truth = &sc.truth[s + 14];
        let in_x = r.x_lo <= truth[0] && truth[0] <= r.x_hi;
        let in_y = r.y_lo <= truth[1] && truth[1] <= r.y_hi;
        hit_x += in_x as usize;
        hit_y += in_y as usize;
        joint += (in_x && in_y) as usize;
        total += 1;
    }
    let cov = joint as f64 / total as f64;

    let mut fitted_hits = 0;
    for w in est.windows.iter().filter(|w| w.fit.is_some() && w.start_index + 14 < n) {
        let m = model_from_params(0.1, &w.fit.as_ref().unwrap().params).unwrap().system();
        let r = predict_k(&m, w.filtered.last().unwrap(), 5, 0).unwrap()[4].rectangle;
        let truth = &sc.truth[w.start_index + 14];
        fitted_hits += r.contains(truth[0], truth[1]) as usize;
    }
    let fitted_windows = est.windows.iter().filter(|w| w.fit.is_some() && w.start_index + 14 < n).count();

    outcome(
        rmse <= base && (0.90..=0.99).contains(&cov) && total >= 1000,
        format!(
            "one-step RMSE {rmse:.2} cm vs baseline {base:.2} cm over {} windows ({} failed); 5-step joint coverage {cov:.4} over {total} windows with the generating model (x {:.4}, y {:.4}); with per-window fitted parameters {:.4}",
            preds.len(),
            est.failed(),
            hit_x as f64 / total as f64,
            hit_y as f64 / total as f64,
            fitted_hits as f64 / fitted_windows as f64
        ),
    )
}

fn c7_velocity() -> Outcome {
    let line = single(0.0, 10.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in 0..3u64 {
        let mut rng = SeededRng::new(70 + seed);
        let init = DVector::from_vec(vec![
            rng.uniform_in(-3000.0, 0.0),
            rng.uniform_in(-1500.0, 1500.0),
            rng.uniform_in(-400.0, 400.0),
            rng.uniform_in(-200.0, 200.0),
        ]);
        let sc = simulate(&line, 200, seed, &init).unwrap();
        let fit = fit_mle(&sc.observations, 0.1, &cold_start(LC), &FitConfig::default()).unwrap();
        let m = model_from_params(0.1, &fit.params).unwrap();
        let out = filter_pass(&m.system(), &sc.observations, &DiffuseInit::exact(4)).unwrap();
        let o = &sc.observations;
        let (mut se_k, mut se_fd) = (0.0, 0.0);
        for t in 1..200 {
            let v = [sc.truth[t][2], sc.truth[t][3]];
            let f = &out.filtered[t].mean;
            se_k += (f[2] - v[0]).powi(2) + (f[3] - v[1]).powi(2);
            let fd = [(o[t][0].unwrap() - o[t - 1][0].unwrap()) / 0.1, (o[t][1].unwrap() - o[t - 1][1].unwrap()) / 0.1];
            se_fd += (fd[0] - v[0]).powi(2) + (fd[1] - v[1]).powi(2);
        }
        let (k, fd) = ((se_k / 199.0).sqrt(), (se_fd / 199.0).sqrt());
        pass &= k < fd;
        parts.push(format!("{k:.1} vs {fd:.1}"));
    }
    outcome(pass, format!("velocity RMSE filter vs finite difference (cm/s): {}", parts.join(", ")))
}

fn c8_gradient() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rng = SeededRng::new(3);
    let h = 1e-5;
    for pt in 0..20u64 {
        let p = VaeParams::from_seed(VaeConfig { k: 8, d: 2, h: 4, sigma_x: 0.15, seed: 100 + pt }).unwrap();
        let x: Vec<f64> = (0..8).map(|_| rng.uniform()).collect();
        let eps = rng.normal_vec(2);
        let (_, g) = loss_gradient(&p, &x, &eps).unwrap();
        for i in 0..g.len() {
            let mut theta = p.theta.clone();
            theta[i] += h;
            let up = loss(&p.with_theta(theta.clone()).unwrap(), &x, &eps).unwrap();
            theta[i] -= 2.0 * h;
            let down = loss(&p.with_theta(theta).unwrap(), &x, &eps).unwrap();
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1e-8));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-4 && elapsed < Duration::from_secs(10),
        format!("20 points, worst relative error {worst:.2e} (limit 1e-4), {:.2} s (limit 10 s)", elapsed.as_secs_f64()),
    )
}

fn desk_data() -> Vec<Vec<f64>> {
    let field = FieldSpec::default();
    scripted_dataset(500, 5.0, 0.1, 1, 0.0)
        .unwrap()
        .iter()
        .map(|s| {
            let u = normalize_unit(s, &field).unwrap();
            u.samples.iter().flat_map(|p| p.map(|p| [p.x, p.y]).unwrap()).collect()
        })
        .collect()
}

struct DeskRun {
    loss: Vec<f64>,
    kl: Vec<f64>,
    reconstruction_error: f64,
    seconds: f64,
}

fn desk_run(data: &[Vec<f64>], sigma_x: f64) -> DeskRun {
    let start = Instant::now();
    let config = VaeConfig { k: 100, d: 4, h: 32, sigma_x, seed: 1 };
    let (params, history) = train(data, config, &TrainConfig::default()).unwrap();
    DeskRun {
        loss: history.loss,
        kl: history.kl,
        reconstruction_error: reconstruction_error(&params, data).unwrap(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn c9_training(run: &DeskRun) -> Outcome {
    let ratio = run.loss.last().unwrap() / run.loss[0];
    outcome(
        ratio < 0.5 && run.reconstruction_error < 0.05 && run.seconds < 600.0,
        format!(
            "sigma_X 0.15: loss {:.2} -> {:.2} (ratio {ratio:.3}, limit 0.5), mean absolute deviation {:.4} (limit 0.05), {:.1} s (limit 600 s)",
            run.loss[0],
            run.loss.last().unwrap(),
            run.reconstruction_error,
            run.seconds
        ),
    )
}

fn c10_kl() -> Outcome {
    let e = std::f64::consts::E;
    let mut mu = [0.0; 10];
    let a = kl_diag_gaussian(&mu, &[1.0; 10]).unwrap();
    mu[0] = 1.0;
    let b = kl_diag_gaussian(&mu, &[1.0; 10]).unwrap();
    let c = kl_diag_gaussian(&[0.0; 10], &[e; 10]).unwrap();
    let examples = a.abs() < 1e-9 && (b - 0.5).abs() < 1e-9 && (c - 5.0 * (e * e - 3.0)).abs() < 1e-9;
    let mut rng = SeededRng::new(10);
    let mut min = f64::INFINITY;
    for _ in 0..10_000 {
        let d = 1 + rng.index(8);
        let mu: Vec<f64> = (0..d).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
        let sigma: Vec<f64> = (0..d).map(|_| rng.uniform_in(-4.0, 2.0).exp()).collect();
        min = min.min(kl_diag_gaussian(&mu, &sigma).unwrap());
    }
    outcome(
        examples && min >= 0.0,
        format!("examples ({a}, {b:.9}, {c:.6}) match: {examples}; minimum over 10^4 random inputs {min:.3e}"),
    )
}

fn c11_sigma_x(base: &DeskRun, low: &DeskRun) -> Outcome {
    let (kb, kl) = (*base.kl.last().unwrap(), *low.kl.last().unwrap());
    outcome(
        kl > kb,
        format!("final mean KL {kb:.3} at sigma_X 0.15 vs {kl:.3} at 0.0075 ({:.1} s)", low.seconds),
    )
}

fn report(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f));
    let seconds = start.elapsed().as_secs_f64();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!("{} {name}: {detail} [{seconds:.1} s]", if pass { "PASS" } else { "FAIL" });
    pass
}

fn main() -> ExitCode {
    let mut results = vec![
        report("C1 filter matches conditioning oracle", c1_oracle_filter),
        report("C2 log-likelihood matches oracle density", c2_oracle_loglik),
        report("C3 univariate filter equals batch filter", c3_univariate_batch),
        report("C4 exact diffuse agrees with large kappa", c4_diffuse),
        report("C5 parameter recovery", c5_recovery),
        report("C6 prediction quality", c6_prediction),
        report("C7 velocity extraction", c7_velocity),
        report("C8 VAE gradient check", c8_gradient),
    ];
    let data = desk_data();
    let base = catch_unwind(|| desk_run(&data, 0.15)).ok();
    let low = catch_unwind(|| desk_run(&data, 0.0075)).ok();
    results.push(report("C9 VAE training progress", || c9_training(base.as_ref().expect("desk run failed"))));
    results.push(report("C10 KL closed form", c10_kl));
    results.push(report("C11 smaller sigma_X raises KL", || {
        c11_sigma_x(base.as_ref().expect("desk run failed"), low.as_ref().expect("desk run failed"))
    }));
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
