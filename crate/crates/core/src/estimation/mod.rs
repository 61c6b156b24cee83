//! Maximum-likelihood estimation of `(Q, σ)` and the sliding-window
//! fit-filter-predict iteration.

pub mod bfgs;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{self, DiffuseInit, FilterState, InitMode};
use crate::state_space::{
    decode_params, encode_params, model_from_params, CovarianceMode, LinearGaussianSystem, ParamVector, STATE_DIM,
};
use crate::trajectory::{sliding_windows, Point, TrackingSeries};

pub use bfgs::{central_gradient, minimize, BfgsConfig, BfgsOutcome};

/// Shortest window `fit_mle` accepts.
pub const MIN_WINDOW: usize = 5;

/// Log-likelihood with the diffuse-phase terms left out.
pub fn log_likelihood(model: &LinearGaussianSystem, observations: &[Vec<Option<f64>>], init: &DiffuseInit) -> Result<f64> {
    kalman::univariate_loglik(model, observations, init)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub bfgs: BfgsConfig,
    pub init: InitMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { bfgs: BfgsConfig::default(), init: InitMode::ExactDiffuse }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: ParamVector,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub evaluations: usize,
}

impl FitResult {
    pub fn accel_cov(&self) -> Matrix2<f64> {
        decode_params(&self.params).0
    }

    pub fn sigma(&self) -> [f64; 2] {
        decode_params(&self.params).1
    }
}

/// Starting point used when no warm start is available: `Q = 100 I`,
/// `σ = (30, 30)` cm.
pub fn cold_start(mode: CovarianceMode) -> ParamVector {
    encode_params(&(Matrix2::identity() * 100.0), [30.0, 30.0], mode).expect("cold start is positive definite")
}

pub fn init_for(config: &FitConfig) -> DiffuseInit {
    match config.init {
        InitMode::ExactDiffuse => DiffuseInit::exact(STATE_DIM),
        InitMode::LargeKappa(kappa) => DiffuseInit::large_kappa(STATE_DIM, kappa),
    }
}

/// Log-likelihood of a single-entity window at a parameter vector.
pub fn params_loglik(observations: &[Vec<Option<f64>>], dt: f64, params: &ParamVector, config: &FitConfig) -> Result<f64> {
    let model = model_from_params(dt, params)?;
    log_likelihood(&model.system(), observations, &init_for(config))
}

/// Maximizes the single-entity log-likelihood over `params.active()`.
pub fn fit_mle(observations: &[Vec<Option<f64>>], dt: f64, start: &ParamVector, config: &FitConfig) -> Result<FitResult> {
    if observations.len() < MIN_WINDOW {
        return Err(Error::WindowTooShort { length: observations.len(), minimum: MIN_WINDOW });
    }
    let objective = |theta: &[f64]| {
        let p = start.with_active(theta);
        match params_loglik(observations, dt, &p, config) {
            Ok(l) if l.is_finite() => -l,
            _ => f64::INFINITY,
        }
    };
    if !objective(start.active()).is_finite() {
        return Err(Error::NonFiniteLikelihood);
    }
    let out = minimize(objective, start.active(), &config.bfgs);
    Ok(FitResult {
        params: start.with_active(&out.x),
        loglik: -out.f,
        iterations: out.iterations,
        converged: out.converged,
        gradient_norm: out.gradient_norm,
        evaluations: out.evaluations,
    })
}

/// Fits a window and filters it at the optimum.
pub fn fit_filter(
    observations: &[Vec<Option<f64>>],
    dt: f64,
    start: &ParamVector,
    config: &FitConfig,
) -> Result<(FitResult, kalman::FilterOutput)> {
    let fit = fit_mle(observations, dt, start, config)?;
    let model = model_from_params(dt, &fit.params)?;
    let out = kalman::filter_pass(&model.system(), observations, &init_for(config))?;
    Ok((fit, out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingConfig {
    pub window_len: usize,
    pub warm_start: bool,
    pub mode: CovarianceMode,
    pub fit: FitConfig,
}

impl Default for SlidingConfig {
    fn default() -> Self {
        Self { window_len: 10, warm_start: false, mode: CovarianceMode::LogCholesky, fit: FitConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimate {
    pub start_index: usize,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
    /// Filtered states over the fitted window.
    pub filtered: Vec<FilterState>,
    /// One-step prediction for the sample after the window.
    pub prediction: Option<FilterState>,
    /// Observed sample after the window.
    pub target: Point,
}

impl WindowEstimate {
    pub fn target_index(&self, window_len: usize) -> usize {
        self.start_index + window_len
    }

    pub fn predicted_point(&self) -> Option<Point> {
        self.prediction.as_ref().map(|p| Point::new(p.mean[0], p.mean[1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowEstimates {
    pub window_len: usize,
    pub windows: Vec<WindowEstimate>,
}

impl WindowEstimates {
    pub fn failed(&self) -> usize {
        self.windows.iter().filter(|w| w.fit.is_none()).count()
    }

    pub fn total_iterations(&self) -> usize {
        self.windows.iter().filter_map(|w| w.fit.as_ref()).map(|f| f.iterations).sum()
    }

    /// `(target index, predicted point)` for every successful window.
    pub fn predictions(&self) -> Vec<(usize, Point)> {
        self.windows
            .iter()
            .filter_map(|w| w.predicted_point().map(|p| (w.target_index(self.window_len), p)))
            .collect()
    }
}

fn fit_window(
    points: &[Point],
    start_index: usize,
    dt: f64,
    start: &ParamVector,
    config: &SlidingConfig,
) -> (WindowEstimate, Option<ParamVector>) {
    let n = config.window_len;
    let observations: Vec<Vec<Option<f64>>> = points[..n].iter().map(|p| vec![Some(p.x), Some(p.y)]).collect();
    let mut estimate = WindowEstimate {
        start_index,
        fit: None,
        error: None,
        filtered: Vec::new(),
        prediction: None,
        target: points[n],
    };
    match fit_filter(&observations, dt, start, &config.fit) {
        Ok((fit, mut out)) => {
            let params = fit.params;
            estimate.prediction = out.predicted.pop();
            estimate.filtered = out.filtered;
            estimate.fit = Some(fit);
            (estimate, Some(params))
        }
        Err(e) => {
            estimate.error = Some(e.to_string());
            (estimate, None)
        }
    }
}

/// Fits every stride-1 window of `window_len` gap-free samples that has a
/// following sample, filters it at the optimum and predicts the next step.
/// Each window starts from its own diffuse initialization.
pub fn sliding_window_fit(series: &TrackingSeries, config: &SlidingConfig) -> Result<WindowEstimates> {
    if config.window_len < MIN_WINDOW {
        return Err(Error::WindowTooShort { length: config.window_len, minimum: MIN_WINDOW });
    }
    let windows = sliding_windows(series, config.window_len + 1);
    if windows.is_empty() {
        let longest = series.stretches().iter().map(|s| s.1).max().unwrap_or(0);
        return Err(Error::WindowTooShort { length: longest, minimum: config.window_len + 1 });
    }
    let cold = cold_start(config.mode);
    let results = if config.warm_start {
        let mut start = cold;
        let mut out = Vec::with_capacity(windows.len());
        let mut previous_end = None;
        for w in &windows {
            if previous_end != Some(w.start_index) {
                start = cold;
            }
            let (estimate, params) = fit_window(&w.points, w.start_index, series.dt, &start, config);
            start = params.unwrap_or(cold);
            previous_end = Some(w.start_index + 1);
            out.push(estimate);
        }
        out
    } else {
        windows
            .par_iter()
            .map(|w| fit_window(&w.points, w.start_index, series.dt, &cold, config).0)
            .collect()
    };
    Ok(WindowEstimates { window_len: config.window_len, windows: results })
}
