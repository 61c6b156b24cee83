//! k-step-ahead predictions with 95% rectangles, and velocity/speed series.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kalman::{predict_next, FilterState};
use crate::state_space::{LinearGaussianSystem, OBS_DIM, STATE_DIM};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rectangle {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x_lo <= x && x <= self.x_hi && self.y_lo <= y && y <= self.y_hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub horizon: usize,
    pub mean: [f64; 2],
    pub cov: Matrix2<f64>,
    pub rectangle: Rectangle,
}

impl Prediction {
    fn new(horizon: usize, mean: [f64; 2], cov: Matrix2<f64>) -> Self {
        let hx = Z95 * cov[(0, 0)].max(0.0).sqrt();
        let hy = Z95 * cov[(1, 1)].max(0.0).sqrt();
        let rectangle = Rectangle { x_lo: mean[0] - hx, x_hi: mean[0] + hx, y_lo: mean[1] - hy, y_hi: mean[1] + hy };
        Self { horizon, mean, cov, rectangle }
    }
}

/// States `Z_{t+1} .. Z_{t+k}` propagated without updates.
pub fn propagate(sys: &LinearGaussianSystem, state: &FilterState, k: usize) -> Vec<FilterState> {
    let mut out = Vec::with_capacity(k);
    let mut s = state.clone();
    for _ in 0..k {
        s = predict_next(sys, &s);
        out.push(s.clone());
    }
    out
}

/// `k` predictions of one entity's position from a filtered state.
pub fn predict_k(sys: &LinearGaussianSystem, state: &FilterState, k: usize, entity: usize) -> Result<Vec<Prediction>> {
    if k == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if (entity + 1) * OBS_DIM > sys.obs_dim() {
        return Err(Error::InvalidArgument(format!("no entity {entity} in the model")));
    }
    let rows: Vec<usize> = vec![OBS_DIM * entity, OBS_DIM * entity + 1];
    let w = sys.observation.select_rows(&rows);
    Ok(propagate(sys, state, k)
        .iter()
        .enumerate()
        .map(|(h, s)| {
            let mean = &w * &s.mean;
            let cov: DMatrix<f64> = &w * &s.cov * w.transpose();
            Prediction::new(h + 1, [mean[0], mean[1]], Matrix2::new(cov[(0, 0)], cov[(0, 1)], cov[(1, 0)], cov[(1, 1)]))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KinematicsSeries {
    /// cm/s.
    pub velocity: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
}

pub fn kinematics(states: &[FilterState], entity: usize) -> Result<KinematicsSeries> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no states to extract velocities from".into()));
    }
    let base = STATE_DIM * entity;
    if let Some(s) = states.iter().find(|s| s.mean.len() < base + STATE_DIM) {
        return Err(Error::Dimension { expected: base + STATE_DIM, found: s.mean.len() });
    }
    let velocity: Vec<[f64; 2]> = states.iter().map(|s| [s.mean[base + 2], s.mean[base + 3]]).collect();
    let speed = velocity.iter().map(|v| v[0].hypot(v[1])).collect();
    Ok(KinematicsSeries { velocity, speed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kalman::{filter_pass, DiffuseInit};
    use crate::state_space::{build_single, CovarianceMode};
    use nalgebra::DVector;

    fn system(q: f64) -> LinearGaussianSystem {
        build_single(0.1, Matrix2::identity() * q, [1.0, 1.0], CovarianceMode::LogCholesky).unwrap().system()
    }

    #[test]
    fn straight_line_predictions() {
        let state = FilterState::new(0, DVector::from_vec(vec![0.0, 0.0, 10.0, 0.0]), DMatrix::zeros(4, 4));
        let preds = predict_k(&system(0.0), &state, 5, 0).unwrap();
        for (i, p) in preds.iter().enumerate() {
            assert!((p.mean[0] - (i + 1) as f64).abs() < 1e-12 && p.mean[1] == 0.0);
            assert_eq!(p.rectangle.x_lo, p.rectangle.x_hi);
            assert_eq!(p.horizon, i + 1);
        }
    }

    #[test]
    fn one_step_covariance_at_rest() {
        let state = FilterState::new(0, DVector::zeros(4), DMatrix::zeros(4, 4));
        let p = &predict_k(&system(1.0), &state, 1, 0).unwrap()[0];
        assert!((p.cov - Matrix2::identity() * 2.5e-5).abs().max() < 1e-18);
        assert!((p.rectangle.x_hi - 0.0098).abs() < 1e-12);
        assert!(p.rectangle.contains(0.0, 0.0));
    }

    #[test]
    fn zero_horizon_rejected() {
        let state = FilterState::new(0, DVector::zeros(4), DMatrix::zeros(4, 4));
        assert!(predict_k(&system(1.0), &state, 0, 0).is_err());
    }

    #[test]
    fn one_step_matches_filter() {
        let sys = system(400.0);
        let obs: Vec<Vec<Option<f64>>> = (0..10).map(|i| vec![Some(3.0 * i as f64), Some(i as f64 * 0.5)]).collect();
        let out = filter_pass(&sys, &obs, &DiffuseInit::exact(4)).unwrap();
        let p = &predict_k(&sys, out.last_filtered().unwrap(), 1, 0).unwrap()[0];
        let z = out.predicted.last().unwrap();
        assert!((p.mean[0] - z.mean[0]).abs() < 1e-12 && (p.mean[1] - z.mean[1]).abs() < 1e-12);
        assert!((p.cov[(0, 0)] - z.cov[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn speeds() {
        let s = FilterState::new(0, DVector::from_vec(vec![1.0, 2.0, 300.0, 400.0]), DMatrix::zeros(4, 4));
        let k = kinematics(&[s], 0).unwrap();
        assert_eq!(k.speed, vec![500.0]);
        let z = FilterState::new(0, DVector::zeros(4), DMatrix::zeros(4, 4));
        assert!(kinematics(&[z.clone(), z], 0).unwrap().speed.iter().all(|v| *v == 0.0));
        assert!(kinematics(&[], 0).is_err());
    }

    #[test]
    fn noiseless_line_speed() {
        let sys = build_single(0.1, Matrix2::zeros(), [1e-4, 1e-4], CovarianceMode::LogCholesky).unwrap().system();
        let obs: Vec<Vec<Option<f64>>> = (0..12).map(|i| vec![Some(30.0 * i as f64), Some(0.0)]).collect();
        let out = filter_pass(&sys, &obs, &DiffuseInit::exact(4)).unwrap();
        let k = kinematics(&out.filtered[out.diffuse_steps..], 0).unwrap();
        assert!(k.speed.iter().all(|v| (v - 300.0).abs() < 1e-3));
    }
}
