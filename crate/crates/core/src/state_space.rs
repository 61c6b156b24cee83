//! Newtonian constant-acceleration-noise state-space model.
//!
//! Per entity the state is `z = (x, y, vx, vy)` and evolves as
//!
//! ```text
//! z_t = T z_{t-1} + R a_t,     a_t ~ N(0, Q)
//! η_t = W z_t + ε_t,           ε_t ~ N(0, diag(σx², σy²))
//! T = [[I, dt I], [0, I]],  R = [[dt²/2 I], [dt I]],  W = [I | 0]
//! ```
//!
//! Several entities stack block-diagonally with no cross-entity covariance.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-entity state dimension.
pub const STATE_DIM: usize = 4;
/// Per-entity observation dimension.
pub const OBS_DIM: usize = 2;
/// Length of the per-entity parameter vector (both encodings).
pub const PARAMS_PER_ENTITY: usize = 6;

const PSD_SLACK: f64 = 1e-12;

/// How the acceleration covariance `Q` is parameterized for estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceMode {
    /// `Q = C Cᵀ` with `C` lower triangular and positive diagonal; symmetric PSD.
    #[default]
    LogCholesky,
    /// Four unconstrained entries of `Q`, symmetry not imposed.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleEntityModel {
    pub dt: f64,
    pub transition: Matrix4<f64>,
    pub loading: Matrix4x2<f64>,
    pub observation: Matrix2x4<f64>,
    /// Acceleration covariance `Q`, (cm/s²)².
    pub accel_cov: Matrix2<f64>,
    /// Measurement noise standard deviations `(σx, σy)`, cm.
    pub sigma: [f64; 2],
    pub mode: CovarianceMode,
}

pub fn transition_matrix(dt: f64) -> Matrix4<f64> {
    Matrix4::new(
        1.0, 0.0, dt, 0.0, //
        0.0, 1.0, 0.0, dt, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

pub fn loading_matrix(dt: f64) -> Matrix4x2<f64> {
    let h = 0.5 * dt * dt;
    Matrix4x2::new(
        h, 0.0, //
        0.0, h, //
        dt, 0.0, //
        0.0, dt,
    )
}

pub fn observation_matrix() -> Matrix2x4<f64> {
    Matrix2x4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0,
    )
}

/// Symmetric positive semidefinite check with a small relative slack.
pub fn is_psd_2x2(q: &Matrix2<f64>) -> bool {
    let scale = q.abs().max().max(1.0);
    let slack = PSD_SLACK * scale;
    if !q.iter().all(|v| v.is_finite()) || (q[(0, 1)] - q[(1, 0)]).abs() > slack {
        return false;
    }
    let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
    q[(0, 0)] >= -slack && q[(1, 1)] >= -slack && det >= -slack * scale
}

pub fn build_single(
    dt: f64,
    q: Matrix2<f64>,
    sigma: [f64; 2],
    mode: CovarianceMode,
) -> Result<SingleEntityModel> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidModel(format!("dt must be positive, got {dt}")));
    }
    if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "measurement std devs must be positive, got {sigma:?}"
        )));
    }
    match mode {
        CovarianceMode::LogCholesky if !is_psd_2x2(&q) => {
            return Err(Error::NotPositiveSemidefinite)
        }
        CovarianceMode::Raw if !q.iter().all(|v| v.is_finite()) => {
            return Err(Error::InvalidModel("non-finite Q entry".into()))
        }
        _ => {}
    }
    Ok(SingleEntityModel {
        dt,
        transition: transition_matrix(dt),
        loading: loading_matrix(dt),
        observation: observation_matrix(),
        accel_cov: q,
        sigma,
        mode,
    })
}

/// One Newtonian step: `x + dt v + dt²/2 a`, `v + dt a`.
pub fn propagate_state(model: &SingleEntityModel, state: &Vector4<f64>, accel: &Vector2<f64>) -> Vector4<f64> {
    model.transition * state + model.loading * accel
}

impl SingleEntityModel {
    pub fn obs_variance(&self) -> [f64; 2] {
        [self.sigma[0] * self.sigma[0], self.sigma[1] * self.sigma[1]]
    }

    /// `R Q Rᵀ`, the state disturbance covariance.
    pub fn state_noise(&self) -> Matrix4<f64> {
        self.loading * self.accel_cov * self.loading.transpose()
    }

    pub fn system(&self) -> LinearGaussianSystem {
        LinearGaussianSystem::from(self)
    }
}

/// Several entities driven by independent accelerations and measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedModel {
    pub dt: f64,
    pub entities: Vec<SingleEntityModel>,
}

pub fn stack(models: &[SingleEntityModel]) -> Result<StackedModel> {
    let first = models
        .first()
        .ok_or_else(|| Error::InvalidModel("cannot stack zero models".into()))?;
    if let Some(bad) = models.iter().find(|m| m.dt != first.dt) {
        return Err(Error::InvalidModel(format!(
            "mismatched dt in stack: {} vs {}",
            first.dt, bad.dt
        )));
    }
    Ok(StackedModel { dt: first.dt, entities: models.to_vec() })
}

fn block_diag<F>(k: usize, rows: usize, cols: usize, block: F) -> DMatrix<f64>
where
    F: Fn(usize) -> DMatrix<f64>,
{
    let mut out = DMatrix::zeros(k * rows, k * cols);
    for e in 0..k {
        out.view_mut((e * rows, e * cols), (rows, cols)).copy_from(&block(e));
    }
    out
}

fn to_dmatrix<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_fn(R, C, |i, j| m[(i, j)])
}

impl StackedModel {
    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        STATE_DIM * self.len()
    }

    pub fn obs_dim(&self) -> usize {
        OBS_DIM * self.len()
    }

    pub fn transition(&self) -> DMatrix<f64> {
        block_diag(self.len(), 4, 4, |e| to_dmatrix(&self.entities[e].transition))
    }

    pub fn loading(&self) -> DMatrix<f64> {
        block_diag(self.len(), 4, 2, |e| to_dmatrix(&self.entities[e].loading))
    }

    pub fn observation(&self) -> DMatrix<f64> {
        block_diag(self.len(), 2, 4, |e| to_dmatrix(&self.entities[e].observation))
    }

    /// `BlockDiag(Q₁, …, Q_k)`.
    pub fn accel_cov(&self) -> DMatrix<f64> {
        block_diag(self.len(), 2, 2, |e| to_dmatrix(&self.entities[e].accel_cov))
    }

    /// Diagonal of `Σ = Diag(σ²_{x,1}, σ²_{y,1}, …)`.
    pub fn obs_variance(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.obs_dim(),
            self.entities.iter().flat_map(|m| m.obs_variance()),
        )
    }

    pub fn system(&self) -> LinearGaussianSystem {
        LinearGaussianSystem::from(self)
    }
}

/// Dense time-invariant system consumed by the filters.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianSystem {
    pub transition: DMatrix<f64>,
    pub loading: DMatrix<f64>,
    pub observation: DMatrix<f64>,
    pub accel_cov: DMatrix<f64>,
    /// Diagonal measurement variances.
    pub obs_variance: DVector<f64>,
    /// Precomputed `R Q Rᵀ`.
    pub state_noise: DMatrix<f64>,
}

impl LinearGaussianSystem {
    pub fn new(
        transition: DMatrix<f64>,
        loading: DMatrix<f64>,
        observation: DMatrix<f64>,
        accel_cov: DMatrix<f64>,
        obs_variance: DVector<f64>,
    ) -> Result<Self> {
        let n = transition.nrows();
        let p = observation.nrows();
        let checks = [
            (transition.ncols(), n),
            (loading.nrows(), n),
            (accel_cov.nrows(), loading.ncols()),
            (accel_cov.ncols(), loading.ncols()),
            (observation.ncols(), n),
            (obs_variance.len(), p),
        ];
        for (found, expected) in checks {
            if found != expected {
                return Err(Error::Dimension { expected, found });
            }
        }
        let state_noise = &loading * &accel_cov * loading.transpose();
        Ok(Self { transition, loading, observation, accel_cov, obs_variance, state_noise })
    }

    pub fn state_dim(&self) -> usize {
        self.transition.nrows()
    }

    pub fn obs_dim(&self) -> usize {
        self.observation.nrows()
    }
}

impl From<&SingleEntityModel> for LinearGaussianSystem {
    fn from(m: &SingleEntityModel) -> Self {
        let var = m.obs_variance();
        Self::new(
            to_dmatrix(&m.transition),
            to_dmatrix(&m.loading),
            to_dmatrix(&m.observation),
            to_dmatrix(&m.accel_cov),
            DVector::from_row_slice(&var),
        )
        .expect("single-entity blocks have consistent shapes")
    }
}

impl From<&StackedModel> for LinearGaussianSystem {
    fn from(m: &StackedModel) -> Self {
        Self::new(m.transition(), m.loading(), m.observation(), m.accel_cov(), m.obs_variance())
            .expect("stacked blocks have consistent shapes")
    }
}

/// Optimizer-side encoding of one entity's `(Q, σ)`.
///
/// Log-Cholesky layout: `(log σx, log σy, log c₁₁, c₂₁, log c₂₂, unused)`.
/// Raw layout: `(log σx, log σy, q₁₁, q₂₁, q₁₂, q₂₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub mode: CovarianceMode,
    pub values: [f64; PARAMS_PER_ENTITY],
}

impl ParamVector {
    pub fn zeros(mode: CovarianceMode) -> Self {
        Self { mode, values: [0.0; PARAMS_PER_ENTITY] }
    }

    /// Number of coordinates the optimizer moves: 5 for log-Cholesky, 6 raw.
    pub fn active_len(&self) -> usize {
        match self.mode {
            CovarianceMode::LogCholesky => 5,
            CovarianceMode::Raw => 6,
        }
    }

    pub fn active(&self) -> &[f64] {
        &self.values[..self.active_len()]
    }

    pub fn with_active(&self, active: &[f64]) -> Self {
        let mut out = *self;
        out.values[..self.active_len()].copy_from_slice(active);
        out
    }
}

pub fn decode_params(p: &ParamVector) -> (Matrix2<f64>, [f64; 2]) {
    let v = &p.values;
    let sigma = [v[0].exp(), v[1].exp()];
    let q = match p.mode {
        CovarianceMode::LogCholesky => {
            let c = Matrix2::new(v[2].exp(), 0.0, v[3], v[4].exp());
            c * c.transpose()
        }
        // Column-major (q11, q21, q12, q22).
        CovarianceMode::Raw => Matrix2::new(v[2], v[4], v[3], v[5]),
    };
    (q, sigma)
}

/// Fails for log-Cholesky when `Q` is not positive definite: a singular `Q`
/// has no finite log-Cholesky coordinates.
pub fn encode_params(q: &Matrix2<f64>, sigma: [f64; 2], mode: CovarianceMode) -> Result<ParamVector> {
    if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidModel(format!("sigma must be positive, got {sigma:?}")));
    }
    let mut values = [0.0; PARAMS_PER_ENTITY];
    values[0] = sigma[0].ln();
    values[1] = sigma[1].ln();
    match mode {
        CovarianceMode::LogCholesky => {
            if !is_psd_2x2(q) {
                return Err(Error::NotPositiveSemidefinite);
            }
            let c11 = q[(0, 0)].sqrt();
            if !(c11 > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let c21 = q[(1, 0)] / c11;
            let rem = q[(1, 1)] - c21 * c21;
            if !(rem > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            values[2] = c11.ln();
            values[3] = c21;
            values[4] = rem.sqrt().ln();
        }
        CovarianceMode::Raw => {
            values[2] = q[(0, 0)];
            values[3] = q[(1, 0)];
            values[4] = q[(0, 1)];
            values[5] = q[(1, 1)];
        }
    }
    Ok(ParamVector { mode, values })
}

/// Builds a model straight from a parameter vector.
pub fn model_from_params(dt: f64, p: &ParamVector) -> Result<SingleEntityModel> {
    let (q, sigma) = decode_params(p);
    build_single(dt, q, sigma, p.mode)
}

/// JSON form of a (possibly single-entity) stacked model; matrices row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub dt: f64,
    pub entities: Vec<EntityDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDocument {
    pub mode: CovarianceMode,
    pub transition: Vec<Vec<f64>>,
    pub loading: Vec<Vec<f64>>,
    pub observation: Vec<Vec<f64>>,
    pub accel_cov: Vec<Vec<f64>>,
    pub sigma: [f64; 2],
}

fn rows_of<const R: usize, const C: usize>(m: &nalgebra::SMatrix<f64, R, C>) -> Vec<Vec<f64>> {
    (0..R).map(|i| (0..C).map(|j| m[(i, j)]).collect()).collect()
}

fn rows_match<const R: usize, const C: usize>(rows: &[Vec<f64>], m: &nalgebra::SMatrix<f64, R, C>) -> bool {
    rows.len() == R
        && rows
            .iter()
            .enumerate()
            .all(|(i, r)| r.len() == C && r.iter().enumerate().all(|(j, v)| (v - m[(i, j)]).abs() <= 1e-12))
}

impl ModelDocument {
    pub fn from_stacked(model: &StackedModel) -> Self {
        Self {
            dt: model.dt,
            entities: model
                .entities
                .iter()
                .map(|m| EntityDocument {
                    mode: m.mode,
                    transition: rows_of(&m.transition),
                    loading: rows_of(&m.loading),
                    observation: rows_of(&m.observation),
                    accel_cov: rows_of(&m.accel_cov),
                    sigma: m.sigma,
                })
                .collect(),
        }
    }

    pub fn from_single(model: &SingleEntityModel) -> Self {
        Self::from_stacked(&StackedModel { dt: model.dt, entities: vec![model.clone()] })
    }

    /// Rebuilds the model, checking the stored structural matrices.
    pub fn to_stacked(&self) -> Result<StackedModel> {
        let models = self
            .entities
            .iter()
            .map(|e| {
                if e.accel_cov.len() != 2 || e.accel_cov.iter().any(|r| r.len() != 2) {
                    return Err(Error::InvalidModel("accel_cov must be 2x2".into()));
                }
                let q = Matrix2::new(e.accel_cov[0][0], e.accel_cov[0][1], e.accel_cov[1][0], e.accel_cov[1][1]);
                let m = build_single(self.dt, q, e.sigma, e.mode)?;
                if !rows_match(&e.transition, &m.transition)
                    || !rows_match(&e.loading, &m.loading)
                    || !rows_match(&e.observation, &m.observation)
                {
                    return Err(Error::InvalidModel("structural matrices inconsistent with dt".into()));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        stack(&models)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
