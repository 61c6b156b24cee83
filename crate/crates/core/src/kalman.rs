//! Kalman recursions in batch and univariate-sequential form.
//!
//! With `Z_t`, `P_t` the one-step prediction of the state and its covariance,
//! each step computes
//!
//! ```text
//! δ_t = η_t − W Z_t,   F_t = W P_t Wᵀ + Σ,   K_t = P_t Wᵀ
//! Z_{t+1} = T (Z_t + K_t F_t⁻¹ δ_t)
//! P_{t+1} = T (P_t − K_t F_t⁻¹ K_tᵀ) Tᵀ + R Q Rᵀ
//! ```
//!
//! Initialization is either exact diffuse, where the prior covariance is
//! split as `P_* + κ P_∞` and the `κ → ∞` limit is propagated through a pair
//! of recursions until `P_∞` vanishes, or the large-κ approximation run with
//! Joseph-form updates. Likelihood terms of diffuse observations are left
//! out of the log-likelihood sum.
//!
//! Observations are `[Option<f64>]` per step; `None` components are missing
//! and skip the update.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::state_space::LinearGaussianSystem;

/// Innovation covariances with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Diffuse variances at or below this are treated as zero.
pub const DIFFUSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMode {
    ExactDiffuse,
    /// Fold the diffuse part in as `κ P_∞`.
    LargeKappa(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseInit {
    pub mean: DVector<f64>,
    pub p_star: DMatrix<f64>,
    pub p_inf: DMatrix<f64>,
    pub mode: InitMode,
}

impl DiffuseInit {
    /// Fully diffuse prior on every state component.
    pub fn exact(state_dim: usize) -> Self {
        Self {
            mean: DVector::zeros(state_dim),
            p_star: DMatrix::zeros(state_dim, state_dim),
            p_inf: DMatrix::identity(state_dim, state_dim),
            mode: InitMode::ExactDiffuse,
        }
    }

    pub fn large_kappa(state_dim: usize, kappa: f64) -> Self {
        Self { mode: InitMode::LargeKappa(kappa), ..Self::exact(state_dim) }
    }

    /// Ordinary Gaussian prior `N(mean, cov)` with no diffuse part.
    pub fn proper(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        let n = mean.len();
        Self { mean, p_star: cov, p_inf: DMatrix::zeros(n, n), mode: InitMode::ExactDiffuse }
    }

    pub fn state_dim(&self) -> usize {
        self.mean.len()
    }

    fn initial_state(&self) -> FilterState {
        match self.mode {
            InitMode::ExactDiffuse => FilterState {
                t: 0,
                mean: self.mean.clone(),
                cov: self.p_star.clone(),
                p_inf: nonzero(self.p_inf.clone()),
            },
            InitMode::LargeKappa(kappa) => FilterState {
                t: 0,
                mean: self.mean.clone(),
                cov: &self.p_star + &self.p_inf * kappa,
                p_inf: None,
            },
        }
    }
}

/// Mean and covariance of the state at step `t`, plus its diffuse part.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub t: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub p_inf: Option<DMatrix<f64>>,
}

impl FilterState {
    pub fn new(t: usize, mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { t, mean, cov, p_inf: None }
    }

    pub fn is_diffuse(&self) -> bool {
        self.p_inf.is_some()
    }
}

/// Innovation quantities for one step, restricted to observed components.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationRecord {
    /// `η − W Z`, `None` where the observation is missing. The univariate
    /// form stores its sequential scalar innovations here.
    pub delta: Vec<Option<f64>>,
    pub observed: Vec<usize>,
    /// `W P Wᵀ + Σ` on the observed components (diagonal of the scalar
    /// variances in the univariate form).
    pub f: DMatrix<f64>,
    /// `W P_∞ Wᵀ` while the step is diffuse.
    pub f_inf: Option<DMatrix<f64>>,
    /// `K = P Wᵀ` on the observed columns.
    pub gain: DMatrix<f64>,
    pub diffuse: bool,
}

/// One step's contribution to the log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoglikTerm {
    pub log_det: f64,
    pub quad: f64,
    /// Scalar observations included in `log_det` and `quad`.
    pub count: usize,
    /// Step carried a diffuse observation; those components are excluded.
    pub diffuse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterStep {
    /// Updated state `E[z_t | η_1..η_t]`.
    pub filtered: FilterState,
    /// One-step prediction `E[z_{t+1} | η_1..η_t]`.
    pub next: FilterState,
    pub innovation: InnovationRecord,
    pub term: LoglikTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    /// `Z_1 .. Z_{n+1}`; the first entry is the initial state.
    pub predicted: Vec<FilterState>,
    /// `Z_{t|t}` for `t = 1..n`.
    pub filtered: Vec<FilterState>,
    pub innovations: Vec<InnovationRecord>,
    pub terms: Vec<LoglikTerm>,
    /// Number of steps flagged diffuse.
    pub diffuse_steps: usize,
    /// Dimension of the largest matrix factorized during the pass.
    pub largest_inversion: usize,
}

impl FilterOutput {
    pub fn loglik(&self) -> f64 {
        loglik_from_terms(&self.terms)
    }

    pub fn last_filtered(&self) -> Option<&FilterState> {
        self.filtered.last()
    }
}

/// `−(N/2) log 2π − ½ Σ (log det F_t + δ_tᵀ F_t⁻¹ δ_t)` over included terms.
pub fn loglik_from_terms(terms: &[LoglikTerm]) -> f64 {
    let count: usize = terms.iter().map(|t| t.count).sum();
    let sum: f64 = terms.iter().map(|t| t.log_det + t.quad).sum();
    -0.5 * count as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * sum
}

pub(crate) fn symmetrize(p: &mut DMatrix<f64>) {
    let n = p.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
}

fn nonzero(p: DMatrix<f64>) -> Option<DMatrix<f64>> {
    if p.iter().all(|v| v.abs() <= DIFFUSE_TOL) {
        None
    } else {
        Some(p)
    }
}

/// Condition number of a symmetric matrix from its eigenvalues.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return if m[(0, 0)] > 0.0 { 1.0 } else { f64::INFINITY };
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if !(min > 0.0) || !max.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn factor(f: &DMatrix<f64>, step: usize) -> Result<Cholesky<f64, Dyn>> {
    let condition = condition_number(f);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularInnovation { step, condition });
    }
    Cholesky::new(f.clone()).ok_or(Error::SingularInnovation { step, condition })
}

fn rows(w: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    w.select_rows(idx)
}

fn check_obs(sys: &LinearGaussianSystem, obs: &[Option<f64>]) -> Result<()> {
    if obs.len() != sys.obs_dim() {
        return Err(Error::Dimension { expected: sys.obs_dim(), found: obs.len() });
    }
    Ok(())
}

/// Time update `Z ← T Z`, `P ← T P Tᵀ + R Q Rᵀ`, `P_∞ ← T P_∞ Tᵀ`.
pub fn predict_next(sys: &LinearGaussianSystem, state: &FilterState) -> FilterState {
    let t = &sys.transition;
    let mean = t * &state.mean;
    let mut cov = t * &state.cov * t.transpose() + &sys.state_noise;
    symmetrize(&mut cov);
    let p_inf = state.p_inf.as_ref().and_then(|pi| {
        let mut next = t * pi * t.transpose();
        symmetrize(&mut next);
        nonzero(next)
    });
    FilterState { t: state.t + 1, mean, cov, p_inf }
}

struct Update {
    filtered: FilterState,
    record: InnovationRecord,
    term: LoglikTerm,
    largest: usize,
}

/// Standard (or Joseph-form) update on the component subset `idx`.
fn standard_update(
    sys: &LinearGaussianSystem,
    mean: &mut DVector<f64>,
    cov: &mut DMatrix<f64>,
    obs: &[Option<f64>],
    idx: &[usize],
    joseph: bool,
    step: usize,
) -> Result<(f64, f64)> {
    let w = rows(&sys.observation, idx);
    let v = DVector::from_iterator(idx.len(), idx.iter().map(|&i| obs[i].unwrap())) - &w * &*mean;
    let m = &*cov * w.transpose();
    let mut f = &w * &m;
    for (j, &i) in idx.iter().enumerate() {
        f[(j, j)] += sys.obs_variance[i];
    }
    symmetrize(&mut f);
    let chol = factor(&f, step)?;
    let finv_v = chol.solve(&v);
    *mean += &m * &finv_v;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let quad = v.dot(&finv_v);
    if joseph {
        let k = chol.solve(&m.transpose()).transpose();
        let n = cov.nrows();
        let a = DMatrix::identity(n, n) - &k * &w;
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            idx.len(),
            idx.iter().map(|&i| sys.obs_variance[i]),
        ));
        *cov = &a * &*cov * a.transpose() + &k * sigma * k.transpose();
    } else {
        let finv_mt = chol.solve(&m.transpose());
        *cov -= &m * finv_mt;
    }
    symmetrize(cov);
    Ok((log_det, quad))
}

struct DiffuseBlock {
    d_idx: Vec<usize>,
    n_idx: Vec<usize>,
}

fn split_diffuse(f_inf: &DMatrix<f64>, observed: &[usize]) -> DiffuseBlock {
    let mut d_idx = Vec::new();
    let mut n_idx = Vec::new();
    for (j, &i) in observed.iter().enumerate() {
        if f_inf[(j, j)] > DIFFUSE_TOL {
            d_idx.push(i);
        } else {
            n_idx.push(i);
        }
    }
    DiffuseBlock { d_idx, n_idx }
}

fn batch_update(
    sys: &LinearGaussianSystem,
    state: &FilterState,
    obs: &[Option<f64>],
    joseph: bool,
    shadow_inf: Option<&DMatrix<f64>>,
) -> Result<(Update, Option<DMatrix<f64>>)> {
    check_obs(sys, obs)?;
    let step = state.t;
    let observed: Vec<usize> = (0..obs.len()).filter(|&i| obs[i].is_some()).collect();
    let w_o = rows(&sys.observation, &observed);
    let pre_v = DVector::from_iterator(observed.len(), observed.iter().map(|&i| obs[i].unwrap()))
        - &w_o * &state.mean;
    let gain = &state.cov * w_o.transpose();
    let mut f_rec = &w_o * &gain;
    for (j, &i) in observed.iter().enumerate() {
        f_rec[(j, j)] += sys.obs_variance[i];
    }
    let mut delta = vec![None; obs.len()];
    for (j, &i) in observed.iter().enumerate() {
        delta[i] = Some(pre_v[j]);
    }

    let mut mean = state.mean.clone();
    let mut cov = state.cov.clone();
    let mut p_inf = state.p_inf.clone();
    let mut shadow = shadow_inf.cloned();
    let mut largest = 0;
    let mut term = LoglikTerm::default();
    let mut f_inf_rec = None;

    // Diffuse matrix driving the split: the real one in exact mode, the
    // shadow recursion in large-κ mode.
    let driver = p_inf.as_ref().or(shadow.as_ref()).cloned();
    let mut standard_idx = observed.clone();
    if let (Some(pi), false) = (driver, observed.is_empty()) {
        let m_inf = &pi * w_o.transpose();
        let f_inf = &w_o * &m_inf;
        let block = split_diffuse(&f_inf, &observed);
        f_inf_rec = Some(f_inf);
        if !block.d_idx.is_empty() {
            term.diffuse = true;
            let w_d = rows(&sys.observation, &block.d_idx);
            let mi = &pi * w_d.transpose();
            let mut fi = &w_d * &mi;
            symmetrize(&mut fi);
            let chol_inf = factor(&fi, step).map_err(|_| Error::DiffuseRankDeficient { step })?;
            largest = largest.max(block.d_idx.len());
            let f1_mit = chol_inf.solve(&mi.transpose()); // F1 Miᵀ
            let mut pi_next = &pi - &mi * &f1_mit;
            symmetrize(&mut pi_next);

            if p_inf.is_some() {
                let v_d = DVector::from_iterator(block.d_idx.len(), block.d_idx.iter().map(|&i| obs[i].unwrap()))
                    - &w_d * &mean;
                let ms = &cov * w_d.transpose();
                let mut fs = &w_d * &ms;
                for (j, &i) in block.d_idx.iter().enumerate() {
                    fs[(j, j)] += sys.obs_variance[i];
                }
                mean += &mi * chol_inf.solve(&v_d);
                // P_* − Ms F1 Miᵀ − Mi F1 Msᵀ + Mi F1 F_* F1 Miᵀ
                let cross = &ms * &f1_mit;
                cov = &cov - &cross - cross.transpose() + f1_mit.transpose() * &fs * &f1_mit;
                symmetrize(&mut cov);
                p_inf = nonzero(pi_next);
                standard_idx = block.n_idx;
            } else {
                shadow = nonzero(pi_next);
                // Large-κ: every component still gets the ordinary update,
                // only the likelihood bookkeeping follows the shadow split.
                let (log_det_all, quad_all) = standard_update(sys, &mut mean, &mut cov, obs, &observed, joseph, step)?;
                largest = largest.max(observed.len());
                if !block.n_idx.is_empty() {
                    // Likelihood of the non-diffuse block conditional on the
                    // diffuse block equals the full term minus the marginal
                    // term of the diffuse block.
                    let (ld_d, q_d) = marginal_term(sys, state, obs, &block.d_idx, step)?;
                    term.log_det = log_det_all - ld_d;
                    term.quad = quad_all - q_d;
                    term.count = block.n_idx.len();
                }
                standard_idx = Vec::new();
            }
        } else if p_inf.is_none() {
            shadow = shadow.and_then(nonzero);
        }
    }

    if !standard_idx.is_empty() {
        let (log_det, quad) = standard_update(sys, &mut mean, &mut cov, obs, &standard_idx, joseph, step)?;
        largest = largest.max(standard_idx.len());
        term.log_det += log_det;
        term.quad += quad;
        term.count += standard_idx.len();
    }

    let record = InnovationRecord {
        delta,
        observed,
        f: f_rec,
        f_inf: f_inf_rec,
        gain,
        diffuse: term.diffuse,
    };
    Ok((
        Update { filtered: FilterState { t: step, mean, cov, p_inf }, record, term, largest },
        shadow,
    ))
}

fn marginal_term(
    sys: &LinearGaussianSystem,
    state: &FilterState,
    obs: &[Option<f64>],
    idx: &[usize],
    step: usize,
) -> Result<(f64, f64)> {
    let mut mean = state.mean.clone();
    let mut cov = state.cov.clone();
    standard_update(sys, &mut mean, &mut cov, obs, idx, false, step)
}

/// One batch step from the one-step prediction `state` at time `state.t`.
pub fn filter_step(sys: &LinearGaussianSystem, state: &FilterState, obs: &[Option<f64>]) -> Result<FilterStep> {
    let (update, _) = batch_update(sys, state, obs, false, None)?;
    let next = predict_next(sys, &update.filtered);
    Ok(FilterStep { filtered: update.filtered, next, innovation: update.record, term: update.term })
}

struct ScalarStep {
    innovation: f64,
    variance: f64,
    diffuse_variance: Option<f64>,
}

/// Processes one scalar observation component in place.
#[allow(clippy::too_many_arguments)]
fn scalar_update(
    sys: &LinearGaussianSystem,
    mean: &mut DVector<f64>,
    cov: &mut DMatrix<f64>,
    p_inf: &mut Option<DMatrix<f64>>,
    shadow: &mut Option<DMatrix<f64>>,
    component: usize,
    value: f64,
    joseph: bool,
    step: usize,
    term: &mut LoglikTerm,
) -> Result<ScalarStep> {
    let w = sys.observation.row(component).transpose();
    let variance_obs = sys.obs_variance[component];
    let m_star = &*cov * &w;
    let f_star = w.dot(&m_star) + variance_obs;
    let v = value - w.dot(mean);

    let diffuse_inf = p_inf.as_ref().or(shadow.as_ref()).map(|pi| {
        let m_inf = pi * &w;
        let f_inf = w.dot(&m_inf);
        (m_inf, f_inf)
    });

    let mut diffuse_variance = None;
    if let Some((m_inf, f_inf)) = diffuse_inf {
        diffuse_variance = Some(f_inf);
        if f_inf > DIFFUSE_TOL {
            term.diffuse = true;
            let outer_inf = &m_inf * m_inf.transpose();
            if let Some(pi) = p_inf.as_mut() {
                *mean += &m_inf * (v / f_inf);
                let cross = &m_star * m_inf.transpose();
                *cov += &outer_inf * (f_star / (f_inf * f_inf)) - (&cross + cross.transpose()) / f_inf;
                *pi -= outer_inf / f_inf;
                return Ok(ScalarStep { innovation: v, variance: f_star, diffuse_variance });
            }
            if let Some(sh) = shadow.as_mut() {
                *sh -= outer_inf / f_inf;
            }
            scalar_standard(mean, cov, &w, &m_star, f_star, v, variance_obs, joseph, step)?;
            return Ok(ScalarStep { innovation: v, variance: f_star, diffuse_variance });
        }
    }

    scalar_standard(mean, cov, &w, &m_star, f_star, v, variance_obs, joseph, step)?;
    term.log_det += f_star.ln();
    term.quad += v * v / f_star;
    term.count += 1;
    Ok(ScalarStep { innovation: v, variance: f_star, diffuse_variance })
}

#[allow(clippy::too_many_arguments)]
fn scalar_standard(
    mean: &mut DVector<f64>,
    cov: &mut DMatrix<f64>,
    w: &DVector<f64>,
    m_star: &DVector<f64>,
    f_star: f64,
    v: f64,
    variance_obs: f64,
    joseph: bool,
    step: usize,
) -> Result<()> {
    if !(f_star > 0.0) || !f_star.is_finite() {
        return Err(Error::SingularInnovation { step, condition: f64::INFINITY });
    }
    let k = m_star / f_star;
    *mean += &k * v;
    if joseph {
        let n = cov.nrows();
        let a = DMatrix::identity(n, n) - &k * w.transpose();
        *cov = &a * &*cov * a.transpose() + &k * k.transpose() * variance_obs;
    } else {
        *cov -= m_star * m_star.transpose() / f_star;
    }
    Ok(())
}

fn univariate_update(
    sys: &LinearGaussianSystem,
    state: &FilterState,
    obs: &[Option<f64>],
    joseph: bool,
    shadow_inf: Option<&DMatrix<f64>>,
) -> Result<(Update, Option<DMatrix<f64>>)> {
    check_obs(sys, obs)?;
    let step = state.t;
    let observed: Vec<usize> = (0..obs.len()).filter(|&i| obs[i].is_some()).collect();
    let gain = &state.cov * rows(&sys.observation, &observed).transpose();
    let mut mean = state.mean.clone();
    let mut cov = state.cov.clone();
    let mut p_inf = state.p_inf.clone();
    let mut shadow = shadow_inf.cloned();
    let mut term = LoglikTerm::default();
    let mut delta = vec![None; obs.len()];
    let mut f_diag = Vec::with_capacity(observed.len());
    let mut f_inf_diag = Vec::with_capacity(observed.len());

    for &i in &observed {
        let s = scalar_update(
            sys, &mut mean, &mut cov, &mut p_inf, &mut shadow, i, obs[i].unwrap(), joseph, step, &mut term,
        )?;
        delta[i] = Some(s.innovation);
        f_diag.push(s.variance);
        f_inf_diag.push(s.diffuse_variance.unwrap_or(0.0));
    }
    symmetrize(&mut cov);
    let p_inf = p_inf.and_then(|mut pi| {
        symmetrize(&mut pi);
        nonzero(pi)
    });
    let shadow = shadow.and_then(|mut sh| {
        symmetrize(&mut sh);
        nonzero(sh)
    });
    let had_inf = state.p_inf.is_some() || shadow_inf.is_some();
    let record = InnovationRecord {
        delta,
        f: DMatrix::from_diagonal(&DVector::from_vec(f_diag)),
        f_inf: had_inf.then(|| DMatrix::from_diagonal(&DVector::from_vec(f_inf_diag))),
        observed,
        gain,
        diffuse: term.diffuse,
    };
    let largest = usize::from(!record.observed.is_empty());
    Ok((Update { filtered: FilterState { t: step, mean, cov, p_inf }, record, term, largest }, shadow))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Form {
    Batch,
    Univariate,
}

fn run(
    sys: &LinearGaussianSystem,
    observations: &[Vec<Option<f64>>],
    init: &DiffuseInit,
    form: Form,
    store: bool,
) -> Result<FilterOutput> {
    if init.state_dim() != sys.state_dim() {
        return Err(Error::Dimension { expected: sys.state_dim(), found: init.state_dim() });
    }
    let joseph = matches!(init.mode, InitMode::LargeKappa(_));
    let mut shadow = match init.mode {
        InitMode::LargeKappa(_) => nonzero(init.p_inf.clone()),
        InitMode::ExactDiffuse => None,
    };
    let mut state = init.initial_state();
    let n = observations.len();
    let mut out = FilterOutput {
        predicted: Vec::with_capacity(if store { n + 1 } else { 0 }),
        filtered: Vec::with_capacity(if store { n } else { 0 }),
        innovations: Vec::with_capacity(if store { n } else { 0 }),
        terms: Vec::with_capacity(n),
        diffuse_steps: 0,
        largest_inversion: 0,
    };
    if store {
        out.predicted.push(state.clone());
    }
    for obs in observations {
        let (update, next_shadow) = match form {
            Form::Batch => batch_update(sys, &state, obs, joseph, shadow.as_ref())?,
            Form::Univariate => univariate_update(sys, &state, obs, joseph, shadow.as_ref())?,
        };
        shadow = next_shadow.map(|sh| {
            let t = &sys.transition;
            let mut next = t * sh * t.transpose();
            symmetrize(&mut next);
            next
        });
        shadow = shadow.and_then(nonzero);
        let next = predict_next(sys, &update.filtered);
        if update.term.diffuse {
            out.diffuse_steps += 1;
        }
        out.largest_inversion = out.largest_inversion.max(update.largest);
        out.terms.push(update.term);
        if store {
            out.filtered.push(update.filtered);
            out.innovations.push(update.record);
            out.predicted.push(next.clone());
        }
        state = next;
    }
    Ok(out)
}

/// Batch pass: the full observed block of `F_t` is factorized per step.
pub fn filter_pass(
    sys: &LinearGaussianSystem,
    observations: &[Vec<Option<f64>>],
    init: &DiffuseInit,
) -> Result<FilterOutput> {
    run(sys, observations, init, Form::Batch, true)
}

/// Sequential pass over scalar observation components; valid because `Σ`
/// is diagonal, and never factorizes anything larger than a scalar.
pub fn univariate_filter_pass(
    sys: &LinearGaussianSystem,
    observations: &[Vec<Option<f64>>],
    init: &DiffuseInit,
) -> Result<FilterOutput> {
    run(sys, observations, init, Form::Univariate, true)
}

/// Log-likelihood only, via the univariate form without storing states.
pub fn univariate_loglik(
    sys: &LinearGaussianSystem,
    observations: &[Vec<Option<f64>>],
    init: &DiffuseInit,
) -> Result<f64> {
    run(sys, observations, init, Form::Univariate, false).map(|o| o.loglik())
}

/// Log-likelihood only, via the batch form.
pub fn batch_loglik(
    sys: &LinearGaussianSystem,
    observations: &[Vec<Option<f64>>],
    init: &DiffuseInit,
) -> Result<f64> {
    run(sys, observations, init, Form::Batch, false).map(|o| o.loglik())
}
