//! Seeded ground truth from the state-space model, an explicit
//! joint-Gaussian conditioning oracle, and scripted trajectory shapes.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::state_space::{LinearGaussianSystem, OBS_DIM};
use crate::trajectory::{FieldSpec, Point, TrackingSeries};

/// Longest window the oracle accepts.
pub const ORACLE_MAX_STEPS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub system: LinearGaussianSystem,
    pub n: usize,
    pub seed: u64,
    /// `z_0`, the state before the first step.
    pub init_state: DVector<f64>,
    /// `z_1 .. z_n`.
    pub truth: Vec<DVector<f64>>,
    /// `η_t = W z_t + ε_t`, all components present.
    pub observations: Vec<Vec<Option<f64>>>,
}

impl SyntheticScenario {
    pub fn entities(&self) -> usize {
        self.system.obs_dim() / OBS_DIM
    }

    /// True `(x, y)` of one entity at every step.
    pub fn truth_points(&self, entity: usize) -> Vec<Point> {
        self.truth.iter().map(|z| Point::new(z[4 * entity], z[4 * entity + 1])).collect()
    }

    pub fn truth_velocities(&self, entity: usize) -> Vec<[f64; 2]> {
        self.truth.iter().map(|z| [z[4 * entity + 2], z[4 * entity + 3]]).collect()
    }

    pub fn observed_points(&self, entity: usize) -> Vec<Option<Point>> {
        self.observations
            .iter()
            .map(|o| match (o[2 * entity], o[2 * entity + 1]) {
                (Some(x), Some(y)) => Some(Point::new(x, y)),
                _ => None,
            })
            .collect()
    }

    /// One series per entity, ids starting at `first_id`. With a field,
    /// observations outside it become missing samples.
    pub fn to_series(&self, dt: f64, first_id: u32, field: Option<&FieldSpec>) -> Result<Vec<TrackingSeries>> {
        (0..self.entities())
            .map(|e| {
                let samples = self
                    .observed_points(e)
                    .into_iter()
                    .map(|p| p.filter(|p| field.is_none_or(|f| f.contains(p))))
                    .collect();
                TrackingSeries::new(first_id + e as u32, dt, samples)
            })
            .collect()
    }
}

/// Symmetric square root factor `L` with `L Lᵀ = M` for a PSD `M`.
pub fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if (m - m.transpose()).abs().max() > 1e-12 * scale {
        return Err(Error::NotPositiveSemidefinite);
    }
    if m.iter().all(|v| *v == 0.0) {
        return Ok(DMatrix::zeros(n, n));
    }
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.min() < -1e-12 * scale {
        return Err(Error::NotPositiveSemidefinite);
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Draws `a_t ~ N(0, Q)` and `ε_t ~ N(0, Σ)` per step, in that order, and
/// propagates `z_{t} = T z_{t-1} + R a_t`, `η_t = W z_t + ε_t`.
pub fn simulate(sys: &LinearGaussianSystem, n: usize, seed: u64, init_state: &DVector<f64>) -> Result<SyntheticScenario> {
    if n == 0 {
        return Err(Error::InvalidArgument("simulation needs at least one step".into()));
    }
    if init_state.len() != sys.state_dim() {
        return Err(Error::Dimension { expected: sys.state_dim(), found: init_state.len() });
    }
    if sys.obs_variance.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::NotPositiveSemidefinite);
    }
    let accel_root = psd_factor(&sys.accel_cov)?;
    let noise_sd = sys.obs_variance.map(f64::sqrt);
    let mut rng = SeededRng::new(seed);
    let mut z = init_state.clone();
    let mut truth = Vec::with_capacity(n);
    let mut observations = Vec::with_capacity(n);
    for _ in 0..n {
        let a = &accel_root * DVector::from_vec(rng.normal_vec(accel_root.ncols()));
        let eps = DVector::from_vec(rng.normal_vec(noise_sd.len())).component_mul(&noise_sd);
        z = &sys.transition * &z + &sys.loading * a;
        let eta = &sys.observation * &z + eps;
        observations.push(eta.iter().map(|v| Some(*v)).collect());
        truth.push(z.clone());
    }
    Ok(SyntheticScenario { system: sys.clone(), n, seed, init_state: init_state.clone(), truth, observations })
}

/// Exact conditional moments from the explicit joint Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// `E[z_t | η_1..η_t]`, `t = 1..n`.
    pub filtered_means: Vec<DVector<f64>>,
    pub filtered_covs: Vec<DMatrix<f64>>,
    /// `E[z_{t+1} | η_1..η_t]`, `t = 1..n`.
    pub predicted_means: Vec<DVector<f64>>,
    pub predicted_covs: Vec<DMatrix<f64>>,
    /// `log p(η_1..η_n)` over the present components.
    pub log_density: f64,
}

/// Builds the joint Gaussian of `(z_1..z_{n+1}, η_1..η_n)` from the latent
/// vector `(z_1, a_1..a_n, ε_1..ε_n)` with `z_1 ~ N(prior_mean, prior_cov)`
/// and conditions directly. Missing components are dropped.
pub fn conditioning_oracle(
    sys: &LinearGaussianSystem,
    observations: &[Vec<Option<f64>>],
    prior_mean: &DVector<f64>,
    prior_cov: &DMatrix<f64>,
) -> Result<OracleResult> {
    let n = observations.len();
    if n == 0 || n > ORACLE_MAX_STEPS {
        return Err(Error::InvalidArgument(format!("oracle needs 1..={ORACLE_MAX_STEPS} steps, got {n}")));
    }
    let m = sys.state_dim();
    let p = sys.obs_dim();
    let r = sys.loading.ncols();
    if prior_mean.len() != m {
        return Err(Error::Dimension { expected: m, found: prior_mean.len() });
    }
    if let Some(bad) = observations.iter().find(|o| o.len() != p) {
        return Err(Error::Dimension { expected: p, found: bad.len() });
    }
    let dim_u = m + n * r + n * p;

    let mut var_u = DMatrix::zeros(dim_u, dim_u);
    var_u.view_mut((0, 0), (m, m)).copy_from(prior_cov);
    for t in 0..n {
        let o = m + t * r;
        var_u.view_mut((o, o), (r, r)).copy_from(&sys.accel_cov);
        let o = m + n * r + t * p;
        for i in 0..p {
            var_u[(o + i, o + i)] = sys.obs_variance[i];
        }
    }
    let mut mean_u = DVector::zeros(dim_u);
    mean_u.rows_mut(0, m).copy_from(prior_mean);

    // State maps: z_1 = u_z, z_{t+1} = T z_t + R a_t.
    let mut state_maps: Vec<DMatrix<f64>> = Vec::with_capacity(n + 1);
    let mut g = DMatrix::zeros(m, dim_u);
    g.view_mut((0, 0), (m, m)).fill_with_identity();
    state_maps.push(g.clone());
    for t in 0..n {
        let mut next = &sys.transition * &g;
        let mut block = next.view_mut((0, m + t * r), (m, r));
        block += &sys.loading;
        g = next;
        state_maps.push(g.clone());
    }

    // Present observation rows, in time order.
    let mut obs_rows: Vec<DVector<f64>> = Vec::new();
    let mut obs_values = Vec::new();
    let mut obs_time = Vec::new();
    for (t, obs) in observations.iter().enumerate() {
        for (i, v) in obs.iter().enumerate() {
            if let Some(v) = v {
                let mut row = (sys.observation.row(i) * &state_maps[t]).transpose();
                row[m + n * r + t * p + i] += 1.0;
                obs_rows.push(row);
                obs_values.push(*v);
                obs_time.push(t);
            }
        }
    }
    let q = obs_rows.len();
    let g_y = DMatrix::from_fn(q, dim_u, |i, j| obs_rows[i][j]);
    let y = DVector::from_vec(obs_values);
    let mu_y = &g_y * &mean_u;
    let c_yy = &g_y * &var_u * g_y.transpose();

    let log_density = if q == 0 {
        0.0
    } else {
        let chol = Cholesky::new(c_yy.clone()).ok_or(Error::SingularJoint)?;
        let resid = &y - &mu_y;
        let quad = resid.dot(&chol.solve(&resid));
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        -0.5 * (q as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
    };

    let condition = |g_s: &DMatrix<f64>, upto: usize| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let mu_s = g_s * &mean_u;
        let c_ss = g_s * &var_u * g_s.transpose();
        let k = obs_time.iter().filter(|&&t| t < upto).count();
        if k == 0 {
            return Ok((mu_s, c_ss));
        }
        let c_sy = g_s * &var_u * g_y.rows(0, k).transpose();
        let c_yy_k = c_yy.view((0, 0), (k, k)).clone_owned();
        let chol = Cholesky::new(c_yy_k).ok_or(Error::SingularJoint)?;
        let resid = y.rows(0, k) - mu_y.rows(0, k);
        let mean = mu_s + &c_sy * chol.solve(&resid);
        let mut cov = c_ss - &c_sy * chol.solve(&c_sy.transpose());
        crate::kalman::symmetrize(&mut cov);
        Ok((mean, cov))
    };

    let mut out = OracleResult {
        filtered_means: Vec::with_capacity(n),
        filtered_covs: Vec::with_capacity(n),
        predicted_means: Vec::with_capacity(n),
        predicted_covs: Vec::with_capacity(n),
        log_density,
    };
    for t in 0..n {
        let (mean, cov) = condition(&state_maps[t], t + 1)?;
        out.filtered_means.push(mean);
        out.filtered_covs.push(cov);
        let (mean, cov) = condition(&state_maps[t + 1], t + 1)?;
        out.predicted_means.push(mean);
        out.predicted_covs.push(cov);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Line,
    Loop,
    SprintAndLoop,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Shape::Line),
            "loop" => Ok(Shape::Loop),
            "sprint-and-loop" => Ok(Shape::SprintAndLoop),
            other => Err(Error::InvalidArgument(format!("unknown shape `{other}`"))),
        }
    }
}

/// Margin kept between scripted paths and the touchlines, cm.
const SCRIPT_MARGIN: f64 = 200.0;

/// Smooth parametric path sampled every `dt`, without jitter.
pub fn scripted_trajectory(shape: Shape, duration: f64, dt: f64, seed: u64) -> Result<TrackingSeries> {
    scripted_trajectory_with_jitter(shape, duration, dt, seed, 0.0)
}

/// As [`scripted_trajectory`], adding `N(0, jitter²)` to each coordinate.
pub fn scripted_trajectory_with_jitter(
    shape: Shape,
    duration: f64,
    dt: f64,
    seed: u64,
    jitter: f64,
) -> Result<TrackingSeries> {
    if !(dt > 0.0) || !(duration > 0.0) {
        return Err(Error::InvalidArgument("duration and dt must be positive".into()));
    }
    let n = (duration / dt).round() as usize;
    if (n as f64 * dt - duration).abs() > 1e-9 * duration.max(1.0) || n < 2 {
        return Err(Error::InvalidArgument(format!("duration {duration} is not a multiple of dt {dt}")));
    }
    let mut rng = SeededRng::new(seed);
    let heading = rng.uniform_in(0.0, std::f64::consts::TAU);
    let dir = [heading.cos(), heading.sin()];
    let mut points: Vec<Point> = match shape {
        Shape::Line => {
            let speed = rng.uniform_in(200.0, 600.0);
            (0..n).map(|i| {
                let s = speed * dt * i as f64;
                Point::new(s * dir[0], s * dir[1])
            })
            .collect()
        }
        Shape::Loop => {
            let radius = rng.uniform_in(300.0, 1000.0);
            let turn = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
            (0..n)
                .map(|i| {
                    let angle = heading + turn * std::f64::consts::TAU * i as f64 / (n - 1) as f64;
                    Point::new(radius * angle.cos(), radius * angle.sin())
                })
                .collect()
        }
        Shape::SprintAndLoop => {
            let sprint_speed = rng.uniform_in(600.0, 800.0);
            let loop_speed = rng.uniform_in(250.0, 400.0);
            let turn = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
            let n_sprint = (n / 5).max(1);
            let n_loop = n - n_sprint;
            let radius = loop_speed * n_loop as f64 * dt / (2.0 * std::f64::consts::TAU);
            let omega = turn * loop_speed / radius;
            let mut pts: Vec<Point> = (0..n_sprint)
                .map(|i| {
                    let s = sprint_speed * dt * i as f64;
                    Point::new(s * dir[0], s * dir[1])
                })
                .collect();
            let end = *pts.last().unwrap();
            let normal = [-dir[1] * turn, dir[0] * turn];
            let centre = Point::new(end.x + radius * normal[0], end.y + radius * normal[1]);
            let start_angle = (end.y - centre.y).atan2(end.x - centre.x);
            // The first arc sample sits one loop-speed step past the sprint end.
            let gap = sprint_speed * dt / loop_speed;
            for j in 0..n_loop {
                let angle = start_angle + omega * dt * (j as f64 + gap);
                pts.push(Point::new(centre.x + radius * angle.cos(), centre.y + radius * angle.sin()));
            }
            pts
        }
    };
    fit_into_field(&mut points, &FieldSpec::default(), &mut rng);
    if jitter > 0.0 {
        for p in &mut points {
            p.x += jitter * rng.standard_normal();
            p.y += jitter * rng.standard_normal();
        }
        let field = FieldSpec::default();
        for p in &mut points {
            *p = field.clamp(p);
        }
    }
    TrackingSeries::from_points(1, dt, &points)
}

/// Shrinks the path about its box centre if it is too large, then places the
/// box uniformly at random inside the field.
fn fit_into_field(points: &mut [Point], field: &FieldSpec, rng: &mut SeededRng) {
    let (mut x0, mut x1, mut y0, mut y1) = bounding_box(points);
    let room_x = field.width() - 2.0 * SCRIPT_MARGIN;
    let room_y = field.height() - 2.0 * SCRIPT_MARGIN;
    let shrink = (room_x / (x1 - x0).max(1e-9)).min(room_y / (y1 - y0).max(1e-9)).min(1.0);
    if shrink < 1.0 {
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        for p in points.iter_mut() {
            p.x = cx + (p.x - cx) * shrink;
            p.y = cy + (p.y - cy) * shrink;
        }
        (x0, x1, y0, y1) = bounding_box(points);
    }
    let lo_x = field.x_min + SCRIPT_MARGIN - x0;
    let hi_x = field.x_max - SCRIPT_MARGIN - x1;
    let lo_y = field.y_min + SCRIPT_MARGIN - y0;
    let hi_y = field.y_max - SCRIPT_MARGIN - y1;
    let dx = rng.uniform_in(lo_x, hi_x.max(lo_x));
    let dy = rng.uniform_in(lo_y, hi_y.max(lo_y));
    for p in points.iter_mut() {
        p.x += dx;
        p.y += dy;
    }
}

/// `count` scripted paths cycling through the three shapes, the i-th drawn
/// with seed `seed + i`.
pub fn scripted_dataset(count: usize, duration: f64, dt: f64, seed: u64, jitter: f64) -> Result<Vec<TrackingSeries>> {
    const SHAPES: [Shape; 3] = [Shape::Line, Shape::Loop, Shape::SprintAndLoop];
    (0..count)
        .map(|i| {
            let mut s = scripted_trajectory_with_jitter(SHAPES[i % 3], duration, dt, seed.wrapping_add(i as u64), jitter)?;
            s.entity_id = i as u32 + 1;
            Ok(s)
        })
        .collect()
}

fn bounding_box(points: &[Point]) -> (f64, f64, f64, f64) {
    points.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(x0, x1, y0, y1), p| (x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y)),
    )
}
