//! Variational autoencoder with one hidden layer on each side.
//!
//! ```text
//! encoder   h_E = relu(A₁ x + b₁),  μ_Z = M h_E,  l_Z = L h_E,  σ_Z = exp(l_Z)
//!           z = μ_Z + σ_Z ⊙ ε
//! decoder   h_D = relu(B₁ z + c₁),  μ_X = sigmoid(B₂ h_D + c₂)
//!           x̃ = μ_X + σ_X ω
//! loss      J = ‖x − μ_X(z)‖² / (2σ_X²) + ½ Σ (μ_Z² + σ_Z² − 1 − log σ_Z²)
//! ```
//!
//! All weights live in one flat vector so the optimizer and the gradient
//! check see a single parameter space. Matrices are stored column-major.

mod train;

use nalgebra::{DMatrixView, DVector, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub use train::{train, TrainConfig, TrainHistory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaeConfig {
    /// Data dimension, twice the trajectory length.
    pub k: usize,
    /// Latent dimension.
    pub d: usize,
    /// Hidden width of both networks.
    pub h: usize,
    pub sigma_x: f64,
    pub seed: u64,
}

impl VaeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 || self.h == 0 {
            return Err(Error::InvalidArgument("k, d and h must be at least 1".into()));
        }
        if !(self.sigma_x > 0.0) || !self.sigma_x.is_finite() {
            return Err(Error::InvalidArgument(format!("sigma_x must be positive, got {}", self.sigma_x)));
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.k, self.d, self.h)
    }
}

/// Offsets of each block inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub k: usize,
    pub d: usize,
    pub h: usize,
    pub enc_w1: usize,
    pub enc_b1: usize,
    pub enc_wmu: usize,
    pub enc_wl: usize,
    pub dec_w1: usize,
    pub dec_b1: usize,
    pub dec_w2: usize,
    pub dec_b2: usize,
    pub len: usize,
}

impl Layout {
    fn new(k: usize, d: usize, h: usize) -> Self {
        let enc_w1 = 0;
        let enc_b1 = enc_w1 + h * k;
        let enc_wmu = enc_b1 + h;
        let enc_wl = enc_wmu + d * h;
        let dec_w1 = enc_wl + d * h;
        let dec_b1 = dec_w1 + h * d;
        let dec_w2 = dec_b1 + h;
        let dec_b2 = dec_w2 + k * h;
        let len = dec_b2 + k;
        Self { k, d, h, enc_w1, enc_b1, enc_wmu, enc_wl, dec_w1, dec_b1, dec_w2, dec_b2, len }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeParams {
    pub config: VaeConfig,
    pub theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsDocument {
    format: String,
    config: VaeConfig,
    layout: Vec<(String, Vec<usize>)>,
    theta: Vec<f64>,
}

const FORMAT: &str = "pitchtrack-vae-1";

fn glorot(rng: &mut SeededRng, fan_in: usize, fan_out: usize, out: &mut [f64]) {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in out {
        *v = rng.uniform_in(-a, a);
    }
}

impl VaeParams {
    /// All weights and biases zero.
    pub fn zeros(config: VaeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, theta: vec![0.0; config.layout().len] })
    }

    /// Uniform ±sqrt(6/(fan_in + fan_out)) weights, zero biases.
    pub fn init(config: VaeConfig, rng: &mut SeededRng) -> Result<Self> {
        let mut p = Self::zeros(config)?;
        let l = config.layout();
        let (k, d, h) = (l.k, l.d, l.h);
        glorot(rng, k, h, &mut p.theta[l.enc_w1..l.enc_b1]);
        glorot(rng, h, d, &mut p.theta[l.enc_wmu..l.enc_wl]);
        glorot(rng, h, d, &mut p.theta[l.enc_wl..l.dec_w1]);
        glorot(rng, d, h, &mut p.theta[l.dec_w1..l.dec_b1]);
        glorot(rng, h, k, &mut p.theta[l.dec_w2..l.dec_b2]);
        Ok(p)
    }

    pub fn from_seed(config: VaeConfig) -> Result<Self> {
        Self::init(config, &mut SeededRng::new(config.seed))
    }

    pub fn layout(&self) -> Layout {
        self.config.layout()
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != self.theta.len() {
            return Err(Error::Dimension { expected: self.theta.len(), found: theta.len() });
        }
        Ok(Self { config: self.config, theta })
    }

    pub fn to_json(&self) -> Result<String> {
        let l = self.layout();
        let doc = ParamsDocument {
            format: FORMAT.into(),
            config: self.config,
            layout: vec![
                ("enc_w1".into(), vec![l.h, l.k]),
                ("enc_b1".into(), vec![l.h]),
                ("enc_wmu".into(), vec![l.d, l.h]),
                ("enc_wl".into(), vec![l.d, l.h]),
                ("dec_w1".into(), vec![l.h, l.d]),
                ("dec_b1".into(), vec![l.h]),
                ("dec_w2".into(), vec![l.k, l.h]),
                ("dec_b2".into(), vec![l.k]),
            ],
            theta: self.theta.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ParamsDocument = serde_json::from_str(s)?;
        if doc.format != FORMAT {
            return Err(Error::InvalidArgument(format!("unknown parameter format `{}`", doc.format)));
        }
        doc.config.validate()?;
        Self::zeros(doc.config)?.with_theta(doc.theta)
    }
}

/// Borrowed matrix views into a flat parameter vector.
struct Net<'a> {
    enc_w1: DMatrixView<'a, f64>,
    enc_b1: DVectorView<'a, f64>,
    enc_wmu: DMatrixView<'a, f64>,
    enc_wl: DMatrixView<'a, f64>,
    dec_w1: DMatrixView<'a, f64>,
    dec_b1: DVectorView<'a, f64>,
    dec_w2: DMatrixView<'a, f64>,
    dec_b2: DVectorView<'a, f64>,
}

impl<'a> Net<'a> {
    fn new(theta: &'a [f64], l: &Layout) -> Self {
        let m = |o: usize, r: usize, c: usize| DMatrixView::from_slice(&theta[o..o + r * c], r, c);
        let v = |o: usize, n: usize| DVectorView::from_slice(&theta[o..o + n], n);
        Self {
            enc_w1: m(l.enc_w1, l.h, l.k),
            enc_b1: v(l.enc_b1, l.h),
            enc_wmu: m(l.enc_wmu, l.d, l.h),
            enc_wl: m(l.enc_wl, l.d, l.h),
            dec_w1: m(l.dec_w1, l.h, l.d),
            dec_b1: v(l.dec_b1, l.h),
            dec_w2: m(l.dec_w2, l.k, l.h),
            dec_b2: v(l.dec_b2, l.k),
        }
    }
}

fn relu(v: DVector<f64>) -> DVector<f64> {
    v.map(|a| a.max(0.0))
}

fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Encoder moments `(μ_Z, l_Z)` with `σ_Z = exp(l_Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub mu: DVector<f64>,
    pub log_sigma: DVector<f64>,
}

impl Encoding {
    pub fn sigma(&self) -> DVector<f64> {
        self.log_sigma.map(f64::exp)
    }
}

fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension { expected, found: v.len() });
    }
    Ok(())
}

pub fn encoder_moments(params: &VaeParams, x: &[f64]) -> Result<Encoding> {
    let l = params.layout();
    check_len(x, l.k)?;
    let net = Net::new(&params.theta, &l);
    let h1 = relu(net.enc_w1 * DVectorView::from_slice(x, l.k) + net.enc_b1);
    Ok(Encoding { mu: net.enc_wmu * &h1, log_sigma: net.enc_wl * &h1 })
}

/// `z = μ_Z(x) + σ_Z(x) ⊙ ε`.
pub fn encode(params: &VaeParams, x: &[f64], epsilon: &[f64]) -> Result<Vec<f64>> {
    check_len(epsilon, params.config.d)?;
    let e = encoder_moments(params, x)?;
    let noise = e.sigma().component_mul(&DVector::from_column_slice(epsilon));
    Ok((e.mu + noise).as_slice().to_vec())
}

/// Zero-noise decoder output `μ_X(z)`, strictly inside `(0, 1)ᵏ`.
pub fn decoder_mean(params: &VaeParams, z: &[f64]) -> Result<Vec<f64>> {
    let l = params.layout();
    check_len(z, l.d)?;
    let net = Net::new(&params.theta, &l);
    let h2 = relu(net.dec_w1 * DVectorView::from_slice(z, l.d) + net.dec_b1);
    let a3 = net.dec_w2 * h2 + net.dec_b2;
    Ok(a3.iter().map(|a| sigmoid(*a)).collect())
}

/// `μ_X(z) + σ_X ω`.
pub fn decode(params: &VaeParams, z: &[f64], omega: &[f64]) -> Result<Vec<f64>> {
    check_len(omega, params.config.k)?;
    let s = params.config.sigma_x;
    Ok(decoder_mean(params, z)?.iter().zip(omega).map(|(m, w)| m + s * w).collect())
}

pub fn generate(params: &VaeParams, z: &[f64]) -> Result<Vec<f64>> {
    decoder_mean(params, z)
}

pub fn reconstruct(params: &VaeParams, x: &[f64]) -> Result<Vec<f64>> {
    let z = encode(params, x, &vec![0.0; params.config.d])?;
    decoder_mean(params, &z)
}

/// `½ Σ (μᵢ² + σᵢ² − 1 − log σᵢ²)`, the divergence of `N(μ, diag σ²)` from
/// the standard normal.
pub fn kl_diag_gaussian(mu: &[f64], sigma: &[f64]) -> Result<f64> {
    check_len(sigma, mu.len())?;
    if sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    Ok(mu
        .iter()
        .zip(sigma)
        .map(|(m, s)| {
            let ls = s.ln();
            0.5 * (m * m + s * s - 1.0 - 2.0 * ls)
        })
        .sum())
}

/// KL term written in `l = log σ` so it stays exact for extreme `l`.
fn kl_from_log_sigma(mu: &DVector<f64>, log_sigma: &DVector<f64>) -> f64 {
    mu.iter()
        .zip(log_sigma.iter())
        .map(|(m, l)| 0.5 * (m * m + (2.0 * l).exp() - 1.0 - 2.0 * l))
        .sum()
}

/// Loss split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    pub reconstruction: f64,
    pub kl: f64,
}

impl LossParts {
    pub fn total(&self) -> f64 {
        self.reconstruction + self.kl
    }
}

struct Forward {
    a1: DVector<f64>,
    h1: DVector<f64>,
    mu: DVector<f64>,
    log_sigma: DVector<f64>,
    sigma: DVector<f64>,
    z: DVector<f64>,
    a2: DVector<f64>,
    h2: DVector<f64>,
    y: DVector<f64>,
    parts: LossParts,
}

fn forward(net: &Net, sigma_x: f64, x: &DVectorView<f64>, eps: &DVectorView<f64>) -> Forward {
    let a1 = net.enc_w1 * x + net.enc_b1;
    let h1 = relu(a1.clone());
    let mu = net.enc_wmu * &h1;
    let log_sigma = net.enc_wl * &h1;
    let sigma = log_sigma.map(f64::exp);
    let z = &mu + sigma.component_mul(eps);
    let a2 = net.dec_w1 * &z + net.dec_b1;
    let h2 = relu(a2.clone());
    let y = (net.dec_w2 * &h2 + net.dec_b2).map(sigmoid);
    let resid = x - &y;
    let reconstruction = resid.norm_squared() / (2.0 * sigma_x * sigma_x);
    let kl = kl_from_log_sigma(&mu, &log_sigma);
    Forward { a1, h1, mu, log_sigma, sigma, z, a2, h2, y, parts: LossParts { reconstruction, kl } }
}

fn check_example(params: &VaeParams, x: &[f64], epsilon: &[f64]) -> Result<()> {
    check_len(x, params.config.k)?;
    check_len(epsilon, params.config.d)
}

pub fn loss_parts(params: &VaeParams, x: &[f64], epsilon: &[f64]) -> Result<LossParts> {
    check_example(params, x, epsilon)?;
    let l = params.layout();
    let net = Net::new(&params.theta, &l);
    let f = forward(
        &net,
        params.config.sigma_x,
        &DVectorView::from_slice(x, l.k),
        &DVectorView::from_slice(epsilon, l.d),
    );
    Ok(f.parts)
}

/// `J(x, ε)`.
pub fn loss(params: &VaeParams, x: &[f64], epsilon: &[f64]) -> Result<f64> {
    loss_parts(params, x, epsilon).map(|p| p.total())
}

/// Reverse-mode gradient of [`loss`] in the flat parameter layout. Returns
/// the loss parts alongside.
pub fn loss_gradient(params: &VaeParams, x: &[f64], epsilon: &[f64]) -> Result<(LossParts, Vec<f64>)> {
    check_example(params, x, epsilon)?;
    let l = params.layout();
    let mut grad = vec![0.0; l.len];
    let parts = accumulate_gradient(params, &l, x, epsilon, &mut grad);
    Ok((parts, grad))
}

/// Adds the gradient of one example into `grad`.
pub(crate) fn accumulate_gradient(params: &VaeParams, l: &Layout, x: &[f64], epsilon: &[f64], grad: &mut [f64]) -> LossParts {
    let net = Net::new(&params.theta, l);
    let xv = DVectorView::from_slice(x, l.k);
    let ev = DVectorView::from_slice(epsilon, l.d);
    let f = forward(&net, params.config.sigma_x, &xv, &ev);
    let s2 = params.config.sigma_x * params.config.sigma_x;

    let da3 = DVector::from_fn(l.k, |i, _| (f.y[i] - xv[i]) / s2 * f.y[i] * (1.0 - f.y[i]));
    let dh2 = net.dec_w2.transpose() * &da3;
    let da2 = dh2.zip_map(&f.a2, |g, a| if a > 0.0 { g } else { 0.0 });
    let dz = net.dec_w1.transpose() * &da2;
    let dmu = &dz + &f.mu;
    let dl = DVector::from_fn(l.d, |i, _| dz[i] * ev[i] * f.sigma[i] + (2.0 * f.log_sigma[i]).exp() - 1.0);
    let dh1 = net.enc_wmu.transpose() * &dmu + net.enc_wl.transpose() * &dl;
    let da1 = dh1.zip_map(&f.a1, |g, a| if a > 0.0 { g } else { 0.0 });

    let mut add_outer = |offset: usize, u: &DVector<f64>, v: &[f64]| {
        let rows = u.len();
        for (j, vj) in v.iter().enumerate() {
            if *vj == 0.0 {
                continue;
            }
            let col = &mut grad[offset + j * rows..offset + (j + 1) * rows];
            for (g, ui) in col.iter_mut().zip(u.iter()) {
                *g += ui * vj;
            }
        }
    };
    add_outer(l.enc_w1, &da1, x);
    add_outer(l.enc_wmu, &dmu, f.h1.as_slice());
    add_outer(l.enc_wl, &dl, f.h1.as_slice());
    add_outer(l.dec_w1, &da2, f.z.as_slice());
    add_outer(l.dec_w2, &da3, f.h2.as_slice());
    for (offset, v) in [(l.enc_b1, &da1), (l.dec_b1, &da2), (l.dec_b2, &da3)] {
        for (g, vi) in grad[offset..offset + v.len()].iter_mut().zip(v.iter()) {
            *g += vi;
        }
    }
    f.parts
}

/// Mean absolute deviation per coordinate between data and reconstruction.
pub fn reconstruction_error(params: &VaeParams, data: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for x in data {
        let r = reconstruct(params, x)?;
        total += x.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum::<f64>();
        count += x.len();
    }
    Ok(total / count.max(1) as f64)
}
