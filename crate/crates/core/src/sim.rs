//! Path simulation of the fundamental-martingale system `(M, Y, Q)`, the energy
//! `S_T` and the estimator `theta_hat_T`, plus an independent route through an
//! exact fractional Brownian motion sample and the singular kernel transform.
//!
//! In the time variable the pair `(Y_t, Z_t)`, `Z_t = int_0^t s^{2H-1} dY_s`,
//! solves the linear system
//!
//! ```text
//! dY = theta/2 (Y + t^{1-2H} Z) dt + dM
//! dZ = theta/2 (t^{2H-1} Y + Z) dt + t^{2H-1} dM
//! ```
//!
//! with `Q_t = l_H/2 (t^{2H-1} Y_t + Z_t)`. The default scheme draws `(Y, Z, M)`
//! from its exact Gaussian transition between grid nodes.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default first node as a fraction of the horizon.
pub const FIRST_NODE_FRACTION: f64 = 1e-6;
/// Default growth factor of the geometric part of the grid.
pub const GRID_STRETCH: f64 = 1.05;
pub const MIN_STEPS: usize = 100;

/// `0 = t_0 < t_1 < ... < t_N = T`, geometric near the origin and uniform after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    stretch: f64,
}

impl TimeGrid {
    /// Grid with `n_steps` intervals whose first node is `horizon * first_fraction`
    /// and whose steps grow by `stretch` until they reach the uniform spacing.
    pub fn new(horizon: f64, n_steps: usize, first_fraction: f64, stretch: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if n_steps < MIN_STEPS {
            return Err(Error::InvalidArgument(format!(
                "a grid needs at least {MIN_STEPS} steps, got {n_steps}"
            )));
        }
        if !(first_fraction > 0.0 && first_fraction <= 1e-4) {
            return Err(Error::InvalidArgument(format!(
                "first node fraction must lie in (0, 1e-4], got {first_fraction}"
            )));
        }
        if !(stretch > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "stretch must exceed 1, got {stretch}"
            )));
        }
        let first = horizon * first_fraction;
        // Fixed point on the uniform spacing h: geometric steps below h, then
        // the remaining span split evenly over the remaining steps.
        let mut h = horizon / n_steps as f64;
        let mut geo = Vec::new();
        let max_geo = (n_steps / 4) as f64;
        let mut ratio = stretch;
        for _ in 0..100 {
            geo.clear();
            // steepen the progression when it would take over a quarter of the grid
            ratio = if h > first && (h / first).ln() / stretch.ln() > max_geo {
                (h / first).powf(1.0 / max_geo)
            } else {
                stretch
            };
            let mut d = first;
            let mut covered = 0.0;
            while d < h && geo.len() + 1 < n_steps {
                geo.push(d);
                covered += d;
                d *= ratio;
            }
            let rest = n_steps - geo.len();
            let new_h = (horizon - covered) / rest as f64;
            let settled = (new_h - h).abs() <= 1e-15 * h;
            h = new_h;
            if settled {
                break;
            }
        }
        let mut nodes = Vec::with_capacity(n_steps + 1);
        nodes.push(0.0);
        let mut t = 0.0;
        for d in &geo {
            t += d;
            nodes.push(t);
        }
        let rest = n_steps - geo.len();
        let start = t;
        for k in 1..=rest {
            nodes.push(start + (horizon - start) * k as f64 / rest as f64);
        }
        nodes[n_steps] = horizon;
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "grid construction produced non-increasing nodes".into(),
            ));
        }
        Ok(Self {
            nodes,
            stretch: ratio,
        })
    }

    pub fn standard(horizon: f64, n_steps: usize) -> Result<Self> {
        Self::new(horizon, n_steps, FIRST_NODE_FRACTION, GRID_STRETCH)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn n_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }
}

/// One independent random stream: `seed` picks the generator, `stream_id` the
/// replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalStats {
    /// `S_T`
    pub energy: f64,
    /// `int_0^T Q dY`
    pub score: f64,
    pub theta_hat: f64,
    pub m_t: f64,
}

impl TerminalStats {
    fn new(energy: f64, score: f64, m_t: f64) -> Self {
        Self {
            energy,
            score,
            theta_hat: score / energy,
            m_t,
        }
    }

    /// `Z_T(c) = int Q dY - c S_T`
    pub fn auxiliary(&self, c: f64) -> f64 {
        self.score - c * self.energy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub grid: Arc<TimeGrid>,
    pub m: Vec<f64>,
    pub y: Vec<f64>,
    pub q: Vec<f64>,
    /// running energy `int_0^t Q^2 d<M>`
    pub s: Vec<f64>,
    pub terminal: TerminalStats,
}

impl SimPath {
    /// CSV with columns `t,M,Y,Q,S`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,M,Y,Q,S")?;
        for (i, t) in self.grid.nodes().iter().enumerate() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                t, self.m[i], self.y[i], self.q[i], self.s[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Exact Gaussian transition of `(Y, Z, M)`; energy by the trapezoid rule,
    /// `int Q dY = (l_H Y_T Z_T - T) / 2` by the Ito product rule.
    #[default]
    Exact,
    /// Explicit Euler in the clock `<M>` with left-point sums throughout.
    Euler,
}

#[derive(Debug, Clone, Copy)]
struct Step {
    // transition of (Y, Z), row-major
    f: [f64; 4],
    // Cholesky factor of the noise covariance in the order (M, Y, Z)
    chol: [f64; 6],
    // t^{2H-1} at the step's right end, and its left end
    g_next: f64,
    g_prev: f64,
    d_qv: f64,
}

/// Per-grid transition data shared by all replicates.
#[derive(Debug, Clone)]
pub struct MartingaleSampler {
    params: ModelParams,
    grid: Arc<TimeGrid>,
    scheme: Scheme,
    steps: Vec<Step>,
}

const RK_SUBSTEPS: usize = 8;

impl MartingaleSampler {
    pub fn new(params: &ModelParams, grid: &TimeGrid, scheme: Scheme) -> Result<Self> {
        let h = params.hurst();
        let e = 2.0 * h - 1.0;
        let nodes = grid.nodes();
        let qv: Vec<f64> = nodes
            .iter()
            .map(|&t| params.quadratic_variation(t))
            .collect();
        let mut steps = Vec::with_capacity(grid.n_steps());
        for i in 0..grid.n_steps() {
            let (t0, t1) = (nodes[i], nodes[i + 1]);
            let (f, cov) = if scheme == Scheme::Euler {
                ([1.0, 0.0, 0.0, 1.0], [[0.0; 3]; 3])
            } else if i == 0 {
                // noise only on [0, t_1]: the drift is O(t_1) there
                let l = params.l_h();
                let vm = qv[1];
                let czm = t1 / l;
                let vz = t1.powf(2.0 * h) / (2.0 * h * l);
                (
                    [1.0, 0.0, 0.0, 1.0],
                    [[vm, vm, czm], [vm, vm, czm], [czm, czm, vz]],
                )
            } else {
                transition(params, t0, t1)
            };
            steps.push(Step {
                f,
                chol: cholesky3(&cov),
                g_next: t1.powf(e),
                g_prev: if t0 > 0.0 { t0.powf(e) } else { 0.0 },
                d_qv: qv[i + 1] - qv[i],
            });
        }
        Ok(Self {
            params: *params,
            grid: Arc::new(grid.clone()),
            scheme,
            steps,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Terminal statistics only, without storing the path.
    pub fn terminal(&self, rng: RngSpec) -> TerminalStats {
        self.run(rng, |_, _, _, _| {})
    }

    pub fn path(&self, rng: RngSpec) -> SimPath {
        let n = self.grid.n_steps() + 1;
        let mut m = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        let terminal = self.run(rng, |mi, yi, qi, si| {
            m.push(mi);
            y.push(yi);
            q.push(qi);
            s.push(si);
        });
        SimPath {
            grid: Arc::clone(&self.grid),
            m,
            y,
            q,
            s,
            terminal,
        }
    }

    /// Terminal statistics of `replicates` paths on streams `0..replicates`,
    /// in stream order whatever the thread count.
    pub fn batch(&self, seed: u64, replicates: usize) -> Vec<TerminalStats> {
        (0..replicates as u64)
            .into_par_iter()
            .map(|k| self.terminal(RngSpec::new(seed, k)))
            .collect()
    }

    /// `E[S_T]` of the discretized energy, from the propagated covariance of
    /// `(Y, Z)`. Exact scheme only; isolates the quadrature bias from Monte
    /// Carlo noise.
    pub fn mean_energy(&self) -> Option<f64> {
        if self.scheme != Scheme::Exact {
            return None;
        }
        let half_l = 0.5 * self.params.l_h();
        // covariance of (Y, Z): [yy, yz, zz]
        let (mut yy, mut yz, mut zz) = (0.0, 0.0, 0.0);
        let (mut eq2, mut total) = (0.0, 0.0);
        for st in &self.steps {
            let f = &st.f;
            let c = &st.chol;
            let nyy = f[0] * f[0] * yy + 2.0 * f[0] * f[1] * yz + f[1] * f[1] * zz;
            let nyz = f[0] * f[2] * yy + (f[0] * f[3] + f[1] * f[2]) * yz + f[1] * f[3] * zz;
            let nzz = f[2] * f[2] * yy + 2.0 * f[2] * f[3] * yz + f[3] * f[3] * zz;
            yy = nyy + c[1] * c[1] + c[2] * c[2];
            yz = nyz + c[1] * c[3] + c[2] * c[4];
            zz = nzz + c[3] * c[3] + c[4] * c[4] + c[5] * c[5];
            let g = st.g_next;
            let next = half_l * half_l * (g * g * yy + 2.0 * g * yz + zz);
            total += 0.5 * (eq2 + next) * st.d_qv;
            eq2 = next;
        }
        Some(total)
    }

    fn run<F: FnMut(f64, f64, f64, f64)>(&self, spec: RngSpec, mut record: F) -> TerminalStats {
        let mut rng = spec.rng();
        let theta = self.params.theta();
        let half_l = 0.5 * self.params.l_h();
        let (mut m, mut y, mut z, mut s, mut score) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut q = 0.0;
        record(m, y, q, s);
        for st in &self.steps {
            let x0: f64 = StandardNormal.sample(&mut rng);
            let x1: f64 = StandardNormal.sample(&mut rng);
            let x2: f64 = StandardNormal.sample(&mut rng);
            let q_prev = q;
            match self.scheme {
                Scheme::Exact => {
                    let c = &st.chol;
                    let dm = c[0] * x0;
                    let ny = st.f[0] * y + st.f[1] * z + c[1] * x0 + c[2] * x1;
                    let nz = st.f[2] * y + st.f[3] * z + c[3] * x0 + c[4] * x1 + c[5] * x2;
                    m += dm;
                    y = ny;
                    z = nz;
                    q = half_l * (st.g_next * y + z);
                    s += 0.5 * (q_prev * q_prev + q * q) * st.d_qv;
                }
                Scheme::Euler => {
                    let _ = (x1, x2);
                    let dm = st.d_qv.sqrt() * x0;
                    let dy = theta * q_prev * st.d_qv + dm;
                    m += dm;
                    y += dy;
                    z += st.g_prev * dy;
                    score += q_prev * dy;
                    s += q_prev * q_prev * st.d_qv;
                    q = half_l * (st.g_next * y + z);
                }
            }
            record(m, y, q, s);
        }
        if self.scheme == Scheme::Exact {
            score = 0.5 * (self.params.l_h() * y * z - self.grid.horizon());
        }
        TerminalStats::new(s, score, m)
    }
}

/// Exact transition matrix of `(Y, Z)` and noise covariance of `(M, Y, Z)`
/// increments over `[t0, t1]`, by RK4 on the moment equations.
fn transition(params: &ModelParams, t0: f64, t1: f64) -> ([f64; 4], [[f64; 3]; 3]) {
    let theta = params.theta();
    let h = params.hurst();
    let e = 2.0 * h - 1.0;
    let rate = (2.0 - 2.0 * h) / params.lambda_h();
    // derivative of (Phi, P) at time t; P in order (M, Y, Z)
    let deriv = |t: f64, phi: &[f64; 4], p: &[[f64; 3]; 3]| -> ([f64; 4], [[f64; 3]; 3]) {
        let g = t.powf(e);
        let a = [0.5 * theta, 0.5 * theta / g, 0.5 * theta * g, 0.5 * theta];
        let dphi = [
            a[0] * phi[0] + a[1] * phi[2],
            a[0] * phi[1] + a[1] * phi[3],
            a[2] * phi[0] + a[3] * phi[2],
            a[2] * phi[1] + a[3] * phi[3],
        ];
        // full drift matrix in (M, Y, Z)
        let big = [[0.0, 0.0, 0.0], [0.0, a[0], a[1]], [0.0, a[2], a[3]]];
        let b = [1.0, 1.0, g];
        let m = rate / g;
        let mut dp = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = m * b[i] * b[j];
                for k in 0..3 {
                    v += big[i][k] * p[k][j] + p[i][k] * big[j][k];
                }
                dp[i][j] = v;
            }
        }
        (dphi, dp)
    };
    let axpy4 = |x: &[f64; 4], k: &[f64; 4], c: f64| -> [f64; 4] {
        [
            x[0] + c * k[0],
            x[1] + c * k[1],
            x[2] + c * k[2],
            x[3] + c * k[3],
        ]
    };
    let axpy9 = |x: &[[f64; 3]; 3], k: &[[f64; 3]; 3], c: f64| -> [[f64; 3]; 3] {
        let mut o = *x;
        for i in 0..3 {
            for j in 0..3 {
                o[i][j] += c * k[i][j];
            }
        }
        o
    };
    let mut phi = [1.0, 0.0, 0.0, 1.0];
    let mut p = [[0.0; 3]; 3];
    let dt = (t1 - t0) / RK_SUBSTEPS as f64;
    for k in 0..RK_SUBSTEPS {
        let t = t0 + k as f64 * dt;
        let (k1f, k1p) = deriv(t, &phi, &p);
        let (k2f, k2p) = deriv(
            t + 0.5 * dt,
            &axpy4(&phi, &k1f, 0.5 * dt),
            &axpy9(&p, &k1p, 0.5 * dt),
        );
        let (k3f, k3p) = deriv(
            t + 0.5 * dt,
            &axpy4(&phi, &k2f, 0.5 * dt),
            &axpy9(&p, &k2p, 0.5 * dt),
        );
        let (k4f, k4p) = deriv(t + dt, &axpy4(&phi, &k3f, dt), &axpy9(&p, &k3p, dt));
        for i in 0..4 {
            phi[i] += dt / 6.0 * (k1f[i] + 2.0 * k2f[i] + 2.0 * k3f[i] + k4f[i]);
        }
        for i in 0..3 {
            for j in 0..3 {
                p[i][j] += dt / 6.0 * (k1p[i][j] + 2.0 * k2p[i][j] + 2.0 * k3p[i][j] + k4p[i][j]);
            }
        }
    }
    for i in 0..3 {
        for j in 0..i {
            let v = 0.5 * (p[i][j] + p[j][i]);
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    (phi, p)
}

/// Lower Cholesky factor `[l00, l10, l11, l20, l21, l22]`; pivots lost to
/// rounding are set to zero.
fn cholesky3(p: &[[f64; 3]; 3]) -> [f64; 6] {
    let l00 = p[0][0].max(0.0).sqrt();
    let div = |x: f64, d: f64| if d > 0.0 { x / d } else { 0.0 };
    let l10 = div(p[1][0], l00);
    let l11 = (p[1][1] - l10 * l10).max(0.0).sqrt();
    let l20 = div(p[2][0], l00);
    let l21 = div(p[2][1] - l20 * l10, l11);
    let l22 = (p[2][2] - l20 * l20 - l21 * l21).max(0.0).sqrt();
    [l00, l10, l11, l20, l21, l22]
}

/// One path of the martingale route. Builds the transition tables; reuse a
/// [`MartingaleSampler`] for many replicates.
pub fn simulate_martingale_path(
    params: &ModelParams,
    grid: &TimeGrid,
    rng: RngSpec,
    scheme: Scheme,
) -> Result<SimPath> {
    Ok(MartingaleSampler::new(params, grid, scheme)?.path(rng))
}

/// Largest grid accepted by the dense fBM factorization.
pub const FBM_MAX_STEPS: usize = 4096;

/// Independent simulation route: exact fBM on the grid, the Ornstein-Uhlenbeck
/// path by the implicit trapezoid rule, and `Y_t = int_0^t w(t, s) dX_s` with
/// the kernel integrated exactly over each grid cell.
#[derive(Debug, Clone)]
pub struct FbmOracle {
    params: ModelParams,
    grid: Arc<TimeGrid>,
    chol: DMatrix<f64>,
    // weights[i][j] = (1 / dt_j) int_{t_j}^{t_{j+1}} w(t_{i+1}, s) ds, j <= i
    weights: Vec<Vec<f64>>,
    jittered: bool,
}

impl FbmOracle {
    pub fn new(params: &ModelParams, grid: &TimeGrid) -> Result<Self> {
        let n = grid.n_steps();
        if n > FBM_MAX_STEPS {
            return Err(Error::InvalidArgument(format!(
                "dense fBM factorization is limited to {FBM_MAX_STEPS} steps, got {n}"
            )));
        }
        let h = params.hurst();
        let t = &grid.nodes()[1..];
        let cov = DMatrix::from_fn(n, n, |i, j| {
            0.5 * (t[i].powf(2.0 * h) + t[j].powf(2.0 * h) - (t[i] - t[j]).abs().powf(2.0 * h))
        });
        let (chol, jittered) = match cov.clone().cholesky() {
            Some(c) => (c.l(), false),
            None => {
                let ridge = DMatrix::identity(n, n) * 1e-12;
                match (cov + ridge).cholesky() {
                    Some(c) => (c.l(), true),
                    None => {
                        return Err(Error::Factorization(
                            "fBM covariance is not positive definite even with a 1e-12 ridge"
                                .into(),
                        ))
                    }
                }
            }
        };

        let alpha = 0.5 - h;
        let shape = alpha + 1.0;
        let beta_full = statrs::function::beta::beta(shape, shape);
        let nodes = grid.nodes();
        let weights = (1..=n)
            .map(|i| {
                let ti = nodes[i];
                let scale = ti.powf(2.0 * alpha + 1.0) * beta_full / params.kappa_h();
                let cdf: Vec<f64> = nodes[..=i]
                    .iter()
                    .map(|&s| beta_reg(shape, shape, (s / ti).min(1.0)))
                    .collect();
                (0..i)
                    .map(|j| scale * (cdf[j + 1] - cdf[j]) / (nodes[j + 1] - nodes[j]))
                    .collect()
            })
            .collect();
        Ok(Self {
            params: *params,
            grid: Arc::new(grid.clone()),
            chol,
            weights,
            jittered,
        })
    }

    /// Whether the covariance needed the ridge retry.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// fBM values at `t_1, ..., t_N`.
    pub fn sample_fbm(&self, rng: RngSpec) -> Vec<f64> {
        let mut r = rng.rng();
        let n = self.grid.n_steps();
        let xi: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
        (0..n)
            .map(|i| {
                let row = self.chol.row(i);
                (0..=i).map(|j| row[j] * xi[j]).sum()
            })
            .collect()
    }

    pub fn path(&self, rng: RngSpec) -> SimPath {
        let nodes = self.grid.nodes();
        let n = self.grid.n_steps();
        let theta = self.params.theta();
        let e = 2.0 * self.params.hurst() - 1.0;
        let half_l = 0.5 * self.params.l_h();

        let fbm = self.sample_fbm(rng);
        let mut dw = Vec::with_capacity(n);
        let mut dx = Vec::with_capacity(n);
        let (mut w_prev, mut x) = (0.0, 0.0);
        for i in 0..n {
            let d = nodes[i + 1] - nodes[i];
            let inc = fbm[i] - w_prev;
            w_prev = fbm[i];
            let x_next = (x * (1.0 + 0.5 * theta * d) + inc) / (1.0 - 0.5 * theta * d);
            dw.push(inc);
            dx.push(x_next - x);
            x = x_next;
        }

        let mut m = vec![0.0; n + 1];
        let mut y = vec![0.0; n + 1];
        for i in 0..n {
            let w = &self.weights[i];
            let (mut sy, mut sm) = (0.0, 0.0);
            for j in 0..=i {
                sy += w[j] * dx[j];
                sm += w[j] * dw[j];
            }
            y[i + 1] = sy;
            m[i + 1] = sm;
        }

        let qv: Vec<f64> = nodes
            .iter()
            .map(|&t| self.params.quadratic_variation(t))
            .collect();
        let mut q = vec![0.0; n + 1];
        let mut s = vec![0.0; n + 1];
        let (mut z, mut score) = (0.0, 0.0);
        for i in 0..n {
            let g0 = if nodes[i] > 0.0 {
                nodes[i].powf(e)
            } else {
                0.0
            };
            let dy = y[i + 1] - y[i];
            z += g0 * dy;
            score += q[i] * dy;
            q[i + 1] = half_l * (nodes[i + 1].powf(e) * y[i + 1] + z);
            s[i + 1] = s[i] + 0.5 * (q[i] * q[i] + q[i + 1] * q[i + 1]) * (qv[i + 1] - qv[i]);
        }
        let terminal = TerminalStats::new(s[n], score, m[n]);
        SimPath {
            grid: Arc::clone(&self.grid),
            m,
            y,
            q,
            s,
            terminal,
        }
    }

    pub fn batch(&self, seed: u64, replicates: usize) -> Vec<TerminalStats> {
        (0..replicates as u64)
            .into_par_iter()
            .map(|k| self.path(RngSpec::new(seed, k)).terminal)
            .collect()
    }
}

/// One path of the fBM route (factorizes the covariance on every call).
pub fn simulate_fbm_oracle(params: &ModelParams, grid: &TimeGrid, rng: RngSpec) -> Result<SimPath> {
    Ok(FbmOracle::new(params, grid)?.path(rng))
}

/// Standardized CLT samples `(S_T + T/(2 theta)) / sqrt(-T/(2 theta^3))` and
/// `sqrt(T) (theta_hat - theta) / sqrt(-2 theta)`.
pub fn clt_statistics(
    stats: &[TerminalStats],
    params: &ModelParams,
    horizon: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if stats.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "CLT statistics need at least 1000 paths, got {}",
            stats.len()
        )));
    }
    let theta = params.theta();
    let energy_sd = (-horizon / (2.0 * theta.powi(3))).sqrt();
    let mle_sd = (-2.0 * theta).sqrt();
    let energy = stats
        .iter()
        .map(|s| (s.energy + horizon / (2.0 * theta)) / energy_sd)
        .collect();
    let mle = stats
        .iter()
        .map(|s| horizon.sqrt() * (s.theta_hat - theta) / mle_sd)
        .collect();
    Ok((energy, mle))
}
