//! Large deviations of the maximum likelihood estimator
//! `theta_hat_T = int Q dY / int Q^2 d<M>`.
//!
//! Tails are read off the auxiliary variable `Z_T(c) = int Q dY - c int Q^2 d<M>`,
//! since `{theta_hat_T >= c} = {Z_T(c) >= 0}`. Its limit cumulant generating
//! function is `L(a) = -(a + theta + sqrt(theta^2 + 2ac)) / 2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::special_fn::gamma_real;
use crate::tail::{check_horizon, TailApprox, TailSide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MleBranch {
    /// `c < theta`, lower tail.
    LeftTail,
    /// `theta <= c < theta/3`
    EasyBranch,
    /// `c` within the boundary tolerance of `theta/3`.
    BoundaryBranch,
    /// `c > theta/3`, `c != 0`
    HardBranch,
    /// `c = 0`
    ZeroCase,
}

impl MleBranch {
    pub fn name(self) -> &'static str {
        match self {
            MleBranch::LeftTail => "LeftTail",
            MleBranch::EasyBranch => "EasyBranch",
            MleBranch::BoundaryBranch => "BoundaryBranch",
            MleBranch::HardBranch => "HardBranch",
            MleBranch::ZeroCase => "ZeroCase",
        }
    }
}

pub type MleTail = TailApprox<MleBranch>;

/// Thresholds closer than this to zero are treated as `c = 0`.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Rate function of `theta_hat_T`. Does not depend on `H`.
pub fn rate_mle(params: &ModelParams, c: f64) -> f64 {
    let (easy, hard) = rate_mle_pieces(params, c);
    if c < params.theta() / 3.0 {
        easy
    } else {
        hard
    }
}

/// The two closed-form pieces of the MLE rate: `-(c - theta)^2 / (4c)` below
/// `theta / 3` and `2c - theta` above.
pub fn rate_mle_pieces(params: &ModelParams, c: f64) -> (f64, f64) {
    let theta = params.theta();
    (-(c - theta).powi(2) / (4.0 * c), 2.0 * c - theta)
}

/// Derivatives in `c` of the two pieces of [`rate_mle_pieces`].
pub fn rate_mle_piece_slopes(params: &ModelParams, c: f64) -> (f64, f64) {
    let theta = params.theta();
    ((theta * theta - c * c) / (4.0 * c * c), 2.0)
}

pub fn boundary_tolerance(params: &ModelParams, horizon: f64) -> f64 {
    ((params.theta() / 3.0).abs() / (10.0 * horizon)).max(1e-8)
}

pub fn classify_branch(params: &ModelParams, c: f64, horizon: f64) -> Result<MleBranch> {
    check_horizon(horizon)?;
    if !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold must be finite, got {c}"
        )));
    }
    let theta = params.theta();
    let third = theta / 3.0;
    Ok(if c.abs() <= ZERO_TOLERANCE {
        MleBranch::ZeroCase
    } else if (c - third).abs() <= boundary_tolerance(params, horizon) {
        MleBranch::BoundaryBranch
    } else if c > third {
        MleBranch::HardBranch
    } else if c < theta {
        MleBranch::LeftTail
    } else {
        MleBranch::EasyBranch
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainShape {
    /// `]a_1, a_2[`, for `c <= theta/2`
    BetweenRoots,
    /// `]a_1, a^c[`, for `c > theta/2`
    CappedAtAc,
}

/// Effective domain of the limit cumulant generating function of `Z_T(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MleDomain {
    pub lower: f64,
    pub upper: f64,
    pub shape: DomainShape,
}

impl MleDomain {
    pub fn contains(&self, a: f64) -> bool {
        a > self.lower && a < self.upper
    }
}

pub fn mle_domain(params: &ModelParams, c: f64) -> Result<MleDomain> {
    let theta = params.theta();
    let mu = params.delta_h().powi(2);
    let disc = c * c - 2.0 * theta * c * mu + theta * theta * mu;
    if !(disc >= 0.0) {
        return Err(Error::Domain(format!(
            "negative discriminant {disc} at c = {c}"
        )));
    }
    let root = disc.sqrt();
    let base = c - theta * mu;
    // (base -+ root) / mu, using root^2 - base^2 = theta^2 mu (1 - mu) on the
    // side where the difference cancels
    let lower = if base > 0.0 {
        -theta * theta * (1.0 - mu) / (base + root)
    } else {
        (base - root) / mu
    };
    let (upper, shape) = if c <= theta / 2.0 {
        let a2 = if base < 0.0 {
            theta * theta * (1.0 - mu) / (root - base)
        } else {
            (base + root) / mu
        };
        (a2, DomainShape::BetweenRoots)
    } else {
        (2.0 * (c - theta), DomainShape::CappedAtAc)
    };
    Ok(MleDomain {
        lower,
        upper,
        shape,
    })
}

/// `L(a) = L(a, -ca)` for the auxiliary variable, `+inf` off the domain.
pub fn limit_cgf(params: &ModelParams, c: f64, a: f64) -> f64 {
    let theta = params.theta();
    let disc = theta * theta + 2.0 * a * c;
    if disc <= 0.0 {
        return f64::INFINITY;
    }
    -0.5 * (a + theta + disc.sqrt())
}

/// `a_c = (c^2 - theta^2) / (2c)`, the zero of `L'`.
pub fn easy_saddle(params: &ModelParams, c: f64) -> f64 {
    let theta = params.theta();
    (c * c - theta * theta) / (2.0 * c)
}

/// Easy-branch tail: `P(theta_hat >= c)` for `theta < c < theta/3`, and
/// `P(theta_hat <= c)` for `c < theta`.
pub fn tail_mle_easy(params: &ModelParams, c: f64, horizon: f64) -> Result<MleTail> {
    check_horizon(horizon)?;
    let theta = params.theta();
    let centre_gap = (c - theta).abs() > 1e-12 * theta.abs();
    if !(c < theta / 3.0 && centre_gap) {
        return Err(Error::Branch {
            c,
            branch: "easy MLE",
        });
    }
    let j_arg = (c + theta) * (3.0 * c - theta) / (4.0 * c * c);
    if !(j_arg > 0.0) {
        return Err(Error::LogArgument("J(c)"));
    }
    let j = -0.5 * j_arg.ln();
    let k_h = -0.5 * (params.p_h() * (c - theta).powi(2) / (4.0 * c * c)).ln_1p();
    let a_c = easy_saddle(params, c);
    let sigma_c = (-0.5 / c).sqrt();
    let (side, branch) = if c > theta {
        (TailSide::Upper, MleBranch::EasyBranch)
    } else {
        (TailSide::Lower, MleBranch::LeftTail)
    };
    Ok(TailApprox {
        rate: rate_mle(params, c),
        log_prefactor: j + k_h - (sigma_c * a_c.abs() * (2.0 * PI).sqrt()).ln(),
        t_power: -0.5,
        order1: None,
        branch,
        side,
        horizon,
    })
}

/// Hard-branch tail `P(theta_hat >= c)` for `c > theta/3`, `c != 0`.
pub fn tail_mle_hard(params: &ModelParams, c: f64, horizon: f64) -> Result<MleTail> {
    check_horizon(horizon)?;
    let theta = params.theta();
    if !(c > theta / 3.0 && c.abs() > ZERO_TOLERANCE) {
        return Err(Error::Branch {
            c,
            branch: "hard MLE",
        });
    }
    let p_arg = (c - theta) * (3.0 * c - theta) / (4.0 * c * c);
    if !(p_arg > 0.0) {
        return Err(Error::LogArgument("P(c)"));
    }
    let p_term = -0.5 * p_arg.ln();
    let a_up = 2.0 * (c - theta);
    let sigma_up = (c * c / (2.0 * (2.0 * c - theta).powi(3))).sqrt();
    Ok(TailApprox {
        rate: rate_mle(params, c),
        log_prefactor: p_term + 0.5 * params.sin_pi_h().ln()
            - (sigma_up * a_up * (2.0 * PI).sqrt()).ln(),
        t_power: -0.5,
        order1: None,
        branch: MleBranch::HardBranch,
        side: TailSide::Upper,
        horizon,
    })
}

/// `P(theta_hat >= 0)`; note the leading factor 2.
pub fn tail_mle_zero(params: &ModelParams, horizon: f64) -> Result<MleTail> {
    check_horizon(horizon)?;
    let theta = params.theta();
    Ok(TailApprox {
        rate: rate_mle(params, 0.0),
        log_prefactor: 2f64.ln() + 0.5 * params.sin_pi_h().ln()
            - 0.5 * (2.0 * PI).ln()
            - 0.5 * (-2.0 * theta).ln(),
        t_power: -0.5,
        order1: None,
        branch: MleBranch::ZeroCase,
        side: TailSide::Upper,
        horizon,
    })
}

fn boundary_at(params: &ModelParams, c: f64, horizon: f64) -> Result<MleTail> {
    check_horizon(horizon)?;
    let theta = params.theta();
    let a_theta = -4.0 * theta / 3.0;
    let sigma_theta = (-1.5 / theta).sqrt();
    Ok(TailApprox {
        rate: rate_mle(params, c),
        log_prefactor: gamma_real(0.25)?.ln() + 0.5 * params.sin_pi_h().ln()
            - (4.0 * PI * a_theta.powf(0.75) * sigma_theta).ln(),
        t_power: -0.25,
        order1: None,
        branch: MleBranch::BoundaryBranch,
        side: TailSide::Upper,
        horizon,
    })
}

/// `P(theta_hat >= theta/3)`, decaying like `T^{-1/4}`.
pub fn tail_mle_boundary(params: &ModelParams, horizon: f64) -> Result<MleTail> {
    boundary_at(params, params.theta() / 3.0, horizon)
}

/// Branch-appropriate tail approximation.
pub fn tail_mle(params: &ModelParams, c: f64, horizon: f64) -> Result<MleTail> {
    match classify_branch(params, c, horizon)? {
        MleBranch::LeftTail | MleBranch::EasyBranch => tail_mle_easy(params, c, horizon),
        MleBranch::BoundaryBranch => boundary_at(params, c, horizon),
        MleBranch::HardBranch => tail_mle_hard(params, c, horizon),
        MleBranch::ZeroCase => tail_mle_zero(params, horizon),
    }
}
